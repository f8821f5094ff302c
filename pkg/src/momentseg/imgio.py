"""Portable-anymap I/O and structured-text serialization.

Binary graymaps/pixmaps (P5/P6) are the canonical on-disk form; the ASCII
variants (P2/P3) are accepted on read. Label maps are written as viewable
graymaps with labels rescaled to the full 8-bit range, and an exact JSON
sidecar (``<path>.json``) is emitted alongside so segmentations round-trip
losslessly. Model sets, segmentations and evaluation reports serialize as
JSON with stable field names.
"""

from __future__ import annotations

import json
import os

import numpy as np

from .types import DiscreteImage, ModelSet, RgbImage, Segmentation

__all__ = [
    "load_anymap",
    "save_anymap",
    "save_label_map",
    "load_label_map",
    "serialize_model_set",
    "deserialize_model_set",
    "save_model_set",
    "load_model_set",
    "serialize_segmentation",
    "deserialize_segmentation",
]


class AnymapError(ValueError):
    """Raised for malformed or unsupported portable-anymap data."""


def _read_tokens(data: bytes, count: int, start: int):
    """Read `count` whitespace-separated header tokens, skipping # comments.

    Returns (tokens, offset just past the single whitespace byte that
    terminates the last token).
    """
    tokens = []
    i = start
    n = len(data)
    while len(tokens) < count:
        while i < n and data[i:i + 1].isspace():
            i += 1
        if i < n and data[i:i + 1] == b"#":
            while i < n and data[i:i + 1] not in (b"\n", b"\r"):
                i += 1
            continue
        j = i
        while j < n and not data[j:j + 1].isspace() and data[j:j + 1] != b"#":
            j += 1
        if j == i:
            raise AnymapError("truncated header")
        tokens.append(data[i:j])
        i = j
    if i >= n or not data[i:i + 1].isspace():
        raise AnymapError("missing whitespace after header")
    return tokens, i + 1


def load_anymap(path):
    """Load a P2/P3/P5/P6 file as a DiscreteImage (graymap) or RgbImage (pixmap)."""
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) < 2:
        raise AnymapError("file too short for an anymap header")
    magic = data[:2]
    if magic not in (b"P2", b"P3", b"P5", b"P6"):
        raise AnymapError(f"unsupported magic {magic!r}")
    (w_tok, h_tok, max_tok), payload_at = _read_tokens(data, 3, 2)
    try:
        width, height, maxval = int(w_tok), int(h_tok), int(max_tok)
    except ValueError as exc:
        raise AnymapError("non-numeric header field") from exc
    if width < 1 or height < 1:
        raise AnymapError("non-positive dimensions")
    if not (1 <= maxval <= 65535):
        raise AnymapError(f"maxval {maxval} outside [1, 65535]")

    channels = 3 if magic in (b"P3", b"P6") else 1
    nvalues = width * height * channels

    if magic in (b"P5", b"P6"):
        itemsize = 2 if maxval > 255 else 1
        payload = data[payload_at:payload_at + nvalues * itemsize]
        if len(payload) < nvalues * itemsize:
            raise AnymapError("truncated payload")
        dtype = ">u2" if itemsize == 2 else np.uint8
        values = np.frombuffer(payload, dtype=dtype, count=nvalues).astype(np.int32)
    else:
        fields = data[payload_at:].split()
        if len(fields) < nvalues:
            raise AnymapError("truncated payload")
        try:
            values = np.array([int(f) for f in fields[:nvalues]], dtype=np.int32)
        except ValueError as exc:
            raise AnymapError("non-numeric sample") from exc

    if values.size and (values.min() < 0 or values.max() > maxval):
        raise AnymapError("sample value exceeds declared maxval")

    if channels == 1:
        pixels = values.reshape(height, width)
        return DiscreteImage(width=width, height=height,
                             palette_size=maxval + 1, pixels=pixels)
    if maxval > 255:
        raise AnymapError("pixmaps with maxval > 255 are not supported")
    pixels = values.reshape(height, width, 3).astype(np.uint8)
    return RgbImage(width=width, height=height, pixels=pixels)


def save_anymap(img, path) -> None:
    """Write a DiscreteImage as binary P5 or an RgbImage as binary P6.

    Graymaps use maxval = palette_size - 1, so palette_size must be >= 2
    (the format requires maxval >= 1) and <= 65536.
    """
    if isinstance(img, DiscreteImage):
        maxval = img.palette_size - 1
        if maxval < 1:
            raise AnymapError("palette_size must be >= 2 to write a graymap")
        if maxval > 65535:
            raise AnymapError("palette_size above 65536 is not representable")
        header = f"P5\n{img.width} {img.height}\n{maxval}\n".encode("ascii")
        if maxval > 255:
            body = img.pixels.astype(">u2").tobytes()
        else:
            body = img.pixels.astype(np.uint8).tobytes()
    elif isinstance(img, RgbImage):
        header = f"P6\n{img.width} {img.height}\n255\n".encode("ascii")
        body = img.pixels.tobytes()
    else:
        raise TypeError("expected DiscreteImage or RgbImage")
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(body)


def _label_gray_values(num_regions: int) -> np.ndarray:
    if num_regions == 1:
        return np.zeros(1, dtype=np.int32)
    k = np.arange(num_regions, dtype=np.int64)
    return (255 * k // (num_regions - 1)).astype(np.int32)


def save_label_map(seg: Segmentation, path, sidecar: bool = True) -> None:
    """Write a segmentation as a viewable graymap plus an exact JSON sidecar.

    Gray value of label k is floor(255*k/(K-1)) (0 when K == 1). The sidecar
    at ``<path>.json`` preserves labels exactly; the graymap alone is lossy
    only in its value scaling.
    """
    if seg.num_regions > 256:
        raise ValueError("label maps support at most 256 regions")
    gray = _label_gray_values(seg.num_regions)[seg.labels]
    img = DiscreteImage(width=seg.width, height=seg.height,
                        palette_size=256, pixels=gray)
    save_anymap(img, path)
    if sidecar:
        with open(str(path) + ".json", "w", encoding="ascii") as fh:
            fh.write(serialize_segmentation(seg))


def load_label_map(path) -> Segmentation:
    """Load a segmentation, preferring the exact JSON sidecar when present.

    Without a sidecar the labels are reconstructed by ranking the distinct
    gray values in ascending order, which recovers the original labeling for
    maps written by save_label_map as long as every label occurs.
    """
    sidecar = str(path) + ".json"
    if os.path.exists(sidecar):
        with open(sidecar, "r", encoding="ascii") as fh:
            return deserialize_segmentation(fh.read())
    img = load_anymap(path)
    if not isinstance(img, DiscreteImage):
        raise AnymapError("label maps must be graymaps")
    values = np.unique(img.pixels)
    lookup = {int(v): i for i, v in enumerate(values)}
    labels = np.vectorize(lookup.__getitem__, otypes=[np.int32])(img.pixels)
    return Segmentation(width=img.width, height=img.height,
                        num_regions=len(values), labels=labels)


def serialize_model_set(models: ModelSet) -> str:
    """Serialize a ModelSet to JSON text with stable field names."""
    models.validate(tol=1e-6)
    doc = {
        "L": models.palette_size,
        "K": models.num_regions,
        "theta": [[float(v) for v in row] for row in models.theta],
        "w": [float(v) for v in models.weights],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def deserialize_model_set(text: str) -> ModelSet:
    """Parse JSON text produced by serialize_model_set.

    Raises ValueError on missing fields or simplex violations beyond 1e-6.
    Stored values are kept verbatim (no renormalization) so that
    serialize/deserialize round-trips are exact.
    """
    doc = json.loads(text)
    for key in ("L", "K", "theta", "w"):
        if key not in doc:
            raise ValueError(f"model set text is missing field {key!r}")
    models = ModelSet(
        palette_size=int(doc["L"]),
        num_regions=int(doc["K"]),
        theta=np.array(doc["theta"], dtype=np.float64),
        weights=np.array(doc["w"], dtype=np.float64),
    )
    models.validate(tol=1e-6)
    return models


def save_model_set(models: ModelSet, path) -> None:
    with open(path, "w", encoding="ascii") as fh:
        fh.write(serialize_model_set(models))


def load_model_set(path) -> ModelSet:
    with open(path, "r", encoding="ascii") as fh:
        return deserialize_model_set(fh.read())


def serialize_segmentation(seg: Segmentation) -> str:
    doc = {
        "width": seg.width,
        "height": seg.height,
        "K": seg.num_regions,
        "labels": [int(v) for v in seg.labels.ravel()],
    }
    return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"


def deserialize_segmentation(text: str) -> Segmentation:
    doc = json.loads(text)
    for key in ("width", "height", "K", "labels"):
        if key not in doc:
            raise ValueError(f"segmentation text is missing field {key!r}")
    labels = np.array(doc["labels"], dtype=np.int32).reshape(
        int(doc["height"]), int(doc["width"]))
    return Segmentation(width=int(doc["width"]), height=int(doc["height"]),
                        num_regions=int(doc["K"]), labels=labels)
