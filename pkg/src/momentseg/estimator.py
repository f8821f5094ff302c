"""Appearance-model recovery from co-occurrence moments.

Under within-region pixel independence at the sampling distance, the pair
distribution decomposes as beta = Theta W Theta^T with Theta the L x K
matrix of region color models and W = diag(w) the region proportions, and
every triple slice anchored at color s decomposes as
Theta W^{1/2} diag(Theta[s, :]) W^{1/2} Theta^T. Factorization therefore
proceeds in four steps: truncated eigendecomposition of beta, whitening of
the gamma slices with the pseudo-inverse of M = U Lambda^{1/2}, orthogonal
joint diagonalization of the whitened slices by Jacobi sweeps, and finally
simplex projections that turn M O into column models and the least-squares
fit of alpha into proportions.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .types import ModelSet, MomentEstimates

__all__ = [
    "WhiteningFactor",
    "WhitenedSlices",
    "RankDeficiencyError",
    "truncated_psd_eig",
    "whiten_slices",
    "joint_diagonalize",
    "project_simplex",
    "estimate_models",
]

RANK_EPS = 1e-12


class RankDeficiencyError(ValueError):
    """The pair matrix does not support the requested number of regions."""

    def __init__(self, requested: int, effective: int):
        self.requested = requested
        self.effective = effective
        super().__init__(
            f"pair matrix has effective rank {effective}, cannot factor "
            f"{requested} regions")


@dataclass
class WhiteningFactor:
    """Rank-K square-root factor of the pair matrix and its pseudo-inverse."""

    matrix: np.ndarray       # M = U diag(sqrt(eigenvalues)), (L, K)
    pinv: np.ndarray         # (K, L), pinv @ matrix = I_K
    eigenvalues: np.ndarray  # (K,) nonnegative, descending
    eigenvectors: np.ndarray  # U, (L, K), orthonormal columns


@dataclass
class WhitenedSlices:
    """Gamma slices conjugated down to K x K by the whitening pseudo-inverse."""

    slices: np.ndarray        # (ell, K, K)
    slice_colors: np.ndarray  # (ell,)


def truncated_psd_eig(beta: np.ndarray, num_regions: int) -> WhiteningFactor:
    """Top-K eigenpairs of a symmetric PSD matrix, as a whitening factor.

    The input is symmetrized to absorb numerical asymmetry and eigenvalues
    are clamped at zero before the square root. Raises RankDeficiencyError
    when the K-th largest eigenvalue does not exceed RANK_EPS.
    """
    beta = np.asarray(beta, dtype=np.float64)
    L = beta.shape[0]
    if beta.shape != (L, L):
        raise ValueError("beta must be square")
    if not (1 <= num_regions <= L):
        raise ValueError("need 1 <= num_regions <= palette size")
    sym = 0.5 * (beta + beta.T)
    eigvals, eigvecs = np.linalg.eigh(sym)  # ascending
    top = eigvals[::-1][:num_regions].copy()
    vecs = eigvecs[:, ::-1][:, :num_regions].copy()
    if top[-1] <= RANK_EPS:
        raise RankDeficiencyError(num_regions, int((eigvals > RANK_EPS).sum()))
    top = np.maximum(top, 0.0)
    roots = np.sqrt(top)
    matrix = vecs * roots[None, :]
    pinv = vecs.T / roots[:, None]
    return WhiteningFactor(matrix=matrix, pinv=pinv,
                           eigenvalues=top, eigenvectors=vecs)


def whiten_slices(moments: MomentEstimates, wf: WhiteningFactor) -> WhitenedSlices:
    """Map every retained gamma slice G to pinv @ G @ pinv^T (K x K).

    Slices may carry raw counts; their global scale cancels downstream.
    """
    if wf.matrix.shape[0] != moments.palette_size:
        raise ValueError("whitening factor does not match the palette size")
    P = wf.pinv
    gamma = moments.gamma_slices.astype(np.float64, copy=False)
    whitened = np.einsum("kl,slm,nm->skn", P, gamma, P, optimize=True)
    return WhitenedSlices(slices=whitened, slice_colors=moments.slice_colors)


def joint_diagonalize(slices, tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """Orthogonal matrix O that simultaneously diagonalizes symmetric slices.

    Runs Jacobi sweeps of Givens rotations over index pairs; each rotation
    angle maximizes the summed squared diagonals of all slices in closed
    form. Sweeping stops when the per-sweep reduction of off-diagonal mass
    falls below tol relative to the total squared mass (which rotations
    preserve) or after max_sweeps. With a single index pair (K = 2) the
    first sweep is already optimal.
    """
    A = np.array(slices, dtype=np.float64)
    if A.ndim != 3 or A.shape[1] != A.shape[2]:
        raise ValueError("slices must be a stack of square matrices")
    n, K, _ = A.shape
    if n < 1:
        raise ValueError("need at least one slice")
    asym = np.abs(A - A.transpose(0, 2, 1)).max(axis=(1, 2))
    scale = np.abs(A).max(axis=(1, 2))
    if (asym > 1e-8 * np.maximum(scale, 1e-30)).any():
        raise ValueError("slices are not symmetric within tolerance")
    A = 0.5 * (A + A.transpose(0, 2, 1))

    O = np.eye(K)
    if K == 1:
        return O
    total = float((A * A).sum())
    if total == 0.0:
        return O

    def off_mass():
        d = np.einsum("skk->sk", A)
        return float((A * A).sum() - (d * d).sum())

    prev = off_mass()
    for _ in range(max_sweeps):
        for p in range(K - 1):
            for q in range(p + 1, K):
                h = A[:, p, p] - A[:, q, q]
                g = A[:, p, q] + A[:, q, p]
                ton = float(h @ h - g @ g)
                toff = float(2.0 * (h @ g))
                theta = 0.5 * math.atan2(toff, ton + math.hypot(ton, toff))
                c, s = math.cos(theta), math.sin(theta)
                if abs(s) < 1e-300:
                    continue
                rp = c * A[:, p, :] + s * A[:, q, :]
                rq = -s * A[:, p, :] + c * A[:, q, :]
                A[:, p, :], A[:, q, :] = rp, rq
                cp = c * A[:, :, p] + s * A[:, :, q]
                cq = -s * A[:, :, p] + c * A[:, :, q]
                A[:, :, p], A[:, :, q] = cp, cq
                op = c * O[:, p] + s * O[:, q]
                oq = -s * O[:, p] + c * O[:, q]
                O[:, p], O[:, q] = op, oq
        cur = off_mass()
        if prev - cur < tol * total:
            break
        prev = cur
    return O


def project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort and threshold)."""
    v = np.asarray(v, dtype=np.float64)
    n = v.shape[0]
    if n < 1:
        raise ValueError("vector must be nonempty")
    u = np.sort(v)[::-1]
    cssv = np.cumsum(u)
    idx = np.arange(1, n + 1)
    cond = u + (1.0 - cssv) / idx > 0
    rho = int(idx[cond][-1])
    lam = (1.0 - cssv[rho - 1]) / rho
    return np.maximum(v + lam, 0.0)


def _column_to_model(col: np.ndarray) -> np.ndarray:
    """Rescale a recovered column to unit sum, then project onto the simplex.

    Recovered columns carry the per-region factor sqrt(w_s) and an arbitrary
    sign; dividing by the (signed) sum removes both exactly when the column
    is clean, and the projection repairs any remaining noise.
    """
    total = col.sum()
    if total == 0.0:
        return np.full(col.shape[0], 1.0 / col.shape[0])
    return project_simplex(col / total)


def estimate_models(moments: MomentEstimates, num_regions: int) -> ModelSet:
    """Recover the region color models and proportions from moment estimates.

    Pipeline: truncated eigendecomposition of beta, slice whitening, joint
    diagonalization, per-column simplex mapping of M O, and a projected
    least-squares fit of alpha for the proportions. Output rows are ordered
    by descending weight. Deterministic for fixed inputs.
    """
    if num_regions < 1:
        raise ValueError("num_regions must be >= 1")
    L = moments.palette_size
    if num_regions == 1:
        theta = project_simplex(moments.alpha)
        return ModelSet(palette_size=L, num_regions=1,
                        theta=theta[None, :], weights=np.array([1.0]))
    if num_regions > moments.num_slices:
        warnings.warn(
            f"only {moments.num_slices} gamma slices for {num_regions} regions; "
            "the joint diagonalizer may be underdetermined", RuntimeWarning)

    wf = truncated_psd_eig(moments.beta, num_regions)
    white = whiten_slices(moments, wf)
    O = joint_diagonalize(white.slices)
    raw = wf.matrix @ O  # columns approximate sqrt(w_s) * theta_s

    K = num_regions
    theta = np.empty((K, L), dtype=np.float64)
    for k in range(K):
        theta[k] = _column_to_model(raw[:, k])

    ls, _, rank, _ = np.linalg.lstsq(theta.T, moments.alpha, rcond=None)
    if rank < K:
        warnings.warn("estimated models are rank deficient; "
                      "using ridge-damped normal equations", RuntimeWarning)
        G = theta @ theta.T + 1e-10 * np.eye(K)
        ls = np.linalg.solve(G, theta @ moments.alpha)
    weights = project_simplex(ls)

    order = np.argsort(-weights, kind="stable")
    return ModelSet(palette_size=L, num_regions=K,
                    theta=theta[order], weights=weights[order])
