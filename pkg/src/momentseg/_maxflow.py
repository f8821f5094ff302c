"""Min-cut kernel for 4-connected grid graphs.

Augmenting-path max flow in the style of Boykov and Kolmogorov: two search
trees rooted at the terminals are grown, reused across augmentations, and
repaired through an orphan-adoption pass instead of being rebuilt. Terminal
edges are folded into a single signed residual per node (positive: residual
capacity from the source; negative: capacity to the sink), which leaves the
cut structure unchanged.

The final labeling assigns 1 to every node that can still reach the sink in
the residual graph and 0 to the rest. Taking the complement of the
sink-reaching set (rather than the source-reachable set) selects the
maximal source side among all minimum cuts, so cost ties resolve to label 0.
"""

from __future__ import annotations

import numpy as np
from numba import njit

__all__ = ["solve_grid_cut"]

_EPS = 1e-11

_FREE, _SRC, _SNK = np.uint8(0), np.uint8(1), np.uint8(2)
_NONE, _TERMINAL = np.int8(-1), np.int8(4)


@njit(cache=True, inline="always")
def _neighbor(x, d, height, width):
    row = x // width
    col = x - row * width
    if d == 0:
        return x + 1 if col < width - 1 else -1
    if d == 1:
        return x - 1 if col > 0 else -1
    if d == 2:
        return x + width if row < height - 1 else -1
    return x - width if row > 0 else -1


@njit(cache=True, inline="always")
def _rev(d):
    if d == 0:
        return 1
    if d == 1:
        return 0
    if d == 2:
        return 3
    return 2


@njit(cache=True)
def _has_root(node, parent_dir, height, width):
    w = node
    while True:
        pd = parent_dir[w]
        if pd == _TERMINAL:
            return True
        if pd == _NONE:
            return False
        w = _neighbor(w, pd, height, width)


@njit(cache=True)
def _bk_maxflow(tcap, cap, height, width):  # pragma: no cover - exercised via wrapper
    n = height * width
    tree = np.zeros(n, dtype=np.uint8)
    parent_dir = np.full(n, _NONE, dtype=np.int8)

    queue = np.empty(n, dtype=np.int64)
    in_queue = np.zeros(n, dtype=np.uint8)
    q_head = 0
    q_tail = 0
    q_count = 0

    orphans = np.empty(n, dtype=np.int64)
    o_top = 0

    for x in range(n):
        if tcap[x] > _EPS:
            tree[x] = _SRC
            parent_dir[x] = _TERMINAL
        elif tcap[x] < -_EPS:
            tree[x] = _SNK
            parent_dir[x] = _TERMINAL
        else:
            continue
        queue[q_tail] = x
        q_tail = (q_tail + 1) % n
        q_count += 1
        in_queue[x] = 1

    while True:
        # -- growth: expand trees until an S node meets a T node
        bridge_from = -1
        bridge_dir = -1
        while q_count > 0:
            p = queue[q_head]
            q_head = (q_head + 1) % n
            q_count -= 1
            in_queue[p] = 0
            tp = tree[p]
            if tp == _FREE:
                continue
            for d in range(4):
                q = _neighbor(p, d, height, width)
                if q < 0:
                    continue
                if tp == _SRC:
                    res = cap[p, d]
                else:
                    res = cap[q, _rev(d)]
                if res <= _EPS:
                    continue
                tq = tree[q]
                if tq == _FREE:
                    tree[q] = tp
                    parent_dir[q] = _rev(d)
                    if in_queue[q] == 0:
                        queue[q_tail] = q
                        q_tail = (q_tail + 1) % n
                        q_count += 1
                        in_queue[q] = 1
                elif tq != tp:
                    if tp == _SRC:
                        bridge_from = p
                        bridge_dir = d
                    else:
                        bridge_from = q
                        bridge_dir = _rev(d)
                    break
            if bridge_from >= 0:
                if in_queue[p] == 0:  # neighbor scan was interrupted
                    queue[q_tail] = p
                    q_tail = (q_tail + 1) % n
                    q_count += 1
                    in_queue[p] = 1
                break
        if bridge_from < 0:
            break

        sp = bridge_from
        tq = _neighbor(sp, bridge_dir, height, width)

        # -- bottleneck along s-root .. sp -> tq .. t-root
        bn = cap[sp, bridge_dir]
        v = sp
        while parent_dir[v] != _TERMINAL:
            pd = parent_dir[v]
            u = _neighbor(v, pd, height, width)
            r = cap[u, _rev(pd)]
            if r < bn:
                bn = r
            v = u
        if tcap[v] < bn:
            bn = tcap[v]
        v = tq
        while parent_dir[v] != _TERMINAL:
            pd = parent_dir[v]
            r = cap[v, pd]
            if r < bn:
                bn = r
            v = _neighbor(v, pd, height, width)
        if -tcap[v] < bn:
            bn = -tcap[v]

        # -- augment and collect orphans
        cap[sp, bridge_dir] -= bn
        cap[tq, _rev(bridge_dir)] += bn
        v = sp
        while parent_dir[v] != _TERMINAL:
            pd = parent_dir[v]
            u = _neighbor(v, pd, height, width)
            cap[u, _rev(pd)] -= bn
            cap[v, pd] += bn
            if cap[u, _rev(pd)] <= _EPS:
                parent_dir[v] = _NONE
                orphans[o_top] = v
                o_top += 1
            v = u
        tcap[v] -= bn
        if tcap[v] <= _EPS:
            parent_dir[v] = _NONE
            orphans[o_top] = v
            o_top += 1
        v = tq
        while parent_dir[v] != _TERMINAL:
            pd = parent_dir[v]
            u = _neighbor(v, pd, height, width)
            cap[v, pd] -= bn
            cap[u, _rev(pd)] += bn
            if cap[v, pd] <= _EPS:
                parent_dir[v] = _NONE
                orphans[o_top] = v
                o_top += 1
            v = u
        tcap[v] += bn
        if tcap[v] >= -_EPS:
            parent_dir[v] = _NONE
            orphans[o_top] = v
            o_top += 1

        # -- adoption: repair the trees instead of rebuilding them
        while o_top > 0:
            o_top -= 1
            v = orphans[o_top]
            tv = tree[v]
            adopted = False
            for d in range(4):
                u = _neighbor(v, d, height, width)
                if u < 0 or tree[u] != tv:
                    continue
                if tv == _SRC:
                    res = cap[u, _rev(d)]
                else:
                    res = cap[v, d]
                if res <= _EPS:
                    continue
                if _has_root(u, parent_dir, height, width):
                    parent_dir[v] = np.int8(d)
                    adopted = True
                    break
            if adopted:
                continue
            for d in range(4):
                u = _neighbor(v, d, height, width)
                if u < 0 or tree[u] != tv:
                    continue
                if tv == _SRC:
                    res = cap[u, _rev(d)]
                else:
                    res = cap[v, d]
                if res > _EPS and in_queue[u] == 0:
                    queue[q_tail] = u
                    q_tail = (q_tail + 1) % n
                    q_count += 1
                    in_queue[u] = 1
                if parent_dir[u] == _rev(d):  # u was v's child
                    parent_dir[u] = _NONE
                    orphans[o_top] = u
                    o_top += 1
            tree[v] = _FREE
            parent_dir[v] = _NONE

    # -- labels: 1 for nodes that still reach the sink in the residual graph
    labels = np.zeros(n, dtype=np.uint8)
    stack = np.empty(n, dtype=np.int64)
    top = 0
    for x in range(n):
        if tcap[x] < -_EPS:
            labels[x] = 1
            stack[top] = x
            top += 1
    while top > 0:
        top -= 1
        v = stack[top]
        for d in range(4):
            u = _neighbor(v, d, height, width)
            if u < 0 or labels[u] == 1:
                continue
            if cap[u, _rev(d)] > _EPS:
                labels[u] = 1
                stack[top] = u
                top += 1
    return labels


def solve_grid_cut(tcap: np.ndarray, cap: np.ndarray,
                   height: int, width: int) -> np.ndarray:
    """Solve the binary grid cut; returns a (height, width) uint8 label map.

    tcap holds the folded terminal residual per node (flattened row-major);
    cap[x, d] the capacity of the directed edge from x toward neighbor
    direction d in (right, left, down, up). Both arrays are consumed.
    """
    tcap = np.ascontiguousarray(tcap, dtype=np.float64).ravel()
    cap = np.ascontiguousarray(cap, dtype=np.float64)
    if cap.shape != (height * width, 4):
        raise ValueError("cap must have shape (height*width, 4)")
    labels = _bk_maxflow(tcap, cap, height, width)
    return labels.reshape(height, width)
