"""NumPy implementations of the geometry kernels.

This is the fallback backend; `pcsim.geom._kernels_c` is the compiled twin.
Both backends must produce bitwise-identical results: same float64 formulas,
same tie-breaking (lowest index wins everywhere).
"""

import numpy as np

BACKEND = "numpy"


def farthest_point_sample(points: np.ndarray, m: int, start: int) -> np.ndarray:
    """Greedy farthest point sampling over an (N, D) float64 array.

    Selected points get a sentinel distance of -1 so duplicates can never be
    re-picked; argmax returns the first (lowest-index) maximum.
    """
    n = points.shape[0]
    out = np.empty(m, dtype=np.int64)
    d2 = np.full(n, np.inf, dtype=np.float64)
    cur = int(start)
    for i in range(m):
        out[i] = cur
        d2[cur] = -1.0
        if i + 1 == m:
            break
        delta = points - points[cur]
        cand = np.einsum("nd,nd->n", delta, delta)
        np.minimum(d2, np.where(d2 < 0.0, d2, cand), out=d2)
        cur = int(np.argmax(d2))
    return out


def knn_batch(queries: np.ndarray, points: np.ndarray, k: int) -> np.ndarray:
    """Row-wise knn for a (Q, D) query array; returns (Q, k) indices.

    Distances are formed per query exactly like the scalar path (no expanded
    quadratic form) so knn and knn_batch agree bitwise across backends.
    """
    q = queries.shape[0]
    out = np.empty((q, k), dtype=np.int64)
    for i in range(q):
        delta = points - queries[i]
        row = np.einsum("nd,nd->n", delta, delta)
        out[i] = np.argsort(row, kind="stable")[:k]
    return out


def segment_min_dist(points: np.ndarray, seg_a: np.ndarray, seg_b: np.ndarray) -> np.ndarray:
    """Min distance from each (P, 2) point to any 2D segment (a[i], b[i])."""
    ab = seg_b - seg_a  # (S, 2)
    ab2 = np.einsum("sd,sd->s", ab, ab)
    ab2 = np.where(ab2 == 0.0, 1.0, ab2)
    ap = points[:, None, :] - seg_a[None, :, :]  # (P, S, 2)
    t = np.einsum("psd,sd->ps", ap, ab) / ab2
    t = np.clip(t, 0.0, 1.0)
    closest = seg_a[None, :, :] + t[:, :, None] * ab[None, :, :]
    diff = points[:, None, :] - closest
    d2 = np.einsum("psd,psd->ps", diff, diff)
    return np.sqrt(d2.min(axis=1))


def polyline_parity(points: np.ndarray, seg_a: np.ndarray, seg_b: np.ndarray) -> np.ndarray:
    """Even-odd inside test: odd crossing count of a +x ray, (P,) bool.

    Uses the half-open rule (ya <= qy < yb or yb <= qy < ya) so shared
    segment endpoints are counted once.
    """
    qx = points[:, 0][:, None]
    qy = points[:, 1][:, None]
    ya = seg_a[:, 1][None, :]
    yb = seg_b[:, 1][None, :]
    xa = seg_a[:, 0][None, :]
    xb = seg_b[:, 0][None, :]
    straddle = (ya > qy) != (yb > qy)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = xa + (qy - ya) * (xb - xa) / (yb - ya)
    crosses = straddle & (qx < xint)
    return (crosses.sum(axis=1) % 2).astype(bool)
