"""Public geometry kernels: FPS, kNN, segment distances, parity tests.

A compiled backend is preferred when the extension built; setting
``PCSIM_PURE_PYTHON=1`` forces the NumPy fallback. Both backends are exact
twins (bitwise-identical outputs), so the choice only affects speed — see
``benchmarks/bench_kernels.py``.
"""

import os

import numpy as np

from ..errors import EmptyInputError, SizeError

if os.environ.get("PCSIM_PURE_PYTHON"):
    from . import _kernels_py as _impl
else:
    try:
        from . import _kernels_c as _impl  # type: ignore[attr-defined]
    except ImportError:
        from . import _kernels_py as _impl

BACKEND = _impl.BACKEND


def _as_points(points) -> np.ndarray:
    pts = np.ascontiguousarray(points, dtype=np.float64)
    if pts.ndim == 1:
        pts = pts[:, None]
    if pts.ndim != 2:
        raise ValueError(f"expected an (N, D) point array, got shape {pts.shape}")
    return pts


def farthest_point_sample(points, m: int, start: int | None = None, rng=None) -> np.ndarray:
    """Greedily pick m indices, each maximizing min-distance to the picks so far.

    Deterministic given (points, m, start); `start` defaults to a draw from
    `rng`. Ties break toward the lowest index.
    """
    pts = _as_points(points)
    n = pts.shape[0]
    if n == 0:
        raise EmptyInputError("farthest_point_sample: empty point set")
    if not 1 <= m <= n:
        raise SizeError(f"farthest_point_sample: m={m} not in [1, {n}]")
    if start is None:
        if rng is None:
            raise ValueError("farthest_point_sample: need a start index or an rng")
        start = int(rng.integers(n))
    if not 0 <= start < n:
        raise SizeError(f"farthest_point_sample: start={start} out of range")
    return _impl.farthest_point_sample(pts, int(m), int(start))


def knn(query, points, k: int) -> np.ndarray:
    """Indices of the k nearest points to `query`, ascending distance.

    Exact Euclidean metric; ties break toward the lower index.
    """
    pts = _as_points(points)
    q = np.ascontiguousarray(query, dtype=np.float64).reshape(1, -1)
    if q.shape[1] != pts.shape[1]:
        raise ValueError("knn: query dimension mismatch")
    if not 1 <= k <= pts.shape[0]:
        raise SizeError(f"knn: k={k} not in [1, {pts.shape[0]}]")
    return _impl.knn_batch(q, pts, int(k))[0]


def knn_batch(queries, points, k: int) -> np.ndarray:
    """(Q, k) nearest-point indices for each row of `queries`."""
    pts = _as_points(points)
    q = _as_points(queries)
    if q.shape[1] != pts.shape[1]:
        raise ValueError("knn_batch: query dimension mismatch")
    if not 1 <= k <= pts.shape[0]:
        raise SizeError(f"knn_batch: k={k} not in [1, {pts.shape[0]}]")
    return _impl.knn_batch(q, pts, int(k))


def segment_min_dist(points, seg_a, seg_b) -> np.ndarray:
    """Distance from each 2D point to the closest of the given segments."""
    p = _as_points(points)
    a = _as_points(seg_a)
    b = _as_points(seg_b)
    if a.shape != b.shape or a.shape[1] != 2 or p.shape[1] != 2:
        raise ValueError("segment_min_dist: expected 2D points and segments")
    if a.shape[0] == 0:
        raise EmptyInputError("segment_min_dist: no segments")
    return _impl.segment_min_dist(p, a, b)


def polyline_parity(points, seg_a, seg_b) -> np.ndarray:
    """Even-odd inside test of 2D points against a closed segment soup."""
    p = _as_points(points)
    a = _as_points(seg_a)
    b = _as_points(seg_b)
    return _impl.polyline_parity(p, a, b)
