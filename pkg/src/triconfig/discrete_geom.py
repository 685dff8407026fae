"""Exact congruent-triangle counting and distance statistics on finite
point sets in the unit square, plus the counting-exponent experiment for
thickening-admissible families.

Counts are over ordered triples of distinct points with closed two-sided
windows [t_ij - delta, t_ij + delta]; the fast and brute paths decide the
identical predicate, so their results agree exactly, not just closely.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _parallel
from ._spatial import CellIndex, triple_reduce
from .circle_kernel import TriangleSpec
from .errors import AdaptabilityError, ConfigError
from .measure_core import is_adaptable

__all__ = [
    "PointSet",
    "CellIndex",
    "ExponentFit",
    "GeneratorSpec",
    "fit_loglog",
    "generate",
    "count_congruent_brute",
    "count_congruent_fast",
    "distinct_distances",
    "distinct_triangle_classes",
    "corollary_experiment",
    "CorollaryResult",
]


@dataclass
class PointSet:
    """Points in the closed unit square with no exact duplicates."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.ascontiguousarray(np.asarray(self.points, dtype=float))
        if pts.ndim != 2 or pts.shape[1] != 2:
            raise ConfigError("points must have shape (n, 2)")
        if np.any(pts < 0.0) or np.any(pts > 1.0):
            raise ConfigError("points must lie in the unit square")
        if len(np.unique(pts, axis=0)) != len(pts):
            raise ConfigError("duplicate points are not allowed")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return len(self.points)


@dataclass
class ExponentFit:
    """Least-squares slope of log(value) against log(size)."""

    sizes: np.ndarray
    values: np.ndarray
    slope: float
    intercept: float
    residual: float
    r2: float


def fit_loglog(sizes, values) -> ExponentFit:
    x = np.asarray(sizes, dtype=float)
    y = np.asarray(values, dtype=float)
    if len(x) < 3:
        raise ConfigError("need at least 3 samples to fit an exponent")
    if np.any(np.diff(x) <= 0):
        raise ConfigError("sizes must be strictly increasing")
    if np.any(y <= 0):
        raise ConfigError("values must be positive for a log-log fit")
    lx, ly = np.log(x), np.log(y)
    A = np.column_stack([np.ones_like(lx), lx])
    coef, *_ = np.linalg.lstsq(A, ly, rcond=None)
    pred = A @ coef
    ss_res = float(((ly - pred) ** 2).sum())
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 - (ss_res / ss_tot if ss_tot > 0 else 0.0)
    return ExponentFit(x, y, float(coef[1]), float(coef[0]), math.sqrt(ss_res), r2)


# ---------------------------------------------------------------------------
# Point-set generators


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str
    n: int
    seed: int = 0
    params: tuple = ()

    def make(self, n: int | None = None) -> PointSet:
        return generate(self.kind, self.n if n is None else n, self.seed, **dict(self.params))


def generate(kind: str, n: int, seed: int = 0, **params) -> PointSet:
    """Deterministic point families: grid, random-uniform, cantor-product, cluster."""
    if n < 1:
        raise ConfigError("n must be >= 1")
    if kind == "grid":
        k = int(round(math.sqrt(n)))
        if k * k != n:
            raise ConfigError(f"grid family needs a perfect square, got {n}")
        side = np.arange(k) / max(k - 1, 1)
        X, Y = np.meshgrid(side, side, indexing="ij")
        return PointSet(np.column_stack([X.ravel(), Y.ravel()]))
    if kind == "random-uniform":
        rng = np.random.default_rng(seed)
        pts = rng.random((n, 2))
        # exact duplicates are astronomically unlikely; resample if they occur
        while len(np.unique(np.round(pts / 1e-12), axis=0)) != n:
            pts = rng.random((n, 2))
        return PointSet(pts)
    if kind == "cantor-product":
        ratio = params.get("ratio", 2.0 ** (-4.0 / 3.0))
        L = max(1, int(round(math.log(n) / math.log(4.0))))
        xs = np.array([0.0])
        for k in range(L):
            xs = np.concatenate([xs, xs + (1.0 - ratio) * ratio**k])
        xs = np.sort(xs) / max(xs.max(), 1.0)
        X, Y = np.meshgrid(xs, xs, indexing="ij")
        return PointSet(np.column_stack([X.ravel(), Y.ravel()]))
    if kind == "cluster":
        radius = params.get("radius", float(n) ** -2.0)
        rng = np.random.default_rng(seed)
        ang = rng.random(n) * 2.0 * math.pi
        rad = radius * np.sqrt(rng.random(n))
        pts = 0.5 + np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
        while len(np.unique(pts, axis=0)) != n:
            ang = rng.random(n) * 2.0 * math.pi
            rad = radius * np.sqrt(rng.random(n))
            pts = 0.5 + np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
        return PointSet(np.clip(pts, 0.0, 1.0))
    raise ConfigError(f"unknown generator kind {kind!r}")


# ---------------------------------------------------------------------------
# Congruent-triangle counting


def _windows(spec: TriangleSpec, delta: float):
    t12, t13, t23 = spec.sides
    return (
        (t12 - delta, t12 + delta),
        (t13 - delta, t13 + delta),
        (t23 - delta, t23 + delta),
    )


def count_congruent_brute(P: PointSet, spec: TriangleSpec, delta: float) -> int:
    """Dense count of ordered triples of distinct points with every side in
    its closed window, decided on squared distances."""
    if delta <= 0:
        raise ConfigError("delta must be > 0")
    n = P.n
    if n < 3:
        return 0
    if n > 2000:
        warnings.warn(f"brute-force count on n={n} points is cubic; expect a wait")
    (lo12, hi12), (lo13, hi13), (lo23, hi23) = _windows(spec, delta)
    pts = P.points
    dx = pts[:, 0][:, None] - pts[:, 0][None, :]
    dy = pts[:, 1][:, None] - pts[:, 1][None, :]
    d2 = dx * dx + dy * dy
    np.fill_diagonal(d2, np.nan)  # NaN fails every window: repeated indices drop out
    sq = lambda v: max(v, 0.0) ** 2
    with np.errstate(invalid="ignore"):
        w12 = ((d2 >= sq(lo12)) & (d2 <= hi12 * hi12)).astype(np.float64)
        w13 = ((d2 >= sq(lo13)) & (d2 <= hi13 * hi13)).astype(np.float64)
        w23 = ((d2 >= sq(lo23)) & (d2 <= hi23 * hi23)).astype(np.float64)
    total = float(((w12.T @ w13) * w23).sum())
    return int(round(total))


def count_congruent_fast(P: PointSet, spec: TriangleSpec, delta: float) -> int:
    """Cell-indexed count, exactly equal to the brute predicate.

    Annulus range queries around apex batches produce leg candidates; an
    angular band around the apex prunes third-side pairs before the exact
    closed-window check on squared distances.  delta < min side / 4 keeps
    zero distances out of every window, so distinctness is automatic.
    """
    if delta <= 0:
        raise ConfigError("delta must be > 0")
    if delta >= spec.min_side / 4.0:
        raise ConfigError("fast counting requires delta < min side / 4")
    n = P.n
    if n < 3:
        return 0
    pts = P.points
    h = max(delta, 1.0 / math.ceil(math.sqrt(n)))
    index = CellIndex(pts, h)
    total = triple_reduce(pts, np.ones(n), index, *_windows(spec, delta))
    return int(round(total))


def distinct_distances(P: PointSet, resolution: float = 0.0) -> int:
    """Number of distinct nonzero pairwise distances, merged at `resolution`
    (0 compares exact float values)."""
    if resolution < 0:
        raise ConfigError("resolution must be >= 0")
    pts = P.points
    n = P.n
    if n < 2:
        return 0
    iu = np.triu_indices(n, k=1)
    d = np.hypot(pts[iu[0], 0] - pts[iu[1], 0], pts[iu[0], 1] - pts[iu[1], 1])
    if resolution == 0.0:
        return int(np.unique(d).size)
    return int(np.unique(np.round(d / resolution)).size)


def distinct_triangle_classes(P: PointSet, resolution: float) -> int:
    """Distinct sorted side-length triples over unordered point triples,
    quantized at `resolution`."""
    if resolution <= 0:
        raise ConfigError("resolution must be > 0")
    n = P.n
    if n < 3:
        return 0
    if n > 1500:
        warnings.warn(f"triangle-class enumeration on n={n} points is cubic; expect a wait")
    pts = P.points
    d = np.hypot(pts[:, 0][:, None] - pts[:, 0][None, :], pts[:, 1][:, None] - pts[:, 1][None, :])
    q = np.round(d / resolution).astype(np.int64)
    seen = set()
    for i in range(n - 2):
        for j in range(i + 1, n - 1):
            dij = q[i, j]
            ks = np.arange(j + 1, n)
            trip = np.sort(
                np.column_stack([np.full(len(ks), dij), q[i, ks], q[j, ks]]),
                axis=1,
            )
            seen.update(map(tuple, trip))
    return len(seen)


# ---------------------------------------------------------------------------
# Counting-exponent experiment


@dataclass
class CorollaryResult:
    fit: ExponentFit
    rows: list  # (n, delta, count, seconds)
    adaptability: list  # (n, energy value)


def corollary_experiment(
    gen: GeneratorSpec,
    sizes,
    b: float,
    spec: TriangleSpec,
    s: float = 7.0 / 4.0 + 0.01,
    cap: float = 50.0,
) -> CorollaryResult:
    """Count near-congruent triples at delta = n**(-4/7 - b) across sizes and
    fit the growth exponent; the family must pass the thickened-energy
    admissibility check at order s first."""
    sizes = sorted(int(v) for v in sizes)
    if len(sizes) < 3:
        raise ConfigError("need at least 3 sizes to fit the exponent")
    if b <= 0:
        raise ConfigError("b must be > 0")
    rows = []
    adapt = []
    counts = []
    for n in sizes:
        P = gen.make(n)
        ok, value = is_adaptable(P.points, s, cap)
        adapt.append((P.n, value))
        if not ok:
            raise AdaptabilityError(
                f"family member n={P.n} fails adaptability at s={s}: energy {value:.3g} > cap {cap}"
            )
        delta = float(P.n) ** (-4.0 / 7.0 - b)
        t0 = time.perf_counter()
        c = count_congruent_fast(P, spec, delta)
        rows.append((P.n, delta, c, time.perf_counter() - t0))
        counts.append(c)
    fit = fit_loglog([r[0] for r in rows], counts)
    return CorollaryResult(fit, rows, adapt)
