"""Discrete planar measures and their interrogation.

Cantor-type generators, shifted unions, products, Frostman thickenings of
finite point sets, ball-mass ratios, pairwise energy integrals, and smoothed
negative-power convolution potentials.  All measures are finite weighted atom
sets in the plane; operations are pure and leave their inputs untouched.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _parallel
from .errors import ConfigError, NumericError, ResourceCapError

# Resource guards; overridable per call.
DEFAULT_ATOM_CAP = 4_000_000
DEFAULT_CELL_CAP = 40_000_000

Point2 = tuple[float, float]


@dataclass
class DiscreteMeasure:
    """Finite weighted atom set in the plane.

    xy has shape (n, 2); w holds strictly positive weights.  Arrays are
    frozen after construction, so instances may be shared across workers.
    """

    xy: np.ndarray
    w: np.ndarray

    def __post_init__(self):
        xy = np.ascontiguousarray(np.asarray(self.xy, dtype=float))
        w = np.ascontiguousarray(np.asarray(self.w, dtype=float))
        if xy.ndim != 2 or xy.shape[1] != 2:
            raise ConfigError("atom array must have shape (n, 2)")
        if w.shape != (xy.shape[0],):
            raise ConfigError("weight array must match atom count")
        if not np.all(np.isfinite(xy)):
            raise NumericError("non-finite atom coordinate")
        if not np.all(np.isfinite(w)) or np.any(w <= 0):
            raise NumericError("weights must be finite and > 0")
        xy.setflags(write=False)
        w.setflags(write=False)
        object.__setattr__(self, "xy", xy)
        object.__setattr__(self, "w", w)

    @property
    def n(self) -> int:
        return self.xy.shape[0]

    @property
    def total_mass(self) -> float:
        return float(self.w.sum())

    def is_probability(self, tol: float = 1e-12) -> bool:
        return abs(self.total_mass - 1.0) <= tol

    def on_x_axis(self, tol: float = 0.0) -> bool:
        return bool(np.all(np.abs(self.xy[:, 1]) <= tol))

    def bbox(self) -> tuple[float, float, float, float]:
        return (
            float(self.xy[:, 0].min()),
            float(self.xy[:, 0].max()),
            float(self.xy[:, 1].min()),
            float(self.xy[:, 1].max()),
        )

    def min_spacing(self) -> float:
        """Smallest inter-atom distance (0.0 if atoms coincide); cached."""
        cached = getattr(self, "_min_spacing", None)
        if cached is None:
            cached = math.sqrt(_min_offdiag_sqdist(self.xy))
            object.__setattr__(self, "_min_spacing", cached)
        return cached

    def scaled(self, lam: float) -> "DiscreteMeasure":
        return DiscreteMeasure(self.xy * lam, self.w.copy())

    def translated(self, dx: float, dy: float) -> "DiscreteMeasure":
        return DiscreteMeasure(self.xy + np.array([dx, dy]), self.w.copy())


def measure_from_points(points: np.ndarray, weights=None) -> DiscreteMeasure:
    points = np.asarray(points, dtype=float)
    if weights is None:
        weights = np.full(len(points), 1.0 / len(points))
    return DiscreteMeasure(points, np.asarray(weights, dtype=float))


def combine(m1: DiscreteMeasure, m2: DiscreteMeasure, w1: float = 0.5, w2: float = 0.5) -> DiscreteMeasure:
    """Weighted mixture w1*m1 + w2*m2 as a single atom list."""
    xy = np.vstack([m1.xy, m2.xy])
    w = np.concatenate([m1.w * w1, m2.w * w2])
    return DiscreteMeasure(xy, w)


def _min_offdiag_sqdist(xy: np.ndarray, chunk: int = 1024) -> float:
    """Nearest-neighbor squared distance via a growing cell-radius search."""
    n = len(xy)
    if n < 2:
        return math.inf
    if n <= 2048:
        best = math.inf
        for lo in range(0, n, chunk):
            hi = min(lo + chunk, n)
            d2 = ((xy[lo:hi, None, :] - xy[None, :, :]) ** 2).sum(-1)
            ii = np.arange(lo, hi)
            d2[ii - lo, ii] = math.inf
            best = min(best, float(d2.min()))
        return best
    from ._spatial import CellIndex

    x0, y0 = xy.min(0)
    x1, y1 = xy.max(0)
    diag = math.hypot(x1 - x0, y1 - y0)
    if diag == 0.0:
        return 0.0
    h = max(diag / math.ceil(math.sqrt(n)), diag * 1e-9)
    index = CellIndex(xy, h)
    order = index.order

    def scan(radius: float) -> float:
        best = math.inf
        for lo in range(0, n, 512):
            ids = order[lo : lo + 512]
            pts = xy[ids]
            rect = (pts[:, 0].min(), pts[:, 0].max(), pts[:, 1].min(), pts[:, 1].max())
            cand = index.query_annulus_rect(rect, 0.0, radius)
            if cand.size == 0:
                continue
            d2 = (pts[:, 0][:, None] - xy[cand, 0]) ** 2 + (pts[:, 1][:, None] - xy[cand, 1]) ** 2
            d2[ids[:, None] == cand[None, :]] = math.inf
            if d2.size:
                best = min(best, float(d2.min()))
        return best

    r = 1.5 * h
    while True:
        best = scan(r)
        # a pair found inside the scan radius is the global minimum
        if best <= r * r:
            return best
        if r >= diag:
            return best
        r *= 4.0


@dataclass(frozen=True)
class CantorSpec:
    """Two-branch Cantor generator on [0,1]: contraction ratio and level."""

    ratio: float
    level: int

    def __post_init__(self):
        if not (0.0 < self.ratio <= 0.5):
            raise ConfigError(f"cantor ratio must lie in (0, 1/2], got {self.ratio}")
        if self.level < 0 or int(self.level) != self.level:
            raise ConfigError("cantor level must be a nonnegative integer")

    @property
    def dimension(self) -> float:
        return math.log(2.0) / math.log(1.0 / self.ratio)

    @staticmethod
    def from_dimension(alpha: float, level: int) -> "CantorSpec":
        if not (0.0 < alpha <= 1.0):
            raise ConfigError(f"cantor dimension must lie in (0, 1], got {alpha}")
        return CantorSpec(2.0 ** (-1.0 / alpha), level)


@dataclass(frozen=True)
class BallQuery:
    """Closed ball for mass queries."""

    center: Point2
    radius: float

    def __post_init__(self):
        if self.radius <= 0:
            raise ConfigError("ball radius must be > 0")


def cantor_measure(spec: CantorSpec) -> DiscreteMeasure:
    """Level-L approximant of the two-branch Cantor measure on [0,1].

    One atom of weight 2**-L at the left endpoint of each construction
    interval, embedded on the x-axis.  Endpoint placement keeps every atom
    coordinate exactly hand-checkable.
    """
    r, L = spec.ratio, spec.level
    xs = np.array([0.0])
    for k in range(L):
        step = (1.0 - r) * r**k
        xs = np.concatenate([xs, xs + step])
    xs = np.sort(xs)
    xy = np.column_stack([xs, np.zeros_like(xs)])
    w = np.full(len(xs), 0.5**L)
    return DiscreteMeasure(xy, w)


def shifted_union(m: DiscreteMeasure) -> DiscreteMeasure:
    """Duplicate every atom at x-1 and x+1 with halved weights.

    Input must be a probability measure supported on the x-axis; total mass
    is preserved exactly.
    """
    if not m.on_x_axis():
        raise ConfigError("shifted_union expects a measure supported on the x-axis")
    if not m.is_probability():
        raise ConfigError("shifted_union expects a probability measure")
    left = m.xy.copy()
    left[:, 0] -= 1.0
    right = m.xy.copy()
    right[:, 0] += 1.0
    xy = np.vstack([left, right])
    w = np.concatenate([m.w, m.w]) * 0.5
    return DiscreteMeasure(xy, w)


def product_measure(mx: DiscreteMeasure, my: DiscreteMeasure, atom_cap: int = DEFAULT_ATOM_CAP) -> DiscreteMeasure:
    """Product of two x-axis measures; the second factor becomes the y-coordinate."""
    if not mx.on_x_axis() or not my.on_x_axis():
        raise ConfigError("product_measure expects both factors on the x-axis")
    n = mx.n * my.n
    if n > atom_cap:
        raise ResourceCapError(f"product would create {n} atoms (cap {atom_cap})")
    X, Y = np.meshgrid(mx.xy[:, 0], my.xy[:, 0], indexing="ij")
    W = np.outer(mx.w, my.w)
    return DiscreteMeasure(np.column_stack([X.ravel(), Y.ravel()]), W.ravel())


# ---------------------------------------------------------------------------
# Sampled scalar fields


@dataclass
class GridFunction:
    """Scalar field sampled on a uniform square grid.

    values has shape (ny, nx), row-major; sample (ix, iy) sits at
    origin + spacing * (ix, iy).
    """

    origin: Point2
    spacing: float
    values: np.ndarray
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2:
            raise ConfigError("grid values must be 2-D")
        if self.spacing <= 0:
            raise ConfigError("grid spacing must be > 0")
        if not np.all(np.isfinite(v)):
            raise NumericError("non-finite grid value")
        object.__setattr__(self, "values", v)

    @property
    def nx(self) -> int:
        return self.values.shape[1]

    @property
    def ny(self) -> int:
        return self.values.shape[0]

    def x_coords(self) -> np.ndarray:
        return self.origin[0] + self.spacing * np.arange(self.nx)

    def y_coords(self) -> np.ndarray:
        return self.origin[1] + self.spacing * np.arange(self.ny)

    def integral(self) -> float:
        return float(self.values.sum()) * self.spacing**2

    def covers(self, x0: float, x1: float, y0: float, y1: float) -> bool:
        gx1 = self.origin[0] + self.spacing * (self.nx - 1)
        gy1 = self.origin[1] + self.spacing * (self.ny - 1)
        return self.origin[0] <= x0 and self.origin[1] <= y0 and gx1 >= x1 and gy1 >= y1

    def like(self, values: np.ndarray, **meta) -> "GridFunction":
        return GridFunction(self.origin, self.spacing, values, dict(self.meta, **meta))

    def to_measure(self, downsample: int = 1, threshold: float = 0.0) -> DiscreteMeasure:
        """Cell quadrature of the field as a discrete measure (mass = integral).

        downsample > 1 merges square blocks of cells, preserving mass.
        """
        v = self.values
        h = self.spacing
        ox, oy = self.origin
        if downsample > 1:
            k = int(downsample)
            ny = (v.shape[0] // k) * k
            nx = (v.shape[1] // k) * k
            v = v[:ny, :nx].reshape(ny // k, k, nx // k, k).sum(axis=(1, 3))
            ox = ox + (k - 1) * h / 2.0
            oy = oy + (k - 1) * h / 2.0
            h_eff = h * k
        else:
            h_eff = h
        iy, ix = np.nonzero(v > threshold)
        # block value already sums fine cells, so fine-cell area is the weight
        w = v[iy, ix] * self.spacing**2
        xy = np.column_stack([ox + h_eff * ix, oy + h_eff * iy])
        return DiscreteMeasure(xy, w)


def make_grid(origin: Point2, spacing: float, nx: int, ny: int, cell_cap: int = DEFAULT_CELL_CAP) -> GridFunction:
    if nx * ny > cell_cap:
        raise ResourceCapError(f"grid would allocate {nx * ny} cells (cap {cell_cap})")
    return GridFunction(origin, spacing, np.zeros((ny, nx)))


# ---------------------------------------------------------------------------
# Thickening of finite point sets


def thicken(
    points: np.ndarray,
    s: float,
    spacing: float | None = None,
    cell_cap: int = DEFAULT_CELL_CAP,
) -> GridFunction:
    """Sampled probability density of the ball-thickened counting measure.

    Each of the n points carries a ball of radius n**(-1/s) and height
    n**(-1) * n**(2/s); the raw field integrates to pi, so the result is
    divided by pi to make a probability density.  The raw integral is kept
    in meta["raw_integral"].
    """
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    if n < 1:
        raise ConfigError("thicken needs at least one point")
    if not (0.0 < s <= 2.0):
        raise ConfigError("thicken exponent s must lie in (0, 2]")
    r = n ** (-1.0 / s)
    if spacing is None:
        spacing = r / 32.0
    if spacing > r / 4.0:
        raise ConfigError(f"grid spacing {spacing} too coarse; need <= {r / 4.0}")
    x0, y0 = pts.min(0) - r - 2 * spacing
    x1, y1 = pts.max(0) + r + 2 * spacing
    nx = int(math.ceil((x1 - x0) / spacing)) + 1
    ny = int(math.ceil((y1 - y0) / spacing)) + 1
    if nx * ny > cell_cap:
        raise ResourceCapError(f"thicken grid needs {nx * ny} cells (cap {cell_cap})")
    counts = np.zeros((ny, nx))
    R = int(math.ceil(r / spacing))
    offs = np.arange(-R, R + 1)
    oy, ox = np.meshgrid(offs, offs, indexing="ij")
    for px, py in pts:
        icx = int(round((px - x0) / spacing))
        icy = int(round((py - y0) / spacing))
        gx = x0 + (icx + ox) * spacing
        gy = y0 + (icy + oy) * spacing
        mask = (gx - px) ** 2 + (gy - py) ** 2 <= r * r
        counts[icy + oy[mask], icx + ox[mask]] += 1.0
    height = (1.0 / n) * n ** (2.0 / s)
    raw = counts * height
    raw_integral = float(raw.sum()) * spacing**2
    values = raw / math.pi
    return GridFunction(
        (x0, y0),
        spacing,
        values,
        {"raw_integral": raw_integral, "normalized_by": "pi", "ball_radius": r, "s": s},
    )


# ---------------------------------------------------------------------------
# Ball-mass ratios and energies


def ball_mass(m: DiscreteMeasure, q: BallQuery) -> float:
    d2 = ((m.xy - np.asarray(q.center)) ** 2).sum(1)
    return float(m.w[d2 <= q.radius**2].sum())


def frostman_ratio(
    m: DiscreteMeasure,
    s: float,
    scales,
    samples: int = 10_000,
    seed: int = 0,
) -> float:
    """max over sampled atom centers and scales of ball-mass / radius**s.

    Centers are all atoms, or a seeded subsample when the atom count exceeds
    `samples` (a warning records the subsampling).  Radii below twice the
    minimum atom spacing are rejected: discreteness dominates there.
    """
    scales = np.asarray(list(scales), dtype=float)
    if scales.size == 0:
        raise ConfigError("frostman_ratio needs at least one scale")
    floor = 2.0 * m.min_spacing() if m.n > 1 else 0.0
    if np.any(scales < floor):
        raise ConfigError(f"scales below the discreteness floor {floor:.3g}")
    centers = m.xy
    if m.n > samples:
        rng = np.random.default_rng(seed)
        centers = m.xy[rng.choice(m.n, size=samples, replace=False)]
        warnings.warn(f"frostman_ratio subsampled {samples} of {m.n} centers (seed={seed})")
    best = 0.0
    for lo, hi in _parallel.chunk_ranges(len(centers), 512):
        d2 = ((centers[lo:hi, None, :] - m.xy[None, :, :]) ** 2).sum(-1)
        for delta in scales:
            masses = (m.w[None, :] * (d2 <= delta * delta)).sum(1)
            best = max(best, float(masses.max()) / delta**s)
    return best


def energy_integral(m: DiscreteMeasure, s: float) -> float:
    """Off-diagonal double sum of w_i w_j |p_i - p_j|**(-s)."""
    if s <= 0:
        raise ConfigError("energy order s must be > 0")
    if m.n < 2:
        return 0.0
    xy, w = m.xy, m.w
    ranges = _parallel.chunk_ranges(m.n, 512)

    def part(lo: int, hi: int) -> float:
        d2 = ((xy[lo:hi, None, :] - xy[None, :, :]) ** 2).sum(-1)
        ii = np.arange(lo, hi)
        d2[ii - lo, ii] = math.inf
        if np.any(d2 == 0.0):
            raise NumericError("coincident atoms give infinite energy")
        return float((np.outer(w[lo:hi], w) * d2 ** (-s / 2.0)).sum())

    return float(sum(_parallel.map_chunks(part, ranges)))


def is_adaptable(points: np.ndarray, s: float, cap: float) -> tuple[bool, float]:
    """Unit-weight discrete s-energy n**-2 sum |p-p'|**-s compared to cap."""
    pts = np.asarray(points, dtype=float)
    n = len(pts)
    if n < 2:
        return True, 0.0
    total = 0.0
    for lo, hi in _parallel.chunk_ranges(n, 512):
        d2 = ((pts[lo:hi, None, :] - pts[None, :, :]) ** 2).sum(-1)
        ii = np.arange(lo, hi)
        d2[ii - lo, ii] = math.inf
        if np.any(d2 == 0.0):
            raise NumericError("duplicate points in adaptability check")
        total += float((d2 ** (-s / 2.0)).sum())
    value = total / n**2
    return value <= cap, value


# ---------------------------------------------------------------------------
# Smoothed negative-power convolution potential


def riesz_potential(
    m: DiscreteMeasure,
    alpha: float,
    delta: float,
    grid: GridFunction,
) -> GridFunction:
    """Sample x -> integral |x-y|**(alpha-2) d(mollified m)(y) on the grid.

    The measure is mollified at scale delta with the standard bump (see
    circle_kernel); the classical normalizing constant of the fractional
    potential is intentionally omitted, so this is the bare convolution.
    """
    from .circle_kernel import smoothed_power_profile

    if not (0.0 < alpha < 2.0):
        raise ConfigError("potential order alpha must lie in (0, 2)")
    if delta <= 0:
        raise ConfigError("mollification scale delta must be > 0")
    x0, x1, y0, y1 = m.bbox()
    if not grid.covers(x0 - delta, x1 + delta, y0 - delta, y1 + delta):
        raise ConfigError("grid does not cover the support inflated by delta")
    gx = grid.x_coords()
    gy = grid.y_coords()
    rmax = math.hypot(
        max(x1, gx[-1]) - min(x0, gx[0]),
        max(y1, gy[-1]) - min(y0, gy[0]),
    )
    rho_tab, g_tab = smoothed_power_profile(alpha, delta, rmax)
    out = np.zeros((grid.ny, grid.nx))
    X = gx[None, :]
    for lo, hi in _parallel.chunk_ranges(m.n, 256):
        for k in range(lo, hi):
            px, py = m.xy[k]
            d = np.hypot(X - px, gy[:, None] - py)
            out += m.w[k] * np.interp(d, rho_tab, g_tab)
    return grid.like(out, alpha=alpha, delta=delta, normalization="bare convolution")


# ---------------------------------------------------------------------------
# Text / binary interchange formats


def write_measure(m: DiscreteMeasure, path) -> None:
    """One atom per line: 'x y w' with 17 significant digits."""
    with open(path, "w", encoding="utf-8") as f:
        f.write("# x y w\n")
        for (x, y), w in zip(m.xy, m.w):
            f.write(f"{x:.17g} {y:.17g} {w:.17g}\n")


def read_measure(path) -> DiscreteMeasure:
    """Read 'x y [w]' lines; '#' starts a comment; missing w defaults to 1/n."""
    rows = []
    with open(path, "r", encoding="utf-8") as f:
        for line in f:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            parts = line.split()
            if len(parts) not in (2, 3):
                raise ConfigError(f"bad measure line: {line!r}")
            rows.append([float(p) for p in parts])
    if not rows:
        raise ConfigError("empty measure file")
    have_w = [len(r) == 3 for r in rows]
    if any(have_w) and not all(have_w):
        raise ConfigError("mixed weighted/unweighted lines")
    xy = np.array([[r[0], r[1]] for r in rows])
    if all(have_w):
        w = np.array([r[2] for r in rows])
    else:
        w = np.full(len(rows), 1.0 / len(rows))
    return DiscreteMeasure(xy, w)


def write_grid_csv(g: GridFunction, path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        f.write(f"# origin_x,origin_y,spacing,nx,ny\n")
        f.write(f"{g.origin[0]:.17g},{g.origin[1]:.17g},{g.spacing:.17g},{g.nx},{g.ny}\n")
        for row in g.values:
            f.write(",".join(f"{v:.17g}" for v in row) + "\n")


def read_grid_csv(path) -> GridFunction:
    with open(path, "r", encoding="utf-8") as f:
        lines = [ln for ln in f if not ln.startswith("#")]
    ox, oy, h, nx, ny = lines[0].strip().split(",")
    vals = np.array([[float(v) for v in ln.strip().split(",")] for ln in lines[1:]])
    if vals.shape != (int(ny), int(nx)):
        raise ConfigError("grid CSV shape mismatch")
    return GridFunction((float(ox), float(oy)), float(h), vals)


def write_grid_raw(g: GridFunction, path) -> None:
    """Row-major little-endian float64 values plus a sidecar descriptor."""
    g.values.astype("<f8").tofile(path)
    with open(str(path) + ".desc", "w", encoding="utf-8") as f:
        f.write(f"origin_x {g.origin[0]:.17g}\norigin_y {g.origin[1]:.17g}\n")
        f.write(f"spacing {g.spacing:.17g}\nnx {g.nx}\nny {g.ny}\ndtype <f8\norder row-major\n")


def read_grid_raw(path) -> GridFunction:
    desc = {}
    with open(str(path) + ".desc", "r", encoding="utf-8") as f:
        for line in f:
            k, v = line.split()
            desc[k] = v
    nx, ny = int(desc["nx"]), int(desc["ny"])
    vals = np.fromfile(path, dtype="<f8").reshape(ny, nx)
    return GridFunction((float(desc["origin_x"]), float(desc["origin_y"])), float(desc["spacing"]), vals)
