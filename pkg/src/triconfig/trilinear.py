"""Triple-annulus masses, the mollified trilinear form, and configuration
densities of discrete planar measures.

Ordered-triple convention throughout: all sums run over ordered atom triples
(x1, x2, x3), matching iterated integration of the product measure, so
symmetric counts carry their labeling multiplicity (up to 6).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _parallel
from ._spatial import CellIndex, triple_reduce
from .circle_kernel import TriangleSpec, sigma_eps_radial
from .errors import ConfigError, ResourceCapError
from .measure_core import DiscreteMeasure


@dataclass(frozen=True)
class AnnulusTriple:
    """Closed annulus windows [t_ij, t_ij + eps] around a target configuration."""

    spec: TriangleSpec
    eps: float

    def __post_init__(self):
        if self.eps <= 0:
            raise ConfigError("annulus thickness eps must be > 0")
        if self.eps >= self.spec.min_side / 2.0:
            raise ConfigError("eps must stay below half the smallest side")

    def windows(self) -> tuple[tuple[float, float], ...]:
        t12, t13, t23 = self.spec.sides
        e = self.eps
        return ((t12, t12 + e), (t13, t13 + e), (t23, t23 + e))


def _resolution_warning(m: DiscreteMeasure, eps: float) -> None:
    floor = 2.0 * m.min_spacing()
    if eps < floor:
        warnings.warn(
            f"eps={eps:.3g} is below twice the minimum atom spacing ({floor:.3g}); "
            "scaling conclusions at this scale reflect the discrete approximant"
        )




def triple_annulus_mass(m: DiscreteMeasure, q: AnnulusTriple) -> float:
    """Product-measure mass of the event that all three pairwise distances
    land in their closed annuli [t_ij, t_ij + eps], over ordered atom triples.

    Cell-index pruned: annulus range queries around the apex, then an
    angular band cut before the exact third-side check.
    """
    _resolution_warning(m, q.eps)
    w12, w13, w23 = q.windows()
    h = max(q.eps, q.spec.min_side / 8.0)
    index = CellIndex(m.xy, h)
    return triple_reduce(m.xy, m.w, index, w12, w13, w23)


def triple_annulus_mass_brute(m: DiscreteMeasure, q: AnnulusTriple) -> float:
    """Dense O(n^3) reference for triple_annulus_mass (same squared-distance
    windows, same triples, dense enumeration)."""
    n = m.n
    if n > 2500:
        raise ResourceCapError("brute triple mass limited to n <= 2500")
    (lo12, hi12), (lo13, hi13), (lo23, hi23) = q.windows()
    dx = m.xy[:, 0][:, None] - m.xy[:, 0][None, :]
    dy = m.xy[:, 1][:, None] - m.xy[:, 1][None, :]
    d2 = dx * dx + dy * dy
    w12 = (d2 >= lo12 * lo12) & (d2 <= hi12 * hi12)
    w13 = (d2 >= lo13 * lo13) & (d2 <= hi13 * hi13)
    w23 = ((d2 >= lo23 * lo23) & (d2 <= hi23 * hi23)).astype(float)
    total = 0.0
    for i in range(n):
        wj = np.where(w12[i], m.w, 0.0)
        wk = np.where(w13[i], m.w, 0.0)
        total += m.w[i] * float(wj @ w23 @ wk)
    return total


def trilinear_form(
    m1: DiscreteMeasure,
    m2: DiscreteMeasure,
    m3: DiscreteMeasure,
    spec: TriangleSpec,
    eps: float,
    table_points: int = 4001,
) -> float:
    """Mollified three-circle pairing of three measures at configuration t.

    Sums w1*w2*w3 times the product of mollified arc-length densities
    sigma^eps_{t12}(x1-x2) sigma^eps_{t13}(x1-x3) sigma^eps_{t23}(x2-x3),
    pruned to the support shells |d - t_ij| < eps.  Radial profiles are
    tabulated once per side and interpolated.
    """
    if eps <= 0:
        raise ConfigError("eps must be > 0")
    if not (m1.n and m2.n and m3.n):
        raise ConfigError("empty measure")

    def make_profile(r: float):
        grid = np.linspace(max(r - eps, 0.0), r + eps, table_points)
        vals = sigma_eps_radial(r, eps, grid)
        return lambda dist: np.interp(dist, grid, vals, left=0.0, right=0.0)

    p12 = make_profile(spec.t12)
    p13 = p12 if spec.t13 == spec.t12 else make_profile(spec.t13)
    p23 = make_profile(spec.t23)
    windows = (
        (max(spec.t12 - eps, 0.0), spec.t12 + eps),
        (max(spec.t13 - eps, 0.0), spec.t13 + eps),
        (max(spec.t23 - eps, 0.0), spec.t23 + eps),
    )
    if m2 is m1 and m3 is m1:
        h = max(eps, spec.min_side / 8.0)
        index = CellIndex(m1.xy, h)
        return triple_reduce(m1.xy, m1.w, index, *windows, profile=(p12, p13, p23))
    return _trilinear_distinct(m1, m2, m3, windows, (p12, p13, p23), eps, spec)


def _trilinear_distinct(m1, m2, m3, windows, profiles, eps, spec):
    w12, w13, w23 = windows
    p12, p13, p23 = profiles
    h = max(eps, spec.min_side / 8.0)
    idx2 = CellIndex(m2.xy, h)
    idx3 = CellIndex(m3.xy, h)
    lo23sq, hi23sq = max(w23[0], 0.0) ** 2, w23[1] ** 2
    total = 0.0
    for i in range(m1.n):
        J, dJ2 = idx2.query_annulus(m1.xy[i], *w12)
        if J.size == 0:
            continue
        K, dK2 = idx3.query_annulus(m1.xy[i], *w13)
        if K.size == 0:
            continue
        dx = m2.xy[J, 0][:, None] - m3.xy[K, 0][None, :]
        dy = m2.xy[J, 1][:, None] - m3.xy[K, 1][None, :]
        d23sq = dx * dx + dy * dy
        mask = (d23sq >= lo23sq) & (d23sq <= hi23sq)
        vals = np.where(mask, p23(np.sqrt(d23sq)), 0.0)
        total += m1.w[i] * float((m2.w[J] * p12(np.sqrt(dJ2))) @ vals @ (m3.w[K] * p13(np.sqrt(dK2))))
    return total


# ---------------------------------------------------------------------------
# Configuration histogram (pushforward under the three-distance map)


@dataclass
class ConfigHistogram:
    """3-D histogram of ordered-triple side-length vectors (d12, d13, d23)."""

    bin_width: float
    masses: np.ndarray  # shape (K, K, K)
    total_mass: float

    @property
    def nbins(self) -> int:
        return self.masses.shape[0]

    def bin_centers(self) -> np.ndarray:
        return (np.arange(self.nbins) + 0.5) * self.bin_width

    def density(self) -> np.ndarray:
        return self.masses / self.bin_width**3

    def bin_of(self, t: tuple[float, float, float]) -> tuple[int, int, int]:
        return tuple(min(self.nbins - 1, int(v / self.bin_width)) for v in t)

    def marginal_12(self) -> np.ndarray:
        """Mass per d12 bin, summed over the other two coordinates."""
        return self.masses.sum(axis=(1, 2))

    def rows(self):
        centers = self.bin_centers()
        dens = self.density()
        for i, j, k in zip(*np.nonzero(self.masses)):
            yield (i, j, k, centers[i], centers[j], centers[k], self.masses[i, j, k], dens[i, j, k])


def config_density(m: DiscreteMeasure, bin_width: float, max_bins: int = 2_000_000) -> ConfigHistogram:
    """Histogram all ordered atom triples by their three pairwise distances.

    Diagonal tuples (repeated atoms) contribute at zero distance, exactly as
    the triple product measure prescribes; density per bin is mass divided by
    the bin volume.
    """
    spacing = m.min_spacing()
    if bin_width < 2.0 * spacing:
        raise ConfigError(f"bin width below 2x atom spacing ({2 * spacing:.3g})")
    x0, x1, y0, y1 = m.bbox()
    dmax = math.hypot(x1 - x0, y1 - y0)
    K = int(math.floor(dmax / bin_width)) + 1
    if K**3 > max_bins:
        raise ResourceCapError(f"histogram needs {K ** 3} bins (cap {max_bins})")
    n = m.n
    d = np.hypot(
        m.xy[:, 0][:, None] - m.xy[:, 0][None, :],
        m.xy[:, 1][:, None] - m.xy[:, 1][None, :],
    )
    bins = np.minimum((d / bin_width).astype(np.int64), K - 1)
    wouter = np.outer(m.w, m.w)
    hist = np.zeros(K * K * K)
    for i in range(n):
        flat = bins[i][:, None] * (K * K) + bins[i][None, :] * K + bins
        hist += m.w[i] * np.bincount(flat.ravel(), weights=wouter.ravel(), minlength=K**3)
    masses = hist.reshape(K, K, K)
    return ConfigHistogram(bin_width, masses, float(masses.sum()))


def pair_distance_histogram(m: DiscreteMeasure, bin_width: float, nbins: int) -> np.ndarray:
    """Independent ordered-pair distance histogram (for marginal checks)."""
    d = np.hypot(
        m.xy[:, 0][:, None] - m.xy[:, 0][None, :],
        m.xy[:, 1][:, None] - m.xy[:, 1][None, :],
    )
    bins = np.minimum((d / bin_width).astype(np.int64), nbins - 1)
    return np.bincount(bins.ravel(), weights=np.outer(m.w, m.w).ravel(), minlength=nbins)


def pair_annulus_mass(m: DiscreteMeasure, t: float, eps: float, center=None) -> float:
    """Ordered-pair mass of {t <= |x - y| <= t + eps}; with center given,
    single-measure mass of the annulus around the fixed point."""
    if eps <= 0 or t <= 0:
        raise ConfigError("need t > 0 and eps > 0")
    tlo2, thi2 = t * t, (t + eps) * (t + eps)
    if center is not None:
        dx = m.xy[:, 0] - center[0]
        dy = m.xy[:, 1] - center[1]
        d2 = dx * dx + dy * dy
        return float(m.w[(d2 >= tlo2) & (d2 <= thi2)].sum())
    total = 0.0
    for lo, hi in _parallel.chunk_ranges(m.n, 1024):
        dx = m.xy[lo:hi, 0][:, None] - m.xy[:, 0][None, :]
        dy = m.xy[lo:hi, 1][:, None] - m.xy[:, 1][None, :]
        d2 = dx * dx + dy * dy
        mask = (d2 >= tlo2) & (d2 <= thi2)
        total += float((m.w[lo:hi][:, None] * mask * m.w[None, :]).sum())
    return total


def pair_annulus_mass_multi(m: DiscreteMeasure, t: float, eps_list) -> list[float]:
    """Ordered-pair masses of {t <= |x-y| <= t+eps} for several eps in one
    sweep over the pair distances (same closed squared-distance predicate)."""
    eps_arr = [float(e) for e in eps_list]
    if t <= 0 or any(e <= 0 for e in eps_arr):
        raise ConfigError("need t > 0 and eps > 0")
    tlo2 = t * t
    thi2 = [(t + e) * (t + e) for e in eps_arr]
    totals = [0.0] * len(eps_arr)
    for lo, hi in _parallel.chunk_ranges(m.n, 1024):
        dx = m.xy[lo:hi, 0][:, None] - m.xy[:, 0][None, :]
        dy = m.xy[lo:hi, 1][:, None] - m.xy[:, 1][None, :]
        d2 = dx * dx + dy * dy
        wprod = m.w[lo:hi][:, None] * m.w[None, :]
        base = d2 >= tlo2
        for k, hi2 in enumerate(thi2):
            totals[k] += float((wprod * (base & (d2 <= hi2))).sum())
    return totals


def distance_measure_density(m: DiscreteMeasure, eps: float, t: float) -> float:
    """Ordered-pair annulus mass {t <= |x-y| <= t+eps} divided by eps."""
    return pair_annulus_mass(m, t, eps) / eps
