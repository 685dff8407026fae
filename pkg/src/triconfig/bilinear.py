"""The two-circle bilinear convolution operator, negative-order Sobolev
norms, and the finite-scale operator-norm stability experiment.

The operator pairs f against two rotated copies of g along the constraint
circle geometry: B(f,g)(x) integrates f_eps(x - a e(theta)) times
[g_eps(x - b e(theta + theta_ab)) + g_eps(x - b e(theta - theta_ab))] in
theta, with f_eps, g_eps mollified at scale eps.  Periodic trapezoid
quadrature is spectrally accurate here, and bilinear interpolation samples
the grids off-lattice.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .circle_kernel import Mollifier, k_hat, rho_hat, theta_ab
from .errors import ConfigError, NumericError
from .measure_core import GridFunction

TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# Test-function factory


@dataclass(frozen=True)
class TestFunctionSpec:
    """Declarative nonnegative test inputs for operator experiments.

    kinds: gaussian | band-limited-random | plane-wave | constant-on-box.
    Band-limited randoms are squared trigonometric polynomials under a
    smooth window, so they stay nonnegative and effectively compactly
    supported; plane waves are complex-valued diagnostics only.
    """

    __test__ = False  # not a pytest class, despite the name

    kind: str
    center: tuple[float, float] = (0.5, 0.5)
    width: float = 0.1
    freq_cap: int = 4
    seed: int = 0
    amplitude: float = 1.0

    def sample(self, grid: GridFunction) -> GridFunction:
        X = grid.x_coords()[None, :]
        Y = grid.y_coords()[:, None]
        cx, cy = self.center
        if self.kind == "gaussian":
            vals = self.amplitude * np.exp(-((X - cx) ** 2 + (Y - cy) ** 2) / (2.0 * self.width**2))
            vals = vals * (vals > 1e-300)
            return grid.like(vals, spec=self)
        if self.kind == "constant-on-box":
            half = self.width / 2.0
            vals = self.amplitude * (
                (np.abs(X - cx) <= half) & (np.abs(Y - cy) <= half)
            ).astype(float)
            return grid.like(vals, spec=self)
        if self.kind == "band-limited-random":
            rng = np.random.default_rng(self.seed)
            vals = np.zeros(np.broadcast_shapes(X.shape, Y.shape))
            for _ in range(2 * self.freq_cap):
                kx, ky = rng.integers(-self.freq_cap, self.freq_cap + 1, 2)
                phase = rng.uniform(0.0, TWO_PI)
                amp = rng.uniform(0.2, 1.0)
                vals = vals + amp * np.cos(TWO_PI * (kx * X + ky * Y) + phase)
            window = _smooth_box(X - cx, self.width) * _smooth_box(Y - cy, self.width)
            out = self.amplitude * (vals**2) * window
            return grid.like(out, spec=self)
        if self.kind == "plane-wave":
            kx, ky = self.center
            vals = self.amplitude * np.exp(2j * math.pi * (kx * X + ky * Y)) * np.ones_like(Y)
            return grid.like(vals.astype(complex), spec=self)
        raise ConfigError(f"unknown test-function kind {self.kind!r}")


def _smooth_box(u: np.ndarray, half_width: float) -> np.ndarray:
    """C-infinity window equal to 0 outside |u| < half_width."""
    t = np.clip(np.abs(u) / half_width, 0.0, 1.0)
    out = np.zeros_like(t)
    inside = t < 1.0
    out[inside] = np.exp(1.0 - 1.0 / (1.0 - t[inside] ** 2))
    return out


# ---------------------------------------------------------------------------
# Mollification and off-grid sampling


def mollify_grid(f: GridFunction, eps: float) -> GridFunction:
    """Convolve the sampled field with the standard bump at scale eps.

    The sampled kernel is renormalized to unit discrete mass, so constants
    and total integrals are preserved exactly away from the boundary.
    """
    if eps == 0.0:
        return f.like(f.values.copy())
    if eps < 0:
        raise ConfigError("mollification scale must be >= 0")
    h = f.spacing
    R = int(math.ceil(eps / h))
    if R < 1:
        raise ConfigError("eps below grid resolution")
    offs = np.arange(-R, R + 1) * h
    moll = Mollifier(eps)
    kern = moll.density(np.stack(np.meshgrid(offs, offs, indexing="ij"), axis=-1))
    kern = kern / (kern.sum() * h * h)
    # direct accumulation of shifted slices: exactly shift-equivariant and
    # sign-preserving, unlike an FFT product
    v = f.values
    ny, nx = v.shape
    out = np.zeros_like(v)
    for dy in range(-R, R + 1):
        ys0, ys1 = max(0, dy), min(ny, ny + dy)
        yd0, yd1 = max(0, -dy), max(0, -dy) + (ys1 - ys0)
        if ys1 <= ys0:
            continue
        for dx in range(-R, R + 1):
            wgt = kern[dy + R, dx + R] * h * h
            if wgt == 0.0:
                continue
            xs0, xs1 = max(0, dx), min(nx, nx + dx)
            xd0, xd1 = max(0, -dx), max(0, -dx) + (xs1 - xs0)
            if xs1 <= xs0:
                continue
            out[yd0:yd1, xd0:xd1] += wgt * v[ys0:ys1, xs0:xs1]
    return f.like(out)


def _shift_sample(values: np.ndarray, sx_cells: float, sy_cells: float) -> np.ndarray:
    """Sample values at (x - s) by bilinear interpolation, zero outside."""
    ny, nx = values.shape
    out = np.zeros_like(values)
    ix = math.floor(-sx_cells)
    iy = math.floor(-sy_cells)
    fx = -sx_cells - ix
    fy = -sy_cells - iy
    for dy_, wy in ((iy, 1.0 - fy), (iy + 1, fy)):
        for dx_, wx in ((ix, 1.0 - fx), (ix + 1, fx)):
            wgt = wx * wy
            if wgt == 0.0:
                continue
            ys0, ys1 = max(0, dy_), min(ny, ny + dy_)
            xs0, xs1 = max(0, dx_), min(nx, nx + dx_)
            yd0, yd1 = max(0, -dy_), max(0, -dy_) + (ys1 - ys0)
            xd0, xd1 = max(0, -dx_), max(0, -dx_) + (xs1 - xs0)
            if ys1 <= ys0 or xs1 <= xs0:
                continue
            out[yd0:yd1, xd0:xd1] += wgt * values[ys0:ys1, xs0:xs1]
    return out


def apply_bilinear(
    f: GridFunction,
    g: GridFunction,
    a: float,
    b: float,
    eps: float,
    quad_points: int | None = None,
) -> GridFunction:
    """Evaluate the two-circle bilinear operator on a shared grid.

    x maps to the theta integral of f_eps(x - a e(theta)) times the sum of
    g_eps over both constraint branches e(theta +/- theta_ab); output is
    nonnegative whenever the inputs are.
    """
    if f.spacing != g.spacing or f.origin != g.origin or f.values.shape != g.values.shape:
        raise ConfigError("f and g must share one grid")
    if eps < 2.0 * f.spacing:
        raise ConfigError("eps must be at least twice the grid spacing")
    if quad_points is None:
        quad_points = max(256, 8 * max(f.nx, f.ny))
    if quad_points < 64:
        raise ConfigError("need at least 64 quadrature points")
    th0 = theta_ab(a, b)  # raises for degenerate (a, b, 1)
    fe = mollify_grid(f, eps).values
    ge = mollify_grid(g, eps).values
    h = f.spacing
    acc = np.zeros_like(fe)
    dth = TWO_PI / quad_points
    for q in range(quad_points):
        th = q * dth
        sf = _shift_sample(fe, a * math.cos(th) / h, a * math.sin(th) / h)
        gp = _shift_sample(ge, b * math.cos(th + th0) / h, b * math.sin(th + th0) / h)
        gm = _shift_sample(ge, b * math.cos(th - th0) / h, b * math.sin(th - th0) / h)
        acc += sf * (gp + gm)
    return f.like(acc * dth, operator=f"bilinear(a={a}, b={b}, eps={eps})")


def apply_bilinear_plane_wave_check(a: float, b: float, xi, eta, eps: float, quad_points: int = 4096):
    """Multiplier of the operator on (mollified) complex plane waves.

    Returns (measured, reference): the theta-quadrature multiplier applied
    to exp(2 pi i xi.x), exp(2 pi i eta.x), against the closed-form kernel
    transform damped by the mollifier transform at eps > 0.
    """
    th0 = theta_ab(a, b)
    theta = np.arange(quad_points) * (TWO_PI / quad_points)
    x1, x2 = float(xi[0]), float(xi[1])
    e1, e2 = float(eta[0]), float(eta[1])
    phase_f = a * np.cos(theta) * x1 + a * np.sin(theta) * x2
    total = 0.0 + 0.0j
    for sign in (+1.0, -1.0):
        phi = theta + sign * th0
        phase_g = b * np.cos(phi) * e1 + b * np.sin(phi) * e2
        total += np.exp(-2j * math.pi * (phase_f + phase_g)).sum() * (TWO_PI / quad_points)
    damp = 1.0
    if eps > 0.0:
        damp = float(rho_hat(np.array([eps * math.hypot(x1, x2)]))[0]) * float(
            rho_hat(np.array([eps * math.hypot(e1, e2)]))[0]
        )
    reference = complex(k_hat(a, b, xi, eta, "both"))
    return complex(total * damp), reference


# ---------------------------------------------------------------------------
# Negative-order Sobolev norms


def sobolev_norm(f: GridFunction, beta: float) -> float:
    """L2 norm with frequency weight (1+|xi|)^(-2 beta), xi in cycles/length.

    Discrete Fourier transform with physical area weights; at beta = 0 this
    collapses to the plain L2 norm (Parseval).
    """
    if beta < 0:
        raise ConfigError("beta must be >= 0")
    h = f.spacing
    ny, nx = f.values.shape
    F = np.fft.fft2(f.values) * h * h
    kx = np.fft.fftfreq(nx, d=h)
    ky = np.fft.fftfreq(ny, d=h)
    mag = np.hypot(ky[:, None], kx[None, :])
    weight = (1.0 + mag) ** (-2.0 * beta)
    d_area = 1.0 / (nx * ny * h * h)
    return math.sqrt(float((np.abs(F) ** 2 * weight).sum() * d_area))


# ---------------------------------------------------------------------------
# Operator-norm stability experiment


@dataclass
class BoundednessRow:
    pair_id: int
    eps: float
    numerator: float
    denom_f: float
    denom_g: float

    @property
    def ratio(self) -> float:
        return self.numerator / (self.denom_f * self.denom_g)


@dataclass
class BoundednessResult:
    rows: list
    beta1: float
    beta2: float

    def pair_stability(self) -> dict[int, float]:
        """max/min of the ratio across eps for each pair."""
        by_pair: dict[int, list[float]] = {}
        for r in self.rows:
            by_pair.setdefault(r.pair_id, []).append(r.ratio)
        return {k: max(v) / min(v) for k, v in by_pair.items()}


def boundedness_experiment(
    pairs,
    a: float,
    b: float,
    eps_list,
    beta1: float,
    beta2: float,
    grid: GridFunction,
    quad_points: int = 512,
) -> BoundednessResult:
    """Ratio table ||B(f,g)||_L1 / (||f||(-beta1) ||g||(-beta2)) across eps.

    The exponent pair must split 1/2 exactly; nonnegative inputs are
    required, and a vanishing denominator is an error.
    """
    if abs(beta1 + beta2 - 0.5) > 1e-12 or beta1 < 0 or beta2 < 0:
        raise ConfigError("Sobolev exponents must be nonnegative and sum to 1/2")
    rows = []
    h = grid.spacing
    for pid, (sf, sg) in enumerate(pairs):
        f = sf.sample(grid)
        g = sg.sample(grid)
        if np.any(f.values < 0) or np.any(g.values < 0):
            raise NumericError("boundedness experiment requires nonnegative inputs")
        nf = sobolev_norm(f, beta1)
        ng = sobolev_norm(g, beta2)
        if nf <= 0 or ng <= 0:
            raise NumericError(f"vanishing Sobolev norm for pair {pid}")
        for eps in eps_list:
            Bfg = apply_bilinear(f, g, a, b, eps, quad_points)
            num = float(np.abs(Bfg.values).sum()) * h * h
            rows.append(BoundednessRow(pid, float(eps), num, nf, ng))
    return BoundednessResult(rows, beta1, beta2)
