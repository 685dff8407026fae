"""Circle-measure mathematics.

Mollified arc-length measures on circles, the two-circle constraint geometry
(gamma, theta, the frequency map U_ab), and the circle-measure Fourier
transform with its square-root decay law.  The Fourier convention throughout
is exp(2*pi*i*x.xi), so the transform of the arc-parameter measure d(theta)
on the radius-r circle is 2*pi*J0(2*pi*r*|xi|).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigError, DegenerateTriangleError

DEGENERACY_TOL = 1e-12
TWO_PI = 2.0 * math.pi


# ---------------------------------------------------------------------------
# Bessel J0: power series below the crossover, Hankel expansion above.
# Crossover 12 keeps both branches under 1e-10 absolute error in float64.

_J0_CROSSOVER = 12.0


def j0(x):
    """Bessel function of order zero, vectorized, absolute error <= 1e-10."""
    x = np.abs(np.asarray(x, dtype=float))
    scalar = x.ndim == 0
    x = np.atleast_1d(x)
    out = np.empty_like(x)
    small = x <= _J0_CROSSOVER
    if np.any(small):
        out[small] = _j0_series(x[small])
    if np.any(~small):
        out[~small] = _j0_asymptotic(x[~small])
    return float(out[0]) if scalar else out


def _j0_series(x):
    # sum (-1)^k (x^2/4)^k / (k!)^2; 50 terms converge below machine eps for x <= 12
    q = -(x * x) / 4.0
    term = np.ones_like(x)
    acc = np.ones_like(x)
    for k in range(1, 51):
        term = term * q / (k * k)
        acc += term
    return acc


def _j0_asymptotic(x):
    # Hankel expansion: P = 1 - t2/x^2 + t4/x^4 - ..., Q = -t1/x + t3/x^3 - ...,
    # t_m = prod_{j<=m} (2j-1)^2 / (m! 8^m).  22 terms keep the truncation error
    # below ~2e-11 down to the crossover at 12.
    chi = x - math.pi / 4.0
    p = np.ones_like(x)
    q = np.zeros_like(x)
    t = np.ones_like(x)
    for m in range(1, 23):
        t = t * ((2 * m - 1) ** 2) / (8.0 * x * m)
        k = m // 2
        sign = -1.0 if k % 2 == 0 else 1.0  # m=1,2 -> -, m=3,4 -> +, ...
        if m % 2 == 0:
            p += -sign * t  # -t2, +t4, -t6, ...
        else:
            q += sign * t  # -t1, +t3, -t5, ...
    return np.sqrt(2.0 / (math.pi * x)) * (p * np.cos(chi) - q * np.sin(chi))


# ---------------------------------------------------------------------------
# The fixed mollifier profile: c * exp(-1/(1-|x|^2)) on the unit ball.


@lru_cache(maxsize=1)
def _bump_constant() -> float:
    # 1 / (2*pi * int_0^1 exp(-1/(1-t^2)) t dt), Gauss-Legendre to ~1e-14
    nodes, wts = np.polynomial.legendre.leggauss(400)
    t = 0.5 * (nodes + 1.0)
    w = 0.5 * wts
    integrand = np.exp(-1.0 / (1.0 - t * t)) * t
    return float(1.0 / (TWO_PI * np.sum(w * integrand)))


def bump_profile(t):
    """Radial profile of the unit-mass bump: c*exp(-1/(1-t^2)) for t < 1."""
    t = np.asarray(t, dtype=float)
    out = np.zeros_like(t)
    inside = np.abs(t) < 1.0
    ti = t[inside]
    out[inside] = _bump_constant() * np.exp(-1.0 / (1.0 - ti * ti))
    return out


@dataclass(frozen=True)
class Mollifier:
    """Approximate identity rho_eps(x) = eps**-2 rho(x/eps) built on the fixed bump."""

    scale: float

    def __post_init__(self):
        if self.scale <= 0:
            raise ConfigError("mollifier scale must be > 0")

    def density(self, xy: np.ndarray) -> np.ndarray:
        xy = np.asarray(xy, dtype=float)
        r = np.hypot(xy[..., 0], xy[..., 1]) / self.scale
        return bump_profile(r) / self.scale**2

    def density_radial(self, dist) -> np.ndarray:
        return bump_profile(np.asarray(dist, dtype=float) / self.scale) / self.scale**2

    def mass(self, n: int = 400) -> float:
        nodes, wts = np.polynomial.legendre.leggauss(n)
        t = 0.5 * (nodes + 1.0) * self.scale
        w = 0.5 * wts * self.scale
        return float(TWO_PI * np.sum(w * self.density_radial(t) * t))


@lru_cache(maxsize=64)
def _rho_hat_table(n: int = 256) -> tuple:
    nodes, wts = np.polynomial.legendre.leggauss(n)
    t = 0.5 * (nodes + 1.0)
    w = 0.5 * wts
    prof = bump_profile(t) * t
    return t, w * prof


def rho_hat(q) -> np.ndarray:
    """Fourier transform of the unit bump at radial frequency q (real, even)."""
    q = np.asarray(q, dtype=float)
    t, wprof = _rho_hat_table()
    # 2*pi * int rho(t) J0(2*pi*q*t) t dt
    arg = TWO_PI * np.multiply.outer(q, t)
    return TWO_PI * (j0(arg) * wprof).sum(axis=-1)


# ---------------------------------------------------------------------------
# Triangle normalization and the constraint geometry


@dataclass(frozen=True)
class TriangleSpec:
    """Target side lengths (t12, t13, t23) of a labeled three-point configuration.

    The rescaled sides (a, b, 1) = (t12, t13, t23)/t23 drive the two-circle
    geometry; construction fails if they violate the triangle inequality
    beyond the clamping tolerance.
    """

    t12: float
    t13: float
    t23: float

    def __post_init__(self):
        if min(self.t12, self.t13, self.t23) <= 0:
            raise ConfigError("triangle sides must be > 0")
        gamma_ab(self.a, self.b)  # raises DegenerateTriangleError if impossible

    @property
    def a(self) -> float:
        return self.t12 / self.t23

    @property
    def b(self) -> float:
        return self.t13 / self.t23

    @property
    def sides(self) -> tuple[float, float, float]:
        return (self.t12, self.t13, self.t23)

    @property
    def min_side(self) -> float:
        return min(self.sides)

    def gamma(self) -> float:
        return gamma_ab(self.a, self.b)

    def theta(self) -> float:
        return theta_ab(self.a, self.b)


def gamma_ab(a: float, b: float) -> float:
    """Cosine of the turning angle: (a^2 + b^2 - 1) / (2ab), clamped to [-1, 1].

    Values outside [-1, 1] by more than 1e-12 mean the sides (a, b, 1) form no
    triangle, degenerate or otherwise, and raise.
    """
    if a <= 0 or b <= 0:
        raise ConfigError("circle radii a, b must be > 0")
    g = (a * a + b * b - 1.0) / (2.0 * a * b)
    if abs(g) > 1.0 + DEGENERACY_TOL:
        raise DegenerateTriangleError(f"sides ({a}, {b}, 1) violate the triangle inequality (gamma={g})")
    return min(1.0, max(-1.0, g))


def theta_ab(a: float, b: float) -> float:
    return math.acos(gamma_ab(a, b))


def u_map(a: float, b: float, xi, eta) -> tuple[float, float]:
    """Frequency map of the constrained two-circle kernel (principal branch).

    (xi, eta) in R^2 x R^2 goes to a*xi + b*R(-theta_ab)*eta where R is the
    rotation by theta_ab; the eta block is b times an orthogonal matrix.
    """
    return _u_branch(a, b, xi, eta, +1.0)


def u_map_minus(a: float, b: float, xi, eta) -> tuple[float, float]:
    """Companion branch: a*xi + b*R(+theta_ab)*eta."""
    return _u_branch(a, b, xi, eta, -1.0)


def _u_branch(a, b, xi, eta, sign):
    g = gamma_ab(a, b)
    s = math.sqrt(max(0.0, 1.0 - g * g))
    x1, x2 = float(xi[0]), float(xi[1])
    e1, e2 = float(eta[0]), float(eta[1])
    return (
        a * x1 + b * (g * e1 + sign * s * e2),
        a * x2 + b * (-sign * s * e1 + g * e2),
    )


def sigma_hat(r: float, xi) -> float:
    """Fourier transform of the arc-parameter measure d(theta) on the radius-r circle.

    Equals 2*pi*J0(2*pi*r*|xi|); depends on xi only through its norm and
    carries the (1+|xi|)^(-1/2) stationary-phase decay.
    """
    if r <= 0:
        raise ConfigError("circle radius must be > 0")
    xi = np.asarray(xi, dtype=float)
    norm = float(np.hypot(xi[0], xi[1])) if xi.shape == (2,) else float(np.abs(xi))
    return TWO_PI * float(j0(TWO_PI * r * norm))


def k_hat(a: float, b: float, xi, eta, branch: str = "both") -> complex:
    """Transform of the constrained two-circle kernel at frequencies (xi, eta).

    The kernel is the pushforward of d(theta) under theta -> (a e(theta),
    b e(theta +/- theta_ab)); each branch evaluates in closed form as
    sigma_hat(1, U(xi, eta)) with the branch's frequency map, and 'both'
    (the default, geometrically complete convention) returns their sum.
    """
    if branch not in ("both", "plus", "minus"):
        raise ConfigError(f"unknown branch {branch!r}")
    total = 0.0 + 0.0j
    if branch in ("both", "plus"):
        total += sigma_hat(1.0, u_map(a, b, xi, eta))
    if branch in ("both", "minus"):
        total += sigma_hat(1.0, u_map_minus(a, b, xi, eta))
    return total


def k_hat_direct(a: float, b: float, xi, eta, branch: str = "both", n: int = 8192) -> complex:
    """Trapezoid quadrature of the defining oscillatory integral (diagnostic path).

    Independent of the closed form: integrates exp(2*pi*i*(a e(theta).xi +
    b e(theta +/- theta_ab).eta)) d(theta) over the full period.
    """
    if branch not in ("both", "plus", "minus"):
        raise ConfigError(f"unknown branch {branch!r}")
    th0 = theta_ab(a, b)
    theta = np.arange(n) * (TWO_PI / n)
    x1, x2 = float(xi[0]), float(xi[1])
    e1, e2 = float(eta[0]), float(eta[1])
    total = 0.0 + 0.0j
    for sign in ((+1.0, -1.0) if branch == "both" else ((+1.0,) if branch == "plus" else (-1.0,))):
        phi = theta + sign * th0
        phase = a * np.cos(theta) * x1 + a * np.sin(theta) * x2 + b * np.cos(phi) * e1 + b * np.sin(phi) * e2
        total += np.exp(2j * math.pi * phase).sum() * (TWO_PI / n)
    return complex(total)


# ---------------------------------------------------------------------------
# Mollified arc-length measure of a circle, evaluated pointwise


def sigma_eps(r: float, eps: float, x) -> float:
    """Value at x of the radius-r arc-length measure mollified at scale eps."""
    x = np.asarray(x, dtype=float)
    return float(sigma_eps_radial(r, eps, np.array([math.hypot(x[0], x[1])]))[0])


def sigma_eps_radial(r: float, eps: float, dist: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Vectorized radial profile of the mollified arc-length measure.

    For each d = |x|, integrates r * rho_eps(x - r e(theta)) over the arc
    within distance eps of x; doubling Gauss-Legendre panels until the
    relative change falls below tol.  Zero when | |x| - r | >= eps.
    """
    if r <= 0 or eps <= 0:
        raise ConfigError("sigma_eps needs r > 0 and eps > 0")
    d = np.asarray(dist, dtype=float)
    out = np.zeros_like(d)
    live = np.abs(d - r) < eps
    if not np.any(live):
        return out
    dl = d[live]
    moll = Mollifier(eps)

    # opening half-angle of the arc within eps of x
    with np.errstate(divide="ignore", invalid="ignore"):
        cmin = (dl * dl + r * r - eps * eps) / (2.0 * dl * r)
    cmin = np.where(dl > 0, cmin, np.inf)  # d == 0: reachable only if r < eps
    full = cmin <= -1.0
    psi_max = np.where(full, math.pi, np.arccos(np.clip(cmin, -1.0, 1.0)))
    psi_max = np.where((dl == 0.0) & (r < eps), math.pi, psi_max)

    def integrate(npts: int) -> np.ndarray:
        nodes, wts = np.polynomial.legendre.leggauss(npts)
        psi = 0.5 * psi_max[:, None] * (nodes[None, :] + 1.0)
        w = 0.5 * psi_max[:, None] * wts[None, :]
        sep = np.sqrt(np.maximum(dl[:, None] ** 2 + r * r - 2.0 * r * dl[:, None] * np.cos(psi), 0.0))
        return 2.0 * r * (w * moll.density_radial(sep)).sum(axis=1)

    val = integrate(48)
    for npts in (96, 192, 384):
        nxt = integrate(npts)
        if np.all(np.abs(nxt - val) <= tol * np.maximum(np.abs(nxt), 1.0)):
            val = nxt
            break
        val = nxt
    out[live] = val
    return out


# ---------------------------------------------------------------------------
# Radial profile of bump_delta * |.|^(alpha-2), used by the smoothed potential


def smoothed_power_profile(alpha: float, delta: float, rmax: float, table: int = 1200) -> tuple:
    """Tabulated radial profile G(rho) of the mollified power kernel.

    G(rho) = int |v|**(alpha-2) rho_delta(z - v) dv for |z| = rho, computed in
    polar coordinates around the kernel singularity; far from the bump it
    matches rho**(alpha-2) to O((delta/rho)^2).
    """
    if rmax <= delta * 4:
        rmax = delta * 4
    near = np.linspace(0.0, 4.0 * delta, 481)
    far = np.geomspace(4.0 * delta, rmax * 1.0001, table - 481)
    rho = np.unique(np.concatenate([near, far]))
    moll = Mollifier(delta)
    gl_t, gl_wt = np.polynomial.legendre.leggauss(64)
    gl_p, gl_wp = np.polynomial.legendre.leggauss(64)
    G = np.empty_like(rho)
    for i, rh in enumerate(rho):
        if rh >= delta:
            t_lo, t_hi = rh - delta, rh + delta
            t = 0.5 * (t_hi - t_lo) * (gl_t + 1.0) + t_lo
            wt = 0.5 * (t_hi - t_lo) * gl_wt
        else:
            # singularity inside the bump: t = tau**(1/alpha) flattens t**(alpha-1) dt
            tau_hi = (rh + delta) ** alpha
            tau = 0.5 * tau_hi * (gl_t + 1.0)
            t = tau ** (1.0 / alpha)
            wt = (0.5 * tau_hi * gl_wt) / alpha * t ** (1.0 - alpha)
        # angular window where |z - t e(psi)| <= delta
        with np.errstate(divide="ignore", invalid="ignore"):
            cmin = (rh * rh + t * t - delta * delta) / (2.0 * rh * t)
        if rh == 0.0:
            psi_max = np.full_like(t, math.pi)
        else:
            psi_max = np.where(cmin <= -1.0, math.pi, np.arccos(np.clip(cmin, -1.0, 1.0)))
            psi_max = np.where(t == 0.0, math.pi, psi_max)
        psi = 0.5 * psi_max[:, None] * (gl_p[None, :] + 1.0)
        wp = 0.5 * psi_max[:, None] * gl_wp[None, :]
        sep = np.sqrt(np.maximum(rh * rh + t[:, None] ** 2 - 2.0 * rh * t[:, None] * np.cos(psi), 0.0))
        ang = 2.0 * (wp * moll.density_radial(sep)).sum(axis=1)
        with np.errstate(over="ignore"):
            G[i] = float((wt * np.where(t > 0, t ** (alpha - 1.0), 0.0) * ang).sum())
    return rho, G
