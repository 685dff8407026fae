"""Batch experiment runner.

One subcommand per experiment family; parameters come from an optional JSON
config with command-line flags taking precedence.  Results land in CSV files
whose bodies are byte-identical across reruns of the same config and seed;
wall-clock times, warnings, and the tolerance table go to a JSON run report.

Exit codes: 0 success, 2 configuration error, 3 resource cap, 4 numeric
failure.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _parallel
from .circle_kernel import TriangleSpec, gamma_ab, k_hat, sigma_hat, theta_ab, u_map
from .discrete_geom import (
    GeneratorSpec,
    PointSet,
    corollary_experiment,
    count_congruent_brute,
    count_congruent_fast,
    distinct_distances,
    distinct_triangle_classes,
    generate,
)
from .errors import AdaptabilityError, ConfigError, NumericError, ResourceCapError
from .measure_core import (
    CantorSpec,
    DiscreteMeasure,
    cantor_measure,
    energy_integral,
    frostman_ratio,
    measure_from_points,
    product_measure,
    read_measure,
    shifted_union,
    write_measure,
)
from .sharpness_lab import (
    RIGHT_ISOCELES,
    MattilaSpec,
    build_mattila,
    distance_blowup_fit,
    pair_annulus_exponent,
    triple_scaling_fit,
)
from .tolerances import TOLERANCES
from .trilinear import (
    AnnulusTriple,
    ConfigHistogram,
    config_density,
    distance_measure_density,
    triple_annulus_mass,
    trilinear_form,
)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_CAP = 3
EXIT_NUMERIC = 4


@dataclass
class ExperimentConfig:
    subcommand: str
    params: dict
    seed: int = 0
    out: str | None = None
    report: str | None = None
    threads: int = 1
    max_atoms: int = 4_000_000
    max_grid_cells: int = 40_000_000
    max_seconds: float = 3600.0


@dataclass
class RunReport:
    subcommand: str
    params: dict
    seed: int
    outputs: list = field(default_factory=list)
    results: dict = field(default_factory=dict)
    warnings: list = field(default_factory=list)
    seconds: float = 0.0
    tolerances: dict = field(default_factory=lambda: dict(TOLERANCES))

    def to_json(self) -> str:
        return json.dumps(
            {
                "subcommand": self.subcommand,
                "params": self.params,
                "seed": self.seed,
                "outputs": self.outputs,
                "results": self.results,
                "warnings": self.warnings,
                "seconds": self.seconds,
                "tolerances": self.tolerances,
            },
            indent=2,
            sort_keys=True,
        )


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def write_csv(path, header: list[str], rows, comments: list[str] = ()) -> None:
    """CSV with '#' comment lines before the header; the body is
    deterministic for a fixed config and seed."""
    with open(path, "w", encoding="utf-8") as f:
        for c in comments:
            f.write(f"# {c}\n")
        f.write(",".join(header) + "\n")
        for row in rows:
            f.write(",".join(_fmt(v) for v in row) + "\n")


def _parse_triple(text: str) -> TriangleSpec:
    parts = [float(p) for p in text.split(",")]
    if len(parts) != 3:
        raise ConfigError(f"expected t12,t13,t23 got {text!r}")
    return TriangleSpec(*parts)


def _parse_eps_list(text: str) -> tuple[float, ...]:
    """Either comma-separated values or a dyadic range '2^-3..2^-6'."""
    text = text.strip()
    if ".." in text:
        lo_s, hi_s = text.split("..")

        def dy(s):
            s = s.strip()
            if s.startswith("2^"):
                return float(2.0 ** float(s[2:]))
            return float(s)

        a, b = dy(lo_s), dy(hi_s)
        hi_k = round(math.log2(max(a, b)))
        lo_k = round(math.log2(min(a, b)))
        return tuple(2.0**k for k in range(hi_k, lo_k - 1, -1))
    return tuple(float(p) for p in text.split(","))


def _load_measure(cfg: ExperimentConfig) -> DiscreteMeasure:
    p = cfg.params
    if p.get("measure_file"):
        return read_measure(p["measure_file"])
    kind = p.get("measure", "mattila")
    if kind == "mattila":
        spec = MattilaSpec(
            float(p.get("alpha", 1.0)),
            float(p.get("beta", 0.75)),
            int(p.get("level", 5)),
            (0.125,),
        )
        m = build_mattila(spec, atom_cap=cfg.max_atoms)
    elif kind == "cantor-product":
        c = cantor_measure(CantorSpec.from_dimension(float(p.get("alpha", 1.0)), int(p.get("level", 5))))
        m = product_measure(c, c, atom_cap=cfg.max_atoms)
    elif kind == "points":
        P = generate(p.get("kind", "grid"), int(p.get("n", 1024)), cfg.seed)
        m = measure_from_points(P.points)
    else:
        raise ConfigError(f"unknown measure kind {kind!r}")
    if float(p.get("scale", 1.0)) != 1.0:
        m = m.scaled(float(p["scale"]))
    return m


# ---------------------------------------------------------------------------
# Subcommand handlers: each returns (csv rows data..., report results)


def _gen_kwargs(p: dict) -> dict:
    """Per-kind generator keywords from nested params or flat overrides."""
    kw = dict(p.get("params", {}))
    for key in ("radius", "ratio"):
        if key in p:
            kw[key] = float(p[key])
    return {k: float(v) for k, v in kw.items()}


def _run_generate(cfg: ExperimentConfig, rep: RunReport):
    p = cfg.params
    P = generate(p.get("kind", "grid"), int(p.get("n", 64)), cfg.seed, **_gen_kwargs(p))
    out = cfg.out or "points.txt"
    write_measure(measure_from_points(P.points, np.ones(P.n)), out)
    rep.outputs.append(out)
    rep.results["n"] = P.n


def _run_energy(cfg: ExperimentConfig, rep: RunReport):
    m = _load_measure(cfg)
    s = float(cfg.params.get("s", 1.75))
    val = energy_integral(m, s)
    rep.results.update(n=m.n, s=s, energy=val)
    if cfg.out:
        write_csv(cfg.out, ["n", "s", "energy"], [(m.n, s, val)])
        rep.outputs.append(cfg.out)


def _run_frostman(cfg: ExperimentConfig, rep: RunReport):
    m = _load_measure(cfg)
    p = cfg.params
    s = float(p.get("s", 1.75))
    scales = _parse_eps_list(p.get("scales", "2^-2..2^-5"))
    rows = [(m.n, s, d, frostman_ratio(m, s, [d], seed=cfg.seed)) for d in scales]
    rep.results.update(n=m.n, s=s, max_ratio=max(r[3] for r in rows))
    if cfg.out:
        write_csv(cfg.out, ["n", "s", "delta", "ratio"], rows)
        rep.outputs.append(cfg.out)


def _run_annulus_mass(cfg: ExperimentConfig, rep: RunReport):
    m = _load_measure(cfg)
    p = cfg.params
    spec = _parse_triple(p.get("t", "1,1,1.4142135623730951"))
    eps_list = _parse_eps_list(p.get("eps", "2^-3..2^-5"))
    rows = []
    for e in eps_list:
        mass = triple_annulus_mass(m, AnnulusTriple(spec, e))
        rows.append((spec.t12, spec.t13, spec.t23, e, mass))
    rep.results["masses"] = {str(r[3]): r[4] for r in rows}
    if cfg.out:
        write_csv(cfg.out, ["t12", "t13", "t23", "eps", "mass"], rows)
        rep.outputs.append(cfg.out)


def _run_trilinear(cfg: ExperimentConfig, rep: RunReport):
    m = _load_measure(cfg)
    p = cfg.params
    spec = _parse_triple(p.get("t", "1,1,1.4142135623730951"))
    eps_list = _parse_eps_list(p.get("eps", "2^-3..2^-4"))
    rows = []
    for e in eps_list:
        val = trilinear_form(m, m, m, spec, e)
        rows.append((spec.t12, spec.t13, spec.t23, e, val))
    rep.results["values"] = {str(r[3]): r[4] for r in rows}
    if cfg.out:
        write_csv(cfg.out, ["t12", "t13", "t23", "eps", "trilinear"], rows)
        rep.outputs.append(cfg.out)


def _run_config_density(cfg: ExperimentConfig, rep: RunReport):
    m = _load_measure(cfg)
    w = float(cfg.params.get("bin_width", 0.1))
    hist = config_density(m, w)
    rep.results.update(total_mass=hist.total_mass, nbins=hist.nbins, sup_density=float(hist.density().max()))
    if cfg.out:
        write_csv(
            cfg.out,
            ["i", "j", "k", "c12", "c13", "c23", "mass", "density"],
            hist.rows(),
        )
        rep.outputs.append(cfg.out)


def _run_distance_density(cfg: ExperimentConfig, rep: RunReport):
    m = _load_measure(cfg)
    p = cfg.params
    t = float(p.get("t", 1.0))
    eps_list = _parse_eps_list(p.get("eps", "2^-3..2^-6"))
    rows = [(t, e, distance_measure_density(m, e, t)) for e in eps_list]
    rep.results["densities"] = {str(r[1]): r[2] for r in rows}
    if cfg.out:
        write_csv(cfg.out, ["t", "eps", "density"], rows)
        rep.outputs.append(cfg.out)


def _run_bilinear_bound(cfg: ExperimentConfig, rep: RunReport):
    from .bilinear import TestFunctionSpec, boundedness_experiment
    from .measure_core import make_grid

    p = cfg.params
    beta1 = float(p.get("beta1", 0.375))
    beta2 = float(p.get("beta2", 0.125))
    a = float(p.get("a", 1.0))
    b = float(p.get("b", 1.0))
    eps_list = _parse_eps_list(p.get("eps", "2^-2..2^-5"))
    npairs = int(p.get("pairs", 5))
    ngrid = int(p.get("grid", 257))
    if ngrid * ngrid > cfg.max_grid_cells:
        raise ResourceCapError(f"grid {ngrid}^2 exceeds cell cap")
    width = float(p.get("width", 0.75))
    side = 2.0 * width + 2.0 * (max(a, b) + max(eps_list)) + 0.2
    grid = make_grid((-side / 2 + 0.5, -side / 2 + 0.5), side / (ngrid - 1), ngrid, ngrid)
    rng = np.random.default_rng(cfg.seed)
    pairs = []
    for k in range(npairs):
        s1, s2 = rng.integers(0, 2**31, 2)
        pairs.append(
            (
                TestFunctionSpec("band-limited-random", (0.5, 0.5), width, 4, int(s1)),
                TestFunctionSpec("band-limited-random", (0.5, 0.5), width, 4, int(s2)),
            )
        )
    res = boundedness_experiment(pairs, a, b, eps_list, beta1, beta2, grid, quad_points=int(p.get("quad_points", 512)))
    rows = [(r.pair_id, r.eps, r.numerator, r.denom_f, r.denom_g, r.ratio) for r in res.rows]
    stab = res.pair_stability()
    rep.results.update(max_stability=max(stab.values()), beta1=beta1, beta2=beta2)
    if cfg.out:
        write_csv(cfg.out, ["pair", "eps", "numerator", "denom_f", "denom_g", "ratio"], rows)
        rep.outputs.append(cfg.out)


def _run_kernel_dump(cfg: ExperimentConfig, rep: RunReport):
    p = cfg.params
    a = float(p.get("a", 1.0))
    b = float(p.get("b", 1.0))
    fmax = float(p.get("fmax", 8.0))
    npts = int(p.get("n", 9))
    grid = np.linspace(-fmax, fmax, npts)
    rows = []
    for x1 in grid:
        for x2 in grid:
            for e1 in grid:
                for e2 in grid:
                    u = u_map(a, b, (x1, x2), (e1, e2))
                    val = k_hat(a, b, (x1, x2), (e1, e2), "both")
                    rows.append((x1, x2, e1, e2, val.real, val.imag, abs(val), math.hypot(*u)))
    rep.results["points"] = len(rows)
    if cfg.out:
        write_csv(cfg.out, ["xi1", "xi2", "eta1", "eta2", "re", "im", "modulus", "u_norm"], rows)
        rep.outputs.append(cfg.out)


def _run_count(cfg: ExperimentConfig, rep: RunReport):
    p = cfg.params
    n = int(p.get("n", 1024))
    P = generate(p.get("kind", "grid"), n, cfg.seed, **_gen_kwargs(p))
    spec = _parse_triple(p.get("t", "0.5,0.5,0.70710678118654757"))
    delta_raw = p.get("delta", "auto")
    delta = float(P.n) ** (-4.0 / 7.0) if delta_raw in ("auto", None) else float(delta_raw)
    t0 = time.perf_counter()
    c = count_congruent_fast(P, spec, delta)
    dt = time.perf_counter() - t0
    rep.results.update(n=P.n, delta=delta, count=c, seconds=dt)
    if cfg.out:
        write_csv(cfg.out, ["n", "delta", "count"], [(P.n, delta, c)], comments=[f"seconds={dt:.3f}"])
        rep.outputs.append(cfg.out)


def _run_distinct(cfg: ExperimentConfig, rep: RunReport):
    p = cfg.params
    n = int(p.get("n", 1024))
    P = generate(p.get("kind", "grid"), n, cfg.seed, **_gen_kwargs(p))
    res = float(p.get("resolution", 0.0))
    dd = distinct_distances(P, res)
    rows = [(P.n, res, dd, P.n * P.n / math.log(P.n) if P.n > 1 else 0.0)]
    out = {"n": P.n, "distinct_distances": dd}
    if p.get("classes"):
        out["distinct_triangle_classes"] = distinct_triangle_classes(P, max(res, 1e-9))
    rep.results.update(out)
    if cfg.out:
        write_csv(cfg.out, ["n", "resolution", "distinct", "n2_over_log_n"], rows)
        rep.outputs.append(cfg.out)


def _run_corollary(cfg: ExperimentConfig, rep: RunReport):
    p = cfg.params
    sizes = [int(v) for v in str(p.get("sizes", "1024,4096,16384")).split(",")]
    b = float(p.get("b", 0.01))
    spec = _parse_triple(p.get("t", "0.5,0.5,0.70710678118654757"))
    gen = GeneratorSpec(p.get("kind", "grid"), sizes[0], cfg.seed, tuple(_gen_kwargs(p).items()))
    res = corollary_experiment(gen, sizes, b, spec)
    rows = [(n, d, c) for (n, d, c, _) in res.rows]
    secs = {str(n): s for (n, _, _, s) in res.rows}
    rep.results.update(slope=res.fit.slope, intercept=res.fit.intercept, residual=res.fit.residual, seconds_by_n=secs)
    if cfg.out:
        write_csv(
            cfg.out,
            ["n", "delta", "count"],
            rows,
            comments=[f"fit: slope={res.fit.slope:.17g} intercept={res.fit.intercept:.17g} residual={res.fit.residual:.17g}"],
        )
        rep.outputs.append(cfg.out)


def _run_sharpness(cfg: ExperimentConfig, rep: RunReport):
    p = cfg.params
    alpha = float(p.get("alpha", 1.0))
    beta = float(p.get("beta", 0.75))
    level = int(p.get("level", 6))
    eps_list = _parse_eps_list(p.get("eps", "2^-3..2^-6"))
    config = _parse_triple(p.get("t", "1,1,1.4142135623730951")) if p.get("t") else None
    scale = float(p.get("scale", 0.5))
    spec = MattilaSpec(alpha, beta, level, eps_list)
    sides = config.sides if config else RIGHT_ISOCELES
    measure = build_mattila(spec, atom_cap=cfg.max_atoms).scaled(scale)
    res = triple_scaling_fit(spec, config=sides, measure=measure)
    rows = [(e, mass, mass / e**3) for e, mass in zip(res.eps, res.masses)]
    rep.results.update(slope=res.fit.slope, intercept=res.fit.intercept, predicted=1.5 * alpha + 2.0 * beta)
    if cfg.out:
        write_csv(
            cfg.out,
            ["eps", "mass", "density"],
            rows,
            comments=[f"fit: slope={res.fit.slope:.17g} intercept={res.fit.intercept:.17g} residual={res.fit.residual:.17g}"],
        )
        rep.outputs.append(cfg.out)


def _selftest_checks():
    """Trivial-tier example checks, one tuple (name, passed, detail) each."""
    s2 = math.sqrt(2.0)
    checks = []

    def chk(name, fn):
        try:
            ok, detail = fn()
        except Exception as exc:  # a trivial check must not throw
            ok, detail = False, f"raised {type(exc).__name__}: {exc}"
        checks.append((name, bool(ok), str(detail)))

    chk("gamma(1,1)=1/2", lambda: (abs(gamma_ab(1, 1) - 0.5) < 1e-15, gamma_ab(1, 1)))
    chk("theta(1/sqrt2,1/sqrt2)=pi/2", lambda: (abs(theta_ab(1 / s2, 1 / s2) - math.pi / 2) < 1e-12, theta_ab(1 / s2, 1 / s2)))
    chk("gamma(2,1) clamps to 1", lambda: (gamma_ab(2, 1) == 1.0, gamma_ab(2, 1)))

    def degenerate():
        try:
            gamma_ab(3, 1)
            return False, "no error"
        except NumericError:
            return True, "raised"

    chk("gamma(3,1) degenerate error", degenerate)
    chk("sigma_hat(r,0)=2pi", lambda: (abs(sigma_hat(1.0, (0.0, 0.0)) - 2 * math.pi) < 1e-12, sigma_hat(1.0, (0.0, 0.0))))

    def umap_eta0():
        u = u_map(0.8, 0.9, (2.0, -1.0), (0.0, 0.0))
        return abs(u[0] - 1.6) + abs(u[1] + 0.8) < 1e-15, u

    chk("u_map eta=0 collapse", umap_eta0)

    def cantor_third():
        m = cantor_measure(CantorSpec(1.0 / 3.0, 1))
        return np.allclose(m.xy[:, 0], [0.0, 2.0 / 3.0]) and np.allclose(m.w, 0.5), m.xy[:, 0]

    chk("cantor(1/3,1) atoms", cantor_third)

    def dyadic():
        m = cantor_measure(CantorSpec(0.5, 3))
        return np.allclose(m.xy[:, 0], np.arange(8) / 8.0) and np.allclose(m.w, 1 / 8), m.n

    chk("cantor(1/2,3) dyadic atoms", dyadic)

    def shift():
        m = shifted_union(measure_from_points(np.array([[0.0, 0.0]])))
        return np.allclose(sorted(m.xy[:, 0]), [-1.0, 1.0]) and abs(m.total_mass - 1.0) < 1e-15, m.total_mass

    chk("shifted_union single atom", shift)

    def product_mass():
        c = cantor_measure(CantorSpec(0.5, 2))
        m = product_measure(c, c)
        return abs(m.total_mass - 1.0) < 1e-12 and m.n == 16, m.total_mass

    chk("product measure mass", product_mass)

    def energy_pair():
        m = DiscreteMeasure(np.array([[0.0, 0.0], [0.5, 0.0]]), np.array([0.5, 0.5]))
        return abs(energy_integral(m, 1.0) - 1.0) < 1e-14, energy_integral(m, 1.0)

    chk("two-atom energy = 1", energy_pair)

    def equilateral_mass():
        y = math.sqrt(0.75)
        while 0.25 + y * y < 1.0:
            y = np.nextafter(y, 2.0)
        m = measure_from_points(np.array([[0.0, 0.0], [1.0, 0.0], [0.5, y]]))
        v = triple_annulus_mass(m, AnnulusTriple(TriangleSpec(1, 1, 1), 0.01))
        return abs(v - 2.0 / 9.0) < 1e-14, v

    chk("equilateral triple mass 2/9", equilateral_mass)

    def grid_count():
        P = PointSet(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]))
        c = count_congruent_brute(P, TriangleSpec(1, 1, s2), 0.01)
        return c == 8, c

    chk("2x2 grid count = 8", grid_count)

    def scalene():
        P = PointSet(np.array([[0.1, 0.1], [0.6, 0.1], [0.1, 0.5]]))
        c = count_congruent_brute(P, TriangleSpec(0.5, 0.4, math.hypot(0.5, 0.4)), 1e-9)
        return c == 1, c

    chk("scalene count = 1", scalene)

    def distinct_grid():
        P = PointSet(np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]]))
        return distinct_distances(P) == 2, distinct_distances(P)

    chk("2x2 distinct distances = 2", distinct_grid)

    def collinear():
        # dyadic spacing keeps coordinate differences exact in floats
        P = PointSet(np.column_stack([np.arange(7) / 8.0, np.zeros(7)]))
        return distinct_distances(P) == 6, distinct_distances(P)

    chk("collinear n-1 distances", collinear)

    def bilinear_mass():
        from .bilinear import apply_bilinear
        from .measure_core import make_grid

        g = make_grid((-2.5, -2.5), 5 / 64, 65, 65)
        ones = g.like(np.ones_like(g.values))
        B = apply_bilinear(ones, ones, 1.0, 1.0, 0.25, 128)
        mrg = int(math.ceil(1.3 / g.spacing))
        err = float(np.abs(B.values[mrg:-mrg, mrg:-mrg] - 4 * math.pi).max())
        return err < 1e-6, err

    chk("B(1,1) = 4pi", bilinear_mass)

    def parseval():
        from .bilinear import TestFunctionSpec, sobolev_norm
        from .measure_core import make_grid

        g = make_grid((-0.5, -0.5), 2 / 128, 129, 129)
        f = TestFunctionSpec("gaussian", (0.5, 0.5), 0.08).sample(g)
        l2 = math.sqrt(float((f.values**2).sum()) * g.spacing**2)
        return abs(sobolev_norm(f, 0.0) - l2) <= 1e-10 * l2, sobolev_norm(f, 0.0)

    chk("Sobolev beta=0 Parseval", parseval)

    def mattila_trivial():
        m = build_mattila(MattilaSpec(1.0, 1.0, 2, (0.25,)))
        x0, x1, y0, y1 = m.bbox()
        return (
            m.n == 64 and abs(m.total_mass - 1.0) < 1e-12 and x0 == -1.0 and x1 == 1.75,
            (m.n, m.total_mass, x0, x1),
        )

    chk("mattila (1,1,L=2) 64 atoms on [-1,1.75]", mattila_trivial)

    def count_empty():
        P = PointSet(np.array([[0.0, 0.0], [1.0, 1.0]]))
        return count_congruent_brute(P, TriangleSpec(1, 1, s2), 0.01) == 0, "n<3"

    chk("n<3 count = 0", count_empty)
    return checks


def selftest(cfg: ExperimentConfig | None = None) -> RunReport:
    """Run every trivial-tier example; failures are reported, not raised."""
    rep = RunReport("selftest", {}, 0)
    t0 = time.perf_counter()
    checks = _selftest_checks()
    rep.results["checks"] = [
        {"name": n, "pass": ok, "detail": detail} for (n, ok, detail) in checks
    ]
    rep.results["passed"] = sum(1 for _, ok, _ in checks if ok)
    rep.results["failed"] = sum(1 for _, ok, _ in checks if not ok)
    rep.seconds = time.perf_counter() - t0
    return rep


_HANDLERS = {
    "generate": _run_generate,
    "energy": _run_energy,
    "frostman": _run_frostman,
    "annulus-mass": _run_annulus_mass,
    "trilinear": _run_trilinear,
    "config-density": _run_config_density,
    "distance-density": _run_distance_density,
    "bilinear-bound": _run_bilinear_bound,
    "kernel-dump": _run_kernel_dump,
    "count": _run_count,
    "distinct": _run_distinct,
    "corollary": _run_corollary,
    "sharpness": _run_sharpness,
}


def run(cfg: ExperimentConfig) -> RunReport:
    """Execute one experiment; deterministic outputs for one (config, seed)."""
    if cfg.subcommand == "selftest":
        rep = selftest(cfg)
    else:
        if cfg.subcommand not in _HANDLERS:
            raise ConfigError(f"unknown subcommand {cfg.subcommand!r}")
        _parallel.set_max_workers(cfg.threads)
        rep = RunReport(cfg.subcommand, dict(cfg.params), cfg.seed)
        t0 = time.perf_counter()
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            _HANDLERS[cfg.subcommand](cfg, rep)
        rep.warnings = [str(w.message) for w in caught]
        rep.seconds = time.perf_counter() - t0
        if rep.seconds > cfg.max_seconds:
            raise ResourceCapError(f"run took {rep.seconds:.1f}s > cap {cfg.max_seconds}s")
    if cfg.report:
        with open(cfg.report, "w", encoding="utf-8") as f:
            f.write(rep.to_json())
        rep.outputs.append(cfg.report)
    return rep


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="triconfig", description=__doc__)
    ap.add_argument("subcommand", choices=sorted([*_HANDLERS, "selftest"]))
    ap.add_argument("--config", help="JSON file with parameters (flags win)")
    ap.add_argument("--out", help="CSV output path")
    ap.add_argument("--report", help="JSON run-report path")
    ap.add_argument("--seed", type=int, default=None)
    ap.add_argument("--threads", type=int, default=None)
    ap.add_argument("--max-atoms", type=int, default=None)
    ap.add_argument("--max-grid-cells", type=int, default=None)
    ap.add_argument("--max-seconds", type=float, default=None)
    # free-form parameter overrides: --param key=value (repeatable)
    ap.add_argument("--param", action="append", default=[], metavar="KEY=VALUE")
    # common shortcuts
    for name in ("alpha", "beta", "level", "eps", "t", "n", "kind", "s", "delta", "sizes", "b",
                 "beta1", "beta2", "a", "scale", "bin_width", "resolution", "measure", "grid",
                 "pairs", "quad_points", "scales", "measure-file", "fmax", "width"):
        ap.add_argument(f"--{name}", default=None)
    ap.add_argument("--eps-list", dest="eps_list_alias", default=None, help="synonym for --eps")
    return ap


def _config_from_args(argv) -> ExperimentConfig:
    ap = _build_parser()
    ns = ap.parse_args(argv)
    params: dict = {}
    file_cfg: dict = {}
    if ns.config:
        try:
            with open(ns.config, "r", encoding="utf-8") as f:
                file_cfg = json.load(f)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {ns.config}: {exc}") from exc
        params.update(file_cfg.get("params", {}))
    for name in ("alpha", "beta", "level", "eps", "t", "n", "kind", "s", "delta", "sizes", "b",
                 "beta1", "beta2", "a", "scale", "bin_width", "resolution", "measure", "grid",
                 "pairs", "quad_points", "scales", "fmax", "width"):
        v = getattr(ns, name.replace("-", "_"))
        if v is not None:
            params[name] = v
    if ns.eps_list_alias is not None:
        params["eps"] = ns.eps_list_alias
    mf = getattr(ns, "measure_file", None)
    if mf is not None:
        params["measure_file"] = mf
    for kv in ns.param:
        if "=" not in kv:
            raise ConfigError(f"--param expects KEY=VALUE, got {kv!r}")
        k, v = kv.split("=", 1)
        params[k] = v
    seed = ns.seed if ns.seed is not None else int(file_cfg.get("seed", 0))
    threads = ns.threads if ns.threads is not None else int(
        file_cfg.get("threads", _parallel.workers_from_env(1))
    )
    return ExperimentConfig(
        subcommand=ns.subcommand,
        params=params,
        seed=seed,
        out=ns.out or file_cfg.get("out"),
        report=ns.report or file_cfg.get("report"),
        threads=threads,
        max_atoms=int(ns.max_atoms or file_cfg.get("max_atoms", 4_000_000)),
        max_grid_cells=int(ns.max_grid_cells or file_cfg.get("max_grid_cells", 40_000_000)),
        max_seconds=float(ns.max_seconds or file_cfg.get("max_seconds", 3600.0)),
    )


def main(argv=None) -> int:
    try:
        cfg = _config_from_args(sys.argv[1:] if argv is None else argv)
        rep = run(cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ResourceCapError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_CAP
    except (NumericError, AdaptabilityError) as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except SystemExit as exc:  # argparse errors
        return EXIT_CONFIG if exc.code not in (0, None) else 0
    if cfg.subcommand == "selftest":
        for item in rep.results["checks"]:
            print(f"{'PASS' if item['pass'] else 'FAIL'} {item['name']} ({item['detail']})")
        print(f"selftest: {rep.results['passed']} passed, {rep.results['failed']} failed")
        return EXIT_OK if rep.results["failed"] == 0 else EXIT_NUMERIC
    print(json.dumps({"subcommand": rep.subcommand, "results": rep.results, "seconds": round(rep.seconds, 3)}, sort_keys=True, default=str))
    return EXIT_OK


if __name__ == "__main__":
    raise SystemExit(main())
