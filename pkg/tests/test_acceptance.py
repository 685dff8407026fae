"""Acceptance gate: every criterion at its pinned tolerance.

Each test prints one PASS/FAIL line per criterion (sub-checks where a
criterion bundles several) and then asserts.  Tolerances come from the
central table; nothing here is recalibrated at run time.
"""

import math
import time

import numpy as np
import pytest

from triconfig import _parallel
from triconfig.bilinear import (
    TestFunctionSpec,
    apply_bilinear,
    apply_bilinear_plane_wave_check,
    sobolev_norm,
)
from triconfig.circle_kernel import TriangleSpec, j0, k_hat, k_hat_direct, u_map
from triconfig.discrete_geom import (
    GeneratorSpec,
    corollary_experiment,
    count_congruent_brute,
    count_congruent_fast,
    generate,
)
from triconfig.measure_core import (
    CantorSpec,
    DiscreteMeasure,
    cantor_measure,
    make_grid,
    measure_from_points,
    product_measure,
    riesz_potential,
)
from triconfig.sharpness_lab import (
    MattilaSpec,
    build_mattila,
    distance_blowup_fit,
    pair_annulus_exponent,
    triple_scaling_fit,
)
from triconfig.tolerances import TOLERANCES
from triconfig.trilinear import AnnulusTriple, triple_annulus_mass, triple_annulus_mass_brute
from triconfig.cli import main as cli_main, selftest

S2 = math.sqrt(2.0)
_parallel.set_max_workers(2)


def report(name: str, ok: bool, detail: str) -> bool:
    print(f"ACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} ({detail})")
    return ok


def test_criterion_1_kernel_identity():
    tol = TOLERANCES["kernel_identity_abs"]
    rng = np.random.default_rng(314159)
    t0 = time.perf_counter()
    worst = 0.0
    for a, b in ((1.0, 1.0), (0.8, 0.9), (1.0 / S2, 1.0 / S2)):
        for _ in range(34):
            xi = rng.uniform(-8.0, 8.0, 2)
            eta = rng.uniform(-8.0, 8.0, 2)
            closed = k_hat(a, b, xi, eta, "plus")
            direct = k_hat_direct(a, b, xi, eta, "plus")
            worst = max(worst, abs(closed - direct))
    dt = time.perf_counter() - t0
    ok = report("1 kernel identity", worst <= tol and dt < 10.0, f"worst abs err {worst:.2e}, {dt:.1f}s")
    assert ok


def test_criterion_2_decay_law():
    bound = TOLERANCES["sigma_hat_decay_sup"]
    t0 = time.perf_counter()
    q = np.linspace(0.0, 50.0, 400001)
    sup = float((2.0 * math.pi * np.abs(j0(2.0 * math.pi * q)) * np.sqrt(1.0 + q)).max())
    dt = time.perf_counter() - t0
    ok = report("2 decay law", sup <= bound and dt < 1.0, f"sup {sup:.4f} <= {bound}, {dt:.2f}s")
    assert ok


def test_criterion_3_bilinear_mass_and_equivariance():
    t0 = time.perf_counter()
    n = 257
    g = make_grid((-2.5, -2.5), 5.0 / (n - 1), n, n)
    ones = g.like(np.ones_like(g.values))
    eps = 1.0 / 16.0
    B = apply_bilinear(ones, ones, 1.0, 1.0, eps)
    margin = int(math.ceil((1.0 + 2.0 * eps) / g.spacing))
    err_mass = float(np.abs(B.values[margin:-margin, margin:-margin] - 4.0 * math.pi).max())
    ok1 = report("3a B(1,1)=4pi", err_mass <= TOLERANCES["bilinear_mass_abs"], f"max abs err {err_mass:.2e}")

    fv = np.zeros_like(g.values)
    fv[100:130, 110:140] = 1.0
    B1 = apply_bilinear(g.like(fv), g.like(fv), 0.6, 0.6, eps, 256)
    sh = (3, 5)
    f2 = g.like(np.roll(fv, sh, axis=(0, 1)))
    B2 = apply_bilinear(f2, f2, 0.6, 0.6, eps, 256)
    ok2 = report(
        "3b translation equivariance",
        bool(np.array_equal(np.roll(B1.values, sh, axis=(0, 1)), B2.values)),
        "exact on the shared grid",
    )

    rng = np.random.default_rng(1729)
    worst = 0.0
    for _ in range(100):
        xi = rng.uniform(-8.0, 8.0, 2)
        eta = rng.uniform(-8.0, 8.0, 2)
        meas, ref = apply_bilinear_plane_wave_check(0.9, 0.8, xi, eta, 0.0)
        worst = max(worst, abs(meas - ref))
    ok3 = report("3c plane-wave multiplier", worst <= TOLERANCES["plane_wave_abs"], f"worst {worst:.2e}")
    dt = time.perf_counter() - t0
    ok4 = report("3d runtime", dt < 30.0, f"{dt:.1f}s at grid {n - 1}^2")
    assert ok1 and ok2 and ok3 and ok4


def test_criterion_4_finite_scale_uniformity():
    t0 = time.perf_counter()
    cap = TOLERANCES["ratio_stability_max"]
    n = 321
    eps_list = [2.0**-2, 2.0**-3, 2.0**-4, 2.0**-5]
    # windows wide enough that the unit-separation circle pair fits the
    # supports robustly at every eps; reach is max(a,b) + eps
    side = 1.5 + 2.0 * (1.0 + eps_list[0]) + 0.2
    g = make_grid((-side / 2 + 0.5, -side / 2 + 0.5), side / (n - 1), n, n)
    rng = np.random.default_rng(977)
    h = g.spacing
    worst = 0.0
    for pid in range(20):
        s1, s2 = (int(v) for v in rng.integers(0, 2**31, 2))
        f = TestFunctionSpec("band-limited-random", (0.5, 0.5), 0.75, 4, s1).sample(g)
        gg = TestFunctionSpec("band-limited-random", (0.5, 0.5), 0.75, 4, s2).sample(g)
        assert f.values.min() >= 0.0 and gg.values.min() >= 0.0
        norms = {
            0.5: sobolev_norm(f, 0.5),
            0.375: sobolev_norm(f, 0.375),
            0.0: sobolev_norm(gg, 0.0),
            0.125: sobolev_norm(gg, 0.125),
        }
        ratios_a, ratios_b = [], []
        for eps in eps_list:
            num = float(np.abs(apply_bilinear(f, gg, 1.0, 1.0, eps, 512).values).sum()) * h * h
            ratios_a.append(num / (norms[0.5] * norms[0.0]))
            ratios_b.append(num / (norms[0.375] * norms[0.125]))
        worst = max(worst, max(ratios_a) / min(ratios_a), max(ratios_b) / min(ratios_b))
    dt = time.perf_counter() - t0
    ok = report(
        "4 operator-norm stability",
        worst <= cap and dt < 300.0,
        f"worst max/min {worst:.3f} <= {cap} over 20 pairs x 2 splits, {dt:.0f}s",
    )
    assert ok


def test_criterion_5_counting_oracle_equivalence():
    t0 = time.perf_counter()
    rng = np.random.default_rng(55)
    checked = 0
    while checked < 200:
        n = int(rng.integers(5, 301))
        P = generate("random-uniform", n, int(rng.integers(10**6)))
        try:
            spec = TriangleSpec(*rng.uniform(0.15, 1.2, 3))
        except Exception:
            continue
        delta = float(rng.uniform(0.004, spec.min_side / 4.0 * 0.95))
        if count_congruent_fast(P, spec, delta) != count_congruent_brute(P, spec, delta):
            report("5 counting oracle", False, f"mismatch at n={n} t={spec.sides} delta={delta}")
            assert False
        checked += 1
    masses = 0
    while masses < 50:
        n = int(rng.integers(5, 220))
        xy = rng.uniform(-1.0, 2.0, (n, 2))
        w = rng.uniform(0.1, 1.0, n)
        m = DiscreteMeasure(xy, w / w.sum())
        try:
            spec = TriangleSpec(*rng.uniform(0.3, 1.5, 3))
        except Exception:
            continue
        eps = float(rng.uniform(0.01, spec.min_side / 2.0 * 0.9))
        q = AnnulusTriple(spec, eps)
        a, b = triple_annulus_mass(m, q), triple_annulus_mass_brute(m, q)
        if abs(a - b) > TOLERANCES["pruned_vs_brute_abs"] * max(1.0, abs(b)):
            report("5 counting oracle", False, f"mass mismatch {a} vs {b}")
            assert False
        masses += 1
    dt = time.perf_counter() - t0
    ok = report("5 counting oracle", dt < 120.0, f"200 count + 50 mass instances exact, {dt:.0f}s")
    assert ok


def test_criterion_6_sharpness_scaling():
    t0 = time.perf_counter()
    eps = (2.0**-3, 2.0**-4, 2.0**-5, 2.0**-6)
    slopes = {}
    for a, b in ((1.0, 0.75), (1.0, 1.0), (0.75, 0.75)):
        slopes[(a, b)] = triple_scaling_fit(MattilaSpec(a, b, 6, eps)).fit.slope
    lo, hi = TOLERANCES["sharpness_slope_lo"], TOLERANCES["sharpness_slope_hi"]
    ok1 = report(
        "6a slope(1,3/4) in [2.8,3.2]",
        lo <= slopes[(1.0, 0.75)] <= hi,
        f"slope {slopes[(1.0, 0.75)]:.4f} (asymptotic prediction 3.0)",
    )
    ok2 = report(
        "6b slope(1,1) >= 3.3",
        slopes[(1.0, 1.0)] >= TOLERANCES["sharpness_slope_dim2_min"],
        f"slope {slopes[(1.0, 1.0)]:.4f}",
    )
    ok3 = report(
        "6c slope(3/4,3/4) <= 2.85",
        slopes[(0.75, 0.75)] <= TOLERANCES["sharpness_slope_lowdim_max"],
        f"slope {slopes[(0.75, 0.75)]:.4f} (asymptotic prediction 2.625)",
    )
    inter = pair_annulus_exponent(MattilaSpec(1.0, 0.75, 6, eps), t=1.0).fit.slope
    ok4 = report(
        "6d pair-mass exponent",
        abs(inter - 1.25) <= TOLERANCES["pair_exponent_tol"],
        f"slope {inter:.4f} vs alpha/2+beta = 1.25",
    )
    dt = time.perf_counter() - t0
    ok5 = report("6e runtime", dt < 300.0, f"{dt:.0f}s")
    assert ok1 and ok2 and ok3 and ok4 and ok5


def test_criterion_7_counting_exponent():
    t0 = time.perf_counter()
    res = corollary_experiment(
        GeneratorSpec("grid", 0),
        [1024, 4096, 16384],
        0.01,
        TriangleSpec(0.5, 0.5, S2 / 2.0),
        s=TOLERANCES["adaptability_s"],
        cap=TOLERANCES["adaptability_cap"],
    )
    bound = TOLERANCES["corollary_slope_max"]
    ok1 = report("7a counting exponent", res.fit.slope <= bound, f"slope {res.fit.slope:.4f} <= {bound:.4f}")
    ok2 = report(
        "7b adaptability at s=1.76",
        all(v <= TOLERANCES["adaptability_cap"] for _, v in res.adaptability),
        f"energies {[round(v, 2) for _, v in res.adaptability]}",
    )
    dt = time.perf_counter() - t0
    ok3 = report("7c runtime", dt < 600.0, f"{dt:.0f}s")
    assert ok1 and ok2 and ok3


def test_criterion_8_distance_density_dichotomy():
    t0 = time.perf_counter()
    eps = (2.0**-3, 2.0**-4, 2.0**-5, 2.0**-6)
    flat = distance_blowup_fit(MattilaSpec(1.0, 1.0, 6, eps), t=1.0).fit.slope
    blow = distance_blowup_fit(MattilaSpec(1.0, 0.4, 6, eps), t=1.0).fit.slope
    ok1 = report(
        "8a dimension-2 family flat",
        abs(flat) <= TOLERANCES["distance_flat_abs"],
        f"slope {flat:.4f}",
    )
    ok2 = report(
        "8b dimension-1.4 family blows up",
        blow <= TOLERANCES["distance_blowup_max"],
        f"slope {blow:.4f}",
    )
    dt = time.perf_counter() - t0
    ok3 = report("8c runtime", dt < 120.0, f"{dt:.0f}s")
    assert ok1 and ok2 and ok3


def test_criterion_9_potential_sup_stability():
    t0 = time.perf_counter()
    c = cantor_measure(CantorSpec.from_dimension(0.945, 7))
    m = product_measure(c, c)
    h = 2.0**-7
    sups = []
    for k in (4, 5, 6):
        delta = 2.0**-k
        g0 = -2.0 * delta - 2.0 * h
        npts = int(math.ceil((1.0 + 4.0 * delta + 4.0 * h) / h)) + 1
        grid = make_grid((g0, g0), h, npts, npts)
        pot = riesz_potential(m, 0.25, delta, grid)
        sups.append(float(pot.values.max()))
    factor = max(sups) / min(sups)
    dt = time.perf_counter() - t0
    ok = report(
        "9 potential sup stability",
        factor <= TOLERANCES["riesz_sup_factor"] and dt < 120.0,
        f"sups {[round(s, 3) for s in sups]}, factor {factor:.3f}, {dt:.0f}s",
    )
    assert ok


def test_criterion_10_determinism(tmp_path):
    rep = selftest()
    ok1 = report(
        "10a selftest",
        rep.results["failed"] == 0,
        f"{rep.results['passed']} trivial checks pass",
    )
    bodies = []
    for k in (1, 2):
        out = tmp_path / f"s{k}.csv"
        code = cli_main(
            ["sharpness", "--alpha", "1", "--beta", "0.75", "--level", "4",
             "--eps", "2^-2..2^-4", "--seed", "9", "--out", str(out)]
        )
        assert code == 0
        bodies.append(out.read_bytes())
    ok2 = report("10b byte-identical reruns", bodies[0] == bodies[1], "sharpness CSV body")
    bodies = []
    for k in (1, 2):
        out = tmp_path / f"c{k}.csv"
        code = cli_main(
            ["count", "--kind", "random-uniform", "--n", "300", "--seed", "4",
             "--t", "0.4,0.4,0.5", "--delta", "0.02", "--out", str(out)]
        )
        assert code == 0
        bodies.append([ln for ln in out.read_text().splitlines() if not ln.startswith("#")])
    ok3 = report("10c count rerun identical", bodies[0] == bodies[1], "count CSV body")
    assert ok1 and ok2 and ok3
