"""Acceptance criteria 1-7, each printed as one PASS/FAIL line.

Lines go straight to the terminal (capture disabled) so they show up in a
plain ``pytest -v`` run.
"""

import time

import numpy as np
import pytest

from mapfluct import benchmarks, extrema, fluctuation as fl, mmbm, taboo, zoo
from mapfluct.solvers import solve_lattice, solve_mmbm
from mapfluct.verify import verify_lattice

import oracles


@pytest.fixture
def report(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\n[acceptance {number}] {'PASS' if ok else 'FAIL'}  {detail}")
    return emit


def test_criterion_1_birth_death_closed_forms(report):
    start = time.perf_counter()
    worst = 0.0
    for up, down in [(1.0, 2.0), (2.0, 1.0), (1.0, 3.0), (3.0, 1.0)]:
        model = zoo.bd(up, down)
        fund = solve_lattice(model)
        g = min(1.0, down / up)
        worst = max(worst, abs(fund.G[0, 0] - g), abs(fund.R[0, 0] - g),
                    abs(fund.H[0, 0] - 1.0 / abs(up - down)))
        W = fl.scale_matrices(model, 30)
        for k in range(1, 31):
            exact = oracles.bd_scale(up, down, k)
            # relative: W(k) grows geometrically when the drift is upward
            worst = max(worst, abs(W(k)[0, 0] - exact) / max(1.0, abs(exact)))
        tables = taboo.build_tables(model, fund, 20)
        for a in range(1, 11):
            for b in range(1, 11):
                D = fl.two_sided_exit(model, tables, fund.R, a, b).D[0, 0]
                worst = max(worst, abs(D - oracles.gamblers_ruin(up, down, a, b)))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-10 and elapsed < 1.0
    report(1, ok, f"birth-death G, R, H, W(k<=30), D(a,b<=10): max error {worst:.2e} "
                  f"(< 1e-10), {elapsed:.2f} s (< 1 s)")
    assert ok


def test_criterion_2_identity_suite(report):
    start = time.perf_counter()
    models = zoo.random_models()
    failures = []
    probes = []
    for i, model in enumerate(models):
        table = verify_lattice(model)
        probes.append(sum(r.name.startswith("scale transform") and not r.skipped
                          for r in table.rows))
        failures += [(i, r.name, r.residual) for r in table.rows if not r.passed]
    elapsed = time.perf_counter() - start
    enough_probes = all(p >= 2 for p, m in zip(probes, models)
                        if np.linalg.matrix_rank(m.A(-1)) == m.n_phases)
    shape_ok = (len(models) == 50 and sum(m.is_defective for m in models) == 25
                and max(m.n_phases for m in models) <= 4 and max(m.max_jump for m in models) <= 3)
    ok = not failures and enough_probes and shape_ok and elapsed < 30
    report(2, ok, f"identity suite on {len(models)} models: {len(failures)} failed checks, "
                  f"{elapsed:.1f} s (< 30 s)")
    assert ok, failures[:5]


def test_criterion_3_monte_carlo_agreement(report):
    start = time.perf_counter()
    comps = []
    for name, model in zoo.mc_models().items():
        comps += benchmarks.lattice_comparisons(name, model)
    elapsed = time.perf_counter() - start
    worst = max(c.worst_z for c in comps)
    bad = [c.line() for c in comps if not c.passed]
    ok = not bad and elapsed < 120
    report(3, ok, f"{len(comps)} analytic vs 10^6-path comparisons: max |z| {worst:.2f} "
                  f"(<= 4), {elapsed:.1f} s (< 120 s)")
    assert ok, bad


def test_criterion_4_extrema_mass(report):
    lines, ok = [], True
    for name in ("three_phase_killed", "rank_one_down"):
        model = zoo.mc_models()[name]
        assert np.all(model.kill_rates > 0)
        fund = solve_lattice(model)
        for law in (extrema.max_law(model, fund), extrema.min_law(model, fund)):
            total = law.captured_mass + law.tail_bound
            good = bool(np.all(total >= 1 - 1e-6) and np.all(total <= 1 + 1e-9)
                        and np.all(law.captured_mass <= 1 + 1e-9))
            ok &= good
            lines.append(f"{name}/{law.direction} mass {law.captured_mass.min():.10f}"
                         f" + tail {law.tail_bound:.1e}")
    report(4, ok, "; ".join(lines))
    assert ok


def test_criterion_5_mmbm(report):
    start = time.perf_counter()
    # scalar closed forms
    drift, var, q = -1.0, 2.0, 1.0
    f = mmbm.MmbmFluct.from_model(zoo.mmbm_scalar(drift, var, q))
    g_root = min(np.roots([0.5 * var, drift, -q]).real)  # the non-positive root
    closed = max(abs(f.G[0, 0] - g_root),
                 abs(f.H[0, 0] - 1 / np.sqrt(drift ** 2 + 2 * var * q)))
    for x in (0.1, 1.0, 3.0):
        closed = max(closed, abs(mmbm.mmbm_scale(f, x)[0, 0]
                                 - oracles.brownian_scale(drift, var, q, x)))
    f0 = mmbm.MmbmFluct.from_model(zoo.mmbm_scalar(drift, var, 0.0))
    for a, b in [(1.0, 2.0), (0.5, 0.5), (2.0, 1.0)]:
        closed = max(closed, abs(mmbm.mmbm_exit(f0, a, b)[0, 0]
                                 - oracles.brownian_exit(drift, var, a, b)))
    # creeping identity on a two-phase Brownian model
    two = mmbm.MmbmFluct.from_model(zoo.mmbm_two_phase())
    creep = max(mmbm.mmbm_creeping_identity(two, x) for x in (0.01, 1.0, 10.0))
    quad = max(mmbm.check_scale_transform(mmbm.MmbmFluct.from_model(m))
               for m in (zoo.mmbm_scalar(), zoo.mmbm_two_phase()))
    euler = [benchmarks.mmbm_exit_comparison(zoo.mmbm_scalar(drift, var, 0.0), 1.0, 2.0),
             benchmarks.mmbm_exit_comparison(zoo.mmbm_two_phase(), 1.0, 1.0)]
    elapsed = time.perf_counter() - start
    ok = (closed < 1e-10 and creep < 1e-8 and quad < 1e-6
          and all(e.passed for e in euler) and elapsed < 120)
    gaps = ", ".join(f"{e.worst_gap:.1e}" for e in euler)
    report(5, ok, f"closed forms {closed:.1e} (< 1e-10), creeping {creep:.1e} (< 1e-8), "
                  f"quadrature {quad:.1e} (< 1e-6), Euler gaps {gaps} "
                  f"(<= max(4 se, 5e-3)), {elapsed:.1f} s")
    assert ok


def test_criterion_6_transform_domains(report):
    details, ok = [], True
    for q in (0.5, 1.0, 2.0):
        model = zoo.bd(1.0, 2.0, q)
        fund = solve_lattice(model)
        z = fl.locate_bilateral_z(model)
        good = z is not None
        if good:
            res, tail = fl.check_H_transform(model, fund, z)
            good = res <= tail + 1e-8
            details.append(f"q={q}: z={z:.3f} res {res:.1e}")
        ok &= good
    plain = zoo.bd(1.0, 2.0)
    no_z = fl.bilateral_domain(plain, 1e-3, 0.999) == []
    res, tail = fl.check_H_transform(plain, solve_lattice(plain), 0.5, form="unilateral")
    uni = res <= tail + 1e-8
    H0 = [solve_lattice(zoo.bd(1.0, 2.0, q)).H[0, 0] for q in (0.0, 0.5, 1.0, 2.0)]
    mono = all(b <= a for a, b in zip(H0, H0[1:]))
    ok = ok and no_z and uni and mono
    report(6, ok, "; ".join(details) + f"; no z in (0,1) without killing: {no_z}; "
                  f"unilateral z=0.5 res {res:.1e}; H(0;q) nonincreasing: {mono}")
    assert ok


def test_criterion_7_decay(report):
    model = zoo.bd(1.0, 2.0)
    d = fl.decay_diagnostic(model, solve_lattice(model), 40)
    gap = abs(d["xi_star"] * d["phi"] - 1)
    ok = 1.999 <= d["phi"] <= 2.001 and gap < 0.01
    report(7, ok, f"phi = {d['phi']:.6f} (in [1.999, 2.001]), |xi_40^(1/40) phi - 1| = "
                  f"{gap:.2e} (< 0.01)")
    assert ok
