"""Cross-identity checks on a single model, reported as a pass/fail table."""

from dataclasses import dataclass

import numpy as np

from . import extrema, fluctuation as fl, linalg as la, taboo
from .errors import MapError, SingularPivot
from .model import LatticeModel, drift_and_pi
from .solvers import SolveOptions, hitting_matrix, solve_lattice


@dataclass
class Check:
    name: str
    residual: float = float("nan")
    threshold: float = float("nan")
    passed: bool = True
    skipped: str = ""

    def as_dict(self):
        return {"name": self.name, "residual": self.residual, "threshold": self.threshold,
                "status": "skip" if self.skipped else ("pass" if self.passed else "FAIL"),
                "reason": self.skipped}


class Table:
    def __init__(self):
        self.rows = []

    def check(self, name, residual, threshold):
        residual = float(residual)
        self.rows.append(Check(name, residual, float(threshold),
                               bool(np.isfinite(residual) and residual < threshold)))

    def skip(self, name, reason):
        self.rows.append(Check(name, skipped=reason))

    @property
    def ok(self):
        return all(r.passed for r in self.rows)


PROBE_MARGIN = 0.75


def _probe_points(radius):
    """Default probes 0.1, 0.3 and radius/2, keeping those within 3/4 of the radius."""
    cand = [z for z in (0.1, 0.3, 0.5 * radius) if z <= PROBE_MARGIN * radius]
    if len(cand) < 2:
        cand = [0.25 * radius, 0.5 * radius]
    return cand


def _scale_transform_rows(t, model, fund):
    radius = fl.series_radius(model, fund)
    for z in _probe_points(radius):
        K = fl.auto_horizon(z / radius, target=1e-14)
        if radius < 1:
            K = min(K, int(600 / np.log(1 / radius)))
        table = fl.scale_matrices(model, K)
        res, tail = fl.check_scale_transform(model, table, z, fund)
        t.check(f"scale transform z={z:.4g}", res, tail + 1e-8)


def _rel(a, b):
    return la.inf_norm(a - b) / max(1.0, la.inf_norm(b))


EXIT_GRID = ((1, 1), (1, 2), (2, 3), (3, 1))


def verify_lattice(model, opts=None, K=12):
    opts = opts or SolveOptions()
    t = Table()
    regime = drift_and_pi(model)
    nonsingular_down = la.is_nonsingular(model.A(-1))
    scale = fl.scale_matrices(model, 2 * K + 2) if nonsingular_down else None

    if regime.null_recurrent:
        reason = "null-recurrent"
        for name in ("G equation", "R equation", "GH = HR", "Theta R^k = G^k Xi",
                     "exit three-way", "creeping two forms", "strip occupation two routes",
                     "exit mass"):
            t.skip(name, reason)
        if scale is None:
            t.skip("scale transform", "singular A_{-1}")
            return t
        _scale_transform_rows(t, model, None)
        # The W-route strip occupation is the only one available here.
        occ = fl.strip_occupation(model, None, None, 0, 2, 2, route="scale", scale=scale)
        t.check("strip occupation >= 0 (scale route)", max(0.0, -occ.min()), 1e-12)
        return t

    fund = solve_lattice(model, opts)
    t.check("G equation", fund.residuals["G"], 1e-9)
    t.check("R equation", fund.residuals["R"], 1e-9)
    t.check("jump-chain R equation", fund.residuals["r_tilde"], 1e-9)
    t.check("GH = HR", fund.residuals["GH-HR"], 1e-9)
    tables = taboo.build_tables(model, fund, 2 * K)

    if tables.theta is not None:
        worst = 0.0
        for k in range(1, 6):
            lhs = tables.theta[k] @ la.matpow(fund.R, k)
            rhs = la.matpow(fund.G, k) @ tables.xi[k]
            worst = max(worst, la.inf_norm(lhs - rhs))
        t.check("Theta R^k = G^k Xi (k<=5)", worst, 1e-9)

    g_ok = la.is_nonsingular(fund.G)
    if nonsingular_down and g_ok:
        worst = 0.0
        for a, b in EXIT_GRID:
            d1 = fl.two_sided_exit(model, tables, fund.R, a, b).D
            d2 = fl.exit_from_scale(scale, a, b)
            d3 = fl.exit_from_theta(fund.G, tables.theta, a, b)
            worst = max(worst, la.inf_norm(d1 - d2), la.inf_norm(d1 - d3))
        t.check("exit three-way", worst, 1e-8)
    else:
        t.skip("exit three-way", "singular A_{-1} or G")

    for a, b in EXIT_GRID:
        D = fl.two_sided_exit(model, tables, fund.R, a, b).D
        bad = max(0.0, -D.min(), D.sum(axis=1).max() - 1.0)
        t.check(f"exit law sub-stochastic a={a} b={b}", bad, 1e-10)

    if scale is not None:
        _scale_transform_rows(t, model, fund)
        if la.is_nonsingular(fund.R):
            Rinv = la.inv(fund.R)
            worst = max(_rel(scale(k), tables.xi[k] @ la.matpow(Rinv, k)) for k in range(1, 11))
            t.check("W(k) = Xi(k) R^-k (relative)", worst, 1e-8)
            worst = max(la.inf_norm(fl.creeping(model, tables, m)
                                    - fl.creeping_from_scale(scale, fund.R, m))
                        for m in range(1, 6))
            t.check("creeping two forms", worst, 1e-8)
            worst = max(la.inf_norm(fl.hit_before_upcross(model, tables, fund.R, m, l)
                                    - fl.hit_before_upcross_from_scale(scale, fund.R, m, l))
                        for m in range(0, 4) for l in range(1, 4))
            t.check("hit before up-crossing two forms", worst, 1e-8)
    else:
        t.skip("scale transform", "singular A_{-1}")

    # path inclusion: creeping <= hit before up-crossing <= hit ever
    worst = 0.0
    for m in range(1, 5):
        c = fl.creeping(model, tables, m)
        h = fl.hit_before_upcross(model, tables, fund.R, m, 3)
        worst = max(worst, (c - h).max())
        if fund.H is not None:
            worst = max(worst, (h - hitting_matrix(model, fund, m)).max())
    t.check("creeping <= hit-before <= hitting", max(worst, 0.0), 1e-10)

    l, m = 2, 3
    if fund.H is not None:
        occ = fl.strip_occupations(model, fund, tables, l, m, route="transient")
        if scale is not None:
            occ_w = fl.strip_occupations(model, fund, tables, l, m, route="scale", scale=scale)
            worst = max(la.inf_norm(occ[k] - occ_w[k]) for k in occ)
            t.check("strip occupation two routes", worst, 1e-8)
        D = fl.two_sided_exit(model, tables, fund.R, l, m).D
        up = sum(fl.exit_overshoot(model, occ, l, m, u) for u in range(model.max_jump))
        killed = sum(occ.values()) @ model.kill_rates
        total = up.sum(axis=1) + D.sum(axis=1) + killed
        t.check("exit mass conservation", np.abs(total - 1).max(), 1e-8)

    if model.is_defective and fund.H is not None:
        if scale is not None:
            worst = 0.0
            for mm in range(0, 4):
                for ll in range(0, 4):
                    a1 = extrema.min_at_killing(model, fund, mm, ll, route="transient")
                    a2 = extrema.min_at_killing(model, fund, mm, ll, route="scale", scale=scale)
                    worst = max(worst, la.inf_norm(a1 - a2))
            t.check("minimum law two routes", worst, 1e-9)
    return t


def verify_mmbm(model, opts=None):
    from . import mmbm
    from .solvers import solve_mmbm
    opts = opts or SolveOptions()
    t = Table()
    fund = solve_mmbm(model, opts)
    t.check("G equation", fund.residuals["G"], 1e-9)
    t.check("R left equation", fund.residuals["R_left"], 1e-9)
    t.check("Lambda equation", fund.residuals["Lambda"], 1e-9)
    if fund.H is None:
        t.skip("GH = HR", "null-recurrent")
        return t
    t.check("GH = HR", fund.residuals["GH-HR"], 1e-9)
    t.check("H alpha spread", fund.residuals["H_alpha_spread"], 1e-8)
    t.check("exp(Lambda) semigroup", mmbm.semigroup_residual(fund.Lambda, 0.7, 1.3), 1e-10)
    t.check("exp(R) semigroup", mmbm.semigroup_residual(fund.R, 0.7, 1.3), 1e-10)
    if not model.brownian:
        t.skip("scale function checks", "fluid phase present")
        return t
    fluct = mmbm.MmbmFluct(model, fund.G, fund.Lambda, fund.R, fund.H, fund)
    bad = 0.0
    for a in (0.5, 1.0, 2.0):
        for b in (0.5, 1.0, 2.0):
            D = mmbm.mmbm_exit(fluct, a, b)
            bad = max(bad, -D.min(), D.max() - 1, D.sum(axis=1).max() - 1)
    t.check("exit law in [0,1]", max(bad, 0.0), 1e-10)
    for x in (0.01, 1.0):
        t.check(f"creeping identity x={x}", mmbm.mmbm_creeping_identity(fluct, x), 1e-8)
    t.check("scale transform quadrature", mmbm.check_scale_transform(fluct), 1e-6)
    return t


def verify(model, opts=None, K=12):
    if isinstance(model, LatticeModel):
        return verify_lattice(model, opts, K)
    return verify_mmbm(model, opts)
