"""Analytic-versus-simulation comparisons for the benchmark models."""

from dataclasses import dataclass

import numpy as np

from . import extrema, fluctuation as fl, linalg as la, mmbm, taboo
from .sim import SimConfig, sim_lattice, sim_mmbm
from .solvers import hitting_matrix, solve_lattice

Z_LIMIT = 4.0
EXACT_TOL = 1e-9
MAX_CELLS = ((0, 0), (1, 1))
MIN_CELLS = ((1, 0), (0, 1))


@dataclass
class Comparison:
    model: str
    quantity: str
    analytic: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    bias_bound: float = 0.0

    @property
    def z_scores(self):
        diff = np.abs(self.analytic - self.mean)
        with np.errstate(divide="ignore", invalid="ignore"):
            z = np.where(self.stderr > 0, diff / self.stderr,
                         np.where(diff < EXACT_TOL, 0.0, np.inf))
        return z

    @property
    def worst_z(self):
        return float(np.max(self.z_scores))

    @property
    def passed(self):
        return self.worst_z <= Z_LIMIT

    def line(self):
        return (f"{self.model:>20s} {self.quantity:<28s} max|z| = {self.worst_z:6.2f}"
                f"  escape bias <= {self.bias_bound:.1e}")


def cap_bias(model, fund, cap):
    """Bound on paths that pass level ``cap`` and would still come down to -1.

    Such a path first climbs ``cap`` levels and then descends ``cap + 1``.
    """
    return min(climb_bound(model, fund, cap), la.inf_norm(la.matpow(fund.G, cap + 1)))


def climb_bound(model, fund, distance):
    """Upper bound on the chance of ever rising ``distance`` levels from 0."""
    return float(sum(la.inf_norm(hitting_matrix(model, fund, distance + u))
                     for u in range(model.max_jump)))


def floor_bias(model, fund, depth, m):
    """Bound on paths that reach ``-depth`` and later still rise to ``m``."""
    return la.inf_norm(la.matpow(fund.G, depth)) * climb_bound(model, fund, depth + m)


def lattice_comparisons(name, model, n_paths=10**6, seed=2024, floor_target=1e-8):
    """G, D_{1,2}, strip occupation, creeping(2) and four extrema cells."""
    fund = solve_lattice(model)
    tables = taboo.build_tables(model, fund, 8)
    out = []

    cap = 5
    while cap_bias(model, fund, cap) > floor_target and cap < 400:
        cap += 1
    cfg = SimConfig(n_paths=n_paths, seed=seed, level_cap=cap)
    est = sim_lattice(model, "first_passage", {"k": 1}, cfg)
    out.append(Comparison(name, "G (first passage to -1)", fund.G, est.mean, est.stderr,
                          cap_bias(model, fund, cap)))

    est = sim_lattice(model, "exit", {"a": 1, "b": 2}, SimConfig(n_paths=n_paths, seed=seed + 1))
    out.append(Comparison(name, "D_{1,2}", fl.two_sided_exit(model, tables, fund.R, 1, 2).D,
                          est.mean, est.stderr))

    occ = fl.strip_occupation(model, fund, tables, 0, 2, 2)
    est = sim_lattice(model, "occupation", {"k": 0, "l": 2, "m": 2},
                      SimConfig(n_paths=n_paths, seed=seed + 2))
    out.append(Comparison(name, "occupation k=0 (-2,2)", occ, est.mean, est.stderr))

    depth = 2
    while floor_bias(model, fund, depth, 2) > floor_target and depth < 400:
        depth += 1
    est = sim_lattice(model, "creeping", {"m": 2, "floor": -depth},
                      SimConfig(n_paths=n_paths, seed=seed + 3))
    out.append(Comparison(name, "creeping m=2", fl.creeping(model, tables, 2), est.mean,
                          est.stderr, floor_bias(model, fund, depth, 2)))

    if model.is_defective:
        est = sim_lattice(model, "extrema_max", {"cells": MAX_CELLS},
                          SimConfig(n_paths=n_paths, seed=seed + 4))
        n = model.n_phases
        for c, (m, l) in enumerate(MAX_CELLS):
            exact = extrema.max_at_killing(model, fund, tables, m, l)
            out.append(Comparison(name, f"max cell m={m} l={l}", exact,
                                  est.mean[:, c * n:(c + 1) * n], est.stderr[:, c * n:(c + 1) * n]))
        est = sim_lattice(model, "extrema_min", {"cells": MIN_CELLS},
                          SimConfig(n_paths=n_paths, seed=seed + 5))
        for c, (m, l) in enumerate(MIN_CELLS):
            exact = extrema.min_at_killing(model, fund, m, l)
            out.append(Comparison(name, f"min cell m={m} l={l}", exact,
                                  est.mean[:, c * n:(c + 1) * n], est.stderr[:, c * n:(c + 1) * n]))
    return out


@dataclass
class EulerComparison:
    quantity: str
    analytic: np.ndarray
    mean: np.ndarray
    stderr: np.ndarray
    floor: float = 5e-3

    @property
    def tolerance(self):
        return np.maximum(Z_LIMIT * self.stderr, self.floor)

    @property
    def worst_gap(self):
        return float(np.max(np.abs(self.analytic - self.mean)))

    @property
    def passed(self):
        return bool(np.all(np.abs(self.analytic - self.mean) <= self.tolerance))


def mmbm_exit_comparison(model, a, b, n_paths=10**5, dt=1e-3, seed=7):
    fluct = mmbm.MmbmFluct.from_model(model)
    exact = mmbm.mmbm_exit(fluct, a, b)
    est = sim_mmbm(model, "exit", {"a": a, "b": b},
                   SimConfig(n_paths=n_paths, seed=seed, euler_dt=dt))
    return EulerComparison(f"exit a={a} b={b} dt={dt}", exact, est.mean, est.stderr)
