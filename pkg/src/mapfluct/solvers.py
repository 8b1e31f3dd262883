"""Fundamental matrices G, R, H (and the MMBM upward generator Lambda).

Lattice G is the minimal non-negative solution of
``A_{-1} + A_0 G + sum_k A_k G^{k+1} = 0``, computed by the monotone
jump-chain iteration from zero.  R is obtained from G of the time-reversed
model and then certified against its own left equation.

For MMBM the quadratic ``1/2 S G^2 + D G + Q = 0`` is mapped onto a
quasi-birth-death equation for the resolvent ``P = c (cI - G)^{-1}``, which
is solved by the same lattice iteration; ``G = c (I - P^{-1})``.
"""

from dataclasses import dataclass, field

import numpy as np

from . import linalg as la
from .errors import (MaxIterExceeded, NoValidAlpha, NullRecurrent, ResidualTooLarge,
                     SingularPivot, SingularSolve, SubordinatorPhase)
from .model import LatticeModel, MmbmModel, drift_and_pi, reverse, F_of_alpha
from . import taboo

EPS = np.finfo(float).eps


@dataclass(frozen=True)
class SolveOptions:
    tol: float = 1e-12
    max_iter: int = 1_000_000
    method: str = "fixed_point"

    def __post_init__(self):
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be positive")
        if self.method != "fixed_point":
            raise ValueError("only the fixed_point method is available")


DEFAULT = SolveOptions()


@dataclass(frozen=True, eq=False)
class Fundamentals:
    G: np.ndarray
    R: np.ndarray
    H: object  # ndarray, or None when the model is null recurrent
    regime: object
    Lambda: object = None
    residuals: dict = field(default_factory=dict)
    overshoot: object = None
    r_tilde: object = None

    @property
    def H_finite(self):
        return self.H is not None


# ---------------------------------------------------------------- lattice

def _blocks(model):
    return [model.A(m) for m in range(-1, model.max_jump + 1)]


def g_residual(model, G):
    """``A_{-1} + A_0 G + sum_k A_k G^{k+1}`` via Horner."""
    blocks = _blocks(model)
    acc = blocks[-1]
    for A in reversed(blocks[:-1]):
        acc = A + acc @ G
    return acc


def r_residual(model, R):
    """``A_{-1} + R A_0 + sum_k R^{k+1} A_k``."""
    blocks = _blocks(model)
    acc = blocks[-1]
    for A in reversed(blocks[:-1]):
        acc = A + R @ acc
    return acc


def _scale(model):
    return max(la.inf_norm(A) for A in model.blocks)


def solve_G_lattice(model, opts=DEFAULT, G0=None):
    """Minimal non-negative solution by ``G <- G + diag(-A_0)^{-1} * residual(G)``.

    The update is the jump-chain fixed point written in residual form; it
    is monotone from ``G0 = 0`` (or any iterate of that sequence).
    """
    n = model.n_phases
    inv_d = 1.0 / model.delta_A
    G = np.zeros((n, n)) if G0 is None else np.array(G0, dtype=float)
    tol = max(opts.tol, 16 * EPS * _scale(model))
    res = np.inf
    for it in range(opts.max_iter):
        S = g_residual(model, G)
        res = la.inf_norm(S)
        if res < tol:
            return G
        G = G + inv_d[:, None] * S
    raise MaxIterExceeded(f"G iteration did not reach {tol:g} in {opts.max_iter} steps",
                          best=G, residual=res)


def dual(X, pi):
    """``diag(pi)^{-1} X^T diag(pi)``: maps G of the reversed model to R."""
    return (X.T * pi[None, :]) / pi[:, None]


def solve_R_lattice(model, G_rev=None, opts=DEFAULT, pi=None):
    """R from G of the reversed model, certified by the left-equation residual."""
    if pi is None:
        pi = drift_and_pi(model).pi
    # the conjugation can amplify the residual by max(pi)/min(pi)
    amp = model.n_phases * float(pi.max() / pi.min())
    if G_rev is None:
        rev = reverse(model)
        G_rev = solve_G_lattice(rev, SolveOptions(max(opts.tol / amp, 1e-300), opts.max_iter))
    R = np.maximum(dual(G_rev, pi), 0.0)
    res = la.inf_norm(r_residual(model, R))
    limit = max(10 * opts.tol, 160 * EPS * _scale(model) * amp)
    if res >= limit:
        raise ResidualTooLarge(f"R residual {res:.3g} exceeds {limit:.3g}", residual=res, R=R)
    return R


def solve_H_lattice(model, G, overshoot, regime=None):
    """``H = (I - U)^{-1} diag(-A_0)^{-1}`` with ``U = sum_i A_i^up G^i``."""
    if regime is None:
        regime = drift_and_pi(model)
    if regime.null_recurrent:
        raise NullRecurrent("mu = 0 and q = 0: H is infinite")
    n = model.n_phases
    U = np.zeros((n, n))
    Gp = np.eye(n)
    for A_up in overshoot:
        U += A_up @ Gp
        Gp = Gp @ G
    if la.spectral_radius(U) >= 1.0:
        raise NullRecurrent("return matrix to level 0 is not strictly substochastic")
    H = la.solve(np.eye(n) - U, np.diag(1.0 / model.delta_A), "I - U", err=SingularSolve)
    return np.maximum(H, 0.0)


def solve_lattice(model, opts=DEFAULT):
    """G, R, overshoot matrices and H (None when null recurrent)."""
    regime = drift_and_pi(model)
    G = solve_G_lattice(model, opts)
    R = solve_R_lattice(model, None, opts, regime.pi)
    Rt = taboo.r_tilde(model, R)
    over = taboo.overshoot_matrices(model, Rt)
    H = None
    if regime.transient:
        H = solve_H_lattice(model, G, over, regime)
    residuals = {
        "G": la.inf_norm(g_residual(model, G)),
        "R": la.inf_norm(r_residual(model, R)),
        "r_tilde": taboo.r_tilde_residual(model, Rt),
    }
    if H is not None:
        residuals["GH-HR"] = la.inf_norm(G @ H - H @ R)
    return Fundamentals(G, R, H, regime, None, residuals, over, Rt)


def occupation_at_level(model, fund, k):
    """Expected total time at level k, started at level 0."""
    if fund.H is None:
        raise NullRecurrent("H is infinite for a null-recurrent model")
    if k <= 0:
        return la.matpow(fund.G, -k) @ fund.H
    return taboo.occupation_levels(fund.overshoot, fund.G, fund.H, k)[k]


def hitting_matrix(model, fund, k):
    """``P[J at first hit of level k]``."""
    if k <= 0:
        return la.matpow(fund.G, -k)
    if fund.H is None:
        raise NullRecurrent("upward hitting probabilities need a finite H")
    return la.rsolve(occupation_at_level(model, fund, k), fund.H, "H")


# ---------------------------------------------------------------- MMBM

def mmbm_residual(model, G):
    return 0.5 * model.variance[:, None] * (G @ G) + model.drift[:, None] * G + model.Q


def mmbm_left_residual(model, R):
    return 0.5 * (R @ R) * model.variance[None, :] + R * model.drift[None, :] + model.Q


def _resolvent_qbd(model, c):
    """QBD blocks whose minimal solution is ``c (cI - G)^{-1}``."""
    n = model.n_phases
    s2, a, Q = model.variance, model.drift, model.Q
    Am1, A0, A1 = np.zeros((n, n)), np.zeros((n, n)), np.zeros((n, n))
    for i in range(n):
        if s2[i] > 0:
            Am1[i, i] = 0.5 * c * c * s2[i]
            A0[i, i] = -c * c * s2[i] - c * a[i]
            A1[i] = Q[i]
            A1[i, i] += 0.5 * c * c * s2[i] + c * a[i]
        else:
            Am1[i, i] = -c * a[i]
            A0[i] = Q[i]
            A0[i, i] += c * a[i]
    return LatticeModel((Am1, A0, A1))


def _min_shift(model):
    """Smallest c for which the resolvent QBD has valid rate blocks."""
    c = 0.0
    s2, a, Q = model.variance, model.drift, model.Q
    for i in range(model.n_phases):
        if s2[i] > 0:
            root = (-a[i] + np.sqrt(a[i] ** 2 - 2 * s2[i] * Q[i, i])) / s2[i]
            c = max(c, root, -a[i] / s2[i])
    return c


def _generator_class_ok(G, regime, tol):
    ev = np.linalg.eigvals(G)
    scale = max(1.0, la.inf_norm(G))
    if np.any(ev.real > tol * scale):
        return False
    near0 = np.sum(np.abs(ev) <= 1e-7 * scale)
    return near0 == 1 if regime.c1 else near0 == 0


def solve_G_mmbm(model, opts=DEFAULT, regime=None):
    """Downward first-passage generator G of an MMBM."""
    if np.any((model.variance == 0) & (model.drift >= 0)):
        raise SubordinatorPhase("zero-variance phases need negative drift")
    if regime is None:
        regime = drift_and_pi(model)
    scale = max(1.0, float(np.abs(model.Q).max()), float(np.abs(model.drift).max()),
                float(model.variance.max()))
    c = 2.0 * max(_min_shift(model), scale)
    n = model.n_phases
    last = None
    for _ in range(12):
        qbd = _resolvent_qbd(model, c)
        tol_q = opts.tol
        P = None
        for _ in range(6):
            P = solve_G_lattice(qbd, SolveOptions(tol_q, opts.max_iter), G0=P)
            try:
                G = c * (np.eye(n) - la.inv(P, "resolvent"))
            except SingularPivot:
                break
            res = la.inf_norm(mmbm_residual(model, G))
            if res < max(opts.tol, 64 * EPS * scale * max(1.0, la.inf_norm(G)) ** 2):
                break
            tol_q /= 10.0
        else:
            pass
        if P is not None and _generator_class_ok(G, regime, 1e-9):
            off = G - np.diag(np.diag(G))
            G = np.diag(np.diag(G)) + np.maximum(off, 0.0)
            return G
        last = c
        c *= 4.0
    raise MaxIterExceeded("no valid resolvent shift found for the MMBM G solve", shift=last)


def solve_Lambda_mmbm(model, opts=DEFAULT):
    """Upward passage generator: G of the level-negated model."""
    if np.any(model.variance == 0):
        raise SubordinatorPhase("Lambda requires strictly positive variances")
    neg = model.negated()
    return solve_G_mmbm(neg, opts, drift_and_pi(neg))


def _alpha_grid():
    pos = np.logspace(-3, 3, 32)
    return np.concatenate([pos, -pos])


def solve_H_mmbm(model, G, Lam, regime=None, n_checks=2):
    """Occupation matrix H from ``[(aI-G)^{-1} - (aI+Lambda)^{-1}] H = -F(a)^{-1}``.

    Solved at the grid points with the smallest estimated forward error; the
    spread between the first two solutions is returned as a consistency
    residual.
    """
    if regime is None:
        regime = drift_and_pi(model)
    if regime.null_recurrent:
        raise NullRecurrent("mu = 0 and q = 0: H is infinite")
    n = model.n_phases
    I = np.eye(n)
    avoid = np.concatenate([np.linalg.eigvals(G), -np.linalg.eigvals(Lam)])
    delta = max(la.inf_norm(mmbm_residual(model, G)), la.inf_norm(mmbm_residual(model.negated(), Lam)),
                EPS * max(1.0, la.inf_norm(G), la.inf_norm(Lam)))
    cands = []
    for a in _alpha_grid():
        if np.min(np.abs(avoid - a)) < 1e-6:
            continue
        try:
            Fa = F_of_alpha(model, a)
            left, right = la.inv(a * I - G), la.inv(a * I + Lam)
            lhs = left - right
            Finv = la.inv(Fa)
            H = -la.solve(lhs, Finv)
            # first-order forward error: perturbations of size delta in G and
            # Lambda enter through the squared resolvents, rounding through F
            lhs_inv = la.inf_norm(la.inv(lhs))
            err = lhs_inv * (delta * (la.inf_norm(left) ** 2 + la.inf_norm(right) ** 2)
                             * la.inf_norm(H) + EPS * np.linalg.cond(Fa) * la.inf_norm(Finv))
            if not np.isfinite(err):
                continue
        except SingularPivot:
            continue
        cands.append((err, a, H))
    if len(cands) < n_checks:
        raise NoValidAlpha("no usable alpha on the scan grid")
    cands.sort(key=lambda t: t[0])
    H = cands[0][2]
    spread = max(la.inf_norm(c[2] - H) for c in cands[1:n_checks])
    return H, spread, [c[1] for c in cands[:n_checks]]


def solve_mmbm(model, opts=DEFAULT):
    regime = drift_and_pi(model)
    G = solve_G_mmbm(model, opts, regime)
    rev = reverse(model)
    G_rev = solve_G_mmbm(rev, opts, drift_and_pi(rev))
    R = dual(G_rev, regime.pi)
    residuals = {"G": la.inf_norm(mmbm_residual(model, G)),
                 "R_left": la.inf_norm(mmbm_left_residual(model, R))}
    Lam = None
    H = None
    if model.brownian:
        Lam = solve_Lambda_mmbm(model, opts)
        residuals["Lambda"] = la.inf_norm(mmbm_residual(model.negated(), Lam))
        if regime.transient:
            H, spread, _ = solve_H_mmbm(model, G, Lam, regime)
            residuals["H_alpha_spread"] = spread
            residuals["GH-HR"] = la.inf_norm(G @ H - H @ R)
    return Fundamentals(G, R, H, regime, Lam, residuals)


def solve(model, opts=DEFAULT):
    if isinstance(model, LatticeModel):
        return solve_lattice(model, opts)
    return solve_mmbm(model, opts)
