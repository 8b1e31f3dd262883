"""Taboo occupation machinery for lattice models.

Notation used throughout:

* ``r_tilde``   expected visits of the jump chain to level -1 before the
  first return to level 0 (the jump-chain analogue of R),
* ``overshoot[i]`` probability that the first non-negative level entered
  after leaving 0 is level ``i``,
* ``phi[m]``    expected time at level m before the first passage to m+1
  or above,
* ``xi[m]``     expected time at level 0 before the first passage to m or
  above (stored with ``xi[0]`` unused),
* ``theta[k]``  expected time at level 0 before the first visit to -k.
"""

from dataclasses import dataclass, field

import numpy as np

from . import linalg as la
from .errors import (HorizonTooSmall, NullRecurrent, NullRecurrentAndSingularA,
                     SingularPivot)


def r_tilde(model, R):
    d = model.delta_A
    return (R * d[None, :]) / d[:, None]


def r_tilde_residual(model, Rt):
    """``|| sum_m Rt^{m+1} At_m - Rt ||_inf`` for the jump-chain equation."""
    acc = model.jump_chain(model.max_jump)
    for m in range(model.max_jump - 1, -2, -1):
        acc = model.jump_chain(m) + Rt @ acc
    return la.inf_norm(acc - Rt)


def overshoot_matrices(model, Rt):
    """``[A_0^up, ..., A_M^up]`` by the backward recursion ``Ai = At_i + Rt A_{i+1}``."""
    M = model.max_jump
    out = [None] * (M + 1)
    out[M] = model.jump_chain(M)
    for i in range(M - 1, -1, -1):
        out[i] = model.jump_chain(i) + Rt @ out[i + 1]
    out = [np.maximum(a, 0.0) for a in out]
    la.lu(np.eye(model.n_phases) - out[0], "I - A_0^up")
    return out


def phi(model, overshoot, K):
    """``Phi(0..K)``: time at level m under taboo of the levels above m."""
    n = model.n_phases
    lu0 = la.lu(np.eye(n) - overshoot[0], "I - A_0^up")
    from scipy.linalg import lu_solve
    out = [lu_solve(lu0, np.diag(1.0 / model.delta_A))]
    for k in range(1, K + 1):
        acc = np.zeros((n, n))
        for nu in range(1, min(k, len(overshoot) - 1) + 1):
            acc += overshoot[nu] @ out[k - nu]
        out.append(lu_solve(lu0, acc))
    return out


def xi(phi_table, R, K):
    """``Xi(1..K)`` as the running sum ``Xi(m+1) = Xi(m) + Phi(m) R^m``; index 0 is None."""
    if len(phi_table) < K:
        raise HorizonTooSmall(f"Phi known to {len(phi_table) - 1}, need {K - 1}")
    out = [None]
    acc = np.zeros_like(phi_table[0])
    Rp = np.eye(R.shape[0])
    for m in range(K):
        acc = acc + phi_table[m] @ Rp
        out.append(acc.copy())
        Rp = Rp @ R
    return out


def occupation_levels(overshoot, G, H, K):
    """``H(0..K)``: expected total time at levels 0..K, started from level 0."""
    n = G.shape[0]
    M = len(overshoot) - 1
    lu0 = la.lu(np.eye(n) - overshoot[0], "I - A_0^up")
    from scipy.linalg import lu_solve
    Gp = [np.eye(n)]
    for _ in range(M):
        Gp.append(Gp[-1] @ G)
    out = [np.asarray(H, dtype=float)]
    for m in range(1, K + 1):
        acc = np.zeros((n, n))
        for nu in range(1, min(m, M) + 1):
            acc += overshoot[nu] @ out[m - nu]
        for nu in range(m + 1, M + 1):
            acc += overshoot[nu] @ Gp[nu - m] @ H
        out.append(lu_solve(lu0, acc))
    return out


def hitting_levels(overshoot, G, H, K):
    """``P[J at first hit of k]`` for k = 0..K (transient models)."""
    levels = occupation_levels(overshoot, G, H, K)
    return [la.rsolve(Hk, H, "H") for Hk in levels]


def theta(model, fund, xi_table, K, route="auto"):
    """``Theta(1..K)``; index 0 is None.

    The H-route ``H - G^k P[J_{tau_k}] H`` is preferred; the alternative
    ``G^k Xi(k) R^{-k}`` is used for null-recurrent models with invertible R.
    """
    G, R, H = fund.G, fund.R, fund.H
    if route in ("auto", "H") and H is not None:
        hits = hitting_levels(fund.overshoot, G, H, K)
        out = [None]
        Gp = np.eye(G.shape[0])
        for k in range(1, K + 1):
            Gp = Gp @ G
            out.append(H - Gp @ hits[k] @ H)
        return out
    if route == "H":
        raise NullRecurrent("H is infinite; Theta needs the Xi route")
    if len(xi_table) <= K:
        raise HorizonTooSmall(f"Xi known to {len(xi_table) - 1}, need {K}")
    try:
        Rinv = la.inv(R, "R")
    except SingularPivot:
        raise NullRecurrentAndSingularA(
            "null-recurrent model with singular A_{-1}: no route to Theta") from None
    out = [None]
    Gp = np.eye(G.shape[0])
    Rip = np.eye(G.shape[0])
    for k in range(1, K + 1):
        Gp = Gp @ G
        Rip = Rip @ Rinv
        out.append(Gp @ xi_table[k] @ Rip)
    return out


@dataclass(frozen=True, eq=False)
class TabooTables:
    horizon: int
    r_tilde: np.ndarray
    overshoot: list
    phi: list
    xi: list
    theta: list = field(default=None)
    phi_tail: float = field(default=float("inf"))

    def creeping_rate(self):
        """Observed geometric decay ratio of ``||Phi(m)||``."""
        t = [la.inf_norm(p) for p in self.phi]
        ratios = [b / a for a, b in zip(t[:-1], t[1:]) if a > 0]
        tail = ratios[-5:]
        return max(tail) if tail else 0.0


def build_tables(model, fund, K, with_theta=True):
    """Every taboo table to horizon ``K`` (``K >= 1``)."""
    K = int(K)
    if K < 1:
        raise HorizonTooSmall("horizon must be at least 1")
    Rt = r_tilde(model, fund.R)
    over = fund.overshoot if fund.overshoot is not None else overshoot_matrices(model, Rt)
    ph = phi(model, over, K)
    xs = xi(ph, fund.R, K + 1)
    th = None
    if with_theta:
        try:
            th = theta(model, fund, xs, K)
        except NullRecurrentAndSingularA:
            th = None
    tail = la.geometric_tail([la.inf_norm(p) for p in ph])
    return TabooTables(K, Rt, over, ph, xs, th, tail)
