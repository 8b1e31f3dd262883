"""Joint law of the running maximum (or minimum) and the state at killing.

``(X_zeta, J_zeta)`` always means the state just before the kill.
"""

from dataclasses import dataclass

import numpy as np

from . import linalg as la
from . import taboo
from .errors import NoValidRoute, NotDefective, NullRecurrent, SingularPivot
from .fluctuation import scale_matrices

TAIL_TARGET = 1e-10


def _require_killing(model):
    if not model.is_defective:
        raise NotDefective("extrema at killing need a defective model")
    return np.diag(model.kill_rates)


def max_at_killing(model, fund, tables, m, l):
    """``P[max = m, X_zeta = m - l, J_zeta]`` as ``Phi(m) R^l diag(q)``."""
    kill = _require_killing(model)
    if tables.horizon < m:
        tables = taboo.build_tables(model, fund, m, with_theta=False)
    return tables.phi[m] @ la.matpow(fund.R, l) @ kill


def _below_minus_one(fund, levels, l):
    """``E[L(l, tau_{-1})] = H(l) - G H(l+1)``."""
    return levels[l] - fund.G @ levels[l + 1]


def min_at_killing(model, fund, m, l, route="auto", scale=None):
    """``P[min = -m, X_zeta = -m + l, J_zeta]``.

    Transient route: ``G^m E[L(l, tau_{-1})] diag(q)``.  Scale route (needs an
    invertible ``A_{-1}``): ``G^m (G W(l+1) - W(l)) diag(q)``.
    """
    kill = _require_killing(model)
    routes = ["transient", "scale"] if route == "auto" else [route]
    Gm = la.matpow(fund.G, m)
    last = None
    for r in routes:
        try:
            if r == "transient":
                if fund.H is None:
                    raise NullRecurrent("transient route needs a finite H")
                levels = taboo.occupation_levels(fund.overshoot, fund.G, fund.H, l + 1)
                return Gm @ _below_minus_one(fund, levels, l) @ kill
            if scale is None or scale.horizon < l + 1:
                scale = scale_matrices(model, l + 1)
            return Gm @ (fund.G @ scale(l + 1) - scale(l)) @ kill
        except (NullRecurrent, SingularPivot) as exc:
            last = exc
    raise NoValidRoute(f"no route for the minimum law: {last}")


@dataclass(frozen=True, eq=False)
class ExtremaLaw:
    direction: str
    prob: dict  # (m, l) -> N x N
    k_extreme: int
    k_position: int
    captured_mass: np.ndarray  # per starting phase
    tail_bound: float

    def rows(self):
        """``(m, l, i, j, p)`` tuples in grid order."""
        for (m, l), P in sorted(self.prob.items()):
            n = P.shape[0]
            for i in range(n):
                for j in range(n):
                    yield m, l, i, j, float(P[i, j])


def _geom_tail(norm_last, rate):
    if rate >= 1:
        return float("inf")
    return norm_last * rate / (1 - rate)


def _ratio_bound(mats):
    """Conservative per-step decay estimate from the last few norms."""
    norms = [la.inf_norm(x) for x in mats]
    ratios = [b / a for a, b in zip(norms[:-1], norms[1:]) if a > 0]
    return max(ratios[-5:]) if ratios else 0.0


def max_law(model, fund, target=TAIL_TARGET, k_cap=2000):
    """Adaptive grid of ``max_at_killing`` until the tails drop below ``target``.

    Each cell is weighted by ``||diag(q)||``; the horizon in ``l`` uses the
    spectral radius of R and the horizon in ``m`` the observed decay of Phi.
    """
    kill = _require_killing(model)
    qn = la.inf_norm(kill)
    R = fund.R
    rho_R = la.spectral_radius(R)
    k_pos = _horizon_for(R, qn, target, k_cap)
    Rpow = [np.eye(model.n_phases)]
    for _ in range(k_pos):
        Rpow.append(Rpow[-1] @ R)
    # Rows of (I - R)^{-1} bound the l-tail after k_pos
    l_tail = la.inf_norm(Rpow[-1]) * rho_R / max(1 - rho_R, 1e-300) if rho_R < 1 else np.inf
    K = 20
    while True:
        tables = taboo.build_tables(model, fund, K, with_theta=False)
        rate = tables.creeping_rate()
        m_tail = _geom_tail(la.inf_norm(tables.phi[-1]), rate) if rate < 1 else np.inf
        l_sum = la.inf_norm(la.inv(np.eye(model.n_phases) - R)) if rho_R < 1 else np.inf
        if m_tail * l_sum * qn < target or K >= k_cap:
            break
        K = min(2 * K, k_cap)
    prob = {}
    mass = np.zeros(model.n_phases)
    for m in range(K + 1):
        left = tables.phi[m]
        for l in range(k_pos + 1):
            P = left @ Rpow[l] @ kill
            prob[(m, l)] = P
            mass += P.sum(axis=1)
    phi_sum = sum(la.inf_norm(p) for p in tables.phi)
    tail = m_tail * l_sum * qn + phi_sum * l_tail * qn
    return ExtremaLaw("max", prob, K, k_pos, mass, float(tail))


def _horizon_for(X, qn, target, k_cap):
    rho = la.spectral_radius(X)
    if rho >= 1:
        return k_cap
    k = 10
    P = la.matpow(X, k)
    while k < k_cap and la.inf_norm(P) * qn / (1 - rho) >= target:
        P = P @ X
        k += 1
    return k


def min_law(model, fund, target=TAIL_TARGET, k_cap=2000, route="auto"):
    """Adaptive grid of ``min_at_killing`` (m = depth of the minimum, l = rise after it)."""
    kill = _require_killing(model)
    qn = la.inf_norm(kill)
    G = fund.G
    rho_G = la.spectral_radius(G)
    k_ext = _horizon_for(G, qn, target, k_cap)
    Gpow = [np.eye(model.n_phases)]
    for _ in range(k_ext):
        Gpow.append(Gpow[-1] @ G)
    K = 20
    scale = None
    while True:
        if route in ("auto", "transient") and fund.H is not None:
            levels = taboo.occupation_levels(fund.overshoot, G, fund.H, K + 1)
            mids = [_below_minus_one(fund, levels, l) for l in range(K + 1)]
        else:
            try:
                scale = scale_matrices(model, K + 1)
            except SingularPivot as exc:
                raise NoValidRoute(f"no route for the minimum law: {exc}") from None
            mids = [G @ scale(l + 1) - scale(l) for l in range(K + 1)]
        rate = _ratio_bound(mids)
        l_tail = _geom_tail(la.inf_norm(mids[-1]), rate) if rate < 1 else np.inf
        g_sum = sum(la.inf_norm(g) for g in Gpow)
        if l_tail * g_sum * qn < target or K >= k_cap:
            break
        K = min(2 * K, k_cap)
    prob = {}
    mass = np.zeros(model.n_phases)
    for m in range(k_ext + 1):
        for l in range(K + 1):
            P = Gpow[m] @ mids[l] @ kill
            prob[(m, l)] = P
            mass += P.sum(axis=1)
    mid_sum = sum(la.inf_norm(x) for x in mids)
    g_tail = (la.inf_norm(Gpow[-1]) * rho_G / (1 - rho_G)) if rho_G < 1 else np.inf
    tail = l_tail * g_sum * qn + g_tail * mid_sum * qn
    return ExtremaLaw("min", prob, k_ext, K, mass, float(tail))
