"""Two-sided exit, lattice scale matrices, creeping and strip occupation.

All matrices are indexed ``[start phase, end phase]``.  Scale matrices use
the convention ``W(j) = 0`` for ``j <= 0``; the table itself starts at 1.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from . import linalg as la
from .errors import (HorizonTooSmall, NoValidRoute, NullRecurrent, SingularAminus1,
                     SingularPivot, WrongRegime, ZOutsideDomain)
from .model import C1_NEG, F_of_z
from .solvers import hitting_matrix
from . import taboo

DOMAIN_MARGIN = 1e-6


@dataclass(frozen=True, eq=False)
class ScaleTable:
    W: list  # W[0] is None, W[k] for k = 1..K
    singular_flag: bool = False

    @property
    def horizon(self):
        return len(self.W) - 1

    def __call__(self, k):
        if k <= 0:
            return np.zeros_like(self.W[1])
        if k > self.horizon:
            raise HorizonTooSmall(f"W known to {self.horizon}, need {k}")
        return self.W[k]


@dataclass(frozen=True, eq=False)
class ExitLaw:
    a: int
    b: int
    D: np.ndarray


def _need(tables, k):
    if tables.horizon < k:
        raise HorizonTooSmall(f"taboo tables reach {tables.horizon}, need {k}")


# ------------------------------------------------------------ exit and scale

def two_sided_exit(model, tables, R, a, b):
    """``P[hit -a before reaching b or above, J]``."""
    a, b = int(a), int(b)
    n = model.n_phases
    if a < 0 or b < 0:
        raise ValueError("a and b must be non-negative")
    if b == 0:
        return ExitLaw(a, b, np.eye(n) if a == 0 else np.zeros((n, n)))
    _need(tables, a + b - 1)
    D = la.rsolve(tables.xi[b] @ la.matpow(R, a), tables.xi[a + b], "Xi(a+b)")
    return ExitLaw(a, b, D)


def scale_matrices(model, K):
    """``W(1..K)`` from ``W(1) = A_{-1}^{-1}``, ``W(k+1) = -A_{-1}^{-1} sum A_{k-v} W(v)``."""
    K = int(K)
    lu = la.lu(model.A(-1), "A_{-1}", err=SingularAminus1)
    n = model.n_phases
    W = [None, sla.lu_solve(lu, np.eye(n))]
    for k in range(1, K):
        acc = np.zeros((n, n))
        for v in range(max(1, k - model.max_jump), k + 1):
            acc += model.A(k - v) @ W[v]
        W.append(-sla.lu_solve(lu, acc))
    return ScaleTable(W)


def exit_from_scale(scale, a, b):
    """``W(b) W(a+b)^{-1}`` (a+b > 0)."""
    if b == 0:
        n = scale.W[1].shape[0]
        return np.eye(n) if a == 0 else np.zeros((n, n))
    return la.rsolve(scale(b), scale(a + b), "W(a+b)")


def exit_from_theta(G, theta_table, a, b):
    """``(G^{-b} Theta(b)) (G^{-a-b} Theta(a+b))^{-1}`` for b >= 1."""
    Ginv = la.inv(G, "G")
    left = la.matpow(Ginv, b) @ theta_table[b]
    right = la.matpow(Ginv, a + b) @ theta_table[a + b]
    return la.rsolve(left, right, "G^{-a-b} Theta(a+b)")


def series_radius(model, fund=None):
    """Smallest modulus among the eigenvalues of G (the W series radius).

    Without G (null-recurrent models where G was not solved) the smallest
    root modulus of ``det F(z)`` is used; both coincide.
    """
    if fund is not None and fund.G is not None:
        return float(np.min(np.abs(np.linalg.eigvals(fund.G))))
    return float(np.min(np.abs(detF_roots(model))))


def detF_roots(model):
    """Finite roots of ``det F(z)`` via a block companion pencil."""
    n, d = model.n_phases, model.max_jump + 1
    coeffs = [model.A(m) for m in range(-1, model.max_jump + 1)]  # z^0 .. z^d
    if d == 0:
        return np.array([])
    size = n * d
    Acomp = np.zeros((size, size))
    Bcomp = np.eye(size)
    Acomp[:-n, n:] = np.eye(size - n)
    for j in range(d):
        Acomp[-n:, j * n:(j + 1) * n] = -coeffs[j]
    Bcomp[-n:, -n:] = coeffs[d]
    ev = sla.eigvals(Acomp, Bcomp)
    return ev[np.isfinite(ev)]


def check_scale_transform(model, scale, z, fund=None):
    """Partial sums of ``sum W(k) z^k`` against ``z F(z)^{-1}``.

    Returns ``(residual, tail_bound)``; the identity holds when the residual
    is below ``tail_bound + 1e-8``.
    """
    rad = series_radius(model, fund)
    if z == 0 or abs(z) >= rad - DOMAIN_MARGIN:
        raise ZOutsideDomain(f"|z| must lie in (0, {rad - DOMAIN_MARGIN:.6g})", radius=rad)
    target = z * la.inv(F_of_z(model, z), "F(z)")
    acc = np.zeros_like(target)
    zp = 1.0
    norms = []
    for k in range(1, scale.horizon + 1):
        zp = zp * z
        term = scale(k) * zp
        acc = acc + term
        norms.append(la.inf_norm(term))
    tail = la.geometric_tail(norms, abs(z) / rad)
    return la.inf_norm(acc - target), tail


def auto_horizon(rate, floor=20, cap=4000, target=1e-16):
    """Number of terms for a geometric series with ratio ``rate`` to drop below ``target``."""
    if rate <= 0:
        return floor
    if rate >= 1:
        return cap
    return int(min(cap, max(floor, np.ceil(np.log(target) / np.log(rate)) + 10)))


# ------------------------------------------------------------ H transforms

def max_real_eig(model, z):
    return float(np.max(np.linalg.eigvals(F_of_z(model, z) / z).real))


def bilateral_domain(model, lo, hi, n_grid=400):
    """Real intervals in ``[lo, hi]`` where every eigenvalue of F(z)/z has negative real part."""
    grid = np.geomspace(lo, hi, n_grid)
    ok = np.array([max_real_eig(model, z) < 0 for z in grid])
    intervals = []
    i = 0
    while i < grid.size:
        if ok[i]:
            j = i
            while j + 1 < grid.size and ok[j + 1]:
                j += 1
            left = grid[i] if i == 0 else _bisect(model, grid[i - 1], grid[i])
            right = grid[j] if j == grid.size - 1 else _bisect(model, grid[j + 1], grid[j])
            intervals.append((left, right))
            i = j + 1
        else:
            i += 1
    return intervals


def _bisect(model, bad, good, iters=80):
    for _ in range(iters):
        mid = 0.5 * (bad + good)
        if max_real_eig(model, mid) < 0:
            good = mid
        else:
            bad = mid
    return good


def locate_bilateral_z(model, lo=1e-3, hi=1e3):
    """A valid real z: geometric centre of the widest valid interval, or None."""
    ivs = bilateral_domain(model, lo, hi)
    if not ivs:
        return None
    left, right = max(ivs, key=lambda t: np.log(t[1] / t[0]))
    return float(np.sqrt(left * right))


def check_H_transform(model, fund, z, form="bilateral", K=None):
    """Residual of the occupation-transform identity and its truncation tail.

    ``bilateral``: ``sum_{k in Z} z^k H(k) = -z F(z)^{-1}``, legal where all
    eigenvalues of F(z)/z have negative real part.
    ``unilateral``: ``sum_{k>=1} z^k P[J_{tau_k}] H + z (zI - G)^{-1} H``
    equals the same right-hand side on the open unit disc minus sp(G).
    """
    if fund.H is None:
        raise NullRecurrent("the occupation transform needs a finite H")
    G, H = fund.G, fund.H
    n = model.n_phases
    target = -z * la.inv(F_of_z(model, z), "F(z)")
    if form == "bilateral":
        if max_real_eig(model, z) >= 0:
            raise ZOutsideDomain("F(z)/z has an eigenvalue with non-negative real part", z=z)
    elif form == "unilateral":
        if not 0 < abs(z) < 1 or np.min(np.abs(np.linalg.eigvals(G) - z)) < DOMAIN_MARGIN:
            raise ZOutsideDomain("unilateral form needs z in the unit disc, off sp(G)", z=z)
    else:
        raise ValueError(f"unknown form {form!r}")
    K = K or 400
    levels = taboo.occupation_levels(fund.overshoot, G, H, K)
    acc = np.zeros((n, n))
    pos = []
    zp = 1.0
    for k in range(1, K + 1):
        zp *= z
        term = zp * levels[k]
        acc += term
        pos.append(la.inf_norm(term))
    tail = la.geometric_tail(pos)
    if form == "unilateral":
        acc += z * la.solve(z * np.eye(n) - G, H)
    else:
        neg = []
        Gz = G / z
        term = H.copy()
        for k in range(K + 1):
            acc += term
            neg.append(la.inf_norm(term))
            term = Gz @ term
        tail += la.geometric_tail(neg, la.spectral_radius(G) / abs(z))
    return la.inf_norm(acc - target), tail


# ------------------------------------------------------------ creeping

def creeping(model, tables, m):
    """``P[first passage to m or above lands exactly on m, J]``."""
    _need(tables, m)
    return la.rsolve(tables.phi[m], tables.phi[0], "Phi(0)")


def creeping_from_scale(scale, R, m):
    Rinv = la.inv(R, "R")
    return la.rsolve(scale(m + 1) - scale(m) @ Rinv, scale(1), "W(1)")


def hit_before_upcross(model, tables, R, m, l):
    """``P[hit m before reaching m+l or above, J]``."""
    _need(tables, m + l - 1)
    n = model.n_phases
    top = np.zeros((n, n))
    bot = np.zeros((n, n))
    Rp = np.eye(n)
    for i in range(l):
        top += tables.phi[m + i] @ Rp
        bot += tables.phi[i] @ Rp
        Rp = Rp @ R
    return la.rsolve(top, bot, "Xi(l)")


def hit_before_upcross_from_scale(scale, R, m, l):
    Rl = la.inv(la.matpow(R, l), "R^l")
    return la.rsolve(scale(m + l) - scale(m) @ Rl, scale(l), "W(l)")


# ------------------------------------------------------------ occupation in strips

def _H_at(fund, levels, k):
    if k <= 0:
        return la.matpow(fund.G, -k) @ fund.H
    return levels[k]


def occupation_before_upcross(fund, levels, k, m):
    """``E[L(k, tau_m^up)]`` for k < m (transient)."""
    return _H_at(fund, levels, k) - _H_at(fund, levels, m) @ la.matpow(fund.R, m - k)


def occupation_before_down(fund, levels, k, l):
    """``E[L(k, tau_{-l})]`` for k > -l (transient)."""
    return _H_at(fund, levels, k) - la.matpow(fund.G, l) @ _H_at(fund, levels, k + l)


def strip_occupation(model, fund, tables, k, l, m, route="auto", scale=None):
    """``E[L(k, tau_{-l} ^ tau_m^up)]`` for ``-l < k < m``, ``l, m >= 1``.

    ``route`` is ``"transient"`` (needs finite H), ``"scale"`` (needs an
    invertible ``A_{-1}``) or ``"auto"`` (transient first).
    """
    if not (l >= 1 and m >= 1 and -l < k < m):
        raise ValueError("need l, m >= 1 and -l < k < m")
    routes = ["transient", "scale"] if route == "auto" else [route]
    last = None
    for r in routes:
        try:
            if r == "transient":
                if fund is None or fund.H is None:
                    raise NullRecurrent("transient route needs a finite H")
                levels = taboo.occupation_levels(fund.overshoot, fund.G, fund.H, m + l)
                D = two_sided_exit(model, tables, fund.R, l, m).D
                return (occupation_before_upcross(fund, levels, k, m)
                        - D @ occupation_before_upcross(fund, levels, k + l, m + l))
            if scale is None:
                scale = scale_matrices(model, m + l)
            return (la.rsolve(scale(m), scale(m + l), "W(m+l)") @ scale(k + l) - scale(k))
        except (NullRecurrent, SingularPivot) as exc:
            last = exc
    raise NoValidRoute(f"no route for strip occupation: {last}")


def strip_occupations(model, fund, tables, l, m, route="auto", scale=None):
    return {k: strip_occupation(model, fund, tables, k, l, m, route, scale)
            for k in range(-l + 1, m)}


def exit_overshoot(model, occ, l, m, u):
    """``P[exit upward before -l, land on m+u, J]`` from strip occupations ``occ[k]``."""
    n = model.n_phases
    out = np.zeros((n, n))
    for v in range(1, m + l):
        if 0 <= v + u <= model.max_jump and v + u >= 1:
            out += occ[m - v] @ model.A(v + u)
    return out


# ------------------------------------------------------------ decay

def decay_diagnostic(model, fund, K, z_max=1e3):
    """Spectral radii of ``P[J_{tau_k}]`` and the radius of the transform domain.

    Returns a dict with ``xi`` (k = 1..K), ``xi_star`` (``xi_K^{1/K}``),
    ``phi`` (sup of valid real z > 1, or None) and ``product``.
    """
    if fund.regime.tag != C1_NEG:
        raise WrongRegime("decay diagnostic needs a non-defective model with mu < 0")
    if K < 5:
        raise HorizonTooSmall("K must be at least 5")
    hits = taboo.hitting_levels(fund.overshoot, fund.G, fund.H, K)
    xis = [la.spectral_radius(hits[k]) for k in range(1, K + 1)]
    roots = [x ** (1.0 / k) for k, x in enumerate(xis, start=1)]
    ivs = bilateral_domain(model, 1.0 + 1e-9, z_max)
    phi_val = max(iv[1] for iv in ivs) if ivs else None
    xi_star = roots[-1]
    out = {"xi": xis, "xi_root": roots, "xi_star": xi_star, "phi": phi_val,
           "product": None if phi_val is None else xi_star * phi_val}
    out["claim_holds"] = None if phi_val is None else abs(xi_star * phi_val - 1) < 0.05
    return out
