"""Lattice and Markov-modulated Brownian models of one-sided MAPs.

A :class:`LatticeModel` holds the rate blocks ``A_{-1}, A_0, ..., A_M`` of a
level-translation-invariant chain that is skip-free downwards.  Killing is
never stored as a cemetery phase; it is the deficit of the row sums of
``sum_m A_m``.  A :class:`MmbmModel` holds per-phase drift and variance plus
the (possibly defective) phase rate matrix.
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from . import linalg as la
from .errors import (BadDiagonal, NegativeRate, ReducibleChain, ReducibleGenerator,
                     RowSumExceedsZero, SingularSolve, SubordinatorPhase,
                     ValidationError, ZeroArgument)

TOL_DRIFT = 1e-10
ROWSUM_TOL = 1e-12

C1_ZERO = "C1_zero_drift"
C1_NEG = "C1_negative_drift"
C2_DEF = "C2_defective"
C2_POS = "C2_positive_drift"


def _frozen(a):
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class LatticeModel:
    """Blocks ``A_{-1}..A_M``; ``blocks[m + 1]`` is ``A_m``."""

    blocks: tuple

    def __post_init__(self):
        blocks = tuple(_frozen(b) for b in self.blocks)
        if len(blocks) < 2:
            raise ValidationError("need at least A_{-1} and A_0")
        n = blocks[0].shape[0]
        for b in blocks:
            if b.shape != (n, n):
                raise ValidationError("all blocks must be square and of equal size")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def from_dict(cls, blocks):
        """Build from a mapping ``m -> A_m``; missing intermediate blocks are zero."""
        blocks = {int(k): np.asarray(v, dtype=float) for k, v in blocks.items()}
        if -1 not in blocks or 0 not in blocks:
            raise ValidationError("blocks -1 and 0 are required")
        if min(blocks) < -1:
            raise ValidationError("skip-free downwards: no block below -1")
        M = max(blocks)
        n = blocks[0].shape[0]
        seq = [blocks.get(m, np.zeros((n, n))) for m in range(-1, max(M, 0) + 1)]
        return cls(tuple(seq))

    @property
    def n_phases(self):
        return self.blocks[0].shape[0]

    @property
    def max_jump(self):
        return len(self.blocks) - 2

    def A(self, m):
        if -1 <= m <= self.max_jump:
            return self.blocks[m + 1]
        return np.zeros((self.n_phases, self.n_phases))

    @property
    def kill_rates(self):
        q = -sum(self.blocks).sum(axis=1)
        q[np.abs(q) < ROWSUM_TOL] = 0.0
        return q

    @property
    def generator(self):
        """Conservative phase generator ``sum_m A_m + diag(q)``."""
        return sum(self.blocks) + np.diag(self.kill_rates)

    @property
    def delta_A(self):
        """Diagonal of ``-A_0`` as a vector (total event rate per phase)."""
        return -np.diag(self.A(0)).copy()

    @property
    def is_defective(self):
        return bool(np.any(self.kill_rates > 0))

    def jump_chain(self, m):
        """Transition matrix of the jump chain for a level change of ``m``."""
        out = self.A(m) / self.delta_A[:, None]
        if m == 0:
            out = out + np.eye(self.n_phases)
        return out


@dataclass(frozen=True, eq=False)
class MmbmModel:
    """Markov-modulated Brownian motion; ``Q`` includes killing on its diagonal."""

    drift: np.ndarray
    variance: np.ndarray
    Q: np.ndarray

    def __post_init__(self):
        d = _frozen(np.ravel(self.drift))
        v = _frozen(np.ravel(self.variance))
        Q = _frozen(np.atleast_2d(self.Q))
        n = d.size
        if v.size != n or Q.shape != (n, n):
            raise ValidationError("drift, variance and Q dimensions disagree")
        object.__setattr__(self, "drift", d)
        object.__setattr__(self, "variance", v)
        object.__setattr__(self, "Q", Q)

    @property
    def n_phases(self):
        return self.drift.size

    @property
    def kill_rates(self):
        q = -self.Q.sum(axis=1)
        q[np.abs(q) < ROWSUM_TOL] = 0.0
        return q

    @property
    def generator(self):
        return self.Q + np.diag(self.kill_rates)

    @property
    def is_defective(self):
        return bool(np.any(self.kill_rates > 0))

    @property
    def brownian(self):
        return bool(np.all(self.variance > 0))

    def negated(self):
        """The level-negated process ``(-X, J)``."""
        return MmbmModel(-self.drift, self.variance, self.Q)


@dataclass(frozen=True, eq=False)
class Regime:
    tag: str
    pi: np.ndarray = field(repr=False)
    mu: float

    @property
    def defective(self):
        return self.tag == C2_DEF

    @property
    def null_recurrent(self):
        return self.tag == C1_ZERO

    @property
    def transient(self):
        return not self.null_recurrent

    @property
    def c1(self):
        return self.tag in (C1_ZERO, C1_NEG)


def _strongly_connected(adj):
    n_comp, _ = connected_components(csr_matrix(adj), directed=True, connection="strong")
    return n_comp == 1


def _check_generator(Q, label):
    n = Q.shape[0]
    off = Q - np.diag(np.diag(Q))
    if np.any(off < 0):
        raise NegativeRate(f"{label} has a negative off-diagonal rate")
    if n > 1 and not _strongly_connected(off > 0):
        raise ReducibleGenerator("phase generator is reducible")


def _validate_lattice(model, strict=True):
    n, M = model.n_phases, model.max_jump
    for m in range(-1, M + 1):
        A = model.A(m)
        if not np.all(np.isfinite(A)):
            raise ValidationError(f"A_{m} has non-finite entries")
        chk = A - np.diag(np.diag(A)) if m == 0 else A
        if np.any(chk < 0):
            raise NegativeRate(f"A_{m} has a negative rate")
    if np.any(np.diag(model.A(0)) >= 0):
        raise BadDiagonal("diagonal of A_0 must be strictly negative")
    rows = sum(model.blocks).sum(axis=1)
    if np.any(rows > ROWSUM_TOL * max(1.0, np.abs(model.A(0)).max())):
        raise RowSumExceedsZero("row sums of sum_m A_m must be <= 0",
                                row_sums=rows.tolist())
    _check_generator(model.generator, "generator")
    if strict and not _chain_irreducible(model):
        raise ReducibleChain("the level-phase chain (X, J) is not irreducible")
    return model


def _chain_irreducible(model):
    """Strong connectivity on the level window ``-(M+1)..M+1``."""
    n, M = model.n_phases, model.max_jump
    L = M + 1
    levels = np.arange(-L, L + 1)
    size = levels.size * n
    adj = np.zeros((size, size), dtype=bool)
    for m in range(-1, M + 1):
        pos = model.A(m) > 0
        if m == 0:
            pos = pos & ~np.eye(n, dtype=bool)
        for x_idx, x in enumerate(levels):
            y = x + m
            if -L <= y <= L:
                y_idx = y + L
                adj[x_idx * n:(x_idx + 1) * n, y_idx * n:(y_idx + 1) * n] |= pos
    return _strongly_connected(adj)


def _validate_mmbm(model):
    if not (np.all(np.isfinite(model.drift)) and np.all(np.isfinite(model.variance))
            and np.all(np.isfinite(model.Q))):
        raise ValidationError("non-finite MMBM parameters")
    if np.any(model.variance < 0):
        raise NegativeRate("variances must be non-negative")
    off = model.Q - np.diag(np.diag(model.Q))
    if np.any(off < 0):
        raise NegativeRate("Q has a negative off-diagonal rate")
    rows = model.Q.sum(axis=1)
    if np.any(rows > ROWSUM_TOL * max(1.0, np.abs(model.Q).max())):
        raise RowSumExceedsZero("row sums of Q must be <= 0", row_sums=rows.tolist())
    _check_generator(model.generator, "Q")
    bad = (model.variance == 0) & (model.drift >= 0)
    if np.any(bad):
        raise SubordinatorPhase("a zero-variance phase must have negative drift",
                                phases=np.nonzero(bad)[0].tolist())
    return model


def validate(raw, strict=True):
    """Return a model whose invariants hold, or raise the first violation.

    ``raw`` is a parsed model document (dict) or a model instance.  With
    ``strict=False`` the (X, J) irreducibility check is skipped; that is only
    useful for degenerate test models such as pure-death chains.
    """
    if isinstance(raw, dict):
        from .io import model_from_dict
        return model_from_dict(raw, strict=strict)
    if isinstance(raw, LatticeModel):
        return _validate_lattice(raw, strict)
    if isinstance(raw, MmbmModel):
        return _validate_mmbm(raw)
    raise ValidationError(f"cannot validate object of type {type(raw).__name__}")


def stationary(Q):
    """Stationary vector of a conservative irreducible generator."""
    n = Q.shape[0]
    a = np.array(Q, dtype=float).T
    a[-1, :] = 1.0
    b = np.zeros(n)
    b[-1] = 1.0
    pi = la.solve(a, b, "stationary system", err=SingularSolve)
    pi[np.abs(pi) < 1e-300] = 0.0
    return pi


def drift_and_pi(model, tol_drift=TOL_DRIFT):
    pi = stationary(model.generator)
    if isinstance(model, LatticeModel):
        jumps = sum(m * model.A(m) for m in range(-1, model.max_jump + 1))
        mu = float(pi @ jumps.sum(axis=1))
    else:
        mu = float(pi @ model.drift)
    if model.is_defective:
        tag = C2_DEF
    elif abs(mu) < tol_drift:
        tag = C1_ZERO
    elif mu < 0:
        tag = C1_NEG
    else:
        tag = C2_POS
    pi.setflags(write=False)
    return Regime(tag, pi, mu)


def with_killing(model, extra_q):
    q = np.asarray(extra_q, dtype=float).ravel()
    if q.size != model.n_phases:
        raise ValidationError("extra killing has wrong length")
    if np.any(q < 0):
        raise NegativeRate("extra killing rates must be non-negative")
    if isinstance(model, LatticeModel):
        blocks = list(model.blocks)
        blocks[1] = blocks[1] - np.diag(q)
        return LatticeModel(tuple(blocks))
    return MmbmModel(model.drift, model.variance, model.Q - np.diag(q))


def reverse(model):
    """Time-reversed model, conjugating by the stationary law of ``Q + diag(q)``."""
    pi = stationary(model.generator)
    conj = lambda A: (A.T * pi[None, :]) / pi[:, None]
    if isinstance(model, LatticeModel):
        return LatticeModel(tuple(conj(A) for A in model.blocks))
    return MmbmModel(model.drift, model.variance, conj(model.Q))


def F_of_z(model, z):
    """Lattice generating function ``z * sum_m z^m A_m``."""
    if z == 0:
        raise ZeroArgument("F(z) is evaluated at z != 0 only")
    out = np.zeros((model.n_phases, model.n_phases), dtype=complex if np.iscomplexobj(z) else float)
    zp = 1.0
    for m in range(-1, model.max_jump + 1):
        out = out + zp * model.A(m)
        zp = zp * z
    return out


def F_of_alpha(model, alpha):
    """MMBM matrix exponent ``1/2 diag(s2) a^2 + diag(a) a + Q``."""
    return (np.diag(0.5 * model.variance) * alpha ** 2 + np.diag(model.drift) * alpha
            + model.Q)


def F_eval(model, arg):
    if isinstance(model, LatticeModel):
        return F_of_z(model, arg)
    return F_of_alpha(model, arg)


def birth_death(up, down, kill=0.0):
    """Scalar birth-death lattice model ``BD(up, down)`` with optional killing."""
    return LatticeModel((np.array([[down]], float), np.array([[-(up + down + kill)]], float),
                         np.array([[up]], float)))
