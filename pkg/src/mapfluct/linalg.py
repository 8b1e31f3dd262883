"""Small dense linear-algebra helpers shared by every module."""

import warnings

import numpy as np
import scipy.linalg as sla
from scipy.optimize import linear_sum_assignment

from .errors import SingularPivot

PIVOT_TOL = 1e-12

# scaling and squaring with a Pade approximant of degree up to 13
expm = sla.expm


def lu(a, what="matrix", err=SingularPivot):
    """LU factorisation with partial pivoting, refusing near-zero pivots.

    A pivot is rejected when it is below ``PIVOT_TOL`` times the largest
    pivot; the caller gets ``err`` instead of a meaningless inverse.
    """
    a = np.asarray(a, dtype=float)
    if a.size == 0:
        raise err(f"{what} is empty")
    if not np.all(np.isfinite(a)):
        raise err(f"{what} has non-finite entries")
    with warnings.catch_warnings():
        # exact zero pivots are reported below as ``err``
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu_piv = sla.lu_factor(a, check_finite=False)
    piv = np.abs(np.diag(lu_piv[0]))
    scale = piv.max()
    if scale == 0.0 or piv.min() <= PIVOT_TOL * scale:
        raise err(f"{what} is numerically singular",
                  min_pivot=float(piv.min()), max_pivot=float(scale))
    return lu_piv


def solve(a, b, what="matrix", err=SingularPivot):
    """``a^{-1} b``."""
    return sla.lu_solve(lu(a, what, err), np.asarray(b, dtype=float), check_finite=False)


def rsolve(b, a, what="matrix", err=SingularPivot):
    """``b a^{-1}``, computed as ``(a^T)^{-1} b^T`` transposed."""
    return solve(np.asarray(a).T, np.asarray(b).T, what, err).T


def inv(a, what="matrix", err=SingularPivot):
    a = np.asarray(a, dtype=float)
    return solve(a, np.eye(a.shape[0]), what, err)


def is_nonsingular(a):
    try:
        lu(a)
    except SingularPivot:
        return False
    return True


def inf_norm(a):
    a = np.asarray(a)
    if a.ndim == 1:
        return float(np.max(np.abs(a)))
    return float(np.max(np.abs(a).sum(axis=1)))


def spectral_radius(a):
    return float(np.max(np.abs(np.linalg.eigvals(a))))


def matpow(a, k):
    return np.linalg.matrix_power(np.asarray(a, dtype=float), int(k))


def spectrum_distance(a, b):
    """Largest distance between optimally matched eigenvalues of ``a`` and ``b``."""
    ea = np.linalg.eigvals(a)
    eb = np.linalg.eigvals(b)
    cost = np.abs(ea[:, None] - eb[None, :])
    r, c = linear_sum_assignment(cost)
    return float(cost[r, c].max())


def geometric_tail(norms, rate=None, window=5):
    """Bound on ``sum_{k>K} t_k`` from terms ``t_0..t_K`` decaying geometrically.

    The decay ratio is the larger of ``rate`` (if known analytically) and the
    largest observed ratio over the last ``window`` terms.  Returns ``inf``
    when the observed sequence does not decay.
    """
    t = np.asarray(norms, dtype=float)
    if t.size == 0:
        return float("inf")
    last = t[-1]
    if last == 0.0:
        # exact zeros persist only for unreachable levels; keep a rate check
        if rate is not None and rate < 1.0:
            return 0.0
        nz = np.nonzero(t)[0]
        if nz.size == 0:
            return 0.0
    tail = t[-(window + 1):]
    ratios = []
    for u, v in zip(tail[:-1], tail[1:]):
        if u > 0.0:
            ratios.append(v / u)
    theta = max(ratios) if ratios else 0.0
    if rate is not None:
        theta = max(theta, rate)
    if theta >= 1.0:
        return float("inf")
    return float(last * theta / (1.0 - theta))
