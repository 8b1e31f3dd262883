"""Scale function, exit law and creeping for Markov-modulated Brownian motion.

Continuous paths make the first hitting of ``x > 0`` the first passage
above ``x``, whose phase law is ``exp(Lambda x)``.  Together with the
downward passage law ``exp(G x)`` this gives the scale function

    W(x) = (exp(-G x) - exp(Lambda x)) H.
"""

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad_vec

from . import linalg as la
from .errors import FluidPhasePresent, NullRecurrent, ValidationError
from .model import F_of_alpha, MmbmModel, drift_and_pi
from .solvers import SolveOptions, solve_mmbm


@dataclass(frozen=True, eq=False)
class MmbmFluct:
    model: MmbmModel
    G: np.ndarray
    Lambda: np.ndarray
    R: np.ndarray
    H: np.ndarray
    fund: object = None

    @classmethod
    def from_model(cls, model, opts=None):
        if not isinstance(model, MmbmModel):
            raise ValidationError("expected an MMBM model")
        if not model.brownian:
            raise FluidPhasePresent("the MMBM module needs sigma2 > 0 in every phase",
                                    phases=np.nonzero(model.variance == 0)[0].tolist())
        if drift_and_pi(model).null_recurrent:
            raise NullRecurrent("zero drift without killing: H is infinite")
        fund = solve_mmbm(model, opts or SolveOptions())
        if fund.H is None:
            raise NullRecurrent("zero drift without killing: H is infinite")
        return cls(model, fund.G, fund.Lambda, fund.R, fund.H, fund)

    def up_passage(self, x):
        """Phase law at the first passage above ``x``."""
        return la.expm(self.Lambda * x)

    def down_passage(self, x):
        return la.expm(self.G * x)


def mmbm_scale(fluct, x):
    if x < 0:
        return np.zeros_like(fluct.H)
    return (la.expm(-fluct.G * x) - la.expm(fluct.Lambda * x)) @ fluct.H


def mmbm_scale_derivative(fluct, x):
    return (-fluct.G @ la.expm(-fluct.G * x) - fluct.Lambda @ la.expm(fluct.Lambda * x)) @ fluct.H


def mmbm_exit(fluct, a, b):
    """``P[hit -a before rising above b, J]`` (``a, b >= 0``, ``a + b > 0``)."""
    if a < 0 or b < 0 or a + b <= 0:
        raise ValueError("need a, b >= 0 with a + b > 0")
    n = fluct.H.shape[0]
    if a == 0:
        return np.eye(n)
    if b == 0:
        return np.zeros((n, n))
    return la.rsolve(mmbm_scale(fluct, b), mmbm_scale(fluct, a + b), "W(a+b)")


def mmbm_creeping_identity(fluct, x):
    """``|| (W'(x) + W(x) R) diag(sigma2)/2 - exp(Lambda x) ||_inf``."""
    if not fluct.model.brownian:
        raise FluidPhasePresent("creeping identity needs sigma2 > 0 in every phase")
    half_var = 0.5 * fluct.model.variance
    lhs = (mmbm_scale_derivative(fluct, x) + mmbm_scale(fluct, x) @ fluct.R) * half_var[None, :]
    return la.inf_norm(lhs - fluct.up_passage(x))


def transform_alpha(fluct, offset=1.0):
    """A real ``alpha`` strictly left of the spectrum of G."""
    return float(np.min(np.linalg.eigvals(fluct.G).real)) - offset


def check_scale_transform(fluct, alpha=None, tol=1e-8):
    """Quadrature of ``int_0^X exp(alpha x) W(x) dx`` against ``F(alpha)^{-1}``.

    ``X = 50 / gap`` where ``gap`` is the distance of ``alpha`` from the
    spectrum of G, so the neglected tail is of order ``exp(-50)``.
    """
    if alpha is None:
        alpha = transform_alpha(fluct)
    gap = float(np.min(np.linalg.eigvals(fluct.G).real)) - alpha
    if gap <= 0:
        raise ValueError("alpha must lie left of the spectrum of G")
    upper = 50.0 / gap
    integrand = lambda x: np.exp(alpha * x) * mmbm_scale(fluct, x)
    val, _ = quad_vec(integrand, 0.0, upper, epsabs=tol, epsrel=tol, limit=2000)
    target = la.inv(F_of_alpha(fluct.model, alpha), "F(alpha)")
    return la.inf_norm(val - target)


def semigroup_residual(X, x, y):
    return la.inf_norm(la.expm(X * (x + y)) - la.expm(X * x) @ la.expm(X * y))
