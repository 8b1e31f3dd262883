import numpy as np
import pytest

from mapfluct import errors, mmbm, zoo
from mapfluct.model import MmbmModel, validate

import oracles

SCALARS = [(-1.0, 2.0, 1.0), (0.5, 1.0, 0.3), (-0.3, 3.0, 2.0), (1.5, 0.7, 0.0), (-1.0, 2.0, 0.0)]


@pytest.mark.parametrize("drift,var,q", SCALARS)
def test_scalar_scale_closed_form(drift, var, q):
    f = mmbm.MmbmFluct.from_model(zoo.mmbm_scalar(drift, var, q))
    for x in (0.0, 0.01, 0.3, 1.0, 2.5, 5.0):
        exact = oracles.brownian_scale(drift, var, q, x)
        assert mmbm.mmbm_scale(f, x)[0, 0] == pytest.approx(exact, rel=1e-10, abs=1e-12)


@pytest.mark.parametrize("drift,var", [(-1.0, 2.0), (0.7, 1.0), (-2.0, 0.5)])
def test_scalar_exit_closed_form(drift, var):
    f = mmbm.MmbmFluct.from_model(zoo.mmbm_scalar(drift, var, 0.0))
    for a, b in [(1.0, 2.0), (0.5, 0.5), (2.0, 1.0)]:
        exact = oracles.brownian_exit(drift, var, a, b)
        assert mmbm.mmbm_exit(f, a, b)[0, 0] == pytest.approx(exact, abs=1e-10)


def test_scale_below_zero_and_exit_edges():
    f = mmbm.MmbmFluct.from_model(zoo.mmbm_scalar())
    assert np.all(mmbm.mmbm_scale(f, -1.0) == 0)
    assert mmbm.mmbm_exit(f, 0.0, 1.0)[0, 0] == 1.0
    assert mmbm.mmbm_exit(f, 1.0, 0.0)[0, 0] == 0.0
    with pytest.raises(ValueError):
        mmbm.mmbm_exit(f, 0.0, 0.0)


@pytest.mark.parametrize("make", [zoo.mmbm_scalar, zoo.mmbm_two_phase, zoo.mmbm_two_phase_fast])
def test_creeping_identity_small_levels(make):
    f = mmbm.MmbmFluct.from_model(make())
    for x in (0.01, 0.5, 1.0):
        assert mmbm.mmbm_creeping_identity(f, x) < 1e-8


def test_creeping_identity_far_level():
    f = mmbm.MmbmFluct.from_model(zoo.mmbm_two_phase())
    assert mmbm.mmbm_creeping_identity(f, 10.0) < 1e-8


@pytest.mark.parametrize("make", [zoo.mmbm_scalar, zoo.mmbm_two_phase, zoo.mmbm_two_phase_fast])
def test_transform_quadrature(make):
    f = mmbm.MmbmFluct.from_model(make())
    assert mmbm.check_scale_transform(f) < 1e-6


def test_transform_alpha_must_be_left():
    f = mmbm.MmbmFluct.from_model(zoo.mmbm_scalar())
    with pytest.raises(ValueError):
        mmbm.check_scale_transform(f, alpha=10.0)


def test_exit_law_bounds():
    f = mmbm.MmbmFluct.from_model(zoo.mmbm_two_phase_fast())
    for a in (0.2, 1.0, 3.0):
        for b in (0.2, 1.0, 3.0):
            D = mmbm.mmbm_exit(f, a, b)
            assert D.min() >= -1e-12 and D.sum(axis=1).max() <= 1 + 1e-12


def test_semigroups():
    f = mmbm.MmbmFluct.from_model(zoo.mmbm_two_phase())
    for X in (f.G, f.Lambda, f.R):
        assert mmbm.semigroup_residual(X, 0.4, 1.1) < 1e-10


def test_guards():
    fluid = validate(MmbmModel([0.5, -1.0], [1.0, 0.0], [[-1.0, 1.0], [1.0, -1.0]]))
    with pytest.raises(errors.FluidPhasePresent):
        mmbm.MmbmFluct.from_model(fluid)
    with pytest.raises(errors.NullRecurrent):
        mmbm.MmbmFluct.from_model(zoo.mmbm_scalar(0.0, 1.0, 0.0))
    with pytest.raises(errors.ValidationError):
        mmbm.MmbmFluct.from_model(zoo.bd(1.0, 2.0))
