import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from mapfluct import errors, io, model as mdl
from mapfluct.model import LatticeModel, MmbmModel, birth_death, drift_and_pi, validate


def lattice_doc(blocks, **extra):
    return {"type": "lattice", "phases": len(blocks["0"]), "blocks": blocks, **extra}


BD12 = lattice_doc({"-1": [[2.0]], "0": [[-3.0]], "1": [[1.0]]})


def test_birth_death_regimes():
    assert drift_and_pi(validate(birth_death(1, 2))).tag == mdl.C1_NEG
    assert drift_and_pi(validate(birth_death(2, 1))).tag == mdl.C2_POS
    assert drift_and_pi(validate(birth_death(1, 1))).tag == mdl.C1_ZERO
    assert drift_and_pi(validate(birth_death(1, 2, 0.5))).tag == mdl.C2_DEF


def test_drift_value():
    assert drift_and_pi(validate(birth_death(1, 2))).mu == pytest.approx(-1.0)


def test_document_round_trip():
    m = validate(BD12)
    again = io.model_from_dict(io.model_to_dict(m))
    for a, b in zip(m.blocks, again.blocks):
        np.testing.assert_array_equal(a, b)


def test_extra_killing_is_added():
    m = validate(lattice_doc({"-1": [[2.0]], "0": [[-3.0]], "1": [[1.0]]}, extra_killing=[0.5]))
    assert m.kill_rates[0] == pytest.approx(0.5)


@pytest.mark.parametrize("doc, err", [
    (lattice_doc({"-1": [[-2.0]], "0": [[-1.0]], "1": [[1.0]]}), errors.NegativeRate),
    (lattice_doc({"-1": [[2.0]], "0": [[0.0]], "1": [[1.0]]}), errors.BadDiagonal),
    (lattice_doc({"-1": [[2.0]], "0": [[-2.5]], "1": [[1.0]]}), errors.RowSumExceedsZero),
    (lattice_doc({"-1": [[1.0, 0], [0, 1.0]], "0": [[-2.0, 0], [0, -2.0]],
                  "1": [[1.0, 0], [0, 1.0]]}), errors.ReducibleGenerator),
    (lattice_doc({"-1": [[0.0, 0], [0, 0.0]], "0": [[-1.0, 1.0], [1.0, -1.0]]}),
     errors.ReducibleChain),
    ({"type": "lattice", "phases": 1, "blocks": {"0": [[-1.0]], "-1": [[1.0]]}, "bogus": 1},
     errors.ModelFormatError),
    ({"type": "queue"}, errors.ModelFormatError),
    ({"type": "mmbm", "phases": 1, "drift": [1.0], "sigma2": [0.0], "Q": [[0.0]]},
     errors.SubordinatorPhase),
    ({"type": "mmbm", "phases": 1, "drift": [1.0], "sigma2": [-1.0], "Q": [[0.0]]},
     errors.NegativeRate),
])
def test_validation_errors(doc, err):
    with pytest.raises(err):
        validate(doc)


def test_non_strict_accepts_pure_death():
    pure_death = LatticeModel((np.array([[1.0]]), np.array([[-1.0]])))
    with pytest.raises(errors.ReducibleChain):
        validate(pure_death)
    assert validate(pure_death, strict=False) is pure_death


def test_load_model_hash(tmp_path):
    p = tmp_path / "m.json"
    p.write_text(json.dumps(BD12))
    m, digest = io.load_model(p)
    assert len(digest) == 64 and m.n_phases == 1


def test_F_rejects_zero():
    with pytest.raises(errors.ZeroArgument):
        mdl.F_of_z(validate(birth_death(1, 2)), 0.0)


def test_F_scalar():
    # F(z) = 2 - 3z + z^2 for BD(1, 2)
    m = validate(birth_death(1, 2))
    for z in (0.3, 1.5, -2.0):
        assert mdl.F_of_z(m, z)[0, 0] == pytest.approx(2 - 3 * z + z * z)


def test_reverse_is_involution(random_models):
    m = random_models[3]
    rr = mdl.reverse(mdl.reverse(m))
    for a, b in zip(m.blocks, rr.blocks):
        np.testing.assert_allclose(a, b, atol=1e-12)


def test_mmbm_negated():
    m = validate(MmbmModel([-1.0, 0.5], [1.0, 2.0], [[-1, 1], [2, -2]]))
    np.testing.assert_array_equal(m.negated().drift, [1.0, -0.5])


@given(st.floats(allow_nan=False, allow_infinity=False))
def test_float_format_round_trips(x):
    assert float(io.fmt_float(x)) == x


def test_dumps_is_valid_json():
    text = io.dumps({"a": np.array([[1.0, 1 / 3]]), "b": 3, "c": None})
    back = json.loads(text)
    assert back["a"][0][1] == 1 / 3 and back["b"] == 3
