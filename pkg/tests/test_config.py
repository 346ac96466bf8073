import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lgent.config import ConfigError, from_dict, parse_config, serialize
from lgent.formats import (csv_bytes, modes_csv, read_modes_csv, read_record, record_json, tensor_from_dict,
                           tensor_to_dict)
from lgent.lgcore import BasisSpec, LGIndex, enumerate_basis
from lgent.spdc import CoefficientTensor
from lgent.tomo import simulate_counts, JointState


def test_minimal_config_derives_gamma():
    doc = parse_config('{"optics": {"pump_wavelength_nm": 775, "wavelength_nm": 1550, "pump_waist_um": 450}}')
    rep = doc.optics_report()
    assert rep["collection_width_source"] == "derived"
    assert abs(rep["gamma"] - 5.26) < 1e-9


def test_given_width_is_tagged_input():
    doc = from_dict({"optics": {"collection_width_um": 199.6496}})
    assert doc.optics_report()["collection_width_source"] == "input"
    assert abs(doc.optics.gamma - 5.26) < 1e-3


@pytest.mark.parametrize("raw, pointer", [
    ({"optics": {"pump_waist_um": -3}}, "/optics/pump_waist_um"),
    ({"bogus": 1}, ""),
    ({"noise": {"visibility": 2}}, "/noise/visibility"),
    ({"certification": {"trials": 5}}, "/certification/trials"),
])
def test_errors_carry_pointer(raw, pointer):
    with pytest.raises(ConfigError) as exc:
        from_dict(raw)
    assert exc.value.pointer == pointer


def test_bad_json():
    with pytest.raises(ConfigError):
        parse_config("{nope")


@given(st.floats(0, 1), st.integers(0, 2**31))
@settings(max_examples=30)
def test_serialize_idempotent(v, seed):
    doc = from_dict({"noise": {"visibility": v}, "seed": seed})
    once = serialize(doc)
    assert serialize(parse_config(once)) == once


def test_modes_csv_roundtrip():
    modes = enumerate_basis(BasisSpec.fullfield((-3, 3), (0, 1)))
    assert read_modes_csv(modes_csv(modes).decode()) == modes


def test_tensor_and_record_roundtrip(tmp_path):
    modes = [LGIndex(l, 0) for l in range(3)]
    t = CoefficientTensor(tuple(modes), tuple(modes), np.array([[1, 0.2j, 0], [0, 1, 0], [0, 0, 0.5]]))
    back = tensor_from_dict(json.loads(json.dumps(tensor_to_dict(t))))
    assert np.allclose(back.matrix, t.matrix)
    rec = simulate_counts(JointState(t), np.eye(3), np.eye(3), None, 100, 0)
    path = tmp_path / "r.json"
    path.write_bytes(record_json(rec))
    assert np.array_equal(read_record(path).counts, rec.counts)


def test_csv_float_repr():
    assert csv_bytes(("x",), [(0.1,)]) == b"x\n0.1\n"
