import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import special

from lgent.cgh import (F_MAX, HologramError, HologramMap, type1_phase, first_order_power, modulation_depth, reconstruct_first_order,
                       slm_field, synthesize_type1)
from lgent.formats import pgm_bytes, read_pgm
from lgent.lgcore import LGIndex


def test_f_max_is_first_j1_maximum():
    assert abs(F_MAX - 1.8411837813) < 1e-9


@given(st.floats(0, 1))
def test_modulation_depth_inverts_j1(a):
    f = modulation_depth(a)
    assert abs(special.j1(f) - a * special.j1(F_MAX)) < 1e-9


def test_modulation_depth_range():
    assert modulation_depth(0.0) == 0.0
    assert abs(modulation_depth(1.0) - F_MAX) < 1e-9
    with pytest.raises(HologramError):
        modulation_depth(1.5)


def test_first_order_power_monotone_in_amplitude():
    powers = [first_order_power(HologramMap(type1_phase(np.full((64, 64), a), 0.0, 8), 8.0, 8))
              for a in np.linspace(0, 1, 11)]
    assert all(b > a for a, b in zip(powers, powers[1:]))


def test_reconstruction_small_grid():
    f = slm_field([LGIndex(2, 1)], [1.0], n=256, scale_px=20)
    rep = reconstruct_first_order(synthesize_type1(f, 8))
    assert rep.overlap > 0.95


def test_rejects_bad_inputs():
    with pytest.raises(HologramError):
        synthesize_type1(np.full((8, 8), 2.0))
    with pytest.raises(HologramError):
        synthesize_type1(np.ones((8, 8)), period_px=2)


def test_pgm_roundtrip():
    phase = np.linspace(0, 2 * np.pi, 12 * 7, endpoint=False).reshape(7, 12)
    levels = read_pgm(pgm_bytes(phase))
    assert levels.shape == (7, 12)
    assert np.array_equal(levels, np.floor(phase / (2 * np.pi) * 256).astype(np.uint8))
