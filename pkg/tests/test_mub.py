import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lgent.lgcore import BasisSpec, TransverseGrid, enumerate_basis, max_mode_group, sample_mode
from lgent.mub import (DimensionError, is_prime, mub_family, mub_matrix, mub_state, phase_only, phase_only_overlaps,
                       tilted_family)

PRIMES = [2, 3, 5, 7, 11, 13]


def test_is_prime():
    assert [n for n in range(20) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19]


def test_non_prime_rejected():
    with pytest.raises(DimensionError, match="d=6"):
        mub_family(6)


def test_state_index_range():
    with pytest.raises(IndexError):
        mub_state(5, 5, 0)


@given(st.sampled_from(PRIMES), st.data())
def test_state_matches_matrix_column(d, data):
    r = data.draw(st.integers(0, d - 1))
    j = data.draw(st.integers(0, d - 1))
    assert np.allclose(mub_state(d, r, j).amplitudes, mub_matrix(d, r)[:, j])


def test_qubit_family_is_pauli_eigenbases():
    fam = mub_family(2)
    assert fam.max_unbiasedness_error() < 1e-12
    y = mub_matrix(2, 1)[:, 0] * math.sqrt(2)
    assert np.allclose(y, [1, 1j])


def test_tilted_uniform_reduces_to_mub():
    d = 5
    tf = tilted_family(np.full(d, d**-0.5))
    for r in range(d):
        assert np.abs(tf.matrix(r) - mub_matrix(d, r)).max() < 1e-12


def test_tilted_degenerate_and_small_case():
    tf = tilted_family([1.0, 0.0, 0.0])
    assert np.allclose(np.abs(tf.matrix(1)[0]), 1.0)
    tf = tilted_family([2 / math.sqrt(5), 1 / math.sqrt(5)])
    assert np.allclose(tf.matrix(0)[:, 0], np.array([2, 1]) / math.sqrt(5))


def test_tilted_rejects_unnormalized():
    with pytest.raises(ValueError):
        tilted_family([1.0, 1.0, 1.0])


@given(st.lists(st.floats(0.05, 1.0), min_size=3, max_size=3))
@settings(max_examples=30)
def test_tilted_vectors_normalized(raw):
    lam = np.asarray(raw) / np.linalg.norm(raw)
    tf = tilted_family(lam)
    for r in range(3):
        assert np.allclose(np.linalg.norm(tf.matrix(r), axis=0), 1.0)


def test_phase_only_fields_unit_norm():
    modes = enumerate_basis(BasisSpec.radial(2))
    g = TransverseGrid.for_modes(1.0, max_mode_group(modes), 64, 32)
    po = phase_only(sample_mode(modes[1], 1.0, g))
    assert math.isclose(po.norm(), 1.0, rel_tol=1e-12)
    ov = phase_only_overlaps([sample_mode(m, 1.0, g) for m in modes])
    assert np.allclose(np.diag(ov.values), 1.0, atol=1e-9)
