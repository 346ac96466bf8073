import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import special

from lgent.lgcore import (BasisSpec, GridMismatchError, LGIndex, SampledField, TransverseGrid, assoc_laguerre,
                          enumerate_basis, gauss_legendre, gram_matrix, inner_product, lg_amplitude, max_mode_group,
                          mode_group, radial_profile, sample_mode, superpose)


def test_index_validation():
    with pytest.raises(ValueError):
        LGIndex(0, -1)
    assert LGIndex(-2, 1) < LGIndex(0, 0)
    assert mode_group(LGIndex(-3, 2)) == 8


@given(st.integers(0, 12), st.integers(0, 10), st.floats(0, 60))
def test_laguerre_matches_scipy(p, alpha, x):
    ref = special.eval_genlaguerre(p, alpha, x)
    assert np.isclose(assoc_laguerre(p, alpha, x), ref, rtol=1e-9, atol=1e-9 * max(1.0, abs(ref)))


def test_laguerre_against_mpmath():
    mpmath = pytest.importorskip("mpmath")
    for p, a, x in [(4, 3, 7.5), (9, 0, 20.0), (2, 8, 0.3)]:
        assert math.isclose(assoc_laguerre(p, a, x), float(mpmath.laguerre(p, a, x)), rel_tol=1e-12)


def test_gauss_legendre_polynomial_exact():
    x, w = gauss_legendre(10, 0.0, 2.0)
    assert math.isclose(np.sum(w * x**19), 2.0**20 / 20, rel_tol=1e-12)


@given(st.integers(-6, 6), st.integers(0, 4))
@settings(max_examples=25, deadline=None)
def test_radial_normalization(ell, p):
    idx = LGIndex(ell, p)
    rho, w = gauss_legendre(400, 0.0, 12.0)
    prof = radial_profile(idx, 1.3, rho)
    assert math.isclose(2 * np.pi * np.sum(w * rho * prof**2), 1.0, rel_tol=1e-10)


def test_amplitude_carries_vortex_phase():
    idx = LGIndex(3, 1)
    a0 = lg_amplitude(idx, 1.0, 0.8, 0.0)
    a1 = lg_amplitude(idx, 1.0, 0.8, 0.4)
    assert np.isclose(a1 / a0, np.exp(1.2j))


def test_small_gram_orthonormal():
    modes = enumerate_basis(BasisSpec.azimuthal(-2, 2))
    g = TransverseGrid.for_modes(1.0, max_mode_group(modes), 96, 64)
    G = gram_matrix([sample_mode(m, 1.0, g) for m in modes])
    assert np.abs(G - np.eye(5)).max() < 1e-10


def test_grid_mismatch_rejected():
    m = LGIndex(0, 0)
    a = sample_mode(m, 1.0, TransverseGrid.for_modes(1.0, 2, 32, 32))
    b = sample_mode(m, 1.0, TransverseGrid.for_modes(1.0, 2, 48, 32))
    with pytest.raises(GridMismatchError):
        inner_product(a, b)


def test_superpose_is_linear():
    g = TransverseGrid.for_modes(1.0, 3, 64, 64)
    f = superpose([1.0, 1j], [sample_mode(LGIndex(1, 0), 1.0, g), sample_mode(LGIndex(-1, 0), 1.0, g)])
    assert isinstance(f, SampledField)
    assert math.isclose(f.norm(), math.sqrt(2), rel_tol=1e-10)
    assert math.isclose(f.normalize().norm(), 1.0, rel_tol=1e-12)


def test_fullfield_43_drops_tail_mode():
    modes = enumerate_basis(BasisSpec.fullfield((-8, 7), (0, 4), 43))
    assert len(modes) == 43 and len(set(modes)) == 43
    assert LGIndex(-8, 0) not in modes
    assert max(mode_group(m) for m in modes) <= 9


def test_fullfield_23_tail_rule():
    modes = enumerate_basis(BasisSpec.fullfield((-6, 5), (0, 2), 23))
    for gone in [LGIndex(-6, 0), LGIndex(-4, 1), LGIndex(-2, 2)]:
        assert gone not in modes
    assert len(modes) == 23


def test_basis_spec_roundtrip():
    spec = BasisSpec.fullfield((-8, 7), (0, 4), 43)
    assert enumerate_basis(BasisSpec.from_dict(spec.to_dict())) == enumerate_basis(spec)


def test_radial_and_azimuthal_kinds():
    assert enumerate_basis(BasisSpec.radial(4)) == [LGIndex(0, p) for p in range(5)]
    assert [m.ell for m in enumerate_basis(BasisSpec.azimuthal(-6, 6))] == list(range(-6, 7))
