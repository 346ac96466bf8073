import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from lgent.lgcore import BasisSpec, LGIndex, enumerate_basis
from lgent.spdc import (CoefficientTensor, OpticsConfig, QuadratureError, collected_jtma, diag_fraction_of, jtma,
                        lg_coefficients, monte_carlo_coefficients, schmidt_analysis, sweep_gamma)

RADIAL = enumerate_basis(BasisSpec.radial(4))


def test_default_optics_gamma():
    cfg = OpticsConfig()
    assert abs(cfg.gamma - 5.26) < 1e-3
    assert math.isclose(cfg.sigma_p, math.sqrt(2) / 450.0)
    w = OpticsConfig.collection_width_for_gamma(5.26, 450.0, 3.3)
    assert math.isclose(OpticsConfig(collection_width_um=w).gamma, 5.26, rel_tol=1e-12)


@given(st.floats(0.5, 12.0))
def test_with_gamma_roundtrip(g):
    assert math.isclose(OpticsConfig().with_gamma(g).gamma, g, rel_tol=1e-12)


def test_invalid_optics():
    with pytest.raises(ValueError):
        OpticsConfig(pump_waist_um=-1.0)


def test_jtma_symmetric_under_exchange():
    rng = np.random.default_rng(3)
    ks, ki = rng.normal(0, 0.01, (2, 50, 2))
    cfg = OpticsConfig()
    assert np.allclose(jtma(ks, ki, cfg), jtma(ki, ks, cfg))
    assert np.all(np.abs(collected_jtma(ks, ki, cfg)) <= np.abs(jtma(ks, ki, cfg)) + 1e-15)


def test_tensor_normalized_and_selection_rule():
    modes = enumerate_basis(BasisSpec.fullfield((-2, 2), (0, 1)))
    t = lg_coefficients(OpticsConfig(), modes, modes)
    assert math.isclose(np.sum(t.probabilities()), 1.0, rel_tol=1e-12)
    for a, ms in enumerate(modes):
        for b, mi in enumerate(modes):
            if ms.ell != mi.ell:
                assert t.matrix[a, b] == 0.0
    assert t.residual < 1e-6


def test_radial_correlations_improve_with_gamma():
    cfg = OpticsConfig()
    lo = lg_coefficients(cfg.with_gamma(1.0), RADIAL, RADIAL).diag_fraction()
    hi = lg_coefficients(cfg.with_gamma(5.26), RADIAL, RADIAL).diag_fraction()
    assert hi > lo


def test_large_pump_limit_is_diagonal():
    cfg = OpticsConfig(pump_waist_um=4000.0, phase_matching_width=10.0).with_gamma(40.0)
    t = lg_coefficients(cfg, RADIAL, RADIAL, check=False)
    assert t.diag_fraction() > 0.995


def test_surrogate_close_to_sinc():
    cfg = OpticsConfig()
    a = lg_coefficients(cfg, RADIAL, RADIAL).diag_fraction()
    b = lg_coefficients(cfg, RADIAL, RADIAL, surrogate=True).diag_fraction()
    assert abs(a - b) < 0.02


def test_underresolved_quadrature_raises():
    with pytest.raises(QuadratureError):
        lg_coefficients(OpticsConfig(), RADIAL, RADIAL, n_rho=12, n_dphi=16)


def test_monte_carlo_agrees_with_quadrature():
    cfg = OpticsConfig().with_gamma(2.0)
    q = lg_coefficients(cfg, RADIAL, RADIAL)
    mc = monte_carlo_coefficients(cfg, RADIAL, RADIAL, n_samples=400_000, seed=5)
    f, se = mc.jackknife(diag_fraction_of)
    assert abs(f - q.diag_fraction()) < 4 * se


def test_schmidt_of_maximal_state():
    modes = [LGIndex(l, 0) for l in range(-2, 3)]
    rep = schmidt_analysis(CoefficientTensor.maximally_entangled(modes))
    assert math.isclose(rep.schmidt_number, 5.0, rel_tol=1e-12)
    lam = np.array([0.8, 0.6, 0.0, 0.0, 0.0])
    rep = schmidt_analysis(CoefficientTensor.from_schmidt(modes, lam))
    assert math.isclose(rep.schmidt_number, 1 / np.sum(lam**4), rel_tol=1e-12)


def test_sweep_rows():
    rows = sweep_gamma(OpticsConfig(), [1.0, 2.0], RADIAL)
    assert [r.gamma for r in rows] == [1.0, 2.0]
    assert rows[1].diag_fraction > rows[0].diag_fraction
