import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from lgent.lgcore import LGIndex
from lgent.mub import mub_matrix
from lgent.spdc import CoefficientTensor
from lgent.tomo import (BasisMismatchError, CoincidenceRecord, EfficiencyModel, JointState, LossCorrectionError,
                        TargetState, estimate_efficiencies, loss_correct, modegroup_histogram, nominate_target,
                        probability_matrix, shift_operator, simulate_counts, stream)

MODES = [LGIndex(l, 0) for l in range(-2, 3)]


def maximal(v=1.0, **kw):
    return JointState(CoefficientTensor.maximally_entangled(MODES), v, **kw)


@given(st.floats(0, 1), st.floats(0, 0.4), st.integers(-1, 4))
@settings(max_examples=40)
def test_probabilities_sum_to_one_without_leakage(v, eps, r):
    # cross-talk can push projectors outside the basis, so the total only bounds from above
    M = mub_matrix(5, r)
    P = probability_matrix(maximal(v, eps_ell=eps), M, M)
    assert np.all(P >= -1e-15)
    assert P.sum() <= 1 + 1e-12
    if eps == 0:
        assert np.isclose(P.sum(), 1.0)


def test_maximal_state_correlated_in_every_mub():
    for r in range(-1, 5):
        M = mub_matrix(5, r)
        assert np.allclose(probability_matrix(maximal(), M, M), np.eye(5) / 5)


def test_shift_operator_drops_outside_modes():
    S = shift_operator(MODES, 1, 0)
    assert S.sum() == 4 and S[1, 0] == 1


def test_counts_deterministic_and_labelled_streams():
    a = simulate_counts(maximal(0.7), np.eye(5), np.eye(5), None, 10_000, 3)
    b = simulate_counts(maximal(0.7), np.eye(5), np.eye(5), None, 10_000, 3)
    c = simulate_counts(maximal(0.7), np.eye(5), np.eye(5), None, 10_000, 3, "x", "x")
    assert np.array_equal(a.counts, b.counts)
    assert not np.array_equal(a.counts, c.counts)
    assert stream(1, "a").random() == stream(1, "a").random()


def test_basis_mismatch():
    with pytest.raises(BasisMismatchError):
        probability_matrix(maximal(), np.eye(4), np.eye(5))


def test_record_roundtrip_and_schema():
    rec = simulate_counts(maximal(), np.eye(5), np.eye(5), None, 1000, 0, config_hash="abc")
    data = rec.to_dict()
    assert set(data) == {"schema_version", "d", "basis_s", "basis_i", "counts", "singles_s", "singles_i",
                         "pairs_budget", "seed", "config_hash"}
    back = CoincidenceRecord.from_dict(data)
    assert np.array_equal(back.counts, rec.counts)
    with pytest.raises(ValueError):
        CoincidenceRecord.from_dict({**data, "schema_version": 99})


def test_loss_correction_recovers_planted_efficiencies():
    eff = EfficiencyModel.geometric(5, 0.7)
    rec = simulate_counts(maximal(), np.eye(5), np.eye(5), eff, 10**6, 1)
    eta_s, _ = estimate_efficiencies(rec)
    assert np.allclose(eta_s, eff.signal / eff.signal.max(), rtol=1e-4)
    d = np.diag(loss_correct(rec))
    assert np.allclose(d / d.sum(), 0.2, atol=0.01)


def test_loss_correction_zero_singles():
    rec = CoincidenceRecord("standard", "standard", np.eye(2, dtype=int), [1, 0], [1, 1], 10)
    with pytest.raises(LossCorrectionError):
        loss_correct(rec)


def test_nominate_target():
    t = nominate_target(np.diag([9, 16, 0]))
    assert np.allclose(t.lam, [0.6, 0.8, 0.0])
    assert np.allclose(TargetState.uniform(4).lam, 0.5)


def test_modegroup_histogram_channels():
    modes = [LGIndex(l, p) for p in range(2) for l in range(-2, 3)]
    C = CoefficientTensor.maximally_entangled(modes)
    for eps_ell, eps_p, peak in ((0.1, 0.0, 1), (0.0, 0.1, 2)):
        st_ = JointState(C, 1.0, eps_ell, eps_p)
        P = probability_matrix(st_, np.eye(10), np.eye(10))
        h = modegroup_histogram(P, modes, off_diagonal_only=True)
        assert h[peak] > 0.9
