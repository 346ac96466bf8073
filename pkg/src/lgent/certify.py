"""Fidelity estimation and Schmidt-number certification from coincidence data.

Records are passed as a mapping from basis label to either a
:class:`CoincidenceRecord` or a raw matrix (counts or probabilities). Labels
are ``"standard"`` and ``"mub_r=<r>"``; each matrix is normalized by its own
total before use.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

import numpy as np

from .mub import is_prime
from .tomo import CoincidenceRecord, JointState, TargetState, stream


CERT_GUARD = 1e-12


class DataError(ValueError):
    pass


class UnsupportedEstimatorError(ValueError):
    pass


_MUB_LABEL = re.compile(r"^mub_r=(\d+)$")


def mub_label(r: int) -> str:
    return f"mub_r={r}"


def parse_mub_label(label: str) -> int | None:
    m = _MUB_LABEL.match(label)
    return int(m.group(1)) if m else None


def _matrix(obj) -> np.ndarray:
    if isinstance(obj, CoincidenceRecord):
        obj = obj.counts
    M = np.asarray(obj, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise DataError("expected a square count matrix")
    return M


def probabilities(obj) -> np.ndarray:
    M = _matrix(obj)
    total = M.sum()
    if total <= 0:
        raise DataError("zero total counts")
    return M / total


def p_corr(obj) -> float:
    """Fraction of coincidences on the correlated (diagonal) outcomes."""
    P = probabilities(obj)
    return float(np.trace(P))


@dataclass(frozen=True)
class FidelityEstimate:
    value: float
    stderr: float = 0.0
    method: str = "exact-complete-MUB"
    bases: tuple[str, ...] = ()
    target: str = "uniform"


def _split(records: Mapping[str, object]):
    if "standard" not in records:
        raise DataError("standard-basis record missing")
    std = records["standard"]
    mubs = {}
    for label, rec in records.items():
        r = parse_mub_label(label)
        if r is not None:
            mubs[r] = rec
    d = _matrix(std).shape[0]
    for r, rec in mubs.items():
        if _matrix(rec).shape[0] != d:
            raise DataError(f"dimension mismatch in basis {mub_label(r)}")
        if not 0 <= r < d:
            raise DataError(f"MUB index r={r} out of range for d={d}")
    return std, mubs, d


def exact_fidelity(records: Mapping[str, object]) -> FidelityEstimate:
    """Fidelity to the maximally entangled state from the standard basis and all d MUBs."""
    std, mubs, d = _split(records)
    if not is_prime(d):
        raise DataError(f"non-prime dimension d={d}")
    missing = [r for r in range(d) if r not in mubs]
    if missing:
        raise DataError(f"missing MUB records for r={missing}")
    total = p_corr(std) + sum(p_corr(mubs[r]) for r in range(d))
    value = (total - 1.0) / d
    labels = ("standard",) + tuple(mub_label(r) for r in range(d))
    return FidelityEstimate(float(value), 0.0, "exact-complete-MUB", labels)


def coherence_penalty(P: np.ndarray, rs: Sequence[int]) -> float:
    """Cauchy-Schwarz bound on the phase-averaged off-target coherences.

    Returns (1/d) sum_{delta != 0} sum_{m != n} |<eps^{2 r delta (m - n)}>_r|
    * sqrt(P[m, n] P[m + delta, n + delta]) with indices mod d.
    """
    d = P.shape[0]
    rs = np.asarray(list(rs))
    idx = np.arange(d)
    diff = (idx[:, None] - idx[None, :]) % d
    off = diff != 0
    total = 0.0
    for delta in range(1, d):
        k = np.arange(d)
        avg = np.abs(np.exp(2j * np.pi * ((2 * np.outer(rs, delta * k)) % d) / d).mean(axis=0))
        shifted = np.roll(P, (-delta, -delta), axis=(0, 1))
        total += np.sum((avg[diff] * np.sqrt(P * shifted))[off])
    return float(total / d)


def fidelity_lower_bound(records: Mapping[str, object], subset: Sequence[int] | None = None,
                         target: TargetState | None = None) -> FidelityEstimate:
    """Lower bound on the maximally-entangled fidelity from the standard basis and some MUBs.

    ``F1 = (1/d) sum_m p_mm`` is exact; the coherence term is bounded below by
    the mean MUB correlation minus 1/d minus :func:`coherence_penalty`. With all
    d MUBs (odd prime d) the penalty vanishes and the bound is exact.
    """
    if target is not None and target.source != "uniform":
        raise UnsupportedEstimatorError(
            "the MUB lower bound only supports the maximally entangled target; "
            "use the simulation oracle for tilted targets")
    std, mubs, d = _split(records)
    if d % 2 == 0:
        raise UnsupportedEstimatorError("the MUB lower bound needs an odd prime dimension; use exact_fidelity")
    rs = sorted(mubs) if subset is None else list(subset)
    if not rs:
        raise DataError("at least one MUB record is required")
    for r in rs:
        if r not in mubs:
            raise DataError(f"missing MUB record r={r}")
    P = probabilities(std)
    f1 = float(np.trace(P)) / d
    mean_corr = float(np.mean([p_corr(mubs[r]) for r in rs]))
    f2 = mean_corr - 1.0 / d - coherence_penalty(P, rs)
    value = min(1.0, max(0.0, f1 + f2))
    labels = ("standard",) + tuple(mub_label(r) for r in rs)
    return FidelityEstimate(value, 0.0, "lower-bound-k-MUB", labels)


def schmidt_rank_bound(lam, r: int) -> float:
    """Largest fidelity to the target reachable by a Schmidt-rank-r state."""
    lam = np.asarray(lam, dtype=float)
    if not 1 <= r <= lam.size:
        raise ValueError(f"Schmidt rank r={r} outside 1..{lam.size}")
    return float(np.sum(np.sort(lam**2)[::-1][:r]))


def bound_table(lam) -> dict[int, float]:
    lam = np.asarray(lam, dtype=float)
    return {r: schmidt_rank_bound(lam, r) for r in range(1, lam.size + 1)}


@dataclass(frozen=True)
class CertificationResult:
    d_ent: int
    bound: float
    margin: float
    table: dict = field(default_factory=dict)


def certify_dimension(F, lam) -> CertificationResult:
    """Certified Schmidt number: 1 + the largest r with F > B_r (B_0 = 0)."""
    value = F.value if isinstance(F, FidelityEstimate) else float(F)
    if not 0.0 <= value <= 1.0:
        raise ValueError("fidelity must lie in [0, 1]")
    table = bound_table(lam)
    r_max = 0
    for r in sorted(table):
        # guard against rounding in sum(lam**2) so ties never certify
        if value > table[r] + CERT_GUARD:
            r_max = r
    bound = 0.0 if r_max == 0 else table[r_max]
    return CertificationResult(r_max + 1, bound, value - bound, table)


def oracle_fidelity(state: JointState, target: TargetState | None = None) -> FidelityEstimate:
    """Exact fidelity of the simulated state to sum_m lam_m |mm>."""
    C = state.tensor.matrix
    d = C.shape[0]
    target = target or TargetState.uniform(d)
    overlap = np.sum(target.lam * np.diag(C))
    v = state.visibility
    value = v * abs(overlap) ** 2 + (1.0 - v) / (C.shape[0] * C.shape[1])
    return FidelityEstimate(float(value), 0.0, "oracle", (), target.source)


def resample(rec, rng: np.random.Generator):
    if isinstance(rec, CoincidenceRecord):
        return replace(rec, counts=rng.poisson(rec.counts))
    return rng.poisson(np.asarray(rec, dtype=float))


def monte_carlo_errors(records: Mapping[str, object], estimator: Callable, trials: int = 200,
                       seed: int = 0) -> tuple[float, float]:
    """Mean and std of ``estimator`` over Poisson resamplings of every count matrix."""
    if trials < 100:
        raise ValueError("at least 100 Monte Carlo trials are required")
    values = np.empty(trials)
    labels = sorted(records)
    for t in range(trials):
        rng = stream(seed, "monte-carlo", str(t))
        sample = {label: resample(records[label], rng) for label in labels}
        try:
            out = estimator(sample)
        except Exception as exc:
            raise RuntimeError(f"estimator failed in Monte Carlo trial {t}: {exc}") from exc
        values[t] = out.value if isinstance(out, FidelityEstimate) else float(out)
    return float(values.mean()), float(values.std(ddof=1))


def bound_curve(records: Mapping[str, object], ks: Sequence[int], lam=None) -> list[tuple[int, float, int]]:
    """(k, lower bound from MUBs r = 0..k-1, certified dimension) rows."""
    _, _, d = _split(records)
    lam = np.full(d, 1.0 / math.sqrt(d)) if lam is None else lam
    rows = []
    for k in ks:
        est = fidelity_lower_bound(records, list(range(k)))
        rows.append((int(k), est.value, certify_dimension(est, lam).d_ent))
    return rows
