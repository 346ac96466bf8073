"""Projective two-photon measurement simulation and count post-processing."""
from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .lgcore import LGIndex, mode_group
from .mub import StateVector
from .spdc import CoefficientTensor

SCHEMA_VERSION = 1


class BasisMismatchError(ValueError):
    pass


class LossCorrectionError(ValueError):
    def __init__(self, message, modes=()):
        super().__init__(message)
        self.modes = tuple(modes)


@dataclass(frozen=True, eq=False)
class JointState:
    """Pure biphoton tensor mixed with white noise, plus measurement cross-talk.

    The state is ``v |psi><psi| + (1 - v) I / d**2``. Cross-talk is applied on
    the projector side of each arm: with probability ``eps_ell`` the projector
    is displaced by ell -> ell +/- 1, with probability ``eps_p`` by p -> p +/- 1.
    """

    tensor: CoefficientTensor
    visibility: float = 1.0
    eps_ell: float = 0.0
    eps_p: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.visibility <= 1.0:
            raise ValueError("visibility must lie in [0, 1]")
        for name in ("eps_ell", "eps_p"):
            v = getattr(self, name)
            if not 0.0 <= v < 1.0:
                raise ValueError(f"{name} must lie in [0, 1)")
        if self.eps_ell + self.eps_p >= 1.0:
            raise ValueError("total cross-talk probability must be below 1")

    @property
    def dims(self):
        return self.tensor.matrix.shape

    def channel(self):
        """(weight, d_ell, d_p) displacement terms of the per-arm cross-talk channel."""
        terms = [(1.0 - self.eps_ell - self.eps_p, 0, 0)]
        if self.eps_ell:
            terms += [(self.eps_ell / 2, 1, 0), (self.eps_ell / 2, -1, 0)]
        if self.eps_p:
            terms += [(self.eps_p / 2, 0, 1), (self.eps_p / 2, 0, -1)]
        return terms


def shift_operator(modes: Sequence[LGIndex], d_ell: int, d_p: int) -> np.ndarray:
    """Maps |ell, p> to |ell + d_ell, p + d_p>; components leaving the basis are lost."""
    pos = {m: k for k, m in enumerate(modes)}
    S = np.zeros((len(modes), len(modes)))
    for k, m in enumerate(modes):
        if m.p + d_p < 0:
            continue
        tgt = pos.get(LGIndex(m.ell + d_ell, m.p + d_p))
        if tgt is not None:
            S[tgt, k] = 1.0
    return S


def _as_columns(proj, n):
    if isinstance(proj, StateVector):
        a = proj.amplitudes[:, None]
    else:
        a = np.asarray(proj, dtype=complex)
        if a.ndim == 1:
            a = a[:, None]
    if a.shape[0] != n:
        raise BasisMismatchError(f"projector length {a.shape[0]} does not match state dimension {n}")
    return a


def probability_matrix(state: JointState, A, B) -> np.ndarray:
    """P[j, k] for signal projector columns A[:, j] and idler projector columns B[:, k].

    Idler projectors are conjugated, so correlated outcomes of a maximally
    entangled state sit on the diagonal in every MUB.
    """
    C = state.tensor.matrix
    ds, di = C.shape
    A = _as_columns(A, ds)
    B = _as_columns(B, di)
    v = state.visibility
    P = np.zeros((A.shape[1], B.shape[1]))
    terms = state.channel()
    sig_shift = [(w, shift_operator(state.tensor.signal_modes, a, b) @ A if (a or b) else A) for w, a, b in terms]
    idl_shift = [(w, shift_operator(state.tensor.idler_modes, a, b) @ B if (a or b) else B) for w, a, b in terms]
    for ws, As in sig_shift:
        na = np.sum(np.abs(As) ** 2, axis=0)
        for wi, Bs in idl_shift:
            nb = np.sum(np.abs(Bs) ** 2, axis=0)
            amp = As.conj().T @ C @ Bs
            P += ws * wi * (v * np.abs(amp) ** 2 + (1.0 - v) * np.outer(na, nb) / (ds * di))
    return P


def born_probability(state: JointState, proj_s, proj_i) -> float:
    return float(probability_matrix(state, proj_s, proj_i)[0, 0])


@dataclass(frozen=True)
class EfficiencyModel:
    signal: np.ndarray
    idler: np.ndarray

    def __post_init__(self):
        for name in ("signal", "idler"):
            a = np.asarray(getattr(self, name), dtype=float)
            if np.any(a <= 0) or np.any(a > 1) or not np.all(np.isfinite(a)):
                raise ValueError(f"{name} efficiencies must lie in (0, 1]")
            object.__setattr__(self, name, a)

    @classmethod
    def uniform(cls, d: int):
        return cls(np.ones(d), np.ones(d))

    @classmethod
    def geometric(cls, d: int, ratio: float):
        eta = ratio ** np.arange(d)
        return cls(eta, eta.copy())


@dataclass(frozen=True, eq=False)
class CoincidenceRecord:
    basis_s: str
    basis_i: str
    counts: np.ndarray
    singles_s: np.ndarray
    singles_i: np.ndarray
    pairs_budget: int
    seed: int | None = None
    config_hash: str = ""

    def __post_init__(self):
        N = np.asarray(self.counts)
        if N.ndim != 2:
            raise ValueError("count matrix must be 2-D")
        if np.any(N < 0) or not np.all(np.equal(np.mod(N, 1), 0)):
            raise ValueError("counts must be non-negative integers")
        object.__setattr__(self, "counts", N.astype(np.int64))
        object.__setattr__(self, "singles_s", np.asarray(self.singles_s, dtype=np.int64))
        object.__setattr__(self, "singles_i", np.asarray(self.singles_i, dtype=np.int64))
        if self.singles_s.shape != (N.shape[0],) or self.singles_i.shape != (N.shape[1],):
            raise ValueError("singles vectors do not match the count matrix")

    @property
    def d(self) -> int:
        return self.counts.shape[0]

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "d": self.d,
            "basis_s": self.basis_s,
            "basis_i": self.basis_i,
            "counts": self.counts.tolist(),
            "singles_s": self.singles_s.tolist(),
            "singles_i": self.singles_i.tolist(),
            "pairs_budget": int(self.pairs_budget),
            "seed": self.seed,
            "config_hash": self.config_hash,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CoincidenceRecord":
        if data.get("schema_version") != SCHEMA_VERSION:
            raise ValueError(f"unsupported coincidence schema version {data.get('schema_version')!r}")
        counts = np.asarray(data["counts"])
        if counts.ndim != 2 or counts.shape[0] != data["d"]:
            raise ValueError("count matrix does not match declared dimension d")
        return cls(data["basis_s"], data["basis_i"], counts, data["singles_s"], data["singles_i"],
                   data["pairs_budget"], data.get("seed"), data.get("config_hash", ""))


def stream(seed: int, *labels: str) -> np.random.Generator:
    """Counter-based random stream keyed by the seed and a set of labels."""
    digest = hashlib.sha256("\x1f".join(labels).encode()).digest()
    key = [int(seed)] + [int.from_bytes(digest[k:k + 4], "little") for k in range(0, 16, 4)]
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(key)))


def simulate_counts(state: JointState, basis_s, basis_i, eff: EfficiencyModel | None, pairs_budget: int,
                    seed: int, label_s: str = "standard", label_i: str = "standard",
                    config_hash: str = "") -> CoincidenceRecord:
    """Poisson coincidence counts with mean budget * p_mn * eta_s[m] * eta_i[n].

    Singles are the deterministic expectation budget * eta * marginal, since
    only their ratios are used downstream.
    """
    if pairs_budget <= 0:
        raise ValueError("pairs budget must be positive")
    P = probability_matrix(state, basis_s, basis_i)
    if eff is None:
        eff = EfficiencyModel.uniform(P.shape[0]) if P.shape[0] == P.shape[1] else EfficiencyModel(
            np.ones(P.shape[0]), np.ones(P.shape[1]))
    if eff.signal.shape != (P.shape[0],) or eff.idler.shape != (P.shape[1],):
        raise BasisMismatchError("efficiency vectors do not match the measured bases")
    lam = pairs_budget * P * np.outer(eff.signal, eff.idler)
    N = stream(seed, label_s, label_i).poisson(lam)
    singles_s = np.rint(pairs_budget * eff.signal * P.sum(axis=1))
    singles_i = np.rint(pairs_budget * eff.idler * P.sum(axis=0))
    return CoincidenceRecord(label_s, label_i, N, singles_s, singles_i, int(pairs_budget), seed, config_hash)


def estimate_efficiencies(rec: CoincidenceRecord):
    s = rec.singles_s.astype(float)
    i = rec.singles_i.astype(float)
    bad = [("signal", k) for k in np.flatnonzero(s <= 0)] + [("idler", k) for k in np.flatnonzero(i <= 0)]
    if bad:
        raise LossCorrectionError(f"zero singles, cannot correct modes {bad}", bad)
    return s / s.max(), i / i.max()


def loss_correct(rec: CoincidenceRecord) -> np.ndarray:
    """Divide out relative detection efficiencies inferred from the singles."""
    eta_s, eta_i = estimate_efficiencies(rec)
    return rec.counts / np.outer(eta_s, eta_i)


@dataclass(frozen=True)
class TargetState:
    lam: np.ndarray
    source: str = "uniform"

    def __post_init__(self):
        lam = np.asarray(self.lam, dtype=float)
        if np.any(lam < 0):
            raise ValueError("target coefficients must be non-negative")
        if abs(np.sum(lam**2) - 1.0) > 1e-12:
            raise ValueError("target coefficients must be normalized")
        object.__setattr__(self, "lam", lam)

    @classmethod
    def uniform(cls, d: int):
        return cls(np.full(d, 1.0 / math.sqrt(d)), "uniform")

    @property
    def d(self) -> int:
        return self.lam.size


def nominate_target(counts) -> TargetState:
    """Target Schmidt coefficients from the standard-basis diagonal, sqrt(N_mm / sum N_nn)."""
    diag = np.diag(np.asarray(counts, dtype=float)).copy()
    if np.any(diag < 0):
        raise ValueError("negative diagonal counts")
    total = diag.sum()
    if total <= 0:
        raise ValueError("all-zero diagonal, cannot nominate a target")
    lam = np.sqrt(diag / total)
    return TargetState(lam / np.linalg.norm(lam), "nominated")


def modegroup_histogram(counts, modes_s: Sequence[LGIndex], modes_i: Sequence[LGIndex] | None = None,
                        off_diagonal_only: bool = False) -> dict[int, float]:
    """Normalized coincidence mass binned by |MG(m) - MG(n)|."""
    if isinstance(counts, CoincidenceRecord):
        counts = counts.counts
    N = np.asarray(counts, dtype=float)
    modes_i = modes_s if modes_i is None else modes_i
    if N.shape != (len(modes_s), len(modes_i)):
        raise BasisMismatchError("count matrix does not match the mode lists")
    mg_s = np.array([mode_group(m) for m in modes_s])
    mg_i = np.array([mode_group(m) for m in modes_i])
    dmg = np.abs(mg_s[:, None] - mg_i[None, :])
    mask = np.ones_like(N, dtype=bool)
    if off_diagonal_only:
        same = np.array([[a == b for b in modes_i] for a in modes_s])
        mask &= ~same
    total = N[mask].sum()
    hist = {}
    for k in np.unique(dmg):
        sel = mask & (dmg == k)
        hist[int(k)] = float(N[sel].sum() / total) if total > 0 else 0.0
    return hist
