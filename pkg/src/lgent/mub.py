"""Mutually unbiased bases relative to an LG standard basis (prime d)."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .lgcore import GridMismatchError, LGIndex, SampledField, gram_matrix


class DimensionError(ValueError):
    pass


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    k = 3
    while k * k <= n:
        if n % k == 0:
            return False
        k += 2
    return True


def _check_prime(d: int):
    if not is_prime(int(d)):
        raise DimensionError(f"non-prime dimension d={d}: complete MUB sets are only built for prime d")


def _roots(d: int) -> np.ndarray:
    return np.exp(2j * np.pi * np.arange(d) / d)


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray
    r: int | None = None
    j: int | None = None
    modes: tuple[LGIndex, ...] | None = None

    def __post_init__(self):
        a = np.asarray(self.amplitudes, dtype=complex)
        nrm = np.linalg.norm(a)
        if nrm == 0:
            raise ValueError("zero state vector")
        object.__setattr__(self, "amplitudes", a / nrm)

    @property
    def dim(self) -> int:
        return self.amplitudes.size


def _mub_phases(d: int, r: int, m, j):
    # eps**(j m + r m**2); for d = 2 the quadratic term needs fourth roots of unity
    if d == 2:
        return _roots(4)[(2 * j * m + r * m * m) % 4]
    return _roots(d)[(j * m + r * m * m) % d]


def mub_state(d: int, r: int, j: int, modes=None) -> StateVector:
    """Element j of MUB r: amplitudes eps**(j m + r m**2) / sqrt(d)."""
    _check_prime(d)
    if not (0 <= r < d and 0 <= j < d):
        raise IndexError(f"basis index r={r} and element j={j} must lie in 0..{d - 1}")
    amps = _mub_phases(d, r, np.arange(d), j) / math.sqrt(d)
    return StateVector(amps, r, j, None if modes is None else tuple(modes))


def mub_matrix(d: int, r: int) -> np.ndarray:
    """Columns are the d elements of MUB r (r = -1 gives the standard basis)."""
    if r < 0:
        return np.eye(d, dtype=complex)
    _check_prime(d)
    return _mub_phases(d, r, np.arange(d)[:, None], np.arange(d)[None, :]) / math.sqrt(d)


@dataclass(frozen=True, eq=False)
class MUBFamily:
    d: int
    bases: list = field(repr=False)
    labels: list = field(repr=False)

    def matrices(self) -> list[np.ndarray]:
        return [np.stack([v.amplitudes for v in b], axis=1) for b in self.bases]

    def max_orthonormality_error(self) -> float:
        eye = np.eye(self.d)
        return max(float(np.abs(M.conj().T @ M - eye).max()) for M in self.matrices())

    def max_unbiasedness_error(self) -> float:
        mats = self.matrices()
        worst = 0.0
        for a in range(len(mats)):
            for b in range(a + 1, len(mats)):
                ov = np.abs(mats[a].conj().T @ mats[b]) ** 2
                worst = max(worst, float(np.abs(ov - 1.0 / self.d).max()))
        return worst


def mub_family(d: int, modes=None) -> MUBFamily:
    """Standard basis plus the d MUBs r = 0..d-1."""
    _check_prime(d)
    eye = np.eye(d, dtype=complex)
    bases = [[StateVector(eye[m], None, m, modes) for m in range(d)]]
    labels = ["standard"]
    for r in range(d):
        M = mub_matrix(d, r)
        bases.append([StateVector(M[:, j], r, j, modes) for j in range(d)])
        labels.append(f"mub_r={r}")
    return MUBFamily(d, bases, labels)


@dataclass(frozen=True, eq=False)
class TiltedFamily:
    """Schmidt-weighted analogues of the MUBs. Vectors are projectors, not bases."""

    lam: np.ndarray
    bases: list = field(repr=False)

    @property
    def d(self) -> int:
        return self.lam.size

    def matrix(self, r: int) -> np.ndarray:
        return np.stack([v.amplitudes for v in self.bases[r]], axis=1)


def tilted_family(lam: Sequence[float], d: int | None = None, tol: float = 1e-9) -> TiltedFamily:
    """Vectors proportional to sum_m lam_m eps**(j m + r m**2) |m>."""
    lam = np.asarray(lam, dtype=float)
    d = lam.size if d is None else d
    if lam.size != d:
        raise ValueError(f"Schmidt vector has length {lam.size}, expected {d}")
    if np.any(lam < 0):
        raise ValueError("Schmidt coefficients must be non-negative")
    if abs(np.sum(lam**2) - 1.0) > tol:
        raise ValueError(f"Schmidt vector is not normalized (sum of squares {np.sum(lam**2):.6g})")
    _check_prime(d)
    bases = []
    for r in range(d):
        M = mub_matrix(d, r) * math.sqrt(d) * lam[:, None]
        bases.append([StateVector(M[:, j], r, j) for j in range(d)])
    return TiltedFamily(lam, bases)


@dataclass(frozen=True, eq=False)
class OverlapMatrix:
    values: np.ndarray
    row_label: str = ""
    col_label: str = ""

    def max_off_diagonal(self) -> float:
        v = self.values
        return float(np.abs(v - np.diag(np.diag(v))).max())


def phase_only(f: SampledField) -> SampledField:
    """Unit-amplitude field carrying the phase of ``f`` on the quadrature domain, renormalized."""
    vals = np.exp(1j * np.angle(f.values))
    return SampledField(vals, f.grid, f.waist, False, f.label).normalize()


def phase_only_overlaps(modes: Sequence[SampledField], others: Sequence[SampledField] | None = None,
                        row_label: str = "phase-only", col_label: str | None = None) -> OverlapMatrix:
    """|<a|b>|**2 between phase-only versions of ``modes`` (and ``others`` if given)."""
    grid = modes[0].grid
    for f in list(modes) + list(others or []):
        if f.grid != grid:
            raise GridMismatchError("fields live on different grids")
    a = [phase_only(f) for f in modes]
    if others is None:
        return OverlapMatrix(np.abs(gram_matrix(a)) ** 2, row_label, row_label)
    b = [phase_only(f) for f in others]
    return OverlapMatrix(cross_overlaps(a, b), row_label, col_label or row_label)


def cross_overlaps(a: Sequence[SampledField], b: Sequence[SampledField]) -> np.ndarray:
    wts = a[0].grid.weights.ravel()
    A = np.stack([f.values.ravel() for f in a])
    B = np.stack([f.values.ravel() for f in b])
    return np.abs((np.conj(A) * wts) @ B.T) ** 2


def family_to_dict(fam: MUBFamily) -> dict:
    return {
        "d": fam.d,
        "labels": fam.labels,
        "bases": [
            [{"re": v.amplitudes.real.tolist(), "im": v.amplitudes.imag.tolist()} for v in basis]
            for basis in fam.bases
        ],
    }
