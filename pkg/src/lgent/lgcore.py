"""Laguerre-Gaussian modes in transverse momentum space.

Modes are evaluated at z = 0 with momentum ``rho`` in rad/um and waist ``w``
in um, so the Gaussian envelope is ``exp(-rho**2 w**2 / 4)`` and every mode is
unit-normalized over the plane.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np


class GridMismatchError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class LGIndex:
    ell: int
    p: int

    def __post_init__(self):
        if int(self.p) != self.p or self.p < 0:
            raise ValueError(f"radial index must be a non-negative integer, got p={self.p}")
        if int(self.ell) != self.ell:
            raise ValueError(f"azimuthal index must be an integer, got ell={self.ell}")
        object.__setattr__(self, "ell", int(self.ell))
        object.__setattr__(self, "p", int(self.p))

    def __str__(self):
        return f"LG(l={self.ell},p={self.p})"


def mode_group(idx: LGIndex) -> int:
    return 2 * idx.p + abs(idx.ell) + 1


def assoc_laguerre(p: int, alpha: int, x):
    """Associated Laguerre polynomial L_p^alpha(x) by upward three-term recurrence."""
    if p < 0 or alpha < 0:
        raise ValueError("p and alpha must be non-negative")
    x = np.asarray(x, dtype=float)
    prev = np.ones_like(x)
    if p == 0:
        return prev if prev.ndim else float(prev)
    cur = 1.0 + alpha - x
    for k in range(1, p):
        prev, cur = cur, ((2 * k + 1 + alpha - x) * cur - (k + alpha) * prev) / (k + 1)
    return cur if cur.ndim else float(cur)


def _norm_const(idx: LGIndex, w: float) -> float:
    a = abs(idx.ell)
    log_ratio = math.lgamma(idx.p + 1) - math.lgamma(idx.p + a + 1)
    return math.sqrt(w * w / (2.0 * math.pi)) * math.exp(0.5 * log_ratio)


def radial_profile(idx: LGIndex, w: float, rho):
    """Real radial factor of the mode (everything except exp(i ell phi))."""
    if w <= 0:
        raise ValueError("waist must be positive")
    rho = np.asarray(rho, dtype=float)
    a = abs(idx.ell)
    u = rho * w / math.sqrt(2.0)
    x = u * u
    return _norm_const(idx, w) * u**a * np.exp(-x / 2.0) * assoc_laguerre(idx.p, a, x)


def lg_amplitude(idx: LGIndex, w: float, rho, phi):
    """Complex LG amplitude at momentum-space polar point(s) (rho, phi)."""
    out = radial_profile(idx, w, rho) * np.exp(1j * idx.ell * np.asarray(phi, dtype=float))
    return out if np.ndim(out) else complex(out)


def gauss_legendre(n: int, a: float, b: float):
    """Gauss-Legendre nodes and weights mapped to [a, b]."""
    x, wts = np.polynomial.legendre.leggauss(n)
    half = 0.5 * (b - a)
    return a + half * (x + 1.0), half * wts


def default_rho_max(w: float, mg_max: int) -> float:
    return 6.0 * math.sqrt(2.0 * mg_max) / w


@dataclass(frozen=True, eq=False)
class TransverseGrid:
    """Polar quadrature grid: Gauss-Legendre in rho, uniform (periodic) in phi."""

    rho_max: float
    n_rho: int = 256
    n_phi: int = 256
    rho: np.ndarray = field(init=False, repr=False)
    rho_weights: np.ndarray = field(init=False, repr=False)
    phi: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.rho_max <= 0 or self.n_rho < 2 or self.n_phi < 2:
            raise ValueError("degenerate grid")
        r, wr = gauss_legendre(self.n_rho, 0.0, self.rho_max)
        object.__setattr__(self, "rho", r)
        object.__setattr__(self, "rho_weights", wr)
        object.__setattr__(self, "phi", 2.0 * np.pi * np.arange(self.n_phi) / self.n_phi)

    @classmethod
    def for_modes(cls, w: float, mg_max: int, n_rho: int = 256, n_phi: int = 256):
        return cls(default_rho_max(w, mg_max), n_rho, n_phi)

    @property
    def key(self):
        return (float(self.rho_max), self.n_rho, self.n_phi)

    def __eq__(self, other):
        return isinstance(other, TransverseGrid) and self.key == other.key

    def __hash__(self):
        return hash(self.key)

    @property
    def weights(self) -> np.ndarray:
        """Area weights rho*drho*dphi, shape (n_rho, n_phi)."""
        return np.outer(self.rho_weights * self.rho, np.full(self.n_phi, 2.0 * np.pi / self.n_phi))

    def mesh(self):
        return np.meshgrid(self.rho, self.phi, indexing="ij")

    def refined(self, factor: int = 2) -> "TransverseGrid":
        return TransverseGrid(self.rho_max, self.n_rho * factor, self.n_phi * factor)


@dataclass(frozen=True, eq=False)
class SampledField:
    values: np.ndarray
    grid: TransverseGrid
    waist: float
    normalized: bool = False
    label: str = ""

    def norm(self) -> float:
        return math.sqrt(inner_product(self, self).real)

    def normalize(self) -> "SampledField":
        return SampledField(self.values / self.norm(), self.grid, self.waist, True, self.label)


def sample_mode(idx: LGIndex, w: float, grid: TransverseGrid) -> SampledField:
    rr, pp = grid.mesh()
    return SampledField(lg_amplitude(idx, w, rr, pp), grid, w, True, str(idx))


def superpose(coeffs, fields: Sequence[SampledField], label: str = "") -> SampledField:
    grid = fields[0].grid
    vals = np.zeros_like(fields[0].values)
    for c, f in zip(coeffs, fields):
        if f.grid != grid:
            raise GridMismatchError("fields live on different grids")
        vals = vals + c * f.values
    return SampledField(vals, grid, fields[0].waist, False, label)


def inner_product(a: SampledField, b: SampledField) -> complex:
    if a.grid != b.grid:
        raise GridMismatchError(f"grid mismatch: {a.grid.key} vs {b.grid.key}")
    return complex(np.sum(a.grid.weights * np.conj(a.values) * b.values))


def gram_matrix(fields: Sequence[SampledField]) -> np.ndarray:
    grid = fields[0].grid
    for f in fields:
        if f.grid != grid:
            raise GridMismatchError("fields live on different grids")
    stack = np.stack([f.values.ravel() for f in fields])
    wts = grid.weights.ravel()
    return (np.conj(stack) * wts) @ stack.T


@dataclass(frozen=True)
class BasisSpec:
    """Recipe for an ordered LG mode basis.

    ``kind`` is one of radial, azimuthal or fullfield. For fullfield bases the
    candidate set is capped at ``max_mode_group`` (default: the largest |ell|
    in range plus one) and then trimmed to ``dimension`` by dropping the
    highest mode group first, most negative ell first within it.
    """

    kind: str = "fullfield"
    ell_range: tuple[int, int] = (0, 0)
    p_range: tuple[int, int] = (0, 0)
    dimension: int | None = None
    ordering: str | None = None
    max_mode_group: int | None = None
    modes: tuple[LGIndex, ...] | None = None

    def __post_init__(self):
        if self.kind not in ("radial", "azimuthal", "fullfield"):
            raise ValueError(f"unknown basis kind {self.kind!r}")
        if self.ordering not in (None, "mode_group", "index"):
            raise ValueError(f"unknown ordering {self.ordering!r}")
        object.__setattr__(self, "ell_range", tuple(int(v) for v in self.ell_range))
        object.__setattr__(self, "p_range", tuple(int(v) for v in self.p_range))
        if self.ell_range[0] > self.ell_range[1] or self.p_range[0] > self.p_range[1]:
            raise ValueError("empty index range")
        if self.p_range[0] < 0:
            raise ValueError("radial index range must be non-negative")
        if self.modes is not None:
            object.__setattr__(self, "modes", tuple(m if isinstance(m, LGIndex) else LGIndex(*m) for m in self.modes))

    @classmethod
    def radial(cls, p_max: int, **kw):
        return cls("radial", (0, 0), (0, p_max), **kw)

    @classmethod
    def azimuthal(cls, ell_lo: int, ell_hi: int, **kw):
        return cls("azimuthal", (ell_lo, ell_hi), (0, 0), **kw)

    @classmethod
    def fullfield(cls, ell_range, p_range, dimension=None, **kw):
        return cls("fullfield", tuple(ell_range), tuple(p_range), dimension, **kw)

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "ell_range": list(self.ell_range),
            "p_range": list(self.p_range),
            "dimension": self.dimension,
            "ordering": self.ordering,
            "max_mode_group": self.max_mode_group,
            "modes": None if self.modes is None else [[m.ell, m.p] for m in self.modes],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BasisSpec":
        d = dict(data)
        if d.get("modes") is not None:
            d["modes"] = tuple(LGIndex(*m) for m in d["modes"])
        return cls(**d)


def _sort_key(ordering: str):
    if ordering == "mode_group":
        return lambda m: (mode_group(m), m.p, m.ell)
    return lambda m: (m.p, m.ell)


def enumerate_basis(spec: BasisSpec) -> list[LGIndex]:
    if spec.modes is not None:
        modes = list(spec.modes)
        if len(set(modes)) != len(modes):
            raise ValueError("explicit mode list contains duplicates")
        if spec.dimension is not None and len(modes) != spec.dimension:
            raise ValueError(f"explicit mode list has {len(modes)} modes, expected {spec.dimension}")
        return modes

    cands = [
        LGIndex(ell, p)
        for p in range(spec.p_range[0], spec.p_range[1] + 1)
        for ell in range(spec.ell_range[0], spec.ell_range[1] + 1)
    ]
    mg_cap = spec.max_mode_group
    if mg_cap is None and spec.kind == "fullfield":
        mg_cap = max(abs(spec.ell_range[0]), abs(spec.ell_range[1])) + 1
    if mg_cap is not None:
        cands = [m for m in cands if mode_group(m) <= mg_cap]

    d = len(cands) if spec.dimension is None else spec.dimension
    if d < 1 or d > len(cands):
        raise ValueError(f"range admits {len(cands)} modes, cannot build dimension {d}")
    excess = len(cands) - d
    if excess:
        dropped = set(sorted(cands, key=lambda m: (-mode_group(m), m.ell, -m.p))[:excess])
        cands = [m for m in cands if m not in dropped]

    ordering = spec.ordering or ("mode_group" if spec.kind == "fullfield" else "index")
    return sorted(cands, key=_sort_key(ordering))


def max_mode_group(modes: Iterable[LGIndex]) -> int:
    return max(mode_group(m) for m in modes)
