"""Type-1 complex-amplitude holograms on a phase-only SLM and their first-order readout."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from scipy import special

from .lgcore import LGIndex, lg_amplitude

# first maximum of J1
F_MAX = float(special.jnp_zeros(1, 1)[0])
J1_MAX = float(special.j1(F_MAX))

_TABLE_F = np.linspace(0.0, F_MAX, 8193)
_TABLE_J = special.j1(_TABLE_F)


class HologramError(ValueError):
    pass


def modulation_depth(a) -> np.ndarray:
    """Solve J1(f) = a * J1(F_MAX) for f in [0, F_MAX] by bisection on a table, then one Newton step."""
    a = np.asarray(a, dtype=float)
    if np.any(a < -1e-12) or np.any(a > 1 + 1e-9):
        raise HologramError("amplitude must lie in [0, 1]")
    y = np.clip(a, 0.0, 1.0) * J1_MAX
    k = np.clip(np.searchsorted(_TABLE_J, y), 1, _TABLE_J.size - 1)
    j0, j1 = _TABLE_J[k - 1], _TABLE_J[k]
    f = _TABLE_F[k - 1] + (y - j0) / (j1 - j0) * (_TABLE_F[k] - _TABLE_F[k - 1])
    deriv = 0.5 * (special.j0(f) - special.jv(2, f))
    step = np.where(np.abs(deriv) > 1e-3, (special.j1(f) - y) / np.where(deriv == 0, 1, deriv), 0.0)
    return np.clip(f - step, 0.0, F_MAX)


@dataclass(frozen=True, eq=False)
class HologramMap:
    phase: np.ndarray
    pitch_um: float
    period_px: float
    label: str = ""
    target: np.ndarray | None = None

    @property
    def shape(self):
        return self.phase.shape


def type1_phase(amplitude, phase, period_px: float) -> np.ndarray:
    """f(a) sin(phi + 2 pi x / period) wrapped to [0, 2 pi); x runs along the last axis."""
    amplitude = np.asarray(amplitude, dtype=float)
    x = np.arange(amplitude.shape[-1])
    psi = modulation_depth(amplitude) * np.sin(phase + 2.0 * np.pi * x / period_px)
    return np.mod(psi, 2.0 * np.pi)


def synthesize_type1(target, period_px: float = 8.0, pitch_um: float = 8.0, label: str = "") -> HologramMap:
    """Phase pattern f(a) sin(phi + 2 pi x / period) encoding ``target`` in the +1 order."""
    t = np.asarray(target, dtype=complex)
    if t.ndim != 2 or min(t.shape) < 2:
        raise HologramError("degenerate grid")
    if period_px < 4:
        raise HologramError("carrier period must be at least 4 pixels")
    a = np.abs(t)
    amax = a.max()
    if amax > 0 and abs(amax - 1.0) > 1e-9:
        raise HologramError(f"target amplitude must be normalized to max 1, got {amax:.6g}")
    return HologramMap(type1_phase(a, np.angle(t), period_px), pitch_um, period_px, label, t)


@dataclass(frozen=True, eq=False)
class ReconstructionReport:
    field: np.ndarray
    overlap: float


def overlap_score(a, b) -> float:
    na = np.vdot(a, a).real
    nb = np.vdot(b, b).real
    if na == 0 or nb == 0:
        return 0.0
    return float(min(1.0, abs(np.vdot(a, b)) ** 2 / (na * nb)))


def reconstruct_first_order(holo: HologramMap, incident=1.0, target=None) -> ReconstructionReport:
    """Filter the +1 carrier order of exp(i psi) in the Fourier plane and demodulate it."""
    ny, nx = holo.shape
    fc = 1.0 / holo.period_px
    radius = 0.5 * fc
    if fc + radius > 0.5:
        raise HologramError("carrier order falls outside the grid band")
    spec = np.fft.fft2(incident * np.exp(1j * holo.phase))
    fx = np.fft.fftfreq(nx)[None, :]
    fy = np.fft.fftfreq(ny)[:, None]
    window = (fx - fc) ** 2 + fy**2 <= radius**2
    x = np.arange(nx)[None, :]
    field = np.fft.ifft2(spec * window) * np.exp(-2j * np.pi * fc * x)
    ref = holo.target if target is None else target
    score = overlap_score(ref, field) if ref is not None else float("nan")
    return ReconstructionReport(field, score)


def slm_field(modes: Sequence[LGIndex], coeffs, n: int = 1024, scale_px: float = 48.0) -> np.ndarray:
    """Superposition of LG profiles on an n x n pixel grid, normalized to max |a| = 1.

    ``scale_px`` sets the radius where the dimensionless LG argument equals 1.
    """
    c = (np.arange(n) - n / 2 + 0.5)
    X, Y = np.meshgrid(c, c)
    r = np.hypot(X, Y)
    th = np.arctan2(Y, X)
    w = math.sqrt(2.0) / scale_px
    field = np.zeros((n, n), dtype=complex)
    for m, cm in zip(modes, coeffs):
        if cm != 0:
            field += cm * lg_amplitude(m, w, r, th)
    amax = np.abs(field).max()
    if amax == 0:
        raise HologramError("field vanishes on the grid")
    return field / amax


def first_order_power(holo: HologramMap) -> float:
    rep = reconstruct_first_order(holo)
    return float(np.sum(np.abs(rep.field) ** 2) / rep.field.size)
