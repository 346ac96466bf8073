"""Biphoton LG coefficients from the collected joint transverse momentum amplitude.

Conventions
-----------
* A momentum-space Gaussian ``exp(-rho**2 w**2 / 4)`` has bandwidth
  ``sigma = sqrt(2) / w``; this is used for the pump and the collection mode,
  so ``gamma = w_p / w_si = sigma_C / sigma_P``.
* The idler arm is mirrored (PBS reflection, ``k_x -> -k_x``). An idler
  projector labelled ``(ell, p)`` is the crystal-frame mode
  ``LG_p^ell(rho, pi - phi)``, which turns OAM anti-correlations into
  correlations with a positive diagonal.
* The collection Gaussians are the envelopes of the projected LG modes, so the
  overlap of the collected JTMA with the flattened (envelope-free) hologram
  functions equals the overlap of the bare JTMA with the full LG modes.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from .lgcore import LGIndex, gauss_legendre, lg_amplitude, mode_group, radial_profile

SINC_SURROGATE_RATE = 0.455
PUMP_BAND = 9.0


class QuadratureError(RuntimeError):
    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


@dataclass(frozen=True)
class OpticsConfig:
    """Pump, phase-matching and collection parameters.

    Lengths: wavelengths in nm, waists and widths in um, focal length in mm;
    momenta in rad/um. ``collection_width_um`` is the real-space collection
    width before the intensity-flattening telescope.
    """

    pump_wavelength_nm: float = 775.0
    wavelength_nm: float = 1550.0
    pump_waist_um: float = 450.0
    focal_length_mm: float = 250.0
    collection_width_um: float = 199.6496
    magnification: float = 3.3
    phase_matching_width: float = 0.1

    def __post_init__(self):
        for name in ("pump_wavelength_nm", "wavelength_nm", "pump_waist_um", "focal_length_mm",
                     "collection_width_um", "magnification", "phase_matching_width"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be a positive finite number, got {v!r}")

    @property
    def sigma_p(self) -> float:
        return math.sqrt(2.0) / self.pump_waist_um

    @property
    def sigma_s(self) -> float:
        return self.phase_matching_width

    @property
    def collection_waist_um(self) -> float:
        return math.sqrt(2.0) * self.collection_width_um / self.magnification

    @property
    def sigma_c(self) -> float:
        return math.sqrt(2.0) / self.collection_waist_um

    @property
    def gamma(self) -> float:
        return self.pump_waist_um / self.collection_waist_um

    @staticmethod
    def collection_width_for_gamma(gamma: float, pump_waist_um: float, magnification: float) -> float:
        if gamma <= 0:
            raise ValueError("gamma must be positive")
        return pump_waist_um / gamma * magnification / math.sqrt(2.0)

    @classmethod
    def from_gamma(cls, gamma: float, **kw) -> "OpticsConfig":
        base = cls(**kw)
        return base.with_gamma(gamma)

    def with_gamma(self, gamma: float) -> "OpticsConfig":
        """Same pump, collection waist rescaled to reach ``gamma``."""
        cw = self.collection_width_for_gamma(gamma, self.pump_waist_um, self.magnification)
        return replace(self, collection_width_um=cw)

    def derived(self) -> dict:
        return {
            "sigma_p_rad_per_um": self.sigma_p,
            "sigma_s_rad_per_um": self.sigma_s,
            "sigma_c_rad_per_um": self.sigma_c,
            "collection_waist_um": self.collection_waist_um,
            "gamma": self.gamma,
        }


def _sinc(x):
    return np.sinc(np.asarray(x) / np.pi)


def _phase_matching(q2, cfg: OpticsConfig, surrogate: bool):
    arg = q2 / cfg.sigma_s**2
    if surrogate:
        return np.exp(-SINC_SURROGATE_RATE * arg)
    return _sinc(arg)


def jtma(ks, ki, cfg: OpticsConfig, surrogate: bool = False):
    """Pump envelope times phase matching; ``ks``/``ki`` have trailing axis 2."""
    ks = np.asarray(ks, dtype=float)
    ki = np.asarray(ki, dtype=float)
    plus = np.sum((ks + ki) ** 2, axis=-1)
    minus = np.sum((ks - ki) ** 2, axis=-1)
    out = np.exp(-plus / (2.0 * cfg.sigma_p**2)) * _phase_matching(minus, cfg, surrogate)
    return out if np.ndim(out) else complex(out)


def collection_mode(k, cfg: OpticsConfig):
    k = np.asarray(k, dtype=float)
    return np.exp(-np.sum(k**2, axis=-1) / (2.0 * cfg.sigma_c**2))


def collected_jtma(ks, ki, cfg: OpticsConfig, surrogate: bool = False):
    out = jtma(ks, ki, cfg, surrogate) * collection_mode(ks, cfg) * collection_mode(ki, cfg)
    return out if np.ndim(out) else complex(out)


@dataclass(frozen=True, eq=False)
class CoefficientTensor:
    """Normalized two-photon amplitudes C[s, i] over (signal, idler) mode lists.

    ``raw_norm`` is the Frobenius norm before normalization, so
    ``matrix * raw_norm`` is the un-normalized overlap integral.
    """

    signal_modes: tuple[LGIndex, ...]
    idler_modes: tuple[LGIndex, ...]
    matrix: np.ndarray
    raw_norm: float = 1.0
    residual: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (len(self.signal_modes), len(self.idler_modes)):
            raise ValueError("matrix shape does not match the mode lists")
        nrm = np.linalg.norm(m)
        if nrm == 0:
            raise ValueError("zero coefficient tensor")
        object.__setattr__(self, "matrix", m / nrm)
        object.__setattr__(self, "signal_modes", tuple(self.signal_modes))
        object.__setattr__(self, "idler_modes", tuple(self.idler_modes))

    @classmethod
    def maximally_entangled(cls, modes: Sequence[LGIndex]):
        d = len(modes)
        return cls(tuple(modes), tuple(modes), np.eye(d) / math.sqrt(d), meta={"source": "maximal"})

    @classmethod
    def from_schmidt(cls, modes: Sequence[LGIndex], lam):
        return cls(tuple(modes), tuple(modes), np.diag(np.asarray(lam, dtype=float)), meta={"source": "schmidt"})

    @property
    def dim(self) -> int:
        return len(self.signal_modes)

    def probabilities(self) -> np.ndarray:
        return np.abs(self.matrix) ** 2

    def diag_fraction(self) -> float:
        p = self.probabilities()
        n = min(p.shape)
        return float(np.trace(p[:n, :n]) / p.sum())

    def raw(self) -> np.ndarray:
        return self.matrix * self.raw_norm


@dataclass(frozen=True)
class SchmidtReport:
    coefficients: np.ndarray
    schmidt_number: float


def schmidt_analysis(tensor: CoefficientTensor) -> SchmidtReport:
    s = np.linalg.svd(tensor.matrix, compute_uv=False)
    s = np.sort(np.abs(s))[::-1]
    s = s / math.sqrt(np.sum(s**2))
    return SchmidtReport(s, float(1.0 / np.sum(s**4)))


def integration_extent(cfg: OpticsConfig, modes: Sequence[LGIndex]) -> float:
    """Radial momentum cutoff beyond which every listed mode is negligible."""
    mg = max(mode_group(m) for m in modes)
    x_max = 4.0 * mg + 30.0
    return math.sqrt(2.0 * x_max) / cfg.collection_waist_um


def _default_nodes(cfg: OpticsConfig, rho_max: float):
    n_rho = max(128, int(math.ceil(4.0 * rho_max / cfg.sigma_p)))
    n_rho = min(n_rho, 1024)
    n_ang = 2.0 * math.pi * 0.7 * rho_max / cfg.sigma_p * 1.5
    n_dphi = max(256, 1 << int(math.ceil(math.log2(max(n_ang, 2.0)))))
    return n_rho, min(n_dphi, 4096)


def _azimuthal_kernels(cfg, rho, ells, n_dphi, surrogate):
    """K_ell(rho_s, rho_i) = int_0^{2pi} Phi(rho_s, rho_i, dphi) cos(ell dphi) d dphi.

    The pump factor is at most exp(-(rho_s - rho_i)**2 / (2 sigma_P**2)), so
    pairs further apart than PUMP_BAND pump widths are left at zero.
    """
    dphi = 2.0 * np.pi * np.arange(n_dphi) / n_dphi
    cos = np.cos(dphi)[None, :]
    n = rho.size
    out = {ell: np.zeros((n, n)) for ell in ells}
    band = PUMP_BAND * cfg.sigma_p
    for a in range(n):
        ra = rho[a]
        lo, hi = np.searchsorted(rho, [ra - band, ra + band])
        rb = rho[lo:hi, None]
        base = ra * ra + rb * rb
        cross = 2.0 * ra * rb * cos
        pump = np.exp(-(base + cross) / (2.0 * cfg.sigma_p**2))
        phi = pump * _phase_matching(base - cross, cfg, surrogate)
        spec = np.fft.rfft(phi, axis=1) * (2.0 * np.pi / n_dphi)
        for ell in ells:
            out[ell][a, lo:hi] = spec[:, ell].real
    return out


def _coefficient_matrix(cfg, sig, idl, n_rho, n_dphi, surrogate):
    w = cfg.collection_waist_um
    rho_max = integration_extent(cfg, list(sig) + list(idl))
    rho, wr = gauss_legendre(n_rho, 0.0, rho_max)
    measure = wr * rho
    ells = sorted({abs(m.ell) for m in sig} & {abs(m.ell) for m in idl})
    if max(ells, default=0) >= n_dphi // 2:
        raise QuadratureError("azimuthal resolution too low for the requested OAM range")
    kern = _azimuthal_kernels(cfg, rho, ells, n_dphi, surrogate)
    prof_s = [radial_profile(m, w, rho) * measure for m in sig]
    prof_i = [radial_profile(m, w, rho) * measure for m in idl]
    C = np.zeros((len(sig), len(idl)))
    for a, ms in enumerate(sig):
        for b, mi in enumerate(idl):
            if ms.ell != mi.ell:
                continue
            sign = -1.0 if ms.ell % 2 else 1.0
            C[a, b] = sign * 2.0 * np.pi * (prof_s[a] @ kern[abs(ms.ell)] @ prof_i[b])
    return C


def lg_coefficients(cfg: OpticsConfig, signal_modes: Sequence[LGIndex], idler_modes: Sequence[LGIndex],
                    n_rho: int | None = None, n_dphi: int | None = None, surrogate: bool = False,
                    check: bool = True, tol: float = 1e-6) -> CoefficientTensor:
    """Overlap of the collected JTMA with signal/idler LG projectors.

    The 4-D overlap integral collapses to (rho_s, rho_i, dphi) because the
    JTMA depends on the azimuths only through their difference; entries whose
    labels break OAM conservation are never integrated and stay exactly zero.
    With ``check`` the result is recomputed on a 3/4-resolution grid and a
    :class:`QuadratureError` is raised if the relative change exceeds ``tol``.
    """
    sig, idl = tuple(signal_modes), tuple(idler_modes)
    rho_max = integration_extent(cfg, list(sig) + list(idl))
    dn, da = _default_nodes(cfg, rho_max)
    n_rho = n_rho or dn
    n_dphi = n_dphi or da
    C = _coefficient_matrix(cfg, sig, idl, n_rho, n_dphi, surrogate)
    scale = np.abs(C).max()
    residual = 0.0
    if check:
        coarse = _coefficient_matrix(cfg, sig, idl, (3 * n_rho) // 4, (3 * n_dphi) // 4, surrogate)
        residual = float(np.abs(coarse - C).max() / scale)
        if residual > tol:
            raise QuadratureError(
                f"coefficient quadrature not converged: relative residual {residual:.2e} > {tol:.1e}",
                residual)
    meta = {"source": "spdc", "gamma": cfg.gamma, "n_rho": n_rho, "n_dphi": n_dphi,
            "surrogate": surrogate}
    return CoefficientTensor(sig, idl, C, float(np.linalg.norm(C)), residual, meta)


def idler_mode(idx: LGIndex, w: float, rho, phi):
    """Crystal-frame amplitude of the idler projector labelled ``idx`` (mirrored arm)."""
    return lg_amplitude(idx, w, rho, np.pi - np.asarray(phi))


@dataclass(frozen=True)
class MonteCarloCoefficients:
    """Importance-sampled estimates of the raw (un-normalized) overlap integrals."""

    mean: np.ndarray
    stderr: np.ndarray
    batches: np.ndarray

    def jackknife(self, stat):
        """Jackknife mean and standard error of ``stat`` (a function of a raw matrix)."""
        nb = self.batches.shape[0]
        total = self.batches.sum(axis=0)
        loo = np.array([stat((total - self.batches[k]) / (nb - 1)) for k in range(nb)])
        full = stat(self.mean)
        se = math.sqrt((nb - 1) / nb * np.sum((loo - loo.mean()) ** 2))
        return float(full), float(se)


def monte_carlo_coefficients(cfg: OpticsConfig, signal_modes, idler_modes, n_samples: int = 1_000_000,
                             seed: int = 0, n_batches: int = 50, surrogate: bool = False) -> MonteCarloCoefficients:
    """Independent 4-D Monte Carlo estimate of the overlap integrals.

    Signal momenta are drawn from a Gaussian matched to the collection
    bandwidth and the pair sum ``k_s + k_i`` from the pump envelope, so the
    estimator concentrates samples where the integrand lives.
    """
    rng = np.random.default_rng(seed)
    sig, idl = list(signal_modes), list(idler_modes)
    w = cfg.collection_waist_um
    sd_s, sd_q = cfg.sigma_c, cfg.sigma_p
    per = n_samples // n_batches
    batches = np.zeros((n_batches, len(sig), len(idl)), dtype=complex)
    for b in range(n_batches):
        ks = rng.normal(0.0, sd_s, size=(per, 2))
        q = rng.normal(0.0, sd_q, size=(per, 2))
        ki = q - ks
        pdf = np.exp(-np.sum(ks**2, 1) / (2 * sd_s**2)) / (2 * np.pi * sd_s**2)
        pdf *= np.exp(-np.sum(q**2, 1) / (2 * sd_q**2)) / (2 * np.pi * sd_q**2)
        weight = jtma(ks, ki, cfg, surrogate) / pdf
        rs, ps = np.hypot(ks[:, 0], ks[:, 1]), np.arctan2(ks[:, 1], ks[:, 0])
        ri, pi_ = np.hypot(ki[:, 0], ki[:, 1]), np.arctan2(ki[:, 1], ki[:, 0])
        S = np.stack([np.conj(lg_amplitude(m, w, rs, ps)) for m in sig])
        I = np.stack([np.conj(idler_mode(m, w, ri, pi_)) for m in idl])
        batches[b] = (S * weight) @ I.T / per
    mean = batches.mean(axis=0)
    stderr = batches.std(axis=0, ddof=1) / math.sqrt(n_batches)
    return MonteCarloCoefficients(mean, stderr, batches)


def diag_fraction_of(raw) -> float:
    p = np.abs(raw) ** 2
    n = min(p.shape)
    return float(np.trace(p[:n, :n]) / p.sum())


@dataclass(frozen=True)
class SweepRow:
    gamma: float
    schmidt_K: float
    diag_fraction: float


def sweep_gamma(cfg: OpticsConfig, gammas: Sequence[float], modes: Sequence[LGIndex], **kw) -> list[SweepRow]:
    """Schmidt number and diagonal weight as the collection waist is scanned at fixed pump."""
    rows = []
    for g in gammas:
        if g <= 0:
            raise ValueError("gamma values must be positive")
        t = lg_coefficients(cfg.with_gamma(g), modes, modes, **kw)
        rows.append(SweepRow(float(g), schmidt_analysis(t).schmidt_number, t.diag_fraction()))
    return rows
