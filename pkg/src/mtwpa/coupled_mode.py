"""Degenerate-pump four-wave-mixing coupled-mode theory.

Amplitudes evolve as
    da_s/dz = i kappa_s a_i* exp(i kappa z)
    da_i/dz = i kappa_i a_s* exp(i kappa z)
with z counted in cells. All coefficient functions broadcast over omega_s.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .device import (StageGeometry, characteristic_impedance, dispersion_k,
                     linear_params)
from .errors import DomainError

# below this |g z| the cosh/sinh forms switch to their power series
_SERIES_GZ = 1e-3


def pump_amplitude_from_power(power_w, omega_p, z0):
    """Peak node-flux amplitude of a travelling wave carrying power_w into z0."""
    if np.any(np.asarray(power_w) < 0):
        raise DomainError("pump power must be nonnegative")
    if not z0 > 0:
        raise DomainError("impedance must be positive")
    return np.sqrt(2 * z0 * np.asarray(power_w)) / omega_p


def dbm_to_watt(p_dbm):
    return 1e-3 * 10 ** (np.asarray(p_dbm, dtype=float) / 10)


def watt_to_dbm(p_w):
    return 10 * np.log10(np.asarray(p_w, dtype=float) / 1e-3)


@dataclass(frozen=True)
class PumpDrive:
    """Pump tone. amp_flux overrides the power-to-amplitude map when set."""
    omega_p: float
    power_w: float = 0.0
    amp_flux: float | None = None

    def __post_init__(self):
        if not self.omega_p > 0:
            raise DomainError("pump frequency must be positive")
        if not self.power_w >= 0:
            raise DomainError("pump power must be nonnegative")
        if self.amp_flux is not None and (self.amp_flux == 0) != (self.power_w == 0):
            raise DomainError("amp_flux must vanish exactly when power does")

    @classmethod
    def from_dbm(cls, f_hz: float, p_dbm: float | None):
        p = 0.0 if p_dbm is None else float(dbm_to_watt(p_dbm))
        return cls(2 * np.pi * f_hz, p)

    @property
    def power_dbm(self) -> float:
        return float(watt_to_dbm(self.power_w)) if self.power_w > 0 else -np.inf

    def scaled(self, factor: float) -> "PumpDrive":
        amp = None if self.amp_flux is None else self.amp_flux * np.sqrt(factor)
        return PumpDrive(self.omega_p, self.power_w * factor, amp)

    def flux_amplitude(self, geom: StageGeometry, flux) -> float:
        if self.amp_flux is not None:
            return float(self.amp_flux)
        z0 = characteristic_impedance(self.omega_p, geom, flux)
        return float(pump_amplitude_from_power(self.power_w, self.omega_p, z0))


@dataclass
class ModePair:
    a_s: complex
    a_i: complex
    omega_s: float
    omega_i: float

    @classmethod
    def for_pump(cls, a_s, a_i, omega_s, omega_p):
        return cls(a_s, a_i, omega_s, 2 * omega_p - omega_s)


@dataclass
class CmeCoefficients:
    alpha_s: np.ndarray
    alpha_i: np.ndarray
    alpha_p: np.ndarray
    kappa_s: np.ndarray
    kappa_i: np.ndarray
    delta_k: np.ndarray
    kappa: np.ndarray
    g: np.ndarray

    @property
    def g2(self):
        return self.kappa_s * self.kappa_i - (self.kappa / 2) ** 2

    @classmethod
    def from_couplings(cls, kappa_s, kappa_i, kappa, alpha_p=0.0):
        """Build a coefficient set directly from couplings and mismatch."""
        ks, ki, kp = (np.asarray(x, dtype=float) for x in (kappa_s, kappa_i, kappa))
        g = np.sqrt((ks * ki - (kp / 2) ** 2).astype(complex))
        z = np.zeros_like(kp)
        return cls(z, z, np.asarray(alpha_p, dtype=float) + z, ks, ki, kp, kp, g)


def _wavenumbers(geom, flux, omega_p, omega_s):
    ws = np.asarray(omega_s, dtype=float)
    wi = 2 * omega_p - ws
    if np.any(wi <= 0):
        raise DomainError("idler frequency must be positive (omega_s < 2 omega_p)")
    return ws, wi, dispersion_k(ws, geom, flux), dispersion_k(wi, geom, flux), \
        dispersion_k(omega_p, geom, flux)


def _prefactor(geom, flux, pump):
    lp = linear_params(geom, flux)
    a = pump.flux_amplitude(geom, flux)
    return 3 * lp.gamma * a**2 / geom.c_gnd


def spm_xpm_coefficients(geom, flux, pump: PumpDrive, omega_s):
    """Self- and cross-phase modulation (rad/cell) of signal, idler and pump."""
    ws, wi, ks, ki, kp = _wavenumbers(geom, flux, pump.omega_p, omega_s)
    c = _prefactor(geom, flux, pump)
    alpha_s = c * ks**3 * kp**2 / (4 * ws**2)
    alpha_i = c * ki**3 * kp**2 / (4 * wi**2)
    alpha_p = c * kp**5 / (8 * pump.omega_p**2) + 0 * ws
    return alpha_s, alpha_i, alpha_p


def coupling_coefficients(geom, flux, pump: PumpDrive, omega_s):
    ws, wi, ks, ki, kp = _wavenumbers(geom, flux, pump.omega_p, omega_s)
    c = _prefactor(geom, flux, pump)
    kappa_s = c * kp**2 * ks * ki * (2 * kp - ki) / (8 * ws**2)
    kappa_i = c * kp**2 * ks * ki * (2 * kp - ks) / (8 * wi**2)
    return kappa_s, kappa_i


def chromatic_mismatch(geom, flux, omega_p, omega_s):
    _, _, ks, ki, kp = _wavenumbers(geom, flux, omega_p, omega_s)
    return ks + ki - 2 * kp


def total_mismatch(geom, flux, pump: PumpDrive, omega_s):
    a_s, a_i, a_p = spm_xpm_coefficients(geom, flux, pump, omega_s)
    return chromatic_mismatch(geom, flux, pump.omega_p, omega_s) + a_s + a_i - 2 * a_p


def coefficients(geom, flux, pump: PumpDrive, omega_s) -> CmeCoefficients:
    a_s, a_i, a_p = spm_xpm_coefficients(geom, flux, pump, omega_s)
    k_s, k_i = coupling_coefficients(geom, flux, pump, omega_s)
    dk = chromatic_mismatch(geom, flux, pump.omega_p, omega_s)
    kappa = dk + a_s + a_i - 2 * a_p
    g = np.sqrt(np.asarray(k_s * k_i - (kappa / 2) ** 2, dtype=complex))
    return CmeCoefficients(a_s, a_i, a_p, k_s, k_i, dk, kappa, g)


def _ch_sh(g2, z):
    """cosh(g z) and sinh(g z)/g as real functions of real g^2."""
    g2 = np.asarray(g2, dtype=float)
    x = g2 * z * z
    small = np.abs(x) < _SERIES_GZ**2
    q = np.sqrt(np.abs(g2))
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        ch = np.where(g2 >= 0, np.cosh(q * z), np.cos(q * z))
        sh = np.where(g2 >= 0, np.sinh(q * z), np.sin(q * z)) / q
    ch_s = 1 + x / 2 + x**2 / 24 + x**3 / 720
    sh_s = z * (1 + x / 6 + x**2 / 120 + x**3 / 5040)
    return np.where(small, ch_s, ch), np.where(small, sh_s, sh)


def transfer_matrix(coeffs: CmeCoefficients, z):
    """2x2 map of (a_s(0), a_i*(0)) to (a_s(z), a_i*(z))."""
    ch, sh = _ch_sh(coeffs.g2, z)
    kap = np.asarray(coeffs.kappa, dtype=float)
    ph = np.exp(1j * kap * z / 2)
    m11 = (ch - 0.5j * kap * sh) * ph
    m12 = 1j * coeffs.kappa_s * sh * ph
    m21 = np.conj(1j * coeffs.kappa_i * sh * ph)
    m22 = np.conj((ch - 0.5j * kap * sh) * ph)
    return np.array([[m11, m12], [m21, m22]])


def evolve_modes(inp: ModePair, coeffs: CmeCoefficients, z: float) -> ModePair:
    if z < 0:
        raise DomainError("propagation length must be nonnegative")
    m = transfer_matrix(coeffs, z)
    a_s = m[0, 0] * inp.a_s + m[0, 1] * np.conj(inp.a_i)
    a_i_c = m[1, 0] * inp.a_s + m[1, 1] * np.conj(inp.a_i)
    return ModePair(a_s, np.conj(a_i_c), inp.omega_s, inp.omega_i)


def power_gain(coeffs: CmeCoefficients, z):
    ch, sh = _ch_sh(coeffs.g2, z)
    return ch**2 + (np.asarray(coeffs.kappa) / 2) ** 2 * sh**2


def idler_transfer(coeffs: CmeCoefficients, z):
    _, sh = _ch_sh(coeffs.g2, z)
    return np.asarray(coeffs.kappa_i) ** 2 * sh**2


def signal_regen_transfer(coeffs: CmeCoefficients, z):
    _, sh = _ch_sh(coeffs.g2, z)
    return np.asarray(coeffs.kappa_s) ** 2 * sh**2


def two_stage_gain(coeffs1: CmeCoefficients, coeffs3: CmeCoefficients, l1, l3):
    """Idler generated in the first stage and regenerated as signal in the last."""
    return idler_transfer(coeffs1, l1) * signal_regen_transfer(coeffs3, l3)


def phase_matched_approx(alpha_p, l):
    """Large-gain idler-path estimate for two equal stages of length l each.

    With theta = 2 alpha_p l summed over both stages this is exp(2 theta) / 16.
    """
    return np.exp(4 * np.abs(alpha_p) * l) / 16


def nonlinear_phase(geom1, geom3, fluxes, pump: PumpDrive, l1=None, l3=None,
                    derate_db: float = 2.0):
    """Summed pump self-phase of both stages, theta = alpha_p1 l1 + alpha_p3 l3."""
    l1 = geom1.n_cells if l1 is None else l1
    l3 = geom3.n_cells if l3 is None else l3
    f1, f3 = fluxes
    p3 = pump.scaled(10 ** (-derate_db / 10))
    _, _, a1 = spm_xpm_coefficients(geom1, f1, pump, pump.omega_p)
    _, _, a3 = spm_xpm_coefficients(geom3, f3, p3, pump.omega_p)
    return float(a1 * l1 + a3 * l3)


def integrate_cme_numeric(inp: ModePair, coeffs: CmeCoefficients, z: float,
                          step: float = 0.25) -> ModePair:
    """Fixed-step classical Runge-Kutta integration of the coupled-mode ODEs."""
    if not step > 0:
        raise DomainError("step must be positive")
    if z < 0:
        raise DomainError("propagation length must be nonnegative")
    ks, ki, kap = (complex(np.asarray(x)) for x in
                   (coeffs.kappa_s, coeffs.kappa_i, coeffs.kappa))

    def rhs(zz, y):
        e = np.exp(1j * kap * zz)
        return np.array([1j * ks * np.conj(y[1]) * e, 1j * ki * np.conj(y[0]) * e])

    n = int(np.ceil(z / step - 1e-12))
    h = z / n if n else 0.0
    y = np.array([inp.a_s, inp.a_i], dtype=complex)
    zz = 0.0
    for _ in range(n):
        k1 = rhs(zz, y)
        k2 = rhs(zz + h / 2, y + h / 2 * k1)
        k3 = rhs(zz + h / 2, y + h / 2 * k2)
        k4 = rhs(zz + h, y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        zz += h
    return ModePair(y[0], y[1], inp.omega_s, inp.omega_i)
