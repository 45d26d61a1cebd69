"""Noise bookkeeping: photon units, Y-factor fits and input back-action.

Photon numbers follow N = k_B T / (hbar omega); the half-photon vacuum
floor enters only through the coth source term.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import least_squares

from .device import HBAR, KB
from .errors import ConditioningError, DomainError


class UnphysicalWarning(UserWarning):
    pass


def photons_from_temperature(t, omega):
    omega = np.asarray(omega, dtype=float)
    if np.any(omega <= 0):
        raise DomainError("frequency must be positive")
    if np.any(np.asarray(t) < 0):
        raise DomainError("temperature must be >= 0")
    return KB * np.asarray(t) / (HBAR * omega)


def temperature_from_photons(n, omega):
    return np.asarray(n) * HBAR * np.asarray(omega) / KB


def source_energy(t, omega):
    """hbar omega / 2 coth(hbar omega / 2 k_B T), finite at T = 0."""
    t = np.asarray(t, dtype=float)
    omega = np.asarray(omega, dtype=float)
    half = HBAR * omega / 2
    with np.errstate(divide="ignore", over="ignore"):
        x = np.where(t > 0, half / (KB * np.where(t > 0, t, 1.0)), np.inf)
        coth = np.where(np.isinf(x), 1.0, 1 / np.tanh(np.minimum(x, 700)))
    return half * coth


def quantum_source_power(t, omega, bandwidth):
    if not bandwidth > 0 or np.any(np.asarray(omega) <= 0):
        raise DomainError("frequency and bandwidth must be positive")
    return source_energy(t, omega) * bandwidth


def y_factor_power(t, omega, bandwidth, t_hemt, gain):
    """Noise power model: gain B (source term + k_B T_HEMT)."""
    return gain * bandwidth * (source_energy(t, omega) + KB * t_hemt)


@dataclass
class YFactorDataset:
    temperature: np.ndarray
    omega: np.ndarray
    power: np.ndarray
    bandwidth: float

    def __post_init__(self):
        self.temperature = np.asarray(self.temperature, dtype=float)
        self.omega = np.asarray(self.omega, dtype=float)
        self.power = np.asarray(self.power, dtype=float)
        if not (self.temperature.shape == self.omega.shape == self.power.shape):
            raise DomainError("record columns must have equal length")
        if np.any(self.power <= 0):
            raise DomainError("powers must be positive")
        if not self.bandwidth > 0:
            raise DomainError("bandwidth must be positive")
        if self.temperature.size and self.temperature.max() < 3 * self.temperature.min():
            raise ConditioningError("source temperatures must span at least a factor of 3")

    @classmethod
    def synthetic(cls, temps, freqs_hz, t_hemt, gain, bandwidth=1e6,
                  rel_noise=0.0, seed=None):
        tt, ff = np.meshgrid(np.asarray(temps, float), np.asarray(freqs_hz, float))
        w = 2 * np.pi * ff.ravel()
        th = np.broadcast_to(np.asarray(t_hemt, float), ff.shape).ravel() if np.ndim(t_hemt) \
            else t_hemt
        g = np.broadcast_to(np.asarray(gain, float), ff.shape).ravel() if np.ndim(gain) else gain
        p = y_factor_power(tt.ravel(), w, bandwidth, th, g)
        if rel_noise:
            rng = np.random.default_rng(seed)
            p = p * (1 + rel_noise * rng.standard_normal(p.shape))
        return cls(tt.ravel(), w, p, bandwidth)


@dataclass
class NoiseFit:
    omega: np.ndarray
    t_hemt: np.ndarray
    gain: np.ndarray
    residual_rms: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def gain_db(self):
        return 10 * np.log10(self.gain)


def two_point_y_factor(t_hot, p_hot, t_cold, p_cold, omega, bandwidth):
    """Textbook Y-factor with the quantum source term."""
    e_h, e_c = source_energy(t_hot, omega), source_energy(t_cold, omega)
    y = p_hot / p_cold
    t_n = (e_h - y * e_c) / (KB * (y - 1))
    gain = p_cold / (bandwidth * (e_c + KB * t_n))
    return t_n, gain


def _fit_one(e, p, bandwidth):
    # linear model p = a e + b with a = G B, b = G B k_B T; e scaled to order one
    es = e.max()
    x = np.column_stack([e / es, np.ones_like(e)])
    w = 1 / p
    xw = x * w[:, None]
    cond = np.linalg.cond(xw / np.linalg.norm(xw, axis=0))
    if not np.isfinite(cond) or cond > 1e6 or np.ptp(e) <= 1e-6 * e.mean():
        raise ConditioningError("source temperatures too close to separate gain and noise")
    a, b = np.linalg.lstsq(xw, p * w, rcond=None)[0]
    a /= es
    if a <= 0 or b <= 0:
        raise ConditioningError("linear fit gave nonpositive gain or noise")
    if e.size > 2:
        def resid(q):
            return np.log(q[0] * e + q[1]) - np.log(p)
        sol = least_squares(resid, [a, b], x_scale=[a, b], xtol=1e-15, ftol=1e-15, gtol=1e-15)
        a, b = sol.x
    r = np.log(a * e + b) - np.log(p)
    return a / bandwidth, b / (a * KB), float(np.sqrt(np.mean(r**2)))


def fit_y_factor(data: YFactorDataset) -> NoiseFit:
    ws = np.unique(data.omega)
    t_out, g_out, res = [], [], []
    for w in ws:
        m = data.omega == w
        temps = data.temperature[m]
        if np.unique(temps).size < 2:
            raise ConditioningError("need at least two distinct temperatures per frequency")
        e = source_energy(temps, w)
        g, t, rr = _fit_one(e, data.power[m], data.bandwidth)
        t_out.append(t)
        g_out.append(g)
        res.append(rr)
    return NoiseFit(ws, np.array(t_out), np.array(g_out), np.array(res))


def snr_improvement_noise(g_signal, g_noise, t_hemt, omega=None):
    """System and amplifier noise temperatures from an SNR-improvement measurement.

    Returns (t_sys, t_twpa) in kelvin, or photons when omega is given.
    """
    if not (g_signal > 0 and g_noise > 0):
        raise DomainError("gains must be positive")
    if g_noise < 1:
        warnings.warn("noise gain below unity is unphysical", UnphysicalWarning, stacklevel=2)
    t_sys = g_noise * t_hemt / g_signal
    t_twpa = t_hemt * (g_noise - 1) / g_signal
    if omega is not None:
        return photons_from_temperature(t_sys, omega), photons_from_temperature(t_twpa, omega)
    return t_sys, t_twpa


def input_backaction_estimate(stage1_gain, interface_return_loss_db, added_noise_photons=0.0):
    """Input noise: vacuum half photon plus amplified noise reflected at the interface."""
    if stage1_gain < 0 or added_noise_photons < 0:
        raise DomainError("inputs must be nonnegative")
    refl = 10 ** (-abs(interface_return_loss_db) / 10)
    return 0.5 + refl * stage1_gain * (1 + added_noise_photons)
