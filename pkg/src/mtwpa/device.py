"""Circuit constants of one SQUID transmission-line stage.

Each stage is a ladder of asymmetric SQUIDs, reduced to a flux-tunable
inductance L and Kerr constant gamma per cell, shunted to ground by C_gnd.
"""
from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .errors import CutoffError, DomainError, FrustrationError

PHI0 = 2.067833848e-15  # magnetic flux quantum (Wb)
PHI0_RED = PHI0 / (2 * np.pi)  # reduced flux quantum (Wb)
HBAR = 1.054571817e-34
KB = 1.380649e-23

# applied 0.48 lands stage 1 at 0.41; stage 3 period is shorter by 1.26
STAGE1_FLUX_SCALE = 0.41 / 0.48
FLUX_PERIOD_RATIO = 1.26


@dataclass(frozen=True)
class StageGeometry:
    i0: float = 1.2e-6
    r: float = 6.0
    c0: float = 45e-15
    c_gnd: float = 110e-15
    tan_delta: float = 5e-4
    n_cells: int = 350
    cell_length: float = 10e-6
    flux_period_scale: float = 1.0

    def __post_init__(self):
        if not self.i0 > 0:
            raise DomainError("i0 must be positive")
        if not self.r >= 1:
            raise DomainError("junction area ratio r must be >= 1")
        if not (self.c0 > 0 and self.c_gnd > 0):
            raise DomainError("capacitances must be positive")
        if not self.tan_delta >= 0:
            raise DomainError("tan_delta must be >= 0")
        # zero cells is allowed: a stage can be removed from a cascade
        if int(self.n_cells) != self.n_cells or self.n_cells < 0:
            raise DomainError("n_cells must be an integer >= 0")
        if not self.flux_period_scale > 0:
            raise DomainError("flux_period_scale must be positive")

    @property
    def c_junction(self) -> float:
        """Series capacitance of one cell, C0 (r/2 + 2)."""
        return self.c0 * (self.r / 2 + 2)

    def with_cells(self, n: int) -> "StageGeometry":
        return replace(self, n_cells=int(n))


def reference_stages(n1: int = 350, n3: int = 350):
    """Stage-1 and stage-3 geometries of the reference device."""
    s1 = StageGeometry(n_cells=n1, flux_period_scale=STAGE1_FLUX_SCALE)
    s3 = StageGeometry(n_cells=n3, flux_period_scale=STAGE1_FLUX_SCALE * FLUX_PERIOD_RATIO)
    return s1, s3


@dataclass(frozen=True)
class FluxBias:
    phi_over_phi0: float = 0.0

    def __post_init__(self):
        if not np.isfinite(self.phi_over_phi0):
            raise DomainError("flux must be finite")


def _phi(flux) -> float:
    return float(flux.phi_over_phi0 if isinstance(flux, FluxBias) else flux)


@dataclass(frozen=True)
class LinearParams:
    l_cell: float
    gamma: float
    l0: float
    c_gnd: float
    tan_delta: float

    def g_of_omega(self, omega):
        """Shunt loss conductance G = omega C_gnd tan(delta)."""
        return np.asarray(omega) * self.c_gnd * self.tan_delta


def josephson_inductance(i0: float) -> float:
    if not i0 > 0:
        raise DomainError("critical current must be positive")
    return PHI0 / (2 * np.pi * i0)


def _inductance_denominator(geom: StageGeometry, flux) -> float:
    return geom.r / 2 + 2 * np.cos(2 * np.pi * _phi(flux))


def linear_params(geom: StageGeometry, flux) -> LinearParams:
    l0 = josephson_inductance(geom.i0)
    c = np.cos(2 * np.pi * _phi(flux))
    den = geom.r / 2 + 2 * c
    if den <= 0:
        raise FrustrationError(
            f"r/2 + 2cos(2 pi phi) = {den:.4g} <= 0 at flux {_phi(flux)}")
    gamma = (geom.r / 16 + c) / (3 * PHI0_RED**2 * l0)
    return LinearParams(l0 / den, gamma, l0, geom.c_gnd, geom.tan_delta)


def kerr_zero_flux(r: float) -> float:
    """Loop flux (in [0, 0.5]) where gamma changes sign."""
    if r > 16:
        raise DomainError("gamma never vanishes for r > 16")
    return float(np.arccos(-r / 16) / (2 * np.pi))


def cutoff_omega(geom: StageGeometry, flux) -> float:
    """Divergence frequency of the dispersion relation (rad/s)."""
    l0 = josephson_inductance(geom.i0)
    den = _inductance_denominator(geom, flux)
    if den <= 0:
        raise FrustrationError("stage beyond frustration")
    return float(np.sqrt(den / (l0 * geom.c_junction)))


def dispersion_k(omega, geom: StageGeometry, flux):
    """Wavenumber in rad/cell; multiply by cell_length for rad/m."""
    l0 = josephson_inductance(geom.i0)
    den = _inductance_denominator(geom, flux)
    if den <= 0:
        raise FrustrationError("stage beyond frustration")
    w = np.asarray(omega, dtype=float)
    inner = den - w**2 * l0 * geom.c_junction
    if np.any(inner <= 0):
        raise CutoffError(
            f"frequency at or above cutoff {cutoff_omega(geom, flux) / 2 / np.pi:.4g} Hz")
    k = w * np.sqrt(l0 * geom.c_gnd) / np.sqrt(inner)
    return k if k.ndim else float(k)


def characteristic_impedance(omega, geom: StageGeometry, flux):
    """Z0 = k / (omega C_gnd), continuous to sqrt(L/C_gnd) at omega = 0."""
    w = np.asarray(omega, dtype=float)
    lp = linear_params(geom, flux)
    z_dc = np.sqrt(lp.l_cell / geom.c_gnd)
    safe = np.where(w > 0, w, 1.0)
    k = np.asarray(dispersion_k(safe, geom, flux))
    z = np.where(w > 0, k / (safe * geom.c_gnd), z_dc)
    return z if z.ndim else float(z)


def stage_flux(applied: float, geom: StageGeometry) -> FluxBias:
    return FluxBias(applied * geom.flux_period_scale)


def flux_partition(applied_flux: float, stage1: StageGeometry, stage3: StageGeometry):
    return stage_flux(applied_flux, stage1), stage_flux(applied_flux, stage3)


def loss_per_cell(omega, geom: StageGeometry, flux):
    """Amplitude attenuation (Np/cell) from the shunt conductance, k tan(delta)/2."""
    return np.asarray(dispersion_k(omega, geom, flux)) * geom.tan_delta / 2
