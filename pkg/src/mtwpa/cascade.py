"""Three-stage composition: stage 1, reflectionless high-pass, stage 3.

Below the filter cutoff the signal itself is absorbed; gain comes from the
idler that stage 1 generates, which passes the filter and regenerates the
signal in stage 3. Above cutoff the signal passes directly. Both paths are
summed in power, so each band reduces to its own closed form.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import coupled_mode as cm
from .device import (StageGeometry, characteristic_impedance, cutoff_omega,
                     dispersion_k, flux_partition, loss_per_cell, reference_stages)
from .errors import ConfigError, DomainError
from .rfnet import (BehavioralHighpass, FrequencyGrid, TwoPortResponse,
                    behavioral_highpass, morgan_highpass, resample)


@dataclass(frozen=True)
class MorganFilter:
    l_f: float = 1.4e-9
    c_f: float = 0.7e-12
    n_stages: int = 2


@dataclass(frozen=True)
class MtwpaConfig:
    stage1: StageGeometry
    stage3: StageGeometry
    filter: object = field(default_factory=BehavioralHighpass)
    applied_flux: float = 0.48
    pump: cm.PumpDrive = field(default_factory=lambda: cm.PumpDrive.from_dbm(7.4e9, -75))
    stage3_pump_derate_db: float = 2.0
    interface_z_f: float = 50.0
    port_z: float = 50.0
    reverse_offset_db: float = 0.0
    coherent_return_loss: bool = False

    def __post_init__(self):
        if self.stage3_pump_derate_db < 0:
            raise ConfigError("stage-3 pump derate must be >= 0")
        if not (self.interface_z_f > 0 and self.port_z > 0):
            raise ConfigError("impedances must be positive")
        if isinstance(self.filter, BehavioralHighpass):
            if self.pump.omega_p / (2 * np.pi) <= self.filter.cutoff_hz:
                raise ConfigError("pump must lie in the filter pass band")

    @property
    def fluxes(self):
        return flux_partition(self.applied_flux, self.stage1, self.stage3)

    @property
    def pump3(self) -> cm.PumpDrive:
        return self.pump.scaled(10 ** (-self.stage3_pump_derate_db / 10))

    def with_pump(self, pump) -> "MtwpaConfig":
        return replace(self, pump=pump)

    def pump_off(self) -> "MtwpaConfig":
        return replace(self, pump=cm.PumpDrive(self.pump.omega_p, 0.0))

    def with_lengths(self, l1: int, l3: int) -> "MtwpaConfig":
        return replace(self, stage1=self.stage1.with_cells(l1), stage3=self.stage3.with_cells(l3))


def reference_config(**kw) -> MtwpaConfig:
    s1, s3 = reference_stages(kw.pop("l1", 350), kw.pop("l3", 350))
    return MtwpaConfig(s1, s3, **kw)


@dataclass
class CascadeSpectra:
    grid: FrequencyGrid
    s21_db: np.ndarray
    s12_db: np.ndarray
    s11_db: np.ndarray
    stage1_db: np.ndarray
    stage3_db: np.ndarray
    idler_db: np.ndarray

    @property
    def f_hz(self):
        return self.grid.hz


def filter_response(cfg: MtwpaConfig, omega) -> TwoPortResponse:
    g = FrequencyGrid(np.asarray(omega, dtype=float))
    f = cfg.filter
    if isinstance(f, BehavioralHighpass):
        return behavioral_highpass(f, g)
    if isinstance(f, MorganFilter):
        return morgan_highpass(f.l_f, f.c_f, f.n_stages, g)
    if isinstance(f, TwoPortResponse):
        return resample(f, g.points)
    raise ConfigError(f"unsupported filter model {type(f).__name__}")


def _filter_at(cfg, omega):
    """Filter response at arbitrary (unsorted) frequencies."""
    w = np.asarray(omega, dtype=float)
    order = np.argsort(w)
    uniq, inv = np.unique(w[order], return_inverse=True)
    r = filter_response(cfg, uniq)
    out = {}
    for name in ("s11", "s12", "s21", "s22"):
        v = np.empty(w.shape, dtype=complex)
        v[order] = getattr(r, name)[inv]
        out[name] = v
    return out


def _check_pump(cfg):
    f1, f3 = cfg.fluxes
    for geom, fl in ((cfg.stage1, f1), (cfg.stage3, f3)):
        if cfg.pump.omega_p >= cutoff_omega(geom, fl):
            raise DomainError("pump above stage cutoff")


def _stage_terms(geom, flux, pump, omega_s, length):
    """Power transfers of one stage including the dielectric loss envelope."""
    c = cm.coefficients(geom, flux, pump, omega_s)
    ws = np.asarray(omega_s, dtype=float)
    ls = loss_per_cell(ws, geom, flux)
    li = loss_per_cell(2 * pump.omega_p - ws, geom, flux)
    direct = cm.power_gain(c, length) * np.exp(-2 * ls * length)
    cross = np.exp(-(ls + li) * length)
    return c, direct, cm.idler_transfer(c, length) * cross, cm.signal_regen_transfer(c, length) * cross


def _db(x):
    with np.errstate(divide="ignore"):
        return 10 * np.log10(x)


def _paths(cfg: MtwpaConfig, omega_s):
    _check_pump(cfg)
    f1, f3 = cfg.fluxes
    ws = np.asarray(omega_s, dtype=float)
    wi = 2 * cfg.pump.omega_p - ws
    _, h1, ti1, _ = _stage_terms(cfg.stage1, f1, cfg.pump, ws, cfg.stage1.n_cells)
    _, h3, _, ts3 = _stage_terms(cfg.stage3, f3, cfg.pump3, ws, cfg.stage3.n_cells)
    fs = _filter_at(cfg, ws)
    fi = _filter_at(cfg, wi)
    direct = h1 * np.abs(fs["s21"]) ** 2 * h3
    idler = ti1 * np.abs(fi["s21"]) ** 2 * ts3
    return h1, ti1, direct, idler, fs


def forward_gain_spectrum(cfg: MtwpaConfig, grid: FrequencyGrid) -> CascadeSpectra:
    h1, ti1, direct, idler, _ = _paths(cfg, grid.points)
    total = direct + idler
    s21 = _db(total)
    s1 = _db(h1)
    return CascadeSpectra(grid, s21, reverse_isolation_spectrum(cfg, grid),
                          return_loss_spectrum(cfg, grid, as_s11=True),
                          s1, s21 - s1, _db(ti1))


def forward_gain_db(cfg: MtwpaConfig, omega_s):
    _, _, direct, idler, _ = _paths(cfg, omega_s)
    return _db(direct + idler)


def _passive_line_db(cfg, omega):
    f1, f3 = cfg.fluxes
    a = loss_per_cell(omega, cfg.stage1, f1) * cfg.stage1.n_cells \
        + loss_per_cell(omega, cfg.stage3, f3) * cfg.stage3.n_cells
    return -20 * a / np.log(10)


def reverse_isolation_spectrum(cfg: MtwpaConfig, grid: FrequencyGrid):
    """Reverse transmission s12 in dB (negative numbers; isolation is its magnitude).

    Pump-off value is the passive filter plus line loss. With the pump on the
    labelled empirical offset cfg.reverse_offset_db is added, capped at the
    filter's level at the pump (always in the pass band); this is not a model
    of the degradation mechanism.
    """
    w = grid.points
    f = _filter_at(cfg, w)
    off = 20 * np.log10(np.abs(f["s12"])) + _passive_line_db(cfg, w)
    if cfg.pump.power_w == 0 or cfg.reverse_offset_db == 0:
        return off
    cap = 20 * np.log10(np.abs(_filter_at(cfg, [cfg.pump.omega_p])["s12"][0])) + _passive_line_db(cfg, w)
    return np.minimum(off + cfg.reverse_offset_db, cap)


def pumped_impedance(geom, flux, pump, omega_s):
    """Stage impedance seen by the signal with the pump's cross-phase shift."""
    k = dispersion_k(omega_s, geom, flux)
    a_s, _, _ = cm.spm_xpm_coefficients(geom, flux, pump, omega_s)
    return (k + a_s) / (np.asarray(omega_s) * geom.c_gnd)


def _gamma(za, zb):
    return (za - zb) / (za + zb)


def interface_reflection(cfg: MtwpaConfig, omega_s):
    """|Gamma|^2 at the stage-1 / filter interface.

    The impedance step Z_f vs the pumped stage impedance and the filter's own
    input mismatch are added in power (unknown relative phase).
    """
    f1, _ = cfg.fluxes
    z1 = pumped_impedance(cfg.stage1, f1, cfg.pump, omega_s)
    step = np.abs(_gamma(cfg.interface_z_f, z1)) ** 2
    return step + np.abs(_filter_at(cfg, omega_s)["s11"]) ** 2


def port_reflection(cfg: MtwpaConfig, omega_s):
    f1, _ = cfg.fluxes
    z1 = pumped_impedance(cfg.stage1, f1, cfg.pump, omega_s)
    return np.abs(_gamma(z1, cfg.port_z)) ** 2


def return_loss_spectrum(cfg: MtwpaConfig, grid: FrequencyGrid, as_s11: bool = False):
    """Return loss (dB, positive) from the port step and the amplified interface echo."""
    w = grid.points
    f1, _ = cfg.fluxes
    h1 = _stage_terms(cfg.stage1, f1, cfg.pump, w, cfg.stage1.n_cells)[1]
    gin = port_reflection(cfg, w)
    gif = interface_reflection(cfg, w)
    # the echo traverses stage 1 twice: once amplified, once back as loss
    echo = gif * h1 * np.exp(-2 * loss_per_cell(w, cfg.stage1, f1) * cfg.stage1.n_cells)
    if cfg.coherent_return_loss:
        s11 = (np.sqrt(gin) + np.sqrt(echo)) ** 2
    else:
        s11 = gin + echo
    return _db(s11) if as_s11 else -_db(s11)


def _peak(cfg, lo_hz, hi_hz, n=1500):
    f = np.linspace(lo_hz, hi_hz, n)
    g = forward_gain_db(cfg, 2 * np.pi * f)
    i = int(np.argmax(g))
    a, b = f[max(i - 1, 0)], f[min(i + 1, n - 1)]
    ff = np.linspace(a, b, 201)
    gg = forward_gain_db(cfg, 2 * np.pi * ff)
    j = int(np.argmax(gg))
    return ff[j], gg[j]


def search_band_hz(cfg: MtwpaConfig):
    """Signal band in which both signal and idler propagate in both stages."""
    f1, f3 = cfg.fluxes
    wc = min(cutoff_omega(cfg.stage1, f1), cutoff_omega(cfg.stage3, f3))
    fp = cfg.pump.omega_p / (2 * np.pi)
    fc = 0.98 * wc / (2 * np.pi)
    return max(0.2e9, 2 * fp - fc), min(fc, 2 * fp - 0.2e9)


def lower_lobe_peak(cfg: MtwpaConfig):
    """(frequency Hz, gain dB) of the gain maximum below the pump."""
    lo, _ = search_band_hz(cfg)
    return _peak(cfg, lo, cfg.pump.omega_p / (2 * np.pi) - 1e6)


def upper_lobe_peak(cfg: MtwpaConfig):
    _, hi = search_band_hz(cfg)
    return _peak(cfg, cfg.pump.omega_p / (2 * np.pi) + 1e6, hi)


def peak_gain(cfg: MtwpaConfig):
    a, b = lower_lobe_peak(cfg), upper_lobe_peak(cfg)
    return a if a[1] >= b[1] else b


def bandwidth_hz(cfg: MtwpaConfig, level_db: float = 17.0, n: int = 4001):
    """Width of the contiguous region around the lower-lobe peak with gain >= level."""
    fpk, gpk = lower_lobe_peak(cfg)
    if gpk < level_db:
        return 0.0, (fpk, fpk)
    lo, _ = search_band_hz(cfg)
    f = np.linspace(lo, cfg.pump.omega_p / (2 * np.pi), n)
    g = forward_gain_db(cfg, 2 * np.pi * f) - level_db
    i = int(np.argmin(np.abs(f - fpk)))
    a = i
    while a > 0 and g[a - 1] >= 0:
        a -= 1
    b = i
    while b < n - 1 and g[b + 1] >= 0:
        b += 1

    def edge(j0, j1):
        return f[j0] + (f[j1] - f[j0]) * g[j0] / (g[j0] - g[j1])

    fa = edge(a - 1, a) if a > 0 else f[0]
    fb = edge(b, b + 1) if b < n - 1 else f[-1]
    return fb - fa, (fa, fb)


def extinction_ratio(cfg: MtwpaConfig) -> float:
    """Pump-on stop-band peak gain minus pump-off transmission there (dB)."""
    fpk, gpk = lower_lobe_peak(cfg)
    off = forward_gain_db(cfg.pump_off(), np.array([2 * np.pi * fpk]))[0]
    return float(gpk - off)


def gain_distribution(cfg: MtwpaConfig):
    """(stage-1 signal gain, remaining gain from stage 3, idler at filter) in dB at the lower-lobe peak."""
    fpk, gpk = lower_lobe_peak(cfg)
    h1, ti1, _, _, _ = _paths(cfg, np.array([2 * np.pi * fpk]))
    s1 = float(_db(h1)[0])
    return s1, float(gpk - s1), float(_db(ti1)[0])
