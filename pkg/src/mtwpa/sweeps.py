"""Phase-matching roots, pump calibration and single-variable design sweeps."""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.optimize import brentq

from . import cascade as cc
from . import coupled_mode as cm
from .errors import CalibrationError, ConfigError
from .noise import input_backaction_estimate

VARIABLES = ("stage1_length", "filter_impedance", "pump_power", "applied_flux", "pump_frequency")
EVALUATORS = ("coupled_mode", "time_domain")
POLICIES = ("stage3_absorbs", "recalibrate_pump")


def mismatch_function(cfg: cc.MtwpaConfig, stage: int = 1):
    geom = cfg.stage1 if stage == 1 else cfg.stage3
    flux = cfg.fluxes[0] if stage == 1 else cfg.fluxes[1]
    pump = cfg.pump if stage == 1 else cfg.pump3
    return lambda w: cm.total_mismatch(geom, flux, pump, w)


def find_phase_matching(cfg: cc.MtwpaConfig, stage: int = 1, step_hz: float = 1e6,
                        tol_hz: float = 1e3):
    """Signal frequencies (rad/s) where the total mismatch kappa vanishes.

    Roots are bracketed by sign changes on a step_hz grid and refined by
    Brent's method. With the pump off kappa only touches zero at the pump.
    """
    if cfg.pump.power_w == 0:
        return [cfg.pump.omega_p]
    kap = mismatch_function(cfg, stage)
    lo, hi = cc.search_band_hz(cfg)
    f = np.arange(lo, hi, step_hz)
    v = kap(2 * np.pi * f)
    roots = []
    for j in np.nonzero(np.sign(v[:-1]) * np.sign(v[1:]) <= 0)[0]:
        a, b = f[j], f[j + 1]
        if v[j] == 0:
            roots.append(2 * np.pi * a)
            continue
        if v[j + 1] == 0:
            continue
        r = brentq(lambda x: kap(2 * np.pi * x), a, b, xtol=tol_hz)
        roots.append(2 * np.pi * r)
    return roots


@dataclass
class Calibration:
    pump: cm.PumpDrive
    peak_db: float
    peak_hz: float
    theta_nl: float


def _lower_peak_db(cfg, p_dbm):
    return cc.lower_lobe_peak(cfg.with_pump(cm.PumpDrive.from_dbm(cfg.pump.omega_p / 2 / np.pi, p_dbm)))[1]


def theta_nl(cfg: cc.MtwpaConfig) -> float:
    return cm.nonlinear_phase(cfg.stage1, cfg.stage3, cfg.fluxes, cfg.pump,
                              derate_db=cfg.stage3_pump_derate_db)


def calibrate_pump(cfg: cc.MtwpaConfig, target_gain_db: float, theta_max: float = 4.0,
                   p_range_dbm=(-110.0, -55.0), tol_db: float = 1e-4) -> Calibration:
    """Pump power giving a stop-band (idler-path) peak gain equal to the target.

    Bisection in dBm. Raises CalibrationError when the required nonlinear
    phase exceeds theta_max.
    """
    fp = cfg.pump.omega_p / (2 * np.pi)
    if target_gain_db <= 0:
        off = cfg.pump_off()
        f, g = cc.lower_lobe_peak(off)
        return Calibration(off.pump, g, f, 0.0)
    lo, hi = p_range_dbm

    def theta_at(p):
        return abs(theta_nl(cfg.with_pump(cm.PumpDrive.from_dbm(fp, p))))

    # cap the upper end at the nonlinear-phase bound (theta is linear in power)
    p_cap = hi
    th_hi = theta_at(hi)
    if th_hi > theta_max:
        p_cap = hi + 10 * np.log10(theta_max / th_hi)
    if _lower_peak_db(cfg, p_cap) < target_gain_db:
        need = _bisect(cfg, target_gain_db, lo, hi, tol_db)
        raise CalibrationError(
            f"{target_gain_db} dB needs |theta_NL| = {theta_at(need):.3g} rad > bound {theta_max}")
    p = _bisect(cfg, target_gain_db, lo, p_cap, tol_db)
    new = cfg.with_pump(cm.PumpDrive.from_dbm(fp, p))
    f, g = cc.lower_lobe_peak(new)
    return Calibration(new.pump, g, f, theta_nl(new))


def _bisect(cfg, target, lo, hi, tol_db):
    if _lower_peak_db(cfg, lo) > target:
        raise CalibrationError("target gain reached below the lowest pump power searched")
    if _lower_peak_db(cfg, hi) < target:
        raise CalibrationError("target gain not reached in the pump range searched")
    while hi - lo > tol_db:
        mid = 0.5 * (lo + hi)
        if _lower_peak_db(cfg, mid) < target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass
class SweepSpec:
    variable: str
    values: np.ndarray
    config: cc.MtwpaConfig
    evaluator: str = "coupled_mode"
    policy: str = "stage3_absorbs"
    total_length: int | None = None
    target_gain_db: float = 20.0
    theta_max: float = 6.0

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=float)
        if self.variable not in VARIABLES:
            raise ConfigError(f"unknown sweep variable {self.variable!r}")
        if self.evaluator not in EVALUATORS:
            raise ConfigError(f"unknown evaluator {self.evaluator!r}")
        if self.policy not in POLICIES:
            raise ConfigError(f"unknown policy {self.policy!r}")
        if self.values.size == 0:
            raise ConfigError("sweep range is empty")

    @classmethod
    def from_range(cls, variable, start, stop, step, config, **kw):
        if not step > 0:
            raise ConfigError("sweep step must be positive")
        vals = np.arange(start, stop + step / 2, step)
        return cls(variable, vals, config, **kw)


@dataclass
class SweepRow:
    value: float
    peak_gain_db: float
    peak_hz: float
    return_loss_db: float
    input_noise: float
    stage1_gain_db: float
    phase_matching_hz: tuple = ()


@dataclass
class SweepResult:
    variable: str
    rows: list
    manifest: dict = field(default_factory=dict)

    def column(self, name):
        return np.array([getattr(r, name) for r in self.rows])

    def argmin(self, name="input_noise"):
        return self.rows[int(np.argmin(self.column(name)))]


def _apply(spec: SweepSpec, v):
    cfg = spec.config
    if spec.variable == "stage1_length":
        total = spec.total_length or (cfg.stage1.n_cells + cfg.stage3.n_cells)
        l1 = int(round(v))
        if spec.policy == "stage3_absorbs":
            return cfg.with_lengths(l1, total - l1)
        return cfg.with_lengths(l1, cfg.stage3.n_cells)
    if spec.variable == "filter_impedance":
        return replace(cfg, interface_z_f=float(v))
    if spec.variable == "pump_power":
        return cfg.with_pump(cm.PumpDrive.from_dbm(cfg.pump.omega_p / 2 / np.pi, v))
    if spec.variable == "applied_flux":
        return replace(cfg, applied_flux=float(v))
    return cfg.with_pump(cm.PumpDrive.from_dbm(v, cfg.pump.power_dbm))


def evaluate_point(cfg: cc.MtwpaConfig, value: float, recalibrate: bool = False,
                   target_gain_db: float = 20.0, theta_max: float = 6.0) -> SweepRow:
    if recalibrate:
        cfg = cfg.with_pump(calibrate_pump(cfg, target_gain_db, theta_max).pump)
    fpk, gpk = cc.lower_lobe_peak(cfg)
    w = np.array([2 * np.pi * fpk])
    h1 = cc._stage_terms(cfg.stage1, cfg.fluxes[0], cfg.pump, w, cfg.stage1.n_cells)[1][0]
    rl = float(cc.return_loss_spectrum(cfg, cc.FrequencyGrid(w))[0])
    gif = float(cc.interface_reflection(cfg, w)[0])
    noise = input_backaction_estimate(h1, -10 * np.log10(gif))
    roots = tuple(r / (2 * np.pi) for r in find_phase_matching(cfg))
    return SweepRow(float(value), float(gpk), float(fpk), rl, float(noise),
                    float(10 * np.log10(h1)), roots)


def _run(spec: SweepSpec, workers: int | None = None) -> SweepResult:
    if spec.evaluator == "time_domain":
        from .timedomain import evaluate_point_td as fn
    else:
        fn = evaluate_point
    recal = spec.policy == "recalibrate_pump" or spec.variable == "stage1_length"

    def task(v):
        cfg = _apply(spec, v)
        return fn(cfg, v, recalibrate=recal and spec.variable != "pump_power",
                  target_gain_db=spec.target_gain_db, theta_max=spec.theta_max)

    with ThreadPoolExecutor(max_workers=workers) as ex:
        rows = list(ex.map(task, spec.values))
    order = np.argsort(spec.values, kind="stable")
    rows = [rows[i] for i in order]
    manifest = {"variable": spec.variable, "evaluator": spec.evaluator,
                "policy": spec.policy, "n_points": len(rows)}
    return SweepResult(spec.variable, rows, manifest)


def sweep_stage_length(spec: SweepSpec, workers: int | None = None) -> SweepResult:
    if spec.variable != "stage1_length":
        raise ConfigError("sweep_stage_length needs variable 'stage1_length'")
    return _run(spec, workers)


def sweep_filter_impedance(spec: SweepSpec, workers: int | None = None) -> SweepResult:
    if spec.variable != "filter_impedance":
        raise ConfigError("sweep_filter_impedance needs variable 'filter_impedance'")
    return _run(spec, workers)


def sweep(spec: SweepSpec, workers: int | None = None) -> SweepResult:
    return _run(spec, workers)
