from dataclasses import replace

import numpy as np
import pytest

from mtwpa import cascade as cc
from mtwpa import coupled_mode as cm
from mtwpa import device as dv
from mtwpa import rfnet as rf
from mtwpa import sweeps as sw
from mtwpa.errors import ConfigError, DomainError


@pytest.fixture(scope="module")
def calibrated():
    cfg = cc.reference_config()
    return cfg.with_pump(sw.calibrate_pump(cfg, 20.0, theta_max=5.0).pump)


def _line_loss_db(cfg, w):
    f1, f3 = cfg.fluxes
    a = dv.loss_per_cell(w, cfg.stage1, f1) * cfg.stage1.n_cells
    a += dv.loss_per_cell(w, cfg.stage3, f3) * cfg.stage3.n_cells
    return 20 * np.log10(np.exp(-a))


def test_config_invariants():
    with pytest.raises(ConfigError):
        cc.reference_config(stage3_pump_derate_db=-1.0)
    with pytest.raises(ConfigError):
        cc.reference_config(pump=cm.PumpDrive.from_dbm(6e9, -75))
    with pytest.raises(ConfigError):
        cc.reference_config(interface_z_f=0.0)


def test_pump_off_is_filter_plus_line_loss():
    cfg = cc.reference_config().pump_off()
    grid = rf.FrequencyGrid.from_hz(np.linspace(1e9, 14e9, 131))
    s = cc.forward_gain_spectrum(cfg, grid)
    filt = rf.behavioral_highpass(cfg.filter, grid)
    oracle = 20 * np.log10(np.abs(filt.s21)) + _line_loss_db(cfg, grid.points)
    np.testing.assert_allclose(s.s21_db, oracle, atol=1e-9)
    assert np.all(np.isneginf(s.idler_db))


def test_pump_off_reciprocity():
    cfg = cc.reference_config().pump_off()
    grid = rf.FrequencyGrid.from_hz(np.linspace(1e9, 14e9, 131))
    s = cc.forward_gain_spectrum(cfg, grid)
    np.testing.assert_allclose(s.s21_db, s.s12_db, atol=1e-9)


def test_spectra_aligned(calibrated):
    grid = rf.FrequencyGrid.from_hz(np.linspace(3e9, 12e9, 91))
    s = cc.forward_gain_spectrum(calibrated, grid)
    for a in (s.s21_db, s.s12_db, s.s11_db, s.stage1_db, s.stage3_db, s.idler_db):
        assert a.shape == grid.hz.shape
    np.testing.assert_allclose(s.stage1_db + s.stage3_db, s.s21_db)


def test_pump_above_stage_cutoff_rejected():
    cfg = cc.reference_config(pump=cm.PumpDrive.from_dbm(40e9, -75))
    with pytest.raises(DomainError):
        cc.forward_gain_db(cfg, np.array([2 * np.pi * 5e9]))


def test_stop_band_uses_idler_path(calibrated):
    # oracle: stage-1 idler transfer x filter at the idler x stage-3 regeneration
    fpk, gpk = cc.lower_lobe_peak(calibrated)
    ws = 2 * np.pi * fpk
    wi = 2 * calibrated.pump.omega_p - ws
    f1, f3 = calibrated.fluxes
    c1 = cm.coefficients(calibrated.stage1, f1, calibrated.pump, np.array([ws]))
    c3 = cm.coefficients(calibrated.stage3, f3, calibrated.pump3, np.array([ws]))
    l1, l3 = calibrated.stage1.n_cells, calibrated.stage3.n_cells
    loss1 = np.exp(-(dv.loss_per_cell(ws, calibrated.stage1, f1) + dv.loss_per_cell(wi, calibrated.stage1, f1)) * l1)
    loss3 = np.exp(-(dv.loss_per_cell(ws, calibrated.stage3, f3) + dv.loss_per_cell(wi, calibrated.stage3, f3)) * l3)
    filt = rf.behavioral_highpass(calibrated.filter, rf.FrequencyGrid(np.array([wi])))
    idler = cm.idler_transfer(c1, l1)[0] * loss1 * abs(filt.s21[0]) ** 2 * cm.signal_regen_transfer(c3, l3)[0] * loss3
    # the direct path through the filter floor is ~75 dB down and does not matter
    assert gpk == pytest.approx(10 * np.log10(idler), abs=1e-3)


def test_calibrated_lobes(calibrated):
    f_lo, g_lo = cc.lower_lobe_peak(calibrated)
    f_hi, _ = cc.upper_lobe_peak(calibrated)
    assert g_lo == pytest.approx(20.0, abs=0.1)
    assert f_lo == pytest.approx(5.2e9, abs=0.3e9)
    assert f_hi == pytest.approx(9.5e9, abs=0.4e9)
    width, _ = cc.bandwidth_hz(calibrated)
    assert width == pytest.approx(1.6e9, abs=0.4e9)


def test_pump_frequency_tunes_lobes(calibrated):
    alt = cc.reference_config(pump=cm.PumpDrive.from_dbm(7.9e9, -75))
    alt = alt.with_pump(sw.calibrate_pump(alt, 20.0, theta_max=6.0).pump)
    assert cc.lower_lobe_peak(alt)[0] > cc.lower_lobe_peak(calibrated)[0] + 0.3e9
    assert cc.upper_lobe_peak(alt)[0] > cc.upper_lobe_peak(calibrated)[0]


def test_stop_band_gain_ignores_floor(calibrated):
    grid = rf.FrequencyGrid.from_hz(np.linspace(4.5e9, 5.5e9, 41))
    g50 = cc.forward_gain_spectrum(replace(calibrated, filter=rf.BehavioralHighpass(stopband_floor_db=50)), grid)
    g70 = cc.forward_gain_spectrum(replace(calibrated, filter=rf.BehavioralHighpass(stopband_floor_db=70)), grid)
    assert np.max(np.abs(g50.s21_db - g70.s21_db)) < 0.1


def test_reverse_isolation_anchors():
    cfg = cc.reference_config().pump_off()
    grid = rf.FrequencyGrid.from_hz(np.linspace(1e9, 6e9, 51))
    assert np.all(cc.reverse_isolation_spectrum(cfg, grid) <= -50)
    fc = cfg.filter.cutoff_hz
    pb = rf.FrequencyGrid.from_hz(np.linspace(fc + 2e9, 14e9, 20))
    iso = -cc.reverse_isolation_spectrum(cfg, pb)
    # 3 dB filter loss plus under a dB of dielectric loss in the two stages
    assert np.all((iso > 3.0) & (iso < 4.0))
    np.testing.assert_allclose(iso - 3.0, -_line_loss_db(cfg, pb.points), atol=0.05)


def test_reverse_isolation_empirical_offset(calibrated):
    grid = rf.FrequencyGrid.from_hz(np.linspace(3e9, 6e9, 31))
    ref = cc.reverse_isolation_spectrum(calibrated, grid)
    # floor chosen so the pump-off stop band isolates by 55 dB overall
    floor = replace(calibrated, filter=rf.BehavioralHighpass(stopband_floor_db=55.0 - (-ref.max() - 55.0)))
    base = cc.reverse_isolation_spectrum(floor, grid)
    assert base.max() == pytest.approx(-55.0, abs=1e-9)
    off = cc.reverse_isolation_spectrum(replace(floor, reverse_offset_db=20.0), grid)
    np.testing.assert_allclose(off, base + 20.0)
    assert np.max(off) == pytest.approx(-35.0, abs=1e-9)
    # pump off ignores the offset entirely
    np.testing.assert_allclose(
        cc.reverse_isolation_spectrum(replace(floor, reverse_offset_db=20.0).pump_off(), grid), base)


def test_gamma_arithmetic():
    g = cc._gamma(22.0, 50.0)
    assert abs(g) == pytest.approx(28 / 72, rel=1e-12)
    assert abs(g) == pytest.approx(0.389, abs=1e-3)


def test_zero_flux_return_loss_pump_off():
    cfg = cc.reference_config(applied_flux=0.0).pump_off()
    grid = rf.FrequencyGrid.from_hz([1e9])
    gin = cc.port_reflection(cfg, grid.points)[0]
    assert np.sqrt(gin) == pytest.approx(0.389, abs=0.01)
    rl = cc.return_loss_spectrum(cfg, grid)[0]
    # port step alone is 8.2 dB; the interface echo adds another similar term
    assert 4.0 < rl < -20 * np.log10(0.389)


def test_matched_interfaces_no_reflection():
    cfg = cc.reference_config(filter=rf.BehavioralHighpass(return_loss_db=400.0)).pump_off()
    w = 2 * np.pi * np.array([5e9])
    f1, _ = cfg.fluxes
    z = float(dv.characteristic_impedance(w, cfg.stage1, f1)[0])
    m = replace(cfg, interface_z_f=z, port_z=z)
    assert cc.port_reflection(m, w)[0] < 1e-24
    assert cc.interface_reflection(m, w)[0] < 1e-24
    assert cc.return_loss_spectrum(m, rf.FrequencyGrid(w))[0] > 200


def test_return_loss_formula(calibrated):
    w = np.array([2 * np.pi * 5e9])
    f1, _ = calibrated.fluxes
    c = cm.coefficients(calibrated.stage1, f1, calibrated.pump, w)
    l1 = calibrated.stage1.n_cells
    h1 = cm.power_gain(c, l1)[0] * np.exp(-4 * dv.loss_per_cell(w, calibrated.stage1, f1)[0] * l1)
    s11 = cc.port_reflection(calibrated, w)[0] + cc.interface_reflection(calibrated, w)[0] * h1
    assert cc.return_loss_spectrum(calibrated, rf.FrequencyGrid(w))[0] == pytest.approx(-10 * np.log10(s11))
    coh = replace(calibrated, coherent_return_loss=True)
    assert cc.return_loss_spectrum(coh, rf.FrequencyGrid(w))[0] < -10 * np.log10(s11)


def test_pump_worsens_return_loss(calibrated):
    f, _ = cc.lower_lobe_peak(calibrated)
    grid = rf.FrequencyGrid.from_hz([f])
    off = cc.return_loss_spectrum(calibrated.pump_off(), grid)[0]
    on = cc.return_loss_spectrum(calibrated, grid)[0]
    assert 4.0 < off - on < 8.0


def test_return_loss_monotone_in_stage1_length(calibrated):
    f, _ = cc.lower_lobe_peak(calibrated)
    grid = rf.FrequencyGrid.from_hz([f])
    rl = [cc.return_loss_spectrum(calibrated.with_lengths(l1, 700 - l1), grid)[0]
          for l1 in range(50, 651, 50)]
    assert np.all(np.diff(rl) < 0)


def test_roots_straddle_pump(calibrated):
    roots = sw.find_phase_matching(calibrated)
    wp = calibrated.pump.omega_p
    assert len(roots) == 2
    assert roots[0] < wp < roots[1]


def test_extinction_additive_in_floor(calibrated):
    e = [cc.extinction_ratio(replace(calibrated, filter=rf.BehavioralHighpass(stopband_floor_db=x)))
         for x in (45.0, 55.0, 65.0)]
    assert e[1] - e[0] == pytest.approx(10.0, abs=1e-3)
    assert e[2] - e[1] == pytest.approx(10.0, abs=1e-3)


def test_extinction_zero_without_gain():
    assert cc.extinction_ratio(cc.reference_config().pump_off()) == 0.0


def test_extinction_72(calibrated):
    fpk, gpk = cc.lower_lobe_peak(calibrated)
    w = np.array([2 * np.pi * fpk])
    off55 = cc.forward_gain_db(calibrated.pump_off(), w)[0]
    # choose the floor so the pump-off stop band sits at -52 dB overall
    floor = 55.0 - (-52.0 - off55)
    cfg = replace(calibrated, filter=rf.BehavioralHighpass(stopband_floor_db=floor))
    assert cc.forward_gain_db(cfg.pump_off(), w)[0] == pytest.approx(-52.0, abs=1e-6)
    assert cc.extinction_ratio(cfg) == pytest.approx(72.0, abs=0.1)


def test_gain_distribution_reference(calibrated):
    s1, s3, idl = cc.gain_distribution(calibrated)
    assert s1 + s3 == pytest.approx(20.0, abs=0.1)
    # roughly half the gain before the filter; loose because the anchor comes from a circuit simulator
    assert s1 == pytest.approx(10.0, abs=3.5)
    assert idl < s1


def test_gain_distribution_no_first_stage(calibrated):
    cfg = calibrated.with_lengths(0, 700)
    s1, _, idl = cc.gain_distribution(cfg)
    assert s1 == 0.0
    assert np.isneginf(idl)
    w = 2 * np.pi * np.linspace(4.5e9, 5.5e9, 11)
    h1, ti1, _, idler, _ = cc._paths(cfg, w)
    assert np.all(idler == 0)


def test_gain_distribution_short_stage1(calibrated):
    cfg = cc.reference_config(l1=150, l3=550)
    cfg = cfg.with_pump(sw.calibrate_pump(cfg, 20.0, theta_max=6.0).pump)
    s1, s3, _ = cc.gain_distribution(cfg)
    assert s1 < 2.0
    assert s1 + s3 == pytest.approx(20.0, abs=0.1)
