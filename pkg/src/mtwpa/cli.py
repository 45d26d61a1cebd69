"""mtwpa command-line tool.

  mtwpa gain --config run.json --out results/
  mtwpa noisefit                      # packaged synthetic Y-factor data
  mtwpa noisefit data.csv --bandwidth 1e6

Exit codes: 0 success, 2 invalid input, 3 numerical failure.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import json
import sys
from dataclasses import replace
from importlib import resources
from pathlib import Path

import numpy as np

from . import __version__
from . import cascade as cc
from . import config as rc
from . import coupled_mode as cm
from . import device as dv
from . import noise as nz
from . import rfnet
from . import sweeps as sw
from .errors import ConfigError, MtwpaError, NumericalError

FMT = "%.9g"


class Run:
    """Collects written files and emits the manifest last."""

    def __init__(self, command, raw, out):
        self.command = command
        self.raw = raw
        self.out = Path(out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.files = []

    def table(self, name, header, cols):
        path = self.out / name
        data = np.column_stack([np.asarray(c, dtype=float) for c in cols])
        np.savetxt(path, data, fmt=FMT, delimiter=",", header=",".join(header), comments="")
        self.files.append(path)
        return path

    def text(self, name, body):
        path = self.out / name
        path.write_text(body, encoding="utf-8")
        self.files.append(path)
        return path

    def add(self, path):
        self.files.append(Path(path))

    def gnuplot(self, name, csv_name, xcol, ycols, xlabel, ylabel, xscale=1.0):
        plots = ", ".join(f"'{csv_name}' using (${xcol}/{xscale:g}):{c} with lines title '{t}'"
                          for c, t in ycols)
        body = (f"set datafile separator ','\nset key autotitle columnhead\n"
                f"set xlabel '{xlabel}'\nset ylabel '{ylabel}'\nset grid\n"
                f"set terminal pngcairo size 900,600\nset output '{Path(name).stem}.png'\n"
                f"plot {plots}\n")
        return self.text(name, body)

    def manifest(self, extra=None):
        m = {"command": self.command, "version": __version__,
             "inputs_sha256": rc.inputs_hash(self.raw), "seed": self.raw.get("seed", 0),
             "config": self.raw,
             "outputs": {p.name: hashlib.sha256(p.read_bytes()).hexdigest() for p in self.files}}
        if extra:
            m.update(extra)
        path = self.out / "manifest.json"
        path.write_text(json.dumps(m, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        return path


def _cfg_with_pump(raw, theta_max=None):
    cfg = rc.build_mtwpa(raw)
    p = raw.get("pump", {})
    # no explicit power means: calibrate to the reference 20 dB operating point
    target = p.get("calibrate_to_db", None if "power_dbm" in p else 20.0)
    cal = None
    if target is not None:
        cal = sw.calibrate_pump(cfg, target, p.get("theta_max", theta_max or 5.0))
        cfg = cfg.with_pump(cal.pump)
    return cfg, cal


# --- subcommands ---------------------------------------------------------

def cmd_dispersion(raw, run: Run, args):
    cfg = rc.build_mtwpa(raw)
    f_hz = rc.grid_hz(raw, (0.0, 30e9, 301))
    w = 2 * np.pi * f_hz
    f1, f3 = cfg.fluxes
    cols, head = [f_hz], ["f_hz"]
    for tag, geom, flux in (("flux0", cfg.stage1, 0.0), ("stage1", cfg.stage1, f1),
                            ("stage3", cfg.stage3, f3)):
        wc = dv.cutoff_omega(geom, flux)
        ok = w < wc
        k = np.full(w.size, np.nan)
        z = np.full(w.size, np.nan)
        k[ok] = dv.dispersion_k(w[ok], geom, flux)
        z[ok] = [float(dv.characteristic_impedance(x, geom, flux)) for x in w[ok]]
        cols += [k, z]
        head += [f"k_{tag}_rad_per_cell", f"z0_{tag}_ohm"]
    run.table("dispersion.csv", head, cols)
    phi = np.linspace(0, 0.5, raw.get("flux_grid_points", 101))
    lp = [dv.linear_params(cfg.stage1, p) for p in phi]
    run.table("inductance.csv", ["flux_phi0", "l_cell_h", "gamma"],
              [phi, [x.l_cell for x in lp], [x.gamma for x in lp]])
    run.gnuplot("dispersion.gp", "dispersion.csv", 1, [(3, "flux 0"), (5, "stage 1"), (7, "stage 3")],
                "frequency (GHz)", "Z0 (ohm)", 1e9)
    z_low = float(dv.characteristic_impedance(0.0, cfg.stage1, 0.0))
    print(f"Z0 at flux 0, low frequency: {z_low:.2f} ohm")
    print(f"Z0 stage 1 at pump: {float(dv.characteristic_impedance(cfg.pump.omega_p, cfg.stage1, f1)):.2f} ohm")


def _s2p_from_spectra(sp: cc.CascadeSpectra):
    mag = lambda db: (10 ** (np.asarray(db) / 20)).astype(complex)
    return rfnet.TwoPortResponse(sp.grid, mag(sp.s11_db), mag(sp.s12_db), mag(sp.s21_db),
                                 mag(sp.s11_db))


def cmd_gain(raw, run: Run, args):
    cfg, cal = _cfg_with_pump(raw)
    if args.pump_off:
        cfg = cfg.pump_off()
    grid = rc.build_grid(raw)
    sp = cc.forward_gain_spectrum(cfg, grid)
    run.table("gain.csv", ["f_hz", "s21_db", "s12_db", "s11_db", "stage1_db", "stage3_db", "idler_db"],
              [sp.f_hz, sp.s21_db, sp.s12_db, sp.s11_db, sp.stage1_db, sp.stage3_db, sp.idler_db])
    rfnet.export_touchstone(_s2p_from_spectra(sp), run.out / "gain.s2p",
                            ["power-wave magnitudes from the incoherent cascade model; phases not modelled"])
    run.add(run.out / "gain.s2p")
    run.gnuplot("gain.gp", "gain.csv", 1, [(2, "s21"), (3, "s12")], "frequency (GHz)", "dB", 1e9)
    fpk, gpk = cc.lower_lobe_peak(cfg)
    print(f"pump {cfg.pump.power_dbm:.3f} dBm at {cfg.pump.omega_p / 2 / np.pi / 1e9:.4g} GHz")
    print(f"peak gain {gpk:.2f} dB at {fpk / 1e9:.4f} GHz")
    if cfg.pump.power_w > 0:
        print(f"bandwidth (>= 17 dB) {cc.bandwidth_hz(cfg)[0] / 1e9:.4f} GHz")
    roots = sw.find_phase_matching(cfg)
    print("phase matching (GHz): " + ", ".join(f"{r / 2 / np.pi / 1e9:.4f}" for r in roots))
    extra = {"pump_dbm": cfg.pump.power_dbm}
    if cal is not None:
        extra["theta_nl"] = cal.theta_nl
    return extra


def cmd_isolation(raw, run: Run, args):
    cfg, _ = _cfg_with_pump(raw)
    grid = rc.build_grid(raw)
    off = cc.reverse_isolation_spectrum(cfg.pump_off(), grid)
    on = cc.reverse_isolation_spectrum(cfg, grid)
    run.table("isolation.csv", ["f_hz", "s12_pump_off_db", "s12_pump_on_db"], [grid.hz, off, on])
    run.gnuplot("isolation.gp", "isolation.csv", 1, [(2, "pump off"), (3, "pump on")],
                "frequency (GHz)", "s12 (dB)", 1e9)
    fpk, _ = cc.lower_lobe_peak(cfg)
    at = cc.reverse_isolation_spectrum(cfg.pump_off(), rfnet.FrequencyGrid.from_hz([fpk]))[0]
    print(f"pump-off isolation at {fpk / 1e9:.4f} GHz: {-at:.1f} dB")
    if cfg.reverse_offset_db:
        print(f"pump-on curve includes an empirical {cfg.reverse_offset_db:g} dB degradation offset")


def cmd_returnloss(raw, run: Run, args):
    cfg, _ = _cfg_with_pump(raw)
    grid = rc.build_grid(raw)
    off = cc.return_loss_spectrum(cfg.pump_off(), grid)
    on = cc.return_loss_spectrum(cfg, grid)
    run.table("returnloss.csv", ["f_hz", "rl_pump_off_db", "rl_pump_on_db"], [grid.hz, off, on])
    run.gnuplot("returnloss.gp", "returnloss.csv", 1, [(2, "pump off"), (3, "pump on")],
                "frequency (GHz)", "return loss (dB)", 1e9)
    fpk, _ = cc.lower_lobe_peak(cfg)
    rl = float(cc.return_loss_spectrum(cfg, rfnet.FrequencyGrid.from_hz([fpk]))[0])
    print(f"return loss at gain peak {fpk / 1e9:.4f} GHz: {rl:.2f} dB")


def cmd_sweep(raw, run: Run, args):
    if "sweep" not in raw:
        raise ConfigError("config has no 'sweep' section")
    s = dict(raw["sweep"])
    cfg, _ = _cfg_with_pump(raw, s.get("theta_max", 6.0))
    spec = sw.SweepSpec.from_range(s.pop("variable"), s.pop("start"), s.pop("stop"),
                                   s.pop("step"), cfg, **s)
    res = sw.sweep(spec, workers=args.workers)
    roots = [";".join(f"{r:.9g}" for r in row.phase_matching_hz) for row in res.rows]
    path = run.out / "sweep.csv"
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["value", "peak_gain_db", "peak_hz", "return_loss_db", "input_noise_photons",
                    "stage1_gain_db", "phase_matching_hz"])
        for row, r in zip(res.rows, roots):
            w.writerow([FMT % row.value, FMT % row.peak_gain_db, FMT % row.peak_hz,
                        FMT % row.return_loss_db, FMT % row.input_noise, FMT % row.stage1_gain_db, r])
    run.add(path)
    run.gnuplot("sweep.gp", "sweep.csv", 1, [(5, "input noise (photons)")], spec.variable,
                "photons")
    best = res.argmin()
    print(f"minimum input noise {best.input_noise:.4f} photons at {spec.variable} = {best.value:g}")
    return {"sweep": res.manifest}


def cmd_timedomain(raw, run: Run, args):
    from . import timedomain as td
    t = raw.get("timedomain", {})
    mode = t.get("mode", "linear")
    cfg = rc.build_mtwpa(raw)
    fp = cfg.pump.omega_p / 2 / np.pi
    geom = cfg.stage1
    if t.get("lossless", False):
        geom = replace(geom, tan_delta=0.0)
    flux = t.get("flux", cfg.fluxes[0])
    if t.get("network", "stage1") == "mtwpa":
        ports = tuple(t.get("ports", (cfg.port_z, cfg.port_z)))
        net = td.build_mtwpa_ladder(cfg, ports)
    else:
        ports = tuple(t.get("ports", td.matched_ports(geom, flux, cfg.pump.omega_p)))
        net = td.build_ladder(geom, flux, ports, t.get("n_cells"),
                              gamma_scale=0.0 if mode == "linear" else 1.0)
    bin_hz = t.get("bin_hz", 100e6)
    periods = t.get("periods_dt", 64)
    sig = t.get("signal_hz", [5e9])
    p_sig = cm.dbm_to_watt(t.get("signal_dbm", -130.0))
    extra = {"mode": mode, "ports_ohm": list(ports)}

    def drive_for(freqs, amps, f_dt=None, noise=None):
        if "dt" in t or "duration" in t:
            if not ("dt" in t and "duration" in t):
                raise ConfigError("timedomain: give both dt and duration, or neither")
            return td.DriveSpec([(float(f), float(a), 0.0) for f, a in zip(freqs, amps)],
                                t["duration"], t["dt"], noise, t.get("settle_fraction", 0.5),
                                t.get("ramp", 0.0))
        return td.commensurate_drive(freqs, amps, bin_hz, periods, f_dt,
                                     t.get("settle_fraction", 0.5), noise, ramp=t.get("ramp", 0.0))

    def dump_series(out, tag=""):
        run.table(f"series{tag}.csv", ["t_s", "emf_v", "v_in_v", "v_out_v"],
                  [out.t, out.emf, out.probes["in"], out.probes["out"]])
        x = out.probes["out"][:-1]
        f = np.fft.rfftfreq(x.size, out.dt)
        run.table(f"spectrum{tag}.csv", ["f_hz", "v_in_abs", "v_out_abs"],
                  [f, np.abs(np.fft.rfft(out.probes["in"][:-1])) * 2 / x.size,
                   np.abs(np.fft.rfft(x)) * 2 / x.size])

    if mode == "linear":
        amps = td.emf_for_power(np.full(len(sig), p_sig), ports[0])
        d = drive_for(sig, amps)
        out = td.transient(net, d)
        sp = td.extract_sparams(out, d, ports[0], ports[1])
        fs = np.array(sorted(sp))
        s21 = np.array([sp[f][0] for f in fs])
        s11 = np.array([sp[f][1] for f in fs])
        dump_series(out)
        cols = [fs, s21.real, s21.imag, s11.real, s11.imag, 20 * np.log10(np.abs(s21))]
        head = ["f_hz", "s21_re", "s21_im", "s11_re", "s11_im", "s21_db"]
        if len(net.segments) == 1:
            ref = td.ladder_abcd_s21(net.cells, 2 * np.pi * fs, ports[0], ports[1])
            err = np.abs(s21 - ref) / np.abs(ref)
            cols += [ref.real, ref.imag, err]
            head += ["abcd_s21_re", "abcd_s21_im", "rel_error"]
            for f, e in zip(fs, err):
                print(f"{f / 1e9:.4f} GHz: |s21 - analytic| / |analytic| = {e:.2e} "
                      f"({'within' if e < 5e-3 else 'outside'} 0.5%)")
        run.table("sparams.csv", head, cols)
    elif mode == "gain":
        p_pump = cfg.pump.power_w
        amps = td.emf_for_power(np.array([p_pump] + [p_sig] * len(sig)), ports[0])
        d = drive_for([fp] + list(sig), amps, f_dt=fp)
        out = td.transient(net, d)
        sp = td.extract_sparams(out, d, ports[0], ports[1])
        fs = np.array([x[0] for x in d.tones[1:]])
        s21 = np.array([sp[f][0] for f in fs])
        s11 = np.array([sp[f][1] for f in fs])
        dump_series(out)
        run.table("sparams.csv", ["f_hz", "s21_re", "s21_im", "s11_re", "s11_im", "gain_db"],
                  [fs, s21.real, s21.imag, s11.real, s11.imag, 20 * np.log10(np.abs(s21))])
        for f, s in zip(fs, s21):
            print(f"{f / 1e9:.4f} GHz: gain {20 * np.log10(abs(s)):.2f} dB")
        extra["newton_max_iter"] = out.newton_max_iter
    elif mode == "spm":
        powers = cm.dbm_to_watt(np.array(t.get("pump_powers_dbm", [-95, -90, -85, -80])))
        curve = td.measure_spm_phase(net, fp, powers, bin_hz, periods)
        run.table("spm.csv", ["pump_w", "theta_rad"], [curve.power_w, curve.theta])
        run.gnuplot("spm.gp", "spm.csv", 1, [(2, "theta")], "pump power (W)", "theta (rad)")
        extra["truncated"] = curve.truncated
        print(f"nonlinear phase at {powers[len(curve.theta) - 1]:.3g} W: {curve.theta[-1]:.4f} rad"
              + (" (curve truncated: Newton failed at higher power)" if curve.truncated else ""))
    else:
        pump = None if t.get("pump_powers_dbm") is None else (fp, cm.dbm_to_watt(t["pump_powers_dbm"][0]))
        bw = t.get("noise_bandwidth_hz", 50e9)
        res = td.inject_noise_and_measure_input(
            net, raw.get("seed", 0), pump, t.get("duration", 40e-9), t.get("dt"),
            t.get("temperature", 0.01), bw)
        run.table("noise.csv", ["f_hz", "forward_photons", "backward_photons", "total_photons"],
                  [res.f_hz, res.forward, res.backward, res.total])
        run.gnuplot("noise.gp", "noise.csv", 1, [(2, "forward"), (3, "backward"), (4, "total")],
                    "frequency (GHz)", "photons", 1e9)
        f0 = sig[0]
        print(f"input noise near {f0 / 1e9:.3g} GHz: "
              f"{res.band_mean(f0 - 0.25e9, f0 + 0.25e9):.4f} photons")
    return extra


def _read_yfactor_csv(path):
    """Rows of temperature_k, frequency_hz, power_w; '# bandwidth_hz=...' comments allowed."""
    meta, rows = {}, []
    text = Path(path).read_text(encoding="utf-8") if not hasattr(path, "read_text") else path.read_text()
    header_seen = False
    for n, line in enumerate(text.splitlines(), 1):
        s = line.strip()
        if not s:
            continue
        if s.startswith("#"):
            if "=" in s:
                k, v = s[1:].split("=", 1)
                meta[k.strip()] = v.strip()
            continue
        parts = [p.strip() for p in s.split(",")]
        if not header_seen and parts[0] == "temperature_k":
            header_seen = True
            continue
        if len(parts) != 3:
            raise ConfigError(f"{path}: row {n}: expected 3 fields, got {len(parts)}")
        try:
            rows.append([float(p) for p in parts])
        except ValueError:
            raise ConfigError(f"{path}: row {n}: non-numeric field in {s!r}") from None
    if not rows:
        raise ConfigError(f"{path}: no data rows")
    return np.array(rows), meta


def packaged_yfactor():
    return resources.files("mtwpa") / "data" / "yfactor_synthetic.csv"


def cmd_noisefit(raw, run: Run, args):
    src = args.data or raw.get("noisefit", {}).get("data") or packaged_yfactor()
    a, meta = _read_yfactor_csv(src)
    bw = args.bandwidth or raw.get("noisefit", {}).get("bandwidth_hz") or float(meta.get("bandwidth_hz", 0))
    if not bw:
        raise ConfigError("bandwidth not given (use --bandwidth or a '# bandwidth_hz=' line)")
    data = nz.YFactorDataset(a[:, 0], 2 * np.pi * a[:, 1], a[:, 2], bw)
    fit = nz.fit_y_factor(data)
    run.table("noisefit.csv", ["f_hz", "t_hemt_k", "gain_db", "residual_rms"],
              [fit.omega / 2 / np.pi, fit.t_hemt, fit.gain_db, fit.residual_rms])
    run.gnuplot("noisefit.gp", "noisefit.csv", 1, [(2, "T_HEMT")], "frequency (GHz)", "K", 1e9)
    print(f"fitted {fit.omega.size} frequencies: T_HEMT {fit.t_hemt.min():.4g} to "
          f"{fit.t_hemt.max():.4g} K")
    if "t_hemt_k" in meta:
        ref = float(meta["t_hemt_k"])
        print(f"embedded T_HEMT {ref:g} K, worst relative error "
              f"{np.max(np.abs(fit.t_hemt / ref - 1)):.2e}")
    return {"data_source": str(src) if args.data or raw.get("noisefit", {}).get("data")
            else "packaged:yfactor_synthetic.csv"}


def cmd_export_touchstone(raw, run: Run, args):
    cfg = rc.build_mtwpa(raw)
    grid = rc.build_grid(raw, (0.1e9, 20e9, 1000))
    resp = cc.filter_response(cfg, grid.points)
    name = "filter.s2p"
    kind = "lumped reflectionless" if isinstance(cfg.filter, cc.MorganFilter) else "behavioral"
    rfnet.export_touchstone(resp, run.out / name, [f"{kind} high-pass filter"])
    run.add(run.out / name)
    print(f"wrote {run.out / name} ({grid.points.size} points)")


COMMANDS = {
    "dispersion": cmd_dispersion,
    "gain": cmd_gain,
    "isolation": cmd_isolation,
    "returnloss": cmd_returnloss,
    "timedomain": cmd_timedomain,
    "sweep": cmd_sweep,
    "noisefit": cmd_noisefit,
    "export-touchstone": cmd_export_touchstone,
}


def build_parser():
    ap = argparse.ArgumentParser(prog="mtwpa", description="Multi-stage TWPA simulator.")
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", help="JSON run configuration")
        p.add_argument("--out", help="output directory (default: config output_dir or ./out)")
        if name == "gain":
            p.add_argument("--pump-off", action="store_true", help="pump off: pure filter response")
        if name == "sweep":
            p.add_argument("--workers", type=int, default=None)
        if name == "noisefit":
            p.add_argument("data", nargs="?", help="CSV: temperature_k,frequency_hz,power_w")
            p.add_argument("--bandwidth", type=float, help="measurement bandwidth (Hz)")
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        raw = rc.load(args.config) if args.config else rc.validate({})
        out = args.out or raw.get("output_dir", "out")
        run = Run(args.command, raw, out)
        extra = COMMANDS[args.command](raw, run, args)
        run.manifest(extra)
    except NumericalError as exc:
        step = getattr(exc, "step", None)
        print(f"error: {exc}" + (f" [step {step}]" if step is not None else ""), file=sys.stderr)
        return 3
    except (MtwpaError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
