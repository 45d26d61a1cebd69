"""Transient simulation of the nonlinear ladder in node-flux form.

Unknowns are node fluxes phi (V = dphi/dt). Each cell has a series branch
carrying i = d/L - gamma d^3 (d the branch flux) in parallel with C_J, and
a shunt C_gnd || G to ground. Integration is implicit trapezoidal; each step
is solved by a chord-Newton iteration on a pre-factored sparse matrix.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.signal import welch
from scipy.signal.windows import flattop
from scipy.sparse.linalg import splu

from . import coupled_mode as cm
from .device import (HBAR, PHI0, StageGeometry, characteristic_impedance,
                     linear_params, stage_flux)
from .errors import ConfigError, ConvergenceError, DomainError, LeakageError
from .netlist import Netlist
from .noise import source_energy


# --- network description -------------------------------------------------

@dataclass
class Cells:
    l: np.ndarray
    gamma: np.ndarray
    c_j: np.ndarray
    c_gnd: np.ndarray
    g: np.ndarray

    def __len__(self):
        return self.l.size


@dataclass
class LadderNetwork:
    """Ordered chain of ladder segments and lumped netlists between two ports."""
    segments: list
    source_impedance: float = 50.0
    load_impedance: float = 50.0

    def __post_init__(self):
        if not (self.source_impedance > 0 and self.load_impedance > 0):
            raise DomainError("port impedances must be positive")
        if self.n_cells < 2:
            raise DomainError("a ladder needs at least two cells")
        for kind, seg in self.segments:
            if kind == "cells":
                for name in ("l", "c_j", "c_gnd"):
                    if np.any(getattr(seg, name) <= 0):
                        raise DomainError(f"cell {name} must be positive")
                if np.any(seg.g < 0):
                    raise DomainError("cell conductance must be >= 0")

    @property
    def n_cells(self) -> int:
        return sum(len(s) for k, s in self.segments if k == "cells")

    @property
    def cells(self) -> Cells:
        parts = [s for k, s in self.segments if k == "cells"]
        return Cells(*(np.concatenate([getattr(p, f) for p in parts])
                       for f in ("l", "gamma", "c_j", "c_gnd", "g")))


def make_cells(geom: StageGeometry, flux, n_cells=None, omega_ref=2 * np.pi * 7.4e9,
               gamma_scale: float = 1.0) -> Cells:
    lp = linear_params(geom, flux)
    n = geom.n_cells if n_cells is None else int(n_cells)
    one = np.ones(n)
    return Cells(lp.l_cell * one, gamma_scale * lp.gamma * one, geom.c_junction * one,
                 geom.c_gnd * one, float(lp.g_of_omega(omega_ref)) * one)


def build_ladder(geom: StageGeometry, flux, ports=(50.0, 50.0), n_cells=None,
                 omega_ref=2 * np.pi * 7.4e9, gamma_scale: float = 1.0) -> LadderNetwork:
    """Single-stage ladder. G is frozen at omega_ref (time domain has one G)."""
    cells = make_cells(geom, flux, n_cells, omega_ref, gamma_scale)
    return LadderNetwork([("cells", cells)], float(ports[0]), float(ports[1]))


def build_mtwpa_ladder(cfg, ports=(50.0, 50.0), omega_ref=None) -> LadderNetwork:
    """Stage 1, lumped reflectionless filter, stage 3."""
    from .cascade import MorganFilter
    from .rfnet import morgan_netlist
    w = cfg.pump.omega_p if omega_ref is None else omega_ref
    f1, f3 = cfg.fluxes
    filt = cfg.filter if isinstance(cfg.filter, MorganFilter) else MorganFilter()
    net, p1, p2 = morgan_netlist(filt.l_f, filt.c_f, filt.n_stages, ports[0])
    segs = [("cells", make_cells(cfg.stage1, f1, omega_ref=w)),
            ("netlist", (net, p1, p2)),
            ("cells", make_cells(cfg.stage3, f3, omega_ref=w))]
    segs = [s for s in segs if s[0] != "cells" or len(s[1])]
    return LadderNetwork(segs, float(ports[0]), float(ports[1]))


@dataclass
class Circuit:
    """Flattened matrices; node indices 0..n-1, ground = -1."""
    n: int
    cmat: sp.csc_matrix
    gmat: sp.csc_matrix
    lin_a: np.ndarray
    lin_b: np.ndarray
    lin_l: np.ndarray
    nl_a: np.ndarray
    nl_b: np.ndarray
    nl_l: np.ndarray
    nl_gamma: np.ndarray
    source_node: int
    load_node: int
    r_s: float
    r_l: float


def _stamp(rows, cols, vals, a, b, v):
    for i, j, s in ((a, a, 1), (b, b, 1), (a, b, -1), (b, a, -1)):
        if i >= 0 and j >= 0:
            rows.append(i)
            cols.append(j)
            vals.append(s * v)


def compile_network(net: LadderNetwork) -> Circuit:
    n = 1
    cur = 0
    cr, cc, cv, gr, gc, gv = [], [], [], [], [], []
    la, lb, ll, na, nb, nl, ng = [], [], [], [], [], [], []
    for kind, seg in net.segments:
        if kind == "cells":
            for i in range(len(seg)):
                nxt = n
                n += 1
                _stamp(cr, cc, cv, cur, nxt, seg.c_j[i])
                _stamp(cr, cc, cv, nxt, -1, seg.c_gnd[i])
                if seg.g[i] > 0:
                    _stamp(gr, gc, gv, nxt, -1, seg.g[i])
                na.append(cur)
                nb.append(nxt)
                nl.append(seg.l[i])
                ng.append(seg.gamma[i])
                cur = nxt
        else:
            sub, p1, p2 = seg
            mapping = {0: -1, p1: cur}
            for e in sub.elements:
                for node in (e.a, e.b):
                    if node not in mapping:
                        mapping[node] = n
                        n += 1
            for e in sub.elements:
                a, b = mapping[e.a], mapping[e.b]
                if e.kind == "C":
                    _stamp(cr, cc, cv, a, b, e.value)
                elif e.kind == "R":
                    _stamp(gr, gc, gv, a, b, 1 / e.value)
                else:
                    la.append(a)
                    lb.append(b)
                    ll.append(e.value)
            cur = mapping[p2]
    _stamp(gr, gc, gv, 0, -1, 1 / net.source_impedance)
    _stamp(gr, gc, gv, cur, -1, 1 / net.load_impedance)
    cm_ = sp.csc_matrix((cv, (cr, cc)), shape=(n, n))
    gm = sp.csc_matrix((gv, (gr, gc)), shape=(n, n))
    arr = np.asarray
    return Circuit(n, cm_, gm, arr(la, int), arr(lb, int), arr(ll, float),
                   arr(na, int), arr(nb, int), arr(nl, float), arr(ng, float),
                   0, cur, net.source_impedance, net.load_impedance)


def _incidence(n, a, b):
    m = a.size
    rows = np.concatenate([np.arange(m), np.arange(m)])
    cols = np.concatenate([a, b])
    vals = np.concatenate([np.ones(m), -np.ones(m)])
    keep = cols >= 0
    return sp.csc_matrix((vals[keep], (rows[keep], cols[keep])), shape=(m, n))


# --- drive and output ----------------------------------------------------

@dataclass
class NoiseDrive:
    """Quantum-thermal source noise: emf PSD 4 R E(omega) up to bandwidth_hz."""
    temperature: float = 0.01
    bandwidth_hz: float = 50e9
    seed: int = 0


@dataclass
class DriveSpec:
    tones: list  # (frequency Hz, emf amplitude V, phase rad)
    duration: float
    dt: float
    noise: NoiseDrive | None = None
    settle_fraction: float = 0.5
    ramp: float = 0.0  # raised-cosine turn-on time for the tones (s)

    def __post_init__(self):
        if not self.dt > 0:
            raise ConfigError("dt must be positive")
        if not self.tones and self.noise is None:
            raise ConfigError("drive has no tones and no noise")
        if self.tones:
            f = np.array([t[0] for t in self.tones], dtype=float)
            if np.any(f <= 0):
                raise ConfigError("tone frequencies must be positive")
            if self.dt >= 1 / (20 * f.max()):
                raise ConfigError(f"dt {self.dt:.3g} s too coarse for {f.max():.4g} Hz (need dt < 1/(20 f_max))")
            if self.duration < 64 / f.min():
                raise ConfigError("duration must cover at least 64 periods of the lowest tone")
        if not 0 <= self.settle_fraction < 1:
            raise ConfigError("settle_fraction must lie in [0, 1)")
        if not 0 <= self.ramp <= self.settle_fraction * self.duration:
            raise ConfigError("ramp must finish inside the settling interval")

    @property
    def n_steps(self) -> int:
        return int(round(self.duration / self.dt))


def emf_for_power(power_w, r=50.0):
    """Open-circuit amplitude delivering power_w into a matched load."""
    return np.sqrt(8 * r * np.asarray(power_w))


def commensurate_drive(freqs_hz, amps, bin_hz, periods_dt=64, f_dt=None,
                       settle_fraction=0.5, noise=None, phases=None, ramp=0.0):
    """Drive whose recorded window holds every tone on an FFT bin.

    Tone frequencies are snapped to multiples of bin_hz; dt divides the
    window into an integer number of steps.
    """
    f = np.round(np.asarray(freqs_hz, float) / bin_hz) * bin_hz
    # whole number of bin periods, long enough for 64 periods of the lowest tone overall
    m = max(1, int(np.ceil(64 * (1 - settle_fraction) * bin_hz / f.min() - 1e-9)))
    window = m / bin_hz
    f_ref = f.max() if f_dt is None else f_dt
    n_win = int(np.ceil(window * periods_dt * f_ref))
    dt = window / n_win
    duration = window / (1 - settle_fraction)
    ph = np.zeros(f.size) if phases is None else phases
    tones = [(float(fi), float(a), float(p)) for fi, a, p in zip(f, np.broadcast_to(amps, f.shape), ph)]
    return DriveSpec(tones, duration, dt, noise, settle_fraction, ramp)


@dataclass
class SimOutput:
    t: np.ndarray
    probes: dict  # name -> voltage series over the recorded window
    emf: np.ndarray
    dt: float
    window_start: int
    energy: dict = field(default_factory=dict)
    spectra: dict = field(default_factory=dict)
    newton_max_iter: int = 0


def _noise_series(noise: NoiseDrive, n, dt, r):
    rng = np.random.default_rng(noise.seed)
    nf = n // 2 + 1
    f = np.fft.rfftfreq(n, dt)
    e = np.zeros(nf)
    band = (f > 0) & (f <= noise.bandwidth_hz)
    e[band] = source_energy(noise.temperature, 2 * np.pi * f[band])
    s_v = 4 * r * e  # single-sided emf PSD (V^2/Hz)
    df = 1 / (n * dt)
    # each bin is A cos + B sin with var(A) = var(B) = S_v df
    sigma = np.sqrt(s_v * df)
    spec = sigma * (n / 2) * (rng.standard_normal(nf) + 1j * rng.standard_normal(nf))
    return np.fft.irfft(spec, n)


def _emf(drive: DriveSpec, t, r_s):
    v = np.zeros_like(t)
    for f, a, p in drive.tones:
        v += a * np.cos(2 * np.pi * f * t + p)
    if drive.ramp > 0:
        v *= 0.5 - 0.5 * np.cos(np.pi * np.minimum(t / drive.ramp, 1.0))
    if drive.noise is not None:
        v += _noise_series(drive.noise, t.size, drive.dt, r_s)
    return v


def transient(network, drive: DriveSpec, probes=None, tol: float = 1e-12,
              max_iter: int = 50) -> SimOutput:
    """Fixed-step trapezoidal integration; records the window after settling."""
    circ = network if isinstance(network, Circuit) else compile_network(network)
    n, dt = circ.n, drive.dt
    probes = {"in": circ.source_node, "out": circ.load_node} if probes is None else probes
    steps = drive.n_steps
    t = np.arange(steps + 1) * dt
    e = _emf(drive, t, circ.r_s)
    i_src = e / circ.r_s

    b_lin = _incidence(n, circ.lin_a, circ.lin_b)
    b_nl = _incidence(n, circ.nl_a, circ.nl_b)
    k_lin = (b_lin.T @ sp.diags(1 / circ.lin_l) @ b_lin
             + b_nl.T @ sp.diags(1 / circ.nl_l) @ b_nl).tocsc()
    m2 = (2 / dt) * circ.cmat
    jac = (m2 + circ.gmat + (dt / 2) * k_lin).tocsc()
    lu = splu(jac)
    a0 = (m2 + circ.gmat).tocsr()
    g_csr = circ.gmat.tocsr()
    has_nl = np.any(circ.nl_gamma != 0)
    inv_l_nl = 1 / circ.nl_l
    gam = circ.nl_gamma
    cm_csr = circ.cmat.tocsr()

    # ground (-1) maps onto a trailing zero slot so plain indexing works
    na = np.where(circ.nl_a < 0, n, circ.nl_a)
    nb = np.where(circ.nl_b < 0, n, circ.nl_b)
    la = np.where(circ.lin_a < 0, n, circ.lin_a)
    lb = np.where(circ.lin_b < 0, n, circ.lin_b)
    inv_l_lin = 1 / circ.lin_l
    ext = np.zeros(n + 1)

    def force(phi):
        # a diverging Newton iterate overflows here; caught by the finiteness check
        ext[:n] = phi
        d = ext[na] - ext[nb]
        with np.errstate(over="ignore", invalid="ignore"):
            cur = d * inv_l_nl - gam * d**3
            f = np.bincount(na, cur, n + 1) - np.bincount(nb, cur, n + 1)
        if la.size:
            cl = (ext[la] - ext[lb]) * inv_l_lin
            f += np.bincount(la, cl, n + 1) - np.bincount(lb, cl, n + 1)
        return f[:n]

    phi = np.zeros(n)
    v = np.zeros(n)
    f_old = force(phi)
    start = int(round(steps * drive.settle_fraction))
    rec = {k: np.empty(steps - start + 1) for k in probes}
    src_idx = circ.source_node
    stored0 = None
    e_src = e_load = e_diss = 0.0
    worst = 0
    scale = PHI0 * tol
    inj = np.zeros(n)

    def energy(phi_, v_):
        d = b_nl @ phi_
        dl = b_lin @ phi_
        return (0.5 * v_ @ (cm_csr @ v_) + 0.5 * np.sum(d**2 * inv_l_nl)
                - 0.25 * np.sum(gam * d**4) + 0.5 * np.sum(dl**2 / circ.lin_l))

    for step in range(steps + 1):
        if step == start:
            for k, node in probes.items():
                rec[k][0] = v[node]
            stored0 = energy(phi, v)
        if step == steps:
            break
        inj[src_idx] = 0.5 * dt * (i_src[step] + i_src[step + 1])
        const = -2 * (cm_csr @ v) + 0.5 * dt * f_old - inj
        delta = lu.solve(-(const + (dt / 2) * force(phi)))
        if has_nl:
            for it in range(1, max_iter + 1):
                res = a0 @ delta + (dt / 2) * force(phi + delta) + const
                corr = lu.solve(res)
                delta -= corr
                size = np.max(np.abs(corr))
                if size <= scale:
                    worst = max(worst, it)
                    break
                if not np.isfinite(size):
                    raise ConvergenceError(
                        f"Newton diverged at step {step} (t = {step * dt:.4g} s)", step)
            else:
                raise ConvergenceError(
                    f"Newton did not converge at step {step} (t = {step * dt:.4g} s)", step)
        phi_new = phi + delta
        v_new = 2 * delta / dt - v
        if step >= start:
            vm = 0.5 * (v + v_new)
            em = 0.5 * (e[step] + e[step + 1])
            e_src += dt * vm[src_idx] * (em - vm[src_idx]) / circ.r_s
            e_load += dt * vm[circ.load_node] ** 2 / circ.r_l
            e_diss += dt * vm @ (g_csr @ vm) - dt * (vm[src_idx] ** 2 / circ.r_s
                                                          + vm[circ.load_node] ** 2 / circ.r_l)
            for k, node in probes.items():
                rec[k][step - start + 1] = v_new[node]
        phi, v = phi_new, v_new
        f_old = force(phi)
    stored1 = energy(phi, v)
    en = {"source": e_src, "load": e_load, "dissipated": e_diss,
          "stored_change": stored1 - stored0}
    return SimOutput(t[start:], rec, e[start:], dt, start, en, {}, worst)


# --- spectral extraction -------------------------------------------------

def _window_record(x):
    """Drop the last sample so the record spans exactly the window period."""
    return x[:-1]


def tone_phasor(x, dt, f_hz, check=True):
    """Complex amplitude of a tone via a periodic flat-top window."""
    x = _window_record(np.asarray(x))
    n = x.size
    pos = f_hz * n * dt
    m = int(round(pos))
    if check and abs(pos - m) > 1e-3:
        raise LeakageError(f"{f_hz:.6g} Hz sits {pos - m:+.3g} bins off the FFT grid; "
                           "choose a commensurate duration")
    w = flattop(n, sym=False)
    return 2 * np.sum(w * x * np.exp(-2j * np.pi * m * np.arange(n) / n)) / np.sum(w)


def extract_sparams(out: SimOutput, drive: DriveSpec, r_ref=None, r_load=None,
                    in_probe="in", out_probe="out"):
    """{frequency: (s21, s11)} at every drive tone, referenced to the source resistance."""
    res = {}
    for f, _, _ in drive.tones:
        ve = tone_phasor(out.emf, out.dt, f)
        v0 = tone_phasor(out.probes[in_probe], out.dt, f)
        vn = tone_phasor(out.probes[out_probe], out.dt, f)
        k = 1.0 if r_ref is None or r_load is None else np.sqrt(r_ref / r_load)
        res[f] = (2 * vn / ve * k, 2 * v0 / ve - 1)
    return res


def tone_transfer(out: SimOutput, f_in, f_out, drive_emf_phasor, r_ref=None, r_load=None):
    """Output phasor at f_out relative to the incident wave at f_in (power-normalised)."""
    vn = tone_phasor(out.probes["out"], out.dt, f_out)
    k = 1.0 if r_ref is None or r_load is None else np.sqrt(r_ref / r_load)
    return 2 * vn / drive_emf_phasor * k


# --- linear frequency-domain oracle --------------------------------------

def ladder_abcd_s21(cells: Cells, omega, r_s, r_l):
    """Exact small-signal s21 of a uniform-or-not ladder by ABCD products."""
    w = np.atleast_1d(np.asarray(omega, float))
    out = np.empty(w.size, complex)
    for q, wq in enumerate(w):
        s = 1j * wq
        m = np.eye(2, dtype=complex)
        for i in range(len(cells)):
            zs = 1 / (1 / (s * cells.l[i]) + s * cells.c_j[i])
            ysh = s * cells.c_gnd[i] + cells.g[i]
            m = m @ np.array([[1, zs], [0, 1]]) @ np.array([[1, 0], [ysh, 1]])
        a, b, c, d = m.ravel()
        out[q] = 2 * np.sqrt(r_s / r_l) / (a + b / r_l + c * r_s + d * r_s / r_l)
    return out


# --- measurement procedures ----------------------------------------------

@dataclass
class SpmCurve:
    power_w: np.ndarray
    theta: np.ndarray
    truncated: bool = False


def measure_spm_phase(network: LadderNetwork, f_pump: float, powers_w, bin_hz=None,
                      periods_dt=64, ref_power_w=None):
    """Pump transmission phase delay relative to a vanishing-power reference.

    theta = -(arg s21(P) - arg s21(0)), positive for a positive Kerr constant.
    """
    bin_hz = f_pump / 64 if bin_hz is None else bin_hz
    circ = compile_network(network)
    r = network.source_impedance

    def phase(p):
        d = commensurate_drive([f_pump], emf_for_power(p, r), bin_hz, periods_dt)
        o = transient(circ, d)
        return np.angle(extract_sparams(o, d, r, network.load_impedance)[d.tones[0][0]][0])

    p_ref = 1e-9 * float(np.min(powers_w)) if ref_power_w is None else ref_power_w
    ph0 = phase(p_ref)
    th, ok_p = [], []
    trunc = False
    for p in powers_w:
        try:
            th.append(-np.angle(np.exp(1j * (phase(p) - ph0))))
            ok_p.append(p)
        except ConvergenceError:
            trunc = True
            break
    return SpmCurve(np.array(ok_p), np.unwrap(np.array(th)), trunc)


@dataclass
class GainCurve:
    signal_power_w: np.ndarray
    gain_db: np.ndarray
    small_signal_db: float
    p1db_w: float | None


def measure_gain(network: LadderNetwork, f_pump, pump_power_w, f_signal, signal_power_w,
                 bin_hz=50e6, periods_dt=64, circ=None, ramp=0.0):
    """Signal power gain |s21|^2 (dB) with the pump on."""
    circ = compile_network(network) if circ is None else circ
    r = network.source_impedance
    d = commensurate_drive([f_pump, f_signal],
                           [emf_for_power(pump_power_w, r), emf_for_power(signal_power_w, r)],
                           bin_hz, periods_dt, f_dt=f_pump, ramp=ramp)
    o = transient(circ, d)
    fs = d.tones[1][0]
    s21, s11 = extract_sparams(o, d, r, network.load_impedance)[fs]
    return 20 * np.log10(abs(s21)), s11, fs, o


def measure_gain_and_saturation(network: LadderNetwork, f_pump, pump_power_w, f_signal,
                                signal_powers_w, bin_hz=50e6, periods_dt=64,
                                ramp=0.0) -> GainCurve:
    """Gain vs signal power; the first power defines the small-signal gain."""
    circ = compile_network(network)
    g = np.array([measure_gain(network, f_pump, pump_power_w, f_signal, p, bin_hz,
                               periods_dt, circ, ramp)[0] for p in signal_powers_w])
    ss = float(g[0])
    p1 = None
    below = np.nonzero(g <= ss - 1)[0]
    if below.size:
        j = below[0]
        x = np.log10(signal_powers_w)
        p1 = float(10 ** np.interp(ss - 1, [g[j], g[j - 1]], [x[j], x[j - 1]]))
    return GainCurve(np.asarray(signal_powers_w, float), g, ss, p1)


@dataclass
class NoiseResult:
    f_hz: np.ndarray
    backward: np.ndarray  # photons leaving port 1
    forward: np.ndarray  # photons of the injected incident wave
    seed: int

    @property
    def total(self):
        return self.forward + self.backward

    def band_mean(self, f_lo, f_hi, which="total"):
        m = (self.f_hz >= f_lo) & (self.f_hz <= f_hi)
        return float(np.mean(getattr(self, which)[m]))


def inject_noise_and_measure_input(network: LadderNetwork, seed: int = 0, pump=None,
                                   duration=40e-9, dt=None, temperature=0.01,
                                   bandwidth_hz=50e9, nperseg=1024) -> NoiseResult:
    """Input-referred noise in photons from source-resistor noise injection.

    pump: optional (frequency Hz, power W). The forward wave is e/2 and the
    backward wave V_in - e/2 in the source-resistance reference.
    """
    r = network.source_impedance
    dt = 1 / (2.5 * bandwidth_hz) if dt is None else dt
    tones = [] if pump is None else [(pump[0], float(emf_for_power(pump[1], r)), 0.0)]
    drive = DriveSpec(tones, duration, dt, NoiseDrive(temperature, bandwidth_hz, seed))
    out = transient(network, drive)
    e = out.emf
    fwd = e / 2
    bwd = out.probes["in"] - e / 2
    nperseg = min(nperseg, bwd.size)
    f, s_b = welch(bwd, fs=1 / dt, nperseg=nperseg, detrend=False)
    _, s_f = welch(fwd, fs=1 / dt, nperseg=nperseg, detrend=False)
    keep = (f > 0) & (f < bandwidth_hz)
    w = 2 * np.pi * f[keep]
    return NoiseResult(f[keep], s_b[keep] / (r * HBAR * w), s_f[keep] / (r * HBAR * w), seed)


def matched_ports(geom, flux, omega):
    z = float(characteristic_impedance(omega, geom, flux))
    return z, z


def evaluate_point_td(cfg, value, recalibrate=False, target_gain_db=20.0, theta_max=6.0):
    """Sweep row from transient runs: gain and s11 at the coupled-mode peak, noise by injection."""
    from .sweeps import SweepRow, calibrate_pump, find_phase_matching
    from .cascade import lower_lobe_peak
    if recalibrate:
        cfg = cfg.with_pump(calibrate_pump(cfg, target_gain_db, theta_max).pump)
    fpk, _ = lower_lobe_peak(cfg)
    net = build_mtwpa_ladder(cfg)
    fp = cfg.pump.omega_p / 2 / np.pi
    g, s11, fs, _ = measure_gain(net, fp, cfg.pump.power_w, fpk, 1e-18)
    nz = inject_noise_and_measure_input(net, 0, (fp, cfg.pump.power_w))
    noise = nz.band_mean(fs - 0.25e9, fs + 0.25e9)
    roots = tuple(r / (2 * np.pi) for r in find_phase_matching(cfg))
    return SweepRow(float(value), float(g), float(fs), float(-20 * np.log10(abs(s11))),
                    noise, float("nan"), roots)
