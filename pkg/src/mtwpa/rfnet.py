"""Two-port algebra, reflectionless high-pass filter models and Touchstone I/O."""
from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DomainError, GridMismatchError
from .netlist import Netlist, port_admittance, s_from_y

Z_REF = 50.0


@dataclass(frozen=True)
class FrequencyGrid:
    points: np.ndarray  # angular frequency (rad/s)

    def __post_init__(self):
        p = np.asarray(self.points, dtype=float).ravel()
        if p.size == 0:
            raise DomainError("frequency grid is empty")
        if np.any(p <= 0) or not np.all(np.isfinite(p)):
            raise DomainError("grid frequencies must be positive and finite")
        if np.any(np.diff(p) <= 0):
            raise DomainError("grid must be strictly increasing")
        object.__setattr__(self, "points", p)

    @classmethod
    def from_hz(cls, f_hz):
        return cls(2 * np.pi * np.asarray(f_hz, dtype=float))

    @classmethod
    def linspace_hz(cls, f0, f1, n):
        return cls.from_hz(np.linspace(f0, f1, int(n)))

    @property
    def hz(self):
        return self.points / (2 * np.pi)

    def __len__(self):
        return self.points.size

    def same_as(self, other: "FrequencyGrid") -> bool:
        return len(self) == len(other) and np.array_equal(self.points, other.points)


@dataclass
class TwoPortResponse:
    grid: FrequencyGrid
    s11: np.ndarray
    s12: np.ndarray
    s21: np.ndarray
    s22: np.ndarray

    def __post_init__(self):
        n = len(self.grid)
        for name in ("s11", "s12", "s21", "s22"):
            v = np.broadcast_to(np.asarray(getattr(self, name), dtype=complex), (n,)).copy()
            setattr(self, name, v)

    @classmethod
    def from_matrix(cls, grid, s):
        return cls(grid, s[:, 0, 0], s[:, 0, 1], s[:, 1, 0], s[:, 1, 1])

    @property
    def matrix(self):
        return np.stack([np.stack([self.s11, self.s12], -1),
                         np.stack([self.s21, self.s22], -1)], -2)

    def db(self, name="s21"):
        with np.errstate(divide="ignore"):
            return 20 * np.log10(np.abs(getattr(self, name)))

    def max_singular_value(self):
        return np.linalg.svd(self.matrix, compute_uv=False).max(axis=-1)

    def reversed(self) -> "TwoPortResponse":
        return TwoPortResponse(self.grid, self.s22, self.s21, self.s12, self.s11)


def thru(grid) -> TwoPortResponse:
    return TwoPortResponse(grid, 0, 1, 1, 0)


def attenuator(grid, db: float) -> TwoPortResponse:
    t = 10 ** (-db / 20)
    return TwoPortResponse(grid, 0, t, t, 0)


def from_netlist(net: Netlist, ports, grid, z0=Z_REF) -> TwoPortResponse:
    s = s_from_y(port_admittance(net, ports, grid.points), z0)
    return TwoPortResponse.from_matrix(grid, s)


def to_abcd(r: TwoPortResponse, z0=Z_REF):
    s11, s12, s21, s22 = r.s11, r.s12, r.s21, r.s22
    d = 2 * s21
    a = ((1 + s11) * (1 - s22) + s12 * s21) / d
    b = z0 * ((1 + s11) * (1 + s22) - s12 * s21) / d
    c = ((1 - s11) * (1 - s22) - s12 * s21) / (d * z0)
    dd = ((1 - s11) * (1 + s22) + s12 * s21) / d
    return np.stack([np.stack([a, b], -1), np.stack([c, dd], -1)], -2)


def from_abcd(grid, m, z0=Z_REF) -> TwoPortResponse:
    a, b, c, d = m[:, 0, 0], m[:, 0, 1], m[:, 1, 0], m[:, 1, 1]
    den = a + b / z0 + c * z0 + d
    s11 = (a + b / z0 - c * z0 - d) / den
    s12 = 2 * (a * d - b * c) / den
    s21 = 2 / den
    s22 = (-a + b / z0 - c * z0 + d) / den
    return TwoPortResponse(grid, s11, s12, s21, s22)


def cascade(a: TwoPortResponse, b: TwoPortResponse) -> TwoPortResponse:
    """a followed by b.

    Equivalent to multiplying ABCD matrices, written as the S-domain
    (Redheffer) product so that blocked transmission (s21 = 0) stays finite.
    """
    if not a.grid.same_as(b.grid):
        raise GridMismatchError("cascade requires identical frequency grids")
    den = 1 - a.s22 * b.s11
    s11 = a.s11 + a.s12 * b.s11 * a.s21 / den
    s21 = b.s21 * a.s21 / den
    s12 = a.s12 * b.s12 / den
    s22 = b.s22 + b.s21 * a.s22 * b.s12 / den
    return TwoPortResponse(a.grid, s11, s12, s21, s22)


def resample(r: TwoPortResponse, omega) -> TwoPortResponse:
    """Linear interpolation in complex S onto new frequencies."""
    g = FrequencyGrid(omega)
    out = []
    for v in (r.s11, r.s12, r.s21, r.s22):
        out.append(np.interp(g.points, r.grid.points, v.real)
                   + 1j * np.interp(g.points, r.grid.points, v.imag))
    return TwoPortResponse(g, *out)


# --- reflectionless high-pass --------------------------------------------

def dual_pair(l_f: float, c_f: float, z0: float = Z_REF):
    """Nearest (geometric-mean) inductor/capacitor pair with L = z0^2 C."""
    m = np.sqrt(l_f * c_f)
    return z0 * m, m / z0


def morgan_section(l_f: float, c_f: float, z0: float = Z_REF):
    """One symmetric constant-resistance bridged-T high-pass section.

    Nodes: 1 = port 1, 2 = port 2, 3 = centre.
        R  1-3, 3-2    arms (z0)
        L  3-0         centre shunt
        C  1-2         bridge
    With L = z0^2 C the bridge is the z0-dual of the centre shunt: the even-
    and odd-mode halves present reciprocal impedances, the ports are matched
    at every frequency and s21 = sL / (z0 + sL). (l_f, c_f) are replaced by
    their nearest dual pair, which leaves an already-dual input untouched.
    """
    if not (l_f > 0 and c_f > 0 and z0 > 0):
        raise DomainError("filter elements must be positive")
    ls, cb = dual_pair(l_f, c_f, z0)
    net = Netlist()
    for _ in range(3):
        net.node()
    net.add("R", 1, 3, z0)
    net.add("R", 3, 2, z0)
    net.add("L", 3, 0, ls)
    net.add("C", 1, 2, cb)
    return net


def morgan_netlist(l_f: float, c_f: float, n_stages: int = 2, z0: float = Z_REF):
    """Cascade of identical sections; returns (netlist, port1 node, port2 node)."""
    if int(n_stages) != n_stages or n_stages < 1:
        raise DomainError("n_stages must be an integer >= 1")
    net = Netlist()
    first = net.node()
    left = first
    for _ in range(int(n_stages)):
        right = net.node()
        net.merge(morgan_section(l_f, c_f, z0), {1: left, 2: right})
        left = right
    return net, first, left


def morgan_highpass(l_f: float, c_f: float, n_stages: int, grid: FrequencyGrid,
                    z0: float = Z_REF) -> TwoPortResponse:
    net, p1, p2 = morgan_netlist(l_f, c_f, n_stages, z0)
    return from_netlist(net, (p1, p2), grid, z0)


@dataclass(frozen=True)
class BehavioralHighpass:
    cutoff_hz: float = 7.3e9
    rolloff_db_per_ghz: float = 60.0
    stopband_floor_db: float = 55.0
    passband_il_db: float = 3.0
    return_loss_db: float = 15.0
    min_phase: bool = False

    def __post_init__(self):
        if not self.rolloff_db_per_ghz > 0:
            raise DomainError("roll-off must be positive")
        if not (self.stopband_floor_db >= 0 and self.passband_il_db >= 0):
            raise DomainError("floor and insertion loss must be >= 0")
        if not self.cutoff_hz > 0:
            raise DomainError("cutoff must be positive")

    def s21_db(self, f_hz):
        f = np.asarray(f_hz, dtype=float)
        drop = self.rolloff_db_per_ghz * np.clip(self.cutoff_hz - f, 0, None) / 1e9
        return -self.passband_il_db - np.minimum(drop, self.stopband_floor_db)


def _minimum_phase(mag_db_fn, f_hz, f_max):
    """Minimum phase from log-magnitude via the folded cepstrum on a dense grid."""
    n = 1 << 16
    ff = np.linspace(0, f_max, n // 2 + 1)
    logmag = mag_db_fn(ff) * np.log(10) / 20
    spec = np.concatenate([logmag, logmag[-2:0:-1]])
    cep = np.fft.ifft(spec).real
    fold = np.zeros(n)
    fold[0] = cep[0]
    fold[1:n // 2] = 2 * cep[1:n // 2]
    fold[n // 2] = cep[n // 2]
    phase = np.fft.fft(fold).imag[: n // 2 + 1]
    return np.interp(f_hz, ff, phase)


def behavioral_highpass(model: BehavioralHighpass, grid: FrequencyGrid) -> TwoPortResponse:
    f = grid.hz
    mag = 10 ** (model.s21_db(f) / 20)
    if model.min_phase:
        s21 = mag * np.exp(1j * _minimum_phase(model.s21_db, f, max(4 * f.max(), 4 * model.cutoff_hz)))
    else:
        s21 = mag.astype(complex)
    g = 10 ** (-model.return_loss_db / 20)
    return TwoPortResponse(grid, g, s21, s21, g)


def balanced_compose(hybrid_il_db: float, hybrid_phase_deg: float,
                     filt: TwoPortResponse, filt_b: TwoPortResponse | None = None
                     ) -> TwoPortResponse:
    """Quadrature-hybrid balanced pair of filters.

    Each hybrid passes amplitude t to its through arm and t e^{-j phi} to its
    coupled arm (phi nominally 90 deg). Filter reflections recombine at the
    input as t^2 (G_a + e^{-2j phi} G_b), which cancels for identical filters
    and ideal quadrature; the cancelled wave is absorbed in the isolated
    port's load. Output reference planes are rotated by the nominal
    quadrature so the ideal composition is transparent.
    """
    filt_b = filt if filt_b is None else filt_b
    if not filt.grid.same_as(filt_b.grid):
        raise GridMismatchError("balanced arms must share a grid")
    t = 10 ** (-hybrid_il_db / 20)
    q = np.exp(-1j * np.deg2rad(hybrid_phase_deg))
    rot = np.exp(1j * np.pi / 2)
    s11 = t**2 * (filt.s11 + q**2 * filt_b.s11)
    s22 = t**2 * (filt.s22 + q**2 * filt_b.s22) * rot**2
    s21 = t**2 * q * (filt.s21 + filt_b.s21) * rot
    s12 = t**2 * q * (filt.s12 + filt_b.s12) * rot
    return TwoPortResponse(filt.grid, s11, s12, s21, s22)


# --- Touchstone ----------------------------------------------------------

def export_touchstone(resp: TwoPortResponse, path, comments=()):
    lines = [f"! {c}" for c in comments]
    lines.append(f"# HZ S RI R {Z_REF:g}")
    for i, f in enumerate(resp.grid.hz):
        vals = [f]
        for s in (resp.s11[i], resp.s21[i], resp.s12[i], resp.s22[i]):
            vals += [s.real, s.imag]
        lines.append(" ".join(f"{v:.9g}" for v in vals))
    Path(path).write_text("\n".join(lines) + "\n")
    return Path(path)


_UNITS = {"HZ": 1.0, "KHZ": 1e3, "MHZ": 1e6, "GHZ": 1e9}


def import_touchstone(path) -> TwoPortResponse:
    unit, fmt, rows = 1e9, "MA", []
    for ln, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("!", 1)[0].strip()
        if not line:
            continue
        if line.startswith("#"):
            tok = line[1:].upper().split()
            for t in tok:
                if t in _UNITS:
                    unit = _UNITS[t]
                elif t in ("RI", "MA", "DB"):
                    fmt = t
            if "R" in tok and float(tok[tok.index("R") + 1]) != Z_REF:
                raise DomainError(f"line {ln}: only a {Z_REF:g} ohm reference is supported")
            continue
        try:
            vals = [float(v) for v in line.split()]
        except ValueError as exc:
            raise DomainError(f"line {ln}: {exc}") from None
        if len(vals) != 9:
            raise DomainError(f"line {ln}: expected 9 columns, got {len(vals)}")
        rows.append(vals)
    a = np.array(rows, dtype=float)
    x, y = a[:, 1::2], a[:, 2::2]
    if fmt == "RI":
        s = x + 1j * y
    elif fmt == "MA":
        s = x * np.exp(1j * np.deg2rad(y))
    else:
        s = 10 ** (x / 20) * np.exp(1j * np.deg2rad(y))
    grid = FrequencyGrid.from_hz(a[:, 0] * unit)
    return TwoPortResponse(grid, s[:, 0], s[:, 2], s[:, 1], s[:, 3])
