"""Lumped R/L/C netlists and their small-signal nodal solution.

Node 0 is ground. The same netlist feeds both the frequency-domain port
solver here and the transient engine.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError

KINDS = ("R", "L", "C")


@dataclass(frozen=True)
class Element:
    kind: str
    a: int
    b: int
    value: float

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown element kind {self.kind!r}")
        if not self.value > 0:
            raise DomainError(f"{self.kind} element needs a positive value")

    def admittance(self, omega):
        s = 1j * np.asarray(omega, dtype=float)
        if self.kind == "R":
            return np.full(s.shape, 1 / self.value, dtype=complex)
        if self.kind == "L":
            return 1 / (s * self.value)
        return s * self.value


@dataclass
class Netlist:
    elements: list = field(default_factory=list)
    n_nodes: int = 0

    def node(self) -> int:
        self.n_nodes += 1
        return self.n_nodes

    def add(self, kind, a, b, value):
        self.elements.append(Element(kind, a, b, float(value)))

    def merge(self, other: "Netlist", mapping: dict) -> None:
        """Copy other's elements in, renumbering via mapping (new nodes as needed)."""
        m = dict(mapping)
        m.setdefault(0, 0)
        for e in other.elements:
            for n in (e.a, e.b):
                if n not in m:
                    m[n] = self.node()
            self.add(e.kind, m[e.a], m[e.b], e.value)

    def admittance_matrix(self, omega):
        """Nodal admittance, shape (n_freq, n_nodes, n_nodes), ground removed."""
        w = np.atleast_1d(np.asarray(omega, dtype=float))
        y = np.zeros((w.size, self.n_nodes, self.n_nodes), dtype=complex)
        for e in self.elements:
            ye = e.admittance(w)
            i, j = e.a - 1, e.b - 1
            if i >= 0:
                y[:, i, i] += ye
            if j >= 0:
                y[:, j, j] += ye
            if i >= 0 and j >= 0:
                y[:, i, j] -= ye
                y[:, j, i] -= ye
        return y


def port_admittance(net: Netlist, ports, omega):
    """Kron-reduce the nodal matrix onto the port nodes."""
    y = net.admittance_matrix(omega)
    p = [n - 1 for n in ports]
    rest = [i for i in range(net.n_nodes) if i not in p]
    ypp = y[:, p][:, :, p]
    if not rest:
        return ypp
    ypi = y[:, p][:, :, rest]
    yip = y[:, rest][:, :, p]
    yii = y[:, rest][:, :, rest]
    return ypp - ypi @ np.linalg.solve(yii, yip)


def s_from_y(y, z0=50.0):
    n = y.shape[-1]
    eye = np.eye(n)
    return np.linalg.solve((eye + z0 * y).swapaxes(-1, -2),
                           (eye - z0 * y).swapaxes(-1, -2)).swapaxes(-1, -2)
