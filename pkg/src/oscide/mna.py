"""Complex nodal analysis of linear small-signal one-ports.

Ground is node 0 and is eliminated from the matrix, so row/column ``k`` of a
stamped matrix belongs to node ``k + 1``.  The cross-coupled pair builders
reproduce the small-signal models of the conventional and the cascode pair;
their node connectivity is tabulated in ``docs/connectivity.md``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .devices import DeviceParams, Topology
from .errors import DomainError, NonConvergent, SingularMatrix

# two-point flatness check used by extract_capacitance_coefficient
LOW_FREQS = (1e6, 10e6)
FLATNESS_TOL = 0.01


class Kind(enum.Enum):
    R = "R"
    C = "C"
    L = "L"
    G = "G"  # voltage-controlled current source


@dataclass(frozen=True)
class Element:
    """One branch.  A ``G`` element drives ``value * (V(ctrl[0]) - V(ctrl[1]))``
    from ``n_plus`` to ``n_minus`` through itself."""

    kind: Kind
    n_plus: int
    n_minus: int
    value: float
    ctrl: tuple[int, int] | None = None
    name: str = ""

    def __post_init__(self):
        if self.kind is Kind.G:
            if self.ctrl is None:
                raise DomainError("Vccs element needs control nodes")
        elif not self.value > 0:
            raise DomainError(f"{self.kind.value} element value must be > 0, got {self.value!r}")

    @property
    def nodes(self) -> tuple[int, ...]:
        return (self.n_plus, self.n_minus) + (self.ctrl or ())


@dataclass(frozen=True)
class Netlist:
    node_count: int
    elements: tuple[Element, ...]
    probe: tuple[int, int] = (1, 0)
    labels: dict[int, str] = field(default_factory=dict, compare=False, hash=False)

    def __post_init__(self):
        object.__setattr__(self, "elements", tuple(self.elements))
        if self.node_count < 2:
            raise DomainError("netlist needs at least one non-ground node")
        if not self.elements:
            raise DomainError("netlist has no elements")
        for el in self.elements:
            bad = [n for n in el.nodes if not 0 <= n < self.node_count]
            if bad:
                raise DomainError(f"element {el.name or el.kind.value} references node(s) {bad} "
                                  f"outside 0..{self.node_count - 1}")
        p, m = self.probe
        if p == m or not (0 <= p < self.node_count and 0 <= m < self.node_count):
            raise DomainError(f"invalid probe terminals {self.probe}")

    def dump(self) -> str:
        """Plain-text listing, one ``KIND n+ n- value [c+ c-]`` line per element."""
        lines = []
        for el in self.elements:
            line = f"{el.kind.value} {el.n_plus} {el.n_minus} {el.value!r}"
            if el.ctrl is not None:
                line += f" {el.ctrl[0]} {el.ctrl[1]}"
            lines.append(line)
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class OnePortResult:
    omega: float
    y_in: complex

    @property
    def r_equiv(self) -> float:
        g = self.y_in.real
        return math.inf if g == 0.0 else 1.0 / g

    @property
    def c_equiv(self) -> float:
        return self.y_in.imag / self.omega


def _branch_admittance(el: Element, omega: float) -> complex:
    if el.kind is Kind.R:
        return 1.0 / el.value
    if el.kind is Kind.C:
        return 1j * omega * el.value
    if el.kind is Kind.L:
        return 1.0 / (1j * omega * el.value)
    raise AssertionError(el.kind)


def stamp(netlist: Netlist, omega: float) -> np.ndarray:
    if not omega > 0:
        raise DomainError(f"omega must be > 0, got {omega!r}")
    n = netlist.node_count - 1
    y = np.zeros((n, n), dtype=complex)

    def add(row: int, col: int, val: complex) -> None:
        if row and col:
            y[row - 1, col - 1] += val

    for el in netlist.elements:
        a, b = el.n_plus, el.n_minus
        if el.kind is Kind.G:
            cp, cm = el.ctrl
            add(a, cp, el.value)
            add(a, cm, -el.value)
            add(b, cp, -el.value)
            add(b, cm, el.value)
        else:
            g = _branch_admittance(el, omega)
            add(a, a, g)
            add(b, b, g)
            add(a, b, -g)
            add(b, a, -g)
    return y


def lu_solve(a: np.ndarray, b: np.ndarray, rtol: float = 1e-13) -> np.ndarray:
    """Gaussian elimination with partial pivoting.

    Raises SingularMatrix carrying the elimination step whose best pivot is
    below ``rtol`` times the largest matrix entry.
    """
    a = np.array(a, dtype=complex)
    x = np.array(b, dtype=complex)
    n = a.shape[0]
    scale = np.abs(a).max() if a.size else 0.0
    if scale == 0.0:
        raise SingularMatrix(0)
    for k in range(n):
        p = k + int(np.argmax(np.abs(a[k:, k])))
        if abs(a[p, k]) <= rtol * scale:
            raise SingularMatrix(k)
        if p != k:
            a[[k, p]] = a[[p, k]]
            x[[k, p]] = x[[p, k]]
        f = a[k + 1:, k] / a[k, k]
        a[k + 1:, k:] -= np.outer(f, a[k, k:])
        x[k + 1:] -= f * x[k]
    for k in range(n - 1, -1, -1):
        x[k] = (x[k] - a[k, k + 1:] @ x[k + 1:]) / a[k, k]
    return x


def input_admittance(netlist: Netlist, omega: float, probe: tuple[int, int] | None = None) -> OnePortResult:
    """Drive a unit voltage across the probe pair and return the current drawn."""
    p, m = probe if probe is not None else netlist.probe
    if p == m:
        raise DomainError("probe nodes must be distinct")
    y = stamp(netlist, omega)
    n = y.shape[0]
    a = np.zeros((n + 1, n + 1), dtype=complex)
    a[:n, :n] = y
    rhs = np.zeros(n + 1, dtype=complex)
    # extra unknown: current leaving the network into the source at p
    for node, sign in ((p, 1.0), (m, -1.0)):
        if node:
            a[node - 1, n] = sign
            a[n, node - 1] = sign
    rhs[n] = 1.0
    try:
        x = lu_solve(a, rhs)
    except SingularMatrix as exc:
        label = netlist.labels.get(exc.pivot + 1, f"node {exc.pivot + 1}") if exc.pivot < n else "probe source"
        raise SingularMatrix(exc.pivot, f"singular nodal matrix at pivot {exc.pivot} ({label}); "
                                        "floating node or degenerate netlist") from None
    return OnePortResult(omega=omega, y_in=complex(-x[n]))


def build_pair_netlist(dev: DeviceParams, topology: Topology, l_tail: float | None = None) -> Netlist:
    """Small-signal netlist of a cross-coupled pair probed differentially.

    The cascode variant stacks the saturated pair (M1, M3) on a triode pair
    (M2, M4) whose gates are cross-coupled like the upper pair.  The triode
    devices are a channel conductance ``gm_triode`` plus ``cgs``.  With
    ``l_tail`` the common source node of M2/M4 is exposed and returned to
    ground through the tail inductor; otherwise it is ground itself.
    """
    x, y = 1, 2
    els: list[Element] = []

    def cap(a: int, b: int, name: str) -> None:
        if dev.cgs > 0:
            els.append(Element(Kind.C, a, b, dev.cgs, name=name))

    if topology is Topology.CONVENTIONAL:
        els += [
            Element(Kind.G, x, 0, dev.gm, ctrl=(y, 0), name="gm1"),
            Element(Kind.R, x, 0, dev.ro, name="ro1"),
            Element(Kind.G, y, 0, dev.gm, ctrl=(x, 0), name="gm2"),
            Element(Kind.R, y, 0, dev.ro, name="ro2"),
        ]
        cap(y, 0, "cgs1")
        cap(x, 0, "cgs2")
        return Netlist(3, tuple(els), probe=(x, y), labels={1: "X", 2: "Y"})

    a, b = 3, 4
    t = 5 if l_tail is not None else 0
    els += [
        Element(Kind.G, x, a, dev.gm, ctrl=(y, a), name="gm1"),
        Element(Kind.R, x, a, dev.ro, name="ro1"),
        Element(Kind.G, y, b, dev.gm, ctrl=(x, b), name="gm3"),
        Element(Kind.R, y, b, dev.ro, name="ro3"),
        Element(Kind.R, a, t, 1.0 / dev.gm_triode, name="rds2"),
        Element(Kind.R, b, t, 1.0 / dev.gm_triode, name="rds4"),
    ]
    cap(y, a, "cgs1")
    cap(x, b, "cgs3")
    cap(y, t, "cgs2")
    cap(x, t, "cgs4")
    labels = {1: "X", 2: "Y", 3: "A", 4: "B"}
    count = 5
    if l_tail is not None:
        els.append(Element(Kind.L, t, 0, l_tail, name="ltail"))
        labels[5] = "T"
        count = 6
    return Netlist(count, tuple(els), probe=(x, y), labels=labels)


def pair_admittance(dev: DeviceParams, topology: Topology, omega: float) -> OnePortResult:
    return input_admittance(build_pair_netlist(dev, topology), omega)


def extract_capacitance_coefficient(dev: DeviceParams, topology: Topology) -> float:
    """Differential pair capacitance as a multiple of ``cgs``, at low frequency."""
    if not dev.cgs > 0:
        raise DomainError("capacitance coefficient needs cgs > 0")
    net = build_pair_netlist(dev, topology)
    kappas = [input_admittance(net, 2 * math.pi * f).c_equiv / dev.cgs for f in LOW_FREQS]
    lo, hi = kappas
    if abs(hi - lo) > FLATNESS_TOL * abs(lo):
        raise NonConvergent(
            f"c_equiv/cgs moves from {lo:.6g} to {hi:.6g} between {LOW_FREQS[0]:g} and "
            f"{LOW_FREQS[1]:g} Hz; the lumped-capacitance approximation does not hold here")
    return lo
