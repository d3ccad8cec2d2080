"""Closed-form start-up, tank-capacitance and frequency equations.

Cascode coefficients are fixed closed forms (4/gm, 0.875 cgs).  The conventional pair's
capacitance coefficient is not assumed: it is extracted from the nodal
solver (see :func:`capacitance_coefficient`).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

from .devices import DeviceParams, TankParams, Topology
from .errors import DomainError
from .mna import extract_capacitance_coefficient

CASCODE_KAPPA = 0.875
RECOMMENDED_MARGIN = 2.0


def parallel(r1: float, r2: float) -> float:
    if not (r1 > 0 and r2 > 0):
        raise DomainError(f"parallel() needs positive resistances, got {r1!r}, {r2!r}")
    if math.isinf(r1):
        return r2
    if math.isinf(r2):
        return r1
    return r1 * r2 / (r1 + r2)


@dataclass(frozen=True)
class StartupReport:
    topology: Topology
    r_neg_magnitude: float
    r_loss: float
    margin: float

    @property
    def oscillates(self) -> bool:
        return self.margin > 1.0

    @property
    def warning(self) -> str | None:
        if self.margin < RECOMMENDED_MARGIN:
            return (f"start-up margin {self.margin:.3g} is below the recommended "
                    f"{RECOMMENDED_MARGIN:g}")
        return None


def negative_resistance(dev: DeviceParams, topology: Topology) -> float:
    """Magnitude of the pair's differential negative resistance."""
    return (4.0 if topology is Topology.CASCODE else 2.0) / dev.gm


def startup_margin(dev: DeviceParams, tank: TankParams, topology: Topology) -> StartupReport:
    r_neg = negative_resistance(dev, topology)
    if topology is Topology.CASCODE:
        r_loss = parallel(2.0 * dev.ro, tank.rp)
    else:
        r_loss = parallel(dev.ro, tank.rp)
    return StartupReport(topology, r_neg, r_loss, r_loss / r_neg)


@lru_cache(maxsize=256)
def _oracle_kappa(dev: DeviceParams, topology: Topology) -> float:
    return extract_capacitance_coefficient(dev, topology)


def capacitance_coefficient(dev: DeviceParams, topology: Topology) -> float:
    """Differential pair capacitance per unit ``cgs``.

    0.875 for the cascode; the nodal-solver value for the conventional pair.
    Returns 0 when ``cgs`` is 0, where the coefficient multiplies nothing.
    """
    if topology is Topology.CASCODE:
        return CASCODE_KAPPA
    if dev.cgs == 0:
        return 0.0
    return _oracle_kappa(dev, topology)


def capacitance_bracket(dev: DeviceParams, tank: TankParams, c_var: float, topology: Topology,
                        kappa: float | None = None) -> float:
    """Per-side tank capacitance, i.e. ``2 kappa cgs + cp + cl + c_var``."""
    if kappa is None:
        kappa = capacitance_coefficient(dev, topology)
    return 2.0 * kappa * dev.cgs + tank.cp + tank.cl + c_var


def c_total(dev: DeviceParams, tank: TankParams, c_var: float, topology: Topology,
            kappa: float | None = None) -> float:
    if kappa is None:
        kappa = capacitance_coefficient(dev, topology)
    return kappa * dev.cgs + (tank.cp + tank.cl + c_var) / 2.0


def osc_freq(dev: DeviceParams, tank: TankParams, c_var: float, topology: Topology,
             kappa: float | None = None) -> float:
    bracket = capacitance_bracket(dev, tank, c_var, topology, kappa)
    if not bracket > 0:
        raise DomainError(f"tank capacitance must be > 0, got {bracket!r} F")
    return 1.0 / (2.0 * math.pi * math.sqrt(tank.l * bracket))


def c_var_for_frequency(dev: DeviceParams, tank: TankParams, f: float, topology: Topology) -> float:
    """Varactor capacitance that places the oscillation at ``f`` (may be <= 0)."""
    if not f > 0:
        raise DomainError(f"frequency must be > 0, got {f!r}")
    bracket = 1.0 / (tank.l * (2.0 * math.pi * f) ** 2)
    return bracket - capacitance_bracket(dev, tank, 0.0, topology)


def max_frequency(dev: DeviceParams, tank: TankParams, topology: Topology) -> float:
    """Zero-varactor ceiling of the oscillation frequency."""
    bracket = capacitance_bracket(dev, tank, 0.0, topology)
    if bracket <= 0:
        return math.inf
    return 1.0 / (2.0 * math.pi * math.sqrt(tank.l * bracket))
