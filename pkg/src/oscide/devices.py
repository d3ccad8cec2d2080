"""Device- and tank-level parameter types plus the large-signal laws.

All values are SI base units.  The types are frozen dataclasses that check
their own invariants on construction, so an instance that exists is valid.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .errors import DomainError


class Region(enum.Enum):
    SATURATION = "saturation"
    TRIODE = "triode"
    CUTOFF = "cutoff"


class Topology(enum.Enum):
    CONVENTIONAL = "conventional"
    CASCODE = "cascode"

    @classmethod
    def parse(cls, text: str) -> "Topology":
        try:
            return cls(text.strip().lower())
        except ValueError:
            names = ", ".join(t.value for t in cls)
            raise DomainError(f"unknown topology {text!r} (expected one of: {names})") from None


def _require(cond: bool, message: str) -> None:
    if not cond:
        raise DomainError(message)


@dataclass(frozen=True)
class DeviceParams:
    """Small-signal and square-law description of one matched transistor pair.

    ``gm_triode`` is the channel conductance of the triode-biased lower pair in
    the cascode topology; it defaults to ``gm``.  ``cgs`` is used for both the
    saturation and the triode devices.
    """

    gm: float
    ro: float
    cgs: float
    gm_triode: float | None = None
    region: Region = Region.SATURATION
    beta: float = 0.2
    vt: float = 0.4

    def __post_init__(self):
        if self.gm_triode is None:
            object.__setattr__(self, "gm_triode", self.gm)
        _require(self.gm > 0, f"gm must be > 0, got {self.gm!r}")
        _require(self.gm_triode > 0, f"gm_triode must be > 0, got {self.gm_triode!r}")
        _require(self.ro > 0, f"ro must be > 0, got {self.ro!r}")
        _require(self.cgs >= 0, f"cgs must be >= 0, got {self.cgs!r}")
        _require(self.beta > 0, f"beta must be > 0, got {self.beta!r}")
        _require(math.isfinite(self.vt), f"vt must be finite, got {self.vt!r}")
        _require(self.region in (Region.SATURATION, Region.TRIODE),
                 f"device region must be saturation or triode, got {self.region}")

    @property
    def overdrive(self) -> float:
        """Gate overdrive at which the square law yields ``gm``."""
        return self.gm / self.beta


@dataclass(frozen=True)
class TankParams:
    """LC tank: per-side inductance, differential loss resistance, per-side caps."""

    l: float
    rp: float
    cp: float = 0.0
    cl: float = 0.0

    def __post_init__(self):
        _require(self.l > 0, f"l must be > 0, got {self.l!r}")
        _require(self.rp > 0, f"rp must be > 0, got {self.rp!r}")
        _require(self.cp >= 0, f"cp must be >= 0, got {self.cp!r}")
        _require(self.cl >= 0, f"cl must be >= 0, got {self.cl!r}")

    @property
    def c_fixed(self) -> float:
        return self.cp + self.cl


@dataclass(frozen=True)
class VaractorModel:
    """MOS varactor with a tanh capacitance law, decreasing in tuning voltage."""

    c_min: float
    c_max: float
    v_mid: float = 0.5
    alpha: float = 3.0

    def __post_init__(self):
        _require(self.c_min > 0, f"c_min must be > 0, got {self.c_min!r}")
        _require(self.c_min <= self.c_max,
                 f"c_min ({self.c_min!r}) must not exceed c_max ({self.c_max!r})")
        _require(self.alpha > 0, f"alpha must be > 0, got {self.alpha!r}")
        _require(math.isfinite(self.v_mid), f"v_mid must be finite, got {self.v_mid!r}")

    def __call__(self, v_tune: float) -> float:
        return c_var(self, v_tune)


def varactor_shape(alpha: float, v_mid: float, v_tune: float) -> float:
    """Fraction of the (c_max - c_min) span present at ``v_tune``; in [0, 1]."""
    return 0.5 * (1.0 - math.tanh(alpha * (v_tune - v_mid)))


def c_var(model: VaractorModel, v_tune: float) -> float:
    return model.c_min + (model.c_max - model.c_min) * varactor_shape(model.alpha, model.v_mid, v_tune)


def check_region(vgs: float, vds: float, vt: float) -> Region:
    if vgs <= vt:
        return Region.CUTOFF
    if vds >= vgs - vt:
        return Region.SATURATION
    return Region.TRIODE


def square_law(beta: float, vt: float, vgs: float, vds: float) -> float:
    """Long-channel drain current; no channel-length modulation (ro is separate)."""
    vov = vgs - vt
    if vov <= 0.0:
        return 0.0
    if vds >= vov:
        return 0.5 * beta * vov * vov
    return beta * (vov * vds - 0.5 * vds * vds)


def drain_current(dev: DeviceParams, vgs: float, vds: float) -> float:
    return square_law(dev.beta, dev.vt, vgs, vds)
