"""Single-sideband phase noise of an LC oscillator in the thermal (1/f^2) region.

    L(dw) = 10 log10[ 1/2 * kT / (Vmax^2 Rp (C w0)^2) * (w0/dw)^2 ]

Flicker (1/f^3) noise is not modelled, so the result is only meaningful above
the flicker corner.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .errors import DomainError

BOLTZMANN = 1.380649e-23


@dataclass(frozen=True)
class NoiseParams:
    v_max: float
    rp: float
    c_total: float
    f0: float
    temperature: float = 300.0

    def __post_init__(self):
        for name in ("v_max", "rp", "c_total", "f0", "temperature"):
            val = getattr(self, name)
            if not (val > 0 and math.isfinite(val)):
                raise DomainError(f"{name} must be a positive finite number, got {val!r}")

    @property
    def omega0(self) -> float:
        return 2.0 * math.pi * self.f0


@dataclass(frozen=True)
class NoiseSpectrum:
    points: tuple[tuple[float, float], ...]

    @property
    def offsets(self) -> list[float]:
        return [p[0] for p in self.points]

    @property
    def levels(self) -> list[float]:
        return [p[1] for p in self.points]

    def __len__(self):
        return len(self.points)


def ssb_phase_noise(p: NoiseParams, offset: float) -> float:
    if not offset > 0:
        raise DomainError(f"offset must be > 0, got {offset!r}")
    if offset >= p.f0:
        raise DomainError(f"offset {offset!r} Hz must be below the carrier {p.f0!r} Hz")
    kt = BOLTZMANN * p.temperature
    tank = p.v_max ** 2 * p.rp * (p.c_total * p.omega0) ** 2
    ratio = p.f0 / offset
    return 10.0 * math.log10(0.5 * kt / tank * ratio * ratio)


def noise_spectrum(p: NoiseParams, offsets: Sequence[float]) -> NoiseSpectrum:
    points = []
    prev = -math.inf
    for i, off in enumerate(offsets):
        if not off > prev:
            raise DomainError(f"offsets must be strictly increasing (index {i}: {off!r})")
        prev = off
        try:
            points.append((float(off), ssb_phase_noise(p, off)))
        except DomainError as exc:
            raise DomainError(f"offset index {i}: {exc}") from None
    return NoiseSpectrum(tuple(points))


def noise_delta(a: NoiseParams, b: NoiseParams, offset: float) -> float:
    return ssb_phase_noise(a, offset) - ssb_phase_noise(b, offset)
