"""Tuning sweeps, VCO-gain extraction, varactor calibration and topology comparison."""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .design import (StartupReport, c_total, c_var_for_frequency, max_frequency, osc_freq,
                     startup_margin)
from .devices import DeviceParams, TankParams, Topology, VaractorModel, c_var, varactor_shape
from .errors import DomainError, Infeasible, NoRoot, OutOfRange
from .phase_noise import NoiseParams, NoiseSpectrum, noise_spectrum

DEFAULT_POINTS = 101
ALPHA_BRACKET = (0.1, 50.0)


@dataclass(frozen=True)
class TuningCurve:
    points: tuple[tuple[float, float, float], ...]  # (v_tune, c_var, f)
    topology: Topology

    def __post_init__(self):
        v = [p[0] for p in self.points]
        if len(v) < 2 or any(b <= a for a, b in zip(v, v[1:])):
            raise DomainError("tuning curve voltages must be strictly increasing")

    @property
    def v(self) -> np.ndarray:
        return np.array([p[0] for p in self.points])

    @property
    def f(self) -> np.ndarray:
        return np.array([p[2] for p in self.points])

    @property
    def c(self) -> np.ndarray:
        return np.array([p[1] for p in self.points])


@dataclass(frozen=True)
class TuningSummary:
    f_min: float
    f_max: float
    kvco_mid: float
    v_mid: float

    @property
    def absolute_range(self) -> float:
        return self.f_max - self.f_min

    @property
    def fractional_range(self) -> float:
        return 2.0 * (self.f_max - self.f_min) / (self.f_max + self.f_min)


@dataclass(frozen=True)
class CalibrationTarget:
    f_min_target: float
    f_max_target: float
    kvco_mid_target: float | None = None
    v_range: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        if not (self.f_min_target > 0 and self.f_max_target > self.f_min_target):
            raise DomainError("calibration targets need 0 < f_min_target < f_max_target")
        if self.kvco_mid_target is not None and not self.kvco_mid_target > 0:
            raise DomainError("kvco_mid_target must be positive")
        lo, hi = self.v_range
        if not lo < hi:
            raise DomainError(f"v_range must be increasing, got {self.v_range}")


@dataclass(frozen=True)
class CalibrationResult:
    varactor: VaractorModel
    curve: TuningCurve
    residuals: dict[str, float]  # relative errors, signed (achieved/target - 1)


def sweep(dev: DeviceParams, tank: TankParams, var: VaractorModel, topology: Topology,
          v_lo: float = 0.0, v_hi: float = 1.0, n: int = DEFAULT_POINTS,
          workers: int = 1) -> TuningCurve:
    if n < 3:
        raise DomainError(f"sweep needs at least 3 points, got {n}")
    if not v_lo < v_hi:
        raise DomainError(f"sweep needs v_lo < v_hi, got {v_lo}, {v_hi}")
    grid = np.linspace(v_lo, v_hi, n)

    def point(v: float) -> tuple[float, float, float]:
        cv = c_var(var, v)
        try:
            return (float(v), cv, osc_freq(dev, tank, cv, topology))
        except DomainError as exc:
            raise DomainError(f"v_tune = {v:g} V: {exc}") from None

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            pts = tuple(pool.map(point, grid))
    else:
        pts = tuple(point(v) for v in grid)
    return TuningCurve(pts, topology)


def kvco(curve: TuningCurve, v: float) -> float:
    vs, fs = curve.v, curve.f
    if not vs[0] < v < vs[-1]:
        raise OutOfRange(f"v = {v!r} V is not strictly inside [{vs[0]!r}, {vs[-1]!r}]")
    i = int(np.searchsorted(vs, v))
    step = vs[1] - vs[0]
    if math.isclose(vs[i], v, rel_tol=0.0, abs_tol=1e-9 * step):
        return float((fs[i + 1] - fs[i - 1]) / (vs[i + 1] - vs[i - 1]))
    return float((fs[i] - fs[i - 1]) / (vs[i] - vs[i - 1]))


def summarize(curve: TuningCurve) -> TuningSummary:
    vs, fs = curve.v, curve.f
    v_mid = 0.5 * (vs[0] + vs[-1])
    return TuningSummary(float(fs.min()), float(fs.max()), kvco(curve, v_mid), float(v_mid))


def _solve_span(dev, tank, topology, target: CalibrationTarget, alpha: float, v_mid: float,
                check: bool = True) -> tuple[float, float]:
    """Exact (c_min, c_max) placing the endpoints on target for a given tanh slope."""
    lo, hi = target.v_range
    need_lo = c_var_for_frequency(dev, tank, target.f_min_target, topology)
    need_hi = c_var_for_frequency(dev, tank, target.f_max_target, topology)
    if check and need_hi <= 0:
        ceiling = max_frequency(dev, tank, topology)
        raise Infeasible(
            f"f_max target {target.f_max_target:.6g} Hz exceeds the zero-varactor ceiling "
            f"{ceiling:.6g} Hz: fixed capacitance already exceeds the tank budget")
    s_lo = varactor_shape(alpha, v_mid, lo)
    s_hi = varactor_shape(alpha, v_mid, hi)
    # c(v) = c_min (1 - s) + c_max s at both ends
    det = s_lo - s_hi
    c_max = (need_lo * (1 - s_hi) - need_hi * (1 - s_lo)) / det
    c_min = (need_hi * s_lo - need_lo * s_hi) / det
    if check:
        if c_min <= 0:
            raise Infeasible(f"calibration needs c_min = {c_min:.4g} F <= 0: varactor capacitance "
                             f"budget at f_max is exhausted for alpha = {alpha:.4g}/V")
        if c_min > c_max:
            raise Infeasible(f"calibration gives c_min {c_min:.4g} F > c_max {c_max:.4g} F")
    return c_min, c_max


def _mid_slope(dev, tank, topology, c_min, c_max, alpha, v_mid, v_range, n) -> float:
    grid = np.linspace(v_range[0], v_range[1], n)
    fs = []
    for v in grid:
        cv = c_min + (c_max - c_min) * varactor_shape(alpha, v_mid, v)
        fs.append(osc_freq(dev, tank, cv, topology))
    curve = TuningCurve(tuple((float(v), 0.0, f) for v, f in zip(grid, fs)), topology)
    return kvco(curve, 0.5 * (v_range[0] + v_range[1]))


def calibrate(dev: DeviceParams, tank: TankParams, topology: Topology, target: CalibrationTarget,
              alpha: float = 3.0, v_mid: float | None = None, n: int = DEFAULT_POINTS,
              tol: float = 1e-10) -> CalibrationResult:
    """Fit the varactor so forward sweeps land on the target endpoints (and slope).

    Endpoints are matched exactly by solving the two linear equations in
    (c_min, c_max).  With a slope target, ``alpha`` is found by bisection on
    ``kvco(v_mid) - target`` over ``ALPHA_BRACKET``; otherwise the given
    ``alpha`` is kept.
    """
    lo, hi = target.v_range
    if v_mid is None:
        v_mid = 0.5 * (lo + hi)
    if target.kvco_mid_target is not None:
        _solve_span(dev, tank, topology, target, ALPHA_BRACKET[1], v_mid)  # budget check first

        def g(a: float) -> float:
            c_min, c_max = _solve_span(dev, tank, topology, target, a, v_mid, check=False)
            return _mid_slope(dev, tank, topology, c_min, c_max, a, v_mid, target.v_range, n) \
                - target.kvco_mid_target

        a, b = ALPHA_BRACKET
        ga, gb = g(a), g(b)
        if ga * gb > 0:
            raise NoRoot(f"K_VCO target {target.kvco_mid_target:.6g} Hz/V is not bracketed by "
                         f"alpha in [{a:g}, {b:g}] /V (slopes {ga + target.kvco_mid_target:.6g} .. "
                         f"{gb + target.kvco_mid_target:.6g} Hz/V)")
        while b - a > tol * b:
            m = 0.5 * (a + b)
            gm_ = g(m)
            if gm_ == 0:
                a = b = m
                break
            if (gm_ < 0) == (ga < 0):
                a, ga = m, gm_
            else:
                b = m
        alpha = 0.5 * (a + b)
    c_min, c_max = _solve_span(dev, tank, topology, target, alpha, v_mid)
    var = VaractorModel(c_min=c_min, c_max=c_max, v_mid=v_mid, alpha=alpha)
    curve = sweep(dev, tank, var, topology, lo, hi, n)
    s = summarize(curve)
    residuals = {
        "f_min": s.f_min / target.f_min_target - 1.0,
        "f_max": s.f_max / target.f_max_target - 1.0,
    }
    if target.kvco_mid_target is not None:
        residuals["kvco_mid"] = s.kvco_mid / target.kvco_mid_target - 1.0
    return CalibrationResult(var, curve, residuals)


@dataclass(frozen=True)
class NoiseSettings:
    v_max: float
    offsets: tuple[float, ...]
    temperature: float = 300.0


@dataclass(frozen=True)
class Side:
    """One configured VCO: device, tank, varactor and topology."""

    dev: DeviceParams
    tank: TankParams
    var: VaractorModel
    topology: Topology


@dataclass(frozen=True)
class SideReport:
    side: Side
    curve: TuningCurve
    summary: TuningSummary
    startup: StartupReport
    noise: NoiseSpectrum
    noise_params: NoiseParams


@dataclass(frozen=True)
class ComparisonReport:
    cascode: SideReport
    conventional: SideReport
    verdicts: dict[str, bool] = field(default_factory=dict)

    @property
    def noise_deltas(self) -> list[tuple[float, float]]:
        a, b = self.cascode.noise.points, self.conventional.noise.points
        return [(pa[0], pa[1] - pb[1]) for pa, pb in zip(a, b)]


def side_report(side: Side, noise: NoiseSettings, v_lo: float = 0.0, v_hi: float = 1.0,
                n: int = DEFAULT_POINTS) -> SideReport:
    curve = sweep(side.dev, side.tank, side.var, side.topology, v_lo, v_hi, n)
    summary = summarize(curve)
    # carrier at the centre of the tuning range
    cv = c_var(side.var, summary.v_mid)
    params = NoiseParams(v_max=noise.v_max, rp=side.tank.rp,
                         c_total=c_total(side.dev, side.tank, cv, side.topology),
                         f0=osc_freq(side.dev, side.tank, cv, side.topology),
                         temperature=noise.temperature)
    return SideReport(side, curve, summary, startup_margin(side.dev, side.tank, side.topology),
                      noise_spectrum(params, noise.offsets), params)


def compare_sides(a: Side, b: Side, noise: NoiseSettings, v_lo: float = 0.0, v_hi: float = 1.0,
                  n: int = DEFAULT_POINTS, noise_b: NoiseSettings | None = None) -> ComparisonReport:
    """Side ``a`` takes the cascode role and ``b`` the conventional role."""
    ra = side_report(a, noise, v_lo, v_hi, n)
    rb = side_report(b, noise_b or noise, v_lo, v_hi, n)
    verdicts = {
        "range": ra.summary.absolute_range > rb.summary.absolute_range,
        "gain": ra.summary.kvco_mid > rb.summary.kvco_mid,
        "noise": all(la < lb for la, lb in zip(ra.noise.levels, rb.noise.levels)),
    }
    return ComparisonReport(ra, rb, verdicts)


def compare_topologies(dev: DeviceParams, tank: TankParams, var_casc: VaractorModel,
                       var_conv: VaractorModel, noise: NoiseSettings, v_lo: float = 0.0,
                       v_hi: float = 1.0, n: int = DEFAULT_POINTS) -> ComparisonReport:
    return compare_sides(Side(dev, tank, var_casc, Topology.CASCODE),
                         Side(dev, tank, var_conv, Topology.CONVENTIONAL), noise, v_lo, v_hi, n)


def offsets_grid(start: float, stop: float, count: int, spacing: str = "log") -> tuple[float, ...]:
    if count < 1 or not (0 < start <= stop):
        raise DomainError("offset grid needs 0 < start <= stop and count >= 1")
    if spacing == "log":
        pts = np.geomspace(start, stop, count)
    elif spacing == "lin":
        pts = np.linspace(start, stop, count)
    else:
        raise DomainError(f"offset spacing must be 'log' or 'lin', got {spacing!r}")
    return tuple(float(p) for p in pts)


def paper_verdict_lines(report: ComparisonReport) -> Sequence[str]:
    names = {"range": "higher_tuning_range", "gain": "higher_vco_gain", "noise": "lower_phase_noise"}
    return [f"{names[k]} = {'true' if v else 'false'}" for k, v in report.verdicts.items()]
