"""Command-line front end.

    oscide analyze   CFG
    oscide tune      CFG -o tuning.csv [--svg]
    oscide noise     CFG [--offsets 1e7:8e8:log:50] -o noise.csv [--svg]
    oscide transient CFG -o trace.csv
    oscide compare   CFG_CASCODE CFG_CONVENTIONAL -o report/
    oscide calibrate CFG --fmin 21.0G --fmax 26.1G [--kvco 8G]

Any failure ends with ``ERROR <code>: <message>`` as the last line on stderr
and a nonzero exit status.
"""

from __future__ import annotations

import argparse
import io
import os
import sys
from dataclasses import asdict
from pathlib import Path

from . import __version__
from .config import RunConfig, parse_config, varactor_section
from .design import c_total, osc_freq, startup_margin
from .devices import Topology, c_var
from .errors import DomainError, OscideError
from .phase_noise import NoiseParams, noise_spectrum
from .svg import line_plot
from .transient import SimConfig, simulate, steady_state
from .tuning import (CalibrationTarget, NoiseSettings, Side, calibrate, compare_sides,
                     offsets_grid, paper_verdict_lines, summarize, sweep)
from .units import format_eng, parse_quantity

DEFAULT_OFFSETS = "1e7:8e8:log:50"
DEFAULT_PERIODS = 300
DEFAULT_STRIDE = 4


class UsageError(OscideError):
    code = "usage"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _num(text: str) -> str:
    return repr(float(text))


def write_csv(path: Path, header: str, rows, footer: list[str] | None = None) -> None:
    buf = io.StringIO(newline="")
    buf.write(header + "\n")
    for row in rows:
        buf.write(",".join(_num(v) for v in row) + "\n")
    for line in footer or ():
        buf.write(f"# {line}\n")
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(buf.getvalue())


def _write_text(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def workers_from_env() -> int:
    raw = os.environ.get("OSCIDE_THREADS")
    if raw is None or raw == "":
        return 1
    try:
        n = int(raw)
    except ValueError:
        n = 0
    if n < 1:
        raise DomainError(f"OSCIDE_THREADS must be a positive integer, got {raw!r}")
    return n


def parse_offsets(spec: str) -> tuple[float, ...]:
    parts = spec.split(":")
    if len(parts) != 4:
        raise DomainError(f"offsets must look like start:stop:log|lin:count, got {spec!r}")
    start, stop, spacing, count = parts
    try:
        n = int(count)
    except ValueError:
        raise DomainError(f"offset count must be an integer, got {count!r}") from None
    return offsets_grid(parse_quantity(start), parse_quantity(stop), n, spacing)


def _mid_tune(cfg: RunConfig) -> float:
    return 0.5 * (cfg.sweep.v_lo + cfg.sweep.v_hi)


def _noise_params(cfg: RunConfig) -> NoiseParams:
    noise = cfg.require_noise()
    cv = c_var(cfg.varactor, _mid_tune(cfg))
    return NoiseParams(v_max=noise.v_max, rp=cfg.tank.rp,
                       c_total=c_total(cfg.device, cfg.tank, cv, cfg.topology),
                       f0=osc_freq(cfg.device, cfg.tank, cv, cfg.topology),
                       temperature=noise.temperature)


def sim_config(cfg: RunConfig, f_est: float) -> SimConfig:
    sim = dict(cfg.sim)
    periods = sim.pop("periods", DEFAULT_PERIODS)
    sim.setdefault("dt", 1.0 / (200.0 * f_est))
    sim.setdefault("t_end", periods / f_est)
    sim.setdefault("record_stride", DEFAULT_STRIDE)
    return SimConfig(**sim)


def cmd_analyze(args, out) -> None:
    cfg = parse_config(args.config)
    v = _mid_tune(cfg)
    cv = c_var(cfg.varactor, v)
    rep = startup_margin(cfg.device, cfg.tank, cfg.topology)
    lines = [
        f"topology = {cfg.topology.value}",
        f"v_tune = {format_eng(v, 'V', 6)}",
        f"c_var = {format_eng(cv, 'F', 6)}",
        f"r_neg = {format_eng(rep.r_neg_magnitude, 'Ohm', 6)}",
        f"r_loss = {format_eng(rep.r_loss, 'Ohm', 6)}",
        f"margin = {rep.margin:.6g}",
        f"oscillates = {'true' if rep.oscillates else 'false'}",
        f"c_total = {format_eng(c_total(cfg.device, cfg.tank, cv, cfg.topology), 'F', 6)}",
        f"f_o = {format_eng(osc_freq(cfg.device, cfg.tank, cv, cfg.topology), 'Hz', fixed=2)}",
    ]
    out.write("\n".join(lines) + "\n")
    if rep.warning:
        print(f"warning: {rep.warning}", file=sys.stderr)


def cmd_tune(args, out) -> None:
    cfg = parse_config(args.config)
    s = cfg.sweep
    curve = sweep(cfg.device, cfg.tank, cfg.varactor, cfg.topology, s.v_lo, s.v_hi, s.n,
                  workers=workers_from_env())
    summ = summarize(curve)
    footer = [
        f"topology = {cfg.topology.value}",
        f"f_min_Hz = {summ.f_min!r}",
        f"f_max_Hz = {summ.f_max!r}",
        f"absolute_range_Hz = {summ.absolute_range!r}",
        f"fractional_range = {summ.fractional_range!r}",
        f"kvco_mid_Hz_per_V = {summ.kvco_mid!r}",
    ]
    path = Path(args.output)
    write_csv(path, "v_tune_V,c_var_F,f_Hz", curve.points, footer)
    if args.svg:
        _write_text(path.with_suffix(".svg"), line_plot(
            [(cfg.topology.value, curve.v, curve.f / 1e9)], "V_tune (V)", "f (GHz)", "Tuning curve"))
    out.write(f"wrote {path}\n")


def cmd_noise(args, out) -> None:
    cfg = parse_config(args.config)
    spec = noise_spectrum(_noise_params(cfg), parse_offsets(args.offsets))
    path = Path(args.output)
    write_csv(path, "offset_Hz,L_dBc_Hz", spec.points)
    if args.svg:
        _write_text(path.with_suffix(".svg"), line_plot(
            [(cfg.topology.value, spec.offsets, spec.levels)], "offset (Hz)", "L (dBc/Hz)",
            "SSB phase noise", logx=True))
    out.write(f"wrote {path}\n")


def cmd_transient(args, out) -> None:
    cfg = parse_config(args.config)
    cv = c_var(cfg.varactor, _mid_tune(cfg))
    f_est = osc_freq(cfg.device, cfg.tank, cv, cfg.topology)
    trace = simulate(cfg.device, cfg.tank, cv, cfg.topology, sim_config(cfg, f_est))
    path = Path(args.output)
    write_csv(path, "t_s,v_plus_V,v_minus_V,i_l_A",
              zip(trace.t, trace.v_plus, trace.v_minus, trace.i_l))
    rep = steady_state(trace)
    out.write(f"started = {'true' if rep.started else 'false'}\n")
    out.write(f"settled = {'true' if rep.settled else 'false'}\n")
    out.write(f"frequency = {format_eng(rep.frequency, 'Hz', 6)}\n")
    out.write(f"f_closed_form = {format_eng(f_est, 'Hz', 6)}\n")
    out.write(f"amplitude = {format_eng(rep.amplitude, 'V', 6)}\n")
    out.write(f"envelope_slope = {rep.envelope_slope:.6g} 1/s\n")


def _side(cfg: RunConfig) -> Side:
    return Side(cfg.device, cfg.tank, cfg.varactor, cfg.topology)


def cmd_compare(args, out) -> None:
    a = parse_config(args.cascode)
    b = parse_config(args.conventional)
    if a.sweep != b.sweep:
        raise DomainError("both configs must share the same [sweep] section")
    offsets = parse_offsets(args.offsets)
    na, nb = a.require_noise(), b.require_noise()
    rep = compare_sides(_side(a), _side(b), NoiseSettings(na.v_max, offsets, na.temperature),
                        a.sweep.v_lo, a.sweep.v_hi, a.sweep.n,
                        noise_b=NoiseSettings(nb.v_max, offsets, nb.temperature))
    root = Path(args.output)
    for name, side in (("cascode", rep.cascode), ("conventional", rep.conventional)):
        write_csv(root / f"tuning_{name}.csv", "v_tune_V,c_var_F,f_Hz", side.curve.points)
    write_csv(root / "noise.csv", "offset_Hz,cascode_L_dBc_Hz,conventional_L_dBc_Hz,delta_dB",
              [(pa[0], pa[1], pb[1], pa[1] - pb[1])
               for pa, pb in zip(rep.cascode.noise.points, rep.conventional.noise.points)])
    rows = []
    for label, get in (
        ("f_min_Hz", lambda s: s.summary.f_min),
        ("f_max_Hz", lambda s: s.summary.f_max),
        ("absolute_range_Hz", lambda s: s.summary.absolute_range),
        ("fractional_range", lambda s: s.summary.fractional_range),
        ("kvco_mid_Hz_per_V", lambda s: s.summary.kvco_mid),
        ("r_neg_Ohm", lambda s: s.startup.r_neg_magnitude),
        ("startup_margin", lambda s: s.startup.margin),
        ("carrier_Hz", lambda s: s.noise_params.f0),
        ("c_total_F", lambda s: s.noise_params.c_total),
        ("L_last_offset_dBc_Hz", lambda s: s.noise.levels[-1]),
    ):
        rows.append(f"{label:<22},{get(rep.cascode)!r:>24},{get(rep.conventional)!r:>24}")
    header = f"{'quantity':<22},{'cascode':>24},{'conventional':>24}"
    _write_text(root / "summary.csv", header + "\n" + "\n".join(rows) + "\n")
    verdict = "\n".join(paper_verdict_lines(rep)) + "\n"
    _write_text(root / "verdict.txt", verdict)
    out.write(verdict)


def cmd_calibrate(args, out) -> None:
    cfg = parse_config(args.config)
    target = CalibrationTarget(
        parse_quantity(args.fmin), parse_quantity(args.fmax),
        parse_quantity(args.kvco) if args.kvco is not None else None,
        (cfg.sweep.v_lo, cfg.sweep.v_hi))
    res = calibrate(cfg.device, cfg.tank, cfg.topology, target, alpha=cfg.varactor.alpha,
                    v_mid=cfg.varactor.v_mid, n=cfg.sweep.n)
    out.write(varactor_section(res.varactor))
    for key, val in res.residuals.items():
        print(f"residual {key} = {val:+.3e}", file=sys.stderr)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="oscide", description="Cross-coupled LC VCO design and verification")
    p.add_argument("--version", action="version", version=f"oscide {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("analyze", help="start-up, C_total and f_o at mid tuning")
    s.add_argument("config")
    s.set_defaults(func=cmd_analyze)

    s = sub.add_parser("tune", help="tuning-curve sweep to CSV")
    s.add_argument("config")
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--svg", action="store_true")
    s.set_defaults(func=cmd_tune)

    s = sub.add_parser("noise", help="phase-noise spectrum to CSV")
    s.add_argument("config")
    s.add_argument("--offsets", default=DEFAULT_OFFSETS)
    s.add_argument("-o", "--output", required=True)
    s.add_argument("--svg", action="store_true")
    s.set_defaults(func=cmd_noise)

    s = sub.add_parser("transient", help="time-domain simulation to CSV")
    s.add_argument("config")
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_transient)

    s = sub.add_parser("compare", help="cascode vs conventional report")
    s.add_argument("cascode")
    s.add_argument("conventional")
    s.add_argument("--offsets", default=DEFAULT_OFFSETS)
    s.add_argument("-o", "--output", required=True)
    s.set_defaults(func=cmd_compare)

    s = sub.add_parser("calibrate", help="fit the varactor to frequency targets")
    s.add_argument("config")
    s.add_argument("--fmin", required=True)
    s.add_argument("--fmax", required=True)
    s.add_argument("--kvco")
    s.set_defaults(func=cmd_calibrate)
    return p


def main(argv=None, stdout=None) -> int:
    out = stdout or sys.stdout
    try:
        args = build_parser().parse_args(argv)
        args.func(args, out)
    except OscideError as exc:
        print(f"ERROR {exc.code}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"ERROR io: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
