"""TOML run configuration with engineering-suffix values and strict key checking.

Example::

    topology = "cascode"

    [device]
    gm = "9m"
    ro = "50k"
    cgs = "40f"

    [tank]
    l = "400p"
    rp = 900
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from pathlib import Path

import tomli

from .devices import DeviceParams, TankParams, Topology, VaractorModel
from .errors import DomainError, ParseError, ValidationError
from .units import parse_quantity

# section -> (required keys, optional keys)
SCHEMA = {
    "device": ({"gm", "ro", "cgs"}, {"gm_triode", "beta", "vt"}),
    "tank": ({"l", "rp"}, {"cp", "cl"}),
    "varactor": ({"c_min", "c_max"}, {"v_mid", "alpha"}),
    "noise": ({"v_max"}, {"temperature"}),
    "sim": (set(), {"dt", "t_end", "v_perturb", "record_stride", "tail_ratio", "c_tail",
                    "triode_gm_ratio", "periods"}),
    "sweep": (set(), {"v_lo", "v_hi", "n"}),
}
REQUIRED_SECTIONS = ("device", "tank", "varactor")
INTEGER_KEYS = {"record_stride", "n"}


@dataclass(frozen=True)
class NoiseSection:
    v_max: float
    temperature: float = 300.0


@dataclass(frozen=True)
class SweepSection:
    v_lo: float = 0.0
    v_hi: float = 1.0
    n: int = 101


@dataclass(frozen=True)
class RunConfig:
    path: str
    topology: Topology
    device: DeviceParams
    tank: TankParams
    varactor: VaractorModel
    noise: NoiseSection | None = None
    sim: dict = field(default_factory=dict)
    sweep: SweepSection = SweepSection()

    def require_noise(self) -> NoiseSection:
        if self.noise is None:
            raise ValidationError("noise", "section [noise] with v_max is required for this command",
                                  path=self.path)
        return self.noise


class _Lines:
    """Locates ``[section]`` headers and ``key =`` lines for error messages."""

    _header = re.compile(r"^\s*\[\s*([A-Za-z0-9_.-]+)\s*\]")
    _key = re.compile(r"^\s*([A-Za-z0-9_-]+)\s*=")

    def __init__(self, text: str):
        self.sections: dict[str, int] = {}
        self.keys: dict[tuple[str, str], int] = {}
        current = ""
        for no, line in enumerate(text.splitlines(), start=1):
            if m := self._header.match(line):
                current = m.group(1)
                self.sections.setdefault(current, no)
            elif m := self._key.match(line):
                self.keys.setdefault((current, m.group(1)), no)

    def of(self, section: str, key: str | None = None) -> int | None:
        if key is not None and (section, key) in self.keys:
            return self.keys[(section, key)]
        return self.sections.get(section)


def _section_values(name: str, raw: dict, lines: _Lines, path: str) -> dict:
    required, optional = SCHEMA[name]
    if not isinstance(raw, dict):
        raise ValidationError(name, "must be a [section] table", lines.of("", name), path)
    unknown = sorted(set(raw) - required - optional)
    if unknown:
        key = unknown[0]
        raise ValidationError(f"{name}.{key}", "unknown key", lines.of(name, key), path)
    missing = sorted(required - set(raw))
    if missing:
        raise ValidationError(f"{name}.{missing[0]}", "missing required key", lines.of(name), path)
    out = {}
    for key, val in raw.items():
        try:
            num = parse_quantity(val)
        except DomainError as exc:
            raise ValidationError(f"{name}.{key}", str(exc), lines.of(name, key), path) from None
        if not math.isfinite(num):
            raise ValidationError(f"{name}.{key}", "must be finite", lines.of(name, key), path)
        if key in INTEGER_KEYS:
            if num != int(num):
                raise ValidationError(f"{name}.{key}", "must be an integer", lines.of(name, key), path)
            num = int(num)
        out[key] = num
    return out


def _build(name: str, ctor, values: dict, lines: _Lines, path: str):
    try:
        return ctor(**values)
    except DomainError as exc:
        msg = str(exc)
        key = msg.split(" ", 1)[0]
        if key in values:
            raise ValidationError(f"{name}.{key}", msg, lines.of(name, key), path) from None
        raise ValidationError(name, msg, lines.of(name), path) from None


def parse_text(text: str, path: str = "<string>") -> RunConfig:
    try:
        data = tomli.loads(text)
    except tomli.TOMLDecodeError as exc:
        m = re.search(r"line (\d+)", str(exc))
        raise ParseError(str(exc), int(m.group(1)) if m else None, path) from None
    lines = _Lines(text)

    unknown = sorted(k for k in data if k not in SCHEMA and k != "topology")
    if unknown:
        raise ValidationError(unknown[0], "unknown key or section", lines.of("", unknown[0]) or
                              lines.of(unknown[0]), path)
    for name in REQUIRED_SECTIONS:
        if name not in data:
            raise ValidationError(name, f"missing required section [{name}]", path=path)
    if "topology" not in data:
        raise ValidationError("topology", "missing top-level key", path=path)
    if not isinstance(data["topology"], str):
        raise ValidationError("topology", "must be a string", lines.of("", "topology"), path)
    try:
        topology = Topology.parse(data["topology"])
    except DomainError as exc:
        raise ValidationError("topology", str(exc), lines.of("", "topology"), path) from None

    sec = {name: _section_values(name, data[name], lines, path) for name in SCHEMA if name in data}
    device = _build("device", DeviceParams, sec["device"], lines, path)
    tank = _build("tank", TankParams, sec["tank"], lines, path)
    varactor = _build("varactor", VaractorModel, sec["varactor"], lines, path)
    noise = _build("noise", NoiseSection, sec["noise"], lines, path) if "noise" in sec else None
    if noise is not None:
        for key in ("v_max", "temperature"):
            if not getattr(noise, key) > 0:
                raise ValidationError(f"noise.{key}", "must be > 0", lines.of("noise", key), path)
    sweep = SweepSection(**sec.get("sweep", {}))
    if not sweep.v_lo < sweep.v_hi:
        raise ValidationError("sweep.v_hi", "must exceed v_lo", lines.of("sweep", "v_hi"), path)
    if sweep.n < 3:
        raise ValidationError("sweep.n", "must be >= 3", lines.of("sweep", "n"), path)
    return RunConfig(path, topology, device, tank, varactor, noise, sec.get("sim", {}), sweep)


def parse_config(path) -> RunConfig:
    p = Path(path)
    try:
        text = p.read_text(encoding="utf-8")
    except OSError as exc:
        raise ParseError(f"cannot read config: {exc.strerror}", path=str(p)) from None
    return parse_text(text, str(p))


def varactor_section(var: VaractorModel) -> str:
    return (
        "[varactor]\n"
        f"c_min = {var.c_min!r}\n"
        f"c_max = {var.c_max!r}\n"
        f"v_mid = {var.v_mid!r}\n"
        f"alpha = {var.alpha!r}\n"
    )
