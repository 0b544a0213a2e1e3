"""
Run configuration: an INI file with one section per config type.

Example::

    [RunConfig]
    input = bars.csv
    out = results
    splits = 2024-09-01T00:00:00+00:00
    shifts = 0, 1, 2, 3

    [SessionPolicy]
    timezone = America/New_York

    [DecisionConfig]
    theta = 0.06

Every key is optional except ``RunConfig.input`` and ``SessionPolicy.timezone``.
"""
from __future__ import annotations

import configparser
import dataclasses
import math
import os
from dataclasses import dataclass
from datetime import datetime, time, timezone
from typing import Optional

from .backtest import DAYS_PER_MONTH
from .decision import DecisionConfig
from .errors import ConfigError
from .indicators import IndicatorConfig
from .market_data import ColumnSpec, SessionPolicy
from .signal_pipeline import PipelineConfig


@dataclass(frozen=True)
class RunConfig:
    input: str
    session: SessionPolicy
    out: str = "out"
    columns: ColumnSpec = ColumnSpec()
    indicators: IndicatorConfig = IndicatorConfig()
    pipeline: PipelineConfig = PipelineConfig()
    decision: DecisionConfig = DecisionConfig()
    splits: tuple[datetime, ...] = ()
    shifts: tuple[int, ...] = (0, 1, 2, 3)
    cuts: int = 50
    seed: int = 0
    days_per_month: float = DAYS_PER_MONTH

    def __post_init__(self):
        if any(b <= a for a, b in zip(self.splits, self.splits[1:])):
            raise ConfigError("splits must be strictly increasing")
        for s in self.shifts:
            if int(s) != s or s < 0:
                raise ConfigError(f"shifts must be non-negative integers, got {s!r}")
        if self.cuts < 0:
            raise ConfigError("cuts must be >= 0")
        if not math.isfinite(self.days_per_month) or self.days_per_month <= 0:
            raise ConfigError("days_per_month must be positive")


SECTIONS = {
    "ColumnSpec": ("columns", ColumnSpec),
    "SessionPolicy": ("session", SessionPolicy),
    "IndicatorConfig": ("indicators", IndicatorConfig),
    "PipelineConfig": ("pipeline", PipelineConfig),
    "DecisionConfig": ("decision", DecisionConfig),
}
RUN_KEYS = ("input", "out", "splits", "shifts", "cuts", "seed", "days_per_month")


def parse_datetime(text: str) -> datetime:
    try:
        when = datetime.fromisoformat(text.strip().replace("Z", "+00:00"))
    except ValueError:
        raise ConfigError(f"bad datetime {text!r}; expected ISO-8601") from None
    if when.tzinfo is None:
        when = when.replace(tzinfo=timezone.utc)
    return when


def parse_int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise ConfigError(f"bad integer list {text!r}") from None


def _parse_time(text: str) -> time:
    try:
        return time.fromisoformat(text.strip())
    except ValueError:
        raise ConfigError(f"bad time of day {text!r}") from None


def _convert(kind, text: str, key: str):
    try:
        if kind is bool:
            low = text.strip().lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(text)
        if kind is time:
            return _parse_time(text)
        return kind(text.strip())
    except ValueError:
        raise ConfigError(f"bad value for {key}: {text!r}") from None


def _field_types(cls) -> dict[str, type]:
    names = {"str": str, "int": int, "float": float, "bool": bool, "time": time}
    return {f.name: names.get(f.type, f.type) for f in dataclasses.fields(cls) if f.init}


def _build(cls, values: dict[str, str], section: str):
    kinds = _field_types(cls)
    unknown = set(values) - set(kinds)
    if unknown:
        raise ConfigError(f"unknown key(s) in [{section}]: {', '.join(sorted(unknown))}")
    kwargs = {k: _convert(kinds[k], v, f"{section}.{k}") for k, v in values.items()}
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"[{section}]: {exc}") from None


def load_config(path: Optional[str] = None, overrides: Optional[dict] = None) -> RunConfig:
    """Read ``path`` (if given) and apply ``overrides``.

    ``overrides`` maps ``"Section.key"`` to a string value; command-line flags
    arrive this way so they pass through the same validation as file values.
    """
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    if path is not None:
        try:
            with open(path, encoding="utf-8") as fh:
                parser.read_file(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except configparser.Error as exc:
            raise ConfigError(f"bad config file {path}: {exc}") from None
    known = {"RunConfig", *SECTIONS}
    for name in parser.sections():
        if name not in known:
            raise ConfigError(f"unknown config section [{name}]")
    sections = {name: dict(parser[name]) if parser.has_section(name) else {} for name in known}
    for dotted, value in (overrides or {}).items():
        if value is None:
            continue
        name, _, key = dotted.partition(".")
        sections[name][key] = str(value)

    run = sections["RunConfig"]
    unknown = set(run) - set(RUN_KEYS)
    if unknown:
        raise ConfigError(f"unknown key(s) in [RunConfig]: {', '.join(sorted(unknown))}")
    if not run.get("input"):
        raise ConfigError("an input path is required (RunConfig.input or --input)")
    if not sections["SessionPolicy"].get("timezone"):
        raise ConfigError("a session timezone is required (SessionPolicy.timezone or --timezone)")

    kwargs = {key: _build(cls, sections[name], name) for name, (key, cls) in SECTIONS.items()}
    kwargs["input"] = run["input"]
    if "out" in run:
        kwargs["out"] = run["out"]
    if "splits" in run:
        kwargs["splits"] = tuple(parse_datetime(s) for s in run["splits"].split(",") if s.strip())
    if "shifts" in run:
        kwargs["shifts"] = parse_int_list(run["shifts"])
    for key in ("cuts", "seed"):
        if key in run:
            kwargs[key] = _convert(int, run[key], f"RunConfig.{key}")
    if "days_per_month" in run:
        kwargs["days_per_month"] = _convert(float, run["days_per_month"], "RunConfig.days_per_month")
    return RunConfig(**kwargs)


def _format_value(value) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, time):
        return value.isoformat()
    return str(value)


def dump_config(cfg: RunConfig) -> str:
    """Effective configuration in the same INI format :func:`load_config` reads."""
    lines = ["[RunConfig]", f"input = {cfg.input}", f"out = {cfg.out}"]
    lines.append("splits = " + ", ".join(s.isoformat() for s in cfg.splits))
    lines.append("shifts = " + ", ".join(str(s) for s in cfg.shifts))
    lines += [f"cuts = {cfg.cuts}", f"seed = {cfg.seed}",
              f"days_per_month = {_format_value(cfg.days_per_month)}"]
    for name, (attr, cls) in SECTIONS.items():
        lines += ["", f"[{name}]"]
        obj = getattr(cfg, attr)
        for f in dataclasses.fields(cls):
            if f.init:
                lines.append(f"{f.name} = {_format_value(getattr(obj, f.name))}")
    return "\n".join(lines) + "\n"


def ensure_writable_dir(path: str) -> None:
    try:
        os.makedirs(path, exist_ok=True)
    except OSError as exc:
        raise ConfigError(f"cannot create output directory {path}: {exc}") from None
    if not os.access(path, os.W_OK):
        raise ConfigError(f"output directory {path} is not writable")
