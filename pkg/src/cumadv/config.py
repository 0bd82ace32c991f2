"""Run configuration: flat ``key = value`` files with ``[section]`` blocks per generator.

Example::

    command = compare
    seed = 7
    length = 5
    reps = 1000000

    [a]
    model = polya-binary

    [b]
    model = talent-uniform

Top-level keys are listed in ``TOP_LEVEL_KEYS``.  A section holds ``model``
plus that model's parameters; section names are ``generator``, ``a``, ``b``,
``q-model`` and ``twin``.
"""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .generators import GeneratorSpec, POINT_PROCESS_MODELS

COMMANDS = ("simulate", "twin", "compare", "exchangeability", "fit-musiclab", "report-musiclab")
DEFAULT_SEED = 20261019

# key -> converter
TOP_LEVEL_KEYS = {
    "command": str,
    "seed": int,
    "reps": int,
    "length": int,
    "horizon": float,
    "output": str,
    "format": str,
    "permutations": str,
    "buckets": int,
    "rounds": int,
    "threshold": float,
    "log": str,
    "f": float,
    "grid": str,
    "refine_step": float,
    "level": float,
    "expect": str,
}
SECTIONS = ("generator", "a", "b", "q-model", "twin")


class ConfigError(ValueError):
    pass


@dataclass
class RunConfig:
    command: str
    seed: int = DEFAULT_SEED
    seed_defaulted: bool = True
    reps: int | None = None
    length: int | None = None
    horizon: float | None = None
    output: str | None = None
    format: str = "csv"
    generators: dict[str, GeneratorSpec] = field(default_factory=dict)
    options: dict = field(default_factory=dict)

    def echo(self) -> dict:
        out = {k: v for k, v in asdict(self).items() if k not in ("generators", "seed_defaulted")}
        out["generators"] = {k: g.describe() for k, g in sorted(self.generators.items())}
        return out

    def echo_json(self) -> str:
        return json.dumps(self.echo(), sort_keys=True, default=str)


def parse_config_text(text: str) -> tuple[dict, dict[str, dict]]:
    """Split a config file into top-level values and per-section raw params."""
    top: dict[str, object] = {}
    sections: dict[str, dict[str, str]] = {}
    current: dict | None = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"line {lineno}: unterminated section header")
            name = line[1:-1].strip()
            if name not in SECTIONS:
                raise ConfigError(f"line {lineno}: unknown section [{name}]")
            current = sections.setdefault(name, {})
            continue
        key, sep, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected 'key = value'")
        if current is not None:
            current[key] = val
            continue
        if key not in TOP_LEVEL_KEYS:
            raise ConfigError(f"line {lineno}: unknown key {key!r}")
        try:
            top[key] = TOP_LEVEL_KEYS[key](val)
        except ValueError:
            raise ConfigError(f"line {lineno}: bad value for {key}: {val!r}") from None
    return top, sections


def build_generator(section: str, raw: dict[str, str], horizon: float | None = None) -> GeneratorSpec:
    params = dict(raw)
    model = params.pop("model", None)
    if section == "q-model":
        model = model or "q-model"
    elif section == "twin":
        model = model or "twin"
    if not model:
        raise ConfigError(f"section [{section}] needs a 'model' key")
    if horizon is not None and model in POINT_PROCESS_MODELS:
        params.setdefault("horizon", str(horizon))
    try:
        return GeneratorSpec(model, params)
    except ValueError as exc:
        raise ConfigError(f"[{section}] {exc}") from None


def make_config(top: dict, sections: dict[str, dict]) -> RunConfig:
    command = top.get("command")
    if command is None:
        raise ConfigError("missing 'command'")
    if command not in COMMANDS:
        raise ConfigError(f"unknown command {command!r}; expected one of {', '.join(COMMANDS)}")
    fmt = top.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError(f"format must be csv or json, got {fmt!r}")
    horizon = top.get("horizon")
    gens = {name: build_generator(name, raw, horizon) for name, raw in sections.items()}
    options = {k: v for k, v in top.items()
               if k not in ("command", "seed", "reps", "length", "horizon", "output", "format")}
    return RunConfig(
        command=command,
        seed=top.get("seed", DEFAULT_SEED),
        seed_defaulted="seed" not in top,
        reps=top.get("reps"),
        length=top.get("length"),
        horizon=horizon,
        output=top.get("output"),
        format=fmt,
        generators=gens,
        options=options,
    )


def load_config(path: str | Path, overrides: dict | None = None,
                section_overrides: dict[str, dict] | None = None) -> RunConfig:
    """Read and validate a config file; ``overrides`` (from flags) win over file values."""
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    top, sections = parse_config_text(p.read_text())
    for key, val in (overrides or {}).items():
        if val is None:
            continue
        if key not in TOP_LEVEL_KEYS:
            raise ConfigError(f"unknown key {key!r}")
        top[key] = val
    for name, raw in (section_overrides or {}).items():
        sections[name] = dict(raw)
    return make_config(top, sections)
