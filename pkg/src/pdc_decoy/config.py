"""JSON run configuration for the command-line harness."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any, Optional

from .channel import CONVENTIONS
from .core_model import SystemParams
from .key_rate import SchemeSpec
from .optimizer import SearchSettings, distance_grid


class ConfigError(ValueError):
    """Invalid configuration; ``field`` names the offending entry."""

    def __init__(self, field: str, message: str) -> None:
        super().__init__(f"{field}: {message}")
        self.field = field


def _default_schemes() -> list[SchemeSpec]:
    return [
        SchemeSpec("ideal"),
        SchemeSpec("new_both"),
        SchemeSpec.fixed("previous_fixed_mu", 0.1, label="previous"),
    ]


@dataclass(frozen=True)
class DistanceGrid:
    start: float = 0.0
    stop: float = 160.0
    step: float = 1.0

    def values(self) -> list[float]:
        return distance_grid(self.start, self.stop, self.step)


@dataclass(frozen=True)
class OutputSettings:
    format: str = "csv"
    path: Optional[str] = None


@dataclass(frozen=True)
class RunConfig:
    params: SystemParams = field(default_factory=SystemParams)
    schemes: tuple[SchemeSpec, ...] = field(default_factory=lambda: tuple(_default_schemes()))
    distance_grid: DistanceGrid = field(default_factory=DistanceGrid)
    a_policy: str = "limit"
    nontriggered_yield_convention: str = "consistent"
    search: SearchSettings = field(default_factory=SearchSettings)
    output: OutputSettings = field(default_factory=OutputSettings)

    def resolved_schemes(self) -> list[SchemeSpec]:
        """Schemes with the run-level coupling policy filled in where unset."""
        return [s if s.a_policy is not None else s.with_a_policy(self.a_policy) for s in self.schemes]

    def scheme(self, name: str) -> SchemeSpec:
        for s in self.resolved_schemes():
            if s.name == name:
                return s
        for s in self.resolved_schemes():
            if s.kind == name:
                return s
        raise ConfigError("scheme", f"no scheme named {name!r} in config")

    def with_policy(self, a_policy: str) -> "RunConfig":
        """Override the coupling policy of every coupled scheme."""
        if a_policy not in ("strict", "limit"):
            raise ConfigError("a_policy", f"must be 'strict' or 'limit', got {a_policy!r}")
        schemes = tuple(s.with_a_policy(a_policy) if s.mu_policy == "coupled" else s for s in self.schemes)
        return replace(self, a_policy=a_policy, schemes=schemes)

    def to_dict(self) -> dict[str, Any]:
        return {
            "params": self.params.to_dict(),
            "schemes": [s.to_dict() for s in self.schemes],
            "distance_grid": {"start": self.distance_grid.start, "stop": self.distance_grid.stop, "step": self.distance_grid.step},
            "a_policy": self.a_policy,
            "nontriggered_yield_convention": self.nontriggered_yield_convention,
            "search": self.search.to_dict(),
            "output": {"format": self.output.format, "path": self.output.path},
        }

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def _section(data: dict, name: str) -> dict:
    value = data.get(name, {})
    if not isinstance(value, dict):
        raise ConfigError(name, "must be an object")
    return value


def _known(section: dict, name: str, allowed: set[str]) -> None:
    extra = set(section) - allowed
    if extra:
        raise ConfigError(f"{name}.{sorted(extra)[0]}", "unknown field")


def _number(section: dict, prefix: str, key: str, default: float) -> float:
    value = section.get(key, default)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{prefix}.{key}", f"must be a number, got {value!r}")
    return float(value)


def _build(prefix: str, cls: type, section: dict, defaults: Any) -> Any:
    names = {f.name for f in fields(cls)}
    _known(section, prefix, names)
    kwargs = {n: _number(section, prefix, n, getattr(defaults, n)) for n in names}
    try:
        return cls(**kwargs)
    except ValueError as exc:
        raise ConfigError(prefix, str(exc)) from None


def _scheme(entry: Any, index: int) -> SchemeSpec:
    where = f"schemes[{index}]"
    if not isinstance(entry, dict):
        raise ConfigError(where, "must be an object")
    _known(entry, where, {"kind", "mu_policy", "label"})
    kind = entry.get("kind")
    policy = entry.get("mu_policy")
    label = entry.get("label")
    if label is not None and not isinstance(label, str):
        raise ConfigError(f"{where}.label", "must be a string")
    try:
        if policy is None:
            return SchemeSpec(kind, label=label)
        if not isinstance(policy, dict) or len(policy) != 1:
            raise ConfigError(f"{where}.mu_policy", 'must be {"coupled": "strict"|"limit"} or {"fixed": <mu>}')
        (how, value), = policy.items()
        if how == "coupled":
            return SchemeSpec(kind, "coupled", value, None, label)
        if how == "fixed":
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise ConfigError(f"{where}.mu_policy.fixed", f"must be a number, got {value!r}")
            return SchemeSpec(kind, "fixed", None, float(value), label)
        raise ConfigError(f"{where}.mu_policy", f"unknown policy {how!r}")
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(where, str(exc)) from None


def config_from_dict(data: Any) -> RunConfig:
    if not isinstance(data, dict):
        raise ConfigError("<root>", "config must be a JSON object")
    _known(data, "<root>", {f.name for f in fields(RunConfig)})
    base = RunConfig()
    params = _build("params", SystemParams, _section(data, "params"), base.params)
    search = _build("search", SearchSettings, _section(data, "search"), base.search)
    grid = _build("distance_grid", DistanceGrid, _section(data, "distance_grid"), base.distance_grid)
    if grid.start < 0 or grid.step <= 0 or grid.stop < grid.start:
        raise ConfigError("distance_grid", "need 0 <= start <= stop and step > 0")

    raw_schemes = data.get("schemes")
    if raw_schemes is None:
        schemes = base.schemes
    elif isinstance(raw_schemes, list) and raw_schemes:
        schemes = tuple(_scheme(e, i) for i, e in enumerate(raw_schemes))
    else:
        raise ConfigError("schemes", "must be a non-empty list")
    if len({s.name for s in schemes}) != len(schemes):
        raise ConfigError("schemes", "scheme names must be unique (use 'label')")

    a_policy = data.get("a_policy", base.a_policy)
    if a_policy not in ("strict", "limit"):
        raise ConfigError("a_policy", f"must be 'strict' or 'limit', got {a_policy!r}")
    convention = data.get("nontriggered_yield_convention", base.nontriggered_yield_convention)
    if convention not in CONVENTIONS:
        raise ConfigError("nontriggered_yield_convention", f"must be one of {CONVENTIONS}, got {convention!r}")

    out = _section(data, "output")
    _known(out, "output", {"format", "path"})
    fmt = out.get("format", "csv")
    if fmt not in ("csv", "json"):
        raise ConfigError("output.format", f"must be 'csv' or 'json', got {fmt!r}")
    path = out.get("path")
    if path is not None and not isinstance(path, str):
        raise ConfigError("output.path", "must be a string or null")

    return RunConfig(params, schemes, grid, a_policy, convention, search, OutputSettings(fmt, path))


def load_config(path: Optional[str | Path]) -> RunConfig:
    """Read a config file; ``None`` gives the default (GYS) configuration."""
    if path is None:
        return RunConfig()
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {path}: {exc.strerror}") from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("--config", f"invalid JSON: {exc.msg} (line {exc.lineno})") from None
    return config_from_dict(data)
