"""Experiment configuration and its plain-text format.

A config document is UTF-8 text with one ``key: value`` pair per line.
Blank lines and anything after ``#`` are ignored. Pairs of numbers are
written ``a, b``; booleans as ``true``/``false``. Unknown keys are errors.

Example::

    # symmetric desk run
    case_id: case1
    n_agents: 500
    initial_money: 1000
    lambda_a: 1.032
    lambda_b: 1.032
    rng_seed: 1
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path

from ..chaos import DEFAULT_DISCARD, DEFAULT_START, MapParams
from ..market import MarketConfig
from ..stats import DEFAULT_CLASS_BOUNDS

TRACE_AUTO_LIMIT = 1_000_000

# (case_id, lambda_b) with lambda_a fixed at 1.032
TABLE1_CASES = (
    ("1", 1.032),
    ("2", 1.03781),
    ("3", 1.04362),
    ("4", 1.049430),
    ("5", 1.06105),
    ("6", 1.07267),
    ("7", 1.07848),
    ("8", 1.08429),
)


class ConfigError(ValueError):
    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        where = []
        if line is not None:
            where.append(f"line {line}")
        if key is not None:
            where.append(f"key '{key}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.key = key
        self.line = line


@dataclass(frozen=True)
class ExperimentConfig:
    n_agents: int
    initial_money: float
    lambda_a: float
    lambda_b: float
    rng_seed: int
    case_id: str = "case"
    total_steps: int | None = None
    map_start: tuple[float, float] = DEFAULT_START
    map_discard: int = DEFAULT_DISCARD
    class_bounds: tuple[float, float] = DEFAULT_CLASS_BOUNDS
    output_dir: Path = Path("runs")
    emit_trace: bool | None = None
    exp_fit_min_prob: float = 0.01
    pareto_threshold: float = 2000.0
    pareto_break: float | None = None

    def __post_init__(self):
        if self.total_steps is None:
            object.__setattr__(self, "total_steps", 2 * self.n_agents ** 2)
        if self.emit_trace is None:
            object.__setattr__(self, "emit_trace", self.total_steps <= TRACE_AUTO_LIMIT)
        object.__setattr__(self, "output_dir", Path(self.output_dir))
        self.validate()

    def validate(self):
        try:
            MarketConfig(self.n_agents, self.initial_money)
            MapParams(self.lambda_a, self.lambda_b)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        checks = [
            ("total_steps", self.total_steps >= 1, "must be >= 1"),
            ("map_start", all(0.0 <= v <= 1.0 for v in self.map_start), "coordinates must lie in [0, 1]"),
            ("map_discard", self.map_discard >= 0, "must be >= 0"),
            ("rng_seed", self.rng_seed >= 0, "must be a non-negative integer"),
            ("class_bounds", 0 < self.class_bounds[0] < self.class_bounds[1], "need 0 < poor_upper < middle_upper"),
            ("exp_fit_min_prob", 0 < self.exp_fit_min_prob <= 1, "must lie in (0, 1]"),
            ("pareto_threshold", self.pareto_threshold > 0, "must be positive"),
            ("pareto_break", self.pareto_break is None or self.pareto_break > self.pareto_threshold,
             "must exceed pareto_threshold"),
            ("case_id", bool(self.case_id) and "/" not in self.case_id, "must be a non-empty name without '/'"),
        ]
        for key, ok, msg in checks:
            if not ok:
                raise ConfigError(msg, key=key)

    @property
    def market(self) -> MarketConfig:
        return MarketConfig(self.n_agents, self.initial_money)

    @property
    def params(self) -> MapParams:
        return MapParams(self.lambda_a, self.lambda_b)

    @property
    def case_dir(self) -> Path:
        return self.output_dir / self.case_id

    def replace(self, **changes) -> "ExperimentConfig":
        if "n_agents" in changes and "total_steps" not in changes:
            changes["total_steps"] = None
        return dataclasses.replace(self, **changes)

    def items(self) -> list[tuple[str, str]]:
        """Canonical ``key: value`` rendering, parseable by :func:`load_config`."""
        out = []
        for f in dataclasses.fields(self):
            v = getattr(self, f.name)
            if v is None:
                continue
            out.append((f.name, _render(v)))
        return out

    def dumps(self) -> str:
        return "".join(f"{k}: {v}\n" for k, v in self.items())


@dataclass(frozen=True)
class SweepSpec:
    base: ExperimentConfig
    cases: tuple[tuple[str, float], ...] = TABLE1_CASES

    def __post_init__(self):
        ids = [c for c, _ in self.cases]
        if not ids:
            raise ConfigError("a sweep needs at least one case", key="cases")
        if len(set(ids)) != len(ids):
            raise ConfigError("case ids must be unique", key="cases")

    def configs(self) -> list[ExperimentConfig]:
        return [self.base.replace(case_id=cid, lambda_b=lb) for cid, lb in self.cases]


PRESETS = {
    "desk": dict(n_agents=500, initial_money=1000.0, lambda_a=1.032, lambda_b=1.032, rng_seed=1),
    "paper": dict(n_agents=5000, initial_money=1000.0, lambda_a=1.032, lambda_b=1.032, rng_seed=1,
                  emit_trace=False),
}


def _render(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, tuple):
        return ", ".join(_render(x) for x in v)
    return str(v)


def _parse_int(s):
    return int(s.replace("_", ""))


def _parse_float(s):
    return float(s.replace("_", ""))


def _parse_bool(s):
    low = s.lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _parse_pair(s):
    parts = [p.strip() for p in s.split(",")]
    if len(parts) != 2:
        raise ValueError(f"expected two comma-separated numbers, got {s!r}")
    return (_parse_float(parts[0]), _parse_float(parts[1]))


def _parse_opt_float(s):
    return None if s.lower() in ("none", "") else _parse_float(s)


def _parse_cases(s):
    cases = []
    for item in s.split(","):
        cid, sep, lb = item.strip().partition("=")
        if not sep:
            raise ValueError(f"case entries look like 'id=lambda_b', got {item.strip()!r}")
        cases.append((cid.strip(), _parse_float(lb.strip())))
    return tuple(cases)


_PARSERS = {
    "case_id": str,
    "n_agents": _parse_int,
    "initial_money": _parse_float,
    "total_steps": _parse_int,
    "lambda_a": _parse_float,
    "lambda_b": _parse_float,
    "map_start": _parse_pair,
    "map_discard": _parse_int,
    "rng_seed": _parse_int,
    "class_bounds": _parse_pair,
    "output_dir": Path,
    "emit_trace": _parse_bool,
    "exp_fit_min_prob": _parse_float,
    "pareto_threshold": _parse_float,
    "pareto_break": _parse_opt_float,
}
_REQUIRED = ("n_agents", "initial_money", "lambda_a", "lambda_b", "rng_seed")


def parse_document(text: str, allow_cases: bool = False) -> dict:
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition(":")
        key, value = key.strip(), value.strip()
        if not sep or not key:
            raise ConfigError(f"expected 'key: value', got {raw.strip()!r}", line=lineno)
        if key == "cases" and allow_cases:
            parser = _parse_cases
        elif key in _PARSERS:
            parser = _PARSERS[key]
        else:
            raise ConfigError("unknown key", key=key, line=lineno)
        if key in values:
            raise ConfigError("duplicate key", key=key, line=lineno)
        try:
            values[key] = parser(value)
        except ValueError as exc:
            raise ConfigError(str(exc), key=key, line=lineno) from None
    return values


def _build(values: dict, base: dict | None) -> ExperimentConfig:
    merged = dict(base or {})
    merged.update(values)
    missing = [k for k in _REQUIRED if k not in merged]
    if missing:
        raise ConfigError(f"missing required key(s): {', '.join(missing)}")
    return ExperimentConfig(**merged)


def load_config(text: str, base: dict | None = None) -> ExperimentConfig:
    """Parse and validate a single-case document.

    ``base`` supplies values (e.g. a preset) for keys the document omits.
    """
    return _build(parse_document(text), base)


def load_sweep(text: str, base: dict | None = None) -> SweepSpec:
    values = parse_document(text, allow_cases=True)
    cases = values.pop("cases", TABLE1_CASES)
    return SweepSpec(_build(values, base), cases)


def preset(name: str) -> dict:
    try:
        return dict(PRESETS[name])
    except KeyError:
        raise ConfigError(f"unknown preset {name!r}; choose from {sorted(PRESETS)}") from None
