"""Sweep configuration: defaults, JSON file, flag overrides, validation."""

import json
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

from .errors import DomainError
from .hamiltonian import DEFAULT_DIM_CAP, HamiltonianSpec
from .states import Case, Direction

__all__ = ["SweepConfig", "ConfigIssue", "ValidationResult", "validate_config", "load_config"]

@dataclass(frozen=True)
class SweepConfig:
    J: float = 1.0
    Jy: float = 1.4
    Jz: float = 0.5
    hz: float = 0.01
    n_min: int = 2
    n_max: int = 12
    k_values: tuple = (0, 1, 2, 3)
    cases: tuple = ("a", "b")
    directions: tuple = ("z",)
    t_max: float = 50.0
    n_times: int = 2000
    bound_check: bool = True
    bound_t_max: float = 1000.0
    bound_n_times: int = 10000
    bound_n_max: int = None
    decay_threshold: float = 0.1
    ldos_n: int = None
    evolve_n: int = None
    out_dir: str = "results"
    dim_cap: int = DEFAULT_DIM_CAP
    threads: int = 1
    seed: int = None

    def hamiltonian(self, n):
        return HamiltonianSpec(n, self.J, self.Jy, self.Jz, self.hz)

    @property
    def n_values(self):
        return list(range(self.n_min, self.n_max + 1))

    @property
    def case_list(self):
        return [Case.parse(c) for c in self.cases]

    @property
    def direction_list(self):
        return [Direction.parse(d) for d in self.directions]

    def to_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class ConfigIssue:
    field: str
    message: str

    def __str__(self):
        return f"{self.field}: {self.message}"


@dataclass
class ValidationResult:
    config: SweepConfig = None
    errors: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.errors


_FIELDS = {f.name: f for f in fields(SweepConfig)}
_TUPLE_FIELDS = ("k_values", "cases", "directions")


def _is_int(v):
    return isinstance(v, int) and not isinstance(v, bool)


def _is_real(v):
    return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)


def _check(cfg, errors, warnings, seedless):
    def err(name, msg):
        errors.append(ConfigIssue(name, msg))

    for name in ("J", "Jy", "Jz", "hz", "t_max", "bound_t_max", "decay_threshold"):
        if not _is_real(getattr(cfg, name)):
            err(name, f"must be a finite number, got {getattr(cfg, name)!r}")
    for name in ("Jy", "Jz", "hz"):
        v = getattr(cfg, name)
        if _is_real(v) and v < 0:
            err(name, f"coupling must be >= 0, got {v!r}")
    for name in ("n_min", "n_max", "n_times", "bound_n_times", "dim_cap", "threads"):
        if not _is_int(getattr(cfg, name)):
            err(name, f"must be an integer, got {getattr(cfg, name)!r}")
    for name in ("ldos_n", "evolve_n", "bound_n_max"):
        v = getattr(cfg, name)
        if v is not None and (not _is_int(v) or v < 1):
            err(name, f"must be a positive integer or null, got {v!r}")
    if not isinstance(cfg.bound_check, bool):
        err("bound_check", "must be true or false")
    if errors:
        return

    if cfg.n_min < 1:
        err("n_min", "must be >= 1")
    if cfg.n_max < cfg.n_min:
        err("n_max", f"must be >= n_min ({cfg.n_min})")
    if cfg.t_max <= 0:
        err("t_max", "must be positive")
    if cfg.bound_t_max <= 0:
        err("bound_t_max", "must be positive")
    if cfg.n_times < 2:
        err("n_times", "must be >= 2")
    if cfg.bound_n_times < 2:
        err("bound_n_times", "must be >= 2")
    if not 0 < cfg.decay_threshold < 1:
        err("decay_threshold", "must lie in (0, 1)")
    if cfg.threads < 1:
        err("threads", "must be >= 1")
    if cfg.dim_cap < 2:
        err("dim_cap", "must be >= 2")
    for k in cfg.k_values:
        if not _is_int(k) or k < 0:
            err("k_values", f"flip counts must be non-negative integers, got {k!r}")
    if all(_is_int(k) for k in cfg.k_values) and len(set(cfg.k_values)) != len(cfg.k_values):
        err("k_values", "duplicate flip counts")
    parsed_cases = []
    for c in cfg.cases:
        try:
            parsed_cases.append(Case.parse(c))
        except DomainError as exc:
            err("cases", str(exc))
    if len(set(parsed_cases)) != len(parsed_cases):
        err("cases", "duplicate cases")
    labels = []
    for d in cfg.directions:
        try:
            labels.append(Direction.parse(d).label)
        except DomainError as exc:
            err("directions", str(exc))
    if len(set(labels)) != len(labels):
        err("directions", "duplicate directions")
    if seedless and cfg.seed is not None:
        err("seed", "configuration requests randomness but --seedless was given")
    if errors:
        return

    if 2 ** cfg.n_max > cfg.dim_cap:
        warnings.append(ConfigIssue(
            "n_max", f"2**{cfg.n_max} exceeds dim_cap {cfg.dim_cap}; those points will be skipped"))
    for k in cfg.k_values:
        if 2 * k >= cfg.n_min:
            dropped = [n for n in cfg.n_values if n <= 2 * k]
            warnings.append(ConfigIssue(
                "k_values",
                f"k={k} > n/2 for n in {dropped}; filtered from scaling sweeps (needs n > 2k)"))


def _coerce(name, value):
    if name in _TUPLE_FIELDS:
        if isinstance(value, (str, int)):
            value = [value]
        if isinstance(value, list):
            value = tuple(str(v).lower() if name != "k_values" else v for v in value)
    return value


def load_config(source=None, overrides=None, seedless=False):
    """Merge defaults < JSON file < overrides and validate.

    ``source`` is a path to a JSON object, a mapping, or ``None``. Returns a
    :class:`ValidationResult`; ``config`` is ``None`` when there are errors.
    """
    result = ValidationResult()
    data = {}
    if source is not None and not isinstance(source, dict):
        path = Path(source)
        try:
            data = json.loads(path.read_text())
        except OSError as exc:
            result.errors.append(ConfigIssue("config", f"cannot read {path}: {exc}"))
            return result
        except json.JSONDecodeError as exc:
            result.errors.append(ConfigIssue("config", f"invalid JSON in {path}: {exc}"))
            return result
        if not isinstance(data, dict):
            result.errors.append(ConfigIssue("config", "top level must be a JSON object"))
            return result
    elif isinstance(source, dict):
        data = dict(source)

    merged = {}
    for key, value in data.items():
        if key not in _FIELDS:
            result.errors.append(ConfigIssue(key, "unknown configuration key"))
            continue
        merged[key] = _coerce(key, value)
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = _coerce(key, value)
    if result.errors:
        return result

    cfg = replace(SweepConfig(), **merged)
    _check(cfg, result.errors, result.warnings, seedless)
    if not result.errors:
        result.config = cfg
    return result


def validate_config(path, overrides=None, seedless=False):
    """Parse and validate the JSON configuration file at ``path``."""
    return load_config(path, overrides=overrides, seedless=seedless)
