"""
Experiment configuration: one flat JSON document parsed into ExperimentConfig.
Problems raise ConfigError naming the offending field (or the JSON line/column).

Weights:
  null / absent           -> gamma_u = 1 for every u
  [g_1, ..., g_d]         -> product weights
  {"": 1, "1": .5, "1,2": .25, ...} -> general subset weights (every subset listed)
"""

import json
import math
from dataclasses import dataclass, field, fields
from typing import Any, Dict, List, Optional

from . import config as cfg
from .errors import ConfigError, DomainError
from .korobov_core import KorobovParams, SigmaSequence

MODES = ("cross", "nodes", "approx", "wce", "bound", "search", "convergence", "verify")
TEST_FUNCTIONS = ("representer", "random", "zero")


@dataclass
class ExperimentConfig:
    mode: str = "convergence"
    d: int = 1
    alpha: float = 2.0
    weights: Any = None
    n_grid: List[int] = field(default_factory=lambda: [32, 64, 128])
    eps: float = cfg.DEFAULT_EPS
    lam: Optional[float] = None  # default (1/2 + alpha) / 2
    M: float = 10.0  # cross radius for the cross command
    m: Optional[int] = None  # fixed m; otherwise chosen by m_rule
    m_rule: str = cfg.M_RULE
    m_scale: float = cfg.M_SCALE
    C1: float = 1.0
    r: float = 1.0
    j_radius: Optional[float] = None  # explicit surrogate radius
    j_radius_mult: float = cfg.J_RADIUS_MULT
    j_index_cap: int = cfg.J_INDEX_CAP
    rational: bool = False
    zeta: Optional[List[float]] = None
    z: Optional[List[int]] = None
    N: Optional[int] = None
    trials: int = cfg.MC_DEFAULT_TRIALS
    max_trials: int = cfg.SEARCH_MAX_TRIALS
    test_function: str = "representer"
    c_eps_n_max: Optional[int] = None  # default: largest n in the grid
    seed: int = 0
    workers: int = cfg.WORKERS
    out: Optional[str] = None
    format: str = "csv"

    def params(self) -> KorobovParams:
        try:
            if self.weights is None:
                return KorobovParams.unweighted(self.d, self.alpha)
            if isinstance(self.weights, list):
                return KorobovParams.product(self.d, self.alpha, [float(g) for g in self.weights])
            subsets = {}
            for key, g in self.weights.items():
                u = tuple(int(s) for s in key.split(",") if s.strip())
                subsets[u] = float(g)
            return KorobovParams.from_subsets(self.d, self.alpha, subsets)
        except (DomainError, ValueError) as e:
            raise ConfigError(str(e), field="weights")

    def sequence(self) -> SigmaSequence:
        return SigmaSequence.korobov(self.params())

    def lam_value(self) -> float:
        return self.lam if self.lam is not None else (0.5 + self.alpha) / 2.0

    def c_eps_range(self) -> int:
        if self.c_eps_n_max is not None:
            return self.c_eps_n_max
        return max(self.n_grid)

    def validate(self):
        if self.mode not in MODES:
            raise ConfigError("unknown mode '{}'".format(self.mode), field="mode")
        if not isinstance(self.d, int) or self.d < 1:
            raise ConfigError("must be a positive integer", field="d")
        if not self.alpha > 0.5:
            raise ConfigError("must exceed 1/2", field="alpha")
        if not self.n_grid or any(not isinstance(n, int) or n < 1 for n in self.n_grid):
            raise ConfigError("must be a non-empty list of positive integers", field="n_grid")
        if any(b <= a for a, b in zip(self.n_grid, self.n_grid[1:])):
            raise ConfigError("must be strictly increasing", field="n_grid")
        if not (0.0 < self.eps <= 1.0):
            raise ConfigError("must lie in (0, 1]", field="eps")
        lam = self.lam_value()
        if not (0.5 < lam < self.alpha):
            raise ConfigError("must lie in (1/2, alpha)", field="lam")
        if self.M < 0:
            raise ConfigError("must be nonnegative", field="M")
        if self.m is not None and self.m < 1:
            raise ConfigError("must be positive", field="m")
        if self.m_rule not in ("mbound", "scaling"):
            raise ConfigError("must be 'mbound' or 'scaling'", field="m_rule")
        if self.j_radius_mult < 1:
            raise ConfigError("must be at least 1", field="j_radius_mult")
        if self.j_radius is not None and not self.j_radius > 0:
            raise ConfigError("must be positive", field="j_radius")
        if self.trials < cfg.MC_MIN_TRIALS:
            raise ConfigError("must be at least {}".format(cfg.MC_MIN_TRIALS), field="trials")
        if self.max_trials < 1:
            raise ConfigError("must be at least 1", field="max_trials")
        if self.test_function not in TEST_FUNCTIONS:
            raise ConfigError("must be one of {}".format(TEST_FUNCTIONS), field="test_function")
        if self.format not in ("csv", "json"):
            raise ConfigError("must be 'csv' or 'json'", field="format")
        if self.zeta is not None and len(self.zeta) != self.d:
            raise ConfigError("must have d components", field="zeta")
        if self.z is not None and len(self.z) != self.d:
            raise ConfigError("must have d components", field="z")
        if self.seed < 0 or self.seed >= 2 ** 64:
            raise ConfigError("must be an unsigned 64-bit integer", field="seed")
        self.params()


_TYPES = {f.name: f.type for f in fields(ExperimentConfig)}
_OPTIONAL_FLOATS = ("lam", "j_radius")
_OPTIONAL_INTS = ("m", "N", "c_eps_n_max")
_LIST_FIELDS = {"n_grid": int, "zeta": float, "z": int}


def _is_int(value: Any) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _coerce_float(key: str, value: Any) -> float:
    if not _is_number(value):
        raise ConfigError("must be a number", field=key)
    value = float(value)
    if not math.isfinite(value):
        raise ConfigError("must be finite", field=key)
    return value


def _coerce(key: str, value: Any, default: Any) -> Any:
    """Type-check one JSON value against the field's declared kind before any range check."""
    if key in _LIST_FIELDS:
        if value is None and key != "n_grid":
            return None
        if not isinstance(value, list):
            raise ConfigError("must be a list", field=key)
        if _LIST_FIELDS[key] is int:
            if not all(_is_int(v) for v in value):
                raise ConfigError("must be a list of integers", field=key)
            return value
        return [_coerce_float(key, v) for v in value]
    if key in _OPTIONAL_FLOATS:
        return None if value is None else _coerce_float(key, value)
    if key in _OPTIONAL_INTS:
        if value is not None and not _is_int(value):
            raise ConfigError("must be an integer", field=key)
        return value
    if key == "out":
        if value is not None and not isinstance(value, str):
            raise ConfigError("must be a string", field=key)
        return value
    if key == "weights":
        if value is None:
            return None
        if isinstance(value, list):
            return [_coerce_float(key, v) for v in value]
        if isinstance(value, dict):
            return {str(k): _coerce_float(key, v) for k, v in value.items()}
        raise ConfigError("must be null, a list or an object", field=key)
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError("must be true or false", field=key)
        return value
    if isinstance(default, float):
        return _coerce_float(key, value)
    if isinstance(default, int):
        if not _is_int(value):
            raise ConfigError("must be an integer", field=key)
        return value
    if isinstance(default, str) and not isinstance(value, str):
        raise ConfigError("must be a string", field=key)
    return value


def from_dict(data: Dict[str, Any]) -> ExperimentConfig:
    if not isinstance(data, dict):
        raise ConfigError("top level must be a JSON object")
    known = set(_TYPES)
    for key in data:
        if key not in known:
            raise ConfigError("unknown field", field=key)
    conf = ExperimentConfig()
    for key, value in data.items():
        setattr(conf, key, _coerce(key, value, getattr(conf, key)))
    conf.validate()
    return conf


def loads(text: str) -> ExperimentConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError("invalid JSON at line {} column {}: {}".format(e.lineno, e.colno, e.msg))
    return from_dict(data)


def load(path: str) -> ExperimentConfig:
    try:
        with open(path, "r", encoding="utf-8") as f:
            text = f.read()
    except OSError as e:
        raise ConfigError("cannot read {}: {}".format(path, e))
    return loads(text)
