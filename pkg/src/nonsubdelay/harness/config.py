"""Flat ``section.key = value`` experiment configuration.

Blank lines and ``#`` comments are ignored. Lists are comma separated.
Unknown keys are errors. Example::

    bench.T = 8000
    bench.n = 10
    delay.kind = uniform
    delay.d = 10, 20, 500
    run.algorithms = DOGD-NF, DOAGD
    run.seeds = 0, 1, 2
    algo.DOAGD.eta = 1e-4
"""

from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Dict, Optional, Tuple

from ..algorithms import ALGORITHMS, BANDIT
from ..errors import ConfigError
from ..feedback import SCHEDULE_KINDS, canonical_kind
from ..sparsebench import BenchConfig

DEFAULT_Q_GRID = (0.01, 0.1, 1.0)
OVERRIDE_KEYS = ("eta", "mu", "K", "q_grid")

_SCALARS = {
    "bench.n": int,
    "bench.s": int,
    "bench.k": int,
    "bench.gamma": float,
    "bench.noise_std": float,
    "bench.T": int,
    "delay.kind": str,
    "delay.d": "intlist",
    "delay.file": str,
    "run.algorithms": "strlist",
    "run.seeds": "intlist",
    "run.q_grid": "floatlist",
    "run.x0": float,
    "run.parallel": int,
    "ledger.alpha": "auto_float",
    "ledger.beta": "auto_float",
    "ledger.L": "auto_float",
    "ledger.L_factor": float,
    "ledger.beta_n": int,
    "output.dir": str,
    "output.records": "bool",
    "output.plots": "bool",
    "output.run_csv": str,
    "output.stride": int,
}


@dataclass(frozen=True)
class ExperimentConfig:
    bench: BenchConfig = field(default_factory=BenchConfig)
    algorithms: Tuple[str, ...] = ALGORITHMS
    overrides: Dict[str, Dict[str, object]] = field(default_factory=dict)
    delay_kind: str = "uniform"
    delay_ds: Tuple[int, ...] = (10,)
    delay_file: Optional[str] = None
    seeds: Tuple[int, ...] = (0,)
    q_grid: Tuple[float, ...] = DEFAULT_Q_GRID
    x0: float = 0.5
    alpha: Optional[float] = None
    beta: Optional[float] = None
    L: Optional[float] = None
    L_factor: float = 2.0
    beta_n: int = 8
    out_dir: str = "out"
    records: bool = True
    plots: bool = True
    run_csv: str = "all"
    stride: int = 1
    parallel: int = 1

    def __post_init__(self):
        if not self.algorithms:
            raise ConfigError("run.algorithms", "at least one algorithm is required")
        for a in self.algorithms:
            if a not in ALGORITHMS:
                raise ConfigError("run.algorithms", f"unknown algorithm {a!r}; choose from {', '.join(ALGORITHMS)}")
        if not self.seeds:
            raise ConfigError("run.seeds", "at least one seed is required")
        if any(a in BANDIT for a in self.algorithms) and not self.q_grid:
            raise ConfigError("run.q_grid", "bandit algorithms need a nonempty grid")
        if any(q <= 0 for q in self.q_grid):
            raise ConfigError("run.q_grid", "grid values must be positive")
        try:
            canonical_kind(self.delay_kind)
        except ValueError:
            raise ConfigError("delay.kind", f"expected one of {', '.join(SCHEDULE_KINDS)}") from None
        if not self.delay_ds or any(d < 1 for d in self.delay_ds):
            raise ConfigError("delay.d", "delays must be positive integers")
        if canonical_kind(self.delay_kind) == "custom" and not self.delay_file:
            raise ConfigError("delay.file", "a custom schedule needs a delay file")
        if not 0.0 <= self.x0 <= 1.0:
            raise ConfigError("run.x0", "initial point must lie in [0, 1]")
        if self.run_csv not in ("all", "chosen", "none"):
            raise ConfigError("output.run_csv", "expected all, chosen or none")
        if self.stride < 1:
            raise ConfigError("output.stride", "must be >= 1")
        if self.parallel < 1:
            raise ConfigError("run.parallel", "must be >= 1")
        if self.L_factor <= 0:
            raise ConfigError("ledger.L_factor", "must be > 0")
        for name, value in (("ledger.alpha", self.alpha), ("ledger.beta", self.beta), ("ledger.L", self.L)):
            if value is not None and value <= 0 and name != "ledger.beta":
                raise ConfigError(name, "must be > 0")
        for algo, opts in self.overrides.items():
            if algo not in ALGORITHMS:
                raise ConfigError(f"algo.{algo}", "unknown algorithm")

    def q_values(self, algorithm: str) -> Tuple[Optional[float], ...]:
        if algorithm not in BANDIT:
            return (None,)
        return tuple(self.overrides.get(algorithm, {}).get("q_grid", self.q_grid))

    def to_dict(self) -> dict:
        out = asdict(self)
        out["bench"] = asdict(self.bench)
        return out


def _convert(key, kind, raw):
    try:
        if kind is int:
            return int(raw)
        if kind is float:
            return float(raw)
        if kind is str:
            return raw
        if kind == "bool":
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError(raw)
        if kind == "auto_float":
            return None if raw.lower() == "auto" else float(raw)
        items = [v.strip() for v in raw.split(",") if v.strip()]
        if kind == "intlist":
            return tuple(int(v) for v in items)
        if kind == "floatlist":
            return tuple(float(v) for v in items)
        if kind == "strlist":
            return tuple(items)
    except ValueError:
        raise ConfigError(key, f"cannot parse {raw!r}") from None
    raise AssertionError(kind)


def parse_config_text(text: str) -> Dict[str, str]:
    """Split into ``{key: raw value}``; duplicates and malformed lines raise."""
    out = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}", "expected 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in out:
            raise ConfigError(key, f"duplicate key on line {lineno}")
        out[key] = value
    return out


def config_from_mapping(mapping: Dict[str, str]) -> ExperimentConfig:
    bench = {}
    kwargs = {}
    overrides: Dict[str, Dict[str, object]] = {}
    for key, raw in mapping.items():
        if key.startswith("algo."):
            parts = key.split(".")
            if len(parts) != 3 or parts[2] not in OVERRIDE_KEYS:
                raise ConfigError(key, f"expected algo.<NAME>.<{'|'.join(OVERRIDE_KEYS)}>")
            _, algo, opt = parts
            if algo not in ALGORITHMS:
                raise ConfigError(key, f"unknown algorithm {algo!r}")
            kind = {"eta": float, "mu": float, "K": int, "q_grid": "floatlist"}[opt]
            overrides.setdefault(algo, {})[opt] = _convert(key, kind, raw)
            continue
        if key not in _SCALARS:
            raise ConfigError(key, "unknown key")
        value = _convert(key, _SCALARS[key], raw)
        section, name = key.split(".", 1)
        if section == "bench":
            bench[name] = value
        elif key == "delay.kind":
            kwargs["delay_kind"] = value
        elif key == "delay.d":
            kwargs["delay_ds"] = value
        elif key == "delay.file":
            kwargs["delay_file"] = value
        elif key == "output.dir":
            kwargs["out_dir"] = value
        else:
            kwargs[name] = value
    try:
        bench_cfg = BenchConfig(**bench)
    except ValueError as exc:
        raise ConfigError("bench", str(exc)) from None
    return ExperimentConfig(bench=bench_cfg, overrides=overrides, **kwargs)


def load_config(path) -> ExperimentConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError("--config", f"cannot read {path}: {exc}") from None
    return config_from_mapping(parse_config_text(text))


def with_updates(config: ExperimentConfig, **changes) -> ExperimentConfig:
    return replace(config, **changes)
