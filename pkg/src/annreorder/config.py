"""
TOML configuration: bench run files, per-command manifests and the
optional annreorder.toml read by the suite fixture.
"""
import enum
import os
from typing import Any, Dict, NamedTuple, Optional, Tuple

import toml

from annreorder.bench.dimension import D_GRID
from annreorder.bench.harness import L_GRID
from annreorder.construct import BUILDERS, BuildParams
from annreorder.exceptions import ConfigError
from annreorder.graph import Metric
from annreorder.reorder import ALGORITHMS, DEFAULT_WINDOW, STRATEGIES, ReorderSpec
from annreorder.search import EntryMode

MANIFEST_NAME = "manifest.toml"
FIXTURE_CONFIG = "annreorder.toml"


class DatasetConfig(NamedTuple):
    path: Optional[str] = None
    format: str = "auto"
    metric: str = "l2"
    n: Optional[int] = None
    d: Optional[int] = None


class SyntheticConfig(NamedTuple):
    n: int = 10000
    d: int = 16
    n_queries: int = 1000
    distribution: str = "uniform"
    normalize: bool = False


class ReorderParams(NamedTuple):
    window: int = DEFAULT_WINDOW
    hub_threshold: Optional[float] = None
    seed: int = 0


class EntryConfig(NamedTuple):
    mode: str = "random"
    count: int = 1
    seed: int = 0
    ids: Tuple[int, ...] = ()


class Seeds(NamedTuple):
    data: int = 1
    query: int = 2


class DimensionConfig(NamedTuple):
    d_grid: Tuple[int, ...] = D_GRID
    n: int = 10000
    n_queries: int = 1000
    builders: Tuple[str, ...] = ("nn-descent", "vamana")
    distribution: str = "uniform"


class RunConfig(NamedTuple):
    experiment: str = "sweep"
    index: Optional[str] = None
    index_format: str = "auto"
    index_label: Optional[str] = None
    dataset: DatasetConfig = DatasetConfig()
    dataset_label: Optional[str] = None
    queries: Optional[str] = None
    ground_truth: Optional[str] = None
    synthetic: SyntheticConfig = SyntheticConfig()
    builder: str = "nn-descent"
    build: BuildParams = BuildParams()
    reorder: Tuple[str, ...] = STRATEGIES
    reorder_params: ReorderParams = ReorderParams()
    L_grid: Tuple[int, ...] = L_GRID
    k: int = 10
    trials: int = 5
    workers: int = 1
    entry: EntryConfig = EntryConfig()
    seeds: Seeds = Seeds()
    output_dir: str = "bench-out"
    result_set: Optional[str] = None
    strict_recall: bool = True
    dimension_sweep: DimensionConfig = DimensionConfig()

    def reorder_specs(self):
        p = self.reorder_params
        return [ReorderSpec(a, p.window, p.hub_threshold, p.seed) for a in self.reorder]


# -----------------------------------------
# Reading


def read_toml(path) -> Dict[str, Any]:
    with open(path, "r") as f:
        try:
            return toml.load(f)
        except toml.TomlDecodeError as e:
            raise ConfigError(f"{path}: {e}")


def _coerce(section: str, name: str, default, value):
    where = f"{section}.{name}" if section else name
    if isinstance(default, tuple) or (default is None and isinstance(value, list)):
        if not isinstance(value, list):
            raise ConfigError(f"'{where}' must be a list")
        return tuple(value)
    if isinstance(default, bool):
        if not isinstance(value, bool):
            raise ConfigError(f"'{where}' must be true or false")
        return value
    if isinstance(default, int):
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"'{where}' must be an integer")
        return value
    if isinstance(default, float):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"'{where}' must be a number")
        return float(value)
    if isinstance(default, str):
        if not isinstance(value, str):
            raise ConfigError(f"'{where}' must be a string")
        return value
    return value


def _section(cls, table, section: str = ""):
    if isinstance(table, cls):
        return table
    if not isinstance(table, dict):
        raise ConfigError(f"'{section}' must be a table")

    unknown = set(table) - set(cls._fields)
    if unknown:
        raise ConfigError(f"unknown key(s) in {section or 'config'}: {', '.join(sorted(unknown))}")

    values = {}
    for name in cls._fields:
        if name not in table:
            continue
        default = cls._field_defaults.get(name)
        if isinstance(default, tuple) and hasattr(default, "_fields"):
            values[name] = _section(type(default), table[name], name)
        else:
            values[name] = _coerce(section, name, default, table[name])
    return cls(**values)


def validate(cfg: RunConfig):
    if cfg.experiment not in ("sweep", "dimension"):
        raise ConfigError(f"experiment must be 'sweep' or 'dimension', got '{cfg.experiment}'")

    for a in cfg.reorder:
        if a not in ALGORITHMS:
            raise ConfigError(f"unknown reorder algorithm '{a}'")
    if not cfg.reorder:
        raise ConfigError("'reorder' lists no algorithms")
    if cfg.reorder_params.window < 1:
        raise ConfigError("reorder_params.window must be >= 1")
    if cfg.reorder_params.hub_threshold is not None and cfg.reorder_params.hub_threshold < 0:
        raise ConfigError("reorder_params.hub_threshold must be >= 0")

    if not cfg.L_grid or min(cfg.L_grid) < 1:
        raise ConfigError("L_grid must hold positive values")
    if not 1 <= cfg.k <= min(cfg.L_grid):
        raise ConfigError(f"k={cfg.k} must be in [1, min(L_grid)]")
    if cfg.trials < 1:
        raise ConfigError("trials must be >= 1")
    if cfg.workers < 1:
        raise ConfigError("workers must be >= 1")

    if cfg.entry.mode not in [m.value for m in EntryMode]:
        raise ConfigError(f"entry.mode must be 'random' or 'fixed', got '{cfg.entry.mode}'")
    if cfg.entry.mode == "fixed" and not cfg.entry.ids:
        raise ConfigError("entry.mode = 'fixed' needs entry.ids")

    try:
        Metric.parse(cfg.dataset.metric)
    except ValueError as e:
        raise ConfigError(str(e))

    if cfg.index is None and cfg.builder not in BUILDERS:
        raise ConfigError(f"unknown builder '{cfg.builder}'")
    for b in cfg.dimension_sweep.builders:
        if b not in BUILDERS:
            raise ConfigError(f"unknown builder '{b}' in dimension_sweep")
    if cfg.experiment == "dimension" and len(cfg.dimension_sweep.d_grid) < 2:
        raise ConfigError("dimension_sweep.d_grid needs at least two values")

    if cfg.dataset.path is None:
        if cfg.seeds.data == cfg.seeds.query:
            raise ConfigError("seeds.data and seeds.query must differ")
        if cfg.index is not None:
            raise ConfigError("an index file needs the dataset it was built on")
    elif cfg.queries is None:
        raise ConfigError("dataset.path needs a queries file")


def config_from_dict(d: Dict[str, Any]) -> RunConfig:
    cfg = _section(RunConfig, d)
    validate(cfg)
    return cfg


def read_config(path) -> RunConfig:
    return config_from_dict(read_toml(path))


# -----------------------------------------
# Writing


def _plain(value):
    if isinstance(value, tuple) and hasattr(value, "_asdict"):
        return {k: _plain(v) for k, v in value._asdict().items() if v is not None}
    if isinstance(value, dict):
        return {k: _plain(v) for k, v in value.items() if v is not None}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, enum.Enum):
        return value.value
    return value


def to_dict(cfg: RunConfig) -> Dict[str, Any]:
    return _plain(cfg)


def write_manifest(out_dir, params: Dict[str, Any], name: str = MANIFEST_NAME) -> str:
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, name)
    with open(path, "w") as f:
        toml.dump(_plain(params), f)
    return path


def _table_flag(table: str, key: str) -> str:
    if table == "seeds":
        return f"{key}_seed"
    if table == "entry":
        return f"entry_{key}"
    if table == "dataset":
        return {"path": "dataset", "metric": "metric"}.get(key, f"dataset_{key}")
    return key


def flag_defaults(d: Dict[str, Any]) -> Dict[str, Any]:
    """
    Flattens a config or manifest into argparse dests.  Top-level keys win
    over keys lifted out of tables.
    """
    out: Dict[str, Any] = {}
    for table, v in d.items():
        if not isinstance(v, dict):
            continue
        for key, value in v.items():
            if not isinstance(value, dict):
                out[_table_flag(table, key).replace("-", "_")] = value

    for k, v in d.items():
        if not isinstance(v, dict):
            out[k.replace("-", "_")] = v
    return out


# -----------------------------------------
# Suite fixture config


class FixtureConfig(NamedTuple):
    workers: int = 1
    scratch_dir: Optional[str] = None
    seed: int = 0


def read_fixture_config(path=FIXTURE_CONFIG) -> FixtureConfig:
    if not os.path.exists(path):
        return FixtureConfig()
    cfg = _section(FixtureConfig, read_toml(path), "fixture")
    if cfg.workers < 1:
        raise ConfigError("workers must be >= 1")
    if cfg.scratch_dir is not None and not os.path.isdir(cfg.scratch_dir):
        raise ConfigError(f"scratch_dir '{cfg.scratch_dir}' is not a directory")
    return cfg
