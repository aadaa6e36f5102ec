"""Experiment configuration (TOML).

Example::

    seed = 20240601
    runs = 5
    levels = [0.05, 0.1, 0.5]
    output_dir = "results"
    shd_target = "cpdag"

    [[datasets]]
    synth = "synth10"

    [[datasets]]
    name = "mydata"
    path = "data/mydata.csv"      # with data/mydata.json dims sidecar
    truth = "data/mydata_graph.json"

    [[datasets]]
    name = "cep"
    pairs = "data/cep"            # pairmeta.txt + pairNNNN.txt

    [[mechanisms]]
    kind = "geo_cwise"
    norm = "euclidean"

    [[algorithms]]
    name = "pc"
    test = "fisher_z"
    alpha = 0.05
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib

from ..discovery.citests import CiTestConfig
from ..discovery.pairwise import PAIRWISE
from ..mechanisms import BoundingMode, CwiseSplit, MechanismKind, NormKind
from ..synthgen import BENCHMARKS
from ..tuning import DEFAULT_LEVELS


class ConfigError(ValueError):
    pass


STRUCTURE_ALGOS = ("pc", "bic")
PAIRWISE_ALGOS = tuple(PAIRWISE)


@dataclass(frozen=True)
class DatasetConfig:
    name: str
    synth: Optional[str] = None
    path: Optional[str] = None
    truth: Optional[str] = None
    pairs: Optional[str] = None
    # synthetic cubic pairs: number of pairs and rows per pair
    cubic_pairs: Optional[tuple] = None

    @property
    def is_pairs(self) -> bool:
        return self.pairs is not None or self.cubic_pairs is not None


@dataclass(frozen=True)
class MechanismConfig:
    kind: MechanismKind
    norm: NormKind = NormKind.EUCLIDEAN
    mode: BoundingMode = BoundingMode.RESAMPLE
    cwise_split: CwiseSplit = CwiseSplit.JOINT

    def label(self) -> str:
        parts = [self.kind.value]
        if self.kind.is_geo:
            parts.append(self.norm.value)
            if self.mode is not BoundingMode.RESAMPLE:
                parts.append(self.mode.value)
        if self.kind.is_cwise and self.cwise_split is not CwiseSplit.JOINT:
            parts.append(self.cwise_split.value)
        return "-".join(parts)


@dataclass(frozen=True)
class AlgorithmConfig:
    name: str
    test: str = "fisher_z"
    alpha: float = 0.05
    penalty_discount: float = 1.0
    max_cond: Optional[int] = None
    max_parents: Optional[int] = None

    @property
    def is_pairwise(self) -> bool:
        return self.name in PAIRWISE_ALGOS

    def label(self) -> str:
        if self.name == "pc":
            return f"pc[{self.test},alpha={self.alpha!r}]"
        if self.name == "bic":
            return f"bic[penalty={self.penalty_discount!r}]"
        return self.name


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int = 0
    datasets: tuple = ()
    levels: tuple = DEFAULT_LEVELS
    mechanisms: tuple = ()
    algorithms: tuple = ()
    runs: int = 5
    output_dir: str = "results"
    shd_target: str = "cpdag"
    workers: int = 1
    base_dir: str = "."

    def __post_init__(self):
        if not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be a 64-bit unsigned integer")
        if self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if self.workers < 1:
            raise ConfigError("workers must be >= 1")
        if not self.levels:
            raise ConfigError("need at least one privacy level")
        for lv in self.levels:
            if not (0 < lv <= 1) or math.isnan(lv):
                raise ConfigError(f"privacy level {lv} outside (0, 1]")
        if self.shd_target not in ("dag", "cpdag"):
            raise ConfigError("shd_target must be 'dag' or 'cpdag'")
        if not self.datasets or not self.mechanisms or not self.algorithms:
            raise ConfigError("need at least one dataset, mechanism and algorithm")
        names = [d.name for d in self.datasets]
        if len(set(names)) != len(names):
            raise ConfigError("dataset names must be unique")
        for d in self.datasets:
            self._check_dataset(d)

    def resolve(self, p: str) -> Path:
        path = Path(p)
        return path if path.is_absolute() else Path(self.base_dir) / path

    def _check_dataset(self, d: DatasetConfig):
        sources = [d.synth, d.path, d.pairs, d.cubic_pairs]
        if sum(s is not None for s in sources) != 1:
            raise ConfigError(f"dataset {d.name!r}: give exactly one of synth, path, pairs, cubic_pairs")
        if d.synth is not None and d.synth not in BENCHMARKS:
            raise ConfigError(f"dataset {d.name!r}: unknown benchmark {d.synth!r}")
        if d.path is not None:
            if d.truth is None:
                raise ConfigError(f"dataset {d.name!r}: a CSV dataset needs a truth graph")
            for p in (d.path, d.truth):
                if not self.resolve(p).exists():
                    raise ConfigError(f"dataset {d.name!r}: {p} not found")
        if d.pairs is not None and not (self.resolve(d.pairs) / "pairmeta.txt").exists():
            raise ConfigError(f"dataset {d.name!r}: no pairmeta.txt in {d.pairs}")
        if d.cubic_pairs is not None:
            n_pairs, n = d.cubic_pairs
            if n_pairs < 1 or n < 50:
                raise ConfigError(f"dataset {d.name!r}: cubic_pairs needs >= 1 pair of >= 50 rows")
        wanted = [a for a in self.algorithms if a.is_pairwise == d.is_pairs]
        if not wanted:
            raise ConfigError(f"dataset {d.name!r}: no applicable algorithm")


def _dataset(raw: dict) -> DatasetConfig:
    raw = dict(raw)
    cubic = raw.pop("cubic_pairs", None)
    if cubic is not None:
        cubic = (int(cubic.get("n_pairs", 50)), int(cubic.get("n", 500)))
    name = raw.pop("name", None) or raw.get("synth") or "cubic"
    unknown = set(raw) - {"synth", "path", "truth", "pairs"}
    if unknown:
        raise ConfigError(f"unknown dataset keys {sorted(unknown)}")
    return DatasetConfig(name=name, cubic_pairs=cubic, **raw)


def _mechanism(raw: dict) -> MechanismConfig:
    unknown = set(raw) - {"kind", "norm", "mode", "cwise_split"}
    if unknown:
        raise ConfigError(f"unknown mechanism keys {sorted(unknown)}")
    m = MechanismConfig(**raw)
    for f, enum in (("kind", MechanismKind), ("norm", NormKind), ("mode", BoundingMode), ("cwise_split", CwiseSplit)):
        object.__setattr__(m, f, enum(getattr(m, f)))
    if not m.kind.is_geo and (m.norm is not NormKind.EUCLIDEAN or m.mode is not BoundingMode.RESAMPLE):
        raise ConfigError(f"{m.kind.value}: norm and mode only apply to geometric mechanisms")
    return m


def _algorithm(raw: dict) -> AlgorithmConfig:
    unknown = set(raw) - {"name", "test", "alpha", "penalty_discount", "max_cond", "max_parents"}
    if unknown:
        raise ConfigError(f"unknown algorithm keys {sorted(unknown)}")
    a = AlgorithmConfig(**raw)
    if a.name not in STRUCTURE_ALGOS + PAIRWISE_ALGOS:
        raise ConfigError(f"unknown algorithm {a.name!r}")
    if a.name == "pc":
        cfg = CiTestConfig(a.test, a.alpha)  # validates test name and alpha
        object.__setattr__(a, "test", cfg.test)
    if a.penalty_discount <= 0:
        raise ConfigError("penalty_discount must be positive")
    return a


def config_from_dict(raw: dict, base_dir=".") -> ExperimentConfig:
    raw = dict(raw)
    try:
        datasets = tuple(_dataset(d) for d in raw.pop("datasets", ()))
        mechanisms = tuple(_mechanism(m) for m in raw.pop("mechanisms", ()))
        algorithms = tuple(_algorithm(a) for a in raw.pop("algorithms", ()))
        levels = tuple(float(x) for x in raw.pop("levels", DEFAULT_LEVELS))
        unknown = set(raw) - {"seed", "runs", "output_dir", "shd_target", "workers"}
        if unknown:
            raise ConfigError(f"unknown top-level keys {sorted(unknown)}")
        return ExperimentConfig(
            datasets=datasets,
            mechanisms=mechanisms,
            algorithms=algorithms,
            levels=levels,
            base_dir=str(base_dir),
            **raw,
        )
    except ConfigError:
        raise
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        raw = tomllib.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from None
    return config_from_dict(raw, base_dir=path.parent)


DEFAULT_CONFIG = {
    "seed": 20240601,
    "runs": 5,
    "levels": list(DEFAULT_LEVELS),
    "output_dir": "results",
    "shd_target": "cpdag",
    "datasets": [{"synth": "synth10"}, {"synth": "synth5"}],
    "mechanisms": [
        {"kind": "krr_cwise"},
        {"kind": "krr_comb"},
        {"kind": "geo_cwise"},
        {"kind": "geo_comb"},
    ],
    "algorithms": [
        {"name": "pc", "test": "fisher_z", "alpha": 0.05},
        {"name": "bic", "penalty_discount": 1.0},
    ],
}


def default_config(**overrides) -> ExperimentConfig:
    raw = dict(DEFAULT_CONFIG)
    raw.update(overrides)
    return config_from_dict(raw)
