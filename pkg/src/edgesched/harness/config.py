"""Sectioned key/value experiment configuration (INI syntax).

Recognised sections and keys::

    [general]   seed, objective (total|makespan), corpus_size, jobs
    [scenario]  node_count, request_count, bandwidth_mhz, capacity_mhz,
                demand_min, demand_max, distance_min, distance_max,
                size_min, size_max, freq_ghz, tx_power_dbm, noise_mw_per_mhz
    [ga]        population_size, flip_prob, balance_below, rotate_above, penalty
    [evo]       archive_size, flip_prob, penalty
    [train]     dataset_size, epochs, learning_rate, batch_size,
                validation_fraction, seed, hidden, share_weight, optimizer,
                clip_norm, label_budget, corpus_size, corpus_seed
    [settings]  <name> = <solver> [budget] [seed=scenario|<int>] [model=<path>]

Unknown sections or keys are rejected so typos fail loudly. Relative model
paths resolve against the config file's directory.
"""

from __future__ import annotations

import configparser
from dataclasses import dataclass, field, fields
from pathlib import Path

from edgesched.channel import WirelessParams
from edgesched.errors import ConfigurationError
from edgesched.evo import EvoParams
from edgesched.ga import GaParams
from edgesched.problem import check_objective_kind
from edgesched.scengen import GenConfig
from edgesched.surrogate.training import TrainConfig

SOLVERS = ("ga", "evo", "surrogate", "exact")


@dataclass(frozen=True)
class BenchSetting:
    name: str
    solver: str
    budget: int = 0
    seed_policy: str = "scenario"  # "scenario" or a fixed integer seed
    model_path: str | None = None

    def __post_init__(self):
        if self.solver not in SOLVERS:
            raise ConfigurationError(f"setting {self.name}: unknown solver {self.solver!r}")
        if self.solver in ("ga", "evo") and self.budget < 1:
            raise ConfigurationError(f"setting {self.name}: {self.solver} needs a positive budget")
        if self.solver == "surrogate" and not self.model_path:
            raise ConfigurationError(f"setting {self.name}: surrogate needs model=<path>")
        if self.seed_policy != "scenario":
            try:
                int(self.seed_policy)
            except ValueError:
                raise ConfigurationError(f"setting {self.name}: bad seed policy {self.seed_policy!r}") from None

    def solver_seed(self, scenario_seed: int) -> int:
        return scenario_seed if self.seed_policy == "scenario" else int(self.seed_policy)


DEFAULT_SETTINGS = (
    BenchSetting("ga-5000", "ga", 5000),
    BenchSetting("ga-50000", "ga", 50000),
    BenchSetting("evo-5000", "evo", 5000),
    BenchSetting("evo-50000", "evo", 50000),
)


@dataclass
class ExperimentConfig:
    seed: int = 0
    objective: str = "total"
    corpus_size: int = 100
    jobs: int = 1
    scenario: GenConfig = field(default_factory=GenConfig)
    ga: GaParams = field(default_factory=GaParams)
    evo: EvoParams = field(default_factory=EvoParams)
    train: TrainConfig = field(default_factory=TrainConfig)
    label_budget: int = 50000
    train_corpus_size: int = 1000
    train_corpus_seed: int = 1_000_000
    settings: tuple[BenchSetting, ...] = DEFAULT_SETTINGS


def parse_setting(name: str, spec: str, base_dir: Path | None = None) -> BenchSetting:
    tokens = spec.split()
    if not tokens:
        raise ConfigurationError(f"setting {name}: empty specification")
    solver, budget, seed_policy, model = tokens[0], 0, "scenario", None
    for tok in tokens[1:]:
        if tok.startswith("seed="):
            seed_policy = tok[5:]
        elif tok.startswith("model="):
            model = tok[6:]
            if base_dir is not None and not Path(model).is_absolute():
                model = str(base_dir / model)
        else:
            try:
                budget = int(tok)
            except ValueError:
                raise ConfigurationError(f"setting {name}: cannot parse {tok!r}") from None
    return BenchSetting(name, solver, budget, seed_policy, model)


def _typed(section, key: str, kind):
    try:
        if kind is bool:
            return section.getboolean(key)
        return kind(section[key])
    except ValueError as exc:
        raise ConfigurationError(f"[{section.name}] {key}: {exc}") from None


def _overrides(section, allowed: dict[str, type]) -> dict:
    unknown = set(section) - set(allowed)
    if unknown:
        raise ConfigurationError(f"[{section.name}] unknown keys: {sorted(unknown)}")
    return {k: _typed(section, k, t) for k, t in allowed.items() if k in section}


def _field_types(cls, skip=()) -> dict[str, type]:
    mapping = {"int": int, "float": float, "str": str, "bool": bool}
    return {f.name: mapping[f.type] for f in fields(cls) if f.name not in skip and f.type in mapping}


def load_config(path: str | Path | None) -> ExperimentConfig:
    """Read an experiment config; ``None`` gives the built-in defaults."""
    cfg = ExperimentConfig()
    if path is None:
        return cfg
    path = Path(path)
    parser = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    parser.optionxform = str
    try:
        with open(path) as fh:
            parser.read_file(fh)
    except OSError as exc:
        raise ConfigurationError(f"cannot read config {path}: {exc}") from exc
    except configparser.Error as exc:
        raise ConfigurationError(f"malformed config {path}: {exc}") from exc
    known = {"general", "scenario", "ga", "evo", "train", "settings"}
    extra = set(parser.sections()) - known
    if extra:
        raise ConfigurationError(f"unknown config sections: {sorted(extra)}")

    if parser.has_section("general"):
        g = _overrides(parser["general"],
                       {"seed": int, "objective": str, "corpus_size": int, "jobs": int})
        cfg.seed = g.get("seed", cfg.seed)
        cfg.objective = check_objective_kind(g.get("objective", cfg.objective))
        cfg.corpus_size = g.get("corpus_size", cfg.corpus_size)
        cfg.jobs = g.get("jobs", cfg.jobs)

    if parser.has_section("scenario"):
        s = _overrides(parser["scenario"], {
            "node_count": int, "request_count": int, "bandwidth_mhz": int, "capacity_mhz": float,
            "demand_min": float, "demand_max": float, "distance_min": float, "distance_max": float,
            "size_min": float, "size_max": float, "freq_ghz": float, "tx_power_dbm": float,
            "noise_mw_per_mhz": float,
        })
        base = cfg.scenario
        wireless = WirelessParams(
            s.get("freq_ghz", base.wireless.carrier_freq),
            s.get("tx_power_dbm", base.wireless.tx_power),
            s.get("noise_mw_per_mhz", base.wireless.noise_density),
        )
        cfg.scenario = GenConfig(
            node_count=s.get("node_count", base.node_count),
            request_count=s.get("request_count", base.request_count),
            bandwidth_mhz=s.get("bandwidth_mhz", base.bandwidth_mhz),
            capacity_mhz=s.get("capacity_mhz", base.capacity_mhz),
            demand_range=(s.get("demand_min", base.demand_range[0]), s.get("demand_max", base.demand_range[1])),
            distance_range=(s.get("distance_min", base.distance_range[0]), s.get("distance_max", base.distance_range[1])),
            size_range=(s.get("size_min", base.size_range[0]), s.get("size_max", base.size_range[1])),
            wireless=wireless,
        )

    if parser.has_section("ga"):
        cfg.ga = GaParams(**_overrides(parser["ga"], _field_types(GaParams, skip=("seed", "generation_budget"))))
    if parser.has_section("evo"):
        cfg.evo = EvoParams(**_overrides(parser["evo"], _field_types(EvoParams)))
    if parser.has_section("train"):
        allowed = _field_types(TrainConfig)
        allowed.update({"label_budget": int, "corpus_size": int, "corpus_seed": int})
        t = _overrides(parser["train"], allowed)
        cfg.label_budget = t.pop("label_budget", cfg.label_budget)
        cfg.train_corpus_size = t.pop("corpus_size", cfg.train_corpus_size)
        cfg.train_corpus_seed = t.pop("corpus_seed", cfg.train_corpus_seed)
        cfg.train = TrainConfig(**t)
    if parser.has_section("settings"):
        items = list(parser["settings"].items())
        if not items:
            raise ConfigurationError("[settings] is empty")
        cfg.settings = tuple(parse_setting(n, spec, path.parent) for n, spec in items)
        names = [s.name for s in cfg.settings]
        if len(set(names)) != len(names):
            raise ConfigurationError("setting names must be unique")
    return cfg
