"""Experiment configuration: dataclass sections mirroring the TOML file
layout. The config file is the source of truth; CLI flags override
individual keys on top of it.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

try:
    import tomllib
except ModuleNotFoundError:  # python < 3.11
    import tomli as tomllib

from .agent import TrainingConfig, VARIANTS
from .errors import ConfigError
from .p2c import DEFAULT_CANDIDATE_K
from .substrate import TopologyConfig
from .traffic import LoadModel, NsprTemplate

ALGORITHMS = ("random", "p2c", "drl", "edrl", "hadrl", "haedrl")


@dataclass
class TrafficConfig:
    lambda_base: float = 1.0
    amplitude: float = 0.0
    period: float = 1000.0
    phases: list = field(default_factory=list)  # [[start_time, multiplier], ...]
    vnf_count: int = 5
    cpu_min: int = 1
    cpu_max: int = 4
    ram_min: int = 1
    ram_max: int = 4
    bw_min: int = 1
    bw_max: int = 3
    mean_holding: float = 100.0

    def template(self) -> NsprTemplate:
        t = NsprTemplate(
            vnf_count=self.vnf_count,
            cpu_demand_range=(self.cpu_min, self.cpu_max),
            ram_demand_range=(self.ram_min, self.ram_max),
            bw_demand_range=(self.bw_min, self.bw_max),
            mean_holding=self.mean_holding,
        )
        t.validate()
        return t

    def load_model(self) -> LoadModel:
        m = LoadModel(
            lambda_base=self.lambda_base,
            amplitude=self.amplitude,
            period=self.period,
            phase_offsets=[(float(t), float(v)) for t, v in self.phases],
        )
        m.validate()
        return m


@dataclass
class AgentConfig:
    variant: str = "drl"
    learning_rate: float = 0.003
    gamma: float = 0.99
    entropy_weight: float = 0.01
    beta: float = 2.0
    beta_decay: float = 1.0
    updates_per_episode: int = 1
    hidden: list = field(default_factory=lambda: [128, 64])
    ha_loss_weight: float = 0.0
    w_lb: float = 0.5
    w_bw: float = 0.25
    bw_norm: float = 30.0

    def training(self) -> TrainingConfig:
        if self.learning_rate <= 0:
            raise ConfigError("learning_rate must be > 0")
        if not 0 <= self.gamma <= 1:
            raise ConfigError("gamma must be in [0, 1]")
        if self.beta < 0:
            raise ConfigError("beta must be >= 0")
        if not 0 < self.beta_decay <= 1:
            raise ConfigError("beta_decay must be in (0, 1]")
        return TrainingConfig(
            learning_rate=self.learning_rate,
            gamma=self.gamma,
            entropy_weight=self.entropy_weight,
            beta=self.beta,
            beta_decay=self.beta_decay,
            updates_per_episode=self.updates_per_episode,
            hidden_sizes=[int(h) for h in self.hidden],
            ha_loss_weight=self.ha_loss_weight,
            w_lb=self.w_lb,
            w_bw=self.w_bw,
            bw_norm=self.bw_norm,
        )


@dataclass
class P2cConfig:
    candidate_k: int = DEFAULT_CANDIDATE_K


@dataclass
class PlacementConfig:
    allow_colocation: bool = True


@dataclass
class MetricsConfig:
    window: int = 100
    sample_every: int = 1


@dataclass
class RunConfig:
    arrivals: int = 1000
    phases: list = field(default_factory=list)  # [[count, "train"|"eval"], ...]
    seed: int = 0
    algorithm: str = "p2c"
    debug_checks: bool = False


@dataclass
class SimConfig:
    topology: TopologyConfig = field(default_factory=TopologyConfig)
    traffic: TrafficConfig = field(default_factory=TrafficConfig)
    p2c: P2cConfig = field(default_factory=P2cConfig)
    agent: AgentConfig = field(default_factory=AgentConfig)
    placement: PlacementConfig = field(default_factory=PlacementConfig)
    metrics: MetricsConfig = field(default_factory=MetricsConfig)
    run: RunConfig = field(default_factory=RunConfig)

    def validate(self):
        if self.run.arrivals < 1:
            raise ConfigError("arrivals must be >= 1")
        if self.run.algorithm not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {self.run.algorithm!r}; choose from {ALGORITHMS}")
        if self.agent.variant not in VARIANTS:
            raise ConfigError(f"unknown agent variant {self.agent.variant!r}")
        for entry in self.run.phases:
            if len(entry) != 2 or int(entry[0]) < 1 or entry[1] not in ("train", "eval"):
                raise ConfigError(f"bad phase entry {entry!r}; expected [count, 'train'|'eval']")
        if self.metrics.window < 1 or self.metrics.sample_every < 1:
            raise ConfigError("metrics window and sample_every must be >= 1")
        self.traffic.template()
        self.traffic.load_model()
        self.agent.training()
        return self

    def shares_traffic_with(self, other: "SimConfig") -> bool:
        return (
            dataclasses.asdict(self.topology) == dataclasses.asdict(other.topology)
            and dataclasses.asdict(self.traffic) == dataclasses.asdict(other.traffic)
            and self.run.seed == other.run.seed
            and self.run.arrivals == other.run.arrivals
        )


_SECTIONS = {
    "topology": (TopologyConfig, "topology"),
    "traffic": (TrafficConfig, "traffic"),
    "p2c": (P2cConfig, "p2c"),
    "agent": (AgentConfig, "agent"),
    "placement": (PlacementConfig, "placement"),
    "metrics": (MetricsConfig, "metrics"),
    "run": (RunConfig, "run"),
}


def _fill_section(cls, table: dict, section: str):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(table) - names
    if unknown:
        raise ConfigError(f"unknown key(s) {sorted(unknown)} in [{section}]")
    return cls(**table)


def config_from_dict(data: dict) -> SimConfig:
    unknown = set(data) - set(_SECTIONS)
    if unknown:
        raise ConfigError(f"unknown config section(s) {sorted(unknown)}")
    kwargs = {}
    for name, (cls, attr) in _SECTIONS.items():
        if name in data:
            if not isinstance(data[name], dict):
                raise ConfigError(f"[{name}] must be a table")
            kwargs[attr] = _fill_section(cls, data[name], name)
    return SimConfig(**kwargs).validate()


def load_config(path) -> SimConfig:
    try:
        with open(path, "rb") as f:
            data = tomllib.load(f)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    return config_from_dict(data)
