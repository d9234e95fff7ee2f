"""Volatile NSPR arrivals: a non-homogeneous Poisson process (sinusoidal
base modulation plus step multipliers) with exponential holding times.

All sampling goes through an explicit random.Random instance, so a fixed
seed reproduces the full arrival sequence bit-for-bit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

from .errors import ConfigError

PENDING, PLACED, REJECTED, DEPARTED = "Pending", "Placed", "Rejected", "Departed"


@dataclass
class NsprTemplate:
    vnf_count: int = 5
    cpu_demand_range: tuple[int, int] = (1, 4)
    ram_demand_range: tuple[int, int] = (1, 4)
    bw_demand_range: tuple[int, int] = (1, 3)
    mean_holding: float = 100.0

    def validate(self):
        if self.vnf_count < 1:
            raise ConfigError("vnf_count must be >= 1")
        for name in ("cpu_demand_range", "ram_demand_range", "bw_demand_range"):
            lo, hi = getattr(self, name)
            if not (1 <= lo <= hi):
                raise ConfigError(f"{name} must satisfy 1 <= lo <= hi")
        if self.mean_holding <= 0:
            raise ConfigError("mean_holding must be > 0")

    def mean_total_cpu(self) -> float:
        """Analytic E[total cpu demand per slice]: vnf_count times the
        uniform-range midpoint."""
        lo, hi = self.cpu_demand_range
        return self.vnf_count * (lo + hi) / 2


@dataclass
class Nspr:
    slice_id: int
    vnfs: list[tuple[int, int]]  # (cpu_demand, ram_demand) per VNF
    vlinks: list[int]  # bw demand per virtual link, length vnf_count - 1
    arrival_time: float
    holding_time: float
    status: str = PENDING

    @property
    def vnf_count(self) -> int:
        return len(self.vnfs)


@dataclass
class LoadModel:
    """lambda(t) = lambda_base * (1 + amplitude*sin(2*pi*t/period)) * multiplier(t).

    phase_offsets are (start_time, multiplier) steps; the multiplier is 1
    before the first step and holds its latest value afterwards. A zero
    multiplier silences arrivals for that phase.
    """

    lambda_base: float = 1.0
    amplitude: float = 0.0
    period: float = 1000.0
    phase_offsets: list[tuple[float, float]] = field(default_factory=list)

    def validate(self):
        if self.lambda_base <= 0:
            raise ConfigError("lambda_base must be > 0")
        if not 0 <= self.amplitude < 1:
            raise ConfigError("amplitude must be in [0, 1)")
        if self.period <= 0:
            raise ConfigError("period must be > 0")
        starts = [t for t, _ in self.phase_offsets]
        if starts != sorted(starts):
            raise ConfigError("phase_offsets must be sorted by start time")
        if any(m < 0 for _, m in self.phase_offsets):
            raise ConfigError("phase multipliers must be >= 0")
        if self.lambda_max() <= 0:
            raise ConfigError("peak arrival rate must be > 0")

    def multiplier(self, t: float) -> float:
        m = 1.0
        for start, value in self.phase_offsets:
            if t >= start:
                m = value
            else:
                break
        return m

    def rate(self, t: float) -> float:
        return (
            self.lambda_base
            * (1.0 + self.amplitude * math.sin(2.0 * math.pi * t / self.period))
            * self.multiplier(t)
        )

    def lambda_max(self) -> float:
        peak_mult = max([1.0] + [m for _, m in self.phase_offsets])
        return self.lambda_base * (1.0 + self.amplitude) * peak_mult


def next_arrival(model: LoadModel, t_now: float, rng) -> float:
    """Next arrival instant after t_now, sampled by thinning against
    lambda_max.

    When the rate at the proposed time already equals the bound (e.g.
    amplitude 0 with unit multiplier) no acceptance uniform is drawn, so
    the rng stream matches plain exponential sampling exactly.
    """
    lam_max = model.lambda_max()
    t = t_now
    while True:
        t += rng.expovariate(lam_max)
        lam = model.rate(t)
        if lam >= lam_max or rng.random() * lam_max < lam:
            return t


def sample_nspr(template: NsprTemplate, model: LoadModel, slice_id, t_arrival, rng) -> Nspr:
    """Draw one request: per VNF cpu then ram, then per-vlink bandwidth,
    then the exponential holding time (draw order is part of the
    reproducibility contract)."""
    vnfs = []
    for _ in range(template.vnf_count):
        cpu = rng.randint(*template.cpu_demand_range)
        ram = rng.randint(*template.ram_demand_range)
        vnfs.append((cpu, ram))
    vlinks = [rng.randint(*template.bw_demand_range) for _ in range(template.vnf_count - 1)]
    holding = rng.expovariate(1.0 / template.mean_holding)
    while holding <= 0.0:  # expovariate can return exactly 0.0
        holding = rng.expovariate(1.0 / template.mean_holding)
    return Nspr(slice_id, vnfs, vlinks, t_arrival, holding)


def offered_load(model: LoadModel, template: NsprTemplate, net, t: float) -> float:
    """Instantaneous offered CPU load:
    rate(t) * mean_holding * E[total cpu per slice] / total cpu capacity."""
    if net.total_cpu_capacity == 0:
        return 0.0
    return model.rate(t) * template.mean_holding * template.mean_total_cpu() / net.total_cpu_capacity
