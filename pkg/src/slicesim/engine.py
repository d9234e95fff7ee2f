"""Discrete-event simulation of online slice placement: Poisson arrivals,
policy decisions VNF by VNF, allocation, departures, and per-arrival
metrics. Train/eval phase control gates agent updates.

Two independently seeded rng streams keep the arrival sequence identical
across compared algorithms: the traffic stream drives request generation
only, the policy stream drives every placement-side random choice.
"""

from __future__ import annotations

import heapq
import random
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import placement, substrate, traffic
from .agent import (
    Trajectory,
    TrajectoryStep,
    VARIANTS,
    critic_value,
    episode_reward,
    featurize,
    ha_distribution,
    init_mlp,
    policy_forward,
    select_action,
    update,
)
from .config import SimConfig
from .errors import ConfigError
from .metrics import MetricsSeries
from .p2c import heuristic_scores, p2c_select
from .placement import PlacementDecision, candidate_nodes

TRAIN, EVAL = "train", "eval"
ARRIVAL, DEPARTURE = "arrival", "departure"


@dataclass
class Event:
    time: float
    seq: int  # insertion order; total tiebreaker at equal times
    kind: str  # ARRIVAL or DEPARTURE
    nspr: object = None
    slice_id: object = None


@dataclass
class PhaseSchedule:
    """Ordered (arrival_count, mode) blocks; arrivals beyond the last
    block keep its mode, and an empty schedule trains throughout."""

    blocks: list[tuple[int, str]] = field(default_factory=list)

    def mode_for(self, arrival_idx: int) -> str:
        upto = 0
        mode = TRAIN
        for count, block_mode in self.blocks:
            upto += count
            mode = block_mode
            if arrival_idx < upto:
                return block_mode
        return mode if self.blocks else TRAIN


@dataclass
class ArrivalRecord:
    time: float
    accepted: bool
    algorithm: str
    reward: float


@dataclass
class RunReport:
    algorithm: str
    seed: int
    arrivals: int
    records: list[ArrivalRecord]
    cumulative_acceptance: float
    mean_reward: float
    series: MetricsSeries
    wall_ms: float
    decision_ms: list[float]

    def latency_median_ms(self) -> float:
        return statistics.median(self.decision_ms) if self.decision_ms else 0.0

    def window_acceptance(self, first: int, last: int) -> float:
        """Mean accepted flag over arrival indices [first, last)."""
        flags = [r.accepted for r in self.records[first:last]]
        return sum(flags) / len(flags) if flags else 0.0


class RandomPolicy:
    """Uniform choice over the currently feasible servers."""

    def __init__(self, rng, allow_colocation=True):
        self.rng = rng
        self.allow_colocation = allow_colocation

    def begin_episode(self, load_estimate, mode):
        pass

    def choose(self, net, nspr, vnf_index, prev_host, mode):
        cpu, ram = nspr.vnfs[vnf_index]
        cands = candidate_nodes(net, cpu, ram)
        if not self.allow_colocation and prev_host is not None:
            cands = [s for s in cands if s != prev_host]
        return self.rng.choice(cands) if cands else None

    def end_episode(self, reward, mode):
        pass


class P2cPolicy:
    def __init__(self, rng, candidate_k, allow_colocation=True):
        self.rng = rng
        self.candidate_k = candidate_k
        self.allow_colocation = allow_colocation

    def begin_episode(self, load_estimate, mode):
        pass

    def choose(self, net, nspr, vnf_index, prev_host, mode):
        cpu, ram = nspr.vnfs[vnf_index]
        return p2c_select(net, cpu, ram, prev_host, self.rng,
                          candidate_k=self.candidate_k,
                          allow_colocation=self.allow_colocation)

    def end_episode(self, reward, mode):
        pass


class AgentPolicy:
    """Actor-critic policy; samples in train mode, argmax in eval mode.

    The heuristic one-hot is only computed when it can matter (HA variant
    with beta > 0 or an imitation loss), so an HA agent with beta = 0
    consumes exactly the same rng stream as the plain variant.
    """

    def __init__(self, variant, tconfig, net, seed, rng, candidate_k, allow_colocation=True):
        self.variant = variant
        self.tconfig = tconfig
        self.rng = rng
        self.candidate_k = candidate_k
        self.allow_colocation = allow_colocation
        self.n_servers = len(net.servers)
        state_dim = 3 * self.n_servers + (7 if variant.use_load_features else 5)
        init_rng = np.random.default_rng([seed, 2718])
        self.actor = init_mlp([state_dim] + tconfig.hidden_sizes + [self.n_servers], init_rng)
        self.critic = init_mlp([state_dim] + tconfig.hidden_sizes + [1], init_rng)
        self.beta = tconfig.beta
        self._traj = None
        self._load_estimate = 0.0
        self.updates_applied = 0

    def _beta_eff(self) -> float:
        return self.beta if self.variant.use_ha_control else 0.0

    def begin_episode(self, load_estimate, mode):
        self._load_estimate = load_estimate
        self._traj = Trajectory(beta=self._beta_eff()) if mode == TRAIN else None

    def choose(self, net, nspr, vnf_index, prev_host, mode):
        cpu, ram = nspr.vnfs[vnf_index]
        mask = np.fromiter(
            (s.cpu_available >= cpu and s.ram_available >= ram for s in net.servers),
            dtype=bool, count=self.n_servers)
        if not self.allow_colocation and prev_host is not None:
            mask[prev_host] = False
        if not mask.any():
            return None
        state = featurize(net, nspr, vnf_index, self._load_estimate,
                          self.variant, prev_host=prev_host)
        logits = policy_forward(self.actor, state, mask)
        want_h = self.variant.use_ha_control and (self.beta > 0 or self.tconfig.ha_loss_weight > 0)
        if want_h:
            H = heuristic_scores(net, nspr, vnf_index, prev_host, self.rng,
                                 candidate_k=self.candidate_k,
                                 allow_colocation=self.allow_colocation)
        else:
            H = np.zeros(self.n_servers)
        dist = ha_distribution(logits, H, self._beta_eff())
        if mode == TRAIN:
            action = select_action(dist, self.rng)
            self._traj.steps.append(TrajectoryStep(
                state=state, action=action, log_prob=float(np.log(dist[action])),
                heuristic=H, value=critic_value(self.critic, state), mask=mask))
        else:
            action = int(np.argmax(dist))
        return action

    def end_episode(self, reward, mode):
        if mode != TRAIN:
            return
        if self._traj is not None and self._traj.steps:
            self._traj.terminal_reward = reward
            update(self.actor, self.critic, self._traj, self.tconfig)
            self.updates_applied += 1
        self.beta *= self.tconfig.beta_decay
        self._traj = None


def make_policy(config: SimConfig, net, policy_rng):
    algo = config.run.algorithm
    allow_colo = config.placement.allow_colocation
    if algo == "random":
        return RandomPolicy(policy_rng, allow_colo)
    if algo == "p2c":
        return P2cPolicy(policy_rng, config.p2c.candidate_k, allow_colo)
    variant = VARIANTS[algo]
    return AgentPolicy(variant, config.agent.training(), net, config.run.seed,
                       policy_rng, config.p2c.candidate_k, allow_colo)


def _decide(net, nspr, policy, mode, allow_colocation):
    """Run the per-VNF policy loop and assemble the full decision.

    Each chosen host is debited while the rest of the chain is decided,
    so the policy sees intra-slice resource claims; the debits are rolled
    back before assembly re-validates and routes atomically.
    """
    hosts = []
    debits = []
    try:
        for i, (cpu, ram) in enumerate(nspr.vnfs):
            prev = hosts[-1] if hosts else None
            host = policy.choose(net, nspr, i, prev, mode)
            if host is None:
                return None
            hosts.append(host)
            srv = net.server(host)
            srv.cpu_available -= cpu
            srv.ram_available -= ram
            debits.append((srv, cpu, ram))
    finally:
        for srv, cpu, ram in debits:
            srv.cpu_available += cpu
            srv.ram_available += ram
    result = placement.assemble_decision(net, nspr, hosts, allow_colocation)
    return result if isinstance(result, PlacementDecision) else None


def run(config: SimConfig) -> RunReport:
    config.validate()
    started = time.perf_counter()
    net = substrate.build_topology(config.topology)
    template = config.traffic.template()
    model = config.traffic.load_model()
    seed = config.run.seed
    traffic_rng = random.Random(f"traffic:{seed}")
    policy_rng = random.Random(f"policy:{seed}")
    policy = make_policy(config, net, policy_rng)
    tconfig = config.agent.training()  # reward weights apply to every algorithm
    schedule = PhaseSchedule([(int(n), m) for n, m in config.run.phases])
    series = MetricsSeries(window=config.metrics.window)

    total = config.run.arrivals
    heap = []
    seq = 0

    def push(event: Event):
        heapq.heappush(heap, (event.time, event.seq, event))

    t0 = traffic.next_arrival(model, 0.0, traffic_rng)
    push(Event(t0, seq, ARRIVAL, nspr=traffic.sample_nspr(template, model, 0, t0, traffic_rng)))
    seq += 1

    records = []
    decision_ms = []
    accepted_count = 0
    arrivals_done = 0
    while arrivals_done < total:
        _, _, ev = heapq.heappop(heap)
        if ev.kind == DEPARTURE:
            substrate.release(net, ev.slice_id)
            continue
        nspr = ev.nspr
        if arrivals_done + 1 < total:
            t_next = traffic.next_arrival(model, ev.time, traffic_rng)
            push(Event(t_next, seq, ARRIVAL,
                       nspr=traffic.sample_nspr(template, model, arrivals_done + 1,
                                                t_next, traffic_rng)))
            seq += 1
        mode = schedule.mode_for(arrivals_done)
        load_estimate = traffic.offered_load(model, template, net, ev.time)

        t_dec = time.perf_counter()
        policy.begin_episode(load_estimate, mode)
        decision = _decide(net, nspr, policy, mode, config.placement.allow_colocation)
        decision_ms.append((time.perf_counter() - t_dec) * 1000.0)

        if decision is not None:
            cost = placement.decision_cost(net, decision)
            substrate.allocate(net, nspr.slice_id, decision)
            nspr.status = traffic.PLACED
            push(Event(ev.time + nspr.holding_time, seq, DEPARTURE, slice_id=nspr.slice_id))
            seq += 1
            accepted_count += 1
            reward = episode_reward(True, cost, tconfig)
        else:
            nspr.status = traffic.REJECTED
            reward = episode_reward(False, None, tconfig)
        policy.end_episode(reward, mode)

        records.append(ArrivalRecord(ev.time, decision is not None,
                                     config.run.algorithm, reward))
        series.record_arrival(ev.time, decision is not None)
        if arrivals_done % config.metrics.sample_every == 0:
            util = substrate.utilization(net)
            series.record_load(ev.time, load_estimate, util.cpu, util.ram, util.bw)
        arrivals_done += 1
        if config.run.debug_checks and not substrate.conservation_ok(net):
            raise AssertionError(f"conservation violated after arrival {arrivals_done}")

    wall_ms = (time.perf_counter() - started) * 1000.0
    return RunReport(
        algorithm=config.run.algorithm,
        seed=seed,
        arrivals=total,
        records=records,
        cumulative_acceptance=accepted_count / total,
        mean_reward=sum(r.reward for r in records) / total,
        series=series,
        wall_ms=wall_ms,
        decision_ms=decision_ms,
    )


@dataclass
class ComparisonReport:
    runs: list[tuple[str, RunReport]]

    def summary_rows(self) -> list[dict]:
        return [
            {
                "algo": label,
                "seed": report.seed,
                "arrivals": report.arrivals,
                "cumulative_acceptance": report.cumulative_acceptance,
                "mean_reward": report.mean_reward,
                "wall_ms": report.wall_ms,
            }
            for label, report in self.runs
        ]


def compare(configs: list[SimConfig], jobs: int = 1) -> ComparisonReport:
    """Run each config against the identically regenerated arrival
    sequence (shared traffic stream; policy streams stay separate)."""
    if not configs:
        raise ConfigError("compare needs at least one config")
    base = configs[0]
    for other in configs[1:]:
        if not base.shares_traffic_with(other):
            raise ConfigError(
                "compare requires identical topology, traffic, seed, and arrivals")
    if jobs > 1 and len(configs) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            reports = list(pool.map(run, configs))
    else:
        reports = [run(c) for c in configs]
    return ComparisonReport(list(zip([c.run.algorithm for c in configs], reports)))
