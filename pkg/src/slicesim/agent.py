"""Actor-critic placement agents: state featurization, small MLPs with
exact analytic backpropagation, heuristic-assisted action distributions,
and online advantage actor-critic updates.

Four variants come from two flags: load features in the state (eDRL) and
heuristic convergence control via an additive logit bias beta*H before
the softmax (HA). With beta = 0 the HA machinery degenerates exactly to
the plain variant.

Action index == server id, so these functions assume contiguous server
ids 0..n-1 (which build_topology guarantees).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, NoFeasibleAction, NonFiniteGradient


@dataclass(frozen=True)
class AgentVariant:
    use_load_features: bool = False
    use_ha_control: bool = False


VARIANTS = {
    "drl": AgentVariant(False, False),
    "edrl": AgentVariant(True, False),
    "hadrl": AgentVariant(False, True),
    "haedrl": AgentVariant(True, True),
}


@dataclass
class TrainingConfig:
    learning_rate: float = 0.003
    gamma: float = 0.99
    entropy_weight: float = 0.01
    beta: float = 2.0  # HA bias strength; 0 disables heuristic control
    beta_decay: float = 1.0  # multiplicative per-episode decay in (0, 1]
    updates_per_episode: int = 1
    hidden_sizes: list[int] = field(default_factory=lambda: [128, 64])
    ha_loss_weight: float = 0.0  # optional cross-entropy-to-heuristic term
    w_lb: float = 0.5  # load-balancing reward weight
    w_bw: float = 0.25  # bandwidth-consumption penalty weight
    bw_norm: float = 30.0  # normalizer for the bandwidth term


@dataclass
class MlpParams:
    """Layer list; tanh hidden activations, raw output."""

    weights: list[np.ndarray]  # each (out_dim, in_dim)
    biases: list[np.ndarray]  # each (out_dim,)

    @property
    def sizes(self) -> list[int]:
        return [self.weights[0].shape[1]] + [w.shape[0] for w in self.weights]

    def copy(self) -> "MlpParams":
        return MlpParams([w.copy() for w in self.weights], [b.copy() for b in self.biases])


@dataclass
class TrajectoryStep:
    state: np.ndarray
    action: int
    log_prob: float
    heuristic: np.ndarray  # one-hot or zero vector H
    value: float
    mask: np.ndarray  # feasibility mask active when the action was taken


@dataclass
class Trajectory:
    steps: list[TrajectoryStep] = field(default_factory=list)
    terminal_reward: float = 0.0
    beta: float = 0.0  # HA bias in force when the episode was collected


@dataclass
class UpdateReport:
    actor_loss: float
    critic_loss: float
    mean_entropy: float


def init_mlp(sizes: list[int], rng: np.random.Generator) -> MlpParams:
    """Gaussian init scaled by 1/sqrt(fan_in), zero biases."""
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        weights.append(rng.normal(0.0, 1.0 / math.sqrt(fan_in), (fan_out, fan_in)))
        biases.append(np.zeros(fan_out))
    return MlpParams(weights, biases)


def _forward(params: MlpParams, x: np.ndarray) -> list[np.ndarray]:
    """All layer activations [input, tanh(h1), ..., raw output]."""
    if x.shape != (params.weights[0].shape[1],):
        raise DimensionMismatch(
            f"state length {x.shape} does not match input layer "
            f"({params.weights[0].shape[1]},)"
        )
    acts = [x]
    last = len(params.weights) - 1
    for i, (w, b) in enumerate(zip(params.weights, params.biases)):
        z = w @ acts[-1] + b
        acts.append(z if i == last else np.tanh(z))
    return acts


def _backward(params, acts, dout):
    """Exact gradients of a loss with d(loss)/d(output) == dout."""
    dws = [None] * len(params.weights)
    dbs = [None] * len(params.biases)
    delta = dout
    for layer in range(len(params.weights) - 1, -1, -1):
        dws[layer] = np.outer(delta, acts[layer])
        dbs[layer] = delta.copy()
        if layer > 0:
            delta = (params.weights[layer].T @ delta) * (1.0 - acts[layer] ** 2)
    return dws, dbs


def featurize(net, nspr, vnf_index: int, load_estimate: float, variant: AgentVariant,
              prev_host: int | None = None) -> np.ndarray:
    """Fixed-length state: a 3-entry availability block per server, a
    5-entry request block, and (eDRL variants) 2 load features.
    Every entry lands in [-1, 1]."""
    servers = net.servers
    n = len(servers)
    out = np.empty(3 * n + (7 if variant.use_load_features else 5))
    links = net.links
    i = 0
    for s in servers:
        out[i] = s.cpu_available / s.cpu_capacity
        out[i + 1] = s.ram_available / s.ram_capacity
        adj = net.adjacency[s.server_id]
        if adj:
            bw_cap = max(links[lid].bw_capacity for _, lid in adj)
            bw_av = max(links[lid].bw_available for _, lid in adj)
            out[i + 2] = bw_av / bw_cap if bw_cap else 0.0
        else:
            out[i + 2] = 0.0
        i += 3
    cpu, ram = nspr.vnfs[vnf_index]
    bw = nspr.vlinks[vnf_index - 1] if vnf_index > 0 else 0
    out[i] = min(cpu / net.max_cpu_capacity, 1.0)
    out[i + 1] = min(ram / net.max_ram_capacity, 1.0)
    out[i + 2] = min(bw / net.max_bw_capacity, 1.0)
    out[i + 3] = vnf_index / nspr.vnf_count
    if prev_host is None:
        out[i + 4] = -1.0
    else:
        out[i + 4] = prev_host / (n - 1) if n > 1 else 0.0
    if variant.use_load_features:
        out[i + 5] = min(max(load_estimate, 0.0), 2.0) / 2.0
        cap = net.total_cpu_capacity
        avail = sum(s.cpu_available for s in servers)
        out[i + 6] = 1.0 - avail / cap if cap else 0.0
    return out


def policy_forward(params: MlpParams, state: np.ndarray, feasibility_mask: np.ndarray) -> np.ndarray:
    """Actor logits over the full server set, -inf on infeasible entries."""
    acts = _forward(params, state)
    logits = acts[-1]
    if logits.shape != feasibility_mask.shape:
        raise DimensionMismatch(
            f"logit count {logits.shape} does not match mask {feasibility_mask.shape}"
        )
    out = logits.copy()
    out[~feasibility_mask] = -np.inf
    return out


def critic_value(params: MlpParams, state: np.ndarray) -> float:
    return float(_forward(params, state)[-1][0])


def ha_distribution(logits: np.ndarray, H: np.ndarray, beta: float) -> np.ndarray:
    """softmax(logits + beta*H) over the unmasked (finite) entries."""
    if logits.shape != H.shape:
        raise DimensionMismatch(f"logits {logits.shape} vs heuristic {H.shape}")
    shifted = logits + beta * H
    finite = np.isfinite(shifted)
    if not finite.any():
        raise NoFeasibleAction("every action is masked")
    top = shifted[finite].max()
    probs = np.zeros_like(shifted)
    probs[finite] = np.exp(shifted[finite] - top)
    probs /= probs.sum()
    return probs


def select_action(distribution: np.ndarray, rng) -> int:
    """Categorical sample; the caller records log(distribution[action])."""
    cum = np.cumsum(distribution)
    return int(np.searchsorted(cum, rng.random() * cum[-1], side="right"))


def episode_reward(accepted: bool, cost, config: TrainingConfig) -> float:
    """+1 with load-balancing bonus and bandwidth penalty on acceptance,
    flat -1 on rejection."""
    if not accepted:
        return -1.0
    r = 1.0 + config.w_lb * (1.0 - cost.max_server_utilization_after)
    if config.bw_norm > 0:
        r -= config.w_bw * cost.total_bw_consumed / config.bw_norm
    return r


def _masked_log_probs(probs: np.ndarray):
    safe = np.where(probs > 0, probs, 1.0)
    logs = np.where(probs > 0, np.log(safe), 0.0)
    entropy = float(-(probs * logs).sum())
    return logs, entropy


def _actor_step(params, step: TrajectoryStep, beta: float, advantage: float,
                entropy_weight: float, ha_loss_weight: float):
    """Loss and exact parameter gradients for one trajectory step.

    The heuristic shift beta*H is treated as a constant: gradients flow
    only through the network's own logits.
    """
    acts = _forward(params, step.state)
    logits = acts[-1].copy()
    logits[~step.mask] = -np.inf
    probs = ha_distribution(logits, step.heuristic, beta)
    logs, entropy = _masked_log_probs(probs)

    loss = -advantage * logs[step.action] - entropy_weight * entropy
    dlogits = advantage * probs.copy()
    dlogits[step.action] -= advantage
    dlogits += entropy_weight * probs * (logs + entropy)
    if ha_loss_weight > 0 and step.heuristic.any():
        h_idx = int(step.heuristic.argmax())
        loss += -ha_loss_weight * logs[h_idx]
        dlogits += ha_loss_weight * probs
        dlogits[h_idx] -= ha_loss_weight
    dws, dbs = _backward(params, acts, dlogits)
    return loss, entropy, dws, dbs


def _critic_step(params, step: TrajectoryStep, ret: float):
    acts = _forward(params, step.state)
    value = acts[-1][0]
    err = ret - value
    dws, dbs = _backward(params, acts, np.array([-2.0 * err]))
    return err * err, err, dws, dbs


def _accumulate(total, grads):
    if total is None:
        return list(grads)
    for t, g in zip(total, grads):
        t += g
    return total


def _all_finite(arrays) -> bool:
    return all(np.isfinite(a).all() for a in arrays)


def update(actor: MlpParams, critic: MlpParams, traj: Trajectory, config: TrainingConfig):
    """One advantage actor-critic update from a single-episode trajectory.

    Per step t (0-based, T steps): return G_t = gamma^(T-1-t) * terminal
    reward; advantage A_t = G_t - V(s_t) with the current critic. Both
    networks take one plain gradient-descent step per repeat; parameters
    are modified in place and returned together with a loss report.
    """
    if not traj.steps:
        raise ValueError("empty trajectory")
    T = len(traj.steps)
    report = None
    for _ in range(config.updates_per_episode):
        a_dws = a_dbs = c_dws = c_dbs = None
        actor_loss = critic_loss = entropy_sum = 0.0
        for t, step in enumerate(traj.steps):
            ret = config.gamma ** (T - 1 - t) * traj.terminal_reward
            c_loss, err, dws, dbs = _critic_step(critic, step, ret)
            critic_loss += c_loss
            c_dws = _accumulate(c_dws, dws)
            c_dbs = _accumulate(c_dbs, dbs)
            a_loss, ent, dws, dbs = _actor_step(
                actor, step, traj.beta, advantage=err,
                entropy_weight=config.entropy_weight,
                ha_loss_weight=config.ha_loss_weight,
            )
            actor_loss += a_loss
            entropy_sum += ent
            a_dws = _accumulate(a_dws, dws)
            a_dbs = _accumulate(a_dbs, dbs)
        if not (_all_finite(a_dws) and _all_finite(a_dbs)
                and _all_finite(c_dws) and _all_finite(c_dbs)):
            raise NonFiniteGradient("aborting update, parameters unchanged")
        lr = config.learning_rate
        for w, dw in zip(actor.weights, a_dws):
            w -= lr * dw
        for b, db in zip(actor.biases, a_dbs):
            b -= lr * db
        for w, dw in zip(critic.weights, c_dws):
            w -= lr * dw
        for b, db in zip(critic.biases, c_dbs):
            b -= lr * db
        report = UpdateReport(actor_loss, critic_loss, entropy_sum / T)
    return actor, critic, report


def grad_check(params: MlpParams, state: np.ndarray, mask: np.ndarray, H: np.ndarray,
               beta: float, action: int, advantage: float,
               entropy_weight: float = 0.0, eps: float = 1e-5) -> float:
    """Max relative error between analytic actor-loss gradients and
    central finite differences."""
    step = TrajectoryStep(state, action, 0.0, H, 0.0, mask)

    def loss_at(p: MlpParams) -> float:
        acts = _forward(p, state)
        logits = acts[-1].copy()
        logits[~mask] = -np.inf
        probs = ha_distribution(logits, H, beta)
        logs, entropy = _masked_log_probs(probs)
        return float(-advantage * logs[action] - entropy_weight * entropy)

    _, _, dws, dbs = _actor_step(params, step, beta, advantage, entropy_weight, 0.0)
    worst = 0.0
    for analytic, tensors in ((dws, params.weights), (dbs, params.biases)):
        for grad, tensor in zip(analytic, tensors):
            it = np.nditer(tensor, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                orig = tensor[idx]
                tensor[idx] = orig + eps
                hi = loss_at(params)
                tensor[idx] = orig - eps
                lo = loss_at(params)
                tensor[idx] = orig
                numeric = (hi - lo) / (2 * eps)
                a = grad[idx]
                err = abs(a - numeric) / max(abs(a), abs(numeric), 1e-6)
                worst = max(worst, err)
    return worst


def critic_grad_check(params: MlpParams, state: np.ndarray, ret: float,
                      eps: float = 1e-5) -> float:
    """Max relative error for the critic loss (ret - V(state))^2."""
    step = TrajectoryStep(state, 0, 0.0, np.zeros(1), 0.0, np.ones(1, dtype=bool))
    _, _, dws, dbs = _critic_step(params, step, ret)

    def loss_at(p: MlpParams) -> float:
        err = ret - critic_value(p, state)
        return err * err

    worst = 0.0
    for analytic, tensors in ((dws, params.weights), (dbs, params.biases)):
        for grad, tensor in zip(analytic, tensors):
            it = np.nditer(tensor, flags=["multi_index"])
            for _ in it:
                idx = it.multi_index
                orig = tensor[idx]
                tensor[idx] = orig + eps
                hi = loss_at(params)
                tensor[idx] = orig - eps
                lo = loss_at(params)
                tensor[idx] = orig
                numeric = (hi - lo) / (2 * eps)
                a = grad[idx]
                err = abs(a - numeric) / max(abs(a), abs(numeric), 1e-6)
                worst = max(worst, err)
    return worst


def grad_check_suite(n_configs: int = 100, seed: int = 0) -> float:
    """Randomized numerical validation: actor and critic gradients on
    small random networks; returns the max relative error seen."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n_configs):
        n_actions = int(rng.integers(2, 7))
        state_dim = int(rng.integers(3, 9))
        hidden = [int(rng.integers(3, 7))] if rng.random() < 0.7 else []
        actor = init_mlp([state_dim] + hidden + [n_actions], rng)
        critic = init_mlp([state_dim] + hidden + [1], rng)
        state = rng.uniform(-1, 1, state_dim)
        mask = rng.random(n_actions) < 0.8
        if not mask.any():
            mask[int(rng.integers(n_actions))] = True
        feasible = np.flatnonzero(mask)
        action = int(rng.choice(feasible))
        H = np.zeros(n_actions)
        if rng.random() < 0.5:
            H[int(rng.choice(feasible))] = 1.0
        beta = float(rng.uniform(0, 5))
        advantage = float(rng.normal(0, 2))
        entropy_weight = float(rng.uniform(0, 0.1))
        worst = max(worst, grad_check(actor, state, mask, H, beta, action,
                                      advantage, entropy_weight=entropy_weight))
        worst = max(worst, critic_grad_check(critic, state, float(rng.normal(0, 2))))
    return worst


def save_params(params: MlpParams, path) -> None:
    """Checkpoint: ASCII dimension header line, then every layer's weight
    matrix (row-major) followed by its bias vector as little-endian
    float64."""
    with open(path, "wb") as f:
        f.write(("mlp " + " ".join(str(d) for d in params.sizes) + "\n").encode("ascii"))
        for w, b in zip(params.weights, params.biases):
            f.write(w.astype("<f8").tobytes())
            f.write(b.astype("<f8").tobytes())


def load_params(path) -> MlpParams:
    with open(path, "rb") as f:
        header = f.readline().decode("ascii").split()
        if not header or header[0] != "mlp":
            raise ValueError(f"{path} is not a parameter checkpoint")
        sizes = [int(d) for d in header[1:]]
        weights, biases = [], []
        for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
            w = np.frombuffer(f.read(8 * fan_out * fan_in), dtype="<f8").reshape(fan_out, fan_in)
            b = np.frombuffer(f.read(8 * fan_out), dtype="<f8")
            weights.append(w.astype(np.float64))
            biases.append(b.astype(np.float64))
    return MlpParams(weights, biases)
