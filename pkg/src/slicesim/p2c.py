"""Power-of-two-choices placement: sample two feasible candidates, keep
the one with the lower post-placement cpu utilization.

When a previous host is known the candidate set is pruned to the K
servers nearest by hop count (on the bandwidth-unfiltered topology), so
chaining cost stays bounded.
"""

from __future__ import annotations

import math

import numpy as np

from .placement import candidate_nodes

DEFAULT_CANDIDATE_K = 32


def _cpu_util_after(net, server_id: int, cpu_demand: int) -> float:
    srv = net.server(server_id)
    return (srv.cpu_capacity - srv.cpu_available + cpu_demand) / srv.cpu_capacity


def p2c_select(net, cpu_demand: int, ram_demand: int, prev_host, rng,
               candidate_k: int = DEFAULT_CANDIDATE_K,
               allow_colocation: bool = True):
    """Pick a server for one VNF, or None when nothing is feasible.

    Ties on utilization break toward the lower server id, which makes the
    choice independent of the order the pair was sampled in.
    """
    candidates = candidate_nodes(net, cpu_demand, ram_demand)
    if prev_host is not None:
        if not allow_colocation:
            candidates = [s for s in candidates if s != prev_host]
        if candidates:
            dist = net.hop_distances(prev_host)
            candidates = sorted(candidates, key=lambda s: (dist.get(s, math.inf), s))
            candidates = candidates[:candidate_k]
    if not candidates:
        return None
    if len(candidates) == 1:
        return candidates[0]
    a, b = rng.sample(candidates, 2)
    ua = _cpu_util_after(net, a, cpu_demand)
    ub = _cpu_util_after(net, b, cpu_demand)
    if ua < ub:
        return a
    if ub < ua:
        return b
    return min(a, b)


def heuristic_scores(net, nspr, vnf_index: int, prev_host, rng,
                     candidate_k: int = DEFAULT_CANDIDATE_K,
                     allow_colocation: bool = True) -> np.ndarray:
    """One-hot vector over all servers marking the p2c choice for the
    given VNF of the request; all-zero when nothing is feasible."""
    cpu, ram = nspr.vnfs[vnf_index]
    scores = np.zeros(len(net.servers))
    choice = p2c_select(net, cpu, ram, prev_host, rng,
                        candidate_k=candidate_k, allow_colocation=allow_colocation)
    if choice is not None:
        scores[choice] = 1.0
    return scores
