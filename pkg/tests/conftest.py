"""Shared helpers for building small substrate instances and requests."""

import random

from slicesim.substrate import DataCenter, Link, PhysicalNetwork, ServerNode
from slicesim.traffic import Nspr


def make_net(server_caps, links, switch_ids=()):
    """Hand-built network: server_caps is [(cpu, ram), ...] giving servers
    ids 0..n-1, links is [(a, b, bw), ...]. Extra nodes go in switch_ids.
    All servers are placed in one EDC data center per switch-less layout.
    """
    servers = [
        ServerNode(i, 0, cpu, ram, cpu, ram) for i, (cpu, ram) in enumerate(server_caps)
    ]
    switch = list(switch_ids)
    dc = DataCenter(0, "EDC", [s.server_id for s in servers],
                    switch_id=switch[0] if switch else -1)
    link_objs = []
    for i, (a, b, bw) in enumerate(links):
        lo, hi = (a, b) if a < b else (b, a)
        link_objs.append(Link(i, (lo, hi), bw, bw, "EDC"))
    return PhysicalNetwork([dc], servers, switch, link_objs)


def make_nspr(slice_id=0, vnfs=((1, 1),), vlinks=(), arrival=0.0, holding=10.0):
    return Nspr(slice_id, [tuple(v) for v in vnfs], list(vlinks), arrival, holding)


def random_connected_graph(rng: random.Random, n_nodes, n_servers, max_bw=5):
    """Random connected graph for path-oracle tests: returns
    (server_caps, links, switch_ids). Servers are nodes 0..n_servers-1."""
    assert n_servers <= n_nodes
    links = set()
    # random spanning tree first, extra edges after
    nodes = list(range(n_nodes))
    rng.shuffle(nodes)
    for i in range(1, n_nodes):
        a = nodes[i]
        b = nodes[rng.randrange(i)]
        links.add((min(a, b), max(a, b)))
    extra = rng.randrange(0, n_nodes * 2)
    for _ in range(extra):
        a, b = rng.sample(range(n_nodes), 2)
        links.add((min(a, b), max(a, b)))
    caps = [(10, 10)] * n_servers
    link_list = [(a, b, rng.randint(1, max_bw)) for a, b in sorted(links)]
    return caps, link_list, list(range(n_servers, n_nodes))
