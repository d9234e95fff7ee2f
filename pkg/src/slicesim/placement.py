"""Feasibility filtering, bandwidth-constrained shortest paths, and
assembly of complete placement decisions from a VNF -> server assignment.

Routing minimizes hop count; ties break on the lexicographically smallest
node-id sequence, which a FIFO BFS with ascending neighbor expansion
produces directly. Determinism is total: identical inputs give identical
decisions.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .errors import UnknownNode

NODE_CAPACITY = "node_capacity"
NO_PATH = "no_path"


@dataclass
class PlacementDecision:
    slice_id: object
    vnf_hosts: list[int]
    vlink_paths: list[list[int]]  # link ids per virtual link; empty = co-located
    cpu_demands: list[int]
    ram_demands: list[int]
    bw_demands: list[int]


@dataclass
class Rejection:
    reason: str  # NODE_CAPACITY or NO_PATH
    index: int  # first failing VNF (node) or virtual link (path) index


@dataclass
class DecisionCost:
    total_bw_consumed: int  # sum over paths of bw_demand * hops
    max_server_utilization_after: float
    servers_touched: int


def candidate_nodes(net, cpu_demand: int, ram_demand: int) -> list[int]:
    """Servers with enough available cpu and ram, ascending server id."""
    return [
        s.server_id
        for s in net.servers
        if s.cpu_available >= cpu_demand and s.ram_available >= ram_demand
    ]


def _bfs_path(net, src: int, dst: int, feasible) -> list[int] | None:
    """Minimum-hop path src -> dst over links passing `feasible(link)`,
    as a list of link ids; lexicographically smallest node sequence among
    ties. None when disconnected under the filter."""
    if src == dst:
        return []
    parent: dict[int, tuple[int, int]] = {src: (-1, -1)}
    frontier = deque([src])
    while frontier:
        u = frontier.popleft()
        for v, link_id in net.adjacency[u]:
            if v in parent or not feasible(net.links[link_id]):
                continue
            parent[v] = (u, link_id)
            if v == dst:
                path = []
                node = dst
                while node != src:
                    node, link_id = parent[node]
                    path.append(link_id)
                path.reverse()
                return path
            frontier.append(v)
    return None


def _static_path(net, src: int, dst: int) -> list[int] | None:
    """Lex-min shortest path ignoring bandwidth, cached on the network."""
    key = (src, dst)
    if key not in net._path_cache:
        net._path_cache[key] = _bfs_path(net, src, dst, lambda link: True)
    return net._path_cache[key]


def shortest_feasible_path(net, src_server: int, dst_server: int, bw_demand: int,
                           reserved: dict[int, int] | None = None) -> list[int] | None:
    """Minimum-hop simple path using only links with enough available
    bandwidth (minus any `reserved` amounts already claimed by earlier
    virtual links of the same decision).

    The topology-static shortest path is tried first: when it is feasible
    it is provably also the filtered optimum, and the full filtered BFS
    only runs when bandwidth actually bites.
    """
    if not net.is_server(src_server):
        raise UnknownNode(f"source {src_server} is not a server")
    if not net.is_server(dst_server):
        raise UnknownNode(f"destination {dst_server} is not a server")
    if src_server == dst_server:
        return []
    if reserved is None:
        reserved = {}

    def feasible(link):
        return link.bw_available - reserved.get(link.link_id, 0) >= bw_demand

    static = _static_path(net, src_server, dst_server)
    if static is None:
        return None
    if all(feasible(net.links[lid]) for lid in static):
        return list(static)
    return _bfs_path(net, src_server, dst_server, feasible)


def assemble_decision(net, nspr, vnf_hosts: list[int], allow_colocation: bool = True):
    """Check joint node feasibility (VNFs sharing a server must fit
    together), then route virtual links in chain order while accounting
    for bandwidth already claimed by this same decision.

    Returns a PlacementDecision, or a Rejection carrying the first
    failing VNF / virtual-link index.
    """
    if len(vnf_hosts) != nspr.vnf_count:
        raise ValueError(f"expected {nspr.vnf_count} hosts, got {len(vnf_hosts)}")

    cpu_used: dict[int, int] = {}
    ram_used: dict[int, int] = {}
    for i, (host, (cpu, ram)) in enumerate(zip(vnf_hosts, nspr.vnfs)):
        srv = net.server(host)
        new_cpu = cpu_used.get(host, 0) + cpu
        new_ram = ram_used.get(host, 0) + ram
        if new_cpu > srv.cpu_available or new_ram > srv.ram_available:
            return Rejection(NODE_CAPACITY, i)
        cpu_used[host] = new_cpu
        ram_used[host] = new_ram

    paths: list[list[int]] = []
    reserved: dict[int, int] = {}
    for i in range(nspr.vnf_count - 1):
        src, dst = vnf_hosts[i], vnf_hosts[i + 1]
        bw = nspr.vlinks[i]
        if src == dst:
            if not allow_colocation:
                return Rejection(NO_PATH, i)
            paths.append([])
            continue
        path = shortest_feasible_path(net, src, dst, bw, reserved=reserved)
        if path is None:
            return Rejection(NO_PATH, i)
        for lid in path:
            reserved[lid] = reserved.get(lid, 0) + bw
        paths.append(path)

    return PlacementDecision(
        slice_id=nspr.slice_id,
        vnf_hosts=list(vnf_hosts),
        vlink_paths=paths,
        cpu_demands=[cpu for cpu, _ in nspr.vnfs],
        ram_demands=[ram for _, ram in nspr.vnfs],
        bw_demands=list(nspr.vlinks),
    )


def decision_cost(net, decision: PlacementDecision) -> DecisionCost:
    total_bw = sum(bw * len(path) for bw, path in zip(decision.bw_demands, decision.vlink_paths))
    added_cpu: dict[int, int] = {}
    for host, cpu in zip(decision.vnf_hosts, decision.cpu_demands):
        added_cpu[host] = added_cpu.get(host, 0) + cpu
    max_util = 0.0
    for host, added in added_cpu.items():
        srv = net.server(host)
        util = (srv.cpu_capacity - srv.cpu_available + added) / srv.cpu_capacity
        max_util = max(max_util, util)
    return DecisionCost(
        total_bw_consumed=total_bw,
        max_server_utilization_after=max_util,
        servers_touched=len(set(decision.vnf_hosts)),
    )
