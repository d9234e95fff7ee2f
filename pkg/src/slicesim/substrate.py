"""Physical substrate network: tiered topology, capacities, and the
available-resource ledger updated on every slice placement and departure.

Node ids share one integer namespace: servers first (0..n_servers-1, so a
server id doubles as an action index), then one switch per data center.
Switches carry no CPU/RAM and cannot host VNFs.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .errors import (
    ConfigError,
    DuplicateSlice,
    InsufficientResources,
    UnknownNode,
    UnknownSlice,
)

TIERS = ("EDC", "CDC", "CCP")


@dataclass
class TopologyConfig:
    """Counts, per-tier server capacities, and link bandwidths.

    Defaults reproduce the 21-DC / 1008-server demo scenario:
    15 EDC x 16 + 5 CDC x 64 + 1 CCP x 448 servers.
    """

    edc_count: int = 15
    cdc_count: int = 5
    ccp_count: int = 1
    edc_servers: int = 16
    cdc_servers: int = 64
    ccp_servers: int = 448
    edc_cpu: int = 8
    edc_ram: int = 16
    cdc_cpu: int = 16
    cdc_ram: int = 32
    ccp_cpu: int = 32
    ccp_ram: int = 64
    bw_server_switch: int = 100
    bw_edc_cdc: int = 200
    bw_cdc_ring: int = 400
    bw_cdc_ccp: int = 400


@dataclass
class DataCenter:
    dc_id: int
    tier: str  # one of TIERS
    server_ids: list[int]
    switch_id: int


@dataclass
class ServerNode:
    server_id: int
    dc_id: int
    cpu_capacity: int
    ram_capacity: int
    cpu_available: int
    ram_available: int


@dataclass
class Link:
    link_id: int
    endpoints: tuple[int, int]  # canonical (low, high) node ids
    bw_capacity: int
    bw_available: int
    tier: str  # tier the link is attributed to for utilization summaries


@dataclass
class Allocation:
    """Per-slice consumed amounts, kept so release is an exact inverse."""

    decision: object  # placement.PlacementDecision
    cpu_by_server: dict[int, int]
    ram_by_server: dict[int, int]
    bw_by_link: dict[int, int]


@dataclass
class TierUtilization:
    cpu: float
    ram: float
    bw: float


@dataclass
class UtilizationSummary:
    cpu: float
    ram: float
    bw: float
    per_tier: dict[str, TierUtilization]


class PhysicalNetwork:
    """Mutable substrate state owned by a single simulation run.

    Adjacency and the caches derived from it depend only on the static
    topology; allocate/release touch availability fields and the
    allocations ledger only.
    """

    def __init__(self, data_centers, servers, switches, links):
        self.data_centers: list[DataCenter] = list(data_centers)
        self.servers: list[ServerNode] = list(servers)
        self.switches: list[int] = list(switches)
        self.links: list[Link] = list(links)
        self.allocations: dict[object, Allocation] = {}

        self._server_by_id = {s.server_id: s for s in self.servers}
        if len(self._server_by_id) != len(self.servers):
            raise ConfigError("duplicate server ids")
        switch_set = set(self.switches)
        if switch_set & set(self._server_by_id):
            raise ConfigError("server and switch ids overlap")

        # adjacency: node id -> [(neighbor id, link id)], sorted by neighbor
        self.adjacency: dict[int, list[tuple[int, int]]] = {
            n: [] for n in list(self._server_by_id) + self.switches
        }
        seen_pairs = set()
        for link in self.links:
            a, b = link.endpoints
            if a > b:
                raise ConfigError(f"link {link.link_id} endpoints not canonical")
            if a == b or (a, b) in seen_pairs:
                raise ConfigError(f"duplicate or self link on pair {(a, b)}")
            seen_pairs.add((a, b))
            if a not in self.adjacency or b not in self.adjacency:
                raise ConfigError(f"link {link.link_id} references unknown node")
            self.adjacency[a].append((b, link.link_id))
            self.adjacency[b].append((a, link.link_id))
        for nbrs in self.adjacency.values():
            nbrs.sort()

        self.total_cpu_capacity = sum(s.cpu_capacity for s in self.servers)
        self.total_ram_capacity = sum(s.ram_capacity for s in self.servers)
        self.total_bw_capacity = sum(l.bw_capacity for l in self.links)
        self.max_cpu_capacity = max((s.cpu_capacity for s in self.servers), default=0) or 1
        self.max_ram_capacity = max((s.ram_capacity for s in self.servers), default=0) or 1
        self.max_bw_capacity = max((l.bw_capacity for l in self.links), default=0) or 1

        # lazy caches over the static topology (see placement / p2c)
        self._dist_cache: dict[int, dict[int, int]] = {}
        self._path_cache: dict[tuple[int, int], list[int] | None] = {}

    # -- lookups ------------------------------------------------------

    def server(self, server_id: int) -> ServerNode:
        try:
            return self._server_by_id[server_id]
        except KeyError:
            raise UnknownNode(f"no server with id {server_id}") from None

    def is_server(self, node_id: int) -> bool:
        return node_id in self._server_by_id

    def link(self, link_id: int) -> Link:
        return self.links[link_id]

    def node_ids(self) -> list[int]:
        return list(self._server_by_id) + self.switches

    def hop_distances(self, src: int) -> dict[int, int]:
        """Hop distance from src to every reachable node, ignoring bandwidth.

        Cached; the static topology never changes within a run.
        """
        cached = self._dist_cache.get(src)
        if cached is not None:
            return cached
        if src not in self.adjacency:
            raise UnknownNode(f"no node with id {src}")
        dist = {src: 0}
        frontier = deque([src])
        while frontier:
            u = frontier.popleft()
            for v, _ in self.adjacency[u]:
                if v not in dist:
                    dist[v] = dist[u] + 1
                    frontier.append(v)
        self._dist_cache[src] = dist
        return dist


def build_topology(config: TopologyConfig) -> PhysicalNetwork:
    """Construct the tiered substrate: servers star-connect to their DC
    switch, EDC switches hang off their assigned CDC switch (EDCs evenly
    partitioned across CDCs), CDC switches form a ring and each links to
    the CCP switch.
    """
    cfg = config
    for name in ("edc_count", "cdc_count", "ccp_count"):
        if getattr(cfg, name) < 0:
            raise ConfigError(f"{name} must be >= 0")
    if cfg.ccp_count > 1:
        raise ConfigError("at most one CCP is supported")
    if cfg.edc_count + cfg.cdc_count + cfg.ccp_count == 0:
        raise ConfigError("topology has no data centers")
    if cfg.edc_count > 0:
        if cfg.cdc_count == 0:
            raise ConfigError("EDCs require at least one CDC to attach to")
        if cfg.edc_count % cfg.cdc_count != 0:
            raise ConfigError(
                f"EDC count {cfg.edc_count} not divisible by CDC count {cfg.cdc_count}"
            )
    tier_plan = []  # (tier, dc_count, servers, cpu, ram)
    tier_plan.append(("EDC", cfg.edc_count, cfg.edc_servers, cfg.edc_cpu, cfg.edc_ram))
    tier_plan.append(("CDC", cfg.cdc_count, cfg.cdc_servers, cfg.cdc_cpu, cfg.cdc_ram))
    tier_plan.append(("CCP", cfg.ccp_count, cfg.ccp_servers, cfg.ccp_cpu, cfg.ccp_ram))
    for tier, count, servers, cpu, ram in tier_plan:
        if count > 0 and servers <= 0:
            raise ConfigError(f"{tier} data centers must have at least one server")
        if count > 0 and (cpu <= 0 or ram <= 0):
            raise ConfigError(f"{tier} server capacities must be positive")
    for name in ("bw_server_switch", "bw_edc_cdc", "bw_cdc_ring", "bw_cdc_ccp"):
        if getattr(cfg, name) < 0:
            raise ConfigError(f"{name} must be >= 0")

    data_centers = []
    servers = []
    next_server = 0
    for tier, count, n_servers, cpu, ram in tier_plan:
        for _ in range(count):
            dc_id = len(data_centers)
            ids = list(range(next_server, next_server + n_servers))
            next_server += n_servers
            data_centers.append(DataCenter(dc_id, tier, ids, switch_id=-1))
            for sid in ids:
                servers.append(ServerNode(sid, dc_id, cpu, ram, cpu, ram))

    switches = []
    for dc in data_centers:
        dc.switch_id = next_server + dc.dc_id
        switches.append(dc.switch_id)

    links = []

    def add_link(a, b, bw, tier):
        lo, hi = (a, b) if a < b else (b, a)
        links.append(Link(len(links), (lo, hi), bw, bw, tier))

    for dc in data_centers:
        for sid in dc.server_ids:
            add_link(sid, dc.switch_id, cfg.bw_server_switch, dc.tier)

    edcs = [dc for dc in data_centers if dc.tier == "EDC"]
    cdcs = [dc for dc in data_centers if dc.tier == "CDC"]
    ccps = [dc for dc in data_centers if dc.tier == "CCP"]
    if edcs:
        group = len(edcs) // len(cdcs)
        for i, edc in enumerate(edcs):
            add_link(edc.switch_id, cdcs[i // group].switch_id, cfg.bw_edc_cdc, "CDC")
    if len(cdcs) >= 2:
        ring_pairs = {frozenset((i, (i + 1) % len(cdcs))) for i in range(len(cdcs))}
        for pair in sorted(tuple(sorted(p)) for p in ring_pairs):
            add_link(cdcs[pair[0]].switch_id, cdcs[pair[1]].switch_id, cfg.bw_cdc_ring, "CDC")
    if ccps:
        for cdc in cdcs:
            add_link(cdc.switch_id, ccps[0].switch_id, cfg.bw_cdc_ccp, "CCP")

    net = PhysicalNetwork(data_centers, servers, switches, links)
    if not is_connected(net):
        raise ConfigError("topology is not connected")
    return net


def is_connected(net: PhysicalNetwork) -> bool:
    nodes = net.node_ids()
    if not nodes:
        return True
    seen = {nodes[0]}
    frontier = deque([nodes[0]])
    while frontier:
        u = frontier.popleft()
        for v, _ in net.adjacency[u]:
            if v not in seen:
                seen.add(v)
                frontier.append(v)
    return len(seen) == len(nodes)


def _gather_demands(net, decision):
    """Sum the decision's demands per server and per link hop."""
    cpu_by_server: dict[int, int] = {}
    ram_by_server: dict[int, int] = {}
    bw_by_link: dict[int, int] = {}
    for host, cpu, ram in zip(decision.vnf_hosts, decision.cpu_demands, decision.ram_demands):
        net.server(host)  # raises UnknownNode for switches / bad ids
        cpu_by_server[host] = cpu_by_server.get(host, 0) + cpu
        ram_by_server[host] = ram_by_server.get(host, 0) + ram
    for path, bw in zip(decision.vlink_paths, decision.bw_demands):
        for link_id in path:
            bw_by_link[link_id] = bw_by_link.get(link_id, 0) + bw
    return cpu_by_server, ram_by_server, bw_by_link


def allocate(net: PhysicalNetwork, slice_id, decision) -> PhysicalNetwork:
    """Debit every assigned server and every hop of every path, atomically.

    A failed allocation raises before anything is touched, so the network
    state is bit-identical on error.
    """
    if slice_id in net.allocations:
        raise DuplicateSlice(f"slice {slice_id} already allocated")
    cpu_by_server, ram_by_server, bw_by_link = _gather_demands(net, decision)

    for sid in sorted(cpu_by_server):
        srv = net.server(sid)
        if srv.cpu_available < cpu_by_server[sid]:
            raise InsufficientResources("cpu", sid, cpu_by_server[sid], srv.cpu_available)
        if srv.ram_available < ram_by_server[sid]:
            raise InsufficientResources("ram", sid, ram_by_server[sid], srv.ram_available)
    for lid in sorted(bw_by_link):
        link = net.link(lid)
        if link.bw_available < bw_by_link[lid]:
            raise InsufficientResources("bw", lid, bw_by_link[lid], link.bw_available)

    for sid, amount in cpu_by_server.items():
        net.server(sid).cpu_available -= amount
    for sid, amount in ram_by_server.items():
        net.server(sid).ram_available -= amount
    for lid, amount in bw_by_link.items():
        net.link(lid).bw_available -= amount
    net.allocations[slice_id] = Allocation(decision, cpu_by_server, ram_by_server, bw_by_link)
    return net


def release(net: PhysicalNetwork, slice_id) -> PhysicalNetwork:
    """Exact inverse of the corresponding allocate."""
    alloc = net.allocations.get(slice_id)
    if alloc is None:
        raise UnknownSlice(f"slice {slice_id} is not allocated")
    for sid, amount in alloc.cpu_by_server.items():
        net.server(sid).cpu_available += amount
    for sid, amount in alloc.ram_by_server.items():
        net.server(sid).ram_available += amount
    for lid, amount in alloc.bw_by_link.items():
        net.link(lid).bw_available += amount
    del net.allocations[slice_id]
    return net


def _ratio(available: int, capacity: int) -> float:
    return 0.0 if capacity == 0 else 1.0 - available / capacity


def utilization(net: PhysicalNetwork) -> UtilizationSummary:
    """Overall and per-tier cpu/ram/bw utilization ratios in [0, 1].

    Inter-DC links are attributed to the higher tier they reach (EDC-CDC
    and ring links to CDC, CDC-CCP links to CCP).
    """
    per_tier = {}
    for tier in TIERS:
        dc_ids = {dc.dc_id for dc in net.data_centers if dc.tier == tier}
        if not dc_ids:
            continue
        srvs = [s for s in net.servers if s.dc_id in dc_ids]
        tier_links = [l for l in net.links if l.tier == tier]
        per_tier[tier] = TierUtilization(
            cpu=_ratio(sum(s.cpu_available for s in srvs), sum(s.cpu_capacity for s in srvs)),
            ram=_ratio(sum(s.ram_available for s in srvs), sum(s.ram_capacity for s in srvs)),
            bw=_ratio(sum(l.bw_available for l in tier_links), sum(l.bw_capacity for l in tier_links)),
        )
    return UtilizationSummary(
        cpu=_ratio(sum(s.cpu_available for s in net.servers), net.total_cpu_capacity),
        ram=_ratio(sum(s.ram_available for s in net.servers), net.total_ram_capacity),
        bw=_ratio(sum(l.bw_available for l in net.links), net.total_bw_capacity),
        per_tier=per_tier,
    )


def conservation_ok(net: PhysicalNetwork) -> bool:
    """available + sum of active consumed == capacity, on every server/link."""
    cpu = {s.server_id: 0 for s in net.servers}
    ram = {s.server_id: 0 for s in net.servers}
    bw = {l.link_id: 0 for l in net.links}
    for alloc in net.allocations.values():
        for sid, amount in alloc.cpu_by_server.items():
            cpu[sid] += amount
        for sid, amount in alloc.ram_by_server.items():
            ram[sid] += amount
        for lid, amount in alloc.bw_by_link.items():
            bw[lid] += amount
    for s in net.servers:
        if s.cpu_available + cpu[s.server_id] != s.cpu_capacity:
            return False
        if s.ram_available + ram[s.server_id] != s.ram_capacity:
            return False
        if not (0 <= s.cpu_available <= s.cpu_capacity and 0 <= s.ram_available <= s.ram_capacity):
            return False
    for l in net.links:
        if l.bw_available + bw[l.link_id] != l.bw_capacity:
            return False
        if not 0 <= l.bw_available <= l.bw_capacity:
            return False
    return True
