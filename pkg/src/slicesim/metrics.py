"""Key-metrics data series (acceptance ratio, network load) and the file
exports behind the two dashboards: CSV tables plus a DOT graph view of
the substrate.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from .errors import NonMonotoneTime

DEFAULT_WINDOW = 100


@dataclass
class AcceptanceRecord:
    t: float
    arrival_idx: int
    window_acceptance: float
    cumulative_acceptance: float


@dataclass
class LoadRecord:
    t: float
    offered_load: float
    cpu_util: float
    ram_util: float
    bw_util: float


@dataclass
class MetricsSeries:
    window: int = DEFAULT_WINDOW
    acceptance: list[AcceptanceRecord] = field(default_factory=list)
    load: list[LoadRecord] = field(default_factory=list)
    _flags: deque = field(default_factory=deque, repr=False)
    _accepted_total: int = 0
    _last_t: float = float("-inf")

    def _check_time(self, t: float):
        if t < self._last_t:
            raise NonMonotoneTime(f"t={t} after t={self._last_t}")
        self._last_t = t

    def record_arrival(self, t: float, accepted: bool) -> None:
        """Append one acceptance record; the window covers the last
        `window` arrivals including this one."""
        self._check_time(t)
        self._flags.append(accepted)
        if len(self._flags) > self.window:
            self._flags.popleft()
        self._accepted_total += accepted
        idx = len(self.acceptance) + 1
        self.acceptance.append(AcceptanceRecord(
            t=t,
            arrival_idx=idx,
            window_acceptance=sum(self._flags) / len(self._flags),
            cumulative_acceptance=self._accepted_total / idx,
        ))

    def record_load(self, t: float, offered_load: float, cpu_util: float,
                    ram_util: float, bw_util: float) -> None:
        self._check_time(t)
        self.load.append(LoadRecord(t, offered_load, cpu_util, ram_util, bw_util))


def export_csv(series: MetricsSeries, directory) -> tuple[str, str]:
    """Write acceptance.csv and load.csv (6-decimal floats, LF endings);
    returns the two paths."""
    import os

    acc_path = os.path.join(str(directory), "acceptance.csv")
    load_path = os.path.join(str(directory), "load.csv")
    with open(acc_path, "w", newline="\n") as f:
        f.write("t,arrival_idx,window_acceptance,cumulative_acceptance\n")
        for r in series.acceptance:
            f.write(f"{r.t:.6f},{r.arrival_idx},{r.window_acceptance:.6f},{r.cumulative_acceptance:.6f}\n")
    with open(load_path, "w", newline="\n") as f:
        f.write("t,offered_load,cpu_util,ram_util,bw_util\n")
        for r in series.load:
            f.write(f"{r.t:.6f},{r.offered_load:.6f},{r.cpu_util:.6f},{r.ram_util:.6f},{r.bw_util:.6f}\n")
    return acc_path, load_path


def export_dot(net, decision=None, path="psn.dot") -> str:
    """DOT digraph of the substrate: one cluster per DC, servers annotated
    with cpu/ram availability, links with bandwidth. When a decision is
    given its hosts and path edges are drawn red with VNF/vlink labels."""
    host_vnfs: dict[int, list[int]] = {}
    red_links: dict[int, list[int]] = {}
    if decision is not None:
        for i, host in enumerate(decision.vnf_hosts):
            host_vnfs.setdefault(host, []).append(i)
        for i, link_path in enumerate(decision.vlink_paths):
            for lid in link_path:
                red_links.setdefault(lid, []).append(i)

    lines = ["digraph psn {", "  node [shape=box];"]
    for dc in net.data_centers:
        lines.append(f"  subgraph cluster_dc{dc.dc_id} {{")
        lines.append(f'    label="{dc.tier} {dc.dc_id}";')
        for sid in dc.server_ids:
            s = net.server(sid)
            label = f"s{sid}\\ncpu={s.cpu_available}/{s.cpu_capacity} ram={s.ram_available}/{s.ram_capacity}"
            attrs = [f'label="{label}"']
            if sid in host_vnfs:
                idxs = ",".join(str(i) for i in host_vnfs[sid])
                attrs = [f'label="{label}\\nVNF {idxs}"', 'color="red"']
            lines.append(f"    s{sid} [{', '.join(attrs)}];")
        lines.append(f'    w{dc.switch_id} [shape=diamond, label="sw{dc.switch_id}"];')
        lines.append("  }")
    for link in net.links:
        a, b = link.endpoints
        name_a = f"s{a}" if net.is_server(a) else f"w{a}"
        name_b = f"s{b}" if net.is_server(b) else f"w{b}"
        attrs = [f'label="bw={link.bw_available}/{link.bw_capacity}"', "dir=none"]
        if link.link_id in red_links:
            idxs = ",".join(str(i) for i in red_links[link.link_id])
            attrs = [f'label="bw={link.bw_available}/{link.bw_capacity} vl{idxs}"',
                     'color="red"', "dir=none"]
        lines.append(f"  {name_a} -> {name_b} [{', '.join(attrs)}];")
    lines.append("}")
    with open(path, "w", newline="\n") as f:
        f.write("\n".join(lines) + "\n")
    return str(path)
