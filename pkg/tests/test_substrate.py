import copy
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_net, make_nspr
from slicesim.errors import (
    ConfigError,
    DuplicateSlice,
    InsufficientResources,
    UnknownSlice,
)
from slicesim.placement import PlacementDecision, assemble_decision
from slicesim.substrate import (
    TopologyConfig,
    allocate,
    build_topology,
    conservation_ok,
    is_connected,
    release,
    utilization,
)


def snapshot(net):
    return (
        [(s.cpu_available, s.ram_available) for s in net.servers],
        [l.bw_available for l in net.links],
        sorted(net.allocations),
    )


def decision(slice_id, hosts, paths, cpu, ram, bw):
    return PlacementDecision(slice_id, list(hosts), [list(p) for p in paths],
                             list(cpu), list(ram), list(bw))


# -- topology construction ------------------------------------------------

def test_default_topology_matches_demo_scenario():
    net = build_topology(TopologyConfig())
    assert len(net.data_centers) == 21
    assert len(net.servers) == 1008
    tiers = [dc.tier for dc in net.data_centers]
    assert tiers.count("EDC") == 15
    assert tiers.count("CDC") == 5
    assert tiers.count("CCP") == 1
    assert is_connected(net)


def test_single_ccp_degenerate_case():
    cfg = TopologyConfig(edc_count=0, cdc_count=0, ccp_count=1, ccp_servers=1)
    net = build_topology(cfg)
    assert len(net.data_centers) == 1
    assert len(net.servers) == 1
    assert len(net.switches) == 1
    assert len(net.links) == 1


def test_small_topology_link_counts_forced_by_wiring():
    # 2 EDC x 2 + 1 CDC x 8 + 1 CCP x 16 = 28 servers
    cfg = TopologyConfig(edc_count=2, cdc_count=1, ccp_count=1,
                         edc_servers=2, cdc_servers=8, ccp_servers=16)
    net = build_topology(cfg)
    assert len(net.data_centers) == 4
    assert len(net.servers) == 28
    # 28 server-switch + 2 EDC-CDC + 1 CDC-CCP; ring of one CDC adds none
    assert len(net.links) == 31


def test_cdc_ring_of_two_has_single_ring_link():
    cfg = TopologyConfig(edc_count=0, cdc_count=2, ccp_count=0,
                         cdc_servers=2)
    net = build_topology(cfg)
    assert len(net.links) == 4 + 1
    assert is_connected(net)


def test_rejects_bad_configs():
    with pytest.raises(ConfigError):
        build_topology(TopologyConfig(edc_count=3, cdc_count=2))
    with pytest.raises(ConfigError):
        build_topology(TopologyConfig(edc_count=2, cdc_count=0, ccp_count=1))
    with pytest.raises(ConfigError):
        build_topology(TopologyConfig(ccp_count=2))
    with pytest.raises(ConfigError):
        build_topology(TopologyConfig(edc_count=0, cdc_count=0, ccp_count=0))
    with pytest.raises(ConfigError):
        build_topology(TopologyConfig(edc_servers=0))
    with pytest.raises(ConfigError):
        build_topology(TopologyConfig(edc_count=-1))


def test_every_server_in_exactly_one_dc():
    net = build_topology(TopologyConfig(edc_count=4, cdc_count=2, ccp_count=1,
                                        edc_servers=3, cdc_servers=5, ccp_servers=7))
    seen = []
    for dc in net.data_centers:
        seen.extend(dc.server_ids)
    assert sorted(seen) == [s.server_id for s in net.servers]
    assert len(seen) == len(set(seen))


# -- allocate / release ---------------------------------------------------

def test_allocate_debits_server():
    net = make_net([(8, 8)], [])
    allocate(net, "a", decision("a", [0], [], [3], [1], []))
    assert net.server(0).cpu_available == 5
    assert net.server(0).ram_available == 7


def test_two_vnfs_same_server_additive():
    net = make_net([(8, 8)], [])
    allocate(net, "a", decision("a", [0, 0], [[]], [3, 2], [1, 1], [1]))
    assert net.server(0).cpu_available == 3


def test_path_debits_every_hop():
    # 0 - 2 - 3 - 1 chain through two switches
    net = make_net([(4, 4), (4, 4)], [(0, 2, 10), (2, 3, 10), (1, 3, 10)],
                   switch_ids=[2, 3])
    allocate(net, "a", decision("a", [0, 1], [[0, 1, 2]], [1, 1], [1, 1], [2]))
    assert [l.bw_available for l in net.links] == [8, 8, 8]


def test_release_is_exact_inverse():
    net = make_net([(8, 8), (8, 8)], [(0, 2, 10), (1, 2, 10)], switch_ids=[2])
    before = snapshot(net)
    allocate(net, "a", decision("a", [0, 1], [[0, 1]], [2, 3], [1, 2], [1]))
    assert snapshot(net) != before
    release(net, "a")
    assert snapshot(net) == before


def test_release_unknown_slice_leaves_network_unchanged():
    net = make_net([(8, 8)], [])
    before = snapshot(net)
    with pytest.raises(UnknownSlice):
        release(net, "ghost")
    assert snapshot(net) == before


def test_duplicate_slice_rejected():
    net = make_net([(8, 8)], [])
    allocate(net, "a", decision("a", [0], [], [1], [1], []))
    with pytest.raises(DuplicateSlice):
        allocate(net, "a", decision("a", [0], [], [1], [1], []))


def test_failed_allocate_is_atomic():
    net = make_net([(4, 4), (4, 4)], [(0, 2, 3), (1, 2, 3)], switch_ids=[2])
    allocate(net, "a", decision("a", [0], [], [2], [2], []))
    before = snapshot(net)
    # cpu fits on server 1 but the path demand 4 exceeds bw 3
    with pytest.raises(InsufficientResources) as exc:
        allocate(net, "b", decision("b", [0, 1], [[0, 1]], [1, 1], [1, 1], [4]))
    assert exc.value.kind == "bw"
    assert snapshot(net) == before


def test_interleaved_release_matches_replay_oracle():
    # the replay oracle applies only the surviving allocation to a fresh net
    def fresh():
        return make_net([(10, 10), (10, 10)], [(0, 2, 10), (1, 2, 10)], switch_ids=[2])

    d_a = decision("A", [0], [], [4], [4], [])
    d_b = decision("B", [0, 1], [[0, 1]], [2, 3], [1, 2], [2])
    net = fresh()
    allocate(net, "A", d_a)
    allocate(net, "B", d_b)
    release(net, "A")
    oracle = fresh()
    allocate(oracle, "B", d_b)
    assert snapshot(net) == snapshot(oracle)


# -- utilization ----------------------------------------------------------

def test_fresh_network_utilization_zero():
    net = build_topology(TopologyConfig(edc_count=2, cdc_count=1, ccp_count=1,
                                        edc_servers=2, cdc_servers=2, ccp_servers=2))
    summary = utilization(net)
    assert summary.cpu == summary.ram == summary.bw == 0.0
    for tier in summary.per_tier.values():
        assert tier.cpu == tier.ram == tier.bw == 0.0


def test_single_server_utilization_arithmetic():
    net = make_net([(8, 16)], [])
    allocate(net, "a", decision("a", [0], [], [2], [4], []))
    summary = utilization(net)
    assert summary.cpu == pytest.approx(0.25)
    assert summary.ram == pytest.approx(0.25)


def test_utilization_matches_recompute_oracle():
    rng = random.Random(7)
    net = build_topology(TopologyConfig(edc_count=2, cdc_count=2, ccp_count=1,
                                        edc_servers=3, cdc_servers=4, ccp_servers=5))
    for sid in range(30):
        nspr = make_nspr(sid, vnfs=[(rng.randint(1, 3), rng.randint(1, 4))
                                    for _ in range(rng.randint(1, 3))],
                         vlinks=[rng.randint(1, 2)
                                 for _ in range(rng.randint(1, 3) - 1)])
        nspr.vlinks = [1] * (len(nspr.vnfs) - 1)
        hosts = [rng.choice(net.servers).server_id for _ in nspr.vnfs]
        result = assemble_decision(net, nspr, hosts)
        if isinstance(result, PlacementDecision):
            allocate(net, sid, result)
    summary = utilization(net)

    # oracle: recompute availability from scratch out of the allocations map
    cap_cpu = sum(s.cpu_capacity for s in net.servers)
    used_cpu = sum(sum(a.cpu_by_server.values()) for a in net.allocations.values())
    cap_bw = sum(l.bw_capacity for l in net.links)
    used_bw = sum(sum(a.bw_by_link.values()) for a in net.allocations.values())
    assert summary.cpu == pytest.approx(used_cpu / cap_cpu)
    assert summary.bw == pytest.approx(used_bw / cap_bw)
    assert 0.0 <= summary.cpu <= 1.0


# -- conservation property -------------------------------------------------

@settings(max_examples=60, deadline=None)
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(1, 4), st.integers(1, 4),
                          st.integers(0, 5)),
                min_size=1, max_size=40),
       st.randoms(use_true_random=False))
def test_conservation_under_random_interleaving(ops, pyrandom):
    net = make_net([(12, 12)] * 4, [(0, 4, 20), (1, 4, 20), (2, 5, 20), (3, 5, 20),
                                    (4, 5, 20)], switch_ids=[4, 5])
    active = []
    next_id = 0
    for host_a, cpu, ram, bw in ops:
        if active and pyrandom.random() < 0.4:
            sid = active.pop(pyrandom.randrange(len(active)))
            release(net, sid)
        else:
            host_b = (host_a + 1) % 4
            nspr = make_nspr(next_id, vnfs=[(cpu, ram), (cpu, ram)], vlinks=[bw])
            result = assemble_decision(net, nspr, [host_a, host_b])
            if isinstance(result, PlacementDecision):
                allocate(net, next_id, result)
                active.append(next_id)
                next_id += 1
        assert conservation_ok(net)
    for sid in list(active):
        release(net, sid)
    assert conservation_ok(net)
    assert all(s.cpu_available == s.cpu_capacity for s in net.servers)
    assert all(l.bw_available == l.bw_capacity for l in net.links)
