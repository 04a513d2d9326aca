"""Acceptance gate: the seven headline properties of the simulator.

Each test prints one `criterion N (...): PASS/FAIL` line (run pytest with
-s to see them) and enforces its own wall-clock budget.  The file is
self-contained on purpose: it re-derives its oracles instead of importing
them from the other test modules.
"""

import dataclasses
import random
import time
from collections import deque

import pytest

from wsnhandoff.protocol import DecisionOutcome, detect_loss
from wsnhandoff.queues import Packet, StrictPriorityQueue
from wsnhandoff.routing import (INFINITY_METRIC, apply_update, init_table,
                                periodic_update)
from wsnhandoff.scenario import (NodeSpec, Scenario, effective_profile,
                                 reference_scenario, strip_wsn,
                                 validate_scenario)
from wsnhandoff.simulation import run, serialize_report
from wsnhandoff.stats import (DEFAULT_DIRECTIONS, REGISTRY, Direction,
                              StatsLedger, classify, counter_by_token,
                              qos_improvement)
from wsnhandoff.world import (NodeKind, Point, comm_graph, halt_time,
                              position_at, profile_for_range)


def _gate(n, label, budget_s, body):
    t0 = time.monotonic()
    try:
        body()
        elapsed = time.monotonic() - t0
        assert elapsed < budget_s, \
            f"budget exceeded: {elapsed:.1f}s >= {budget_s}s"
    except BaseException:
        print(f"criterion {n} ({label}): FAIL")
        raise
    print(f"criterion {n} ({label}): PASS [{elapsed:.1f}s]")


# ---- 1. QoS arithmetic ----------------------------------------------------


def test_criterion_1_qos_arithmetic():
    def body():
        # the reference comparison: 11 significant improvements, 4
        # significant regressions (errors up from nil, satcom receptions
        # down, both queue families growing), 13 unmoved counters
        errors = counter_by_token("phy80211.signals_received_with_errors")
        sat_rx = counter_by_token("mac_satcom.frames_received")
        sp_q = counter_by_token("net_strict_prior.packets_queued")
        fifo_q = counter_by_token("net_fifo.packets_queued")
        base, cand = StatsLedger(), StatsLedger()
        improvers = [k for k in REGISTRY
                     if DEFAULT_DIRECTIONS[k] is Direction.GOOD_INCREASING
                     and k != sat_rx][:11]
        assert len(improvers) == 11
        for k in improvers:
            cand.record(k, 10)
        cand.record(errors, 6)
        base.record(sat_rx, 13)
        cand.record(sat_rx, 6)
        cand.record(sp_q, 8)
        cand.record(fifo_q, 8)
        c = classify(base, cand)
        assert (c.desirable, c.undesirable, c.insignificant) == (11, 4, 13)
        assert qos_improvement(c) == pytest.approx(73.33, abs=0.01)

    _gate(1, "qos arithmetic 11/4/13 -> 73.33%", 5.0, body)


# ---- 2. reference-scenario behavior ---------------------------------------


def test_criterion_2_reference_scenario_behavior():
    def body():
        s = reference_scenario()
        positions = {n.node_id: n.position for n in s.nodes}
        kinds = {n.node_id: n.kind for n in s.nodes}
        profiles = {n.node_id: effective_profile(n) for n in s.nodes}

        # (a) both walkers are out of cell coverage at their halt points
        for ms_id in ("ms1", "ms2"):
            t = halt_time(s.mobility[ms_id], positions[ms_id])
            at_halt = dict(positions)
            for other in ("ms1", "ms2"):
                at_halt[other] = position_at(s.mobility[other],
                                             positions[other], t)
            g = comm_graph(at_halt, kinds, profiles, t)
            assert detect_loss(ms_id, g, kinds), ms_id

        rep = run(s)

        # (b) the switching layer decided on satellite fallback for both
        fallback = {ms for ms, d in rep.decisions
                    if d.outcome is DecisionOutcome.SATELLITE_FALLBACK}
        assert fallback == {"ms1", "ms2"}

        # (c) both hold satellite links by the end of the run
        final = {}
        for link in rep.links:
            final[link.ms_id] = link
        assert final["ms1"].endpoint.kind is NodeKind.SATELLITE
        assert final["ms2"].endpoint.kind is NodeKind.SATELLITE

        # (d) every mote on a delivered request path sleeps on frozen energy
        path_motes = {m for link in rep.links for m in link.relay_path}
        assert path_motes
        longer = run(dataclasses.replace(s, duration=s.duration + 30.0))
        for m in path_motes:
            units, mode = rep.mote_energy[m]
            assert mode == "sleeping", m
            assert longer.mote_energy[m] == (units, "sleeping"), m

    _gate(2, "reference scenario: loss, fallback, sleep", 10.0, body)


# ---- 3. direction reproduction over seeds ----------------------------------


def test_criterion_3_directions_reproduce_across_seeds():
    def body():
        watched = ["phy80211.signals_transmitted",
                   "mac80211.broadcast_sent",
                   "mac_satcom.frames_relayed",
                   "app_bellman_ford.triggered_updates",
                   "app_bellman_ford.update_packets_received"]
        keys = [counter_by_token(t) for t in watched]
        s = reference_scenario()
        for seed in range(1, 11):
            with_wsn = run(dataclasses.replace(s, seed=seed))
            without = run(dataclasses.replace(strip_wsn(s), seed=seed))
            for token, key in zip(watched, keys):
                a, b = with_wsn.ledger.get(key), without.ledger.get(key)
                assert a > b, f"seed {seed}: {token} {a} !> {b}"

    _gate(3, "five counters strictly higher with motes, 10 seeds", 60.0,
          body)


# ---- 4. flooding vs breadth-first search -----------------------------------

_R = 120.0


def _unit_disk(rng, n_motes):
    profile = profile_for_range(_R)
    side = rng.choice([300.0, 450.0, 600.0])
    while True:
        nodes = [NodeSpec("bs1", NodeKind.BASE_STATION,
                          Point(round(rng.uniform(0, side), 2),
                                round(rng.uniform(0, side), 2)), profile)]
        for i in range(n_motes):
            nodes.append(NodeSpec(f"m{i:02d}", NodeKind.MOTE,
                                  Point(round(rng.uniform(0, side), 2),
                                        round(rng.uniform(0, side), 2)),
                                  profile))
        ms_pos = Point(round(rng.uniform(0, side), 2),
                       round(rng.uniform(0, side), 2))
        if ms_pos.distance_to(nodes[0].position) <= _R:
            continue
        if len({n.position for n in nodes} | {ms_pos}) != len(nodes) + 1:
            continue
        nodes.append(NodeSpec("ms1", NodeKind.MOBILE_STATION, ms_pos,
                              profile))
        nodes.append(NodeSpec("sat1", NodeKind.SATELLITE,
                              Point(-500.0, -500.0), profile))
        nodes.append(NodeSpec("msc1", NodeKind.MSC, Point(-400.0, -600.0)))
        s = Scenario(tuple(sorted(nodes, key=lambda n: n.node_id)), {},
                     duration=3.0, seed=rng.randrange(2**32))
        validate_scenario(s)
        return s


def _bfs_reaches_bs(s, ttl=16):
    pos = {n.node_id: n.position for n in s.nodes}
    motes = [n.node_id for n in s.nodes if n.kind is NodeKind.MOTE]
    near = lambda a, b: pos[a].distance_to(pos[b]) <= _R
    frontier = deque((m, 1) for m in motes if near("ms1", m))
    seen = {m for m, _ in frontier}
    while frontier:
        m, hops = frontier.popleft()
        if near(m, "bs1"):
            return True
        if hops == ttl:
            continue
        for other in motes:
            if other not in seen and near(m, other):
                seen.add(other)
                frontier.append((other, hops + 1))
    return False


def _line(n_motes):
    profile = profile_for_range(_R)
    nodes = [NodeSpec("ms1", NodeKind.MOBILE_STATION, Point(0.0, 0.0),
                      profile),
             NodeSpec("bs1", NodeKind.BASE_STATION,
                      Point(100.0 * (n_motes + 1), 0.0), profile),
             NodeSpec("sat1", NodeKind.SATELLITE, Point(0.0, 900.0),
                      profile),
             NodeSpec("msc1", NodeKind.MSC, Point(-50.0, -50.0))]
    for i in range(n_motes):
        nodes.append(NodeSpec(f"m{i:02d}", NodeKind.MOTE,
                              Point(100.0 * (i + 1), 0.0), profile))
    return Scenario(tuple(sorted(nodes, key=lambda n: n.node_id)), {},
                    duration=3.0, seed=4)


def test_criterion_4_flooding_matches_bfs_oracle():
    def body():
        rng = random.Random(20260815)
        scenarios = [_unit_disk(rng, rng.randint(0, 20)) for _ in range(50)]
        scenarios += [_line(16), _line(17)]  # exact ttl boundary
        reachable_count = 0
        for s in scenarios:
            reachable = _bfs_reaches_bs(s)
            reachable_count += reachable
            rep = run(s)
            delivered = [e for e in rep.escalations if e.bs_id == "bs1"]
            assert bool(delivered) == reachable
            pos = {n.node_id: n.position for n in s.nodes}
            for esc in delivered:
                path = esc.relay_path
                assert 0 < len(path) <= 16
                assert len(set(path)) == len(path)
                assert pos["ms1"].distance_to(pos[path[0]]) <= _R
                assert pos[path[-1]].distance_to(pos["bs1"]) <= _R
                for a, b in zip(path, path[1:]):
                    assert pos[a].distance_to(pos[b]) <= _R
        assert 5 <= reachable_count <= 47  # both sides of the iff exercised

    _gate(4, "flood delivery iff <=16-hop path, 52 scenarios", 30.0, body)


# ---- 5. distance-vector vs BFS ---------------------------------------------


def test_criterion_5_distance_vector_equals_bfs():
    def body():
        rng = random.Random(5150)
        for round_no in range(30):
            n = rng.randint(2, 12)
            names = [f"n{i}" for i in range(n)]
            adj = {m: set() for m in names}
            for i in range(n):
                for j in range(i + 1, n):
                    if rng.random() < 0.3:
                        adj[names[i]].add(names[j])
                        adj[names[j]].add(names[i])
            tables = {m: init_table(m) for m in names}
            for _ in range(n + 2):
                updates = {m: periodic_update(tables[m]) for m in names}
                changed = False
                for m in sorted(names):
                    for nb in sorted(adj[m]):
                        if apply_update(tables[m], updates[nb], adj[m]):
                            changed = True
                if not changed:
                    break
            for src in names:
                # breadth-first hop counts as the oracle
                dist = {src: 0}
                dq = deque([src])
                while dq:
                    u = dq.popleft()
                    for v in adj[u]:
                        if v not in dist:
                            dist[v] = dist[u] + 1
                            dq.append(v)
                for dst in names:
                    want = min(dist.get(dst, INFINITY_METRIC),
                               INFINITY_METRIC)
                    assert tables[src].metric(dst) == want, (src, dst)
            # idempotence at quiescence
            for m in sorted(names):
                up = periodic_update(tables[m])
                for nb in sorted(adj[m]):
                    assert apply_update(tables[nb], up, adj[nb]) == set()

    _gate(5, "converged metrics equal BFS hops, 30 graphs", 30.0, body)


# ---- 6. determinism ---------------------------------------------------------


def test_criterion_6_identical_runs_are_byte_identical():
    def body():
        s = reference_scenario()
        a, b = run(s), run(s)
        assert a.digest == b.digest
        assert serialize_report(a) == serialize_report(b)

    _gate(6, "same scenario and seed, byte-identical reports", 20.0, body)


# ---- 7. queue properties -----------------------------------------------------


def test_criterion_7_queue_trace_properties():
    def body():
        rng = random.Random(86)
        q = StrictPriorityQueue(capacity_per_class=4)
        lanes = [[], [], []]  # reference model
        attempts = taken = lost = 0
        peaks = [0, 0, 0]
        for op in range(1000):
            if rng.random() < 0.6:
                pkt = Packet(op, "s", "d", rng.randrange(3), 64)
                attempts += 1
                lane = lanes[pkt.priority_class]
                if len(lane) >= 4:
                    lost += 1
                    assert q.enqueue(pkt).value == "dropped"
                else:
                    lane.append(pkt)
                    peaks[pkt.priority_class] = max(
                        peaks[pkt.priority_class], len(lane))
                    assert q.enqueue(pkt).value == "accepted"
            else:
                lowest = next((i for i, lane in enumerate(lanes) if lane),
                              None)
                got = q.dequeue()
                if lowest is None:
                    assert got is None
                else:
                    taken += 1
                    # strict priority: never serve k while j < k waits
                    assert got == lanes[lowest].pop(0)
            assert q.queued == q.dequeued + q.dropped + len(q)
            assert (q.queued, q.dequeued, q.dropped) == \
                (attempts, taken, lost)
            assert q.peak_size == max(peaks)

    _gate(7, "1000-op trace: priority, conservation, peak", 5.0, body)
