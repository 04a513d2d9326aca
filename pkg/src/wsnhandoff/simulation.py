"""Event-driven run of one scenario: mobility, coverage checks, discovery
floods, distance-vector chatter, queue transit, handoffs and the counter
ledger, all on the deterministic event queue.

Frame life cycle: a protocol handler calls _send(), which books the
transport/IP counters and drops the frame into the node's network queue
(strict-priority on motes, plain FIFO elsewhere).  A drain event serialises
the node's transmissions one tx_slot apart; transmit() books the PHY/MAC
counters, classifies the reception for every receiver against the radio
model and schedules per-receiver delivery one hop_delay later.  Steered
beams and satellite links are logical channels: their frames always arrive.

The dispatch log (one line per event) is hashed into the report digest, so
two runs of the same scenario and seed must match byte for byte.
"""

import hashlib
from dataclasses import dataclass, field

from .engine import EventQueue, RngStream
from .protocol import (DecisionOutcome, DiscoveryRequest, Escalation,
                       FloodToMotes, LinkRecord, MoteMode, MoteState,
                       MscDecision, RequestIdSource, UnicastToBs,
                       bs_notify_msc, detect_loss, establish_link,
                       make_discovery, mote_forward, msc_decide,
                       release_motes)
from .queues import FifoQueue, Packet, StrictPriorityQueue
from .routing import (RouteUpdate, RoutingLoopError, UnreachableError,
                      apply_update, init_table, periodic_update,
                      shortest_path)
from .scenario import Scenario, effective_profile
from .stats import CounterKey, Layer, StatsLedger
from .world import (NodeKind, PacketOutcome, comm_graph, halt_time,
                    packet_outcome, position_at, received_power)

FRAME_SIZES = {"discovery": 64, "dv": 96, "payload": 512,
               "sat_request": 64, "sat_grant": 64,
               "sat_page": 64, "sat_ack": 64}
CONTROL_CLASS = 0
PAYLOAD_CLASS = 1
DEFAULT_IP_TTL = 16


@dataclass
class Frame:
    frame_id: int
    kind: str
    src: str
    dst: str = None          # None means broadcast
    targets: tuple = ()      # receivers of a broadcast, fixed at emission
    payload: object = None
    priority_class: int = CONTROL_CLASS
    ip_ttl: int = DEFAULT_IP_TTL
    channel: str = "radio"   # radio | steered | satlink
    relay: bool = False      # satellite forwards this traffic to the core


@dataclass
class MsState:
    pending_request: int = None
    pending_deadline: float = 0.0
    awaiting_link: bool = False
    link: LinkRecord = None
    links: list = field(default_factory=list)
    failed_after_halt: int = 0


@dataclass
class RunReport:
    ledger: StatsLedger
    links: tuple
    mote_energy: dict        # mote id -> (energy units, "active"|"sleeping")
    digest: str
    events_processed: int
    decisions: tuple         # (ms_id, MscDecision) in decision order
    escalations: tuple       # Escalation in arrival order at the msc
    dv_paths: tuple          # per link: converged hop route or None


class Simulation:
    def __init__(self, scenario: Scenario):
        self.s = scenario
        self.p = scenario.params
        self.queue = EventQueue()
        self.rng = RngStream(scenario.seed)
        self.ledger = StatsLedger()
        self.log = []
        self.ids = RequestIdSource()
        self._next_packet_id = 1
        self._inflight = {}

        self.kinds = {n.node_id: n.kind for n in scenario.nodes}
        self.profiles = {n.node_id: effective_profile(n)
                         for n in scenario.nodes}
        self.start_pos = {n.node_id: n.position for n in scenario.nodes}
        self.mote_states = {n.node_id: MoteState()
                            for n in scenario.by_kind(NodeKind.MOTE)}
        self.ms_states = {n.node_id: MsState()
                          for n in scenario.by_kind(NodeKind.MOBILE_STATION)}
        self.bs_positions = {n.node_id: n.position
                             for n in scenario.by_kind(NodeKind.BASE_STATION)}
        self.bs_seen = {b: set() for b in self.bs_positions}
        sats = sorted(n.node_id for n in scenario.by_kind(NodeKind.SATELLITE))
        self.satellite_id = sats[0] if sats else None
        mscs = scenario.by_kind(NodeKind.MSC)
        self.msc_id = mscs[0].node_id if mscs else None

        self.node_queues = {}
        for n in scenario.nodes:
            if n.kind is NodeKind.MOTE:
                self.node_queues[n.node_id] = \
                    StrictPriorityQueue(self.p.queue_capacity)
            elif n.kind is not NodeKind.MSC:
                self.node_queues[n.node_id] = FifoQueue(self.p.queue_capacity)
        self._draining = {n: False for n in self.node_queues}

        # Motes and base stations never move, so their adjacency is fixed;
        # the static graph drives all flood forwarding decisions.
        self.static_graph = comm_graph(dict(self.start_pos), self.kinds,
                                       self.profiles, 0.0)
        self.mote_neighbors = {
            m: set(n for n in self.static_graph.neighbors(m)
                   if self.kinds[n] is NodeKind.MOTE)
            for m in self.mote_states}
        self.tables = {m: init_table(m) for m in sorted(self.mote_states)}

        self.msc_paths = {}        # request id -> escalated relay paths
        self.msc_decisions = {}    # request id -> MscDecision
        self.msc_established = set()
        self.links = []
        self.dv_paths = []
        self.decision_log = []
        self.escalation_log = []

    # ---- geometry helpers -------------------------------------------

    def position(self, node_id: str, t: float):
        path = self.s.mobility.get(node_id)
        if path is None:
            return self.start_pos[node_id]
        return position_at(path, self.start_pos[node_id], t)

    def halted(self, node_id: str, t: float) -> bool:
        path = self.s.mobility.get(node_id)
        if path is None:
            return True
        return t >= halt_time(path, self.start_pos[node_id])

    def graph_at(self, t: float):
        positions = {n: self.position(n, t) for n in self.start_pos}
        return comm_graph(positions, self.kinds, self.profiles, t)

    # ---- counter shorthand ------------------------------------------

    def count(self, layer: Layer, name: str, delta: int = 1):
        self.ledger.record(CounterKey(layer, name), delta)

    # ---- frame pipeline ---------------------------------------------

    def _send(self, node_id: str, frame: Frame):
        self.count(Layer.TRANSPORT_UDP, "packets_from_app")
        self.count(Layer.NET_IP, "out_requests")
        q = self.node_queues[node_id]
        pkt = Packet(self._next_packet_id, frame.src,
                     frame.dst or "*", frame.priority_class,
                     FRAME_SIZES[frame.kind])
        self._next_packet_id += 1
        is_mote = self.kinds[node_id] is NodeKind.MOTE
        if is_mote:
            self.count(Layer.NET_STRICT_PRIOR, "packets_queued")
        else:
            self.count(Layer.NET_FIFO, "packets_queued")
        result = q.enqueue(pkt)
        if not is_mote:
            self.ledger.record_peak(
                CounterKey(Layer.NET_FIFO, "peak_queue_size"), q.peak_size)
        if result.name == "ACCEPTED":
            self._inflight[pkt.packet_id] = frame
        if not self._draining[node_id]:
            self._draining[node_id] = True
            self.queue.schedule(self.queue.clock, node_id, ("drain", node_id))

    def _on_drain(self, t: float, node_id: str):
        q = self.node_queues[node_id]
        pkt = q.dequeue()
        if pkt is None:
            self._draining[node_id] = False
            return
        is_mote = self.kinds[node_id] is NodeKind.MOTE
        if is_mote:
            self.count(Layer.NET_STRICT_PRIOR, "packets_dequeued")
        else:
            self.count(Layer.NET_FIFO, "packets_dequeued")
        frame = self._inflight.pop(pkt.packet_id)
        asleep = (is_mote and
                  self.mote_states[node_id].mode is MoteMode.SLEEPING)
        if not asleep:
            self._transmit(t, node_id, frame)
        if len(q):
            self.queue.schedule(t + self.p.tx_slot, node_id,
                                ("drain", node_id))
        else:
            self._draining[node_id] = False

    def _transmit(self, t: float, node_id: str, frame: Frame):
        # discovery forwards pre-pay their energy inside mote_forward
        if (self.kinds[node_id] is NodeKind.MOTE
                and frame.kind != "discovery"):
            self.mote_states[node_id].energy_consumed += 1
        self.count(Layer.PHY_80211, "signals_transmitted")
        self.count(Layer.MAC_80211, "packets_from_network")
        self.count(Layer.MAC_LINK, "link_utilization")
        if frame.dst is None:
            self.count(Layer.MAC_80211, "broadcast_sent")
            self.count(Layer.MAC_DCF, "broadcast_sent")
            receivers = frame.targets
        else:
            if frame.channel == "satlink":
                self.count(Layer.MAC_SATCOM, "frames_sent")
            else:
                self.count(Layer.MAC_LINK, "frames_sent")
            receivers = (frame.dst,)
        src_pos = self.position(node_id, t)
        for rx in receivers:
            if frame.channel == "radio":
                d = src_pos.distance_to(self.position(rx, t))
                outcome = packet_outcome(self.profiles[rx],
                                         received_power(self.profiles[rx], d))
            else:
                outcome = PacketOutcome.DELIVERED
            self.queue.schedule(t + self.p.hop_delay, rx,
                                ("deliver", frame, rx, outcome))

    def _on_deliver(self, t: float, frame: Frame, rx: str,
                    outcome: PacketOutcome):
        if (self.kinds[rx] is NodeKind.MOTE
                and self.mote_states[rx].mode is MoteMode.SLEEPING):
            return  # radio powered down
        if outcome is PacketOutcome.LOST:
            return
        self.count(Layer.PHY_80211, "signals_locked")
        if outcome is PacketOutcome.ERRORED:
            self.count(Layer.PHY_80211, "signals_received_with_errors")
            return
        self.count(Layer.PHY_80211, "signals_received_forwarded_to_mac")
        if frame.dst is None:
            self.count(Layer.MAC_80211, "broadcast_received_clearly")
            self.count(Layer.MAC_DCF, "broadcast_received")
        elif frame.channel == "satlink":
            self.count(Layer.MAC_SATCOM, "frames_received")
        else:
            self.count(Layer.MAC_LINK, "frames_received")
        self.count(Layer.NET_IP, "in_received")
        self.count(Layer.NET_IP, "in_delivers")
        self.count(Layer.NET_IP, "in_delivers_ttl_sum", frame.ip_ttl)
        self.count(Layer.TRANSPORT_UDP, "packets_to_app")
        handler = getattr(self, f"_rx_{frame.kind}")
        handler(t, frame, rx)

    # ---- per-kind receive handlers ----------------------------------

    def _rx_discovery(self, t: float, frame: Frame, rx: str):
        req = frame.payload
        if self.kinds[rx] is NodeKind.BASE_STATION:
            esc = bs_notify_msc(rx, req, self.bs_seen[rx])
            if esc is not None and self.msc_id is not None:
                self.queue.schedule(t + self.p.backhaul_delay, self.msc_id,
                                    ("backhaul", esc))
            return
        actions = mote_forward(rx, self.mote_states[rx], req,
                               self.static_graph, self.kinds,
                               self.mote_states)
        for action in actions:
            if isinstance(action, UnicastToBs):
                self._send(rx, Frame(0, "discovery", rx, dst=action.bs_id,
                                     payload=action.request,
                                     ip_ttl=action.request.ttl))
            elif isinstance(action, FloodToMotes):
                self._send(rx, Frame(0, "discovery", rx,
                                     targets=action.targets,
                                     payload=action.request,
                                     ip_ttl=action.request.ttl))

    def _rx_dv(self, t: float, frame: Frame, rx: str):
        self.count(Layer.APP_BELLMAN_FORD, "update_packets_received")
        update = frame.payload
        changed = apply_update(self.tables[rx], update,
                               self.mote_neighbors[rx])
        if changed:
            self.count(Layer.APP_BELLMAN_FORD, "triggered_updates")
            self._broadcast_dv(rx, triggered=True)

    def _rx_payload(self, t: float, frame: Frame, rx: str):
        if self.kinds[rx] is NodeKind.SATELLITE and frame.relay:
            # bent-pipe to the switching centre
            self.count(Layer.MAC_SATCOM, "frames_relayed")
            self.count(Layer.MAC_SATCOM, "frames_sent")

    def _rx_sat_request(self, t: float, frame: Frame, rx: str):
        self._send(rx, Frame(0, "sat_grant", rx, dst=frame.src,
                             channel="satlink"))

    def _rx_sat_grant(self, t: float, frame: Frame, rx: str):
        pass  # link activation rides on its own establish event

    def _rx_sat_page(self, t: float, frame: Frame, rx: str):
        self._send(rx, Frame(0, "sat_ack", rx, dst=frame.src,
                             channel="satlink"))

    def _rx_sat_ack(self, t: float, frame: Frame, rx: str):
        # forward the confirmation to the switching centre
        self.count(Layer.MAC_SATCOM, "frames_relayed")
        self.count(Layer.MAC_SATCOM, "frames_sent")

    # ---- distance-vector plumbing -----------------------------------

    def _broadcast_dv(self, mote: str, triggered: bool):
        targets = tuple(n for n in sorted(self.mote_neighbors[mote])
                        if self.mote_states[n].mode is MoteMode.ACTIVE)
        if not targets:
            return
        update = periodic_update(self.tables[mote], triggered)
        self._send(mote, Frame(0, "dv", mote, targets=targets,
                               payload=update))

    def _on_dv_send(self, t: float, mote: str):
        if self.mote_states[mote].mode is MoteMode.SLEEPING:
            return
        self._broadcast_dv(mote, triggered=False)
        self.queue.schedule(t + self.p.dv_period, mote, ("dv_send", mote))

    # ---- coverage checks and the handoff state machine ---------------

    def _on_coverage(self, t: float):
        graph = self.graph_at(t)
        for ms_id in sorted(self.ms_states):
            self._check_ms(t, ms_id, graph)
        nxt = t + self.p.coverage_check_period
        if nxt <= self.s.duration:
            self.queue.schedule(nxt, "sim", ("coverage",))

    def _check_ms(self, t: float, ms_id: str, graph):
        st = self.ms_states[ms_id]
        if st.link is not None:
            if st.link.endpoint.kind is NodeKind.BASE_STATION:
                bs_pos = self.bs_positions[st.link.endpoint.node_id]
                if (bs_pos.distance_to(self.position(ms_id, t))
                        > self.p.max_steer_range):
                    st.link = None  # walked out of the steered beam
            if st.link is not None:
                return
        if st.awaiting_link:
            return
        if st.pending_request is not None:
            if t < st.pending_deadline:
                return
            st.pending_request = None  # discovery went unanswered
            if self.halted(ms_id, t):
                st.failed_after_halt += 1
        if not detect_loss(ms_id, graph, self.kinds):
            return
        motes = [m for m in graph.neighbors(ms_id)
                 if self.kinds[m] is NodeKind.MOTE
                 and self.mote_states[m].mode is MoteMode.ACTIVE]
        halted = self.halted(ms_id, t)
        if motes and not (halted and st.failed_after_halt > 0):
            req = make_discovery(ms_id, self.position(ms_id, t), motes,
                                 self.ids, self.p.default_ttl)
            st.pending_request = req.request_id
            st.pending_deadline = t + self.p.discovery_timeout
            self._send(ms_id, Frame(0, "discovery", ms_id,
                                    targets=tuple(motes), payload=req,
                                    ip_ttl=req.ttl))
        elif halted and self.satellite_id is not None:
            # persistent isolation once the walk is over: go to satellite
            self._direct_satellite_fallback(t, ms_id)

    def _direct_satellite_fallback(self, t: float, ms_id: str):
        st = self.ms_states[ms_id]
        decision = MscDecision(self.ids.next_id(),
                               DecisionOutcome.SATELLITE_FALLBACK)
        self.decision_log.append((ms_id, decision))
        record = establish_link(decision, ms_id, (), t,
                                self.p.steering_delay,
                                self.p.satellite_acquisition_delay,
                                self.satellite_id)
        st.awaiting_link = True
        self._send(ms_id, Frame(0, "sat_request", ms_id,
                                dst=self.satellite_id, channel="satlink"))
        self.queue.schedule(record.established_at, ms_id,
                            ("establish", ms_id, record,
                             decision.request_id))

    # ---- escalation, decision, establishment ------------------------

    def _on_backhaul(self, t: float, esc: Escalation):
        self.escalation_log.append(esc)
        paths = self.msc_paths.setdefault(esc.request_id, [])
        paths.append(esc.relay_path)
        if esc.request_id in self.msc_established:
            release_motes(esc.relay_path, self.mote_states)
            return
        if esc.request_id in self.msc_decisions:
            return  # duplicate from a second base station
        decision = msc_decide(esc.request_id, esc.ms_location,
                              self.bs_positions, self.p.max_steer_range,
                              self.satellite_id is not None)
        self.msc_decisions[esc.request_id] = decision
        self.decision_log.append((esc.ms_id, decision))
        st = self.ms_states[esc.ms_id]
        if st.link is not None:
            return  # stale answer, the mobile is already served
        st.pending_request = None
        st.awaiting_link = True
        record = establish_link(decision, esc.ms_id, esc.relay_path, t,
                                self.p.steering_delay,
                                self.p.satellite_acquisition_delay,
                                self.satellite_id)
        if decision.outcome is DecisionOutcome.SATELLITE_FALLBACK:
            self.queue.schedule(t + self.p.backhaul_delay, self.satellite_id,
                                ("sat_locate", esc.ms_id))
        self.queue.schedule(record.established_at, esc.ms_id,
                            ("establish", esc.ms_id, record,
                             esc.request_id))

    def _on_sat_locate(self, t: float, ms_id: str):
        # the switching centre uplinks the mobile's location; the satellite
        # relays it down as a page
        self.count(Layer.MAC_SATCOM, "frames_received")
        self.count(Layer.MAC_SATCOM, "frames_relayed")
        self._send(self.satellite_id, Frame(0, "sat_page", self.satellite_id,
                                            dst=ms_id, channel="satlink"))

    def _on_establish(self, t: float, ms_id: str, record: LinkRecord,
                      request_id: int):
        st = self.ms_states[ms_id]
        st.awaiting_link = False
        if st.link is not None:
            return
        st.link = record
        st.links.append(record)
        self.links.append(record)
        self.dv_paths.append(self._dv_route(record))
        self.msc_established.add(request_id)
        for path in self.msc_paths.get(request_id, []):
            release_motes(path, self.mote_states)
        self.queue.schedule(t + self.p.app_interval, ms_id,
                            ("app", ms_id, record.established_at))

    def _dv_route(self, record: LinkRecord):
        """Converged-table route between the relay path's endpoints, kept
        beside the flood-discovered path for comparison."""
        if len(record.relay_path) < 2:
            return None
        try:
            return tuple(shortest_path(self.tables, record.relay_path[0],
                                       record.relay_path[-1]))
        except (UnreachableError, RoutingLoopError):
            return None

    def _on_app(self, t: float, ms_id: str, link_stamp: float):
        st = self.ms_states[ms_id]
        if st.link is None or st.link.established_at != link_stamp:
            return  # that link is gone; a new one starts its own cycle
        if st.link.endpoint.kind is NodeKind.SATELLITE:
            frame = Frame(0, "payload", ms_id, dst=st.link.endpoint.node_id,
                          priority_class=PAYLOAD_CLASS, channel="satlink",
                          relay=bool(st.link.relay_path))
        else:
            frame = Frame(0, "payload", ms_id, dst=st.link.endpoint.node_id,
                          priority_class=PAYLOAD_CLASS, channel="steered")
        self._send(ms_id, frame)
        nxt = t + self.p.app_interval
        if nxt <= self.s.duration:
            self.queue.schedule(nxt, ms_id, ("app", ms_id, link_stamp))

    # ---- main loop ----------------------------------------------------

    def _dispatch(self, ev):
        payload = ev.payload
        self.log.append(f"{ev.fire_time:.6f} {ev.seq} {ev.target} "
                        f"{payload[0]}")
        kind = payload[0]
        if kind == "coverage":
            self._on_coverage(ev.fire_time)
        elif kind == "drain":
            self._on_drain(ev.fire_time, payload[1])
        elif kind == "deliver":
            self._on_deliver(ev.fire_time, payload[1], payload[2],
                             payload[3])
        elif kind == "dv_send":
            self._on_dv_send(ev.fire_time, payload[1])
        elif kind == "backhaul":
            self._on_backhaul(ev.fire_time, payload[1])
        elif kind == "sat_locate":
            self._on_sat_locate(ev.fire_time, payload[1])
        elif kind == "establish":
            self._on_establish(ev.fire_time, payload[1], payload[2],
                               payload[3])
        elif kind == "app":
            self._on_app(ev.fire_time, payload[1], payload[2])
        else:
            raise RuntimeError(f"unknown event {kind!r}")

    def run(self) -> RunReport:
        self.queue.schedule(0.0, "sim", ("coverage",))
        for mote in sorted(self.mote_states):
            self.queue.schedule(self.rng.draw() * self.p.dv_period, mote,
                                ("dv_send", mote))
        processed = self.queue.run_until(self.s.duration, self._dispatch)
        digest = hashlib.sha256("\n".join(self.log).encode()).hexdigest()
        energy = {m: (st.energy_consumed, st.mode.value)
                  for m, st in sorted(self.mote_states.items())}
        return RunReport(self.ledger, tuple(self.links), energy, digest,
                         processed, tuple(self.decision_log),
                         tuple(self.escalation_log), tuple(self.dv_paths))


def run(scenario: Scenario) -> RunReport:
    return Simulation(scenario).run()


# ---- report file round trip ------------------------------------------

def serialize_report(report: RunReport) -> str:
    from .stats import REGISTRY
    lines = [f"{key.token()}={report.ledger.get(key)}" for key in REGISTRY]
    for link in report.links:
        path = ",".join(link.relay_path) if link.relay_path else "-"
        endpoint = f"{link.endpoint.kind.value}:{link.endpoint.node_id}"
        lines.append(f"link {link.ms_id} {endpoint} "
                     f"{link.established_at:.6f} {path}")
    for mote, (units, mode) in report.mote_energy.items():
        lines.append(f"energy {mote} {units} {mode}")
    lines.append(f"digest {report.digest}")
    return "\n".join(lines) + "\n"


def parse_report_ledger(text: str) -> StatsLedger:
    """Rebuild the counter ledger from a report file.

    Raises RegistryMismatchError when counters are missing, repeated or
    unknown, so reports from incompatible builds cannot be compared.
    """
    from .stats import REGISTRY, RegistryMismatchError, counter_by_token
    from .stats import UnknownCounterError
    ledger = StatsLedger()
    seen = set()
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith(("link ", "energy ", "digest ")):
            continue
        if "=" not in line:
            raise RegistryMismatchError(f"unparseable report line {line!r}")
        token, _, value = line.partition("=")
        try:
            key = counter_by_token(token.strip())
        except UnknownCounterError:
            raise RegistryMismatchError(f"unknown counter {token!r}") from None
        if key in seen:
            raise RegistryMismatchError(f"duplicate counter {token!r}")
        seen.add(key)
        ledger.record(key, int(value))
    missing = [k.token() for k in REGISTRY if k not in seen]
    if missing:
        raise RegistryMismatchError(f"missing counters: {missing}")
    return ledger
