"""Handoff control plane: coverage-loss detection, discovery flooding over
the mote mesh, escalation to the switching centre, steering/satellite
decisions, link establishment and mote release.

The flow mirrors one handoff round trip: a mobile station that hears no
base station broadcasts a discovery request; active motes flood it (TTL
guarded, duplicate suppressed, path accumulating) until some mote with a
base station in range hands it over; the base station escalates to the
switching centre, which steers the nearest feasible base station onto the
mobile or falls back to a satellite link; once the link is up, every mote
on the delivered path goes to sleep to save its battery.
"""

from dataclasses import dataclass, field, replace
from enum import Enum

from .world import NodeKind, Point

DEFAULT_TTL = 16
ENERGY_PER_TX = 1


class NoMotesInRangeError(RuntimeError):
    """The mobile station is totally isolated: no active mote can hear it."""


class NoSatelliteError(RuntimeError):
    """Fallback required but the scenario deploys no satellite."""


@dataclass(frozen=True)
class DiscoveryRequest:
    request_id: int
    ms_id: str
    ms_location: Point
    ttl: int
    path: tuple = ()


class MoteMode(Enum):
    ACTIVE = "active"
    SLEEPING = "sleeping"


@dataclass
class MoteState:
    mode: MoteMode = MoteMode.ACTIVE
    seen: set = field(default_factory=set)
    energy_consumed: int = 0


class RequestIdSource:
    """Per-simulation counter handing out distinct request ids from 1."""

    def __init__(self):
        self._next = 1

    def next_id(self) -> int:
        rid = self._next
        self._next += 1
        return rid


@dataclass(frozen=True)
class UnicastToBs:
    bs_id: str
    request: DiscoveryRequest


@dataclass(frozen=True)
class FloodToMotes:
    targets: tuple
    request: DiscoveryRequest


@dataclass(frozen=True)
class Escalation:
    request_id: int
    ms_id: str
    ms_location: Point
    relay_path: tuple
    bs_id: str


class DecisionOutcome(Enum):
    STEER = "steer"
    SATELLITE_FALLBACK = "satellite_fallback"


@dataclass(frozen=True)
class MscDecision:
    request_id: int
    outcome: DecisionOutcome
    bs_id: str = None


@dataclass(frozen=True)
class LinkEndpoint:
    kind: NodeKind
    node_id: str


@dataclass(frozen=True)
class LinkRecord:
    ms_id: str
    endpoint: LinkEndpoint
    established_at: float
    relay_path: tuple = ()


def detect_loss(ms_id: str, graph, kinds: dict) -> bool:
    """True when no base station is adjacent to the mobile station."""
    return not any(kinds[n] is NodeKind.BASE_STATION
                   for n in graph.neighbors(ms_id))


def make_discovery(ms_id: str, location: Point, adjacent_active_motes,
                   ids: RequestIdSource, ttl: int = DEFAULT_TTL) -> DiscoveryRequest:
    """Create a fresh discovery request for broadcast to nearby motes.

    Raises NoMotesInRangeError when the adjacency list is empty; total
    isolation is the caller's cue for a direct satellite fallback.
    """
    if not adjacent_active_motes:
        raise NoMotesInRangeError(f"{ms_id} hears no active motes")
    return DiscoveryRequest(ids.next_id(), ms_id, location, ttl)


def mote_forward(mote_id: str, state: MoteState, req: DiscoveryRequest,
                 graph, kinds: dict, mote_states: dict):
    """Process one received discovery copy at a mote.

    Returns a list of actions (UnicastToBs / FloodToMotes).  Sleeping
    motes, duplicates, exhausted TTLs and path revisits all produce no
    actions; the request id still lands in `seen` so later copies are
    recognised.  A forwarding mote appends itself to the path, decrements
    the TTL, pays one energy unit for the transmission, and either hands
    the request to an adjacent base station or re-floods it to adjacent
    active motes not already on the path.
    """
    duplicate = req.request_id in state.seen
    state.seen.add(req.request_id)
    if (state.mode is MoteMode.SLEEPING or duplicate
            or req.ttl == 0 or mote_id in req.path):
        return []
    fwd = replace(req, ttl=req.ttl - 1, path=req.path + (mote_id,))
    state.energy_consumed += ENERGY_PER_TX
    bs_neighbors = sorted(n for n in graph.neighbors(mote_id)
                          if kinds[n] is NodeKind.BASE_STATION)
    if bs_neighbors:
        return [UnicastToBs(bs_neighbors[0], fwd)]
    targets = tuple(n for n in graph.neighbors(mote_id)
                    if kinds[n] is NodeKind.MOTE
                    and n not in fwd.path
                    and mote_states[n].mode is MoteMode.ACTIVE)
    # an empty target tuple still keys the radio once, hence the charge above
    return [FloodToMotes(targets, fwd)]


def bs_notify_msc(bs_id: str, req: DiscoveryRequest, seen_at_bs: set):
    """Escalate a delivered request to the switching centre, once per id.

    `seen_at_bs` is the base station's memory of request ids already
    escalated; duplicates return None.
    """
    if req.request_id in seen_at_bs:
        return None
    seen_at_bs.add(req.request_id)
    return Escalation(req.request_id, req.ms_id, req.ms_location,
                      req.path, bs_id)


def steer_feasible(bs_position: Point, ms_location: Point,
                   max_steer_range: float) -> bool:
    """Can this base station's steerable beam reach the mobile station?"""
    return bs_position.distance_to(ms_location) <= max_steer_range


def msc_decide(request_id: int, ms_location: Point, bs_set: dict,
               max_steer_range: float, has_satellite: bool) -> MscDecision:
    """Pick the nearest steer-feasible base station, else satellite.

    bs_set maps base station id to Point; ties on distance break on the
    smaller id.  Raises NoSatelliteError when fallback is needed but the
    scenario has no satellite.
    """
    feasible = [(ms_location.distance_to(p), b)
                for b, p in sorted(bs_set.items())
                if steer_feasible(p, ms_location, max_steer_range)]
    if feasible:
        _, best = min(feasible)
        return MscDecision(request_id, DecisionOutcome.STEER, best)
    if not has_satellite:
        raise NoSatelliteError(
            f"request {request_id}: no feasible base station and no satellite")
    return MscDecision(request_id, DecisionOutcome.SATELLITE_FALLBACK)


def establish_link(decision: MscDecision, ms_id: str, relay_path: tuple,
                   decided_at: float, steering_delay: float,
                   satellite_acquisition_delay: float,
                   satellite_id: str = None) -> LinkRecord:
    """Turn a decision into a link record with the configured setup delay."""
    if decision.outcome is DecisionOutcome.STEER:
        endpoint = LinkEndpoint(NodeKind.BASE_STATION, decision.bs_id)
        at = decided_at + steering_delay
    else:
        if satellite_id is None:
            raise NoSatelliteError("satellite fallback without a satellite id")
        endpoint = LinkEndpoint(NodeKind.SATELLITE, satellite_id)
        at = decided_at + satellite_acquisition_delay
    return LinkRecord(ms_id, endpoint, at, tuple(relay_path))


def release_motes(path, mote_states: dict):
    """Put every mote on a delivered relay path to sleep.

    Sleeping freezes energy_consumed; motes not on the path are untouched
    and re-releasing an already sleeping mote is a no-op.
    """
    for m in path:
        mote_states[m].mode = MoteMode.SLEEPING
