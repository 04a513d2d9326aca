"""Geometry, node kinds, radio propagation and the communication graph.

Positions live on a 2-D plane in metres.  Received power follows the
log-distance path loss model

    rx_dbm = tx_power_dbm - reference_loss_db - 10 * exponent * log10(d)

and a link between two nodes exists only when each end would hear the other
under its own profile, i.e. the more restrictive of the two range radii
decides.  Satellites are a special case: their coverage is global, so they
are adjacent to every radio-bearing node regardless of geometry.  Switching
centres have no radio at all and never appear on an edge.
"""

import math
from dataclasses import dataclass
from enum import Enum


class ZeroDistanceError(ValueError):
    """Path loss is undefined at zero distance."""


class CoLocatedError(ValueError):
    """Two nodes share the exact same position."""


@dataclass(frozen=True)
class Point:
    x: float
    y: float

    def distance_to(self, other: "Point") -> float:
        return math.hypot(self.x - other.x, self.y - other.y)


class NodeKind(Enum):
    MOBILE_STATION = "mobile_station"
    BASE_STATION = "base_station"
    MOTE = "mote"
    SATELLITE = "satellite"
    MSC = "msc"


@dataclass(frozen=True)
class RadioProfile:
    tx_power_dbm: float
    sensitivity_dbm: float
    error_margin_db: float = 0.0
    path_loss_exponent: float = 2.0
    reference_loss_db: float = 40.0

    def __post_init__(self):
        if self.error_margin_db < 0:
            raise ValueError("error_margin_db must be >= 0")
        if not 1.0 <= self.path_loss_exponent <= 6.0:
            raise ValueError("path_loss_exponent out of plausible range")

    def range_radius(self) -> float:
        """Distance at which received power equals sensitivity exactly."""
        exp = (self.tx_power_dbm - self.reference_loss_db
               - self.sensitivity_dbm) / (10.0 * self.path_loss_exponent)
        return 10.0 ** exp


def profile_for_range(radius: float, tx_power_dbm: float = 0.0,
                      reference_loss_db: float = 40.0,
                      path_loss_exponent: float = 2.0,
                      error_margin_db: float = 0.0) -> RadioProfile:
    """Build a profile whose range_radius() is exactly `radius`."""
    sens = (tx_power_dbm - reference_loss_db
            - 10.0 * path_loss_exponent * math.log10(radius))
    return RadioProfile(tx_power_dbm, sens, error_margin_db,
                        path_loss_exponent, reference_loss_db)


def received_power(profile: RadioProfile, distance: float) -> float:
    if distance == 0:
        raise ZeroDistanceError("received power undefined at distance 0")
    return (profile.tx_power_dbm - profile.reference_loss_db
            - 10.0 * profile.path_loss_exponent * math.log10(distance))


def in_range(a: Point, b: Point, profile: RadioProfile) -> bool:
    """True when b hears a under `profile` (boundary inclusive)."""
    return received_power(profile, a.distance_to(b)) >= profile.sensitivity_dbm


class PacketOutcome(Enum):
    DELIVERED = "delivered"
    ERRORED = "errored"
    LOST = "lost"


def packet_outcome(profile: RadioProfile, rx_power_dbm: float) -> PacketOutcome:
    """Classify a reception.

    Below sensitivity the radio never locks; inside the error margin the
    frame locks but is corrupt and must not be handed to the MAC layer.
    """
    if rx_power_dbm < profile.sensitivity_dbm:
        return PacketOutcome.LOST
    if rx_power_dbm < profile.sensitivity_dbm + profile.error_margin_db:
        return PacketOutcome.ERRORED
    return PacketOutcome.DELIVERED


@dataclass(frozen=True)
class MobilityPath:
    """Waypoint route walked at constant speed, frozen at the halt point.

    The route is the polyline from the node's start position through the
    waypoints.  Once arc-length progress reaches halt_fraction of the total
    route length the position stays at that point forever.
    """
    waypoints: tuple
    speed: float
    halt_fraction: float = 0.5

    def __post_init__(self):
        if not self.waypoints:
            raise ValueError("mobility path needs at least one waypoint")
        if self.speed <= 0:
            raise ValueError("speed must be positive")
        if not 0.0 < self.halt_fraction <= 1.0:
            raise ValueError("halt_fraction must be in (0, 1]")


def _route_points(path: MobilityPath, start: Point) -> list:
    pts = [start]
    for wp in path.waypoints:
        if wp != pts[-1]:
            pts.append(wp)
    return pts


def route_length(path: MobilityPath, start: Point) -> float:
    pts = _route_points(path, start)
    return sum(pts[i].distance_to(pts[i + 1]) for i in range(len(pts) - 1))


def _point_at_arc(pts: list, s: float) -> Point:
    for i in range(len(pts) - 1):
        seg = pts[i].distance_to(pts[i + 1])
        if s <= seg:
            if seg == 0:
                return pts[i]
            f = s / seg
            return Point(pts[i].x + f * (pts[i + 1].x - pts[i].x),
                         pts[i].y + f * (pts[i + 1].y - pts[i].y))
        s -= seg
    return pts[-1]


def halt_time(path: MobilityPath, start: Point) -> float:
    """Time at which the node reaches its halt point and stops."""
    return path.halt_fraction * route_length(path, start) / path.speed


def position_at(path: MobilityPath, start: Point, t: float) -> Point:
    """Position after walking for t seconds; clamped at the halt point.

    The halt position is computed from the same arc-length walk as every
    other position, so position_at(t) for any t past the halt time returns
    the identical Point.
    """
    if t < 0:
        raise ValueError("time must be >= 0")
    total = route_length(path, start)
    halt_arc = path.halt_fraction * total
    s = min(path.speed * t, halt_arc)
    return _point_at_arc(_route_points(path, start), s)


class CommGraph:
    """Undirected adjacency snapshot of who can exchange frames at time t."""

    def __init__(self, t: float, adjacency: dict):
        self.t = t
        self._adj = adjacency

    def nodes(self) -> list:
        return sorted(self._adj)

    def neighbors(self, node_id: str) -> list:
        return sorted(self._adj[node_id])

    def has_edge(self, a: str, b: str) -> bool:
        return b in self._adj.get(a, ())


def comm_graph(positions: dict, kinds: dict, profiles: dict,
               t: float = 0.0) -> CommGraph:
    """Build the communication graph for one instant.

    positions/kinds/profiles map node id to Point / NodeKind / RadioProfile
    (profile may be None for nodes without a radio).  Raises CoLocatedError
    when two nodes occupy the same Point.
    """
    ids = sorted(positions)
    seen = {}
    for n in ids:
        p = positions[n]
        key = (p.x, p.y)
        if key in seen:
            raise CoLocatedError(f"nodes {seen[key]} and {n} share {key}")
        seen[key] = n
    adj = {n: set() for n in ids}
    for i, a in enumerate(ids):
        for b in ids[i + 1:]:
            if kinds[a] is NodeKind.MSC or kinds[b] is NodeKind.MSC:
                continue
            if kinds[a] is NodeKind.SATELLITE or kinds[b] is NodeKind.SATELLITE:
                adj[a].add(b)
                adj[b].add(a)
                continue
            pa, pb = profiles.get(a), profiles.get(b)
            if pa is None or pb is None:
                continue
            if (in_range(positions[a], positions[b], pa)
                    and in_range(positions[a], positions[b], pb)):
                adj[a].add(b)
                adj[b].add(a)
    return CommGraph(t, adj)
