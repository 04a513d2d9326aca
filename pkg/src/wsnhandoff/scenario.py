"""Scenario model, its line-oriented text format, and the built-in
two-cell reference deployment.

Format (UTF-8, `#` starts a comment, blank lines ignored):

    [params]
    duration = 90
    seed = 1
    ...                      # any SimParams field; unknown keys rejected

    [node]
    # id kind x y [profile overrides as key=value]
    bs1 base_station 0 200
    m01 mote 80 130 tx_power=0

    [mobility]
    # id speed=<m/s> halt=<fraction> waypoints=x,y[;x,y...]
    ms1 speed=8 halt=0.5 waypoints=1000,190

Node kinds: mobile_station, base_station, mote, satellite, msc.
Profile override keys: tx_power, sensitivity, error_margin,
path_loss_exponent, reference_loss.
"""

from dataclasses import dataclass, field, fields, replace

from .world import (MobilityPath, NodeKind, Point, RadioProfile,
                    profile_for_range)


class ParseError(ValueError):
    def __init__(self, line_no: int, reason: str):
        super().__init__(f"line {line_no}: {reason}")
        self.line_no = line_no
        self.reason = reason


class ValidationError(ValueError):
    def __init__(self, problems):
        super().__init__("; ".join(problems))
        self.problems = list(problems)


@dataclass(frozen=True)
class SimParams:
    default_ttl: int = 16
    coverage_check_period: float = 1.0
    hop_delay: float = 0.01
    tx_slot: float = 0.002
    backhaul_delay: float = 0.05
    steering_delay: float = 0.5
    satellite_acquisition_delay: float = 2.0
    max_steer_range: float = 450.0
    queue_capacity: int = 50
    dv_period: float = 10.0
    app_interval: float = 1.0
    discovery_timeout: float = 1.0
    epsilon: int = 0


_INT_PARAMS = {"default_ttl", "queue_capacity", "epsilon"}
_PARAM_NAMES = [f.name for f in fields(SimParams)]


@dataclass(frozen=True)
class NodeSpec:
    node_id: str
    kind: NodeKind
    position: Point
    profile: RadioProfile = None


@dataclass(frozen=True)
class Scenario:
    nodes: tuple            # NodeSpec, sorted by node_id
    mobility: dict          # node_id -> MobilityPath
    duration: float = 90.0
    seed: int = 1
    params: SimParams = field(default_factory=SimParams)

    def node(self, node_id: str) -> NodeSpec:
        for n in self.nodes:
            if n.node_id == node_id:
                return n
        raise KeyError(node_id)

    def by_kind(self, kind: NodeKind) -> list:
        return [n for n in self.nodes if n.kind is kind]


# Nominal radio reach per kind.  Mote and handset radios reach about 150 m,
# a base station about 300 m; a 1 dB error margin leaves a corrupt band just
# inside the edge of each radio's range (frames there are heard but mangled),
# so marginal links degrade before they disappear.
MOTE_RANGE_M = 150.0
BS_RANGE_M = 300.0

DEFAULT_PROFILES = {
    NodeKind.MOTE: profile_for_range(MOTE_RANGE_M, tx_power_dbm=0.0,
                                     error_margin_db=1.0),
    NodeKind.MOBILE_STATION: profile_for_range(MOTE_RANGE_M, tx_power_dbm=0.0,
                                               error_margin_db=1.0),
    NodeKind.BASE_STATION: profile_for_range(BS_RANGE_M, tx_power_dbm=20.0,
                                             error_margin_db=1.0),
    NodeKind.SATELLITE: profile_for_range(BS_RANGE_M, tx_power_dbm=30.0),
    NodeKind.MSC: None,
}

_KIND_TOKENS = {k.value: k for k in NodeKind}

_OVERRIDE_FIELDS = {
    "tx_power": "tx_power_dbm",
    "sensitivity": "sensitivity_dbm",
    "error_margin": "error_margin_db",
    "path_loss_exponent": "path_loss_exponent",
    "reference_loss": "reference_loss_db",
}


def effective_profile(node: NodeSpec) -> RadioProfile:
    return node.profile if node.profile is not None \
        else DEFAULT_PROFILES[node.kind]


def _parse_kv(token: str, line_no: int):
    if "=" not in token:
        raise ParseError(line_no, f"expected key=value, got {token!r}")
    key, _, value = token.partition("=")
    return key.strip(), value.strip()


def _parse_float(value: str, line_no: int, what: str) -> float:
    try:
        return float(value)
    except ValueError:
        raise ParseError(line_no, f"bad {what}: {value!r}") from None


def _parse_node(parts, line_no: int) -> NodeSpec:
    if len(parts) < 4:
        raise ParseError(line_no, "node line needs: id kind x y")
    node_id, kind_tok = parts[0], parts[1]
    if kind_tok not in _KIND_TOKENS:
        raise ParseError(line_no, f"unknown node kind {kind_tok!r}")
    kind = _KIND_TOKENS[kind_tok]
    pos = Point(_parse_float(parts[2], line_no, "x"),
                _parse_float(parts[3], line_no, "y"))
    profile = None
    if len(parts) > 4:
        if kind is NodeKind.MSC:
            raise ParseError(line_no, "msc nodes carry no radio profile")
        base = DEFAULT_PROFILES[kind]
        changes = {}
        for tok in parts[4:]:
            key, value = _parse_kv(tok, line_no)
            if key not in _OVERRIDE_FIELDS:
                raise ParseError(line_no, f"unknown profile key {key!r}")
            changes[_OVERRIDE_FIELDS[key]] = _parse_float(value, line_no, key)
        try:
            profile = replace(base, **changes)
        except ValueError as e:
            raise ParseError(line_no, str(e)) from None
    return NodeSpec(node_id, kind, pos, profile)


def _parse_mobility(parts, line_no: int):
    if len(parts) < 2:
        raise ParseError(line_no, "mobility line needs: id key=value...")
    node_id = parts[0]
    speed = halt = waypoints = None
    for tok in parts[1:]:
        key, value = _parse_kv(tok, line_no)
        if key == "speed":
            speed = _parse_float(value, line_no, "speed")
        elif key == "halt":
            halt = _parse_float(value, line_no, "halt")
        elif key == "waypoints":
            waypoints = []
            for pair in value.split(";"):
                xy = pair.split(",")
                if len(xy) != 2:
                    raise ParseError(line_no, f"bad waypoint {pair!r}")
                waypoints.append(Point(_parse_float(xy[0], line_no, "x"),
                                       _parse_float(xy[1], line_no, "y")))
        else:
            raise ParseError(line_no, f"unknown mobility key {key!r}")
    if speed is None or waypoints is None:
        raise ParseError(line_no, "mobility needs speed= and waypoints=")
    try:
        return node_id, MobilityPath(tuple(waypoints), speed,
                                     0.5 if halt is None else halt)
    except ValueError as e:
        raise ParseError(line_no, str(e)) from None


def load_scenario(text: str) -> Scenario:
    section = None
    nodes = []
    mobility = {}
    raw_params = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ParseError(line_no, "unterminated section header")
            section = line[1:-1].strip()
            if section not in ("params", "node", "mobility"):
                raise ParseError(line_no, f"unknown section {section!r}")
            continue
        if section is None:
            raise ParseError(line_no, "content before any section header")
        parts = line.split()
        if section == "params":
            key, value = _parse_kv(line.replace(" ", ""), line_no)
            if key in ("duration", "seed"):
                raw_params[key] = value
            elif key in _PARAM_NAMES:
                raw_params[key] = value
            else:
                raise ParseError(line_no, f"unknown param {key!r}")
        elif section == "node":
            nodes.append(_parse_node(parts, line_no))
        else:
            node_id, path = _parse_mobility(parts, line_no)
            if node_id in mobility:
                raise ParseError(line_no, f"duplicate mobility for {node_id!r}")
            mobility[node_id] = path

    duration = 90.0
    seed = 1
    param_kwargs = {}
    for key, value in raw_params.items():
        if key == "duration":
            duration = float(value)
        elif key == "seed":
            seed = int(value)
        elif key in _INT_PARAMS:
            param_kwargs[key] = int(value)
        else:
            param_kwargs[key] = float(value)
    scenario = Scenario(tuple(sorted(nodes, key=lambda n: n.node_id)),
                        mobility, duration, seed, SimParams(**param_kwargs))
    validate_scenario(scenario)
    return scenario


def validate_scenario(s: Scenario):
    problems = []
    seen_ids = set()
    positions = {}
    for n in s.nodes:
        if n.node_id in seen_ids:
            problems.append(f"duplicate node id {n.node_id!r}")
        seen_ids.add(n.node_id)
        key = (n.position.x, n.position.y)
        if key in positions:
            problems.append(
                f"nodes {positions[key]!r} and {n.node_id!r} co-located")
        positions[key] = n.node_id
    if len(s.by_kind(NodeKind.MSC)) > 1:
        problems.append("more than one msc")
    for node_id in s.mobility:
        if node_id not in seen_ids:
            problems.append(f"mobility for unknown node {node_id!r}")
        elif s.node(node_id).kind is not NodeKind.MOBILE_STATION:
            problems.append(f"mobility on non-mobile node {node_id!r}")
    if s.duration <= 0:
        problems.append("duration must be positive")
    if s.params.default_ttl < 1:
        problems.append("default_ttl must be >= 1")
    if s.params.queue_capacity < 1:
        problems.append("queue_capacity must be >= 1")
    if problems:
        raise ValidationError(problems)


def _fmt(x: float) -> str:
    return repr(float(x)) if x != int(x) else str(int(x))


def serialize_scenario(s: Scenario) -> str:
    """Canonical text form; load_scenario(serialize_scenario(s)) == s."""
    out = ["[params]",
           f"duration = {_fmt(s.duration)}",
           f"seed = {s.seed}"]
    defaults = SimParams()
    for name in _PARAM_NAMES:
        value = getattr(s.params, name)
        if value != getattr(defaults, name):
            out.append(f"{name} = {value if name in _INT_PARAMS else _fmt(value)}")
    out.append("")
    out.append("[node]")
    for n in sorted(s.nodes, key=lambda n: n.node_id):
        line = (f"{n.node_id} {n.kind.value} "
                f"{_fmt(n.position.x)} {_fmt(n.position.y)}")
        if n.profile is not None:
            base = DEFAULT_PROFILES[n.kind]
            for short, attr in _OVERRIDE_FIELDS.items():
                if getattr(n.profile, attr) != getattr(base, attr):
                    line += f" {short}={repr(getattr(n.profile, attr))}"
        out.append(line)
    if s.mobility:
        out.append("")
        out.append("[mobility]")
        for node_id in sorted(s.mobility):
            p = s.mobility[node_id]
            wps = ";".join(f"{_fmt(w.x)},{_fmt(w.y)}" for w in p.waypoints)
            out.append(f"{node_id} speed={_fmt(p.speed)} "
                       f"halt={_fmt(p.halt_fraction)} waypoints={wps}")
    return "\n".join(out) + "\n"


def reference_scenario() -> Scenario:
    """Built-in reference deployment: two cells, two walkers, a mote mesh.

    Two base stations sit 1000 m apart.  Each mobile station starts beside
    its home base station, walks a straight lane toward the opposite one at
    constant speed and halts at the midpoint of its route.  A connected
    4 x 4 mote grid (100 m pitch) bridges the western base station to the
    halt zone; the halt points are beyond the 450 m steering reach of both
    base stations, so the final handoffs decide for the satellite.  A
    switching centre sits mid-field and a satellite covers everything.
    """
    nodes = [
        NodeSpec("bs1", NodeKind.BASE_STATION, Point(0.0, 200.0)),
        NodeSpec("bs2", NodeKind.BASE_STATION, Point(1000.0, 200.0)),
        NodeSpec("ms1", NodeKind.MOBILE_STATION, Point(0.0, 190.0)),
        NodeSpec("ms2", NodeKind.MOBILE_STATION, Point(1000.0, 210.0)),
        NodeSpec("sat1", NodeKind.SATELLITE, Point(500.0, 800.0)),
        NodeSpec("msc1", NodeKind.MSC, Point(500.0, 200.0)),
    ]
    idx = 1
    for y in (130.0, 230.0, 330.0, 430.0):
        for x in (80.0, 180.0, 280.0, 380.0):
            nodes.append(NodeSpec(f"m{idx:02d}", NodeKind.MOTE, Point(x, y)))
            idx += 1
    mobility = {
        "ms1": MobilityPath((Point(1000.0, 190.0),), speed=8.0,
                            halt_fraction=0.5),
        "ms2": MobilityPath((Point(0.0, 210.0),), speed=9.0,
                            halt_fraction=0.5),
    }
    s = Scenario(tuple(sorted(nodes, key=lambda n: n.node_id)), mobility,
                 duration=90.0, seed=1)
    validate_scenario(s)
    return s


def strip_wsn(s: Scenario) -> Scenario:
    """Baseline variant: same scenario with every mote removed."""
    kept = tuple(n for n in s.nodes if n.kind is not NodeKind.MOTE)
    stripped = Scenario(kept, dict(s.mobility), s.duration, s.seed, s.params)
    validate_scenario(stripped)
    return stripped
