"""Deterministic discrete-event simulator of sensor-mote assisted cellular
handoff with satellite fallback."""

from .engine import Event, EventQueue, PastTimeError, RngStream
from .protocol import (DecisionOutcome, DiscoveryRequest, Escalation,
                       LinkRecord, MoteMode, MoteState, MscDecision,
                       NoMotesInRangeError, NoSatelliteError)
from .queues import FifoQueue, Packet, StrictPriorityQueue
from .routing import (INFINITY_METRIC, RoutingLoopError, UnknownNeighborError,
                      UnreachableError)
from .scenario import (ParseError, Scenario, SimParams, ValidationError,
                       load_scenario, reference_scenario, serialize_scenario,
                       strip_wsn)
from .simulation import RunReport, Simulation, run, serialize_report
from .stats import (Category, Layer, NoSignificantChangeError, StatsLedger,
                    classify, qos_improvement, render_report)
from .world import (CoLocatedError, MobilityPath, NodeKind, PacketOutcome,
                    Point, RadioProfile, ZeroDistanceError, comm_graph,
                    packet_outcome, position_at, profile_for_range)

__version__ = "0.1.0"
