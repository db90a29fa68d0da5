"""Route patterns and mode assignments for a request, plus per-leg filters.

A pattern is the node sequence from the origin hospital to the destination
hospital with up to two intermediate vertiports. The heuristic pattern set
uses only the endpoints' nearest vertiports (at most four patterns, 48 mode
assignments); the exhaustive set draws intermediates from every vertiport.

Hospitals with a co-located vertiport admit air legs directly: the hospital
endpoint maps to its vertiport id for flight distance, wind and landing
rules, while ground legs keep the hospital id. Null hops between co-located
pairs are collapsed before mode assignment.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple

from .demand import Request
from .fleet import VehicleSpec
from .geo import VERTIPORT, Network
from .traveltime import AMBULANCE, EVTOL, MODE_INDEX, MODES, TravelTimeTable


class Leg(NamedTuple):
    origin: str
    destination: str
    mode: str


@dataclass(frozen=True)
class RoutePattern:
    nodes: tuple[str, ...]

    @property
    def leg_count(self) -> int:
        return len(self.nodes) - 1


@dataclass(frozen=True)
class CandidateRoute:
    pattern: RoutePattern
    legs: tuple[Leg, ...]

    @property
    def modes(self) -> tuple[str, ...]:
        return tuple(l.mode for l in self.legs)


VIOLATION_PAYLOAD = "payload"
VIOLATION_NODE_KIND = "node_kind"
VIOLATION_RANGE = "range"
VIOLATION_WIND = "wind"
VIOLATION_NO_VEHICLE = "no_vehicle"


def same_place(network: Network, a: str, b: str) -> bool:
    """True when two node ids denote the same physical site (co-location)."""
    if a == b:
        return True
    return (
        network.nodes[a].co_located_vertiport == b
        or network.nodes[b].co_located_vertiport == a
    )


def canonical_pattern(network: Network, nodes: tuple[str, ...]) -> tuple[str, ...]:
    """Collapse null hops (repeats, co-located pairs) keeping hospital endpoints."""
    out = [nodes[0]]
    for x in nodes[1:-1]:
        if not same_place(network, out[-1], x):
            out.append(x)
    last = nodes[-1]
    if len(out) > 1 and same_place(network, out[-1], last):
        out[-1] = last
    else:
        out.append(last)
    return tuple(out)


def enumerate_patterns(network: Network, request: Request) -> list[RoutePattern]:
    """Heuristic patterns: direct, via each endpoint's nearest vertiport, via both."""
    o, d = request.origin, request.destination
    vo = network.nearest[o]
    vd = network.nearest[d]
    raw = [(o, d), (o, vo, d), (o, vd, d), (o, vo, vd, d)]
    patterns: list[RoutePattern] = []
    seen = set()
    for nodes in raw:
        canon = canonical_pattern(network, nodes)
        if len(canon) >= 2 and canon not in seen:
            seen.add(canon)
            patterns.append(RoutePattern(canon))
    return patterns


def exhaustive_patterns(network: Network, request: Request) -> list[RoutePattern]:
    """All patterns with 0-2 intermediate vertiports (ordered, no immediate repeats)."""
    o, d = request.origin, request.destination
    raw: list[tuple[str, ...]] = [(o, d)]
    raw.extend((o, v, d) for v in network.vertiports)
    raw.extend(
        (o, v1, v2, d)
        for v1 in network.vertiports
        for v2 in network.vertiports
        if v1 != v2
    )
    patterns: list[RoutePattern] = []
    seen = set()
    for nodes in raw:
        canon = canonical_pattern(network, nodes)
        if len(canon) >= 2 and canon not in seen:
            seen.add(canon)
            patterns.append(RoutePattern(canon))
    return patterns


def enumerate_candidates(patterns: list[RoutePattern]) -> list[CandidateRoute]:
    """Cartesian mode assignment over every pattern, before feasibility filtering.

    Non-degenerate heuristic patterns yield 3 + 2*9 + 27 = 48 candidates.
    """
    candidates = []
    for pattern in patterns:
        n_legs = pattern.leg_count
        for modes in itertools.product(MODES, repeat=n_legs):
            legs = tuple(
                Leg(pattern.nodes[i], pattern.nodes[i + 1], modes[i]) for i in range(n_legs)
            )
            candidates.append(CandidateRoute(pattern=pattern, legs=legs))
    return candidates


def service_endpoints(network: Network, leg: Leg) -> tuple[str, str] | None:
    """Node ids the vehicle actually touches; None when the mode cannot land.

    eVTOL legs map hospital endpoints to their co-located vertiports; a
    hospital without one cannot host an eVTOL leg.
    """
    if leg.mode != EVTOL:
        return (leg.origin, leg.destination)
    mapped = []
    for node_id in (leg.origin, leg.destination):
        node = network.nodes[node_id]
        if node.kind == VERTIPORT:
            mapped.append(node_id)
        elif node.co_located_vertiport is not None:
            mapped.append(node.co_located_vertiport)
        else:
            return None
    return (mapped[0], mapped[1])


def leg_distance_km(network: Network, leg: Leg) -> float:
    """Ground km for ambulance legs, great-circle km for air legs (mapped)."""
    if leg.mode == AMBULANCE:
        return network.ground_distance_km(leg.origin, leg.destination)
    endpoints = service_endpoints(network, leg)
    if endpoints is None:
        raise ValueError(f"leg {leg} has no valid eVTOL endpoints")
    return network.air_distance_km(*endpoints)


def validate_leg(
    network: Network,
    leg: Leg,
    mode_spec: VehicleSpec,
    payload_kind: str,
    table: TravelTimeTable,
    hour: int,
    available_modes: frozenset[str],
) -> str | None:
    """None when the leg is feasible, else the first violated rule."""
    if payload_kind not in mode_spec.allowed_payloads:
        return VIOLATION_PAYLOAD
    if leg.mode not in available_modes:
        return VIOLATION_NO_VEHICLE
    endpoints = service_endpoints(network, leg)
    if endpoints is None:
        return VIOLATION_NODE_KIND
    for node_id in endpoints:
        if network.kind_of(node_id) not in mode_spec.allowed_node_kinds:
            return VIOLATION_NODE_KIND
    if leg.mode != AMBULANCE:
        if network.air_distance_km(*endpoints) > mode_spec.range_km:
            return VIOLATION_RANGE
        idx = network.index
        minutes = table.array[MODE_INDEX[leg.mode], idx[endpoints[0]], idx[endpoints[1]], hour]
        if not minutes < float("inf"):
            return VIOLATION_WIND
    return None
