"""Benchmark heuristic, exhaustive-search oracle, and optimality gaps.

The benchmark evaluates only four canonical routes per request and never
consolidates; the oracle searches every vertiport connection (0-2 ordered
intermediates) with consolidation, so its objective bounds the heuristic's
from below at identical fleet state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .demand import Request
from .dispatch import DispatchPlan, NormalizationConstants, ObjectiveWeights, dispatch_request
from .fleet import Fleet, PATIENT
from .geo import Network
from .routes import (
    CandidateRoute,
    Leg,
    RoutePattern,
    canonical_pattern,
    enumerate_candidates,
    exhaustive_patterns,
    same_place,
)
from .traveltime import AMBULANCE, EVTOL, TravelTimeTable, UAV


def baseline_routes(network: Network, request: Request) -> list[CandidateRoute]:
    """The four canonical routes: direct by each mode, and ground-air-ground."""
    o, d = request.origin, request.destination
    direct = RoutePattern((o, d))
    routes = [CandidateRoute(direct, (Leg(o, d, AMBULANCE),))]
    routes.append(CandidateRoute(direct, (Leg(o, d, EVTOL),)))
    if request.kind != PATIENT:
        routes.append(CandidateRoute(direct, (Leg(o, d, UAV),)))

    vo, vd = network.nearest[o], network.nearest[d]
    legs = [(o, vo, AMBULANCE), (vo, vd, EVTOL), (vd, d, AMBULANCE)]
    collapsed: list[Leg] = []
    carry = None
    for a, b, mode in legs:
        a = carry if carry is not None else a
        if same_place(network, a, b):
            carry = a
            continue
        collapsed.append(Leg(a, b, mode))
        carry = None
    if carry is not None and collapsed:
        last = collapsed[-1]
        collapsed[-1] = Leg(last.origin, d, last.mode)
    if collapsed and any(l.mode == EVTOL for l in collapsed):
        nodes = canonical_pattern(network, (o, vo, vd, d))
        hybrid = CandidateRoute(RoutePattern(nodes), tuple(collapsed))
        if all(hybrid.legs != r.legs for r in routes):
            routes.append(hybrid)
    return routes


def baseline_dispatch(
    request: Request,
    fleet: Fleet,
    network: Network,
    table: TravelTimeTable,
    weights: ObjectiveWeights,
    norms: NormalizationConstants,
) -> DispatchPlan | None:
    """Dispatch over the four canonical routes, without payload consolidation."""
    return dispatch_request(
        request,
        fleet,
        network,
        table,
        weights,
        norms,
        candidates=baseline_routes(network, request),
        allow_consolidation=False,
    )


def exhaustive_dispatch(
    request: Request,
    fleet: Fleet,
    network: Network,
    table: TravelTimeTable,
    weights: ObjectiveWeights,
    norms: NormalizationConstants,
) -> DispatchPlan | None:
    """Per-request optimum over all vertiport connections and mode mixes."""
    return dispatch_request(
        request,
        fleet,
        network,
        table,
        weights,
        norms,
        candidates=enumerate_candidates(exhaustive_patterns(network, request)),
        allow_consolidation=True,
    )


@dataclass(frozen=True)
class GapRecord:
    request_id: str
    z_heuristic: float
    z_oracle: float

    @property
    def gap_pct(self) -> float:
        if self.z_oracle == 0.0:
            return 0.0 if self.z_heuristic == 0.0 else math.inf
        return 100.0 * (self.z_heuristic - self.z_oracle) / self.z_oracle


@dataclass(frozen=True)
class GapSummary:
    records: tuple[GapRecord, ...]
    average_pct: float
    maximum_pct: float
    undefined: tuple[str, ...]  # zero oracle objective but positive heuristic one

    @classmethod
    def from_pairs(cls, pairs: list[tuple[str, float, float]]) -> GapSummary:
        records = tuple(GapRecord(*p) for p in pairs)
        finite = [r.gap_pct for r in records if math.isfinite(r.gap_pct)]
        undefined = tuple(r.request_id for r in records if math.isinf(r.gap_pct))
        avg = sum(finite) / len(finite) if finite else 0.0
        top = max(finite) if finite else 0.0
        return cls(records=records, average_pct=avg, maximum_pct=top, undefined=undefined)


def optimality_gap(pairs: list[tuple[str, float, float]]) -> GapSummary:
    """Per-request gaps plus the average and maximum, given synchronized states."""
    return GapSummary.from_pairs(pairs)
