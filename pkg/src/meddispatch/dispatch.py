"""Greedy multimodal dispatch: slot scoring, tentative assignment, selection.

For one request the dispatcher walks every candidate route, assigns each leg
the minimum-objective eligible slot (tentatively committing it so later legs
see the vehicle in use), keeps routes whose legs all assign, rolls everything
back, and finally commits the route with the lowest normalized objective.

Slot timing follows three cases. With slot start ``t_start``, leg request
time ``t_req`` and reposition time ``tau``:

1. ``t_req <= t_start``: the vehicle leaves at slot start, pickup at
   ``t_start + tau``, waiting ``t_start + tau - t_req``.
2. ``t_req > t_start`` and ``tau > t_req - t_start``: same timing; the head
   start is too short to hide the deadhead.
3. otherwise the vehicle delays its reposition to arrive exactly at
   ``t_req``: pickup ``t_req``, waiting zero.

Waiting and travel minutes are normalized by the horizon length; each cost
component by a scenario-wide maximum, so time and money are comparable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .demand import Request
from .errors import ConfigError
from .fleet import Fleet, FreeSlot, ScheduledLeg, Vehicle, VehicleSpec, commit, join, rollback
from .geo import Network
from .routes import (
    CandidateRoute,
    Leg,
    enumerate_candidates,
    enumerate_patterns,
    service_endpoints,
    validate_leg,
)
from .traveltime import AMBULANCE, MODE_INDEX, TravelTimeTable

#: The seven studied priority settings (w_t, w_c).
PRIORITY_SETTINGS = {
    "time-extreme": (10.0, 1.0),
    "time-high": (5.0, 1.0),
    "time-moderate": (2.0, 1.0),
    "parity": (1.0, 1.0),
    "cost-moderate": (1.0, 2.0),
    "cost-high": (1.0, 5.0),
    "cost-extreme": (1.0, 10.0),
}


@dataclass(frozen=True)
class ObjectiveWeights:
    w_t: float
    w_c: float

    def __post_init__(self):
        if self.w_t < 0 or self.w_c < 0 or self.w_t + self.w_c <= 0:
            raise ConfigError(f"weights must be nonnegative with a positive sum, got {self}")


@dataclass(frozen=True)
class NormalizationConstants:
    time_denominator: float
    energy_denominator: float
    operating_denominator: float

    def __post_init__(self):
        if min(self.time_denominator, self.energy_denominator, self.operating_denominator) <= 0:
            raise ConfigError(f"normalization constants must be positive, got {self}")

    @classmethod
    def for_scenario(cls, network: Network, specs: dict[str, VehicleSpec], horizon) -> NormalizationConstants:
        """Scenario-wide maxima: horizon length for time; for each cost, the
        dearest per-km rate in the catalog over three legs of twice the
        network's air diameter.

        The catalog (not the instantiated fleet) feeds the maxima so that
        every fleet configuration of one study shares identical constants.
        """
        diameter = float(network.air_matrix.max())
        if diameter <= 0:
            raise ConfigError("network diameter is zero; cannot normalize costs")
        worst_km = 3.0 * (2.0 * diameter)
        op = max(s.op_cost_per_km for s in specs.values())
        energy = max(s.energy_cost_per_km for s in specs.values())
        if op <= 0 or energy <= 0:
            raise ConfigError("cost normalization needs a positive per-km rate in the catalog")
        return cls(
            time_denominator=horizon.length_minutes,
            energy_denominator=energy * worst_km,
            operating_denominator=op * worst_km,
        )


@dataclass(frozen=True)
class PlanTotals:
    wait: float = 0.0
    travel: float = 0.0
    energy: float = 0.0
    operating: float = 0.0

    def plus(self, wait: float, travel: float, energy: float, operating: float) -> PlanTotals:
        return PlanTotals(
            self.wait + wait, self.travel + travel, self.energy + energy, self.operating + operating
        )


def request_objective(totals: PlanTotals, weights: ObjectiveWeights, norms: NormalizationConstants) -> float:
    """Normalized weighted objective of one request's totals."""
    return weights.w_t * (totals.wait + totals.travel) / norms.time_denominator + weights.w_c * (
        totals.energy / norms.energy_denominator + totals.operating / norms.operating_denominator
    )


def leg_timing(slot_start: float, t_req: float, tau_reposition: float) -> tuple[int, float, float, float]:
    """Classify the timing case; returns (case, wait, reposition_start, pickup)."""
    if t_req <= slot_start:
        return 1, slot_start + tau_reposition - t_req, slot_start, slot_start + tau_reposition
    if tau_reposition > t_req - slot_start:
        return 2, slot_start + tau_reposition - t_req, slot_start, slot_start + tau_reposition
    return 3, 0.0, t_req - tau_reposition, t_req


@dataclass(frozen=True)
class LegContext:
    """Everything needed to score slots for one leg at one request time."""

    leg: Leg
    kind: str
    units: int
    t_req: float
    t_max: float
    spec: VehicleSpec
    service_origin: str
    service_destination: str
    o_idx: int
    d_idx: int
    serve_km: float
    network: Network
    table: TravelTimeTable
    weights: ObjectiveWeights
    norms: NormalizationConstants

    @property
    def mode(self) -> str:
        return self.leg.mode


def prepare_leg(
    network: Network,
    table: TravelTimeTable,
    specs: dict[str, VehicleSpec],
    leg: Leg,
    kind: str,
    units: int,
    t_req: float,
    t_max: float,
    weights: ObjectiveWeights,
    norms: NormalizationConstants,
) -> LegContext | None:
    """Resolve service endpoints and distances; None when the mode cannot land."""
    endpoints = service_endpoints(network, leg)
    if endpoints is None:
        return None
    s_o, s_d = endpoints
    idx = network.index
    if leg.mode == AMBULANCE:
        serve_km = float(network.ground_matrix[idx[leg.origin], idx[leg.destination]])
    else:
        serve_km = float(network.air_matrix[idx[s_o], idx[s_d]])
    return LegContext(
        leg=leg,
        kind=kind,
        units=units,
        t_req=t_req,
        t_max=t_max,
        spec=specs[leg.mode],
        service_origin=s_o,
        service_destination=s_d,
        o_idx=idx[s_o],
        d_idx=idx[s_d],
        serve_km=serve_km,
        network=network,
        table=table,
        weights=weights,
        norms=norms,
    )


@dataclass(frozen=True)
class ScoredSlot:
    """One eligible slot with its per-leg components and objective."""

    vehicle: Vehicle
    is_consolidation: bool
    slot: FreeSlot | None
    target: ScheduledLeg | None
    case: int
    wait: float
    travel: float
    energy: float
    operating: float
    reposition_start: float
    pickup: float
    dropoff: float
    objective: float

    def sort_key(self) -> tuple:
        return (
            self.objective,
            self.dropoff,
            self.vehicle.rank,
            self.pickup,
            0 if self.is_consolidation else 1,
        )


def _dist_matrix(ctx: LegContext) -> np.ndarray:
    return ctx.network.ground_matrix if ctx.mode == AMBULANCE else ctx.network.air_matrix


def _leg_objective(ctx: LegContext, wait: float, travel: float, energy: float, operating: float) -> float:
    n = ctx.norms
    return ctx.weights.w_t * (wait + travel) / n.time_denominator + ctx.weights.w_c * (
        energy / n.energy_denominator + operating / n.operating_denominator
    )


def score_slot(ctx: LegContext, vehicle: Vehicle, slot: FreeSlot | ScheduledLeg) -> ScoredSlot | None:
    """Score one free slot or consolidation target; None when ineligible."""
    if isinstance(slot, ScheduledLeg):
        return _score_consolidation(ctx, vehicle, slot)
    return _score_free(ctx, vehicle, slot)


def _score_free(ctx: LegContext, vehicle: Vehicle, slot: FreeSlot) -> ScoredSlot | None:
    if slot.required_end_location is not None and slot.required_end_location != ctx.service_destination:
        return None  # a mid-schedule slot only hosts legs that restore the chain
    horizon = ctx.table.horizon
    mode_arr = ctx.table.array[MODE_INDEX[ctx.mode]]
    loc_idx = ctx.network.index[slot.location]
    tau_rep = float(mode_arr[loc_idx, ctx.o_idx, horizon.hour_index(slot.start)])
    if math.isinf(tau_rep):
        return None
    rep_km = float(_dist_matrix(ctx)[loc_idx, ctx.o_idx])
    if rep_km > ctx.spec.range_km:
        return None
    case, wait, reposition_start, pickup = leg_timing(slot.start, ctx.t_req, tau_rep)
    tau_srv = float(mode_arr[ctx.o_idx, ctx.d_idx, horizon.hour_index(pickup)])
    if math.isinf(tau_srv):
        return None
    dropoff = pickup + tau_srv
    if dropoff > slot.end or dropoff > ctx.t_max:
        return None
    travel = tau_rep + tau_srv
    km = rep_km + ctx.serve_km
    energy = ctx.spec.energy_cost_per_km * km
    operating = ctx.spec.op_cost_per_km * km
    return ScoredSlot(
        vehicle=vehicle,
        is_consolidation=False,
        slot=slot,
        target=None,
        case=case,
        wait=wait,
        travel=travel,
        energy=energy,
        operating=operating,
        reposition_start=reposition_start,
        pickup=pickup,
        dropoff=dropoff,
        objective=_leg_objective(ctx, wait, travel, energy, operating),
    )


def _score_consolidation(ctx: LegContext, vehicle: Vehicle, target: ScheduledLeg) -> ScoredSlot | None:
    if target.origin != ctx.service_origin or target.destination != ctx.service_destination:
        return None
    if ctx.kind not in vehicle.spec.allowed_payloads:
        return None
    if target.units + ctx.units > vehicle.spec.capacity:
        return None
    if target.pickup < ctx.t_req or target.dropoff > ctx.t_max:
        return None
    wait = target.pickup - ctx.t_req
    travel = target.dropoff - target.pickup
    return ScoredSlot(
        vehicle=vehicle,
        is_consolidation=True,
        slot=None,
        target=target,
        case=0,
        wait=wait,
        travel=travel,
        energy=0.0,
        operating=0.0,
        reposition_start=target.reposition_start,
        pickup=target.pickup,
        dropoff=target.dropoff,
        objective=_leg_objective(ctx, wait, travel, 0.0, 0.0),
    )


def eligible_slots(fleet: Fleet, ctx: LegContext, allow_consolidation: bool = True) -> list[ScoredSlot]:
    """All slots (free and consolidation) that could host this leg, scored."""
    out: list[ScoredSlot] = []
    for vehicle in fleet.by_mode[ctx.mode]:
        if ctx.kind not in vehicle.spec.allowed_payloads or ctx.units > vehicle.spec.capacity:
            continue
        for slot in vehicle.timeline.free_slots(not_before=ctx.t_req):
            scored = _score_free(ctx, vehicle, slot)
            if scored is not None:
                out.append(scored)
        if allow_consolidation:
            for target in vehicle.timeline.legs:
                scored = _score_consolidation(ctx, vehicle, target)
                if scored is not None:
                    out.append(scored)
    return out


@dataclass(frozen=True)
class LegAssignment:
    """A committed leg of a plan, with this request's share of the components."""

    request_id: str
    vehicle_id: str
    mode: str
    origin: str
    destination: str
    service_origin: str
    service_destination: str
    reposition_from: str
    reposition_start: float
    pickup: float
    dropoff: float
    wait_minutes: float
    travel_minutes: float
    energy_cost: float
    operating_cost: float
    distance_km: float
    units: int
    consolidated: bool


def assign_leg(
    vehicle: Vehicle, scored: ScoredSlot, ctx: LegContext, request_id: str
) -> tuple[LegAssignment, object]:
    """Commit the chosen slot; returns the assignment and a rollback token."""
    if scored.is_consolidation:
        token = join(vehicle, scored.target, request_id, ctx.units)
        reposition_from = scored.target.reposition_from
        distance_km = 0.0
    else:
        loc = scored.slot.location
        rep_km = float(_dist_matrix(ctx)[ctx.network.index[loc], ctx.o_idx])
        leg = ScheduledLeg(
            request_ids=[request_id],
            origin=ctx.service_origin,
            destination=ctx.service_destination,
            mode=ctx.mode,
            reposition_from=loc,
            reposition_start=scored.reposition_start,
            pickup=scored.pickup,
            dropoff=scored.dropoff,
            units=ctx.units,
            distance_km=rep_km + ctx.serve_km,
            op_cost=scored.operating,
            energy_cost=scored.energy,
        )
        token = commit(vehicle, leg)
        reposition_from = loc
        distance_km = rep_km + ctx.serve_km
    assignment = LegAssignment(
        request_id=request_id,
        vehicle_id=vehicle.id,
        mode=ctx.mode,
        origin=ctx.leg.origin,
        destination=ctx.leg.destination,
        service_origin=ctx.service_origin,
        service_destination=ctx.service_destination,
        reposition_from=reposition_from,
        reposition_start=scored.reposition_start,
        pickup=scored.pickup,
        dropoff=scored.dropoff,
        wait_minutes=scored.wait,
        travel_minutes=scored.travel,
        energy_cost=scored.energy,
        operating_cost=scored.operating,
        distance_km=distance_km,
        units=ctx.units,
        consolidated=scored.is_consolidation,
    )
    return assignment, token


@dataclass(frozen=True)
class DispatchPlan:
    request_id: str
    route: CandidateRoute
    legs: tuple[LegAssignment, ...]
    totals: PlanTotals
    objective: float


def m2dh_candidates(network: Network, request: Request) -> list[CandidateRoute]:
    return enumerate_candidates(enumerate_patterns(network, request))


class _TreeEdge:
    """One (destination, mode) hop in the shared route prefix tree."""

    __slots__ = ("leg", "children", "routes")

    def __init__(self, leg: Leg):
        self.leg = leg
        self.children: dict = {}
        self.routes: list[CandidateRoute] = []


def _build_tree(routes: list[CandidateRoute]) -> dict:
    root: dict = {}
    for route in routes:
        edges = root
        last = len(route.legs) - 1
        for i, leg in enumerate(route.legs):
            key = (leg.destination, leg.mode)
            edge = edges.get(key)
            if edge is None:
                edge = _TreeEdge(leg)
                edges[key] = edge
            if i == last:
                edge.routes.append(route)
            edges = edge.children
    return root


def _best_slot(fleet: Fleet, ctx: LegContext, allow_consolidation: bool) -> ScoredSlot | None:
    """Kernel-accelerated equivalent of min(eligible_slots(...), key=sort_key)."""
    horizon = ctx.table.horizon
    starts: list[float] = []
    ends: list[float] = []
    locs: list[int] = []
    end_locs: list[int] = []
    vranks: list[int] = []
    owners: list[tuple[Vehicle, FreeSlot]] = []
    index = ctx.network.index
    best_cons: ScoredSlot | None = None
    best_cons_key = None
    for vehicle in fleet.by_mode[ctx.mode]:
        if ctx.kind not in vehicle.spec.allowed_payloads or ctx.units > vehicle.spec.capacity:
            continue
        for slot in vehicle.timeline.free_slots():
            if slot.end <= ctx.t_req:
                continue
            starts.append(slot.start)
            ends.append(slot.end)
            locs.append(index[slot.location])
            end_locs.append(-1 if slot.required_end_location is None else index[slot.required_end_location])
            vranks.append(vehicle.rank)
            owners.append((vehicle, slot))
        if allow_consolidation:
            for target in vehicle.timeline.legs:
                scored = _score_consolidation(ctx, vehicle, target)
                if scored is None:
                    continue
                key = scored.sort_key()
                if best_cons_key is None or key < best_cons_key:
                    best_cons, best_cons_key = scored, key

    best_free: ScoredSlot | None = None
    if owners:
        res = kernels.score_free_slots(
            np.asarray(starts),
            np.asarray(ends),
            np.asarray(locs, dtype=np.int64),
            np.asarray(end_locs, dtype=np.int64),
            np.asarray(vranks, dtype=np.int64),
            ctx.o_idx,
            ctx.d_idx,
            ctx.t_req,
            ctx.t_max,
            ctx.table.array[MODE_INDEX[ctx.mode]],
            _dist_matrix(ctx),
            horizon.start,
            horizon.n_hours,
            ctx.spec.range_km,
            ctx.spec.op_cost_per_km,
            ctx.spec.energy_cost_per_km,
            ctx.weights.w_t,
            ctx.weights.w_c,
            ctx.norms.time_denominator,
            ctx.norms.energy_denominator,
            ctx.norms.operating_denominator,
        )
        k = int(res[0])
        if k >= 0:
            vehicle, slot = owners[k]
            _, wait, travel, energy, operating, reposition, pickup, dropoff, z = res
            case = 1 if ctx.t_req <= slot.start else (2 if wait > 0.0 else 3)
            best_free = ScoredSlot(
                vehicle=vehicle,
                is_consolidation=False,
                slot=slot,
                target=None,
                case=case,
                wait=float(wait),
                travel=float(travel),
                energy=float(energy),
                operating=float(operating),
                reposition_start=float(reposition),
                pickup=float(pickup),
                dropoff=float(dropoff),
                objective=float(z),
            )

    if best_free is None:
        return best_cons
    if best_cons is None:
        return best_free
    return best_cons if best_cons_key < best_free.sort_key() else best_free


def dispatch_request(
    request: Request,
    fleet: Fleet,
    network: Network,
    table: TravelTimeTable,
    weights: ObjectiveWeights,
    norms: NormalizationConstants,
    candidates: list[CandidateRoute] | None = None,
    allow_consolidation: bool = True,
) -> DispatchPlan | None:
    """Serve one request; returns the committed plan or None when infeasible.

    The fleet afterwards contains exactly the winning route's legs (losing
    tentative assignments are rolled back). Among all candidate routes the
    minimum-objective one wins; ties break to fewer legs, earlier final
    dropoff, then the smallest vehicle-id tuple.
    """
    if candidates is None:
        candidates = m2dh_candidates(network, request)
    ready_hour = table.horizon.hour_index(request.ready_time)
    available = fleet.available_modes

    static_cache: dict[Leg, str | None] = {}

    def leg_ok(leg: Leg) -> bool:
        if leg not in static_cache:
            static_cache[leg] = validate_leg(
                network, leg, fleet.specs[leg.mode], request.kind, table, ready_hour, available
            )
        return static_cache[leg] is None

    valid_routes = [r for r in candidates if all(leg_ok(leg) for leg in r.legs)]
    if not valid_routes:
        return None
    tree = _build_tree(valid_routes)

    best_key: tuple | None = None
    best: tuple | None = None  # (route, legs, totals, objective, replay descriptors)

    legs_acc: list[LegAssignment] = []
    replay_acc: list[tuple] = []

    def walk(edges: dict, t_req: float, totals: PlanTotals) -> None:
        nonlocal best_key, best
        for edge in edges.values():
            ctx = prepare_leg(
                network,
                table,
                fleet.specs,
                edge.leg,
                request.kind,
                request.units,
                t_req,
                request.deadline,
                weights,
                norms,
            )
            if ctx is None:
                continue
            scored = _best_slot(fleet, ctx, allow_consolidation)
            if scored is None:
                continue
            assignment, token = assign_leg(scored.vehicle, scored, ctx, request.id)
            new_totals = totals.plus(scored.wait, scored.travel, scored.energy, scored.operating)
            legs_acc.append(assignment)
            replay_acc.append((scored.vehicle, token))
            for route in edge.routes:
                z = request_objective(new_totals, weights, norms)
                key = (
                    z,
                    len(legs_acc),
                    assignment.dropoff,
                    tuple(a.vehicle_id for a in legs_acc),
                    route.pattern.nodes,
                    route.modes,
                )
                if best_key is None or key < best_key:
                    best_key = key
                    best = (route, tuple(legs_acc), new_totals, z, list(replay_acc))
            if edge.children:
                walk(edge.children, assignment.dropoff, new_totals)
            rollback(scored.vehicle, token)
            legs_acc.pop()
            replay_acc.pop()

    walk(tree, request.ready_time, PlanTotals())

    if best is None:
        return None
    route, legs, totals, objective, replay = best
    for vehicle, token in replay:
        if token.kind == "new":
            commit(vehicle, token.leg)
        else:
            join(vehicle, token.leg, request.id, request.units)
    return DispatchPlan(
        request_id=request.id, route=route, legs=legs, totals=totals, objective=objective
    )
