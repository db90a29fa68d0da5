"""Independent validation of emitted plans against the operational rules.

This module re-checks finished plans from first principles (payload rules,
deadlines, capacity, continuity, node kinds, ranges, vehicle schedules)
without reusing any dispatcher machinery, so a dispatcher bug cannot hide
itself. Every check appends a human-readable violation; an empty list is the
pass condition.
"""

from __future__ import annotations

from collections import defaultdict

from .demand import Request
from .dispatch import DispatchPlan, LegAssignment
from .fleet import Fleet
from .geo import Network
from .traveltime import AMBULANCE, Horizon

_EPS = 1e-9


def validate_plans(
    plans: list[DispatchPlan],
    requests: dict[str, Request],
    fleet: Fleet,
    network: Network,
    horizon: Horizon,
) -> list[str]:
    violations: list[str] = []
    say = violations.append

    per_vehicle: dict[str, list[LegAssignment]] = defaultdict(list)

    for plan in plans:
        request = requests.get(plan.request_id)
        if request is None:
            say(f"{plan.request_id}: plan for unknown request")
            continue
        legs = plan.legs
        if not legs:
            say(f"{request.id}: plan has no legs")
            continue
        if legs[0].origin != request.origin:
            say(f"{request.id}: first leg starts at {legs[0].origin!r}, request origin {request.origin!r}")
        if legs[-1].destination != request.destination:
            say(
                f"{request.id}: last leg ends at {legs[-1].destination!r}, "
                f"request destination {request.destination!r}"
            )
        if legs[-1].dropoff > request.deadline + _EPS:
            say(f"{request.id}: dropoff {legs[-1].dropoff:.3f} after deadline {request.deadline:.3f}")
        if legs[0].pickup < request.ready_time - _EPS:
            say(f"{request.id}: pickup {legs[0].pickup:.3f} before ready time {request.ready_time:.3f}")
        for i, leg in enumerate(legs):
            if i + 1 < len(legs):
                nxt = legs[i + 1]
                if leg.destination != nxt.origin:
                    say(f"{request.id}: leg {i + 1} ends at {leg.destination!r}, leg {i + 2} starts at {nxt.origin!r}")
                if nxt.pickup < leg.dropoff - _EPS:
                    say(
                        f"{request.id}: leg {i + 2} pickup {nxt.pickup:.3f} precedes "
                        f"leg {i + 1} dropoff {leg.dropoff:.3f}"
                    )
            _check_leg(leg, request, fleet, network, horizon, say)
            per_vehicle[leg.vehicle_id].append(leg)

    for vehicle_id, legs in per_vehicle.items():
        _check_vehicle_schedule(vehicle_id, legs, fleet, say)
    return violations


def _check_leg(leg: LegAssignment, request, fleet: Fleet, network: Network, horizon: Horizon, say) -> None:
    rid = request.id
    try:
        vehicle = fleet.vehicle(leg.vehicle_id)
    except KeyError:
        say(f"{rid}: unknown vehicle {leg.vehicle_id!r}")
        return
    spec = vehicle.spec
    if leg.mode != spec.mode:
        say(f"{rid}: leg mode {leg.mode!r} does not match vehicle {leg.vehicle_id!r}")
    if request.kind not in spec.allowed_payloads:
        say(f"{rid}: payload {request.kind!r} not allowed on {spec.mode}")
    if not leg.reposition_start <= leg.pickup <= leg.dropoff:
        say(f"{rid}: leg times disordered ({leg.reposition_start}, {leg.pickup}, {leg.dropoff})")
    if leg.reposition_start < horizon.start - _EPS or leg.dropoff > horizon.end + _EPS:
        say(f"{rid}: leg outside the horizon [{horizon.start}, {horizon.end}]")
    for endpoint in (leg.service_origin, leg.service_destination):
        if endpoint not in network.nodes:
            say(f"{rid}: unknown service node {endpoint!r}")
            return
        if network.kind_of(endpoint) not in spec.allowed_node_kinds:
            say(f"{rid}: {spec.mode} cannot serve node kind {network.kind_of(endpoint)!r} at {endpoint!r}")
    for raw, mapped in ((leg.origin, leg.service_origin), (leg.destination, leg.service_destination)):
        if raw != mapped and network.nodes[raw].co_located_vertiport != mapped:
            say(f"{rid}: service node {mapped!r} is not {raw!r} or its co-located vertiport")
    if leg.mode != AMBULANCE:
        flight = network.air_distance_km(leg.service_origin, leg.service_destination)
        if flight > spec.range_km + _EPS:
            say(f"{rid}: flight of {flight:.1f} km exceeds {spec.mode} range {spec.range_km} km")
        if not leg.consolidated:
            deadhead = network.air_distance_km(leg.reposition_from, leg.service_origin)
            if deadhead > spec.range_km + _EPS:
                say(f"{rid}: deadhead of {deadhead:.1f} km exceeds {spec.mode} range {spec.range_km} km")


def _check_vehicle_schedule(vehicle_id: str, legs: list[LegAssignment], fleet: Fleet, say) -> None:
    try:
        vehicle = fleet.vehicle(vehicle_id)
    except KeyError:
        return  # already reported per leg
    # consolidated assignments share one physical movement
    groups: dict[tuple, list[LegAssignment]] = defaultdict(list)
    for leg in legs:
        groups[
            (leg.reposition_start, leg.pickup, leg.dropoff, leg.service_origin, leg.service_destination)
        ].append(leg)

    moves = sorted(groups.items(), key=lambda kv: kv[0][0])
    for key, members in moves:
        units = sum(m.units for m in members)
        if units > vehicle.spec.capacity:
            say(
                f"{vehicle_id}: {units} units aboard {key[3]}->{key[4]} at {key[0]:.1f} "
                f"exceed capacity {vehicle.spec.capacity}"
            )
        froms = {m.reposition_from for m in members}
        if len(froms) > 1:
            say(f"{vehicle_id}: consolidated movement with conflicting start nodes {sorted(froms)}")

    location = vehicle.initial_location
    prev_end = None
    for (rep_start, _pickup, dropoff, _o, dest), members in moves:
        if prev_end is not None and rep_start < prev_end - _EPS:
            say(f"{vehicle_id}: movement at {rep_start:.3f} overlaps previous one ending {prev_end:.3f}")
        start_node = members[0].reposition_from
        if start_node != location:
            say(f"{vehicle_id}: movement departs {start_node!r} but vehicle is at {location!r}")
        location = dest
        prev_end = dropoff
