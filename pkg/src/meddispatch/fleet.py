"""Vehicles, their timelines of scheduled legs, and transactional assignment.

A timeline is a time-ordered list of scheduled legs; the gaps between them
(and before/after) are the free slots new legs can be inserted into. Commits
are reversible through tokens because dispatching tentatively assigns every
leg of each candidate route before settling on one.
"""

from __future__ import annotations

from bisect import bisect_right
from dataclasses import dataclass, field, replace

from .errors import ConfigError, LogicError, ScheduleError
from .geo import HOSPITAL, VERTIPORT, Network
from .traveltime import AMBULANCE, EVTOL, MODES, UAV, Horizon

PATIENT = "patient"
ORGAN = "organ"
SUPPLY = "supply"
PAYLOADS = (PATIENT, ORGAN, SUPPLY)


@dataclass(frozen=True)
class VehicleSpec:
    mode: str
    capacity: int
    cruise_kmh: float
    range_km: float
    op_cost_per_km: float
    energy_cost_per_km: float
    allowed_payloads: frozenset[str]
    allowed_node_kinds: frozenset[str]

    def __post_init__(self):
        if self.mode not in MODES:
            raise ConfigError(f"unknown mode {self.mode!r}")
        if self.capacity < 1:
            raise ConfigError(f"{self.mode}: capacity must be >= 1")
        if min(self.op_cost_per_km, self.energy_cost_per_km) < 0:
            raise ConfigError(f"{self.mode}: costs must be >= 0")
        if self.mode == UAV and PATIENT in self.allowed_payloads:
            raise ConfigError("uav spec cannot allow patient payloads")
        if self.mode == EVTOL and self.allowed_node_kinds != frozenset({VERTIPORT}):
            raise ConfigError("evtol operates from vertiports only")
        if self.mode in (AMBULANCE, UAV) and self.allowed_node_kinds != frozenset({HOSPITAL, VERTIPORT}):
            raise ConfigError(f"{self.mode} operates from hospitals and vertiports")


def default_specs() -> dict[str, VehicleSpec]:
    """Default vehicle catalog (overridable per scenario).

    UAV figures follow a small delivery drone (one payload unit, 112 km/h,
    38 km); eVTOL a four-seat air taxi (322 km/h, 161 km); ambulance costs
    split into operating and fuel per km. Ambulance capacity defaults to 2
    (one stretcher patient plus one cargo item).
    """
    return {
        AMBULANCE: VehicleSpec(
            mode=AMBULANCE,
            capacity=2,
            cruise_kmh=90.0,
            range_km=float("inf"),
            op_cost_per_km=0.33,
            energy_cost_per_km=0.29,
            allowed_payloads=frozenset(PAYLOADS),
            allowed_node_kinds=frozenset({HOSPITAL, VERTIPORT}),
        ),
        EVTOL: VehicleSpec(
            mode=EVTOL,
            capacity=4,
            cruise_kmh=322.0,
            range_km=161.0,
            op_cost_per_km=1.81,
            energy_cost_per_km=0.32,
            allowed_payloads=frozenset(PAYLOADS),
            allowed_node_kinds=frozenset({VERTIPORT}),
        ),
        UAV: VehicleSpec(
            mode=UAV,
            capacity=1,
            cruise_kmh=112.0,
            range_km=38.0,
            op_cost_per_km=0.35,
            energy_cost_per_km=0.0023,
            allowed_payloads=frozenset({ORGAN, SUPPLY}),
            allowed_node_kinds=frozenset({HOSPITAL, VERTIPORT}),
        ),
    }


@dataclass
class ScheduledLeg:
    """A committed movement serving one or more consolidated requests."""

    request_ids: list[str]
    origin: str  # service endpoints (vertiport ids for eVTOL legs)
    destination: str
    mode: str
    reposition_from: str
    reposition_start: float
    pickup: float
    dropoff: float
    units: int
    distance_km: float
    op_cost: float
    energy_cost: float

    def __post_init__(self):
        if not self.reposition_start <= self.pickup <= self.dropoff:
            raise ScheduleError(
                f"leg times out of order: reposition {self.reposition_start}, "
                f"pickup {self.pickup}, dropoff {self.dropoff}"
            )


@dataclass(frozen=True)
class FreeSlot:
    start: float
    end: float
    location: str
    #: Where the committed schedule needs the vehicle when the slot closes.
    #: None for the trailing slot; otherwise a leg must end here (the next
    #: leg's reposition origin) to keep the timeline spatially chained.
    required_end_location: str | None = None


@dataclass
class Timeline:
    horizon: Horizon
    initial_location: str
    legs: list[ScheduledLeg] = field(default_factory=list)
    _slots_cache: list[FreeSlot] | None = field(default=None, repr=False, compare=False)

    def free_slots(self, not_before: float | None = None) -> list[FreeSlot]:
        """Maximal idle intervals with the vehicle's location at each start."""
        if self._slots_cache is None:
            slots = []
            t = self.horizon.start
            loc = self.initial_location
            for leg in self.legs:
                if leg.reposition_start > t:
                    slots.append(FreeSlot(t, leg.reposition_start, loc, leg.reposition_from))
                t = max(t, leg.dropoff)
                loc = leg.destination
            if t < self.horizon.end:
                slots.append(FreeSlot(t, self.horizon.end, loc))
            self._slots_cache = slots
        if not_before is None:
            return list(self._slots_cache)
        return [s for s in self._slots_cache if s.end > not_before]

    def insert(self, leg: ScheduledLeg) -> None:
        if leg.reposition_start < self.horizon.start or leg.dropoff > self.horizon.end:
            raise ScheduleError(
                f"leg [{leg.reposition_start}, {leg.dropoff}] outside horizon "
                f"[{self.horizon.start}, {self.horizon.end}]"
            )
        keys = [l.reposition_start for l in self.legs]
        pos = bisect_right(keys, leg.reposition_start)
        prev = self.legs[pos - 1] if pos > 0 else None
        nxt = self.legs[pos] if pos < len(self.legs) else None
        if prev is not None and prev.dropoff > leg.reposition_start:
            raise ScheduleError(
                f"leg starting {leg.reposition_start} overlaps busy interval ending {prev.dropoff}"
            )
        if nxt is not None and leg.dropoff > nxt.reposition_start:
            raise ScheduleError(
                f"leg ending {leg.dropoff} overlaps busy interval starting {nxt.reposition_start}"
            )
        expected = prev.destination if prev is not None else self.initial_location
        if leg.reposition_from != expected:
            raise ScheduleError(
                f"leg repositions from {leg.reposition_from!r} but vehicle is at {expected!r}"
            )
        if nxt is not None and nxt.reposition_from != leg.destination:
            raise ScheduleError(
                f"inserting leg to {leg.destination!r} breaks the chain to the next leg "
                f"starting at {nxt.reposition_from!r}"
            )
        self.legs.insert(pos, leg)
        self._slots_cache = None

    def remove(self, leg: ScheduledLeg) -> None:
        for i, candidate in enumerate(self.legs):
            if candidate is leg:
                del self.legs[i]
                self._slots_cache = None
                return
        raise LogicError("leg not present on timeline")


@dataclass
class Vehicle:
    id: str
    spec: VehicleSpec
    initial_location: str
    timeline: Timeline
    rank: int = 0

    @property
    def mode(self) -> str:
        return self.spec.mode


@dataclass(frozen=True)
class CommitToken:
    kind: str  # "new" | "join"
    vehicle_id: str
    leg: ScheduledLeg
    prev_units: int = 0
    prev_request_ids: tuple[str, ...] = ()


def commit(vehicle: Vehicle, leg: ScheduledLeg) -> CommitToken:
    """Insert a new leg into the vehicle's timeline; returns a rollback token."""
    if leg.units > vehicle.spec.capacity:
        raise ScheduleError(
            f"{vehicle.id}: leg carries {leg.units} units, capacity {vehicle.spec.capacity}"
        )
    vehicle.timeline.insert(leg)
    return CommitToken(kind="new", vehicle_id=vehicle.id, leg=leg)


def join(vehicle: Vehicle, target: ScheduledLeg, request_id: str, units: int) -> CommitToken:
    """Consolidate a request onto an already scheduled leg."""
    if not any(l is target for l in vehicle.timeline.legs):
        raise LogicError(f"{vehicle.id}: consolidation target not on timeline")
    if target.units + units > vehicle.spec.capacity:
        raise ScheduleError(
            f"{vehicle.id}: consolidation exceeds capacity "
            f"({target.units}+{units} > {vehicle.spec.capacity})"
        )
    token = CommitToken(
        kind="join",
        vehicle_id=vehicle.id,
        leg=target,
        prev_units=target.units,
        prev_request_ids=tuple(target.request_ids),
    )
    target.units += units
    target.request_ids.append(request_id)
    return token


def rollback(vehicle: Vehicle, token: CommitToken) -> None:
    """Undo a commit; the timeline returns to its exact prior state."""
    if token.vehicle_id != vehicle.id:
        raise LogicError(f"token belongs to {token.vehicle_id!r}, not {vehicle.id!r}")
    if token.kind == "new":
        vehicle.timeline.remove(token.leg)
    elif token.kind == "join":
        if not any(l is token.leg for l in vehicle.timeline.legs):
            raise LogicError("consolidation target vanished before rollback")
        token.leg.units = token.prev_units
        token.leg.request_ids = list(token.prev_request_ids)
    else:
        raise LogicError(f"unknown token kind {token.kind!r}")


def free_slots(vehicle: Vehicle, not_before: float | None = None) -> list[FreeSlot]:
    return vehicle.timeline.free_slots(not_before)


def find_consolidation_slots(
    vehicle: Vehicle, leg_origin: str, leg_destination: str, units: int, kind: str
) -> list[ScheduledLeg]:
    """Scheduled legs this request could share: same direction, spare capacity."""
    if kind not in vehicle.spec.allowed_payloads:
        return []
    return [
        leg
        for leg in vehicle.timeline.legs
        if leg.origin == leg_origin
        and leg.destination == leg_destination
        and leg.units + units <= vehicle.spec.capacity
    ]


@dataclass
class FleetConfig:
    """Per-mode vehicle counts plus optional spec field overrides."""

    counts: dict[str, int]
    spec_overrides: dict[str, dict] = field(default_factory=dict)

    def specs(self) -> dict[str, VehicleSpec]:
        catalog = default_specs()
        for mode, fields in self.spec_overrides.items():
            if mode not in catalog:
                raise ConfigError(f"spec override for unknown mode {mode!r}")
            catalog[mode] = replace(catalog[mode], **fields)
        return catalog


#: The four studied fleet mixes: 1 ground-only, 2 +UAVs, 3 +eVTOLs, 4 all three.
CONFIGURATION_MODES = {
    1: (AMBULANCE,),
    2: (AMBULANCE, UAV),
    3: (AMBULANCE, EVTOL),
    4: (AMBULANCE, UAV, EVTOL),
}


def config_for_id(configuration_id: int, per_mode: int = 12, spec_overrides: dict | None = None) -> FleetConfig:
    if configuration_id not in CONFIGURATION_MODES:
        raise ConfigError(f"configuration id must be 1..4, got {configuration_id}")
    counts = {m: (per_mode if m in CONFIGURATION_MODES[configuration_id] else 0) for m in MODES}
    return FleetConfig(counts=counts, spec_overrides=spec_overrides or {})


def initialize_fleet(config: FleetConfig, network: Network, horizon: Horizon) -> list[Vehicle]:
    """Create vehicles at their round-robin starting nodes with empty timelines.

    Ambulances and UAVs cycle through hospitals in id order, eVTOLs through
    vertiports in id order (vehicle 1 at node 1, vehicle 2 at node 2, ...).
    """
    specs = config.specs()
    vehicles: list[Vehicle] = []
    for mode in MODES:
        count = config.counts.get(mode, 0)
        if count < 0:
            raise ConfigError(f"negative vehicle count for {mode}")
        if count == 0:
            continue
        bases = network.vertiports if mode == EVTOL else network.hospitals
        if not bases:
            raise ConfigError(f"cannot place {mode} vehicles: no suitable base nodes")
        width = max(2, len(str(count)))
        for k in range(count):
            base = bases[k % len(bases)]
            vehicles.append(
                Vehicle(
                    id=f"{mode}-{k + 1:0{width}d}",
                    spec=specs[mode],
                    initial_location=base,
                    timeline=Timeline(horizon=horizon, initial_location=base),
                )
            )
    for rank, vehicle in enumerate(sorted(vehicles, key=lambda v: v.id)):
        vehicle.rank = rank
    return vehicles


class Fleet:
    """One dispatch run's mutable vehicle set, grouped by mode."""

    def __init__(self, vehicles: list[Vehicle], specs: dict[str, VehicleSpec] | None = None):
        self.vehicles = sorted(vehicles, key=lambda v: v.id)
        self.by_mode: dict[str, list[Vehicle]] = {m: [] for m in MODES}
        for v in self.vehicles:
            self.by_mode[v.mode].append(v)
        self.specs = specs or default_specs()
        self._by_id = {v.id: v for v in self.vehicles}

    @classmethod
    def create(cls, config: FleetConfig, network: Network, horizon: Horizon) -> Fleet:
        return cls(initialize_fleet(config, network, horizon), specs=config.specs())

    def __iter__(self):
        return iter(self.vehicles)

    def __len__(self):
        return len(self.vehicles)

    def vehicle(self, vehicle_id: str) -> Vehicle:
        return self._by_id[vehicle_id]

    @property
    def available_modes(self) -> frozenset[str]:
        return frozenset(m for m, vs in self.by_mode.items() if vs)

    def clone(self) -> Fleet:
        """Deep copy for what-if evaluation on identical state."""
        copies = []
        for v in self.vehicles:
            legs = [
                ScheduledLeg(
                    request_ids=list(l.request_ids),
                    origin=l.origin,
                    destination=l.destination,
                    mode=l.mode,
                    reposition_from=l.reposition_from,
                    reposition_start=l.reposition_start,
                    pickup=l.pickup,
                    dropoff=l.dropoff,
                    units=l.units,
                    distance_km=l.distance_km,
                    op_cost=l.op_cost,
                    energy_cost=l.energy_cost,
                )
                for l in v.timeline.legs
            ]
            copies.append(
                Vehicle(
                    id=v.id,
                    spec=v.spec,
                    initial_location=v.initial_location,
                    timeline=Timeline(
                        horizon=v.timeline.horizon,
                        initial_location=v.timeline.initial_location,
                        legs=legs,
                    ),
                    rank=v.rank,
                )
            )
        return Fleet(copies, specs=self.specs)
