"""Time-varying travel minutes per (mode, origin, destination, hour).

Ground legs follow the BPR volume-delay function; air legs divide the
great-circle distance by a wind-adjusted effective airspeed. Hours are
indexed relative to the operating horizon; a leg departing at minute t uses
the table entry of hour ``floor((t - start) / 60)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import DataError
from .geo import VERTIPORT, Network, initial_bearing_deg

AMBULANCE = "ambulance"
EVTOL = "evtol"
UAV = "uav"
MODES = (AMBULANCE, EVTOL, UAV)
AIR_MODES = (EVTOL, UAV)
MODE_INDEX = {m: i for i, m in enumerate(MODES)}

#: Marker for entries a vehicle cannot fly (dead headwind or grounding wind).
INFEASIBLE = math.inf

_MAX_WIND_SANITY = 200.0  # km/h


def is_infeasible(minutes: float) -> bool:
    return math.isinf(minutes)


@dataclass(frozen=True)
class Horizon:
    """Operating window in absolute minutes (e.g. 540..900 for 9:00-15:00)."""

    start: float
    end: float

    def __post_init__(self):
        if not self.end > self.start:
            raise DataError(f"horizon end {self.end} must exceed start {self.start}")

    @property
    def length_minutes(self) -> float:
        return self.end - self.start

    @property
    def n_hours(self) -> int:
        return max(1, math.ceil(self.length_minutes / 60.0))

    def hour_index(self, t: float) -> int:
        h = int((t - self.start) // 60.0)
        return min(max(h, 0), self.n_hours - 1)


@dataclass(frozen=True)
class CongestionProfile:
    """BPR inputs for one directed ground pair over the horizon hours."""

    origin: str
    destination: str
    free_flow_minutes: float
    capacity_per_hour: float
    hourly_flow: tuple[float, ...]
    alpha: float = 0.15
    beta: float = 4.0

    def __post_init__(self):
        if self.free_flow_minutes <= 0:
            raise DataError(f"{self.origin}->{self.destination}: free-flow minutes must be > 0")
        if self.capacity_per_hour <= 0:
            raise DataError(f"{self.origin}->{self.destination}: capacity must be > 0")
        if any(f < 0 for f in self.hourly_flow):
            raise DataError(f"{self.origin}->{self.destination}: negative hourly flow")
        if self.alpha < 0:
            raise DataError(f"{self.origin}->{self.destination}: alpha must be >= 0")
        if self.beta < 1:
            raise DataError(f"{self.origin}->{self.destination}: beta must be >= 1")


@dataclass(frozen=True)
class WindRecord:
    """Signed wind components at one node and hour, km/h (east and north)."""

    node_id: str
    hour: int
    east_kmh: float
    north_kmh: float

    def __post_init__(self):
        speed = math.sqrt(self.east_kmh * self.east_kmh + self.north_kmh * self.north_kmh)
        if speed >= _MAX_WIND_SANITY:
            raise DataError(f"wind at {self.node_id!r} hour {self.hour} is {speed:.0f} km/h (>= {_MAX_WIND_SANITY})")

    @classmethod
    def from_meteorological(cls, node_id: str, hour: int, speed_kmh: float, direction_deg: float) -> WindRecord:
        """Build from speed plus the direction the wind blows *from*."""
        rad = direction_deg * math.pi / 180.0
        return cls(node_id, hour, -speed_kmh * math.sin(rad), -speed_kmh * math.cos(rad))


class WindField:
    """Per-(node, hour) wind records with nearest-vertiport fallback for hospitals."""

    def __init__(self, records: list[WindRecord]):
        self._records: dict[tuple[str, int], WindRecord] = {}
        for rec in records:
            self._records[(rec.node_id, rec.hour)] = rec

    def get(self, network: Network, node_id: str, hour: int) -> WindRecord:
        rec = self._records.get((node_id, hour))
        if rec is not None:
            return rec
        node = network.nodes.get(node_id)
        if node is not None and node.kind != VERTIPORT:
            rec = self._records.get((network.nearest[node_id], hour))
            if rec is not None:
                return rec
        raise DataError(f"no wind record for node {node_id!r} at hour {hour}")


def bpr_minutes(free_flow_minutes: float, flow: float, capacity: float, alpha: float = 0.15, beta: float = 4.0) -> float:
    """Congested ground minutes: t_o * (1 + alpha * (flow/capacity)^beta)."""
    if capacity <= 0:
        raise ValueError(f"capacity must be positive, got {capacity}")
    return free_flow_minutes * (1.0 + alpha * (flow / capacity) ** beta)


def effective_airspeed_kmh(
    cruise_kmh: float,
    bearing_deg: float,
    wind_at_origin: WindRecord,
    wind_at_destination: WindRecord,
) -> float:
    """Cruise speed plus the along-track component of the endpoint-averaged wind.

    May be <= 0 under strong headwind; callers turn that into an infeasible
    entry rather than an error.
    """
    if cruise_kmh <= 0:
        raise ValueError(f"cruise speed must be positive, got {cruise_kmh}")
    th = bearing_deg * math.pi / 180.0
    we = 0.5 * (wind_at_origin.east_kmh + wind_at_destination.east_kmh)
    wn = 0.5 * (wind_at_origin.north_kmh + wind_at_destination.north_kmh)
    return cruise_kmh + (we * math.sin(th) + wn * math.cos(th))


def air_minutes(
    network: Network,
    winds: WindField,
    origin: str,
    destination: str,
    hour: int,
    cruise_kmh: float,
    max_wind_kmh: float | None = None,
) -> float:
    """Wind-adjusted flight minutes, or the INFEASIBLE marker."""
    if origin == destination:
        return 0.0
    dist = network.air_distance_km(origin, destination)
    bearing = initial_bearing_deg(network.nodes[origin].latlon, network.nodes[destination].latlon)
    w_o = winds.get(network, origin, hour)
    w_d = winds.get(network, destination, hour)
    if max_wind_kmh is not None:
        we = 0.5 * (w_o.east_kmh + w_d.east_kmh)
        wn = 0.5 * (w_o.north_kmh + w_d.north_kmh)
        if math.sqrt(we * we + wn * wn) > max_wind_kmh:
            return INFEASIBLE
    eff = effective_airspeed_kmh(cruise_kmh, bearing, w_o, w_d)
    if eff <= 0:
        return INFEASIBLE
    return 60.0 * dist / eff


@dataclass
class TravelTimeTable:
    """Dense minutes[mode, origin, destination, hour] with inf marking infeasible."""

    network: Network
    horizon: Horizon
    array: np.ndarray  # (len(MODES), n, n, n_hours)

    def minutes(self, mode: str, origin: str, destination: str, hour: int) -> float:
        idx = self.network.index
        return float(self.array[MODE_INDEX[mode], idx[origin], idx[destination], hour])

    def minutes_at(self, mode: str, origin: str, destination: str, t: float) -> float:
        return self.minutes(mode, origin, destination, self.horizon.hour_index(t))

    def mode_array(self, mode: str) -> np.ndarray:
        return self.array[MODE_INDEX[mode]]


def build_travel_time_table(
    network: Network,
    congestion_profiles: list[CongestionProfile],
    winds: WindField,
    cruise_by_mode: dict[str, float],
    horizon: Horizon,
    max_wind_kmh: float | None = None,
) -> TravelTimeTable:
    """Assemble the full table for all modes, ordered pairs and horizon hours.

    Raises DataError when congestion profiles or wind records leave coverage
    gaps for any pair or hour the dispatcher may query.
    """
    n = len(network.ids)
    hours = horizon.n_hours
    gaps = np.argwhere(np.isnan(network.ground_matrix))
    if gaps.size:
        a, b = gaps[0]
        raise DataError(
            f"network lacks ground distances for {len(gaps)} ordered pairs needed for "
            f"dispatch costs, e.g. {network.ids[a]}->{network.ids[b]}"
        )
    profiles = {(p.origin, p.destination): p for p in congestion_profiles}

    missing = []
    short = []
    for a in network.ids:
        for b in network.ids:
            if a == b:
                continue
            prof = profiles.get((a, b))
            if prof is None:
                missing.append((a, b))
            elif len(prof.hourly_flow) < hours:
                short.append((a, b, len(prof.hourly_flow)))
    if missing:
        raise DataError(f"congestion profiles missing for {len(missing)} ordered pairs, e.g. {missing[:5]}")
    if short:
        a, b, got = short[0]
        raise DataError(
            f"congestion profile {a}->{b} covers {got} hours, horizon needs {hours} "
            f"({len(short)} profiles affected)"
        )

    pairs = [(a, b) for a in network.ids for b in network.ids if a != b]
    free_flow = np.array([profiles[p].free_flow_minutes for p in pairs])
    capacity = np.array([profiles[p].capacity_per_hour for p in pairs])
    flow = np.array([profiles[p].hourly_flow[:hours] for p in pairs])
    alpha = np.array([profiles[p].alpha for p in pairs])
    beta = np.array([profiles[p].beta for p in pairs])
    ground = kernels.bpr_minutes_grid(free_flow, capacity, flow, alpha, beta)

    array = np.zeros((len(MODES), n, n, hours))
    idx = network.index
    for row, (a, b) in enumerate(pairs):
        array[MODE_INDEX[AMBULANCE], idx[a], idx[b], :] = ground[row]

    wind_e = np.empty((n, hours))
    wind_n = np.empty((n, hours))
    for node_id in network.ids:
        for h in range(hours):
            rec = winds.get(network, node_id, h)
            wind_e[idx[node_id], h] = rec.east_kmh
            wind_n[idx[node_id], h] = rec.north_kmh

    lats = np.array([network.nodes[i].lat for i in network.ids])
    lons = np.array([network.nodes[i].lon for i in network.ids])
    bearing = kernels.pairwise_bearing_deg(lats, lons)
    sentinel = -1.0 if max_wind_kmh is None else float(max_wind_kmh)
    for mode in AIR_MODES:
        cruise = cruise_by_mode[mode]
        if cruise <= 0:
            raise DataError(f"{mode} cruise speed must be positive, got {cruise}")
        array[MODE_INDEX[mode]] = kernels.air_minutes_grid(
            network.air_matrix, bearing, wind_e, wind_n, cruise, sentinel
        )

    finite = array[np.isfinite(array)]
    if np.any(np.isnan(array)) or np.any(finite < 0):
        raise DataError("travel time table contains negative or undefined entries")
    return TravelTimeTable(network=network, horizon=horizon, array=array)


def load_congestion_csv(path, horizon: Horizon) -> list[CongestionProfile]:
    """Rows: origin,destination,t_o_minutes,capacity_per_hour,h0,h1,...

    Hour columns are horizon-relative; alpha/beta take the standard 0.15/4.
    """
    profiles = []
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            if header is None:
                raise DataError(f"{path}: empty congestion file")
            hour_cols = [c for c in header if c.startswith("h")]
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                try:
                    flows = tuple(float(x) for x in row[4 : 4 + len(hour_cols)])
                    profiles.append(
                        CongestionProfile(
                            origin=row[0],
                            destination=row[1],
                            free_flow_minutes=float(row[2]),
                            capacity_per_hour=float(row[3]),
                            hourly_flow=flows,
                        )
                    )
                except (ValueError, IndexError) as exc:
                    raise DataError(f"{path}:{lineno}: bad congestion row: {exc}") from exc
    except OSError as exc:
        raise DataError(f"cannot read congestion file {path}: {exc}") from exc
    return profiles


def load_wind_csv(path) -> WindField:
    """Rows: node_id,hour,speed_kmh,direction_deg (direction blowing from)."""
    records = []
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            next(reader, None)
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                try:
                    records.append(
                        WindRecord.from_meteorological(row[0], int(row[1]), float(row[2]), float(row[3]))
                    )
                except (ValueError, IndexError) as exc:
                    raise DataError(f"{path}:{lineno}: bad wind row: {exc}") from exc
    except OSError as exc:
        raise DataError(f"cannot read wind file {path}: {exc}") from exc
    return WindField(records)
