"""Transport requests and the seeded scenario demand generator.

Ready times land on the horizon's one-minute grid; deadlines are the ready
time plus the baseline ground travel time at that hour plus a stochastic
coordination buffer, so every request is feasible by direct ambulance the
moment it appears.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, DataError
from .fleet import PAYLOADS
from .geo import HOSPITAL, Network
from .traveltime import AMBULANCE, Horizon, TravelTimeTable


@dataclass(frozen=True)
class Request:
    id: str
    kind: str
    origin: str
    destination: str
    ready_time: float
    deadline: float
    units: int = 1

    def __post_init__(self):
        if self.kind not in PAYLOADS:
            raise DataError(f"request {self.id!r}: unknown payload kind {self.kind!r}")
        if self.origin == self.destination:
            raise DataError(f"request {self.id!r}: origin equals destination ({self.origin!r})")
        if not self.ready_time < self.deadline:
            raise DataError(
                f"request {self.id!r}: deadline {self.deadline} must exceed ready time {self.ready_time}"
            )
        if self.units < 1:
            raise DataError(f"request {self.id!r}: units must be >= 1")


@dataclass(frozen=True)
class DemandParams:
    request_count: int = 50
    horizon: Horizon = field(default_factory=lambda: Horizon(540.0, 900.0))  # 9:00-15:00
    hub_hospital_id: str | None = None
    hub_weight: float = 0.4
    buffer_min: float = 60.0
    buffer_max: float = 90.0
    kind_mix: tuple[float, float, float] = (0.4, 0.3, 0.3)  # patient, organ, supply
    seed: int = 0
    fit_within_horizon: bool = True

    def __post_init__(self):
        if self.request_count < 0:
            raise ConfigError("request_count must be >= 0")
        if not self.buffer_min <= self.buffer_max:
            raise ConfigError(f"buffer range [{self.buffer_min}, {self.buffer_max}] is inverted")
        if any(p < 0 for p in self.kind_mix) or abs(sum(self.kind_mix) - 1.0) > 1e-9:
            raise ConfigError(f"kind mix {self.kind_mix} must be nonnegative and sum to 1")
        if not 0.0 <= self.hub_weight < 1.0:
            raise ConfigError("hub_weight must be in [0, 1)")


def _endpoint_weights(hospitals: list[str], hub: str | None, hub_weight: float) -> np.ndarray:
    n = len(hospitals)
    if hub is None or n == 1:
        return np.full(n, 1.0 / n)
    if hub not in hospitals:
        raise ConfigError(f"hub hospital {hub!r} not in network")
    w = np.full(n, (1.0 - hub_weight) / (n - 1))
    w[hospitals.index(hub)] = hub_weight
    return w


def generate_demand(params: DemandParams, network: Network, table: TravelTimeTable) -> list[Request]:
    """Draw a reproducible request list (same params and seed => same list)."""
    horizon = params.horizon
    if horizon.length_minutes < 1.0:
        raise ConfigError("horizon shorter than one minute")
    if len(network.hospitals) < 2 and params.request_count > 0:
        raise ConfigError("demand needs at least two hospitals")

    rng = np.random.default_rng(params.seed)
    hospitals = network.hospitals
    weights = _endpoint_weights(hospitals, params.hub_hospital_id, params.hub_weight)
    requests = []
    width = max(3, len(str(params.request_count)))
    for i in range(params.request_count):
        for _ in range(10000):
            kind = PAYLOADS[rng.choice(len(PAYLOADS), p=np.asarray(params.kind_mix))]
            ready = float(rng.integers(int(horizon.start), int(horizon.end)))
            origin = hospitals[rng.choice(len(hospitals), p=weights)]
            dest = origin
            while dest == origin:
                dest = hospitals[rng.choice(len(hospitals), p=weights)]
            baseline = table.minutes_at(AMBULANCE, origin, dest, ready)
            if not np.isfinite(baseline):
                raise DataError(f"no ground travel time for {origin}->{dest}")
            buffer = float(rng.uniform(params.buffer_min, params.buffer_max))
            if params.fit_within_horizon and ready + baseline + params.buffer_max > horizon.end:
                continue  # this draw cannot be served inside the horizon; redraw
            requests.append(
                Request(
                    id=f"request-{i + 1:0{width}d}",
                    kind=kind,
                    origin=origin,
                    destination=dest,
                    ready_time=ready,
                    deadline=ready + baseline + buffer,
                )
            )
            break
        else:
            raise ConfigError(
                "could not draw a horizon-feasible request after 10000 attempts; "
                "the horizon is too short for this network"
            )
    return requests


def save_requests(requests: list[Request], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["id", "kind", "origin", "destination", "ready_minute", "deadline_minute"])
        for r in requests:
            writer.writerow([r.id, r.kind, r.origin, r.destination, repr(r.ready_time), repr(r.deadline)])


def load_requests(path) -> list[Request]:
    requests = []
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            next(reader, None)
            for lineno, row in enumerate(reader, start=2):
                if not row:
                    continue
                try:
                    requests.append(
                        Request(
                            id=row[0],
                            kind=row[1],
                            origin=row[2],
                            destination=row[3],
                            ready_time=float(row[4]),
                            deadline=float(row[5]),
                        )
                    )
                except (ValueError, IndexError, DataError) as exc:
                    raise DataError(f"{path}:{lineno}: {exc}") from exc
    except OSError as exc:
        raise DataError(f"cannot read requests file {path}: {exc}") from exc
    return requests


def validate_requests(requests: list[Request], network: Network, horizon: Horizon) -> None:
    """Check network-dependent request invariants before dispatching."""
    seen = set()
    for r in requests:
        if r.id in seen:
            raise DataError(f"duplicate request id {r.id!r}")
        seen.add(r.id)
        for endpoint in (r.origin, r.destination):
            node = network.nodes.get(endpoint)
            if node is None or node.kind != HOSPITAL:
                raise DataError(f"request {r.id!r}: endpoint {endpoint!r} is not a hospital")
        if not horizon.start <= r.ready_time <= horizon.end:
            raise DataError(f"request {r.id!r}: ready time {r.ready_time} outside the horizon")
