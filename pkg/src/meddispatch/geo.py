"""Hospital-vertiport network model and great-circle geometry.

Coordinates are decimal degrees, distances kilometers. Air distances are
always great-circle; ground distances are input data (road routes are not
derivable from coordinates) and must dominate the great circle.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, NetworkError

EARTH_RADIUS_KM = 6371.0088  # IUGG mean radius
_DEG = math.pi / 180.0

HOSPITAL = "hospital"
VERTIPORT = "vertiport"
NODE_KINDS = (HOSPITAL, VERTIPORT)


def haversine_km(a: tuple[float, float], b: tuple[float, float]) -> float:
    """Great-circle distance in km between two (lat, lon) points."""
    lat1, lon1 = a
    lat2, lon2 = b
    p1 = lat1 * _DEG
    p2 = lat2 * _DEG
    sp = math.sin((lat2 - lat1) * _DEG / 2.0)
    sl = math.sin((lon2 - lon1) * _DEG / 2.0)
    h = sp * sp + (math.cos(p1) * math.cos(p2)) * (sl * sl)
    return 2.0 * EARTH_RADIUS_KM * math.asin(min(1.0, math.sqrt(h)))


def initial_bearing_deg(a: tuple[float, float], b: tuple[float, float]) -> float:
    """Forward azimuth from ``a`` to ``b`` in degrees within [0, 360).

    Raises ValueError for coincident points, whose bearing is undefined.
    """
    if a == b:
        raise ValueError(f"bearing undefined for coincident points {a}")
    lat1, lon1 = a
    lat2, lon2 = b
    p1 = lat1 * _DEG
    p2 = lat2 * _DEG
    dl = (lon2 - lon1) * _DEG
    x = math.sin(dl) * math.cos(p2)
    y = math.cos(p1) * math.sin(p2) - math.sin(p1) * math.cos(p2) * math.cos(dl)
    bearing = (math.atan2(x, y) / _DEG) % 360.0
    return 0.0 if bearing == 360.0 else bearing  # tiny negatives round up through the modulo


@dataclass(frozen=True)
class Node:
    """One network site: a hospital or a vertiport."""

    id: str
    kind: str
    lat: float
    lon: float
    co_located_vertiport: str | None = None

    def __post_init__(self):
        if self.kind not in NODE_KINDS:
            raise NetworkError(f"node {self.id!r}: unknown kind {self.kind!r}")
        if not -90.0 <= self.lat <= 90.0:
            raise NetworkError(f"node {self.id!r}: latitude {self.lat} out of [-90, 90]")
        if not -180.0 <= self.lon <= 180.0:
            raise NetworkError(f"node {self.id!r}: longitude {self.lon} out of [-180, 180]")
        if self.kind == VERTIPORT and self.co_located_vertiport is not None:
            raise NetworkError(f"vertiport {self.id!r} must not carry co_located_vertiport")

    @property
    def latlon(self) -> tuple[float, float]:
        return (self.lat, self.lon)


@dataclass
class Network:
    """Immutable-after-load site network with precomputed distance matrices."""

    nodes: dict[str, Node]
    ground_km: dict[tuple[str, str], float]
    nearest_vertiport_metric: str = "air"

    # derived, filled by __post_init__
    hospitals: list[str] = field(init=False)
    vertiports: list[str] = field(init=False)
    index: dict[str, int] = field(init=False)
    ids: list[str] = field(init=False)
    air_matrix: np.ndarray = field(init=False, repr=False)
    ground_matrix: np.ndarray = field(init=False, repr=False)
    nearest: dict[str, str] = field(init=False)

    def __post_init__(self):
        self.hospitals = sorted(n.id for n in self.nodes.values() if n.kind == HOSPITAL)
        self.vertiports = sorted(n.id for n in self.nodes.values() if n.kind == VERTIPORT)
        if not self.hospitals:
            raise NetworkError("network has no hospitals")
        if not self.vertiports:
            raise NetworkError("network has no vertiports; every hospital needs a reachable one")
        if self.nearest_vertiport_metric not in ("air", "ground"):
            raise NetworkError(
                f"nearest_vertiport_metric must be 'air' or 'ground', got {self.nearest_vertiport_metric!r}"
            )

        self.ids = sorted(self.nodes)
        self.index = {nid: i for i, nid in enumerate(self.ids)}
        n = len(self.ids)

        from . import kernels

        lats = np.array([self.nodes[i].lat for i in self.ids])
        lons = np.array([self.nodes[i].lon for i in self.ids])
        self.air_matrix = kernels.pairwise_haversine_km(lats, lons)

        self.ground_matrix = np.full((n, n), np.nan)
        np.fill_diagonal(self.ground_matrix, 0.0)
        for (a, b), km in self.ground_km.items():
            if a not in self.nodes or b not in self.nodes:
                raise NetworkError(f"ground distance references unknown node in ({a!r}, {b!r})")
            if km < self.air_matrix[self.index[a], self.index[b]] - 1e-9:
                raise NetworkError(
                    f"ground distance {a!r}->{b!r} of {km} km is below the great circle "
                    f"({self.air_matrix[self.index[a], self.index[b]]:.3f} km)"
                )
            self.ground_matrix[self.index[a], self.index[b]] = km
        # a one-directional entry stands for both directions
        for (a, b), km in list(self.ground_km.items()):
            i, j = self.index[a], self.index[b]
            if np.isnan(self.ground_matrix[j, i]):
                self.ground_matrix[j, i] = km
                self.ground_km[(b, a)] = km

        for nid, node in self.nodes.items():
            if node.co_located_vertiport is None:
                continue
            target = self.nodes.get(node.co_located_vertiport)
            if target is None or target.kind != VERTIPORT:
                raise NetworkError(
                    f"hospital {nid!r}: co_located_vertiport {node.co_located_vertiport!r} "
                    "does not name an existing vertiport"
                )

        self.nearest = {h: self._closest_vertiport(h) for h in self.hospitals}

    def _closest_vertiport(self, hospital_id: str) -> str:
        node = self.nodes[hospital_id]
        if node.co_located_vertiport is not None:
            return node.co_located_vertiport
        hi = self.index[hospital_id]
        best = None
        for v in self.vertiports:  # sorted ids: ties break to the smallest id
            if self.nearest_vertiport_metric == "ground":
                d = self.ground_matrix[hi, self.index[v]]
                if np.isnan(d):
                    continue
            else:
                d = self.air_matrix[hi, self.index[v]]
            if best is None or d < best[0]:
                best = (d, v)
        if best is None:
            raise NetworkError(f"hospital {hospital_id!r} has no reachable vertiport")
        return best[1]

    def air_distance_km(self, a: str, b: str) -> float:
        return float(self.air_matrix[self.index[a], self.index[b]])

    def ground_distance_km(self, a: str, b: str) -> float:
        d = self.ground_matrix[self.index[a], self.index[b]]
        if np.isnan(d):
            raise NetworkError(f"no ground distance between {a!r} and {b!r}")
        return float(d)

    def kind_of(self, node_id: str) -> str:
        return self.nodes[node_id].kind


def nearest_vertiport(network: Network, hospital_id: str) -> str:
    """Vertiport paired with a hospital: its co-located one, else the closest."""
    if hospital_id not in network.nodes:
        raise ConfigError(f"unknown hospital {hospital_id!r}")
    if network.nodes[hospital_id].kind != HOSPITAL:
        raise ConfigError(f"{hospital_id!r} is not a hospital")
    return network.nearest[hospital_id]


def load_network(path) -> Network:
    """Load and validate a network file.

    Schema (JSON): ``{"nodes": [{"id", "kind", "lat", "lon",
    "co_located_vertiport"?}], "ground_distance_km": [[from, to, km], ...],
    "nearest_vertiport_metric"?: "air"|"ground"}``.
    """
    try:
        with open(path) as fh:
            raw = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise NetworkError(f"cannot read network file {path}: {exc}") from exc

    if not isinstance(raw, dict) or "nodes" not in raw:
        raise NetworkError(f"network file {path} lacks a 'nodes' array")

    nodes: dict[str, Node] = {}
    for entry in raw["nodes"]:
        try:
            node = Node(
                id=str(entry["id"]),
                kind=str(entry["kind"]),
                lat=float(entry["lat"]),
                lon=float(entry["lon"]),
                co_located_vertiport=entry.get("co_located_vertiport"),
            )
        except KeyError as exc:
            raise NetworkError(f"node entry {entry!r} is missing field {exc}") from exc
        if node.id in nodes:
            raise NetworkError(f"duplicate node id {node.id!r}")
        nodes[node.id] = node

    ground: dict[tuple[str, str], float] = {}
    for row in raw.get("ground_distance_km", []):
        a, b, km = str(row[0]), str(row[1]), float(row[2])
        ground[(a, b)] = km

    return Network(
        nodes=nodes,
        ground_km=ground,
        nearest_vertiport_metric=raw.get("nearest_vertiport_metric", "air"),
    )
