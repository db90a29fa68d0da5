"""Synthetic scenario fixtures and their file writers.

The bundled topology mirrors a Northeast-Ohio hospital system: eight
hospitals and five airport vertiports, with the downtown campus treated as
vertiport-equipped. Congestion and wind inputs are generated
deterministically from a seed: ground flows follow a two-peak weekday
curve, winds are moderate and hourly per vertiport.
"""

from __future__ import annotations

import csv
import json

import numpy as np

from .errors import ConfigError
from .geo import HOSPITAL, VERTIPORT, Network, Node, haversine_km
from .traveltime import CongestionProfile, Horizon, WindField, WindRecord

# (id, kind, lat, lon, co-located vertiport)
NEO_NODES = [
    ("main-campus", HOSPITAL, 41.5034, -81.6207, "bkl"),
    ("lakewood", HOSPITAL, 41.4824, -81.7982, None),
    ("akron-general", HOSPITAL, 41.0775, -81.5307, None),
    ("stow-falls", HOSPITAL, 41.1617, -81.4368, None),
    ("mercy-canton", HOSPITAL, 40.8428, -81.3913, None),
    ("boardman", HOSPITAL, 41.0245, -80.6629, None),
    ("lorain", HOSPITAL, 41.4283, -82.1582, None),
    ("elyria", HOSPITAL, 41.3683, -82.1076, None),
    ("bkl", VERTIPORT, 41.5175, -81.6839, None),
    ("cak", VERTIPORT, 40.9161, -81.4422, None),
    ("yng", VERTIPORT, 41.2607, -80.6791, None),
    ("lpr", VERTIPORT, 41.3443, -82.1778, None),
    ("1g3", VERTIPORT, 41.1514, -81.4151, None),
]

#: Hourly congestion factor (flow/capacity) over a weekday; rush peaks at
#: 7-8 and 17-18 o'clock.
DAY_CONGESTION_FACTORS = [
    0.15, 0.10, 0.08, 0.08, 0.12, 0.30, 0.60, 0.95, 1.00, 0.70,
    0.55, 0.50, 0.55, 0.60, 0.65, 0.80, 0.95, 1.00, 0.85, 0.60,
    0.45, 0.35, 0.25, 0.20,
]

DEFAULT_FREE_SPEED_KMH = 90.0
DEFAULT_CAPACITY_PER_HOUR = 1600.0


def _ground_factor(rng: np.random.Generator) -> float:
    return float(rng.uniform(1.2, 1.45))


def _build_network(nodes: list[tuple], seed: int) -> Network:
    rng = np.random.default_rng(seed)
    node_objs = {
        nid: Node(id=nid, kind=kind, lat=lat, lon=lon, co_located_vertiport=colo)
        for nid, kind, lat, lon, colo in nodes
    }
    ids = sorted(node_objs)
    ground: dict[tuple[str, str], float] = {}
    for i, a in enumerate(ids):
        for b in ids[i + 1 :]:
            air = haversine_km(node_objs[a].latlon, node_objs[b].latlon)
            km = round(air * _ground_factor(rng), 3)
            ground[(a, b)] = km
            ground[(b, a)] = km
    return Network(nodes=node_objs, ground_km=ground)


def neo_network(seed: int = 42) -> Network:
    """The bundled eight-hospital/five-vertiport network."""
    return _build_network(NEO_NODES, seed)


def single_vertiport_network(seed: int = 42) -> Network:
    """Four hospitals around one central vertiport.

    Every hospital's nearest vertiport is the only vertiport, so heuristic
    and exhaustive route sets coincide; pair distances stay inside a small
    drone's range.
    """
    nodes = [
        ("h-north", HOSPITAL, 41.35, -81.60, None),
        ("h-east", HOSPITAL, 41.20, -81.44, None),
        ("h-south", HOSPITAL, 41.06, -81.60, None),
        ("h-west", HOSPITAL, 41.20, -81.76, None),
        ("v-center", VERTIPORT, 41.20, -81.60, None),
    ]
    return _build_network(nodes, seed)


def compact_network(seed: int = 42) -> Network:
    """Four hospitals and two vertiports within a ~30 km region.

    Pairs are short enough that ground service stays time-competitive, so
    the dominant eVTOL operating rate prices air legs out whenever cost
    carries weight.
    """
    nodes = [
        ("hosp-1", HOSPITAL, 41.00, -81.60, None),
        ("hosp-2", HOSPITAL, 41.10, -81.30, None),
        ("hosp-3", HOSPITAL, 40.90, -81.30, None),
        ("hosp-4", HOSPITAL, 41.05, -81.45, None),
        ("port-a", VERTIPORT, 41.02, -81.55, None),
        ("port-b", VERTIPORT, 41.00, -81.32, None),
    ]
    return _build_network(nodes, seed)


def random_network(n_hospitals: int, n_vertiports: int, seed: int = 0) -> Network:
    """Random sites in a ~100 km box, for scaling studies."""
    if n_hospitals < 2 or n_vertiports < 1:
        raise ConfigError("need at least two hospitals and one vertiport")
    rng = np.random.default_rng(seed)
    nodes = []
    for i in range(n_hospitals):
        nodes.append(
            (f"hosp-{i + 1:02d}", HOSPITAL, float(rng.uniform(40.9, 41.6)), float(rng.uniform(-82.2, -80.7)), None)
        )
    for i in range(n_vertiports):
        nodes.append(
            (f"port-{i + 1:02d}", VERTIPORT, float(rng.uniform(40.9, 41.6)), float(rng.uniform(-82.2, -80.7)), None)
        )
    return _build_network(nodes, seed + 1)


PRESETS = {
    "neo": neo_network,
    "single-vertiport": single_vertiport_network,
    "compact": compact_network,
}


def make_congestion_profiles(
    network: Network,
    horizon: Horizon,
    free_speed_kmh: float = DEFAULT_FREE_SPEED_KMH,
    capacity: float = DEFAULT_CAPACITY_PER_HOUR,
    factors: list[float] = DAY_CONGESTION_FACTORS,
) -> list[CongestionProfile]:
    """Per-pair BPR inputs; hourly flows sample the day curve over the horizon."""
    profiles = []
    first_hour = int(horizon.start // 60)
    flows = tuple(
        capacity * factors[(first_hour + h) % len(factors)] for h in range(horizon.n_hours)
    )
    for a in network.ids:
        for b in network.ids:
            if a == b:
                continue
            km = network.ground_distance_km(a, b)
            profiles.append(
                CongestionProfile(
                    origin=a,
                    destination=b,
                    free_flow_minutes=60.0 * km / free_speed_kmh,
                    capacity_per_hour=capacity,
                    hourly_flow=flows,
                )
            )
    return profiles


def make_wind_rows(
    network: Network,
    horizon: Horizon,
    seed: int = 7,
    speed_range: tuple[float, float] = (5.0, 35.0),
) -> list[tuple[str, int, float, float]]:
    """(node, hour, speed, met-direction) rows for every vertiport and hour."""
    rng = np.random.default_rng(seed)
    rows = []
    for v in network.vertiports:
        base_dir = float(rng.uniform(0.0, 360.0))
        for h in range(horizon.n_hours):
            speed = float(rng.uniform(*speed_range))
            direction = (base_dir + float(rng.uniform(-40.0, 40.0))) % 360.0
            rows.append((v, h, round(speed, 2), round(direction, 1)))
    return rows


def wind_field_from_rows(rows: list[tuple[str, int, float, float]]) -> WindField:
    return WindField([WindRecord.from_meteorological(*row) for row in rows])


def write_network_json(network: Network, path) -> None:
    payload = {
        "nodes": [
            {
                "id": n.id,
                "kind": n.kind,
                "lat": n.lat,
                "lon": n.lon,
                **({"co_located_vertiport": n.co_located_vertiport} if n.co_located_vertiport else {}),
            }
            for n in (network.nodes[i] for i in network.ids)
        ],
        "ground_distance_km": [[a, b, km] for (a, b), km in sorted(network.ground_km.items())],
        "nearest_vertiport_metric": network.nearest_vertiport_metric,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=1)


def write_congestion_csv(profiles: list[CongestionProfile], path) -> None:
    hours = len(profiles[0].hourly_flow) if profiles else 0
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["origin", "destination", "t_o_minutes", "capacity_per_hour"] + [f"h{i}" for i in range(hours)])
        for p in profiles:
            writer.writerow([p.origin, p.destination, repr(p.free_flow_minutes), repr(p.capacity_per_hour)] + [repr(f) for f in p.hourly_flow])


def write_wind_csv(rows: list[tuple[str, int, float, float]], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["node_id", "hour", "speed_kmh", "direction_deg"])
        writer.writerows(rows)


def write_fixture(
    preset: str,
    out_dir,
    horizon: Horizon | None = None,
    seed: int = 42,
    n_hospitals: int | None = None,
    n_vertiports: int | None = None,
) -> dict[str, str]:
    """Write network.json, congestion.csv and wind.csv for a preset; returns paths."""
    import os

    horizon = horizon or Horizon(540.0, 900.0)
    if preset == "random":
        network = random_network(n_hospitals or 8, n_vertiports or 5, seed)
    elif preset in PRESETS:
        network = PRESETS[preset](seed)
    else:
        raise ConfigError(f"unknown fixture preset {preset!r}; choose from {sorted(PRESETS)} or 'random'")
    os.makedirs(out_dir, exist_ok=True)
    paths = {
        "network": os.path.join(out_dir, "network.json"),
        "congestion": os.path.join(out_dir, "congestion.csv"),
        "wind": os.path.join(out_dir, "wind.csv"),
    }
    write_network_json(network, paths["network"])
    write_congestion_csv(make_congestion_profiles(network, horizon), paths["congestion"])
    write_wind_csv(make_wind_rows(network, horizon, seed=seed + 1), paths["wind"])
    return paths
