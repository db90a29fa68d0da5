from __future__ import annotations

import pytest

from meddispatch import fixtures, kernels
from meddispatch.demand import DemandParams, generate_demand
from meddispatch.dispatch import NormalizationConstants
from meddispatch.fleet import config_for_id
from meddispatch.geo import HOSPITAL, VERTIPORT, Network, Node
from meddispatch.traveltime import (
    CongestionProfile,
    Horizon,
    MODES,
    WindField,
    WindRecord,
    build_travel_time_table,
)


@pytest.fixture(params=["numba", "numpy"])
def backend(request):
    """Run a test under both kernel backends."""
    old = kernels.use_backend(request.param)
    yield request.param
    kernels.use_backend(old)


def calm_winds(network: Network, horizon: Horizon) -> WindField:
    return WindField(
        [WindRecord(v, h, 0.0, 0.0) for v in network.vertiports for h in range(horizon.n_hours)]
    )


def flat_congestion(network: Network, horizon: Horizon, minutes: dict) -> list[CongestionProfile]:
    """Zero-flow profiles with fixed free-flow minutes per ordered pair."""
    return [
        CongestionProfile(
            origin=a,
            destination=b,
            free_flow_minutes=minutes[(a, b)],
            capacity_per_hour=1000.0,
            hourly_flow=(0.0,) * horizon.n_hours,
        )
        for a in network.ids
        for b in network.ids
        if a != b
    ]


def micro_network() -> Network:
    """Two hospitals 42 km apart with one vertiport between them."""
    nodes = {
        "h-a": Node("h-a", HOSPITAL, 41.0, -81.0, None),
        "h-b": Node("h-b", HOSPITAL, 41.0, -80.5, None),
        "v-x": Node("v-x", VERTIPORT, 41.0, -80.75, None),
    }
    ground = {}
    for a in nodes:
        for b in nodes:
            if a != b:
                ground[(a, b)] = 50.0 if {a, b} == {"h-a", "h-b"} else 26.0
    return Network(nodes=nodes, ground_km=ground)


MICRO_MINUTES = {}  # free-flow minutes per ordered pair of the micro network
for _a in ("h-a", "h-b", "v-x"):
    for _b in ("h-a", "h-b", "v-x"):
        if _a != _b:
            MICRO_MINUTES[(_a, _b)] = 30.0 if {_a, _b} == {"h-a", "h-b"} else 16.0


@pytest.fixture
def micro():
    """Calm-wind, zero-flow micro scenario with exact, hand-checkable numbers."""
    horizon = Horizon(0.0, 360.0)
    network = micro_network()
    winds = calm_winds(network, horizon)
    config = config_for_id(4, per_mode=1)
    specs = config.specs()
    table = build_travel_time_table(
        network,
        flat_congestion(network, horizon, MICRO_MINUTES),
        winds,
        {m: specs[m].cruise_kmh for m in MODES},
        horizon,
    )
    norms = NormalizationConstants.for_scenario(network, specs, horizon)
    return network, table, specs, norms, horizon


def build_scenario_bundle(network: Network, horizon: Horizon, seed: int = 7):
    """(table, specs, norms) for a fixture network with generated conditions."""
    config = config_for_id(4)
    specs = config.specs()
    profiles = fixtures.make_congestion_profiles(network, horizon)
    winds = fixtures.wind_field_from_rows(fixtures.make_wind_rows(network, horizon, seed=seed))
    table = build_travel_time_table(
        network, profiles, winds, {m: specs[m].cruise_kmh for m in MODES}, horizon
    )
    norms = NormalizationConstants.for_scenario(network, specs, horizon)
    return table, specs, norms


@pytest.fixture(scope="session")
def neo():
    """The bundled Northeast-Ohio network with synthetic conditions."""
    horizon = Horizon(540.0, 900.0)
    network = fixtures.neo_network()
    table, specs, norms = build_scenario_bundle(network, horizon)
    return network, table, specs, norms, horizon


@pytest.fixture(scope="session")
def neo_requests(neo):
    network, table, _, _, horizon = neo
    params = DemandParams(request_count=50, horizon=horizon, hub_hospital_id="main-campus", seed=11)
    return generate_demand(params, network, table)


@pytest.fixture(scope="session")
def single_vertiport():
    horizon = Horizon(540.0, 900.0)
    network = fixtures.single_vertiport_network()
    table, specs, norms = build_scenario_bundle(network, horizon)
    return network, table, specs, norms, horizon
