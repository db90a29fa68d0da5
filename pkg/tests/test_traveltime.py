from __future__ import annotations

import math

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from meddispatch import fixtures
from meddispatch.errors import DataError
from meddispatch.fleet import config_for_id
from meddispatch.geo import initial_bearing_deg
from meddispatch.traveltime import (
    AMBULANCE,
    CongestionProfile,
    EVTOL,
    Horizon,
    INFEASIBLE,
    MODES,
    UAV,
    WindField,
    WindRecord,
    air_minutes,
    bpr_minutes,
    build_travel_time_table,
    effective_airspeed_kmh,
    is_infeasible,
    load_congestion_csv,
    load_wind_csv,
)

from conftest import calm_winds, flat_congestion, micro_network, MICRO_MINUTES


def test_bpr_zero_flow_is_free_flow():
    assert bpr_minutes(23.5, 0.0, 1200.0) == 23.5


def test_bpr_at_capacity_exact():
    for t_o in (1.0, 7.3, 30.0):
        assert bpr_minutes(t_o, 1200.0, 1200.0) == 1.15 * t_o


def test_bpr_at_twice_capacity_exact():
    # 1 + 0.15 * 2^4 = 3.4
    for t_o in (1.0, 7.3, 30.0):
        assert bpr_minutes(t_o, 2400.0, 1200.0) == 3.4 * t_o


def test_bpr_rejects_nonpositive_capacity():
    with pytest.raises(ValueError):
        bpr_minutes(10.0, 100.0, 0.0)


@given(
    st.floats(min_value=0.1, max_value=500),
    st.floats(min_value=0, max_value=4000),
    st.floats(min_value=0, max_value=4000),
    st.floats(min_value=1, max_value=4000),
)
@settings(max_examples=200)
def test_bpr_monotone_in_flow(t_o, f1, f2, c):
    lo, hi = sorted((f1, f2))
    assert bpr_minutes(t_o, lo, c) <= bpr_minutes(t_o, hi, c)
    assert bpr_minutes(t_o, 0.0, c) == t_o


def _wind(node, e, n, hour=0):
    return WindRecord(node, hour, e, n)


def test_effective_airspeed_calm_is_cruise():
    assert effective_airspeed_kmh(200.0, 123.0, _wind("a", 0, 0), _wind("b", 0, 0)) == 200.0


def test_effective_airspeed_pure_tailwind_adds():
    # eastbound track, 20 km/h wind blowing east at both ends
    assert effective_airspeed_kmh(200.0, 90.0, _wind("a", 20, 0), _wind("b", 20, 0)) == pytest.approx(220.0)


def test_effective_airspeed_crosswind_no_change():
    # northbound track, pure easterly crosswind
    assert effective_airspeed_kmh(200.0, 0.0, _wind("a", 30, 0), _wind("b", 30, 0)) == pytest.approx(200.0)


def test_effective_airspeed_headwind_can_go_nonpositive():
    assert effective_airspeed_kmh(100.0, 90.0, _wind("a", -120, 0), _wind("b", -120, 0)) <= 0.0


def test_effective_airspeed_averages_endpoint_winds():
    v = effective_airspeed_kmh(200.0, 90.0, _wind("a", 40, 0), _wind("b", 0, 0))
    assert v == pytest.approx(220.0)


def test_air_minutes_ratio_and_infeasible():
    network = micro_network()
    horizon = Horizon(0.0, 360.0)
    d = network.air_distance_km("h-a", "h-b")
    calm = WindField([_wind(v, 0.0, 0.0) for v in network.vertiports])
    minutes = air_minutes(network, calm, "h-a", "h-b", 0, 200.0)
    assert minutes == pytest.approx(60.0 * d / 200.0, rel=1e-12)

    bearing = initial_bearing_deg(network.nodes["h-a"].latlon, network.nodes["h-b"].latlon)
    rad = math.radians(bearing)
    # +10% tailwind along track vs calm: minutes scale by 1/1.1
    tail = WindField([_wind(v, 20.0 * math.sin(rad), 20.0 * math.cos(rad)) for v in network.vertiports])
    with_tail = air_minutes(network, tail, "h-a", "h-b", 0, 200.0)
    assert with_tail == pytest.approx(minutes / 1.1, rel=1e-9)

    # headwind equal to cruise grounds the leg
    dead = WindField([_wind(v, -150.0 * math.sin(rad), -150.0 * math.cos(rad)) for v in network.vertiports])
    assert is_infeasible(air_minutes(network, dead, "h-a", "h-b", 0, 150.0))


def test_air_minutes_missing_record_names_node_and_hour():
    network = micro_network()
    calm = WindField([_wind("v-x", 0.0, 0.0, hour=0)])
    with pytest.raises(DataError, match="hour 3"):
        air_minutes(network, calm, "h-a", "h-b", 3, 200.0)


def test_wind_record_sanity_bound():
    with pytest.raises(DataError):
        WindRecord("v", 0, 180.0, 120.0)


def test_meteorological_components():
    # wind from the north blows southward
    rec = WindRecord.from_meteorological("v", 0, 10.0, 0.0)
    assert rec.east_kmh == pytest.approx(0.0, abs=1e-12)
    assert rec.north_kmh == pytest.approx(-10.0)
    # wind from the west blows eastward
    rec = WindRecord.from_meteorological("v", 0, 10.0, 270.0)
    assert rec.east_kmh == pytest.approx(10.0)
    assert rec.north_kmh == pytest.approx(0.0, abs=1e-12)


def _micro_table(horizon=None, winds=None):
    network = micro_network()
    horizon = horizon or Horizon(0.0, 360.0)
    winds = winds or calm_winds(network, horizon)
    config = config_for_id(4)
    specs = config.specs()
    table = build_travel_time_table(
        network,
        flat_congestion(network, horizon, MICRO_MINUTES),
        winds,
        {m: specs[m].cruise_kmh for m in MODES},
        horizon,
    )
    return network, table


def test_table_degenerate_calm_zero_flow():
    network, table = _micro_table()
    d = network.air_distance_km("h-a", "h-b")
    assert table.minutes(AMBULANCE, "h-a", "h-b", 0) == 30.0  # free flow exactly
    assert table.minutes(EVTOL, "h-a", "h-b", 2) == pytest.approx(60.0 * d / 322.0, rel=1e-9)
    assert table.minutes(UAV, "h-a", "h-b", 2) == pytest.approx(60.0 * d / 112.0, rel=1e-9)
    for mode in MODES:
        assert table.minutes(mode, "h-a", "h-a", 0) == 0.0


def test_table_peak_hour_ground_strictly_slower():
    network = micro_network()
    horizon = Horizon(0.0, 120.0)
    profiles = [
        CongestionProfile(a, b, MICRO_MINUTES[(a, b)], 1000.0, (100.0, 900.0))
        for a in network.ids
        for b in network.ids
        if a != b
    ]
    config = config_for_id(4)
    specs = config.specs()
    table = build_travel_time_table(
        network, profiles, calm_winds(network, horizon),
        {m: specs[m].cruise_kmh for m in MODES}, horizon,
    )
    assert table.minutes(AMBULANCE, "h-a", "h-b", 1) > table.minutes(AMBULANCE, "h-a", "h-b", 0)
    # never below free flow
    for h in range(horizon.n_hours):
        assert table.minutes(AMBULANCE, "h-a", "h-b", h) >= 30.0


def test_table_coverage_errors():
    network = micro_network()
    horizon = Horizon(0.0, 360.0)
    config = config_for_id(4)
    specs = config.specs()
    cruise = {m: specs[m].cruise_kmh for m in MODES}
    profiles = flat_congestion(network, horizon, MICRO_MINUTES)
    with pytest.raises(DataError, match="missing"):
        build_travel_time_table(network, profiles[:-1], calm_winds(network, horizon), cruise, horizon)
    short = [
        CongestionProfile(p.origin, p.destination, p.free_flow_minutes, p.capacity_per_hour, (0.0,))
        for p in profiles
    ]
    with pytest.raises(DataError, match="hours"):
        build_travel_time_table(network, short, calm_winds(network, horizon), cruise, horizon)
    with pytest.raises(DataError, match="wind"):
        build_travel_time_table(network, profiles, WindField([]), cruise, horizon)


def test_hospital_wind_falls_back_to_nearest_vertiport():
    network = micro_network()
    winds = WindField([_wind("v-x", 5.0, -3.0, hour=h) for h in range(6)])
    rec = winds.get(network, "h-a", 2)
    assert (rec.east_kmh, rec.north_kmh) == (5.0, -3.0)


def test_reversed_leg_flips_along_track_sign():
    """Uniform west->east wind: eastbound legs get faster, westbound slower."""
    network = micro_network()  # h-a and h-b share a latitude: pure east-west track
    horizon = Horizon(0.0, 60.0)
    windy = WindField([_wind(v, 30.0, 0.0, hour=0) for v in network.vertiports])
    config = config_for_id(4)
    specs = config.specs()
    cruise = {m: specs[m].cruise_kmh for m in MODES}
    calm_table = build_travel_time_table(
        network, flat_congestion(network, horizon, MICRO_MINUTES), calm_winds(network, horizon), cruise, horizon
    )
    wind_table = build_travel_time_table(
        network, flat_congestion(network, horizon, MICRO_MINUTES), windy, cruise, horizon
    )
    calm = calm_table.minutes(UAV, "h-a", "h-b", 0)
    east = wind_table.minutes(UAV, "h-a", "h-b", 0)  # h-b lies east of h-a
    west = wind_table.minutes(UAV, "h-b", "h-a", 0)
    assert east < calm < west


def test_grounding_threshold_marks_infeasible():
    network = micro_network()
    horizon = Horizon(0.0, 60.0)
    windy = WindField([_wind(v, 30.0, 0.0, hour=0) for v in network.vertiports])
    config = config_for_id(4)
    specs = config.specs()
    cruise = {m: specs[m].cruise_kmh for m in MODES}
    table = build_travel_time_table(
        network, flat_congestion(network, horizon, MICRO_MINUTES), windy, cruise, horizon, max_wind_kmh=25.0
    )
    assert is_infeasible(table.minutes(UAV, "h-a", "h-b", 0))
    no_limit = build_travel_time_table(
        network, flat_congestion(network, horizon, MICRO_MINUTES), windy, cruise, horizon
    )
    assert not is_infeasible(no_limit.minutes(UAV, "h-a", "h-b", 0))


def test_two_peak_day_curve_shows_in_ground_times(tmp_path):
    """A full-day horizon over the bundled congestion curve has two rush peaks."""
    network = fixtures.neo_network()
    horizon = Horizon(360.0, 1200.0)  # 6:00-20:00
    profiles = fixtures.make_congestion_profiles(network, horizon)
    winds = fixtures.wind_field_from_rows(fixtures.make_wind_rows(network, horizon))
    config = config_for_id(4)
    specs = config.specs()
    table = build_travel_time_table(
        network, profiles, winds, {m: specs[m].cruise_kmh for m in MODES}, horizon
    )
    series = [table.minutes(AMBULANCE, "main-campus", "akron-general", h) for h in range(horizon.n_hours)]
    peaks = [
        h
        for h in range(1, len(series) - 1)
        if series[h] >= series[h - 1] and series[h] >= series[h + 1] and series[h] > min(series)
    ]
    morning = [h for h in peaks if 360 + 60 * h < 600]
    evening = [h for h in peaks if 360 + 60 * h >= 900]
    assert morning and evening, f"expected two rush periods, got peaks at {peaks}"


def test_csv_loaders_roundtrip(tmp_path):
    network = micro_network()
    horizon = Horizon(0.0, 360.0)
    profiles = fixtures.make_congestion_profiles(network, horizon)
    rows = fixtures.make_wind_rows(network, horizon, seed=3)
    cpath, wpath = tmp_path / "c.csv", tmp_path / "w.csv"
    fixtures.write_congestion_csv(profiles, cpath)
    fixtures.write_wind_csv(rows, wpath)
    loaded = load_congestion_csv(cpath, horizon)
    assert len(loaded) == len(profiles)
    assert loaded[0] == profiles[0]
    winds = load_wind_csv(wpath)
    assert winds.get(network, "v-x", 0) is not None


def test_congestion_loader_reports_line_numbers(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("origin,destination,t_o_minutes,capacity_per_hour,h0\na,b,oops,1000,0\n")
    with pytest.raises(DataError, match=":2"):
        load_congestion_csv(path, Horizon(0.0, 60.0))
