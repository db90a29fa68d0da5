"""Scenario orchestration: runs, configuration studies, gap studies, benches.

A scenario is deterministic given its config and seed; reports therefore
split into hash-stable row files (requests.csv, legs.csv) and a summary
document that also carries wall-clock statistics and environment metadata.
"""

from __future__ import annotations

import dataclasses
import hashlib
import io
import json
import os
import platform
import statistics
import time
from dataclasses import dataclass, field

from . import kernels
from .baselines import GapSummary, baseline_dispatch, exhaustive_dispatch, optimality_gap
from .demand import DemandParams, Request, generate_demand, load_requests, validate_requests
from .dispatch import (
    DispatchPlan,
    NormalizationConstants,
    ObjectiveWeights,
    PRIORITY_SETTINGS,
    dispatch_request,
)
from .errors import ConfigError
from .fleet import Fleet, FleetConfig, config_for_id
from .geo import Network, load_network
from .traveltime import (
    AMBULANCE,
    EVTOL,
    Horizon,
    MODES,
    TravelTimeTable,
    UAV,
    build_travel_time_table,
    load_congestion_csv,
    load_wind_csv,
)

ALGORITHMS = ("m2dh", "baseline", "exhaustive")


@dataclass(frozen=True)
class ScenarioConfig:
    network_path: str
    congestion_path: str
    wind_path: str
    requests_path: str | None = None
    demand: DemandParams | None = None
    configuration_id: int | None = 4
    counts: dict[str, int] | None = None
    per_mode_count: int = 12
    spec_overrides: dict = field(default_factory=dict)
    weights: tuple[float, float] = (1.0, 1.0)
    algorithm: str = "m2dh"
    seed: int = 0
    horizon: tuple[float, float] = (540.0, 900.0)
    max_wind_kmh: float | None = None
    demand_baseline: str = "congested"  # or "free_flow"
    out_dir: str | None = None

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ConfigError(f"algorithm must be one of {ALGORITHMS}, got {self.algorithm!r}")
        if self.requests_path is None and self.demand is None:
            object.__setattr__(self, "demand", DemandParams())
        if self.demand_baseline not in ("congested", "free_flow"):
            raise ConfigError("demand_baseline must be 'congested' or 'free_flow'")

    def fleet_config(self) -> FleetConfig:
        if self.counts is not None:
            return FleetConfig(counts=dict(self.counts), spec_overrides=dict(self.spec_overrides))
        if self.configuration_id is None:
            raise ConfigError("either counts or configuration_id must be given")
        return config_for_id(self.configuration_id, self.per_mode_count, dict(self.spec_overrides))


@dataclass
class Scenario:
    """Materialized inputs for one or more runs over the same data."""

    config: ScenarioConfig
    network: Network
    table: TravelTimeTable
    requests: list[Request]
    horizon: Horizon
    norms: NormalizationConstants

    def fresh_fleet(self, configuration_id: int | None = None) -> Fleet:
        cfg = self.config
        if configuration_id is not None:
            fleet_config = config_for_id(configuration_id, cfg.per_mode_count, dict(cfg.spec_overrides))
        else:
            fleet_config = cfg.fleet_config()
        return Fleet.create(fleet_config, self.network, self.horizon)


def load_scenario(config: ScenarioConfig) -> Scenario:
    horizon = Horizon(*config.horizon)
    network = load_network(config.network_path)
    profiles = load_congestion_csv(config.congestion_path, horizon)
    winds = load_wind_csv(config.wind_path)
    specs = config.fleet_config().specs()
    cruise = {m: specs[m].cruise_kmh for m in MODES}
    table = build_travel_time_table(network, profiles, winds, cruise, horizon, config.max_wind_kmh)

    if config.requests_path is not None:
        requests = load_requests(config.requests_path)
    else:
        params = dataclasses.replace(config.demand, seed=config.seed, horizon=horizon)
        baseline_table = table
        if config.demand_baseline == "free_flow":
            zero = [dataclasses.replace(p, hourly_flow=(0.0,) * horizon.n_hours) for p in profiles]
            baseline_table = build_travel_time_table(network, zero, winds, cruise, horizon, config.max_wind_kmh)
        requests = generate_demand(params, network, baseline_table)
    validate_requests(requests, network, horizon)

    norms = NormalizationConstants.for_scenario(network, specs, horizon)
    return Scenario(
        config=config, network=network, table=table, requests=requests, horizon=horizon, norms=norms
    )


def dispatch_fn(algorithm: str):
    if algorithm == "m2dh":
        return dispatch_request
    if algorithm == "baseline":
        return baseline_dispatch
    if algorithm == "exhaustive":
        return exhaustive_dispatch
    raise ConfigError(f"unknown algorithm {algorithm!r}")


@dataclass(frozen=True)
class RequestOutcome:
    request: Request
    plan: DispatchPlan | None
    runtime_s: float

    @property
    def served(self) -> bool:
        return self.plan is not None


@dataclass
class ScenarioReport:
    config_echo: dict
    outcomes: list[RequestOutcome]
    violations: list[str]
    request_list_sha: str

    @property
    def served(self) -> int:
        return sum(1 for o in self.outcomes if o.served)

    @property
    def infeasible(self) -> int:
        return len(self.outcomes) - self.served

    @property
    def total_objective(self) -> float:
        return sum(o.plan.objective for o in self.outcomes if o.served)

    @property
    def total_time_minutes(self) -> float:
        return sum(o.plan.totals.wait + o.plan.totals.travel for o in self.outcomes if o.served)

    @property
    def total_operating_cost(self) -> float:
        return sum(o.plan.totals.operating for o in self.outcomes if o.served)

    @property
    def total_energy_cost(self) -> float:
        return sum(o.plan.totals.energy for o in self.outcomes if o.served)

    def runtime_stats(self) -> dict:
        times = [o.runtime_s for o in self.outcomes]
        if not times:
            return {"mean_s": 0.0, "max_s": 0.0, "total_s": 0.0}
        return {"mean_s": sum(times) / len(times), "max_s": max(times), "total_s": sum(times)}

    def rows_csv(self) -> str:
        buf = io.StringIO()
        buf.write(
            "request_id,kind,origin,destination,ready_minute,deadline_minute,"
            "served,legs,wait_minutes,travel_minutes,energy_cost,operating_cost,objective\n"
        )
        for o in self.outcomes:
            r = o.request
            if o.served:
                p = o.plan
                tail = (
                    f"1,{len(p.legs)},{p.totals.wait!r},{p.totals.travel!r},"
                    f"{p.totals.energy!r},{p.totals.operating!r},{p.objective!r}"
                )
            else:
                tail = "0,0,,,,,"
            buf.write(
                f"{r.id},{r.kind},{r.origin},{r.destination},{r.ready_time!r},{r.deadline!r},{tail}\n"
            )
        return buf.getvalue()

    def legs_csv(self) -> str:
        buf = io.StringIO()
        buf.write(
            "request_id,leg_index,vehicle_id,mode,origin,destination,service_origin,"
            "service_destination,reposition_from,reposition_start,pickup,dropoff,"
            "wait_minutes,travel_minutes,energy_cost,operating_cost,distance_km,units,consolidated\n"
        )
        for o in self.outcomes:
            if not o.served:
                continue
            for i, leg in enumerate(o.plan.legs, start=1):
                buf.write(
                    f"{leg.request_id},{i},{leg.vehicle_id},{leg.mode},{leg.origin},"
                    f"{leg.destination},{leg.service_origin},{leg.service_destination},"
                    f"{leg.reposition_from},{leg.reposition_start!r},{leg.pickup!r},"
                    f"{leg.dropoff!r},{leg.wait_minutes!r},{leg.travel_minutes!r},"
                    f"{leg.energy_cost!r},{leg.operating_cost!r},{leg.distance_km!r},"
                    f"{leg.units},{1 if leg.consolidated else 0}\n"
                )
        return buf.getvalue()

    @property
    def report_sha(self) -> str:
        digest = hashlib.sha256()
        digest.update(self.rows_csv().encode())
        digest.update(self.legs_csv().encode())
        return digest.hexdigest()

    def summary(self) -> dict:
        return {
            "schema": "meddispatch.report.v1",
            "config": self.config_echo,
            "requests": len(self.outcomes),
            "served": self.served,
            "infeasible": self.infeasible,
            "total_objective": self.total_objective,
            "total_time_minutes": self.total_time_minutes,
            "total_operating_cost": self.total_operating_cost,
            "total_energy_cost": self.total_energy_cost,
            "violations": self.violations,
            "request_list_sha": self.request_list_sha,
            "report_sha": self.report_sha,
            "runtime": self.runtime_stats(),
            "kernel_backend": kernels.active_backend(),
        }

    def write(self, out_dir) -> None:
        os.makedirs(out_dir, exist_ok=True)
        with open(os.path.join(out_dir, "requests.csv"), "w") as fh:
            fh.write(self.rows_csv())
        with open(os.path.join(out_dir, "legs.csv"), "w") as fh:
            fh.write(self.legs_csv())
        with open(os.path.join(out_dir, "summary.json"), "w") as fh:
            json.dump(self.summary(), fh, indent=1)


def _request_list_sha(requests: list[Request]) -> str:
    digest = hashlib.sha256()
    for r in requests:
        digest.update(
            f"{r.id},{r.kind},{r.origin},{r.destination},{r.ready_time!r},{r.deadline!r}\n".encode()
        )
    return digest.hexdigest()


def run_dispatch_loop(
    scenario: Scenario,
    fleet: Fleet,
    weights: ObjectiveWeights,
    algorithm: str = "m2dh",
) -> list[RequestOutcome]:
    """Serve all requests in ready-time order on the given fleet."""
    fn = dispatch_fn(algorithm)
    outcomes = []
    for request in sorted(scenario.requests, key=lambda r: (r.ready_time, r.id)):
        t0 = time.perf_counter()
        plan = fn(request, fleet, scenario.network, scenario.table, weights, scenario.norms)
        outcomes.append(RequestOutcome(request=request, plan=plan, runtime_s=time.perf_counter() - t0))
    return outcomes


def run_scenario(config: ScenarioConfig, scenario: Scenario | None = None) -> ScenarioReport:
    """Execute one scenario end to end, audit the plans, optionally write reports."""
    from .audit import validate_plans

    scenario = scenario or load_scenario(config)
    fleet = scenario.fresh_fleet()
    weights = ObjectiveWeights(*config.weights)
    outcomes = run_dispatch_loop(scenario, fleet, weights, config.algorithm)

    plans = [o.plan for o in outcomes if o.served]
    requests_by_id = {r.id: r for r in scenario.requests}
    violations = validate_plans(plans, requests_by_id, fleet, scenario.network, scenario.horizon)

    echo = {
        "network": config.network_path,
        "congestion": config.congestion_path,
        "wind": config.wind_path,
        "algorithm": config.algorithm,
        "weights": list(config.weights),
        "seed": config.seed,
        "horizon": list(config.horizon),
        "configuration_id": config.configuration_id,
        "counts": config.counts,
        "per_mode_count": config.per_mode_count,
    }
    report = ScenarioReport(
        config_echo=echo,
        outcomes=outcomes,
        violations=violations,
        request_list_sha=_request_list_sha(scenario.requests),
    )
    if config.out_dir:
        report.write(config.out_dir)
    return report


@dataclass(frozen=True)
class StudyCell:
    configuration_id: int
    priority: str
    weights: tuple[float, float]
    report: ScenarioReport


def compare_configurations(
    config: ScenarioConfig,
    configuration_ids: tuple[int, ...] = (1, 2, 3, 4),
    priorities: tuple[str, ...] = tuple(PRIORITY_SETTINGS),
    scenario: Scenario | None = None,
) -> list[StudyCell]:
    """One scenario run per (fleet configuration, priority), shared demand."""
    scenario = scenario or load_scenario(config)
    cells = []
    for cid in configuration_ids:
        for name in priorities:
            w = PRIORITY_SETTINGS[name]
            cell_config = dataclasses.replace(
                config, configuration_id=cid, counts=None, weights=w, out_dir=None
            )
            report = run_scenario(cell_config, scenario=dataclasses.replace(scenario, config=cell_config))
            cells.append(StudyCell(configuration_id=cid, priority=name, weights=w, report=report))
    return cells


def comparison_csv(cells: list[StudyCell]) -> str:
    buf = io.StringIO()
    buf.write(
        "configuration,priority,w_t,w_c,requests,served,infeasible,total_objective,"
        "total_time_minutes,total_operating_cost,total_energy_cost,report_sha\n"
    )
    for c in cells:
        r = c.report
        buf.write(
            f"{c.configuration_id},{c.priority},{c.weights[0]!r},{c.weights[1]!r},"
            f"{len(r.outcomes)},{r.served},{r.infeasible},{r.total_objective!r},"
            f"{r.total_time_minutes!r},{r.total_operating_cost!r},{r.total_energy_cost!r},"
            f"{r.report_sha}\n"
        )
    return buf.getvalue()


def _text_table(header: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h) for i, h in enumerate(header)]
    def fmt(row):
        return "  ".join(cell.rjust(w) for cell, w in zip(row, widths))
    lines = [fmt(header), fmt(["-" * w for w in widths])]
    lines.extend(fmt(r) for r in rows)
    return "\n".join(lines) + "\n"


def comparison_table(cells: list[StudyCell]) -> str:
    """Aligned, human-readable study summary."""
    rows = [
        [
            str(c.configuration_id),
            c.priority,
            str(c.report.served),
            str(c.report.infeasible),
            f"{c.report.total_objective:.4f}",
            f"{c.report.total_time_minutes:.1f}",
            f"{c.report.total_operating_cost:.2f}",
            f"{c.report.total_energy_cost:.2f}",
        ]
        for c in cells
    ]
    return _text_table(
        ["cfg", "priority", "served", "infeasible", "sum z", "time min", "op $", "energy $"], rows
    )


def write_comparison_study(cells: list[StudyCell], out_dir) -> None:
    """comparison.csv + summary.txt + one full report per cell."""
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "comparison.csv"), "w") as fh:
        fh.write(comparison_csv(cells))
    with open(os.path.join(out_dir, "summary.txt"), "w") as fh:
        fh.write(comparison_table(cells))
    for c in cells:
        c.report.write(os.path.join(out_dir, "cells", f"cfg{c.configuration_id}-{c.priority}"))


@dataclass(frozen=True)
class GapCell:
    configuration_id: int
    priority: str
    summary: GapSummary
    heuristic_infeasible: int

    @property
    def average_pct(self) -> float:
        return self.summary.average_pct

    @property
    def maximum_pct(self) -> float:
        return self.summary.maximum_pct


def gap_cell(
    scenario: Scenario,
    configuration_id: int,
    priority: str,
) -> GapCell:
    """Synchronized-state gap protocol for one cell.

    Before each request the oracle runs on a copy of the current fleet
    state and is discarded; the heuristic's plan is the one committed, so
    both algorithms price every request from identical states.
    """
    weights = ObjectiveWeights(*PRIORITY_SETTINGS[priority])
    fleet = scenario.fresh_fleet(configuration_id)
    pairs = []
    skipped = 0
    for request in sorted(scenario.requests, key=lambda r: (r.ready_time, r.id)):
        oracle_plan = exhaustive_dispatch(
            request, fleet.clone(), scenario.network, scenario.table, weights, scenario.norms
        )
        plan = dispatch_request(
            request, fleet, scenario.network, scenario.table, weights, scenario.norms
        )
        if plan is None:
            skipped += 1
            continue
        if oracle_plan is None:
            # superset search space cannot fail where the heuristic succeeded
            raise ConfigError(f"oracle infeasible but heuristic served {request.id}")
        pairs.append((request.id, plan.objective, oracle_plan.objective))
    return GapCell(
        configuration_id=configuration_id,
        priority=priority,
        summary=optimality_gap(pairs),
        heuristic_infeasible=skipped,
    )


def gap_study(
    config: ScenarioConfig,
    configuration_ids: tuple[int, ...] = (1, 2, 3, 4),
    priorities: tuple[str, ...] = tuple(PRIORITY_SETTINGS),
    scenario: Scenario | None = None,
) -> list[GapCell]:
    scenario = scenario or load_scenario(config)
    return [gap_cell(scenario, cid, name) for name in priorities for cid in configuration_ids]


def gap_csv(cells: list[GapCell]) -> str:
    buf = io.StringIO()
    buf.write("priority,configuration,average_gap_pct,maximum_gap_pct,requests,undefined,heuristic_infeasible\n")
    for c in cells:
        buf.write(
            f"{c.priority},{c.configuration_id},{c.average_pct!r},{c.maximum_pct!r},"
            f"{len(c.summary.records)},{len(c.summary.undefined)},{c.heuristic_infeasible}\n"
        )
    return buf.getvalue()


def gap_table(cells: list[GapCell]) -> str:
    """Average (maximum) optimality gap per cell, human-readable."""
    rows = [
        [c.priority, str(c.configuration_id), f"{c.average_pct:.2f} ({c.maximum_pct:.2f})"]
        for c in cells
    ]
    return _text_table(["priority", "cfg", "avg (max) gap %"], rows)


def write_gap_study(cells: list[GapCell], out_dir) -> None:
    os.makedirs(out_dir, exist_ok=True)
    with open(os.path.join(out_dir, "gap.csv"), "w") as fh:
        fh.write(gap_csv(cells))
    with open(os.path.join(out_dir, "summary.txt"), "w") as fh:
        fh.write(gap_table(cells))


def _split_fleet(total: int) -> dict[str, int]:
    return {AMBULANCE: (total + 2) // 3, UAV: (total + 1) // 3, EVTOL: total // 3}


@dataclass(frozen=True)
class BenchRow:
    algorithm: str
    n_vehicles: int
    mean_per_request_s: float
    max_per_request_s: float


def runtime_bench(
    config: ScenarioConfig,
    fleet_sizes: tuple[int, ...] = (10, 20, 30, 40, 50),
    algorithms: tuple[str, ...] = ("m2dh", "baseline", "exhaustive"),
    repeats: int = 3,
    scenario: Scenario | None = None,
) -> tuple[list[BenchRow], dict]:
    """Median-of-`repeats` per-request wall clock across fleet sizes."""
    scenario = scenario or load_scenario(config)
    weights = ObjectiveWeights(*config.weights)
    rows = []
    for algorithm in algorithms:
        for total in fleet_sizes:
            counts = _split_fleet(total)
            means, maxes = [], []
            for _ in range(repeats):
                fleet = Fleet.create(
                    FleetConfig(counts=counts, spec_overrides=dict(config.spec_overrides)),
                    scenario.network,
                    scenario.horizon,
                )
                outcomes = run_dispatch_loop(scenario, fleet, weights, algorithm)
                times = [o.runtime_s for o in outcomes]
                means.append(sum(times) / len(times))
                maxes.append(max(times))
            rows.append(
                BenchRow(
                    algorithm=algorithm,
                    n_vehicles=total,
                    mean_per_request_s=statistics.median(means),
                    max_per_request_s=statistics.median(maxes),
                )
            )
    meta = {
        "platform": platform.platform(),
        "python": platform.python_version(),
        "processor": platform.processor() or "unknown",
        "kernel_backend": kernels.active_backend(),
        "requests": len(scenario.requests),
        "repeats": repeats,
    }
    return rows, meta


def bench_csv(rows: list[BenchRow]) -> str:
    buf = io.StringIO()
    buf.write("algorithm,n_vehicles,mean_per_request_s,max_per_request_s\n")
    for r in rows:
        buf.write(f"{r.algorithm},{r.n_vehicles},{r.mean_per_request_s!r},{r.max_per_request_s!r}\n")
    return buf.getvalue()


def kernel_bench(config: ScenarioConfig, repeats: int = 3, scenario: Scenario | None = None) -> list[dict]:
    """Compare the numba and numpy kernel backends on identical work."""
    scenario = scenario or load_scenario(config)
    weights = ObjectiveWeights(*config.weights)
    results = []
    previous = kernels.active_backend()
    try:
        for backend in ("numba", "numpy"):
            kernels.use_backend(backend)
            horizon = scenario.horizon
            profiles = load_congestion_csv(config.congestion_path, horizon)
            winds = load_wind_csv(config.wind_path)
            specs = config.fleet_config().specs()
            cruise = {m: specs[m].cruise_kmh for m in MODES}
            build_times = []
            for _ in range(repeats):
                t0 = time.perf_counter()
                build_travel_time_table(
                    scenario.network, profiles, winds, cruise, horizon, config.max_wind_kmh
                )
                build_times.append(time.perf_counter() - t0)
            dispatch_times = []
            totals = []
            for _ in range(repeats):
                fleet = scenario.fresh_fleet()
                t0 = time.perf_counter()
                outcomes = run_dispatch_loop(scenario, fleet, weights, config.algorithm)
                dispatch_times.append(time.perf_counter() - t0)
                totals.append(sum(o.plan.objective for o in outcomes if o.served))
            results.append(
                {
                    "backend": backend,
                    "table_build_s": statistics.median(build_times),
                    "dispatch_s": statistics.median(dispatch_times),
                    "total_objective": totals[0],
                }
            )
    finally:
        kernels.use_backend(previous)
    return results
