"""Command-line interface.

Exit codes: 0 success, 2 validation failure (audit violations or invalid
input data), 1 any other error.
"""

from __future__ import annotations

import json
import os
import sys

import click

from .demand import DemandParams, save_requests
from .dispatch import PRIORITY_SETTINGS
from .errors import MedDispatchError
from .experiments import (
    ALGORITHMS,
    ScenarioConfig,
    bench_csv,
    compare_configurations,
    comparison_table,
    gap_study,
    gap_table,
    kernel_bench,
    load_scenario,
    run_scenario,
    runtime_bench,
    write_comparison_study,
    write_gap_study,
)
from .fixtures import write_fixture
from .traveltime import Horizon


def _fail(message: str, code: int = 1):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def scenario_options(fn):
    fn = click.option("--network", "network_path", required=True, type=click.Path(exists=True))(fn)
    fn = click.option("--congestion", "congestion_path", required=True, type=click.Path(exists=True))(fn)
    fn = click.option("--wind", "wind_path", required=True, type=click.Path(exists=True))(fn)
    fn = click.option("--requests", "requests_path", type=click.Path(exists=True), default=None)(fn)
    fn = click.option("--request-count", type=int, default=50, show_default=True)(fn)
    fn = click.option("--hub", "hub_hospital_id", default=None, help="Hub hospital id for demand bias.")(fn)
    fn = click.option("--hub-weight", type=float, default=0.4, show_default=True)(fn)
    fn = click.option("--buffer-min", type=float, default=60.0, show_default=True)(fn)
    fn = click.option("--buffer-max", type=float, default=90.0, show_default=True)(fn)
    fn = click.option("--configuration", "configuration_id", type=click.IntRange(1, 4), default=4, show_default=True)(fn)
    fn = click.option("--ambulances", type=int, default=None, help="Explicit count (overrides --configuration).")(fn)
    fn = click.option("--uavs", type=int, default=None)(fn)
    fn = click.option("--evtols", type=int, default=None)(fn)
    fn = click.option("--per-mode", "per_mode_count", type=int, default=12, show_default=True)(fn)
    fn = click.option("--wt", type=float, default=1.0, show_default=True, help="Time weight.")(fn)
    fn = click.option("--wc", type=float, default=1.0, show_default=True, help="Cost weight.")(fn)
    fn = click.option("--priority", type=click.Choice(sorted(PRIORITY_SETTINGS)), default=None, help="Named (wt, wc) pair; overrides --wt/--wc.")(fn)
    fn = click.option("--algorithm", type=click.Choice(ALGORITHMS), default="m2dh", show_default=True)(fn)
    fn = click.option("--seed", type=int, default=0, show_default=True)(fn)
    fn = click.option("--horizon-start", type=float, default=540.0, show_default=True)(fn)
    fn = click.option("--horizon-end", type=float, default=900.0, show_default=True)(fn)
    fn = click.option("--max-wind", "max_wind_kmh", type=float, default=None, help="Ground air legs above this wind speed.")(fn)
    fn = click.option("--demand-baseline", type=click.Choice(["congested", "free_flow"]), default="congested", show_default=True)(fn)
    fn = click.option("--spec-overrides", default=None, help="JSON like '{\"evtol\": {\"op_cost_per_km\": 5.0}}'.")(fn)
    fn = click.option("--out-dir", type=click.Path(), default=None)(fn)
    return fn


def _build_config(**kw) -> ScenarioConfig:
    counts = None
    if any(kw[k] is not None for k in ("ambulances", "uavs", "evtols")):
        counts = {
            "ambulance": kw["ambulances"] or 0,
            "uav": kw["uavs"] or 0,
            "evtol": kw["evtols"] or 0,
        }
    weights = (kw["wt"], kw["wc"])
    if kw["priority"] is not None:
        weights = PRIORITY_SETTINGS[kw["priority"]]
    overrides = json.loads(kw["spec_overrides"]) if kw["spec_overrides"] else {}
    demand = DemandParams(
        request_count=kw["request_count"],
        horizon=Horizon(kw["horizon_start"], kw["horizon_end"]),
        hub_hospital_id=kw["hub_hospital_id"],
        hub_weight=kw["hub_weight"],
        buffer_min=kw["buffer_min"],
        buffer_max=kw["buffer_max"],
        seed=kw["seed"],
    )
    return ScenarioConfig(
        network_path=kw["network_path"],
        congestion_path=kw["congestion_path"],
        wind_path=kw["wind_path"],
        requests_path=kw["requests_path"],
        demand=demand,
        configuration_id=kw["configuration_id"],
        counts=counts,
        per_mode_count=kw["per_mode_count"],
        spec_overrides=overrides,
        weights=weights,
        algorithm=kw["algorithm"],
        seed=kw["seed"],
        horizon=(kw["horizon_start"], kw["horizon_end"]),
        max_wind_kmh=kw["max_wind_kmh"],
        demand_baseline=kw["demand_baseline"],
        out_dir=kw["out_dir"],
    )


@click.group()
def main():
    """Multimodal medical transport dispatch simulator."""


@main.command("gen-network-fixture")
@click.option("--preset", type=click.Choice(["neo", "single-vertiport", "compact", "random"]), default="neo", show_default=True)
@click.option("--out-dir", type=click.Path(), required=True)
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--hospitals", type=int, default=8, show_default=True, help="random preset only")
@click.option("--vertiports", type=int, default=5, show_default=True, help="random preset only")
@click.option("--horizon-start", type=float, default=540.0, show_default=True)
@click.option("--horizon-end", type=float, default=900.0, show_default=True)
def gen_network_fixture(preset, out_dir, seed, hospitals, vertiports, horizon_start, horizon_end):
    """Write network.json, congestion.csv and wind.csv for a synthetic fixture."""
    try:
        paths = write_fixture(
            preset,
            out_dir,
            horizon=Horizon(horizon_start, horizon_end),
            seed=seed,
            n_hospitals=hospitals,
            n_vertiports=vertiports,
        )
    except MedDispatchError as exc:
        _fail(str(exc))
    for name, path in paths.items():
        click.echo(f"{name}: {path}")


@main.command("gen-demand")
@scenario_options
@click.option("--out", "out_path", type=click.Path(), required=True)
def gen_demand(out_path, **kw):
    """Generate a seeded request list and save it as CSV."""
    try:
        config = _build_config(**kw)
        scenario = load_scenario(config)
        save_requests(scenario.requests, out_path)
    except MedDispatchError as exc:
        _fail(str(exc), 2)
    click.echo(f"wrote {len(scenario.requests)} requests to {out_path}")


@main.command("dispatch")
@scenario_options
def dispatch_cmd(**kw):
    """Run one scenario and report the aggregates."""
    try:
        config = _build_config(**kw)
        report = run_scenario(config)
    except MedDispatchError as exc:
        _fail(str(exc), 2)
    s = report.summary()
    click.echo(json.dumps(s, indent=1))
    if report.violations:
        _fail(f"{len(report.violations)} constraint violations", 2)


@main.command("compare")
@scenario_options
@click.option("--configurations", default="1,2,3,4", show_default=True)
@click.option("--priorities", default=",".join(PRIORITY_SETTINGS), show_default=True)
def compare_cmd(configurations, priorities, **kw):
    """Study matrix over fleet configurations and priority settings."""
    try:
        config = _build_config(**kw)
        cids = tuple(int(c) for c in configurations.split(","))
        names = tuple(priorities.split(","))
        cells = compare_configurations(config, cids, names)
    except MedDispatchError as exc:
        _fail(str(exc), 2)
    click.echo(comparison_table(cells).rstrip())
    if kw["out_dir"]:
        write_comparison_study(cells, kw["out_dir"])
        click.echo(f"wrote {os.path.join(kw['out_dir'], 'comparison.csv')} and per-cell reports")


@main.command("gap")
@scenario_options
@click.option("--configurations", default="1,2,3,4", show_default=True)
@click.option("--priorities", default=",".join(PRIORITY_SETTINGS), show_default=True)
def gap_cmd(configurations, priorities, **kw):
    """Optimality-gap study against the exhaustive oracle."""
    try:
        config = _build_config(**kw)
        cids = tuple(int(c) for c in configurations.split(","))
        names = tuple(priorities.split(","))
        cells = gap_study(config, cids, names)
    except MedDispatchError as exc:
        _fail(str(exc), 2)
    click.echo(gap_table(cells).rstrip())
    if kw["out_dir"]:
        write_gap_study(cells, kw["out_dir"])
        click.echo(f"wrote {os.path.join(kw['out_dir'], 'gap.csv')}")


@main.command("bench")
@scenario_options
@click.option("--sizes", default="10,20,30,40,50", show_default=True)
@click.option("--algorithms", default="m2dh,baseline,exhaustive", show_default=True)
@click.option("--repeats", type=int, default=3, show_default=True)
@click.option("--kernels", "kernels_flag", is_flag=True, help="Compare numba vs numpy kernel backends instead.")
def bench_cmd(sizes, algorithms, repeats, kernels_flag, **kw):
    """Runtime benchmarks: per-request wall clock vs fleet size, or kernel backends."""
    try:
        config = _build_config(**kw)
        if kernels_flag:
            results = kernel_bench(config, repeats=repeats)
            click.echo(json.dumps(results, indent=1))
            if kw["out_dir"]:
                os.makedirs(kw["out_dir"], exist_ok=True)
                with open(os.path.join(kw["out_dir"], "kernel_bench.json"), "w") as fh:
                    json.dump(results, fh, indent=1)
            return
        rows, meta = runtime_bench(
            config,
            fleet_sizes=tuple(int(s) for s in sizes.split(",")),
            algorithms=tuple(algorithms.split(",")),
            repeats=repeats,
        )
    except MedDispatchError as exc:
        _fail(str(exc), 2)
    csv_text = bench_csv(rows)
    click.echo(csv_text.rstrip())
    click.echo(json.dumps(meta))
    if kw["out_dir"]:
        os.makedirs(kw["out_dir"], exist_ok=True)
        path = os.path.join(kw["out_dir"], "bench.csv")
        with open(path, "w") as fh:
            fh.write(csv_text)
        with open(os.path.join(kw["out_dir"], "bench_meta.json"), "w") as fh:
            json.dump(meta, fh, indent=1)
        click.echo(f"wrote {path}")


@main.command("validate")
@scenario_options
def validate_cmd(**kw):
    """Run a scenario and audit every emitted plan against the hard constraints."""
    try:
        config = _build_config(**kw)
        report = run_scenario(config)
    except MedDispatchError as exc:
        _fail(str(exc), 2)
    if report.violations:
        for v in report.violations:
            click.echo(f"VIOLATION: {v}", err=True)
        _fail(f"{len(report.violations)} violations across {report.served} plans", 2)
    click.echo(
        f"ok: {report.served} plans serve {len(report.outcomes)} requests "
        f"({report.infeasible} infeasible) with zero violations"
    )


if __name__ == "__main__":
    main()
