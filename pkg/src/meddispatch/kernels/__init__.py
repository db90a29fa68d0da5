"""Numeric hot kernels with two interchangeable backends.

The numba backend JIT-compiles the inner loops; the numpy backend is a
vectorized fallback with identical semantics (tests pin exact equality).
Selection: env var ``MEDDISPATCH_NO_NUMBA=1`` forces numpy, as does an
unavailable numba; :func:`use_backend` switches at runtime (used by the
kernel benchmark and the test matrix).
"""

from __future__ import annotations

import importlib
import os

_ENV_FLAG = "MEDDISPATCH_NO_NUMBA"
_MODULES = {"numpy": "meddispatch.kernels._numpy", "numba": "meddispatch.kernels._numba"}

_impl = None
_name = None


def _default_name() -> str:
    if os.environ.get(_ENV_FLAG, "").strip().lower() in ("1", "true", "yes"):
        return "numpy"
    try:
        importlib.import_module("numba")
    except ImportError:
        return "numpy"
    return "numba"


def use_backend(name: str) -> str:
    """Select the kernel backend ('numba' or 'numpy'); returns the old name."""
    global _impl, _name
    if name not in _MODULES:
        raise ValueError(f"unknown kernel backend {name!r}")
    old = _name if _name is not None else name
    _impl = importlib.import_module(_MODULES[name])
    _name = name
    return old


def active_backend() -> str:
    if _impl is None:
        use_backend(_default_name())
    return _name


def _mod():
    if _impl is None:
        use_backend(_default_name())
    return _impl


def pairwise_haversine_km(lats, lons):
    """(n, n) great-circle km matrix from coordinate vectors."""
    return _mod().pairwise_haversine_km(lats, lons)


def pairwise_bearing_deg(lats, lons):
    """(n, n) initial-bearing matrix in [0, 360); diagonal set to 0."""
    return _mod().pairwise_bearing_deg(lats, lons)


def bpr_minutes_grid(free_flow, capacity, flow, alpha, beta):
    """(pairs, hours) congested ground minutes; alpha/beta are per-pair arrays."""
    return _mod().bpr_minutes_grid(free_flow, capacity, flow, alpha, beta)


def air_minutes_grid(dist, bearing, wind_east, wind_north, cruise, max_wind):
    """(n, n, hours) wind-adjusted air minutes; inf marks infeasible hours.

    ``max_wind`` < 0 disables the grounding threshold.
    """
    return _mod().air_minutes_grid(dist, bearing, wind_east, wind_north, cruise, max_wind)


def score_free_slots(
    starts,
    ends,
    locs,
    end_locs,
    vranks,
    origin,
    dest,
    t_req,
    t_max,
    table,
    dist,
    horizon_start,
    n_hours,
    range_km,
    op_rate,
    energy_rate,
    w_t,
    w_c,
    time_den,
    energy_den,
    op_den,
):
    """Score candidate free slots for one leg and pick the best.

    ``end_locs[k]`` pins the node the vehicle must occupy when slot k closes
    (-1 when unconstrained). Returns ``(index, wait, travel, energy_cost,
    op_cost, reposition_start, pickup, dropoff, objective)`` with
    ``index == -1`` when no slot is feasible. Tie-break: objective, then
    dropoff, then vehicle rank, then pickup; first feasible wins full ties.
    """
    return _mod().score_free_slots(
        starts,
        ends,
        locs,
        end_locs,
        vranks,
        origin,
        dest,
        t_req,
        t_max,
        table,
        dist,
        horizon_start,
        n_hours,
        range_km,
        op_rate,
        energy_rate,
        w_t,
        w_c,
        time_den,
        energy_den,
        op_den,
    )
