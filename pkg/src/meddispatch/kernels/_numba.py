"""Numba backend: JIT-compiled loops mirroring the numpy reference kernels."""

from __future__ import annotations

import math

import numpy as np
from numba import njit

_DEG = math.pi / 180.0


@njit(cache=True)
def _pairwise_haversine(lats, lons, radius):
    n = lats.shape[0]
    out = np.empty((n, n))
    for i in range(n):
        for j in range(n):
            p1 = lats[i] * _DEG
            p2 = lats[j] * _DEG
            sp = math.sin((lats[j] - lats[i]) * _DEG / 2.0)
            sl = math.sin((lons[j] - lons[i]) * _DEG / 2.0)
            h = sp * sp + (math.cos(p1) * math.cos(p2)) * (sl * sl)
            out[i, j] = 2.0 * radius * math.asin(min(1.0, math.sqrt(h)))
    return out


def pairwise_haversine_km(lats, lons):
    from ..geo import EARTH_RADIUS_KM

    return _pairwise_haversine(np.ascontiguousarray(lats), np.ascontiguousarray(lons), EARTH_RADIUS_KM)


@njit(cache=True)
def _pairwise_bearing(lats, lons):
    n = lats.shape[0]
    out = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            if i == j:
                continue
            p1 = lats[i] * _DEG
            p2 = lats[j] * _DEG
            dl = (lons[j] - lons[i]) * _DEG
            x = math.sin(dl) * math.cos(p2)
            y = math.cos(p1) * math.sin(p2) - (math.sin(p1) * math.cos(p2)) * math.cos(dl)
            bearing = (math.atan2(x, y) / _DEG) % 360.0
            out[i, j] = 0.0 if bearing == 360.0 else bearing
    return out


def pairwise_bearing_deg(lats, lons):
    return _pairwise_bearing(np.ascontiguousarray(lats), np.ascontiguousarray(lons))


@njit(cache=True)
def bpr_minutes_grid(free_flow, capacity, flow, alpha, beta):
    p, h = flow.shape
    out = np.empty((p, h))
    for i in range(p):
        for t in range(h):
            ratio = flow[i, t] / capacity[i]
            out[i, t] = free_flow[i] * (1.0 + alpha[i] * ratio ** beta[i])
    return out


@njit(cache=True)
def air_minutes_grid(dist, bearing, wind_east, wind_north, cruise, max_wind):
    n = dist.shape[0]
    hours = wind_east.shape[1]
    out = np.empty((n, n, hours))
    for i in range(n):
        for j in range(n):
            if i == j:
                for t in range(hours):
                    out[i, j, t] = 0.0
                continue
            th = bearing[i, j] * _DEG
            ux = math.sin(th)
            uy = math.cos(th)
            for t in range(hours):
                we = 0.5 * (wind_east[i, t] + wind_east[j, t])
                wn = 0.5 * (wind_north[i, t] + wind_north[j, t])
                eff = cruise + (we * ux + wn * uy)
                if eff <= 0.0 or (max_wind >= 0.0 and math.sqrt(we * we + wn * wn) > max_wind):
                    out[i, j, t] = np.inf
                else:
                    out[i, j, t] = 60.0 * dist[i, j] / eff
    return out


@njit(cache=True)
def _hour_index(t, horizon_start, n_hours):
    h = int((t - horizon_start) // 60.0)
    if h < 0:
        return 0
    if h > n_hours - 1:
        return n_hours - 1
    return h


@njit(cache=True)
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
    serve_km = dist[origin, dest]
    best = -1
    b_wait = b_travel = b_energy = b_op = b_rep = b_pick = b_drop = b_z = 0.0
    b_rank = 0
    for k in range(starts.shape[0]):
        if end_locs[k] != -1 and end_locs[k] != dest:
            continue
        loc = locs[k]
        tau_rep = table[loc, origin, _hour_index(starts[k], horizon_start, n_hours)]
        if not math.isfinite(tau_rep):
            continue
        rep_km = dist[loc, origin]
        if rep_km > range_km:
            continue
        pickup = max(starts[k] + tau_rep, t_req)
        tau_srv = table[origin, dest, _hour_index(pickup, horizon_start, n_hours)]
        if not math.isfinite(tau_srv):
            continue
        dropoff = pickup + tau_srv
        if dropoff > ends[k] or dropoff > t_max:
            continue
        wait = pickup - t_req
        travel = tau_rep + tau_srv
        km = rep_km + serve_km
        energy = energy_rate * km
        operating = op_rate * km
        z = w_t * (wait + travel) / time_den + w_c * (energy / energy_den + operating / op_den)
        better = False
        if best < 0 or z < b_z:
            better = True
        elif z == b_z:
            if dropoff < b_drop:
                better = True
            elif dropoff == b_drop:
                if vranks[k] < b_rank:
                    better = True
                elif vranks[k] == b_rank and pickup < b_pick:
                    better = True
        if better:
            best = k
            b_wait, b_travel, b_energy, b_op = wait, travel, energy, operating
            b_rep = max(starts[k], t_req - tau_rep)
            b_pick, b_drop, b_z = pickup, dropoff, z
            b_rank = vranks[k]
    return (best, b_wait, b_travel, b_energy, b_op, b_rep, b_pick, b_drop, b_z)
