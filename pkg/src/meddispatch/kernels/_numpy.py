"""Vectorized numpy backend. Defines the reference semantics of every kernel."""

from __future__ import annotations

import math

import numpy as np

_DEG = math.pi / 180.0
_NO_SLOT = (-1, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


def pairwise_haversine_km(lats, lons):
    from ..geo import EARTH_RADIUS_KM

    p = lats * _DEG
    sp = np.sin((lats[None, :] - lats[:, None]) * _DEG / 2.0)
    sl = np.sin((lons[None, :] - lons[:, None]) * _DEG / 2.0)
    cc = np.cos(p)[:, None] * np.cos(p)[None, :]
    h = sp * sp + cc * (sl * sl)
    return 2.0 * EARTH_RADIUS_KM * np.arcsin(np.minimum(1.0, np.sqrt(h)))


def pairwise_bearing_deg(lats, lons):
    p = lats * _DEG
    dl = (lons[None, :] - lons[:, None]) * _DEG
    sp, cp = np.sin(p), np.cos(p)
    x = np.sin(dl) * cp[None, :]
    y = cp[:, None] * sp[None, :] - (sp[:, None] * cp[None, :]) * np.cos(dl)
    out = (np.arctan2(x, y) / _DEG) % 360.0
    out[out == 360.0] = 0.0  # tiny negatives round up through the modulo
    np.fill_diagonal(out, 0.0)
    return out


def bpr_minutes_grid(free_flow, capacity, flow, alpha, beta):
    ratio = flow / capacity[:, None]
    return free_flow[:, None] * (1.0 + alpha[:, None] * ratio ** beta[:, None])


def air_minutes_grid(dist, bearing, wind_east, wind_north, cruise, max_wind):
    th = bearing * _DEG
    ux = np.sin(th)[:, :, None]
    uy = np.cos(th)[:, :, None]
    we = 0.5 * (wind_east[:, None, :] + wind_east[None, :, :])
    wn = 0.5 * (wind_north[:, None, :] + wind_north[None, :, :])
    eff = cruise + (we * ux + wn * uy)
    with np.errstate(divide="ignore", invalid="ignore"):
        out = 60.0 * dist[:, :, None] / eff
    bad = eff <= 0.0
    if max_wind >= 0.0:
        bad = bad | (np.sqrt(we * we + wn * wn) > max_wind)
    out[bad] = np.inf
    n = dist.shape[0]
    out[np.arange(n), np.arange(n), :] = 0.0
    return out


def _hour_index(t, horizon_start, n_hours):
    with np.errstate(invalid="ignore"):
        h = ((t - horizon_start) // 60.0).astype(np.int64)
    return np.clip(h, 0, n_hours - 1)


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
    if starts.size == 0:
        return _NO_SLOT

    tau_rep = table[locs, origin, _hour_index(starts, horizon_start, n_hours)]
    rep_km = dist[locs, origin]
    feas = ((end_locs == -1) | (end_locs == dest)) & np.isfinite(tau_rep) & (rep_km <= range_km)
    tau_rep = np.where(feas, tau_rep, 0.0)

    pickup = np.maximum(starts + tau_rep, t_req)
    tau_srv = table[origin, dest, _hour_index(pickup, horizon_start, n_hours)]
    feas &= np.isfinite(tau_srv)
    tau_srv = np.where(feas, tau_srv, 0.0)

    dropoff = pickup + tau_srv
    feas &= (dropoff <= ends) & (dropoff <= t_max)
    idx = np.nonzero(feas)[0]
    if idx.size == 0:
        return _NO_SLOT

    wait = pickup - t_req
    travel = tau_rep + tau_srv
    km = rep_km + dist[origin, dest]
    energy = energy_rate * km
    operating = op_rate * km
    z = w_t * (wait + travel) / time_den + w_c * (energy / energy_den + operating / op_den)

    order = np.lexsort((pickup[idx], vranks[idx], dropoff[idx], z[idx]))
    j = int(idx[order[0]])
    reposition = max(float(starts[j]), t_req - float(tau_rep[j]))
    return (
        j,
        float(wait[j]),
        float(travel[j]),
        float(energy[j]),
        float(operating[j]),
        reposition,
        float(pickup[j]),
        float(dropoff[j]),
        float(z[j]),
    )
