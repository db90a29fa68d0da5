"""Multimodal medical transport dispatch: ambulances, UAVs and eVTOLs.

Greedy per-request dispatching over a hospital-vertiport network with
congestion-dependent ground times, wind-dependent air times, payload
consolidation, a four-route benchmark heuristic and an exhaustive oracle.
"""

from .baselines import GapRecord, baseline_dispatch, exhaustive_dispatch, optimality_gap
from .demand import DemandParams, Request, generate_demand, load_requests, save_requests
from .dispatch import (
    DispatchPlan,
    NormalizationConstants,
    ObjectiveWeights,
    PRIORITY_SETTINGS,
    dispatch_request,
    request_objective,
)
from .fleet import Fleet, FleetConfig, VehicleSpec, config_for_id, default_specs, initialize_fleet
from .geo import Network, Node, haversine_km, initial_bearing_deg, load_network, nearest_vertiport
from .traveltime import (
    Horizon,
    INFEASIBLE,
    TravelTimeTable,
    WindRecord,
    air_minutes,
    bpr_minutes,
    build_travel_time_table,
    effective_airspeed_kmh,
)

__version__ = "0.1.0"

__all__ = [
    "DemandParams",
    "DispatchPlan",
    "Fleet",
    "FleetConfig",
    "GapRecord",
    "Horizon",
    "INFEASIBLE",
    "Network",
    "Node",
    "NormalizationConstants",
    "ObjectiveWeights",
    "PRIORITY_SETTINGS",
    "Request",
    "TravelTimeTable",
    "VehicleSpec",
    "WindRecord",
    "air_minutes",
    "baseline_dispatch",
    "bpr_minutes",
    "build_travel_time_table",
    "config_for_id",
    "default_specs",
    "dispatch_request",
    "effective_airspeed_kmh",
    "exhaustive_dispatch",
    "generate_demand",
    "haversine_km",
    "initial_bearing_deg",
    "initialize_fleet",
    "load_network",
    "load_requests",
    "nearest_vertiport",
    "optimality_gap",
    "request_objective",
    "save_requests",
]
