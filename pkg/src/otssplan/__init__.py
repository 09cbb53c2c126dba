"""Crosstalk-aware time-slice planner for multi-mode-fiber datacenter
networks: routing, mode, and synchronized slot assignment under an
accumulated-crosstalk budget."""

from .model import (AccumulationModel, CrosstalkMatrix, FrameConfig, Instance,
                    PlannerConfig, Request, Topology, build_fat_tree, collapse_frame,
                    load_instance, required_slot_units, serialize_instance,
                    slot_capacity_gbps)
from .solve import (Schedule, SolveLimits, solve_baseline_conventional,
                    solve_exact, solve_greedy)
from .validate import check_schedule, resource_usage, throughput_gbps

__all__ = [
    "AccumulationModel", "CrosstalkMatrix", "FrameConfig", "Instance",
    "PlannerConfig", "Request", "Topology", "build_fat_tree", "collapse_frame",
    "load_instance", "required_slot_units", "serialize_instance",
    "slot_capacity_gbps", "Schedule", "SolveLimits",
    "solve_baseline_conventional", "solve_exact", "solve_greedy",
    "check_schedule", "resource_usage", "throughput_gbps",
]

__version__ = "0.1.0"
