"""Maintenance scheduling on flow networks by Benders decomposition.

Choose start times for arc maintenance jobs so that the total source-sink
throughput over the planning horizon is as large as possible.
"""

from .benders import BendersCut, cut_from_duals, cut_is_valid, is_simple_cutset, pre_cuts
from .cache import FlowCache
from .estimator import MaintenanceScheduler
from .exceptions import (ContractViolation, GenerationError, InstanceTooLarge, NetmaintError,
                         ParseError, StructuralError, ValidationError)
from .generate import generate_instance, random_layered_network, random_small_instance
from .instance import (Instance, MaintenanceRequest, Schedule, check_schedule, evaluate_schedule,
                       parse_instance, parse_schedule, serialize_instance, serialize_schedule)
from .master import (Mode, SolveReport, SolverConfig, brute_force, build_master, lazy_callback,
                     solve, solve_instance, warm_start_lp)
from .network import (Arc, ArcConfiguration, FlowSolution, Network, augment_super_terminals,
                      max_flow, min_cut_duals)

__all__ = [
    "Arc", "ArcConfiguration", "BendersCut", "ContractViolation", "FlowCache", "FlowSolution",
    "GenerationError", "Instance", "InstanceTooLarge", "MaintenanceRequest",
    "MaintenanceScheduler", "Mode", "NetmaintError", "Network", "ParseError", "Schedule",
    "SolveReport", "SolverConfig", "StructuralError", "ValidationError",
    "augment_super_terminals", "brute_force", "build_master", "check_schedule",
    "cut_from_duals", "cut_is_valid", "evaluate_schedule", "generate_instance",
    "is_simple_cutset", "lazy_callback", "max_flow", "min_cut_duals", "parse_instance",
    "parse_schedule", "pre_cuts", "random_layered_network", "random_small_instance",
    "serialize_instance", "serialize_schedule", "solve", "solve_instance", "warm_start_lp",
]

__version__ = "0.1.0"
