"""Menus of contracts for Bayesian hidden-action principal-agent problems.

The package computes optimal menus of deterministic contracts where this is
tractable, an additive approximation scheme for few outcomes, and menus of
randomized contracts within a chosen distance of the best achievable value.
"""
from .agent import (BestResponse, agent_utility, agent_utility_randomized, best_response,
                    is_dsic, menu_value, principal_utility, verify_dsic, verify_eps_approx)
from .det_menu import (convert_to_dsic, discretize_menu, heavy_types, ptas_constant_outcomes,
                       solve_constant_types, solve_two_outcomes)
from .errors import (CapExceededError, DimensionError, IterationCapError, PreconditionError,
                     SolverError)
from .generators import (Graph, HardnessParams, RandomParams, cycle_graph, gen_hardness,
                         gen_no_maximum_fixture, gen_random)
from .lp import LinearProgram, LPSolution, solve
from .model import (DeterministicMenu, Instance, ParseError, RandomizedMenu, instance_size,
                    read_instance, read_menu, validate, write_instance, write_menu)
from .oracles import GridSpec, enumerate_region_vertices, grid_det_menu, grid_rand_menu
from .rand_menu import (DualPoint, PaymentBound, payment_bound, separation_oracle,
                        simplify_menu, solve_randomized, sup_upper_bound)

__version__ = "0.1.0"

__all__ = [
    "BestResponse", "CapExceededError", "DeterministicMenu", "DimensionError", "DualPoint",
    "Graph", "GridSpec", "HardnessParams", "Instance", "IterationCapError", "LPSolution",
    "LinearProgram", "ParseError", "PaymentBound", "PreconditionError", "RandomParams",
    "RandomizedMenu", "SolverError", "agent_utility", "agent_utility_randomized",
    "best_response", "convert_to_dsic", "cycle_graph", "discretize_menu",
    "enumerate_region_vertices", "gen_hardness", "gen_no_maximum_fixture", "gen_random",
    "grid_det_menu", "grid_rand_menu", "heavy_types", "instance_size", "is_dsic",
    "menu_value", "payment_bound", "principal_utility", "ptas_constant_outcomes",
    "read_instance", "read_menu", "separation_oracle", "simplify_menu", "solve",
    "solve_constant_types", "solve_randomized", "solve_two_outcomes", "sup_upper_bound",
    "validate", "verify_dsic", "verify_eps_approx", "write_instance", "write_menu",
]
