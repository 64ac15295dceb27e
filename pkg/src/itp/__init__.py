"""Interval transportation problems: feasibility and optimality properties, and optimal value ranges."""
from __future__ import annotations

from .core import (DualPair, Interval, ItpInstance, Mode, Scenario, contains_scenario,
                   scenario_feasibility_condition, validate_instance)
from .exceptions import (CostsNotFixed, DimensionMismatch, InfeasibleScenario, InstanceTooLarge, InvalidInterval,
                         InvalidParams, ItpError, NegativeBound, NoIncumbent, NotWeaklyFeasible, NumericalFailure,
                         ParseError, RhsNotFixed, TooManyFreeVariables)
from .generate import GeneratorParams, generate_instance
from .io import parse_instance, parse_solution, write_instance, write_solution
from .lp import Arithmetic, LpOutcome, LpProblem, LpStatus, solve_lp
from .properties import (WeakOptCertificate, strong_feasible_problem, strong_feasible_solution,
                         strong_optimal_problem, strong_optimal_solution_fixed_cost,
                         strong_optimal_solution_general, weak_feasible_problem, weak_feasible_solution,
                         weak_optimal_problem, weak_optimal_solution)
from .transport import ScenarioSolution, solve_scenario
from .value_range import (ValueRangeReport, best_optimal_value, initial_scenario, value_range,
                          worst_finite_fixed_rhs, worst_optimal_value)
from .worst_finite import (BnbConfig, ComplementarityPattern, WorstFiniteResult, extract_worst_scenario,
                           solve_worst_finite, worst_finite_bnb, worst_finite_enumerate)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
