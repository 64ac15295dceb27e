"""Best and worst optimal values, and the starting scenario for the worst-finite search."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from .core import ItpInstance, Mode, Scenario, witness_scenario
from .exceptions import InfeasibleScenario, NotWeaklyFeasible, RhsNotFixed
from .lp import Arithmetic, LpProblem, LpStatus, solve_lp
from .properties import strong_feasible_problem, weak_feasible_problem
from .transport import ScenarioSolution, dual_block, solve_scenario, transport_lp


class BestValue(NamedTuple):
    value: float
    scenario: Scenario
    plan: np.ndarray


def weak_feasible_region(inst: ItpInstance, cost, sense="min"):
    """Transportation LP over every plan feasible for some scenario."""
    supply = [("<=", inst.supply_hi)]
    if inst.mode is Mode.EQ:
        supply.append((">=", inst.supply_lo))
    return transport_lp(cost, supply, [(">=", inst.demand_lo), ("<=", inst.demand_hi)], sense)


def best_optimal_value(inst: ItpInstance, arithmetic=Arithmetic.FLOAT) -> BestValue:
    """Smallest optimal value over all scenarios, with a witnessing scenario and plan.

    Minimizes the lower costs over all weakly feasible plans; the witness
    scenario pins demand to the plan's column sums and supply to
    ``max(s_lo, row sums)``.
    """
    if not weak_feasible_problem(inst):
        raise NotWeaklyFeasible("no scenario of the instance is feasible")
    out = solve_lp(weak_feasible_region(inst, inst.cost_lo), arithmetic)
    if out.status is not LpStatus.OPTIMAL:
        raise NotWeaklyFeasible(f"best-value LP is {out.status.value}")
    x = np.array(out.x, dtype=float).reshape(inst.shape)
    return BestValue(float(out.value), witness_scenario(inst, x, cost=inst.cost_lo), x)


def worst_optimal_value(inst: ItpInstance, arithmetic=Arithmetic.FLOAT) -> float:
    """Largest optimal value, ``inf`` when some scenario is infeasible."""
    if not strong_feasible_problem(inst):
        return math.inf
    srel = "<=" if inst.mode is Mode.LE else "="
    out = solve_lp(transport_lp(inst.cost_hi, [(srel, inst.supply_lo)], [("=", inst.demand_hi)]), arithmetic)
    if out.status is not LpStatus.OPTIMAL:
        # strongly feasible by the sum test but numerically rejected
        return math.inf
    return float(out.value)


def worst_finite_fixed_rhs(inst: ItpInstance, arithmetic=Arithmetic.FLOAT) -> float:
    """Worst finite value when supply and demand are points: the dual at the upper costs."""
    if not inst.rhs_fixed:
        raise RhsNotFixed("supply and demand must be point intervals")
    s, d = inst.supply_hi, inst.demand_hi
    total_s, total_d = float(s.sum()), float(d.sum())
    tol = 1e-9 * (1.0 + total_s + total_d)
    if (inst.mode is Mode.LE and total_s < total_d - tol) or (inst.mode is Mode.EQ and abs(total_s - total_d) > tol):
        raise InfeasibleScenario("the only supply/demand scenario is infeasible")
    m, n = inst.shape
    u_hi = np.zeros(m) if inst.mode is Mode.LE else np.full(m, np.inf)
    prob = LpProblem(np.concatenate([s, d]), dual_block(m, n), ("<=",) * (m * n), inst.cost_hi.ravel(),
                     np.full(m + n, -np.inf), np.concatenate([u_hi, np.full(n, np.inf)]), "max")
    out = solve_lp(prob, arithmetic)
    if out.status is not LpStatus.OPTIMAL:
        raise InfeasibleScenario(f"dual LP is {out.status.value}")
    return float(out.value)


def initial_supply_demand(inst: ItpInstance) -> tuple[np.ndarray, np.ndarray, float]:
    """Supply and demand shipping as much as possible, filled in index order.

    ``g = min(sum s_hi, sum d_hi)``; demands are raised to their upper bounds
    front to back while the remaining ones can stay at their lower bounds,
    and supplies are kept as low as possible while still covering ``g``.
    """
    s_lo, s_hi = inst.supply_lo, inst.supply_hi
    d_lo, d_hi = inst.demand_lo, inst.demand_hi
    g = min(float(s_hi.sum()), float(d_hi.sum()))
    d = np.empty_like(d_lo)
    for j in range(len(d)):
        d[j] = min(d_hi[j], g - d[:j].sum() - d_lo[j + 1:].sum())
    s = np.empty_like(s_lo)
    for i in range(len(s)):
        s[i] = max(s_lo[i], min(s_hi[i], g - s[:i].sum() - s_lo[i + 1:].sum()))
    return s, d, g


def initial_scenario(inst: ItpInstance, arithmetic=Arithmetic.FLOAT) -> tuple[Scenario, ScenarioSolution]:
    """Starting scenario (upper costs) and its optimal solution."""
    if not weak_feasible_problem(inst):
        raise NotWeaklyFeasible("no scenario of the instance is feasible")
    s, d, _ = initial_supply_demand(inst)
    sc = Scenario(inst.cost_hi, np.clip(s, inst.supply_lo, inst.supply_hi), np.clip(d, inst.demand_lo, inst.demand_hi))
    return sc, solve_scenario(inst, sc, arithmetic)


@dataclass(eq=False)
class ValueRangeReport:
    """Best value, worst value (maybe infinite) and worst finite value of an instance."""

    best: float
    worst: float
    worst_finite: float | None = None
    worst_finite_proven: bool = False
    best_scenario: Scenario | None = None
    best_plan: np.ndarray | None = None
    worst_scenario: Scenario | None = None
    worst_plan: np.ndarray | None = None
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "best": self.best,
            "worst": self.worst,
            "worst_finite": self.worst_finite,
            "worst_finite_proven": self.worst_finite_proven,
            "best_scenario": _sc_dict(self.best_scenario),
            "best_plan": None if self.best_plan is None else self.best_plan.tolist(),
            "worst_scenario": _sc_dict(self.worst_scenario),
            "worst_plan": None if self.worst_plan is None else self.worst_plan.tolist(),
            **self.extra,
        }


def _sc_dict(sc):
    if sc is None:
        return None
    return {"cost": sc.cost.tolist(), "supply": sc.supply.tolist(), "demand": sc.demand.tolist()}


def value_range(inst: ItpInstance, method: str = "auto", **config) -> ValueRangeReport:
    """Full range report; ``config`` is forwarded to the worst-finite solver."""
    from .worst_finite import solve_worst_finite

    best = best_optimal_value(inst)
    worst = worst_optimal_value(inst)
    res = solve_worst_finite(inst, method=method, **config)
    return ValueRangeReport(
        best=best.value, worst=worst, worst_finite=res.value, worst_finite_proven=res.proven_optimal,
        best_scenario=best.scenario, best_plan=best.plan,
        worst_scenario=res.scenario, worst_plan=res.plan,
        extra={"upper_bound": res.upper_bound, "nodes": res.stats.nodes, "method": res.method},
    )
