"""Transportation LPs: scenario solves and the row blocks shared by the other modules.

Route ``(i, j)`` maps to flat variable ``i * n + j`` throughout.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import DualPair, ItpInstance, Mode, Scenario, _check_scenario_shape, as_plan
from .lp import Arithmetic, LpOutcome, LpProblem, LpStatus, solve_lp


def supply_block(m: int, n: int) -> np.ndarray:
    """``(m, m*n)`` matrix whose row ``i`` sums ``x[i, :]``."""
    return np.kron(np.eye(m), np.ones((1, n)))


def demand_block(m: int, n: int) -> np.ndarray:
    """``(n, m*n)`` matrix whose row ``j`` sums ``x[:, j]``."""
    return np.kron(np.ones((1, m)), np.eye(n))


def dual_block(m: int, n: int) -> np.ndarray:
    """``(m*n, m+n)`` matrix with row ``(i, j)`` selecting ``u_i + v_j``."""
    return np.hstack([supply_block(m, n).T, demand_block(m, n).T])


def transport_lp(cost, supply_rows, demand_rows, sense="min", upper=None) -> LpProblem:
    """Transportation LP over ``x >= 0``.

    ``supply_rows`` / ``demand_rows`` are lists of ``(relation, rhs)`` per
    row block; each block entry is a sequence of ``(relation, vector)`` so a
    two-sided bound is written as two entries.
    """
    cost = np.asarray(cost, dtype=float)
    m, n = cost.shape
    S, D = supply_block(m, n), demand_block(m, n)
    blocks, rel, rhs = [], [], []
    for relation, vec in supply_rows:
        blocks.append(S)
        rel.extend([relation] * m)
        rhs.append(np.asarray(vec, dtype=float))
    for relation, vec in demand_rows:
        blocks.append(D)
        rel.extend([relation] * n)
        rhs.append(np.asarray(vec, dtype=float))
    A = np.vstack(blocks) if blocks else np.zeros((0, m * n))
    b = np.concatenate(rhs) if rhs else np.zeros(0)
    return LpProblem(cost.ravel(), A, tuple(rel), b, np.zeros(m * n), upper, sense)


@dataclass(eq=False)
class ScenarioSolution:
    """Optimal plan and duals of one scenario (or an infeasible status)."""

    status: LpStatus
    plan: np.ndarray | None = None
    duals: DualPair | None = None
    value: float | None = None
    outcome: LpOutcome | None = None

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


def scenario_lp(inst: ItpInstance, sc: Scenario) -> LpProblem:
    srel = "<=" if inst.mode is Mode.LE else "="
    return transport_lp(sc.cost, [(srel, sc.supply)], [("=", sc.demand)])


def solve_scenario(inst: ItpInstance, sc: Scenario, arithmetic=Arithmetic.FLOAT) -> ScenarioSolution:
    """Optimal plan, duals ``(u, v)`` and value of the scenario LP.

    Rows are ordered supply first, so ``u`` is the first ``m`` row duals and
    ``v`` the remaining ``n``; in ``<=`` mode ``u <= 0``.
    """
    _check_scenario_shape(inst, sc)
    m, n = inst.shape
    out = solve_lp(scenario_lp(inst, sc), arithmetic)
    if out.status is not LpStatus.OPTIMAL:
        return ScenarioSolution(out.status, outcome=out)
    x = np.array(out.x, dtype=float).reshape(m, n)
    y = np.array(out.duals, dtype=float)
    return ScenarioSolution(LpStatus.OPTIMAL, x, DualPair(y[:m], y[m:]), float(out.value), out)


def plan_value(cost, x) -> float:
    return float(np.sum(np.asarray(cost, dtype=float) * np.asarray(x, dtype=float)))


def duality_gap(sc: Scenario, x, duals: DualPair) -> float:
    """Primal objective minus dual objective at the scenario."""
    return plan_value(sc.cost, x) - duals.objective(sc.supply, sc.demand)


def plan_feasible(inst: ItpInstance, sc: Scenario, x, tol=1e-6) -> bool:
    x = as_plan(x, inst.shape)
    rows, cols = x.sum(axis=1), x.sum(axis=0)
    if np.any(x < -tol) or np.any(np.abs(cols - sc.demand) > tol):
        return False
    if inst.mode is Mode.LE:
        return bool(np.all(rows <= sc.supply + tol))
    return bool(np.all(np.abs(rows - sc.supply) <= tol))
