"""Weak and strong feasibility / optimality of plans and of whole instances.

In ``<=`` mode a plan is weakly feasible when it fits the largest supplies
and some admissible demand; strongly feasible when demand is a point and the
plan fits the smallest supplies. Balanced (``eq``) instances use the
analogous two-sided supply rows.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .core import TOL, DualPair, ItpInstance, Mode, Scenario, as_plan, witness_scenario
from .exceptions import CostsNotFixed, TooManyFreeVariables
from .lp import Arithmetic, LpProblem, LpStatus, solve_lp
from .transport import demand_block, dual_block, plan_value, supply_block, transport_lp

#: tolerance used to build the active-row / zero-route sets of a plan
SET_TOL = 1e-7
#: tolerance on optimality claims (duality gaps)
OPT_TOL = 1e-6


def _sum_tol(*arrays) -> float:
    return TOL * (1.0 + max(float(np.sum(np.abs(a))) for a in arrays))


# -- feasibility -------------------------------------------------------------

def weak_feasible_solution(inst: ItpInstance, x, tol: float = TOL) -> bool:
    x = as_plan(x, inst.shape)
    rows, cols = x.sum(axis=1), x.sum(axis=0)
    ok = (np.all(x >= -tol) and np.all(rows <= inst.supply_hi + tol)
          and np.all(cols >= inst.demand_lo - tol) and np.all(cols <= inst.demand_hi + tol))
    if inst.mode is Mode.EQ:
        ok = ok and np.all(rows >= inst.supply_lo - tol)
    return bool(ok)


def strong_feasible_solution(inst: ItpInstance, x, tol: float = TOL) -> bool:
    x = as_plan(x, inst.shape)
    if not np.array_equal(inst.demand_lo, inst.demand_hi):
        return False
    rows, cols = x.sum(axis=1), x.sum(axis=0)
    ok = np.all(x >= -tol) and np.all(np.abs(cols - inst.demand_hi) <= tol)
    if inst.mode is Mode.LE:
        return bool(ok and np.all(rows <= inst.supply_lo + tol))
    if not np.array_equal(inst.supply_lo, inst.supply_hi):
        return False
    return bool(ok and np.all(np.abs(rows - inst.supply_lo) <= tol))


def weak_feasible_problem(inst: ItpInstance) -> bool:
    tol = _sum_tol(inst.supply_hi, inst.demand_hi)
    if inst.mode is Mode.LE:
        return float(inst.supply_hi.sum()) >= float(inst.demand_lo.sum()) - tol
    lo = max(inst.supply_lo.sum(), inst.demand_lo.sum())
    hi = min(inst.supply_hi.sum(), inst.demand_hi.sum())
    return float(lo) <= float(hi) + tol


def strong_feasible_problem(inst: ItpInstance) -> bool:
    tol = _sum_tol(inst.supply_hi, inst.demand_hi)
    if inst.mode is Mode.LE:
        return float(inst.supply_lo.sum()) >= float(inst.demand_hi.sum()) - tol
    sums = [inst.supply_lo.sum(), inst.supply_hi.sum(), inst.demand_lo.sum(), inst.demand_hi.sum()]
    return float(max(sums) - min(sums)) <= tol


def weak_optimal_problem(inst: ItpInstance) -> bool:
    # costs are nonnegative, so every feasible scenario has a finite optimum
    return weak_feasible_problem(inst)


def strong_optimal_problem(inst: ItpInstance) -> bool:
    return strong_feasible_problem(inst)


# -- optimality --------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class WeakOptCertificate:
    """A scenario and dual pair proving that a plan is optimal somewhere."""

    scenario: Scenario
    duals: DualPair
    gap: float = 0.0


def weak_optimal_solution(inst: ItpInstance, x, arithmetic=Arithmetic.FLOAT,
                          tol: float = OPT_TOL) -> WeakOptCertificate | None:
    """Certificate that ``x`` is optimal for some scenario, or ``None``.

    Supply and demand are pinned to the plan (``d = column sums``,
    ``s = max(s_lo, row sums)``); one LP then searches costs ``c`` in the box
    and duals ``(u, v)`` with ``u_i + v_j <= c_ij`` maximizing the dual
    objective minus ``c @ x``. That quantity never exceeds zero, and reaching
    zero is exactly strong duality.
    """
    x = as_plan(x, inst.shape)
    if not weak_feasible_solution(inst, x):
        return None
    m, n = inst.shape
    base = witness_scenario(inst, x)
    s, d = base.supply, base.demand
    xf = x.ravel()
    # variables: u (m), v (n), c (m*n)
    A = np.hstack([dual_block(m, n), -np.eye(m * n)])
    obj = np.concatenate([s, d, -xf])
    u_hi = np.zeros(m) if inst.mode is Mode.LE else np.full(m, np.inf)
    lower = np.concatenate([np.full(m + n, -np.inf), inst.cost_lo.ravel()])
    upper = np.concatenate([u_hi, np.full(n, np.inf), inst.cost_hi.ravel()])
    prob = LpProblem(obj, A, ("<=",) * (m * n), np.zeros(m * n), lower, upper, "max")
    out = solve_lp(prob, arithmetic)
    if out.status is not LpStatus.OPTIMAL:
        return None
    value = float(out.value)
    scale = 1.0 + plan_value(inst.cost_hi, np.abs(x))
    if value < -tol * scale:
        return None
    z = np.array(out.x, dtype=float)
    cost = np.clip(z[m + n:].reshape(m, n), inst.cost_lo, inst.cost_hi)
    return WeakOptCertificate(Scenario(cost, s, d), DualPair(z[:m], z[m:m + n]), -value)


def strong_optimal_solution_fixed_cost(inst: ItpInstance, x, arithmetic=Arithmetic.FLOAT,
                                       tol: float = OPT_TOL) -> bool:
    """Strong optimality for instances with point costs: one LP at the upper data."""
    if not inst.costs_fixed:
        raise CostsNotFixed("costs are intervals; use strong_optimal_solution_general")
    x = as_plan(x, inst.shape)
    if not strong_feasible_solution(inst, x):
        return False
    srel = "<=" if inst.mode is Mode.LE else "="
    out = solve_lp(transport_lp(inst.cost_hi, [(srel, inst.supply_hi)], [("=", inst.demand_hi)]), arithmetic)
    if out.status is not LpStatus.OPTIMAL:
        return False
    best = float(out.value)
    return plan_value(inst.cost_hi, x) <= best + tol * (1.0 + abs(best))


def strong_optimal_solution_general(inst: ItpInstance, x, max_free: int = 20,
                                    arithmetic=Arithmetic.FLOAT) -> bool:
    """Strong optimality via the improving-direction interval system.

    ``x`` is strongly optimal iff it is strongly feasible and no direction
    ``w`` exists with ``sum_i w_ij = 0`` per column, ``sum_j w_ij <= 0`` on
    supply rows at their upper bound (``= 0`` on every row in balanced mode),
    ``w_ij >= 0`` on unused routes, and ``sum c_ij w_ij <= -1`` for some
    ``c`` in the cost box. The last row is linear once each ``w_ij`` has a
    fixed sign, so the sign orthants of the unrestricted routes with a
    nondegenerate cost interval are enumerated, one feasibility LP each.
    Routes with point costs need no split and stay free.
    """
    x = as_plan(x, inst.shape)
    if not strong_feasible_solution(inst, x):
        return False
    m, n = inst.shape
    rows = x.sum(axis=1)
    active = np.abs(rows - inst.supply_hi) <= SET_TOL
    unused = np.abs(x) <= SET_TOL
    width = inst.cost_hi - inst.cost_lo
    split = [(i, j) for i in range(m) for j in range(n) if not unused[i, j] and width[i, j] > 0]
    if len(split) > max_free:
        raise TooManyFreeVariables(f"{len(split)} sign-free variables exceed the cap of {max_free}")
    split.sort(key=lambda ij: (-width[ij], ij))

    S, D = supply_block(m, n), demand_block(m, n)
    base_rows = [D]
    base_rel = ["="] * n
    base_rhs = [np.zeros(n)]
    if inst.mode is Mode.EQ:
        base_rows.append(S)
        base_rel += ["="] * m
        base_rhs.append(np.zeros(m))
    elif active.any():
        base_rows.append(S[active])
        base_rel += ["<="] * int(active.sum())
        base_rhs.append(np.zeros(int(active.sum())))

    lower = np.where(unused, 0.0, -np.inf).ravel()
    upper = np.full(m * n, np.inf)
    # free routes default to cost_lo on the nonnegative side; point costs make it exact
    for signs in itertools.product((1, -1), repeat=len(split)):
        lo, hi = lower.copy(), upper.copy()
        coef = inst.cost_lo.copy()
        for (i, j), sgn in zip(split, signs):
            k = i * n + j
            if sgn > 0:
                lo[k] = 0.0
            else:
                hi[k] = 0.0
                coef[i, j] = inst.cost_hi[i, j]
        A = np.vstack([coef.reshape(1, -1)] + base_rows)
        rel = ("<=",) + tuple(base_rel)
        rhs = np.concatenate([[-1.0]] + base_rhs)
        out = solve_lp(LpProblem(np.zeros(m * n), A, rel, rhs, lo, hi), arithmetic)
        if out.status is LpStatus.OPTIMAL:
            return False
    return True
