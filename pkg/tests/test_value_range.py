from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from itp import (Arithmetic, InfeasibleScenario, ItpInstance, NotWeaklyFeasible, RhsNotFixed, Scenario,
                 best_optimal_value, contains_scenario, initial_scenario, solve_scenario, strong_feasible_problem,
                 value_range, weak_feasible_problem, worst_finite_fixed_rhs, worst_optimal_value)
from itp.value_range import initial_supply_demand

from helpers import random_instance, random_weakly_feasible, vertex_scenarios


class TestBest:
    def test_one_by_one(self, one_by_one):
        best = best_optimal_value(one_by_one)
        assert best.value == 3.0
        assert best.scenario.demand.tolist() == [1.0] and best.scenario.cost.tolist() == [[3.0]]

    def test_two_by_one(self, two_by_one):
        best = best_optimal_value(two_by_one)
        assert best.value == pytest.approx(2.0)
        assert solve_scenario(two_by_one, best.scenario).value == pytest.approx(2.0)

    def test_not_weakly_feasible(self):
        with pytest.raises(NotWeaklyFeasible):
            best_optimal_value(ItpInstance.from_bounds([[1]], [[0, 1]], [[2, 3]]))


class TestWorst:
    def test_infinite(self, one_by_one):
        assert worst_optimal_value(one_by_one) == math.inf

    def test_forced_plan(self):
        assert worst_optimal_value(ItpInstance.from_bounds([[[3, 5]]], [[2, 2]], [[2, 2]])) == 10.0

    def test_two_by_one(self):
        inst = ItpInstance.from_bounds([[1], [3]], [[2, 4], [2, 4]], [[1, 3]])
        assert worst_optimal_value(inst) == pytest.approx(5.0)


class TestFixedRhs:
    def test_one_by_one(self):
        assert worst_finite_fixed_rhs(ItpInstance.from_bounds([[[3, 5]]], [2], [2])) == 10.0

    def test_two_by_one(self):
        inst = ItpInstance.from_bounds([[[1, 2]], [[3, 4]]], [1, 2], [3])
        assert worst_finite_fixed_rhs(inst) == pytest.approx(10.0)
        assert solve_scenario(inst, inst.upper_scenario()).value == pytest.approx(10.0)

    def test_guard(self, one_by_one):
        with pytest.raises(RhsNotFixed):
            worst_finite_fixed_rhs(one_by_one)

    def test_infeasible(self):
        with pytest.raises(InfeasibleScenario):
            worst_finite_fixed_rhs(ItpInstance.from_bounds([[1]], [1], [2]))


class TestInitialScenario:
    def test_worked_example(self):
        inst = ItpInstance.from_bounds(np.ones((2, 2)), [[1, 3], [2, 4]], [[2, 5], [1, 2]])
        s, d, g = initial_supply_demand(inst)
        assert g == 7 and d.tolist() == [5, 2] and s.tolist() == [3, 4]

    def test_one_by_one(self, one_by_one):
        s, d, g = initial_supply_demand(one_by_one)
        assert (g, d.tolist(), s.tolist()) == (2, [2], [2])

    def test_large_lower_supply(self):
        inst = ItpInstance.from_bounds(np.ones((2, 1)), [[3, 4], [2, 5]], [[1, 4]])
        sc, sol = initial_scenario(inst)
        assert sc.supply.sum() > sc.demand.sum() == 4
        assert sol.optimal

    def test_not_weakly_feasible(self):
        with pytest.raises(NotWeaklyFeasible):
            initial_scenario(ItpInstance.from_bounds([[1]], [[0, 1]], [[2, 3]]))


@given(st.integers(0, 2 ** 32 - 1), st.integers(1, 5), st.integers(1, 5), st.sampled_from(["le", "eq"]))
def test_initial_scenario_contract(seed, m, n, mode):
    rng = np.random.default_rng(seed)
    inst = random_weakly_feasible(rng, m, n, mode)
    sc, sol = initial_scenario(inst)
    g = min(inst.supply_hi.sum(), inst.demand_hi.sum())
    assert sc.demand.sum() == pytest.approx(g)
    assert contains_scenario(inst, sc)
    assert sc.supply.sum() >= sc.demand.sum() - 1e-9
    assert sol.optimal
    assert np.array_equal(sc.cost, inst.cost_hi)


@given(st.integers(0, 2 ** 32 - 1), st.sampled_from(["le", "eq"]))
def test_problem_conditions_match_vertex_scenarios(seed, mode):
    rng = np.random.default_rng(seed)
    inst = random_instance(rng, int(rng.integers(1, 3)), int(rng.integers(1, 3)), mode, width_max=0,
                           rhs_width=4, rhs_max=4)
    sols = [solve_scenario(inst, sc) for sc in vertex_scenarios(inst)]
    if strong_feasible_problem(inst):
        assert all(s.optimal for s in sols)
    if any(s.optimal for s in sols):
        assert weak_feasible_problem(inst)
    if mode == "le":
        # the two sum tests are exact for the <= model at the vertices
        assert strong_feasible_problem(inst) == all(s.optimal for s in sols)
        assert weak_feasible_problem(inst) == any(s.optimal for s in sols)


@given(st.integers(0, 2 ** 32 - 1))
def test_degenerate_collapse(seed):
    rng = np.random.default_rng(seed)
    m, n = int(rng.integers(1, 4)), int(rng.integers(1, 4))
    c = rng.integers(0, 10, size=(m, n))
    d = rng.integers(0, 6, size=n)
    s = rng.integers(0, 6, size=m) + int(d.sum() // m) + 1
    inst = ItpInstance.from_bounds(c, s, d)
    exact = solve_scenario(inst, inst.upper_scenario(), Arithmetic.RATIONAL).value
    assert best_optimal_value(inst, Arithmetic.RATIONAL).value == pytest.approx(exact, abs=1e-9)
    assert worst_optimal_value(inst, Arithmetic.RATIONAL) == pytest.approx(exact, abs=1e-9)
    assert worst_finite_fixed_rhs(inst, Arithmetic.RATIONAL) == pytest.approx(exact, abs=1e-9)


def test_report(one_by_one):
    rep = value_range(one_by_one)
    assert (rep.best, rep.worst, rep.worst_finite) == (3.0, math.inf, 10.0)
    assert rep.worst_finite_proven
    doc = rep.as_dict()
    assert doc["worst_plan"] == [[2.0]]


@given(st.integers(0, 2 ** 32 - 1))
def test_widening_monotonicity(seed):
    from itp import worst_finite_bnb
    rng = np.random.default_rng(seed)
    inst = random_weakly_feasible(rng, 3, 3)
    base_best = best_optimal_value(inst).value
    base_wf = worst_finite_bnb(inst).value
    # widen one interval by moving one bound outward
    arrays = {k: getattr(inst, k).copy() for k in ("cost_lo", "cost_hi", "supply_lo", "supply_hi",
                                                    "demand_lo", "demand_hi")}
    key = ["cost_lo", "cost_hi", "supply_lo", "supply_hi", "demand_lo", "demand_hi"][int(rng.integers(6))]
    a = arrays[key]
    idx = tuple(int(rng.integers(k)) for k in a.shape)
    a[idx] = max(a[idx] - 2, 0) if key.endswith("lo") else a[idx] + 2
    wide = ItpInstance(*(arrays[k] for k in ("cost_lo", "cost_hi", "supply_lo", "supply_hi", "demand_lo",
                                             "demand_hi")), inst.mode)
    assert best_optimal_value(wide).value <= base_best + 1e-9
    assert worst_finite_bnb(wide).value >= base_wf - 1e-6 * (1 + abs(base_wf))
