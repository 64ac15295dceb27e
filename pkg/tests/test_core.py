from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from itp import (DimensionMismatch, Interval, InvalidInterval, ItpInstance, Mode, NegativeBound, Scenario,
                 contains_scenario, scenario_feasibility_condition, solve_scenario, validate_instance)
from itp.core import DualPair, witness_scenario
from itp.lp import LpStatus


def raw(**kw):
    doc = {"m": 1, "n": 1, "cost": [[[3, 5]]], "supply": [[1, 2]], "demand": [[1, 2]], "mode": "le"}
    doc.update(kw)
    return doc


class TestValidation:
    def test_valid_one_by_one(self):
        inst = validate_instance(raw())
        assert inst.shape == (1, 1)
        assert inst.cost(0, 0) == Interval(3, 5)
        assert inst.mode is Mode.LE

    def test_reversed_interval(self):
        with pytest.raises(InvalidInterval):
            validate_instance(raw(cost=[[[5, 3]]]))

    def test_cost_shape_mismatch(self):
        with pytest.raises(DimensionMismatch):
            validate_instance(raw(m=2, supply=[[1, 2], [1, 2]]))

    def test_negative_lower_bound(self):
        with pytest.raises(NegativeBound):
            validate_instance(raw(demand=[[-1, 2]]))

    def test_nonfinite(self):
        with pytest.raises(InvalidInterval):
            validate_instance(raw(supply=[[1, float("inf")]]))

    def test_empty_dimensions(self):
        with pytest.raises(DimensionMismatch):
            validate_instance(raw(m=0, cost=np.zeros((0, 1, 2)), supply=np.zeros((0, 2))))

    def test_arrays_read_only(self, one_by_one):
        with pytest.raises(ValueError):
            one_by_one.cost_hi[0, 0] = 7.0

    def test_mode_parse(self):
        assert Mode.parse("EQ") is Mode.EQ
        assert Mode.parse("<=") is Mode.LE
        with pytest.raises(ValueError):
            Mode.parse("ge")

    def test_degeneracy_flags(self):
        inst = ItpInstance.from_bounds([[2]], [3], [2])
        assert inst.costs_fixed and inst.rhs_fixed and inst.is_degenerate


class TestMembership:
    @pytest.mark.parametrize("c,s,d,expected", [
        (4, 1.5, 2, True),
        (5, 2, 2, True),
        (5.01, 2, 2, False),
    ])
    def test_contains(self, one_by_one, c, s, d, expected):
        assert contains_scenario(one_by_one, Scenario([[c]], [s], [d])) is expected

    def test_dimension_mismatch(self, one_by_one):
        with pytest.raises(DimensionMismatch):
            contains_scenario(one_by_one, Scenario([[1, 1]], [1], [1, 1]))

    def test_feasibility_condition(self):
        le = ItpInstance.from_bounds([[1], [1]], [[0, 5], [0, 5]], [[0, 5]])
        assert scenario_feasibility_condition(le, Scenario([[1], [1]], [1, 2], [3]))
        assert not scenario_feasibility_condition(le, Scenario([[1], [1]], [1, 1], [3]))
        eq = ItpInstance.from_bounds([[1, 1], [1, 1]], [[0, 5], [0, 5]], [[0, 5], [0, 5]], mode="eq")
        assert scenario_feasibility_condition(eq, Scenario(np.ones((2, 2)), [2, 2], [1, 3]))

    def test_witness_scenario_recipe(self, two_by_one):
        sc = witness_scenario(two_by_one, [[2], [0]])
        assert sc.supply.tolist() == [2, 1] and sc.demand.tolist() == [2]
        assert sc.cost.tolist() == [[1], [3]]

    def test_dual_pair_feasibility(self):
        dp = DualPair([-2.0, 0.0], [3.0])
        assert dp.is_feasible([[1], [3]], Mode.LE)
        assert not DualPair([1.0], [0.0]).is_feasible([[5]], Mode.LE)
        assert DualPair([1.0], [0.0]).is_feasible([[5]], Mode.EQ)
        assert dp.objective([1, 2], [3]) == 7.0


bounds = st.tuples(st.integers(0, 20), st.integers(0, 10)).map(lambda t: (t[0], t[0] + t[1]))


@st.composite
def instances(draw):
    m, n = draw(st.integers(1, 3)), draw(st.integers(1, 3))
    cost = [[list(draw(bounds)) for _ in range(n)] for _ in range(m)]
    supply = [list(draw(bounds)) for _ in range(m)]
    demand = [list(draw(bounds)) for _ in range(n)]
    return ItpInstance.from_bounds(cost, supply, demand, mode=draw(st.sampled_from(["le", "eq"])))


@given(instances(), st.integers(0, 5), st.data())
def test_widening_preserves_membership(inst, extra, data):
    m, n = inst.shape
    t = data.draw(st.lists(st.floats(0, 1), min_size=m * n + m + n, max_size=m * n + m + n))
    t = np.array(t)
    c = inst.cost_lo + t[:m * n].reshape(m, n) * (inst.cost_hi - inst.cost_lo)
    s = inst.supply_lo + t[m * n:m * n + m] * (inst.supply_hi - inst.supply_lo)
    d = inst.demand_lo + t[m * n + m:] * (inst.demand_hi - inst.demand_lo)
    sc = Scenario(np.clip(c, inst.cost_lo, inst.cost_hi), np.clip(s, inst.supply_lo, inst.supply_hi),
                  np.clip(d, inst.demand_lo, inst.demand_hi))
    assert contains_scenario(inst, sc)
    wide = ItpInstance(np.maximum(inst.cost_lo - extra, 0), inst.cost_hi + extra, inst.supply_lo,
                       inst.supply_hi + extra, np.maximum(inst.demand_lo - extra, 0), inst.demand_hi, inst.mode)
    assert contains_scenario(wide, sc)


@given(instances(), st.data())
def test_feasibility_condition_matches_lp(inst, data):
    m, n = inst.shape
    s = np.array([data.draw(st.integers(int(lo), int(hi))) for lo, hi in zip(inst.supply_lo, inst.supply_hi)])
    d = np.array([data.draw(st.integers(int(lo), int(hi))) for lo, hi in zip(inst.demand_lo, inst.demand_hi)])
    sc = Scenario(inst.cost_hi, s, d)
    sol = solve_scenario(inst, sc)
    assert scenario_feasibility_condition(inst, sc) == (sol.status is LpStatus.OPTIMAL)
