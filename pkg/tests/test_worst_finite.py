from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from itp import (Arithmetic, InstanceTooLarge, ItpInstance, NoIncumbent, NotWeaklyFeasible, extract_worst_scenario,
                 solve_scenario, solve_worst_finite, worst_finite_bnb, worst_finite_enumerate, worst_finite_fixed_rhs,
                 worst_optimal_value)
from itp.core import contains_scenario
from itp.lp import LpStatus, solve_lp
from itp.worst_finite import (BnbConfig, WorstFiniteResult, bigm_model, iter_patterns, pattern_count, pattern_lp,
                              read_convergence_log, verify_result, write_bigm_lp)

from helpers import random_fixed_rhs, random_strongly_feasible, random_weakly_feasible


def brute_force(inst):
    """Maximum over every pattern of the joint plan/dual LP, in exact arithmetic."""
    best = -math.inf
    for pat in iter_patterns(inst):
        out = solve_lp(pattern_lp(inst, pat), Arithmetic.RATIONAL)
        if out.status is LpStatus.OPTIMAL:
            best = max(best, float(out.value))
    return best


class TestExamples:
    def test_one_by_one(self, one_by_one):
        for res in (worst_finite_enumerate(one_by_one), worst_finite_bnb(one_by_one)):
            assert res.value == 10.0 and res.proven_optimal
            assert res.plan.tolist() == [[2.0]]
            sc = extract_worst_scenario(res)
            assert (sc.cost.tolist(), sc.supply.tolist(), sc.demand.tolist()) == ([[5.0]], [2.0], [2.0])
            assert solve_scenario(one_by_one, sc).value == 10.0

    def test_two_by_one(self, two_by_one):
        enum = worst_finite_enumerate(two_by_one)
        assert enum.value == pytest.approx(7.0)
        assert enum.plan.ravel().tolist() == pytest.approx([1.0, 2.0])
        assert 0 in enum.pattern.covered_sources
        assert brute_force(two_by_one) == pytest.approx(7.0)
        bnb = worst_finite_bnb(two_by_one)
        assert bnb.value == pytest.approx(7.0) and bnb.proven_optimal
        sc = extract_worst_scenario(bnb)
        assert sc.supply.tolist() == [1.0, 2.0] and sc.demand.tolist() == [3.0]
        assert solve_scenario(two_by_one, sc).value == pytest.approx(7.0)

    def test_point_instance_collapses(self):
        inst = ItpInstance.from_bounds([[2, 4], [3, 1]], [3, 4], [2, 5])
        target = solve_scenario(inst, inst.upper_scenario()).value
        assert worst_finite_enumerate(inst).value == pytest.approx(target)
        assert worst_finite_bnb(inst).value == pytest.approx(target)
        sc = extract_worst_scenario(worst_finite_bnb(inst))
        assert sc == inst.upper_scenario()

    def test_pattern_count(self, two_by_one):
        assert pattern_count(two_by_one) == 16
        assert pattern_count(two_by_one.with_mode("eq")) == 4

    def test_too_large(self):
        inst = ItpInstance.from_bounds(np.ones((4, 4)), [[1, 2]] * 4, [[1, 2]] * 4)
        with pytest.raises(InstanceTooLarge):
            worst_finite_enumerate(inst)

    def test_not_weakly_feasible(self):
        inst = ItpInstance.from_bounds([[1]], [[0, 1]], [[2, 3]])
        with pytest.raises(NotWeaklyFeasible):
            worst_finite_enumerate(inst)
        with pytest.raises(NotWeaklyFeasible):
            worst_finite_bnb(inst)

    def test_no_incumbent(self, one_by_one):
        empty = WorstFiniteResult(one_by_one, -math.inf, math.inf, False)
        with pytest.raises(NoIncumbent):
            extract_worst_scenario(empty)

    def test_dispatch(self, one_by_one):
        assert solve_worst_finite(one_by_one).method == "enum"
        assert solve_worst_finite(one_by_one, method="bnb").method == "bnb"
        with pytest.raises(ValueError):
            solve_worst_finite(one_by_one, method="guess")


@given(st.integers(0, 2 ** 32 - 1), st.sampled_from(["le", "eq"]))
def test_pruned_oracle_matches_brute_force(seed, mode):
    rng = np.random.default_rng(seed)
    inst = random_weakly_feasible(rng, int(rng.integers(1, 3)), int(rng.integers(1, 3)), mode)
    assert worst_finite_enumerate(inst).value == pytest.approx(brute_force(inst), abs=1e-9)


@given(st.integers(0, 2 ** 32 - 1), st.sampled_from(["le", "eq"]), st.sampled_from(["best", "depth"]))
def test_bnb_matches_enumeration(seed, mode, order):
    rng = np.random.default_rng(seed)
    m = int(rng.integers(1, 4))
    n = int(rng.integers(1, 4 if m < 3 else 3))
    inst = random_weakly_feasible(rng, m, n, mode)
    enum = worst_finite_enumerate(inst)
    bnb = worst_finite_bnb(inst, node_order=order)
    assert bnb.proven_optimal
    assert bnb.value == pytest.approx(enum.value, rel=1e-6, abs=1e-6)
    for res in (enum, bnb):
        assert verify_result(res) == []
        sc = extract_worst_scenario(res)
        assert contains_scenario(inst, sc)
        assert solve_scenario(inst, sc).value == pytest.approx(res.value, rel=1e-6, abs=1e-6)


@given(st.integers(0, 2 ** 32 - 1))
def test_bnb_without_propagation_or_heuristic(seed):
    rng = np.random.default_rng(seed)
    inst = random_weakly_feasible(rng, 2, 3)
    plain = worst_finite_bnb(inst, propagate=False, heuristic=False)
    assert plain.value == pytest.approx(worst_finite_enumerate(inst).value, rel=1e-6, abs=1e-6)


@given(st.integers(0, 2 ** 32 - 1))
def test_strongly_feasible_matches_worst_value(seed):
    rng = np.random.default_rng(seed)
    inst = random_strongly_feasible(rng, int(rng.integers(1, 6)), int(rng.integers(1, 6)))
    assert worst_finite_bnb(inst).value == pytest.approx(worst_optimal_value(inst), rel=1e-6, abs=1e-6)


@given(st.integers(0, 2 ** 32 - 1), st.sampled_from(["le", "eq"]))
def test_fixed_rhs_matches_dual_lp(seed, mode):
    rng = np.random.default_rng(seed)
    inst = random_fixed_rhs(rng, int(rng.integers(1, 6)), int(rng.integers(1, 6)), mode)
    assert worst_finite_bnb(inst).value == pytest.approx(worst_finite_fixed_rhs(inst), rel=1e-6, abs=1e-6)


def test_time_limit_returns_partial_result():
    from itp import generate_instance
    inst = generate_instance(12, 12, seed=3)
    res = worst_finite_bnb(inst, time_limit=0.5)
    assert res.plan is not None
    assert res.value <= res.upper_bound
    assert verify_result(res) == []


def test_node_limit_is_deterministic():
    from itp import generate_instance
    inst = generate_instance(6, 8, seed=11)
    a = worst_finite_bnb(inst, node_limit=40)
    b = worst_finite_bnb(inst, node_limit=40)
    assert a.stats.nodes == b.stats.nodes == 40
    assert (a.value, a.upper_bound) == (b.value, b.upper_bound)


def test_convergence_log(tmp_path):
    from itp import generate_instance
    inst = generate_instance(5, 6, seed=2)
    res = worst_finite_bnb(inst)
    path = tmp_path / "log.csv"
    res.write_log(path)
    assert path.read_text().splitlines()[0] == "elapsed_seconds,incumbent_value,upper_bound,nodes_explored"
    rows = read_convergence_log(path)
    inc = [r[1] for r in rows]
    ub = [r[2] for r in rows]
    assert inc == sorted(inc) and ub == sorted(ub, reverse=True)
    assert rows[-1][1] == res.value and rows[-1][2] == res.upper_bound
    assert all(r[1] <= r[2] for r in rows)


def test_config_object(one_by_one):
    res = worst_finite_bnb(one_by_one, BnbConfig(node_order="depth"))
    assert res.value == 10.0
    with pytest.raises(TypeError):
        worst_finite_bnb(one_by_one, BnbConfig(), node_order="depth")


@pytest.mark.parametrize("seed", range(4))
def test_bigm_model_matches(seed):
    from scipy.optimize import Bounds, LinearConstraint, milp
    rng = np.random.default_rng(seed)
    inst = random_weakly_feasible(rng, 2, 2, cost_max=5)
    prob, binaries = bigm_model(inst, big_m=1000.0)
    b_lo = np.where(np.array([r in (">=", "=") for r in prob.relations]), prob.rhs, -np.inf)
    b_hi = np.where(np.array([r in ("<=", "=") for r in prob.relations]), prob.rhs, np.inf)
    integrality = np.zeros(prob.num_vars)
    integrality[binaries] = 1
    res = milp(-prob.c, constraints=LinearConstraint(prob.A, b_lo, b_hi), integrality=integrality,
               bounds=Bounds(prob.lower, prob.upper))
    assert res.status == 0
    assert -res.fun == pytest.approx(worst_finite_enumerate(inst).value, abs=1e-6)
    text = write_bigm_lp(inst)
    assert "Binaries" in text and "z_0_0" in text
