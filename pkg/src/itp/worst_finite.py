"""Worst finite optimal value: exhaustive complementarity patterns and branch-and-bound.

A feasible scenario's optimal value is attained at the upper costs, so the
worst finite value is the largest ``c_hi @ x`` over plans ``x`` that are
optimal for some feasible scenario. Optimality is encoded through dual
feasibility plus complementary slackness:

* route ``(i, j)``: either ``x_ij = 0`` or ``u_i + v_j = c_hi_ij``;
* source ``i`` (``<=`` mode): either ``u_i = 0`` or ``sum_j x_ij >= s_lo_i``.

:func:`worst_finite_enumerate` fixes every one of these choices up front and
solves one LP per pattern (exact, exponential). :func:`worst_finite_bnb`
resolves them lazily: a node relaxes the unresolved implications, bounds the
value with LPs and branches on the most violated implication.
"""
from __future__ import annotations

import csv
import heapq
import itertools
import math
import time
from dataclasses import dataclass, field

import numpy as np
from gmpy2 import mpq

from .core import DualPair, ItpInstance, Mode, Scenario, witness_scenario
from .exceptions import InstanceTooLarge, NoIncumbent, NotWeaklyFeasible
from .lp import Arithmetic, LpProblem, LpStatus, solve_lp, write_lp_text
from .properties import weak_feasible_problem
from .transport import demand_block, dual_block, solve_scenario, supply_block
from .value_range import initial_scenario

#: implications count as satisfied below this violation
COMP_TOL = 1e-7
#: relative optimality gap at which the search stops
GAP_TOL = 1e-6
#: default limit on ``m*n + m`` for exhaustive enumeration
ENUM_CAP = 16

LOG_COLUMNS = ("elapsed_seconds", "incumbent_value", "upper_bound", "nodes_explored")


@dataclass(frozen=True)
class ComplementarityPattern:
    """Resolution of every implication.

    ``zero_routes`` (K) are routes with ``x_ij = 0`` and a dual row allowed
    to be slack; the other routes have tight dual rows. ``covered_sources``
    (L) must ship at least ``s_lo_i`` and may price supply (``u_i <= 0``);
    the other sources have ``u_i = 0``.
    """

    zero_routes: frozenset
    covered_sources: frozenset


@dataclass
class SearchStats:
    nodes: int = 0
    lp_solves: int = 0
    wall_time: float = 0.0
    best_found_time: float = 0.0
    pruned: int = 0
    max_depth: int = 0


@dataclass(eq=False)
class WorstFiniteResult:
    instance: ItpInstance
    value: float
    upper_bound: float
    proven_optimal: bool
    plan: np.ndarray | None = None
    duals: DualPair | None = None
    scenario: Scenario | None = None
    stats: SearchStats = field(default_factory=SearchStats)
    log: list = field(default_factory=list)
    method: str = "bnb"
    pattern: ComplementarityPattern | None = None

    @property
    def gap(self) -> float:
        return self.upper_bound - self.value

    @property
    def shipped(self) -> float:
        """Total demand served in the worst scenario found."""
        return float(self.plan.sum()) if self.plan is not None else float("nan")

    @property
    def paradox(self) -> bool:
        """Whether the worst scenario ships strictly less than the maximal total demand."""
        cap = float(self.instance.demand_hi.sum())
        return self.plan is not None and self.shipped < cap - 1e-6 * (1.0 + cap)

    def write_log(self, path):
        write_convergence_log(self.log, path)


def write_convergence_log(entries, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(LOG_COLUMNS)
        for t, inc, ub, nodes in entries:
            w.writerow([f"{t:.6f}", repr(float(inc)), repr(float(ub)), int(nodes)])


def read_convergence_log(path) -> list[tuple]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [(float(r["elapsed_seconds"]), float(r["incumbent_value"]), float(r["upper_bound"]),
             int(r["nodes_explored"])) for r in rows]


def extract_worst_scenario(result: WorstFiniteResult) -> Scenario:
    """Scenario under which the incumbent plan is optimal with value ``result.value``."""
    if result.plan is None:
        raise NoIncumbent("result carries no incumbent plan")
    return witness_scenario(result.instance, result.plan)


def certificate_violations(inst: ItpInstance, x, duals: DualPair, tol: float = 1e-6) -> list[str]:
    """Constraints of the plan/dual certificate that fail, as readable messages.

    Checked: primal rows, dual rows, sign of ``u`` (``<=`` mode), and both
    implication families: flow only on tight routes, ``u_i = 0`` on sources
    shipping less than ``s_lo_i``. Tolerances scale with the data.
    """
    x = np.asarray(x, dtype=float)
    u, v = np.asarray(duals.u, dtype=float), np.asarray(duals.v, dtype=float)
    rows, cols = x.sum(axis=1), x.sum(axis=0)
    scale = 1.0 + float(max(inst.supply_hi.max(initial=0.0), inst.demand_hi.max(initial=0.0)))
    cscale = 1.0 + float(inst.cost_hi.max(initial=0.0))
    out = []
    if np.any(x < -tol * scale):
        out.append("negative flow")
    if np.any(rows > inst.supply_hi + tol * scale):
        out.append("supply above upper bound")
    if inst.mode is Mode.EQ and np.any(rows < inst.supply_lo - tol * scale):
        out.append("supply below lower bound")
    if np.any(cols < inst.demand_lo - tol * scale) or np.any(cols > inst.demand_hi + tol * scale):
        out.append("demand outside its interval")
    red = inst.cost_hi - u[:, None] - v[None, :]
    if np.any(red < -tol * cscale):
        out.append("dual row violated")
    if inst.mode is Mode.LE and np.any(u > tol * cscale):
        out.append("positive supply dual")
    if np.any((x > tol * scale) & (np.abs(red) > tol * cscale)):
        out.append("flow on a non-tight route")
    if inst.mode is Mode.LE and np.any((rows < inst.supply_lo - tol * scale) & (np.abs(u) > tol * cscale)):
        out.append("priced source ships below its lower supply")
    return out


def verify_result(result: WorstFiniteResult, tol: float = 1e-6) -> list[str]:
    """Certificate violations of a result plus value/bound consistency."""
    out = certificate_violations(result.instance, result.plan, result.duals, tol)
    value = float(np.sum(result.instance.cost_hi * result.plan))
    if abs(value - result.value) > tol * (1.0 + abs(result.value)):
        out.append("value differs from the plan's cost")
    if result.value > result.upper_bound + tol * (1.0 + abs(result.value)):
        out.append("value above the upper bound")
    if result.proven_optimal and result.upper_bound - result.value > tol * (1.0 + abs(result.value)):
        out.append("proven optimal with an open gap")
    return out


def _require_feasible(inst):
    if not weak_feasible_problem(inst):
        raise NotWeaklyFeasible("no scenario of the instance is feasible")


# -- exhaustive oracle ---------------------------------------------------------

def pattern_lp(inst: ItpInstance, pattern: ComplementarityPattern) -> LpProblem:
    """Joint LP in ``(x, u, v)`` maximizing ``c_hi @ x`` under one pattern."""
    m, n = inst.shape
    mn = m * n
    nv = mn + m + n
    rows, rel, rhs = [], [], []

    def add(coeffs, r, b):
        row = np.zeros(nv)
        for k, a in coeffs:
            row[k] += a
        rows.append(row)
        rel.append(r)
        rhs.append(b)

    for i in range(m):
        route = [(i * n + j, 1.0) for j in range(n)]
        add(route, "<=", inst.supply_hi[i])
        if inst.mode is Mode.EQ or i in pattern.covered_sources:
            add(route, ">=", inst.supply_lo[i])
    for j in range(n):
        col = [(i * n + j, 1.0) for i in range(m)]
        add(col, ">=", inst.demand_lo[j])
        add(col, "<=", inst.demand_hi[j])
    lower = np.concatenate([np.zeros(mn), np.full(m + n, -np.inf)])
    upper = np.full(nv, np.inf)
    for i in range(m):
        for j in range(n):
            dual_row = [(mn + i, 1.0), (mn + m + j, 1.0)]
            if (i, j) in pattern.zero_routes:
                upper[i * n + j] = 0.0
                add(dual_row, "<=", inst.cost_hi[i, j])
            else:
                add(dual_row, "=", inst.cost_hi[i, j])
    if inst.mode is Mode.LE:
        for i in range(m):
            upper[mn + i] = 0.0
            if i not in pattern.covered_sources:
                lower[mn + i] = 0.0
    c = np.concatenate([inst.cost_hi.ravel(), np.zeros(m + n)])
    return LpProblem(c, np.array(rows), tuple(rel), np.array(rhs), lower, upper, "max")


def pattern_x_lp(inst: ItpInstance, pattern: ComplementarityPattern) -> LpProblem:
    """The ``x`` half of :func:`pattern_lp`; the ``(u, v)`` half only decides feasibility."""
    m, n = inst.shape
    S, D = supply_block(m, n), demand_block(m, n)
    lower_rows = list(range(m)) if inst.mode is Mode.EQ else sorted(pattern.covered_sources)
    A = np.vstack([S, D, D, S[lower_rows]])
    rel = ("<=",) * m + (">=",) * n + ("<=",) * n + (">=",) * len(lower_rows)
    rhs = np.concatenate([inst.supply_hi, inst.demand_lo, inst.demand_hi, inst.supply_lo[lower_rows]])
    upper = np.full(m * n, np.inf)
    for (i, j) in pattern.zero_routes:
        upper[i * n + j] = 0.0
    return LpProblem(inst.cost_hi.ravel(), A, rel, rhs, None, upper, "max")


def pattern_duals(inst: ItpInstance, pattern: ComplementarityPattern):
    """Exact feasible ``(u, v)`` for the pattern's dual rows, or ``None``.

    The rows are difference constraints in ``(u, -v)`` (plus a zero
    reference node for the sign rows of ``<=`` mode), so feasibility is the
    absence of a negative cycle; Bellman-Ford over rationals decides it
    exactly and its distances are a solution.
    """
    m, n = inst.shape
    cost = [[mpq(float(inst.cost_hi[i, j])) for j in range(n)] for i in range(m)]
    # node ids: u_i -> i, w_j = -v_j -> m + j, reference -> m + n
    ref = m + n
    edges = []  # (a, b, k): x_b <= x_a + k
    for i in range(m):
        for j in range(n):
            edges.append((m + j, i, cost[i][j]))
            if (i, j) not in pattern.zero_routes:
                edges.append((i, m + j, -cost[i][j]))
    if inst.mode is Mode.LE:
        for i in range(m):
            edges.append((ref, i, mpq(0)))
            if i not in pattern.covered_sources:
                edges.append((i, ref, mpq(0)))
    dist = [mpq(0)] * (m + n + 1)
    for _ in range(m + n + 1):
        changed = False
        for a, b, k in edges:
            if dist[a] + k < dist[b]:
                dist[b] = dist[a] + k
                changed = True
        if not changed:
            base = dist[ref] if inst.mode is Mode.LE else mpq(0)
            u = np.array([float(dist[i] - base) for i in range(m)])
            v = np.array([float(base - dist[m + j]) for j in range(n)])
            return DualPair(u, v)
    return None


def iter_patterns(inst: ItpInstance):
    m, n = inst.shape
    routes = [(i, j) for i in range(m) for j in range(n)]
    sources = list(range(m)) if inst.mode is Mode.LE else []
    for zmask in itertools.product((False, True), repeat=len(routes)):
        K = frozenset(r for r, z in zip(routes, zmask) if z)
        for lmask in itertools.product((False, True), repeat=len(sources)):
            L = frozenset(i for i, c in zip(sources, lmask) if c)
            yield ComplementarityPattern(K, L)


def pattern_count(inst: ItpInstance) -> int:
    return 2 ** _pattern_bits(inst)


def _pattern_bits(inst: ItpInstance) -> int:
    m, n = inst.shape
    return m * n + (m if inst.mode is Mode.LE else 0)


def minimal_dual_feasible_patterns(inst: ItpInstance) -> list[tuple[ComplementarityPattern, DualPair]]:
    """Dual-feasible patterns none of whose one-element shrinkings is dual-feasible.

    Growing K or L relaxes the dual rows and tightens the ``x`` rows, so the
    maximum over all patterns is attained at one of these.
    """
    m, n = inst.shape
    routes = [(i, j) for i in range(m) for j in range(n)]
    bits = _pattern_bits(inst)
    # bit b < m*n: route b in K; bit m*n + i: source i in L
    feasible = bytearray(1 << bits)
    found = []
    for mask in range(1 << bits):  # subsets precede supersets
        sub_ok = any(feasible[mask & ~(1 << b)] for b in range(bits) if mask >> b & 1)
        if sub_ok:
            feasible[mask] = 1
            continue
        pat = ComplementarityPattern(
            frozenset(routes[b] for b in range(m * n) if mask >> b & 1),
            frozenset(i for i in range(bits - m * n) if mask >> (m * n + i) & 1))
        duals = pattern_duals(inst, pat)
        if duals is not None:
            feasible[mask] = 1
            found.append((pat, duals))
    return found


def worst_finite_enumerate(inst: ItpInstance, cap: int = ENUM_CAP,
                           arithmetic=Arithmetic.RATIONAL) -> WorstFiniteResult:
    """Exact worst finite value as the maximum of ``c_hi @ x`` over all patterns.

    Only inclusion-minimal dual-feasible patterns need an LP; the rest are
    infeasible or dominated.
    """
    _require_feasible(inst)
    m, n = inst.shape
    size = _pattern_bits(inst)
    if size > cap:
        raise InstanceTooLarge(f"{2 ** size} patterns exceed the cap 2**{cap}")
    t0 = time.perf_counter()
    stats = SearchStats()
    best = None
    for pat, duals in minimal_dual_feasible_patterns(inst):
        out = solve_lp(pattern_x_lp(inst, pat), arithmetic)
        stats.lp_solves += 1
        stats.nodes += 1
        if out.status is not LpStatus.OPTIMAL:
            continue
        if best is None or out.value > best[0]:
            best = (out.value, out, pat, duals)
    stats.wall_time = stats.best_found_time = time.perf_counter() - t0
    if best is None:
        raise NotWeaklyFeasible("no pattern admits a weakly optimal plan")
    value, out, pat, duals = best
    x = np.array(out.x, dtype=float).reshape(m, n)
    v = float(value)
    return WorstFiniteResult(inst, v, v, True, x, duals, witness_scenario(inst, x), stats,
                             [(stats.wall_time, v, v, stats.nodes)], "enum", pat)


# -- branch and bound ------------------------------------------------------------

@dataclass(frozen=True)
class BnbConfig:
    time_limit: float = math.inf
    gap_tol: float = GAP_TOL
    node_order: str = "best"  # "best" (best bound) or "depth"
    node_limit: int | None = None
    comp_tol: float = COMP_TOL
    heuristic: bool = True
    propagate: bool = True


@dataclass(eq=False)
class BnbNode:
    forced_zero: frozenset = frozenset()
    forced_tight: frozenset = frozenset()
    forced_uzero: frozenset = frozenset()
    forced_slack: frozenset = frozenset()
    bound: float = math.inf
    depth: int = 0
    # relaxation results inherited when a branch leaves that side unchanged
    x_part: tuple | None = None
    dual_bound: float | None = None


class _BnbSearch:
    """One branch-and-bound run; not reusable."""

    def __init__(self, inst: ItpInstance, config: BnbConfig):
        self.inst = inst
        self.cfg = config
        m, n = inst.shape
        self.m, self.n = m, n
        self.le = inst.mode is Mode.LE
        self.c_hi = inst.cost_hi.ravel()
        self.width = (inst.cost_hi - inst.cost_lo).ravel()
        self.S, self.D = supply_block(m, n), demand_block(m, n)
        self.dual_rows = dual_block(m, n)
        self.stats = SearchStats()
        self.log = []
        self.incumbent = -math.inf
        self.inc_plan = None
        self.inc_duals = None
        self.upper = math.inf
        self.scale = 1.0 + float(np.abs(inst.cost_hi).sum() * max(inst.demand_hi.sum(), inst.supply_hi.sum()))
        self._seen_scenarios = set()

    # LP builders -------------------------------------------------------------
    def _solve(self, prob):
        self.stats.lp_solves += 1
        return solve_lp(prob)

    def _x_part(self, node: BnbNode):
        """max c_hi @ x over primal rows plus the node's x-side branches."""
        inst, m, n = self.inst, self.m, self.n
        A = [self.S, self.D, self.D]
        rel = ["<="] * m + [">="] * n + ["<="] * n
        rhs = [inst.supply_hi, inst.demand_lo, inst.demand_hi]
        lower_rows = sorted(node.forced_slack) if self.le else list(range(m))
        if lower_rows:
            A.append(self.S[lower_rows])
            rel += [">="] * len(lower_rows)
            rhs.append(inst.supply_lo[lower_rows])
        upper = np.full(m * n, np.inf)
        for (i, j) in node.forced_zero:
            upper[i * n + j] = 0.0
        prob = LpProblem(self.c_hi, np.vstack(A), tuple(rel), np.concatenate(rhs), None, upper, "max")
        out = self._solve(prob)
        if out.status is not LpStatus.OPTIMAL:
            return None
        return float(out.value), np.maximum(np.array(out.x, dtype=float), 0.0)

    def _dual_bounds(self, node: BnbNode):
        m, n = self.m, self.n
        lower = np.full(m + n, -np.inf)
        upper = np.full(m + n, np.inf)
        if self.le:
            upper[:m] = 0.0
        for i in node.forced_uzero:
            lower[i] = upper[i] = 0.0
        rel = tuple("=" if (k // n, k % n) in node.forced_tight else "<=" for k in range(m * n))
        return lower, upper, rel

    def _dual_bound(self, node: BnbNode):
        """Upper bound from the dual side: ``sum s_lo*u + sum d_hi*v`` with ``v >= 0``.

        Returns ``None`` when the node's dual constraints are infeasible and
        ``inf`` when the bound LP is unbounded. Only valid in ``<=`` mode.
        """
        if not self.le:
            return math.inf
        lower, upper, rel = self._dual_bounds(node)
        lower[self.m:] = 0.0
        obj = np.concatenate([self.inst.supply_lo, self.inst.demand_hi])
        out = self._solve(LpProblem(obj, self.dual_rows, rel, self.c_hi, lower, upper, "max"))
        if out.status is LpStatus.INFEASIBLE:
            return None
        if out.status is LpStatus.UNBOUNDED:
            return math.inf
        return float(out.value)

    def _gap_lp(self, node: BnbNode, x):
        """Best node-feasible duals for the scenario that ``x`` induces.

        The returned gap ``c_hi @ x - dual value`` equals the total weighted
        violation of the relaxed implications.
        """
        m, n = self.m, self.n
        X = x.reshape(m, n)
        sc = witness_scenario(self.inst, X)
        lower, upper, rel = self._dual_bounds(node)
        obj = np.concatenate([sc.supply, sc.demand])
        out = self._solve(LpProblem(obj, self.dual_rows, rel, self.c_hi, lower, upper, "max"))
        if out.status is not LpStatus.OPTIMAL:
            return None
        y = np.array(out.x, dtype=float)
        return float(self.c_hi @ x) - float(out.value), y[:m], y[m:], sc

    def _propagate(self, node: BnbNode) -> BnbNode | None:
        """Fix implications decided by the node's dual rows alone.

        The dual rows are difference constraints in ``(u, -v)``, so all-pairs
        shortest paths give the exact maximum of every ``u_i + v_j`` and
        ``u_i``. A route that cannot become tight must carry no flow; a source
        whose ``u_i`` must be negative must ship at least ``s_lo_i``. A
        negative cycle means the dual rows are infeasible.
        """
        m, n = self.m, self.n
        N = m + n + 1
        ref = m + n
        c = self.inst.cost_hi
        W = np.full((N, N), np.inf)
        np.fill_diagonal(W, 0.0)
        # edge a -> b with weight k encodes x_b <= x_a + k; nodes u_i, w_j = -v_j, ref
        W[m:m + n, :m] = c.T
        for (i, j) in node.forced_tight:
            W[i, m + j] = min(W[i, m + j], -c[i, j])
        if self.le:
            W[ref, :m] = 0.0
            for i in node.forced_uzero:
                W[i, ref] = 0.0
        for k in range(N):
            W = np.minimum(W, W[:, k, None] + W[None, k, :])
        tol = self.cfg.comp_tol * (1.0 + float(c.max(initial=0.0)))
        if np.any(np.diag(W) < -tol):
            return None
        reach = W[m:m + n, :m].T  # max of u_i + v_j
        zero = set(node.forced_zero)
        for i, j in zip(*np.nonzero(reach < c - tol)):
            pair = (int(i), int(j))
            if pair not in zero:
                zero.add(pair)
        slack = set(node.forced_slack)
        if self.le:
            for i in np.nonzero(W[ref, :m] < -tol)[0]:
                slack.add(int(i))
        if len(zero) == len(node.forced_zero) and len(slack) == len(node.forced_slack):
            return node
        return BnbNode(frozenset(zero), node.forced_tight, node.forced_uzero, frozenset(slack),
                       node.bound, node.depth, None, node.dual_bound)

    # search ------------------------------------------------------------------
    def _record(self, force=False):
        t = time.perf_counter() - self.t0
        entry = (t, self.incumbent, self.upper, self.stats.nodes)
        if force or not self.log or self.log[-1][1] != entry[1] or self.log[-1][2] != entry[2]:
            self.log.append(entry)

    def _update_incumbent(self, value, plan, duals):
        if value > self.incumbent + 1e-12 * (1.0 + abs(value)):
            self.incumbent = value
            self.inc_plan = plan.reshape(self.m, self.n).copy()
            self.inc_duals = duals
            self.stats.best_found_time = time.perf_counter() - self.t0
            self._record()

    def _try_scenario(self, sc: Scenario):
        key = (sc.supply.tobytes(), sc.demand.tobytes())
        if key in self._seen_scenarios:
            return
        self._seen_scenarios.add(key)
        sol = solve_scenario(self.inst, sc)
        self.stats.lp_solves += 1
        if sol.optimal:
            self._update_incumbent(sol.value, sol.plan, sol.duals)

    def _gap_closed(self) -> bool:
        return self.upper - self.incumbent <= self.cfg.gap_tol * (1.0 + abs(self.incumbent))

    def run(self) -> WorstFiniteResult:
        inst, cfg = self.inst, self.cfg
        self.t0 = time.perf_counter()
        deadline = self.t0 + cfg.time_limit
        sc0, sol0 = initial_scenario(inst)
        self.stats.lp_solves += 1
        if sol0.optimal:
            self._seen_scenarios.add((sc0.supply.tobytes(), sc0.demand.tobytes()))
            self._update_incumbent(sol0.value, sol0.plan, sol0.duals)

        counter = itertools.count()
        pool = []  # heap for best-bound, list used as stack for depth-first
        best_first = cfg.node_order != "depth"

        def push(node):
            if best_first:
                heapq.heappush(pool, (-node.bound, -node.depth, next(counter), node))
            else:
                pool.append((None, None, next(counter), node))

        def pool_bound():
            if not pool:
                return -math.inf
            if best_first:
                return -pool[0][0]
            return max(entry[3].bound for entry in pool)

        push(BnbNode())
        complete = True
        while pool:
            if time.perf_counter() >= deadline or (cfg.node_limit is not None and self.stats.nodes >= cfg.node_limit):
                complete = False
                break
            if best_first:
                node = heapq.heappop(pool)[3]
            else:
                node = pool.pop()[3]
            # the global bound covers the popped node and everything still queued
            glob = max(node.bound, pool_bound(), self.incumbent)
            if glob < self.upper:
                self.upper = glob
                self._record()
            if self._gap_closed():
                pool.clear()
                break
            if node.bound <= self.incumbent + cfg.gap_tol * (1.0 + abs(self.incumbent)):
                self.stats.pruned += 1
                continue
            self.stats.nodes += 1
            self.stats.max_depth = max(self.stats.max_depth, node.depth)
            self._expand(node, push)
        if complete and not pool:
            self.upper = max(self.incumbent, min(self.upper, self.incumbent))
        else:
            self.upper = max(self.incumbent, min(self.upper, max(pool_bound(), self.incumbent)))
        proven = complete and not pool or self._gap_closed()
        if proven:
            self.upper = max(self.incumbent, min(self.upper, self.incumbent if not pool else self.upper))
        self.stats.wall_time = time.perf_counter() - self.t0
        self._record(force=True)
        if self.inc_plan is None:
            raise NoIncumbent("branch-and-bound found no weakly optimal plan")
        return WorstFiniteResult(inst, self.incumbent, self.upper, bool(proven), self.inc_plan, self.inc_duals,
                                 witness_scenario(inst, self.inc_plan), self.stats, self.log, "bnb")

    def _expand(self, node: BnbNode, push):
        cfg = self.cfg
        m, n = self.m, self.n
        if cfg.propagate:
            node = self._propagate(node)
            if node is None:
                self.stats.pruned += 1
                return
        xp = node.x_part if node.x_part is not None else self._x_part(node)
        if xp is None:
            self.stats.pruned += 1
            return
        db = node.dual_bound if node.dual_bound is not None else self._dual_bound(node)
        if db is None:
            self.stats.pruned += 1
            return
        bound_x, x = xp
        bound = min(node.bound, bound_x, db)
        if bound <= self.incumbent + cfg.gap_tol * (1.0 + abs(self.incumbent)):
            self.stats.pruned += 1
            return
        g = self._gap_lp(node, x)
        if g is None:
            self.stats.pruned += 1
            return
        gap, u, v, sc = g
        X = x.reshape(m, n)
        viol_route = X * (self.inst.cost_hi - u[:, None] - v[None, :])
        if self.le:
            short = np.maximum(self.inst.supply_lo - X.sum(axis=1), 0.0)
            viol_src = short * np.maximum(-u, 0.0)
        else:
            viol_src = np.zeros(m)
        tol = cfg.comp_tol * (1.0 + float(np.abs(X).max(initial=0.0)) * (1.0 + float(self.inst.cost_hi.max())))
        worst = max(float(viol_route.max(initial=0.0)), float(viol_src.max(initial=0.0)))
        if gap <= cfg.gap_tol * (1.0 + abs(bound_x)) and worst <= tol:
            # relaxation optimum satisfies every implication: node solved
            self._update_incumbent(bound_x, x, DualPair(u, v))
            return
        if cfg.heuristic:
            self._try_scenario(sc)
        if bound <= self.incumbent + cfg.gap_tol * (1.0 + abs(self.incumbent)):
            self.stats.pruned += 1
            return
        # branch on the most violated implication
        cands = []
        for i in range(m):
            for j in range(n):
                if viol_route[i, j] > 0:
                    cands.append((-viol_route[i, j], -self.width[i * n + j], 0, i, j))
            if viol_src[i] > 0:
                cands.append((-viol_src[i], 0.0, 1, i, -1))
        if not cands:
            # gap from float noise only; accept the incumbent candidate
            self._update_incumbent(bound_x, x, DualPair(u, v))
            return
        _, _, kind, i, j = min(cands)
        d = node.depth + 1
        if kind == 0:
            pair = (i, j)
            zero = BnbNode(node.forced_zero | {pair}, node.forced_tight, node.forced_uzero, node.forced_slack,
                           bound, d, None, db)
            tight = BnbNode(node.forced_zero, node.forced_tight | {pair}, node.forced_uzero, node.forced_slack,
                            bound, d, xp, None)
            children = (zero, tight)
        else:
            uzero = BnbNode(node.forced_zero, node.forced_tight, node.forced_uzero | {i}, node.forced_slack,
                            bound, d, xp, None)
            slack = BnbNode(node.forced_zero, node.forced_tight, node.forced_uzero, node.forced_slack | {i},
                            bound, d, None, db)
            children = (slack, uzero)
        # depth-first pops the last child first
        for child in children:
            push(child)


def worst_finite_bnb(inst: ItpInstance, config: BnbConfig | None = None, **kwargs) -> WorstFiniteResult:
    """Worst finite value by branch-and-bound over the complementarity implications.

    Stops with ``proven_optimal=True`` when the node pool empties (or the gap
    closes), otherwise returns the incumbent and the global bound at the time
    or node limit.
    """
    _require_feasible(inst)
    if config is None:
        config = BnbConfig(**kwargs)
    elif kwargs:
        raise TypeError("pass either a BnbConfig or keyword options, not both")
    return _BnbSearch(inst, config).run()


#: largest pattern-bit count that ``auto`` sends to the enumeration
AUTO_ENUM_SIZE = 8


def solve_worst_finite(inst: ItpInstance, method: str = "auto", cap: int = ENUM_CAP,
                       arithmetic=Arithmetic.RATIONAL, **config) -> WorstFiniteResult:
    """Dispatch on ``method``: ``"enum"``, ``"bnb"`` or ``"auto"``.

    ``auto`` enumerates only tiny instances (at most ``AUTO_ENUM_SIZE``
    pattern bits); past that the search is far faster and just as exact.
    """
    if method == "auto":
        m, n = inst.shape
        size = m * n + (m if inst.mode is Mode.LE else 0)
        method = "enum" if size <= min(cap, AUTO_ENUM_SIZE) else "bnb"
    if method == "enum":
        return worst_finite_enumerate(inst, cap=cap, arithmetic=arithmetic)
    if method == "bnb":
        return worst_finite_bnb(inst, BnbConfig(**config))
    raise ValueError(f"unknown method {method!r}")


# -- big-M export ----------------------------------------------------------------

def bigm_model(inst: ItpInstance, big_m: float | None = None) -> tuple[LpProblem, list[int]]:
    """Big-M MILP of the worst finite value, for external solvers only.

    Binary ``z_ij = 1`` lets route ``(i, j)`` carry flow and forces its dual
    row tight; binary ``y_i = 1`` lets source ``i`` have ``u_i < 0`` and
    forces it to ship at least ``s_lo_i``. The default ``big_m`` is a
    heuristic and is not guaranteed to bound every optimal dual.
    """
    m, n = inst.shape
    mn = m * n
    le = inst.mode is Mode.LE
    ny = m if le else 0
    nv = mn + m + n + mn + ny
    if big_m is None:
        big_m = (m + n) * float(inst.cost_hi.max(initial=0.0)) + 1.0
    X, U, V, Z, Y = 0, mn, mn + m, mn + m + n, mn + m + n + mn
    rows, rel, rhs = [], [], []

    def add(coeffs, r, b):
        row = np.zeros(nv)
        for k, a in coeffs:
            row[k] += a
        rows.append(row)
        rel.append(r)
        rhs.append(float(b))

    for i in range(m):
        route = [(X + i * n + j, 1.0) for j in range(n)]
        add(route, "<=", inst.supply_hi[i])
        if le:
            add(route + [(Y + i, -float(inst.supply_lo[i]))], ">=", 0.0)
            add([(U + i, -1.0), (Y + i, -big_m)], "<=", 0.0)
        else:
            add(route, ">=", inst.supply_lo[i])
    for j in range(n):
        col = [(X + i * n + j, 1.0) for i in range(m)]
        add(col, ">=", inst.demand_lo[j])
        add(col, "<=", inst.demand_hi[j])
    for i in range(m):
        for j in range(n):
            k = i * n + j
            cap = float(min(inst.supply_hi[i], inst.demand_hi[j]))
            add([(U + i, 1.0), (V + j, 1.0)], "<=", inst.cost_hi[i, j])
            add([(X + k, 1.0), (Z + k, -cap)], "<=", 0.0)
            add([(U + i, -1.0), (V + j, -1.0), (Z + k, big_m)], "<=", big_m - inst.cost_hi[i, j])
    lower = np.concatenate([np.zeros(mn), np.full(m + n, -np.inf), np.zeros(mn + ny)])
    upper = np.concatenate([np.full(mn, np.inf), np.zeros(m) if le else np.full(m, np.inf),
                            np.full(n, np.inf), np.ones(mn + ny)])
    c = np.concatenate([inst.cost_hi.ravel(), np.zeros(m + n + mn + ny)])
    names = ([f"x_{i}_{j}" for i in range(m) for j in range(n)] + [f"u_{i}" for i in range(m)]
             + [f"v_{j}" for j in range(n)] + [f"z_{i}_{j}" for i in range(m) for j in range(n)]
             + [f"y_{i}" for i in range(ny)])
    prob = LpProblem(c, np.array(rows), tuple(rel), np.array(rhs), lower, upper, "max", tuple(names))
    return prob, list(range(Z, nv))


def write_bigm_lp(inst: ItpInstance, path=None, big_m: float | None = None) -> str:
    prob, binaries = bigm_model(inst, big_m)
    return write_lp_text(prob, path, binaries)
