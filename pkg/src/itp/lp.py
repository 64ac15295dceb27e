"""Revised primal simplex with bounded variables, in float or exact rational arithmetic.

Problems are stated as::

    min/max  c @ x
    s.t.     A[r] @ x  (<= | = | >=)  rhs[r]
             lower <= x <= upper        (bounds may be infinite)

Every row gets a slack ``s_r`` with ``A[r] @ x + s_r = rhs[r]`` whose bounds
encode the relation. Phase one drives artificial variables out of a crash
basis; phase two optimizes the real objective. Dantzig pricing is used until
the number of consecutive degenerate pivots exceeds ``3 * (rows + cols)``,
after which Bland's rule takes over for the rest of the solve.

In rational mode all arithmetic runs on :class:`gmpy2.mpq` inside numpy
object arrays and every comparison is exact.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from gmpy2 import mpq

from .exceptions import NumericalFailure

RELATIONS = ("<=", "=", ">=")

# float-mode tolerances
PRIMAL_TOL = 1e-9
DUAL_TOL = 1e-9
PIVOT_TOL = 1e-9
REFACTOR_EVERY = 40


class LpStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


class Arithmetic(str, enum.Enum):
    FLOAT = "float"
    RATIONAL = "rational"


@dataclass(frozen=True, eq=False)
class LpProblem:
    """A linear program over box-bounded variables with ``<=``/``=``/``>=`` rows."""

    c: np.ndarray
    A: np.ndarray
    relations: tuple
    rhs: np.ndarray
    lower: np.ndarray | None = None
    upper: np.ndarray | None = None
    sense: str = "min"
    names: tuple | None = None

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).ravel()
        nvar = c.size
        A = np.asarray(self.A, dtype=float)
        if A.size == 0:
            A = A.reshape(0, nvar) if A.ndim < 2 or A.shape[1] != nvar else A
        rhs = np.asarray(self.rhs, dtype=float).ravel()
        rel = tuple(self.relations)
        if A.ndim != 2 or A.shape[1] != nvar:
            raise ValueError(f"A must have {nvar} columns, got shape {A.shape}")
        if A.shape[0] != rhs.size or len(rel) != rhs.size:
            raise ValueError("A, relations and rhs disagree on the number of rows")
        bad = [r for r in rel if r not in RELATIONS]
        if bad:
            raise ValueError(f"unknown relation(s) {bad}")
        lower = np.zeros(nvar) if self.lower is None else np.asarray(self.lower, dtype=float).ravel()
        upper = np.full(nvar, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float).ravel()
        if lower.size != nvar or upper.size != nvar:
            raise ValueError("bounds must have one entry per variable")
        if np.any(lower > upper):
            raise ValueError("a variable has lower bound above upper bound")
        if np.any(lower == np.inf) or np.any(upper == -np.inf):
            raise ValueError("bounds must not exclude every real value")
        if self.sense not in ("min", "max"):
            raise ValueError("sense must be 'min' or 'max'")
        if not (np.all(np.isfinite(A)) and np.all(np.isfinite(rhs)) and np.all(np.isfinite(c))):
            raise ValueError("coefficients must be finite")
        for name, val in (("c", c), ("A", A), ("rhs", rhs), ("lower", lower), ("upper", upper)):
            val.setflags(write=False)
            object.__setattr__(self, name, val)
        object.__setattr__(self, "relations", rel)

    @property
    def num_vars(self) -> int:
        return self.c.size

    @property
    def num_rows(self) -> int:
        return self.rhs.size

    @classmethod
    def from_rows(cls, c, rows: Sequence[tuple], lower=None, upper=None, sense="min", names=None):
        """Build from sparse rows ``(coeffs: dict[int, float], relation, rhs)``."""
        nvar = len(c)
        A = np.zeros((len(rows), nvar))
        rel, rhs = [], []
        for r, (coeffs, relation, b) in enumerate(rows):
            for j, a in coeffs.items():
                A[r, j] += a
            rel.append(relation)
            rhs.append(b)
        return cls(c, A, tuple(rel), rhs, lower, upper, sense, names)


@dataclass(eq=False)
class LpOutcome:
    """Result of :func:`solve_lp`.

    ``duals`` follow the usual convention for the stated sense: for a
    minimization a ``<=`` row has a nonpositive multiplier, for a
    maximization a nonnegative one. ``ray`` is set for unbounded problems and
    ``farkas`` (the phase-one row multipliers) for infeasible ones.
    """

    status: LpStatus
    x: np.ndarray | None = None
    duals: np.ndarray | None = None
    value: object = None
    reduced_costs: np.ndarray | None = None
    ray: np.ndarray | None = None
    farkas: np.ndarray | None = None
    iterations: int = 0
    arithmetic: Arithmetic = Arithmetic.FLOAT

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


# variable states
_BASIC, _AT_LO, _AT_HI, _FREE = 0, 1, 2, 3


class _Simplex:
    """Single-use solver state; never shared between solves."""

    def __init__(self, prob: LpProblem, exact: bool):
        self.exact = exact
        k, n = prob.num_rows, prob.num_vars
        self.k, self.n = k, n
        conv = _to_exact if exact else (lambda a: np.array(a, dtype=float))
        sign = -1 if prob.sense == "max" else 1

        # slack s_r = rhs_r - A_r x: "<=" -> s >= 0, ">=" -> s <= 0, "=" -> s == 0
        has_lo = np.concatenate([np.isfinite(prob.lower), np.array([r in ("<=", "=") for r in prob.relations], dtype=bool)])
        has_hi = np.concatenate([np.isfinite(prob.upper), np.array([r in (">=", "=") for r in prob.relations], dtype=bool)])
        lo = np.concatenate([np.where(np.isfinite(prob.lower), prob.lower, 0.0), np.zeros(k)])
        hi = np.concatenate([np.where(np.isfinite(prob.upper), prob.upper, 0.0), np.zeros(k)])
        self.A = conv(np.hstack([prob.A, np.eye(k)])) if k else conv(np.zeros((0, n)))
        self.b = conv(prob.rhs)
        self.c = conv(np.concatenate([sign * prob.c, np.zeros(k)]))
        self.lo, self.hi = conv(lo), conv(hi)
        self.has_lo, self.has_hi = has_lo, has_hi
        self.sign = sign
        self.zero = mpq(0) if exact else 0.0
        self.ptol = 0 if exact else PRIMAL_TOL
        self.dtol = 0 if exact else DUAL_TOL
        self.pivtol = 0 if exact else PIVOT_TOL
        self.iterations = 0

    # -- setup -------------------------------------------------------------
    def _crash(self):
        """Nonbasic structurals at a finite bound; slacks basic where they fit, else artificials."""
        k, n = self.k, self.n
        N = n + k
        x = np.array([self.zero] * N, dtype=object) if self.exact else np.zeros(N)
        state = np.empty(N, dtype=np.int8)
        for j in range(n):
            if self.has_lo[j]:
                x[j], state[j] = self.lo[j], _AT_LO
            elif self.has_hi[j]:
                x[j], state[j] = self.hi[j], _AT_HI
            else:
                x[j], state[j] = self.zero, _FREE
        resid = self.b - self.A[:, :n] @ x[:n] if k else self.b
        basis, art_cols, art_rows = [], [], []
        for r in range(k):
            s = n + r
            val = resid[r]
            if self.has_lo[s] and val < self.lo[s]:
                x[s], state[s] = self.lo[s], _AT_LO
            elif self.has_hi[s] and val > self.hi[s]:
                x[s], state[s] = self.hi[s], _AT_HI
            else:
                x[s], state[s] = val, _BASIC
                basis.append(s)
                continue
            art_rows.append(r)
        # artificial columns: one per row whose slack could not absorb the residual
        na = len(art_rows)
        if na:
            extra = np.array([[self.zero] * na for _ in range(k)], dtype=object) if self.exact else np.zeros((k, na))
            xa = []
            for a, r in enumerate(art_rows):
                gap = resid[r] - x[n + r]
                one = mpq(1) if self.exact else 1.0
                extra[r, a] = one if gap >= 0 else -one
                xa.append(abs(gap))
            self.A = np.hstack([self.A, extra])
            x = np.concatenate([x, np.array(xa, dtype=object if self.exact else float)])
            state = np.concatenate([state, np.full(na, _BASIC, dtype=np.int8)])
            self.lo = np.concatenate([self.lo, np.array([self.zero] * na, dtype=self.lo.dtype)])
            self.hi = np.concatenate([self.hi, np.array([self.zero] * na, dtype=self.hi.dtype)])
            self.has_lo = np.concatenate([self.has_lo, np.ones(na, dtype=bool)])
            self.has_hi = np.concatenate([self.has_hi, np.zeros(na, dtype=bool)])
            self.c = np.concatenate([self.c, np.array([self.zero] * na, dtype=self.c.dtype)])
            art_cols = list(range(N, N + na))
        # order basis by row
        row_of = {}
        for s in basis:
            row_of[s - n] = s
        for a, r in zip(art_cols, art_rows):
            row_of[r] = a
        self.basis = [row_of[r] for r in range(k)]
        self.x, self.state = x, state
        self.art_cols = art_cols
        self.fixed = self.has_lo & self.has_hi & _eq(self.lo, self.hi)
        self._refactor()

    def _refactor(self):
        k = self.k
        if k == 0:
            self.Binv = np.zeros((0, 0), dtype=object if self.exact else float)
            return
        B = self.A[:, self.basis]
        if self.exact:
            self.Binv = _exact_inverse(B)
        else:
            try:
                self.Binv = np.linalg.inv(B)
            except np.linalg.LinAlgError:
                raise NumericalFailure("singular basis matrix") from None
            nb = self.state != _BASIC
            self.x[self.basis] = self.Binv @ (self.b - self.A[:, nb] @ self.x[nb])

    # -- iterations --------------------------------------------------------
    def _run(self, cost) -> str:
        """Optimize ``cost @ x`` from the current basis. Returns 'optimal' or 'unbounded'."""
        k = self.k
        Ncols = self.A.shape[1]
        bland = False
        degenerate = 0
        degen_cap = 3 * (k + self.n)
        since_refactor = 0
        max_iter = 200 * (k + Ncols) + 1000
        idx = np.arange(Ncols)
        while True:
            if self.iterations > max_iter:
                raise NumericalFailure("simplex iteration limit exceeded")
            cB = cost[self.basis]
            y = cB @ self.Binv if k else np.zeros(0)
            d = cost - (y @ self.A if k else 0 * cost)
            st = self.state
            movable = ~self.fixed
            inc = movable & (((st == _AT_LO) | (st == _FREE)) & (d < -self.dtol))
            dec = movable & (((st == _AT_HI) | (st == _FREE)) & (d > self.dtol))
            cand = inc | dec
            if not cand.any():
                self.y, self.d = y, d
                return "optimal"
            if bland:
                q = int(idx[cand][0])
            else:
                mag = np.abs(d.astype(float)) if self.exact else np.abs(d)
                mag = np.where(cand, mag, -1.0)
                q = int(np.argmax(mag))
            direction = 1 if inc[q] else -1
            alpha = self.Binv @ self.A[:, q] if k else np.zeros(0)
            da = alpha * direction

            # ratio test
            best_t, leave = None, None
            if self.has_lo[q] and self.has_hi[q]:
                best_t, leave = self.hi[q] - self.lo[q], -1
            rows = np.nonzero((da > self.pivtol) | (da < -self.pivtol))[0] if k else []
            ties = []
            for p in rows:
                bv = self.basis[p]
                a = da[p]
                if a > 0:
                    if not self.has_lo[bv]:
                        continue
                    t = (self.x[bv] - self.lo[bv]) / a
                else:
                    if not self.has_hi[bv]:
                        continue
                    t = (self.hi[bv] - self.x[bv]) / (-a)
                if t < 0:
                    t = self.zero
                if best_t is None or t < best_t - self.ptol:
                    best_t, leave = t, p
                    ties = [p]
                elif t <= best_t + self.ptol and leave != -1:
                    ties.append(p)
            if best_t is None:
                ray = np.zeros(Ncols, dtype=object if self.exact else float)
                ray[q] = direction
                if k:
                    ray[self.basis] = -da
                self.ray = ray
                return "unbounded"
            if leave != -1 and len(ties) > 1:
                if bland:
                    leave = min(ties, key=lambda p: self.basis[p])
                else:
                    leave = max(ties, key=lambda p: abs(float(da[p])))
            t = best_t
            self.iterations += 1
            if t <= self.ptol:
                degenerate += 1
                if degenerate > degen_cap:
                    bland = True
            else:
                degenerate = 0

            # update values
            self.x[q] = self.x[q] + direction * t
            if k:
                self.x[self.basis] = self.x[self.basis] - t * da
            if leave == -1:
                # bound flip of the entering variable
                self.state[q] = _AT_HI if direction > 0 else _AT_LO
                self.x[q] = self.hi[q] if direction > 0 else self.lo[q]
                continue
            lv = self.basis[leave]
            a = da[leave]
            if a > 0:
                self.x[lv], self.state[lv] = self.lo[lv], _AT_LO
            else:
                self.x[lv], self.state[lv] = self.hi[lv], _AT_HI
            self.state[q] = _BASIC
            self.basis[leave] = q
            # product-form update of the basis inverse
            piv = alpha[leave]
            row = self.Binv[leave] / piv
            self.Binv = self.Binv - np.outer(alpha, row)
            self.Binv[leave] = row
            since_refactor += 1
            if not self.exact and since_refactor >= REFACTOR_EVERY:
                self._refactor()
                since_refactor = 0

    def solve(self) -> LpOutcome:
        self._crash()
        arith = Arithmetic.RATIONAL if self.exact else Arithmetic.FLOAT
        if self.art_cols:
            phase1 = np.array([self.zero] * self.A.shape[1], dtype=self.c.dtype)
            one = mpq(1) if self.exact else 1.0
            for a in self.art_cols:
                phase1[a] = one
            self._run(phase1)
            infeas = sum((self.x[a] for a in self.art_cols), self.zero)
            scale = 1.0 + float(np.max(np.abs(self.b.astype(float)))) if self.k else 1.0
            if infeas > (0 if self.exact else 1e-7 * scale):
                return LpOutcome(LpStatus.INFEASIBLE, farkas=self._row_duals(self.y),
                                 iterations=self.iterations, arithmetic=arith)
            for a in self.art_cols:
                self.hi[a] = self.zero
                self.has_hi[a] = True
                self.fixed[a] = True
                if self.state[a] != _BASIC:
                    self.x[a] = self.zero
                    self.state[a] = _AT_LO
        status = self._run(self.c)
        n = self.n
        if status == "unbounded":
            return LpOutcome(LpStatus.UNBOUNDED, ray=self.ray[:n].copy(),
                             iterations=self.iterations, arithmetic=arith)
        if not self.exact:
            self._refactor()
            cB = self.c[self.basis]
            self.y = cB @ self.Binv if self.k else np.zeros(0)
            self.d = self.c - (self.y @ self.A if self.k else 0 * self.c)
        x = self.x[:n].copy()
        value = self.sign * (self.c[:n] @ x) if n else self.zero
        duals = self.sign * self._row_duals(self.y)
        rc = self.sign * self.d[:n]
        if not self.exact:
            self._verify(x)
        return LpOutcome(LpStatus.OPTIMAL, x=x, duals=duals, value=value, reduced_costs=rc,
                         iterations=self.iterations, arithmetic=arith)

    def _row_duals(self, y):
        return np.array(y[: self.k], dtype=object if self.exact else float)

    def _verify(self, x):
        k, n = self.k, self.n
        A = self.A[:, :n]
        scale = 1.0 + (float(np.max(np.abs(self.b))) if k else 0.0)
        if k:
            slack = self.b - A @ x
            lo_v = np.where(self.has_lo[n:n + k], self.lo[n:n + k] - slack, 0.0)
            hi_v = np.where(self.has_hi[n:n + k], slack - self.hi[n:n + k], 0.0)
            if max(lo_v.max(), hi_v.max()) > 1e-7 * scale:
                raise NumericalFailure("final primal residual too large")
        blo = np.where(self.has_lo[:n], self.lo[:n] - x, 0.0)
        bhi = np.where(self.has_hi[:n], x - self.hi[:n], 0.0)
        if n and max(blo.max(), bhi.max()) > 1e-7 * scale:
            raise NumericalFailure("final bound violation too large")


def _eq(a, b):
    return np.array([ai == bi for ai, bi in zip(a, b)], dtype=bool)


def _to_exact(a) -> np.ndarray:
    a = np.asarray(a)
    out = np.empty(a.shape, dtype=object)
    flat = out.reshape(-1)
    for i, v in enumerate(a.reshape(-1)):
        flat[i] = v if isinstance(v, _MPQ) else mpq(float(v)) if isinstance(v, (float, np.floating)) else mpq(int(v))
    return out


_MPQ = type(mpq())


def _exact_inverse(B) -> np.ndarray:
    """Gauss-Jordan inverse over the rationals."""
    k = B.shape[0]
    M = [[mpq(v) for v in row] + [mpq(1) if i == j else mpq(0) for j in range(k)] for i, row in enumerate(B)]
    for col in range(k):
        piv = next((r for r in range(col, k) if M[r][col] != 0), None)
        if piv is None:
            raise ArithmeticError("singular basis in exact mode")
        M[col], M[piv] = M[piv], M[col]
        p = M[col][col]
        M[col] = [v / p for v in M[col]]
        for r in range(k):
            if r != col and M[r][col] != 0:
                f = M[r][col]
                M[r] = [a - f * b for a, b in zip(M[r], M[col])]
    out = np.empty((k, k), dtype=object)
    for i in range(k):
        out[i, :] = M[i][k:]
    return out


def solve_lp(prob: LpProblem, arithmetic: Arithmetic | str = Arithmetic.FLOAT) -> LpOutcome:
    """Solve ``prob``; returns an optimal, infeasible or unbounded outcome.

    Float mode raises :class:`NumericalFailure` when the final solution fails
    its residual checks; rational mode is exact and returns ``mpq`` values.
    """
    exact = Arithmetic(arithmetic) is Arithmetic.RATIONAL
    return _Simplex(prob, exact).solve()


def check_certificate(prob: LpProblem, out: LpOutcome, tol: float = 1e-6) -> bool:
    """Independent check of an optimal outcome: primal rows, bounds, dual signs and zero gap."""
    if not out.optimal:
        return False
    x = np.asarray(out.x, dtype=float)
    y = np.asarray(out.duals, dtype=float)
    A, b = prob.A, prob.rhs
    ax = A @ x
    scale = 1.0 + float(np.max(np.abs(b), initial=0.0))
    for r, rel in enumerate(prob.relations):
        if rel == "<=" and ax[r] > b[r] + tol * scale:
            return False
        if rel == ">=" and ax[r] < b[r] - tol * scale:
            return False
        if rel == "=" and abs(ax[r] - b[r]) > tol * scale:
            return False
    if np.any(x < prob.lower - tol) or np.any(x > prob.upper + tol):
        return False
    s = 1.0 if prob.sense == "min" else -1.0
    # in min-form a "<=" row must carry a nonpositive multiplier
    for r, rel in enumerate(prob.relations):
        if rel == "<=" and s * y[r] > tol:
            return False
        if rel == ">=" and s * y[r] < -tol:
            return False
    rc = s * (prob.c - A.T @ y)
    # reduced cost sign must match the side of the box the variable sits on
    at_lo = np.isfinite(prob.lower) & (np.abs(x - prob.lower) <= tol)
    at_hi = np.isfinite(prob.upper) & (np.abs(x - prob.upper) <= tol)
    bad = ((rc < -tol) & ~at_hi) | ((rc > tol) & ~at_lo)
    if np.any(bad):
        return False
    # complementary slackness on rows
    for r in range(len(b)):
        if abs(y[r]) > tol and abs(ax[r] - b[r]) > tol * scale:
            return False
    return True


def write_lp_text(prob: LpProblem, path=None, binaries=()) -> str:
    """Render ``prob`` in CPLEX LP text format (for debugging).

    ``binaries`` lists variable indices declared binary, which turns the
    dump into a MILP for external solvers.
    """
    names = list(prob.names) if prob.names else [f"x{j}" for j in range(prob.num_vars)]

    def expr(coeffs):
        parts = []
        for a, nm in zip(coeffs, names):
            if a == 0:
                continue
            sign = "-" if a < 0 else "+"
            parts.append(f"{sign} {abs(a):.17g} {nm}")
        if not parts:
            return "0 " + names[0] if names else "0"
        s = " ".join(parts)
        return s[2:] if s.startswith("+ ") else s

    lines = ["Maximize" if prob.sense == "max" else "Minimize", f" obj: {expr(prob.c)}", "Subject To"]
    for r in range(prob.num_rows):
        lines.append(f" r{r}: {expr(prob.A[r])} {prob.relations[r]} {prob.rhs[r]:.17g}")
    lines.append("Bounds")
    for j, nm in enumerate(names):
        lo, hi = prob.lower[j], prob.upper[j]
        lo_s = "-inf" if math.isinf(lo) else f"{lo:.17g}"
        hi_s = "+inf" if math.isinf(hi) else f"{hi:.17g}"
        lines.append(f" {lo_s} <= {nm} <= {hi_s}")
    if binaries:
        lines.append("Binaries")
        lines.append(" " + " ".join(names[j] for j in binaries))
    lines.append("End")
    text = "\n".join(lines) + "\n"
    if path is not None:
        with open(path, "w") as fh:
            fh.write(text)
    return text
