"""Interval data model: instances, scenarios and the membership tests on them."""
from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any, Mapping, Sequence

import numpy as np

from .exceptions import DimensionMismatch, InvalidInterval, NegativeBound

#: absolute tolerance for feasibility / equality comparisons on data
TOL = 1e-9


class Mode(str, enum.Enum):
    """Supply-row relation: ``LE`` is the ``<=`` model, ``EQ`` the balanced one."""

    LE = "le"
    EQ = "eq"

    @classmethod
    def parse(cls, value: "Mode | str") -> "Mode":
        if isinstance(value, Mode):
            return value
        v = str(value).strip().lower()
        aliases = {"le": cls.LE, "<=": cls.LE, "leq": cls.LE, "supplyleq": cls.LE,
                   "eq": cls.EQ, "=": cls.EQ, "supplyeq": cls.EQ}
        try:
            return aliases[v]
        except KeyError:
            raise ValueError(f"unknown mode {value!r}") from None


@dataclass(frozen=True)
class Interval:
    """Closed real interval ``[lo, hi]``."""

    lo: float
    hi: float

    def __post_init__(self):
        if not self.lo <= self.hi:
            raise InvalidInterval(f"lower bound {self.lo} exceeds upper bound {self.hi}")

    @property
    def width(self) -> float:
        return self.hi - self.lo

    @property
    def is_degenerate(self) -> bool:
        return self.lo == self.hi

    def __contains__(self, value) -> bool:
        return self.lo <= value <= self.hi


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ItpInstance:
    """An interval transportation problem.

    Bounds are stored as read-only float arrays: ``cost_lo``/``cost_hi`` of
    shape ``(m, n)``, ``supply_lo``/``supply_hi`` of shape ``(m,)`` and
    ``demand_lo``/``demand_hi`` of shape ``(n,)``. Build instances through
    :func:`validate_instance` or :meth:`from_bounds`.
    """

    cost_lo: np.ndarray
    cost_hi: np.ndarray
    supply_lo: np.ndarray
    supply_hi: np.ndarray
    demand_lo: np.ndarray
    demand_hi: np.ndarray
    mode: Mode = Mode.LE
    name: str | None = None

    @classmethod
    def from_bounds(cls, cost, supply, demand, mode="le", name=None) -> "ItpInstance":
        """Build from nested ``[lo, hi]`` pairs (or plain numbers for point intervals)."""
        cost = np.asarray(cost, dtype=float)
        supply = np.asarray(supply, dtype=float)
        demand = np.asarray(demand, dtype=float)
        if cost.ndim == 2:
            cost = np.stack([cost, cost], axis=-1)
        if supply.ndim == 1:
            supply = np.stack([supply, supply], axis=-1)
        if demand.ndim == 1:
            demand = np.stack([demand, demand], axis=-1)
        if cost.ndim != 3 or cost.shape[-1] != 2:
            raise DimensionMismatch(f"cost must be an m x n array of [lo, hi] pairs, got shape {cost.shape}")
        if supply.ndim != 2 or supply.shape[-1] != 2 or demand.ndim != 2 or demand.shape[-1] != 2:
            raise DimensionMismatch("supply and demand must be vectors of [lo, hi] pairs")
        m, n = cost.shape[:2]
        return validate_instance({
            "m": m, "n": n, "mode": mode, "name": name,
            "cost": cost, "supply": supply, "demand": demand,
        })

    @property
    def m(self) -> int:
        return self.cost_lo.shape[0]

    @property
    def n(self) -> int:
        return self.cost_lo.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.cost_lo.shape

    def cost(self, i: int, j: int) -> Interval:
        return Interval(float(self.cost_lo[i, j]), float(self.cost_hi[i, j]))

    def supply(self, i: int) -> Interval:
        return Interval(float(self.supply_lo[i]), float(self.supply_hi[i]))

    def demand(self, j: int) -> Interval:
        return Interval(float(self.demand_lo[j]), float(self.demand_hi[j]))

    @property
    def costs_fixed(self) -> bool:
        return bool(np.array_equal(self.cost_lo, self.cost_hi))

    @property
    def rhs_fixed(self) -> bool:
        return bool(np.array_equal(self.supply_lo, self.supply_hi)
                    and np.array_equal(self.demand_lo, self.demand_hi))

    @property
    def is_degenerate(self) -> bool:
        """True when every interval is a single point."""
        return self.costs_fixed and self.rhs_fixed

    def upper_scenario(self) -> "Scenario":
        return Scenario(self.cost_hi, self.supply_hi, self.demand_hi)

    def with_mode(self, mode) -> "ItpInstance":
        return ItpInstance(self.cost_lo, self.cost_hi, self.supply_lo, self.supply_hi,
                           self.demand_lo, self.demand_hi, Mode.parse(mode), self.name)

    def __eq__(self, other):
        if not isinstance(other, ItpInstance):
            return NotImplemented
        return (self.mode == other.mode and self.name == other.name
                and all(np.array_equal(getattr(self, f), getattr(other, f)) for f in _BOUND_FIELDS))

    def __hash__(self):
        return hash((self.mode, self.shape, self.cost_hi.tobytes(), self.supply_lo.tobytes()))

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"<ItpInstance{label} {self.m}x{self.n} mode={self.mode.value}>"


_BOUND_FIELDS = ("cost_lo", "cost_hi", "supply_lo", "supply_hi", "demand_lo", "demand_hi")


@dataclass(frozen=True, eq=False)
class Scenario:
    """One realization ``(c, s, d)`` of the interval data."""

    cost: np.ndarray
    supply: np.ndarray
    demand: np.ndarray

    def __post_init__(self):
        for f in ("cost", "supply", "demand"):
            object.__setattr__(self, f, _frozen(getattr(self, f)))
        if self.cost.ndim != 2 or self.supply.shape != (self.cost.shape[0],) \
                or self.demand.shape != (self.cost.shape[1],):
            raise DimensionMismatch(
                f"scenario shapes disagree: cost {self.cost.shape}, supply {self.supply.shape}, "
                f"demand {self.demand.shape}")

    @property
    def shape(self) -> tuple[int, int]:
        return self.cost.shape

    def __eq__(self, other):
        if not isinstance(other, Scenario):
            return NotImplemented
        return (np.array_equal(self.cost, other.cost) and np.array_equal(self.supply, other.supply)
                and np.array_equal(self.demand, other.demand))

    def __repr__(self):
        return f"Scenario(cost={self.cost.tolist()}, supply={self.supply.tolist()}, demand={self.demand.tolist()})"


@dataclass(frozen=True, eq=False)
class DualPair:
    """Dual multipliers: ``u`` for supply rows, ``v`` for demand rows."""

    u: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "u", _frozen(self.u))
        object.__setattr__(self, "v", _frozen(self.v))

    def is_feasible(self, cost, mode=Mode.LE, tol=1e-6) -> bool:
        """Dual feasibility ``u_i + v_j <= c_ij`` (and ``u <= 0`` in ``<=`` mode)."""
        cost = np.asarray(cost, dtype=float)
        ok = bool(np.all(self.u[:, None] + self.v[None, :] <= cost + tol))
        if Mode.parse(mode) is Mode.LE:
            ok = ok and bool(np.all(self.u <= tol))
        return ok

    def objective(self, supply, demand) -> float:
        return float(np.dot(supply, self.u) + np.dot(demand, self.v))


def as_plan(x, shape=None) -> np.ndarray:
    """Coerce a transport plan to an ``(m, n)`` float array."""
    x = np.asarray(x, dtype=float)
    if shape is not None:
        if x.ndim == 1 and x.size == shape[0] * shape[1]:
            x = x.reshape(shape)
        if x.shape != tuple(shape):
            raise DimensionMismatch(f"plan has shape {x.shape}, expected {tuple(shape)}")
    return x


def _pairs(raw, key, shape) -> np.ndarray:
    try:
        arr = np.asarray(raw, dtype=float)
    except (TypeError, ValueError) as exc:
        raise DimensionMismatch(f"{key}: cannot read as a numeric array of [lo, hi] pairs ({exc})") from None
    if arr.shape != shape + (2,):
        raise DimensionMismatch(f"{key}: expected shape {shape + (2,)}, got {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInterval(f"{key}: bounds must be finite")
    return arr


def validate_instance(raw: Mapping[str, Any]) -> ItpInstance:
    """Check raw instance data and return an immutable :class:`ItpInstance`.

    ``raw`` holds ``m``, ``n``, ``cost`` (m x n x 2), ``supply`` (m x 2),
    ``demand`` (n x 2) and optionally ``mode`` and ``name``.
    """
    m, n = int(raw["m"]), int(raw["n"])
    if m < 1 or n < 1:
        raise DimensionMismatch(f"need m >= 1 and n >= 1, got m={m}, n={n}")
    cost = _pairs(raw["cost"], "cost", (m, n))
    supply = _pairs(raw["supply"], "supply", (m,))
    demand = _pairs(raw["demand"], "demand", (n,))
    for key, arr in (("cost", cost), ("supply", supply), ("demand", demand)):
        bad = np.argwhere(arr[..., 0] > arr[..., 1])
        if bad.size:
            idx = tuple(int(k) for k in bad[0])
            raise InvalidInterval(f"{key}{list(idx)}: lower bound {arr[idx][0]} exceeds upper bound {arr[idx][1]}")
        neg = np.argwhere(arr[..., 0] < 0)
        if neg.size:
            idx = tuple(int(k) for k in neg[0])
            raise NegativeBound(f"{key}{list(idx)}: negative lower bound {arr[idx][0]}")
    return ItpInstance(
        cost_lo=_frozen(cost[..., 0]), cost_hi=_frozen(cost[..., 1]),
        supply_lo=_frozen(supply[:, 0]), supply_hi=_frozen(supply[:, 1]),
        demand_lo=_frozen(demand[:, 0]), demand_hi=_frozen(demand[:, 1]),
        mode=Mode.parse(raw.get("mode", "le")), name=raw.get("name"),
    )


def _check_scenario_shape(inst: ItpInstance, sc: Scenario):
    if sc.shape != inst.shape:
        raise DimensionMismatch(f"scenario is {sc.shape}, instance is {inst.shape}")


def contains_scenario(inst: ItpInstance, sc: Scenario) -> bool:
    """Exact closed-interval membership of ``(c, s, d)`` in the instance boxes."""
    _check_scenario_shape(inst, sc)
    return bool(
        np.all((inst.cost_lo <= sc.cost) & (sc.cost <= inst.cost_hi))
        and np.all((inst.supply_lo <= sc.supply) & (sc.supply <= inst.supply_hi))
        and np.all((inst.demand_lo <= sc.demand) & (sc.demand <= inst.demand_hi))
    )


def scenario_feasibility_condition(inst: ItpInstance, sc: Scenario, tol: float = TOL) -> bool:
    """Whether the scenario's feasible set is nonempty (a total-supply test)."""
    _check_scenario_shape(inst, sc)
    total_s, total_d = float(np.sum(sc.supply)), float(np.sum(sc.demand))
    if inst.mode is Mode.LE:
        return total_s >= total_d - tol
    return abs(total_s - total_d) <= tol


def witness_scenario(inst: ItpInstance, x, cost=None) -> Scenario:
    """Scenario under which plan ``x`` is feasible with supply as low as allowed.

    Demand is the shipped column sums; supply is ``max(s_lo, row sum)`` in
    ``<=`` mode and the row sums themselves in balanced mode. Costs default
    to the upper bounds.
    """
    x = as_plan(x, inst.shape)
    rows, cols = x.sum(axis=1), x.sum(axis=0)
    supply = np.maximum(inst.supply_lo, rows) if inst.mode is Mode.LE else rows
    # clip float noise back into the boxes
    supply = np.clip(supply, inst.supply_lo, inst.supply_hi)
    demand = np.clip(cols, inst.demand_lo, inst.demand_hi)
    return Scenario(inst.cost_hi if cost is None else cost, supply, demand)
