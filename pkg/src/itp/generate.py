"""Seeded random instances with integer data."""
from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .core import ItpInstance
from .exceptions import InvalidParams


@dataclass(frozen=True)
class GeneratorParams:
    """Integer ranges (inclusive) for the random data.

    With ``doubling`` the upper supplies and demands are twice the lower
    ones; otherwise their widths are drawn from ``supply_width_range`` and
    ``demand_width_range``.
    """

    cost_lo_range: tuple[int, int] = (5, 40)
    cost_width_range: tuple[int, int] = (0, 20)
    supply_lo_range: tuple[int, int] = (10, 50)
    demand_lo_range: tuple[int, int] = (10, 50)
    doubling: bool = True
    supply_width_range: tuple[int, int] = (0, 20)
    demand_width_range: tuple[int, int] = (0, 20)
    mode: str = "le"

    def validate(self):
        for key in ("cost_lo_range", "cost_width_range", "supply_lo_range", "demand_lo_range",
                    "supply_width_range", "demand_width_range"):
            lo, hi = getattr(self, key)
            if int(lo) != lo or int(hi) != hi:
                raise InvalidParams(f"{key} must hold integers, got {(lo, hi)}")
            if lo < 0 or lo > hi:
                raise InvalidParams(f"{key} must satisfy 0 <= lo <= hi, got {(lo, hi)}")
        if self.mode not in ("le", "eq"):
            raise InvalidParams(f"mode must be 'le' or 'eq', got {self.mode!r}")

    def as_dict(self) -> dict:
        return asdict(self)


def rescale_to_total(values, total: int) -> np.ndarray:
    """Nonnegative integers proportional to ``values`` summing to ``total``.

    Largest-remainder rounding; equal shares when every value is zero.
    """
    values = np.asarray(values, dtype=float)
    if total == 0:
        return np.zeros(len(values), dtype=np.int64)
    weights = values if values.sum() > 0 else np.ones(len(values))
    exact = weights * (total / weights.sum())
    base = np.floor(exact).astype(np.int64)
    short = int(total - base.sum())
    order = np.lexsort((np.arange(len(values)), -(exact - base)))
    base[order[:short]] += 1
    return base


def generate_instance(m: int, n: int, seed: int | None = None, params: GeneratorParams | None = None,
                      **overrides) -> ItpInstance:
    """Random instance whose upper supply and demand totals agree.

    Lower demands are rescaled so that the lower totals agree as well; with
    ``doubling`` this gives equal upper totals, and otherwise the demand
    widths are rescaled to the supply-width total.
    """
    if params is None:
        params = GeneratorParams(**overrides)
    elif overrides:
        params = GeneratorParams(**{**params.as_dict(), **overrides})
    params.validate()
    if int(m) != m or int(n) != n or m < 1 or n < 1:
        raise InvalidParams(f"need integers m, n >= 1, got m={m}, n={n}")
    m, n = int(m), int(n)
    rng = np.random.default_rng(seed)

    def draw(rng_range, size):
        lo, hi = rng_range
        return rng.integers(lo, hi + 1, size=size)

    cost_lo = draw(params.cost_lo_range, (m, n))
    cost_hi = cost_lo + draw(params.cost_width_range, (m, n))
    s_lo = draw(params.supply_lo_range, m)
    d_lo = rescale_to_total(draw(params.demand_lo_range, n), int(s_lo.sum()))
    if params.doubling:
        s_hi, d_hi = 2 * s_lo, 2 * d_lo
    else:
        s_w = draw(params.supply_width_range, m)
        d_w = rescale_to_total(draw(params.demand_width_range, n), int(s_w.sum()))
        s_hi, d_hi = s_lo + s_w, d_lo + d_w
    name = f"gen_{m}x{n}_s{seed}"
    return ItpInstance.from_bounds(np.stack([cost_lo, cost_hi], axis=-1), np.stack([s_lo, s_hi], axis=-1),
                                   np.stack([d_lo, d_hi], axis=-1), mode=params.mode, name=name)
