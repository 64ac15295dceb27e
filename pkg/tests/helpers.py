"""Random instance builders shared by the tests."""
from __future__ import annotations

import numpy as np

from itp import ItpInstance


def _pairs(lo, width):
    return np.stack([lo, lo + width], axis=-1)


def random_instance(rng, m, n, mode="le", cost_max=9, width_max=5, rhs_max=6, rhs_width=5,
                    degenerate_p=0.2):
    """Small integer instance; each interval is a point with probability ``degenerate_p``."""
    def width(shape, hi):
        w = rng.integers(0, hi + 1, size=shape)
        return np.where(rng.random(shape) < degenerate_p, 0, w)

    c_lo = rng.integers(0, cost_max + 1, size=(m, n))
    s_lo = rng.integers(0, rhs_max + 1, size=m)
    d_lo = rng.integers(0, rhs_max + 1, size=n)
    return ItpInstance.from_bounds(_pairs(c_lo, width((m, n), width_max)), _pairs(s_lo, width(m, rhs_width)),
                                   _pairs(d_lo, width(n, rhs_width)), mode=mode)


def random_weakly_feasible(rng, m, n, mode="le", **kw):
    from itp import weak_feasible_problem
    while True:
        inst = random_instance(rng, m, n, mode, **kw)
        if weak_feasible_problem(inst):
            return inst


def random_strongly_feasible(rng, m, n, cost_max=50, width_max=20):
    """``<=`` instance with total lower supply covering total upper demand."""
    c_lo = rng.integers(0, cost_max + 1, size=(m, n))
    d_lo = rng.integers(0, 20, size=n)
    d_hi = d_lo + rng.integers(0, 10, size=n)
    s_lo = rng.integers(0, 20, size=m)
    short = int(d_hi.sum() - s_lo.sum())
    if short > 0:
        s_lo = s_lo + np.bincount(rng.integers(0, m, size=short), minlength=m)
    s_hi = s_lo + rng.integers(0, 10, size=m)
    return ItpInstance.from_bounds(_pairs(c_lo, rng.integers(0, width_max + 1, size=(m, n))),
                                   np.stack([s_lo, s_hi], -1), np.stack([d_lo, d_hi], -1))


def random_fixed_rhs(rng, m, n, mode="le", cost_max=50, width_max=20):
    """Point supplies and demands with a feasible total."""
    c_lo = rng.integers(0, cost_max + 1, size=(m, n))
    d = rng.integers(0, 20, size=n)
    if mode == "eq":
        s = np.bincount(rng.integers(0, m, size=int(d.sum())), minlength=m)
    else:
        s = rng.integers(0, 20, size=m)
        short = int(d.sum() - s.sum())
        if short > 0:
            s = s + np.bincount(rng.integers(0, m, size=short), minlength=m)
    return ItpInstance.from_bounds(_pairs(c_lo, rng.integers(0, width_max + 1, size=(m, n))), s, d, mode=mode)


def vertex_scenarios(inst):
    """Every combination of interval endpoints (tiny instances only)."""
    import itertools

    from itp import Scenario
    m, n = inst.shape
    los = np.concatenate([inst.cost_lo.ravel(), inst.supply_lo, inst.demand_lo])
    his = np.concatenate([inst.cost_hi.ravel(), inst.supply_hi, inst.demand_hi])
    free = [k for k in range(len(los)) if los[k] != his[k]]
    for bits in itertools.product((0, 1), repeat=len(free)):
        z = los.copy()
        for k, b in zip(free, bits):
            if b:
                z[k] = his[k]
        yield Scenario(z[:m * n].reshape(m, n), z[m * n:m * n + m], z[m * n + m:])
