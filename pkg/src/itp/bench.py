"""Benchmark harness: value ranges over many instances, CSV and text reports."""
from __future__ import annotations

import csv
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .core import ItpInstance
from .generate import GeneratorParams, generate_instance
from .io import _load_json, instance_from_dict, parse_instance
from .value_range import best_optimal_value, worst_optimal_value
from .worst_finite import ENUM_CAP, solve_worst_finite

#: time limit used when none is given, in seconds
DEFAULT_TIME_LIMIT = 1500.0


@dataclass
class BenchmarkConfig:
    method: str = "auto"
    time_limit: float = DEFAULT_TIME_LIMIT
    node_order: str = "best"
    gap_tol: float = 1e-6
    enum_cap: int = ENUM_CAP
    log_dir: str | None = None
    workers: int | None = None


@dataclass
class BenchmarkRow:
    name: str
    m: int
    n: int
    best: float = math.nan
    worst: float = math.nan
    worst_finite: float = math.nan
    proven_optimal: bool = False
    sum_d_shipped: float = math.nan
    sum_d_upper: float = math.nan
    paradox_flag: bool = False
    best_found_time_s: float = math.nan
    total_time_s: float = math.nan
    upper_bound: float = math.nan
    method: str = ""
    error: str = ""


CSV_COLUMNS = [f.name for f in fields(BenchmarkRow)]


@dataclass
class BenchmarkReport:
    rows: list[BenchmarkRow] = field(default_factory=list)
    config: BenchmarkConfig = field(default_factory=BenchmarkConfig)

    def write_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
            w.writeheader()
            for row in self.rows:
                w.writerow({k: _csv_value(v) for k, v in asdict(row).items()})

    def to_text(self) -> str:
        """Aligned table; ``*`` marks worst-finite values not proven optimal."""
        head = ["name", "m", "n", "best", "worst", "worst_finite", "sum_d", "sum_d_max", "paradox",
                "found_s", "total_s"]
        body = []
        for r in self.rows:
            if r.error:
                body.append([r.name, str(r.m), str(r.n)] + ["-"] * 7 + [f"error: {r.error}"])
                continue
            wf = _fmt(r.worst_finite) + ("" if r.proven_optimal else "*")
            body.append([r.name, str(r.m), str(r.n), _fmt(r.best), _fmt(r.worst), wf, _fmt(r.sum_d_shipped),
                         _fmt(r.sum_d_upper), "yes" if r.paradox_flag else "no",
                         f"{r.best_found_time_s:.2f}", f"{r.total_time_s:.2f}"])
        widths = [max(len(head[k]), *(len(b[k]) for b in body)) if body else len(head[k])
                  for k in range(len(head))]
        left = {0, 8}

        def line(cells):
            out = []
            for k, cell in enumerate(cells[:len(head)]):
                out.append(cell.ljust(widths[k]) if k in left else cell.rjust(widths[k]))
            extra = cells[len(head):]
            return "  ".join(out + extra).rstrip()

        lines = [line(head), line(["-" * w for w in widths])] + [line(b) for b in body]
        if any(not r.proven_optimal and not r.error for r in self.rows):
            lines.append("* not proven optimal within the time limit")
        return "\n".join(lines) + "\n"


def _csv_value(v):
    if isinstance(v, float):
        return repr(v)
    return v


def _fmt(x: float) -> str:
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    if math.isnan(x):
        return "nan"
    if float(x).is_integer():
        return str(int(x))
    return f"{x:.6g}"


def benchmark_row(inst: ItpInstance, config: BenchmarkConfig) -> BenchmarkRow:
    """One report row; failures are recorded in ``error`` instead of raised."""
    m, n = inst.shape
    row = BenchmarkRow(name=inst.name or f"{m}x{n}", m=m, n=n, sum_d_upper=float(inst.demand_hi.sum()))
    t0 = time.perf_counter()
    try:
        row.best = best_optimal_value(inst).value
        row.worst = worst_optimal_value(inst)
        opts = {}
        if config.method != "enum":
            opts = dict(time_limit=config.time_limit, node_order=config.node_order, gap_tol=config.gap_tol)
        res = solve_worst_finite(inst, method=config.method, cap=config.enum_cap, **opts)
        row.worst_finite = res.value
        row.upper_bound = res.upper_bound
        row.proven_optimal = res.proven_optimal
        row.sum_d_shipped = res.shipped
        row.paradox_flag = res.paradox
        row.method = res.method
        row.best_found_time_s = res.stats.best_found_time
        if config.log_dir is not None:
            Path(config.log_dir).mkdir(parents=True, exist_ok=True)
            res.write_log(Path(config.log_dir) / f"{_safe(row.name)}.csv")
    except Exception as exc:  # recorded per row, the run continues
        row.error = f"{type(exc).__name__}: {exc}"
    row.total_time_s = time.perf_counter() - t0
    return row


def _safe(name: str) -> str:
    return "".join(ch if ch.isalnum() or ch in "-_." else "_" for ch in name)


def load_instances(source) -> list[ItpInstance]:
    """Instances from a directory of ``*.json`` files, one file, or a generator spec.

    A generator spec is a JSON object ``{"generate": [{"m": .., "n": ..,
    "seeds": [..], "params": {..}}, ...]}``.
    """
    if isinstance(source, (list, tuple)):
        out = []
        for s in source:
            out.extend(load_instances(s))
        return out
    if isinstance(source, ItpInstance):
        return [source]
    path = Path(source)
    if path.is_dir():
        out = []
        for p in sorted(path.glob("*.json")):
            inst = parse_instance(p)
            out.append(inst if inst.name else _renamed(inst, p.stem))
        return out
    doc = _load_json(path.read_text(), str(path))
    if isinstance(doc, dict) and "generate" in doc:
        return generate_from_spec(doc)
    inst = instance_from_dict(doc, str(path))
    return [inst if inst.name else _renamed(inst, path.stem)]


def _renamed(inst: ItpInstance, name: str) -> ItpInstance:
    return ItpInstance(inst.cost_lo, inst.cost_hi, inst.supply_lo, inst.supply_hi,
                       inst.demand_lo, inst.demand_hi, inst.mode, name)


def generate_from_spec(doc: dict) -> list[ItpInstance]:
    out = []
    for entry in doc["generate"]:
        params = GeneratorParams(**{k: tuple(v) if isinstance(v, list) else v
                                    for k, v in entry.get("params", {}).items()})
        seeds = entry.get("seeds", [entry.get("seed", 0)])
        for seed in seeds:
            out.append(generate_instance(entry["m"], entry["n"], seed, params))
    return out


def worker_count(config: BenchmarkConfig) -> int:
    cap = os.environ.get("ITP_THREADS")
    n = config.workers if config.workers is not None else (os.cpu_count() or 1)
    if cap:
        n = min(n, max(1, int(cap)))
    return max(1, n)


def run_benchmark(source, config: BenchmarkConfig | None = None, **overrides) -> BenchmarkReport:
    """Solve every instance of ``source`` and collect one row each.

    Rows run in separate processes when more than one worker is allowed
    (``ITP_THREADS`` caps the count); each search itself is sequential.
    """
    if config is None:
        config = BenchmarkConfig(**overrides)
    instances = load_instances(source)
    workers = min(worker_count(config), len(instances)) if instances else 1
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            rows = list(pool.map(benchmark_row, instances, [config] * len(instances)))
    else:
        rows = [benchmark_row(inst, config) for inst in instances]
    return BenchmarkReport(rows, config)
