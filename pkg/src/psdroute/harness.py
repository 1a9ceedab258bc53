"""Batch runs: both solvers over generated queries, gap reports, CSV tables.

A batch shares one travel-time table and one quad-tree across its queries.
Per query the exact solver is skipped when more stores survive pruning than
the tractability threshold allows. Rows are written in query order whatever
the worker count, and only the ``*_ms`` columns depend on the machine.
"""
from __future__ import annotations

import csv
import gc
import json
import logging
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .apx import solve_apx_ctx
from .bsl import ENGINES, solve_exact
from .catalog import InfeasibleListError
from .datagen import ConfigError, Experiment, expand_sweep, generate, sweep_axes
from .metrics import gap_report
from .network import NetworkError, precompute_store_pair_times
from .quadtree import build_quadtree, precompute_partition_times
from .routes import QueryContext, UnreachableError
from .skyline import on_or_above_chain

log = logging.getLogger(__name__)

SOLVERS = ("bsl", "apx")


@dataclass(frozen=True)
class RunOptions:
    solvers: tuple = SOLVERS
    exact_engine: str = "sets"
    tractability_threshold: int = 30
    workers: int = 1
    repeats: int = 1             # timing: best of this many runs per solver

    def __post_init__(self):
        solvers = tuple(self.solvers)
        object.__setattr__(self, "solvers", solvers)
        if not solvers or any(s not in SOLVERS for s in solvers) or len(set(solvers)) != len(solvers):
            raise ConfigError(f"solvers must be a non-empty subset of {SOLVERS}")
        if self.exact_engine not in ENGINES:
            raise ConfigError(f"exact_engine must be one of {ENGINES}")
        for f in ("tractability_threshold", "workers", "repeats"):
            v = getattr(self, f)
            if not isinstance(v, int) or isinstance(v, bool) or v < 1:
                raise ConfigError(f"{f} must be a positive integer, got {v!r}")

    def to_json(self):
        d = asdict(self)
        d["solvers"] = list(self.solvers)
        return d


RUN_KEYS = tuple(f.name for f in fields(RunOptions))


def split_settings(settings: dict):
    """Separate run options from the dataset settings of a config document."""
    data = {k: v for k, v in settings.items() if k not in RUN_KEYS}
    run = {k: v for k, v in settings.items() if k in RUN_KEYS}
    if isinstance(run.get("solvers"), str):
        run["solvers"] = (run["solvers"],)
    try:
        return data, RunOptions(**run)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc


@dataclass
class Workspace:
    """Shared, read-only inputs of a batch."""

    network: object
    catalog: object
    store_times: object
    tree: object = None


def prepare(network, catalog, capacity, store_times=None, tree=None) -> Workspace:
    if store_times is None:
        store_times = precompute_store_pair_times(network, [s.vertex for s in catalog.stores.values()])
    if tree is None and capacity is not None:
        tree = build_quadtree(catalog.stores.values(), network.coords, capacity)
        precompute_partition_times(tree, catalog, store_times)
    return Workspace(network, catalog, store_times, tree)


@dataclass
class RunRecord:
    query_id: int
    solver: str
    status: str = "ok"           # ok, skipped, error: ...
    skyline: object = None
    stats: dict = field(default_factory=dict)
    wall_ms: float = None
    n_stores: int = None
    gap: object = None
    apx_sound: bool = None

    @property
    def ok(self):
        return self.status == "ok"

    def to_json(self):
        doc = {"query_id": self.query_id, "solver": self.solver, "status": self.status,
               "n_stores": self.n_stores, "stats": self.stats}
        if self.skyline is not None:
            doc["skyline"] = self.skyline.to_json()
        if self.gap is not None:
            doc["gap"] = self.gap.to_json()
        return doc


def _timed(fn, repeats):
    # like timeit: collector pauses belong to whoever filled the heap, not to the solver
    best, result = None, None
    for _ in range(repeats):
        enabled = gc.isenabled()
        gc.disable()
        try:
            t0 = time.perf_counter()
            out = fn()
            ms = (time.perf_counter() - t0) * 1000
        finally:
            if enabled:
                gc.enable()
        if best is None or ms < best:
            best = ms
        if result is None:
            result = out
    return result, best


def _work(stats, solver):
    if solver == "apx":
        return stats.leaves_visited
    return getattr(stats, "popped", None) or getattr(stats, "nodes", 0)


def run_query(ws: Workspace, query_id, query, options: RunOptions) -> list:
    """Records for one query, one per requested solver."""
    try:
        ctx = QueryContext(query, ws.catalog, ws.network, ws.store_times)
    except (InfeasibleListError, UnreachableError, NetworkError) as exc:
        return [RunRecord(query_id, s, status=f"error: {exc}") for s in options.solvers]
    results = {}
    records = {}
    for solver in options.solvers:
        rec = records[solver] = RunRecord(query_id, solver, n_stores=ctx.n)
        if solver == "bsl" and ctx.n > options.tractability_threshold:
            rec.status = "skipped"
            continue
        if solver == "bsl":
            def fn():
                return solve_exact(ctx, options.exact_engine)
        else:
            def fn():
                return solve_apx_ctx(ctx, ws.tree)
        try:
            res, ms = _timed(fn, options.repeats)
        except Exception as exc:        # a failing query is recorded, the batch goes on
            log.warning("query %s, %s failed: %s", query_id, solver, exc)
            rec.status = f"error: {exc}"
            continue
        rec.skyline, rec.wall_ms = res.skyline, ms
        rec.stats = dict(res.stats.to_json(), work=_work(res.stats, solver))
        rec.stats.pop("wall_ms", None)
        results[solver] = res
    if "bsl" in results and "apx" in results:
        gap = gap_report(results["bsl"].skyline, results["apx"].skyline)
        chain = results["bsl"].skyline.vectors
        sound = all(on_or_above_chain(chain, cv) for cv in results["apx"].skyline.vectors)
        for rec in records.values():
            rec.gap = gap
        records["apx"].apx_sound = sound
    return [records[s] for s in options.solvers]


# worker-process state for pooled batches
_POOL = {}


def _pool_init(ws, options):
    _POOL["ws"], _POOL["options"] = ws, options


def _pool_run(item):
    qid, query = item
    return run_query(_POOL["ws"], qid, query, _POOL["options"])


def run_queries(ws: Workspace, queries, options: RunOptions) -> list:
    items = list(enumerate(queries, start=1))
    if options.workers == 1 or len(items) < 2:
        per_query = [run_query(ws, qid, q, options) for qid, q in items]
    else:
        with ProcessPoolExecutor(options.workers, initializer=_pool_init,
                                 initargs=(ws, options)) as pool:
            per_query = list(pool.map(_pool_run, items))
    return [rec for recs in per_query for rec in recs]


def _mean(xs):
    return statistics.fmean(xs) if xs else None


def _median(xs):
    return statistics.median(xs) if xs else None


def summarize(records) -> dict:
    compared = [r for r in records if r.solver == "apx" and r.gap is not None]
    opt = [r.gap.optimality_gap for r in compared]
    cov = [r.gap.coverage_gap for r in compared]
    ms = {s: [r.wall_ms for r in records if r.solver == s and r.ok] for s in SOLVERS}
    queries = {r.query_id for r in records}
    return {
        "queries": len(queries),
        "compared": len(compared),
        "bsl_skipped": sum(r.solver == "bsl" and r.status == "skipped" for r in records),
        "errors": len({r.query_id for r in records if r.status.startswith("error")}),
        "apx_unsound": sum(r.apx_sound is False for r in records),
        "opt_gap": _mean(opt), "opt_gap_median": _median(opt),
        "cov_gap": _mean(cov), "cov_gap_median": _median(cov),
        "bsl_ms": _mean(ms["bsl"]), "bsl_ms_median": _median(ms["bsl"]),
        "apx_ms": _mean(ms["apx"]), "apx_ms_median": _median(ms["apx"]),
    }


@dataclass
class Batch:
    config: object
    options: RunOptions
    records: list
    summary: dict
    experiment: Experiment = None


def run_batch(config, options: RunOptions = RunOptions(), network=None) -> Batch:
    ex = generate(config, network)
    capacity = config.leaf_capacity if "apx" in options.solvers else None
    ws = prepare(ex.network, ex.catalog, capacity)
    records = run_queries(ws, ex.queries, options)
    return Batch(config, options, records, summarize(records), ex)


def run_sweep(settings: dict, network=None, options: RunOptions = None):
    """Every configuration of a (possibly swept) settings document.

    Returns the swept field names and one :class:`Batch` per combination.
    """
    data, file_options = split_settings(settings)
    options = options or file_options
    axes = sweep_axes(data)
    return axes, [run_batch(cfg, options, network) for cfg in expand_sweep(data)]


# ---------------------------------------------------------------------------
# CSV output

ROW_COLUMNS = ("query_id", "solver", "status", "n_stores", "routes", "work",
               "a_opt", "a_apx", "a_cover", "a_miss", "opt_gap", "cov_gap", "apx_sound",
               "bsl_ms", "apx_ms",
               "opt_gap_median", "cov_gap_median", "bsl_ms_median", "apx_ms_median")
TIMING_COLUMNS = ("bsl_ms", "apx_ms", "bsl_ms_median", "apx_ms_median")


def _fmt(v, digits=6):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return f"{v:.{digits}f}"
    return v


def record_row(rec: RunRecord) -> dict:
    row = dict.fromkeys(ROW_COLUMNS, "")
    row.update(query_id=rec.query_id, solver=rec.solver, status=rec.status,
               n_stores=_fmt(rec.n_stores), apx_sound=_fmt(rec.apx_sound))
    if rec.ok:
        row["routes"] = len(rec.skyline)
        row["work"] = rec.stats.get("work", "")
        row[f"{rec.solver}_ms"] = _fmt(rec.wall_ms, 3)
    if rec.gap is not None:
        cells = rec.gap.csv_row(rec.query_id)
        for key, value in zip(("a_opt", "a_apx", "a_cover", "a_miss", "opt_gap", "cov_gap"),
                              cells[1:]):
            row[key] = _fmt(value)
    return row


def summary_row(batch: Batch) -> dict:
    s = batch.summary
    row = dict.fromkeys(ROW_COLUMNS, "")
    row.update(query_id="summary", solver="+".join(batch.options.solvers),
               status=f"{s['compared']}/{s['queries']} compared")
    for key in ("opt_gap", "cov_gap", "opt_gap_median", "cov_gap_median"):
        row[key] = _fmt(s[key])
    for key in TIMING_COLUMNS:
        row[key] = _fmt(s[key], 3)
    row["apx_sound"] = "" if not s["compared"] else _fmt(s["apx_unsound"] == 0)
    return row


def write_csv(path, axes, batches):
    """One row per (query, solver) and a summary row per batch."""
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(axes) + list(ROW_COLUMNS), lineterminator="\n")
        w.writeheader()
        for b in batches:
            prefix = {a: getattr(b.config, a) for a in axes}
            for rec in b.records:
                w.writerow({**prefix, **record_row(rec)})
            w.writerow({**prefix, **summary_row(b)})
    return path


def _round(v):
    return round(v, 6) if isinstance(v, float) else v


def write_summary_json(path, axes, batches):
    doc = {"axes": list(axes),
           "batches": [{"config": b.config.to_json(), "options": b.options.to_json(),
                        "summary": {k: _round(v) for k, v in b.summary.items()}}
                       for b in batches]}
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    return path
