"""Command-line front end.

    psdroute gen         synthetic city files from a config
    psdroute precompute  store-pair travel times and the store quad-tree
    psdroute query       skyline(s) for one or more queries
    psdroute experiment  batch runs, CSV table, summary JSON and figures

Exit codes: 0 success, 2 bad input or configuration, 3 infeasible query,
4 cache problem.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

from . import harness
from .apx import solve_apx_ctx
from .bsl import ENGINES, solve_exact
from .catalog import CatalogError, InfeasibleListError, load_catalog, write_catalog
from .datagen import (ConfigError, ExperimentConfig, GenerationError, expand_sweep, generate,
                      read_config_file)
from .metrics import gap_report
from .network import (CacheError, NetworkError, load_network, load_table, save_table,
                      precompute_store_pair_times, table_cache_key, write_network)
from .quadtree import (build_quadtree, load_tree, precompute_partition_times, save_tree,
                       tree_cache_key)
from .routes import QueryContext, UnreachableError, load_queries

log = logging.getLogger("psdroute")

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_CACHE = 0, 2, 3, 4


class CliError(Exception):
    def __init__(self, message, code=EXIT_CONFIG):
        super().__init__(message)
        self.code = code


# ---------------------------------------------------------------------------
# inputs and caches

def _load_inputs(args, need_coords):
    if need_coords and not args.coords:
        raise CliError("--coords is required to build the store quad-tree")
    net = load_network(Path(args.network), Path(args.coords) if args.coords else None)
    catalog = load_catalog(Path(args.catalog))
    catalog.check_network(net)
    return net, catalog


def _cache_paths(args):
    base = Path(args.cache_dir) if args.cache_dir else Path(args.network).parent
    stem = Path(args.network).stem
    return base / f"{stem}.times.json", base / f"{stem}.tree-c{args.capacity}.json"


def _times(args, net, catalog, build_missing):
    """Travel-time table from cache, rebuilding it when missing or corrupt."""
    vertices = [s.vertex for s in catalog.stores.values()]
    if args.no_cache:
        return precompute_store_pair_times(net, vertices), "computed"
    path, _ = _cache_paths(args)
    key = table_cache_key(net, vertices)
    if path.exists():
        try:
            return load_table(path, key), "cache hit"
        except CacheError as exc:
            log.warning("%s; rebuilding", exc)
    elif not build_missing:
        raise CliError(f"no travel-time cache at {path}; run 'psdroute precompute' "
                       "or pass --no-cache", EXIT_CACHE)
    table = precompute_store_pair_times(net, vertices)
    _write_cache(lambda: save_table(table, path, key), path)
    return table, "computed"


def _tree(args, net, catalog, times, build_missing):
    def build():
        tree = build_quadtree(catalog.stores.values(), net.coords, args.capacity)
        precompute_partition_times(tree, catalog, times)
        return tree

    if args.no_cache:
        return build(), "computed"
    _, path = _cache_paths(args)
    key = tree_cache_key(catalog, net.coords, args.capacity)
    if path.exists():
        try:
            return load_tree(path, catalog, net.coords, key), "cache hit"
        except CacheError as exc:
            log.warning("%s; rebuilding", exc)
    elif not build_missing:
        raise CliError(f"no quad-tree cache at {path}; run 'psdroute precompute' "
                       "or pass --no-cache", EXIT_CACHE)
    tree = build()
    _write_cache(lambda: save_tree(tree, path, key), path)
    return tree, "computed"


def _write_cache(write, path):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        write()
    except OSError as exc:
        raise CliError(f"cannot write cache {path}: {exc}", EXIT_CACHE) from exc


# ---------------------------------------------------------------------------
# commands

def cmd_precompute(args):
    net, catalog = _load_inputs(args, need_coords=True)
    t0 = time.perf_counter()
    times, how = _times(args, net, catalog, build_missing=True)
    t1 = time.perf_counter()
    tree, how_tree = _tree(args, net, catalog, times, build_missing=True)
    t2 = time.perf_counter()
    print(f"store-pair travel times: {t1 - t0:.3f} s ({how}, {len(catalog.stores)} stores)")
    print(f"partitioning: {t2 - t1:.3f} s ({how_tree}, capacity {args.capacity}, "
          f"{len(tree.leaves())} leaves)")
    return EXIT_OK


def _solve_one(ctx, tree, solvers, engine):
    doc = {}
    results = {}
    for solver in solvers:
        if solver == "bsl":
            res = solve_exact(ctx, engine)
        else:
            res = solve_apx_ctx(ctx, tree)
        results[solver] = res
        doc[solver] = {"skyline": res.skyline.to_json(), "stats": res.stats.to_json()}
    if len(results) == 2:
        doc["gap"] = gap_report(results["bsl"].skyline, results["apx"].skyline).to_json()
    return doc, {s: r.skyline for s, r in results.items()}


def _svg_path(base, k, total):
    base = Path(base)
    return base if total == 1 else base.with_name(f"{base.stem}-{k}{base.suffix}")


def cmd_query(args):
    solvers = harness.SOLVERS if args.solver == "both" else (args.solver,)
    net, catalog = _load_inputs(args, need_coords="apx" in solvers)
    try:
        queries = load_queries(args.query)
        doc = json.loads(Path(args.query).read_text())
    except (OSError, ValueError) as exc:
        raise CliError(f"cannot read query file {args.query}: {exc}") from exc
    times, _ = _times(args, net, catalog, build_missing=False)
    tree = _tree(args, net, catalog, times, build_missing=False)[0] if "apx" in solvers else None
    out = []
    for k, q in enumerate(queries, start=1):
        ctx = QueryContext(q, catalog, net, times)
        result, skylines = _solve_one(ctx, tree, solvers, args.engine)
        out.append({"query": q.to_json(), **result})
        if args.svg:
            from .plotting import plot_skylines
            plot_skylines(skylines, _svg_path(args.svg, k, len(queries)), title=f"query {k}")
    text = json.dumps(out if isinstance(doc, list) else out[0], indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _settings(args):
    settings = read_config_file(args.config) if args.config else {}
    if args.seed is not None:
        settings["seed"] = args.seed
    if args.capacity is not None:
        settings["leaf_capacity"] = args.capacity
    return settings


def cmd_gen(args):
    settings, _ = harness.split_settings(_settings(args))
    configs = expand_sweep(settings)
    if len(configs) != 1:
        raise CliError("gen takes a single configuration, not a sweep")
    cfg = configs[0]
    ex = generate(cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_network(ex.network, out / "network.txt", out / "coords.txt")
    write_catalog(ex.catalog, out / "catalog.csv")
    (out / "queries.json").write_text(json.dumps([q.to_json() for q in ex.queries], indent=1) + "\n")
    (out / "config.json").write_text(json.dumps(cfg.to_json(), indent=2, sort_keys=True) + "\n")
    print(f"wrote {len(ex.catalog.stores)} stores, {len(ex.queries)} queries to {out}")
    return EXIT_OK


def cmd_experiment(args):
    settings = _settings(args)
    data, options = harness.split_settings(settings)
    changes = {}
    if args.solver is not None:
        changes["solvers"] = harness.SOLVERS if args.solver == "both" else (args.solver,)
    for flag, key in (("engine", "exact_engine"), ("tractability", "tractability_threshold"),
                      ("workers", "workers"), ("repeats", "repeats")):
        if getattr(args, flag) is not None:
            changes[key] = getattr(args, flag)
    options = harness.RunOptions(**{**options.to_json(), **changes})
    network = None
    if args.network:
        network = load_network(Path(args.network), Path(args.coords) if args.coords else None)
    axes, batches = harness.run_sweep(data, network, options)

    out = Path(args.out)
    out.parent.mkdir(parents=True, exist_ok=True)
    harness.write_csv(out, axes, batches)
    harness.write_summary_json(out.with_suffix(".summary.json"), axes, batches)
    _experiment_figures(out, axes, batches)
    for b in batches:
        s = b.summary
        label = " ".join(f"{a}={getattr(b.config, a)}" for a in axes) or "batch"
        print(f"{label}: opt_gap={_show(s['opt_gap'])} cov_gap={_show(s['cov_gap'])} "
              f"bsl_ms={_show(s['bsl_ms'], 1)} apx_ms={_show(s['apx_ms'], 2)} "
              f"compared={s['compared']}/{s['queries']}")
    return EXIT_OK


def _show(v, digits=4):
    return "n/a" if v is None else f"{v:.{digits}f}"


def _experiment_figures(out, axes, batches):
    from .plotting import plot_gap_distribution, plot_sweep

    figures = []
    if len(batches) == 1:
        recs = [r for r in batches[0].records if r.solver == "apx" and r.gap is not None]
        if recs:
            figures.append(plot_gap_distribution(
                [r.gap.optimality_gap for r in recs], [r.gap.coverage_gap for r in recs],
                out.with_name(f"{out.stem}-gaps.svg")))
    else:
        label = ", ".join(axes)
        values = [", ".join(str(getattr(b.config, a)) for a in axes) for b in batches]
        figures.append(plot_sweep(label, values, [b.summary for b in batches],
                                  out.with_name(f"{out.stem}-sweep.svg")))
    return figures


# ---------------------------------------------------------------------------
# argument parsing

def _positive(text):
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def build_parser():
    p = argparse.ArgumentParser(prog="psdroute",
                                description="Time-vs-cost skyline routes for personal shoppers.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def inputs(sp, capacity_default=8):
        sp.add_argument("--network", required=True, help="edge list: 'v1 v2 seconds' per line")
        sp.add_argument("--coords", help="vertex coordinates: 'v x y' per line")
        sp.add_argument("--catalog", required=True, help="CSV store_id,vertex_id,product_id,price")
        sp.add_argument("--capacity", type=_positive, default=capacity_default,
                        help="quad-tree leaf capacity (default %(default)s)")
        sp.add_argument("--cache-dir", help="where cache sidecars live (default: next to --network)")
        sp.add_argument("--no-cache", action="store_true", help="compute tables in memory only")

    sp = sub.add_parser("precompute", help="build and cache travel times and the quad-tree")
    inputs(sp)
    sp.set_defaults(func=cmd_precompute)

    sp = sub.add_parser("query", help="answer queries from a JSON file")
    sp.add_argument("query", help="JSON query object or array of them")
    inputs(sp)
    sp.add_argument("--solver", choices=("bsl", "apx", "both"), default="both")
    sp.add_argument("--engine", choices=ENGINES, default="sets",
                    help="exact search used for bsl (default %(default)s)")
    sp.add_argument("--svg", help="write a skyline plot here")
    sp.add_argument("--out", help="write JSON here instead of stdout")
    sp.set_defaults(func=cmd_query)

    sp = sub.add_parser("experiment", help="batch runs over generated cities")
    sp.add_argument("config", nargs="?", help="JSON or TOML settings; list values are swept")
    sp.add_argument("--out", required=True, help="CSV path; summary JSON and SVGs go beside it")
    sp.add_argument("--solver", choices=("bsl", "apx", "both"))
    sp.add_argument("--engine", choices=ENGINES)
    sp.add_argument("--seed", type=int)
    sp.add_argument("--capacity", type=_positive)
    sp.add_argument("--tractability", type=_positive,
                    help="skip bsl above this many stores after pruning (default 30)")
    sp.add_argument("--workers", type=_positive)
    sp.add_argument("--repeats", type=_positive, help="time each solver as best of N runs")
    sp.add_argument("--network", help="use this road network instead of a generated grid")
    sp.add_argument("--coords")
    sp.set_defaults(func=cmd_experiment)

    sp = sub.add_parser("gen", help="write a synthetic city and queries")
    sp.add_argument("config", nargs="?", help="JSON or TOML settings")
    sp.add_argument("--out", required=True, help="output directory")
    sp.add_argument("--seed", type=int)
    sp.add_argument("--capacity", type=_positive)
    sp.set_defaults(func=cmd_gen)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except CliError as exc:
        print(f"psdroute: {exc}", file=sys.stderr)
        return exc.code
    except CacheError as exc:
        print(f"psdroute: {exc}", file=sys.stderr)
        return EXIT_CACHE
    except (InfeasibleListError, UnreachableError) as exc:
        print(f"psdroute: infeasible query: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except (ConfigError, GenerationError, NetworkError, CatalogError, OSError, ValueError) as exc:
        print(f"psdroute: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
