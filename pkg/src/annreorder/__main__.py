import argparse
import io
import itertools
import json
import logging as log
import os
import sys
import time
import traceback
from typing import NamedTuple, Optional, Sequence

import annreorder.config as config
import annreorder.db as db
import annreorder.fixture
import annreorder.register as register
import annreorder.test_filter as filter
import annreorder.test_register as test_register
import annreorder.utils as utils
from annreorder.adapter import FORMATS as GRAPH_FORMATS
from annreorder.adapter import ingest, load_graph, write_graph
from annreorder.analyzer import analyze, average_lcc
from annreorder.bench.dimension import DimensionParams, dimension_sweep, format_table, table_to_dict
from annreorder.bench.harness import SweepConfig, community_scatter, scatter_point, sweep
from annreorder.bench.records import SPEEDUP_PAIRING, host_info, write_csv, write_json
from annreorder.construct import BUILDERS, BuildParams, build
from annreorder.dataset import (
    DatasetManifest,
    exact_ground_truth,
    generate_synthetic,
    load_dataset,
    load_ground_truth,
    read_fvecs_array,
    save_ground_truth,
    write_fvecs,
)
from annreorder.exceptions import (
    AnnReorderError,
    ConfigError,
    ContractViolation,
    FormatError,
    RecallMismatch,
    TopologyError,
)
from annreorder.graph import Metric, apply_permutation
from annreorder.reorder import ALGORITHMS, DEFAULT_WINDOW, ReorderSpec, compute_permutation, windowed_score
from annreorder.reorder.permfile import read_permutation, write_permutation
from annreorder.search import EntryMode, SearchParams, batch_search, resolve_entries

EXIT_USAGE = 2
EXIT_CONFIG = 3
EXIT_FILE = 4
EXIT_FORMAT = 5
EXIT_CONTRACT = 6
EXIT_RECALL = 7
EXIT_OTHER = 1

RESULTS_DB = "test_results.db"


class MissingArgument(AnnReorderError):
    pass


class TreeFormatter:
    def __init__(self):
        self._previous = []
        self._indent = "  "

    def tree_line(self, path):
        components = [c for c in path.split("/") if c.strip()]
        strs = []
        depth = 0
        for old, new in itertools.zip_longest(
            self._previous, components, fillvalue=None
        ):
            if not new:
                break

            if old != new:
                strs.append(f"{self._indent * depth}{new}".ljust(50, " ") + "\n")
            depth += 1
        self._previous = components
        return "".join(strs)[:-1]


# -----------------------------------------
# 'result set' should come from command line
# or environment.


def find_result_set(args) -> Optional[str]:
    if getattr(args, "result_set", None):
        return str(args.result_set)

    rs = os.environ.get("ANNREORDER_RESULT_SET", None)
    if rs:
        return str(rs)
    return None


def get_result_set(args):
    rs = find_result_set(args)
    if rs:
        return rs

    raise MissingArgument("missing result set: pass --result-set or export ANNREORDER_RESULT_SET")


def need(args, *names):
    for name in names:
        if getattr(args, name, None) is None:
            raise MissingArgument(f"--{name.replace('_', '-')} is required")


def manifest_dir(path) -> str:
    return os.path.dirname(os.path.abspath(path))


def echo_manifest(out_path, command, params: dict):
    path = config.write_manifest(
        manifest_dir(out_path), dict(params, command=command), f"{command}.manifest.toml"
    )
    log.info(f"wrote manifest {path}")


# -----------------------------------------
# 'result-sets' command


def cmd_result_sets(tests: test_register.TestRegister, args, results: db.Results):
    for rs in results.get_result_sets():
        print(f"    {rs}")


# -----------------------------------------
# 'result-set-delete' command


def cmd_result_set_delete(tests: test_register.TestRegister, args, results: db.Results):
    try:
        results.delete_result_set(args.result_set)
    except db.NoSuchResultSet:
        print(f"No such result set '{args.result_set}'", file=sys.stderr)


# -----------------------------------------
# 'result-set-rename' command


def cmd_result_set_rename(tests: test_register.TestRegister, args, results: db.Results):
    try:
        results.rename_result_set(args.old_result_set, args.new_result_set)
    except (db.NoSuchResultSet, db.ResultSetInUse) as e:
        print(str(e), file=sys.stderr)


# -----------------------------------------
# 'list' command


class AvgResult(NamedTuple):
    pass_fail: Optional[str]
    nr_pass: int
    nr_runs: int
    duration: float


def average_results(res_list: Sequence[db.TestResult]) -> Optional[AvgResult]:
    if len(res_list) == 0:
        return None

    if len(res_list) == 1:
        return AvgResult(
            res_list[0].pass_fail,
            1 if res_list[0].pass_fail == "PASS" else 0,
            1,
            res_list[0].duration,
        )

    nr_pass = 0
    all_duration = 0.0
    pass_duration = 0.0
    all_same = True
    pass_fail = res_list[0].pass_fail

    for result in res_list:
        all_duration += result.duration
        if result.pass_fail != pass_fail:
            all_same = False
        if result.pass_fail == "PASS":
            nr_pass += 1
            pass_duration += result.duration

    return AvgResult(
        pass_fail if all_same else None,
        nr_pass,
        len(res_list),
        pass_duration / nr_pass if nr_pass > 0 else all_duration / len(res_list),
    )


def cmd_list(tests: test_register.TestRegister, args, results: db.Results):
    result_set = get_result_set(args)
    paths = sorted(tests.paths(results, result_set, build_filter(args)))
    formatter = TreeFormatter()

    if len(paths) == 0:
        print("No matching tests found.")

    for p in paths:
        print(f"{formatter.tree_line(p)}", end="")
        result = average_results(results.get_test_results(p, result_set, args.run_nr))
        if result is None:
            print("-")
        elif result.nr_runs == 1:
            print(f"{result.pass_fail} [{result.duration:.2f}s]")
        elif result.pass_fail:
            print(f"{result.nr_runs}/{result.nr_runs} {result.pass_fail} [{result.duration:.2f}s]")
        else:
            print(f"{result.nr_pass}/{result.nr_runs} PASS [{result.duration:.2f}s]")


# -----------------------------------------
# 'log' command


def cmd_log(tests: test_register.TestRegister, args, results: db.Results):
    result_set = get_result_set(args)
    paths = sorted(tests.paths(results, result_set, build_filter(args)))

    if len(paths) == 0:
        print("No matching tests found.")

    for p in paths:
        res_list = results.get_test_results(p, result_set, args.run_nr)
        if len(res_list) == 0:
            print(f"*** NO LOG FOR {p}")
            continue
        for result in res_list:
            if len(paths) > 1 or len(res_list) > 1:
                msg = ""
                if len(paths) > 1:
                    msg += f" {p}"
                if len(res_list) > 1:
                    msg += f" RUN {result.run_nr}"
                print(f"*** LOG FOR{msg}, {len(result.log)} ***")
            print(result.log)


# -----------------------------------------
# 'compare' command


def can_compare_times(old: Optional[AvgResult], new: Optional[AvgResult]) -> bool:
    if old is None or new is None:
        return False
    if old.nr_pass != 0 and new.nr_pass != 0:
        return True
    return bool(old.pass_fail) and old.pass_fail == new.pass_fail


def cmd_compare(tests: test_register.TestRegister, args, results: db.Results):
    if not args.old_result_set:
        raise MissingArgument("--old-result-set is required")
    new_set = get_result_set(args)
    paths = sorted(tests.paths(results, new_set, build_filter(args)))
    formatter = TreeFormatter()

    if len(paths) == 0:
        print("No matching tests found.")

    for p in paths:
        old_result = average_results(results.get_test_results(p, args.old_result_set))
        new_result = average_results(results.get_test_results(p, new_set))
        print(f"{formatter.tree_line(p)}", end="")
        if old_result:
            if old_result.pass_fail:
                print(f"{old_result.pass_fail} => ", end="")
            else:
                print(f"{old_result.nr_pass / old_result.nr_runs * 100:.0f}% PASS => ", end="")
        else:
            print("- => ", end="")
        if new_result:
            if new_result.pass_fail:
                print(f"{new_result.pass_fail} ", end="")
            else:
                print(f"{new_result.nr_pass / new_result.nr_runs * 100:.0f}% PASS ", end="")
        else:
            print("- ", end="")
        if old_result and new_result and can_compare_times(old_result, new_result):
            diff = new_result.duration - old_result.duration
            print(f"[{diff * 100 / old_result.duration:+.0f}% {diff:+.2f}s]")
        else:
            print("")


# -----------------------------------------
# 'list-runs' command


def cmd_list_runs(tests: test_register.TestRegister, args, results: db.Results):
    result_set = get_result_set(args)
    paths = sorted(tests.paths(results, result_set, build_filter(args)))
    formatter = TreeFormatter()

    if len(paths) == 0:
        print("No matching tests found.")

    for p in paths:
        found = False
        res_list = results.get_test_results(p, result_set)
        print(f"{formatter.tree_line(p)}", end="")
        for result in res_list:
            if args.run_state and result.pass_fail.lower() != args.run_state.lower():
                continue
            if found:
                print(f"{''.ljust(50, ' ')}", end="")
            else:
                found = True
            print(f"{result.run_nr}: {result.pass_fail} [{result.duration:.2f}s]")
        if not found:
            print("-")


# -----------------------------------------
# 'run' command


# Used to implement the --log switch
class StringIOWithStderr(io.StringIO):
    def write(self, s):
        super().write(s)
        return sys.stderr.write(s)


def cmd_run(tests: test_register.TestRegister, args, results: db.Results):
    result_set = get_result_set(args)

    if args.nr_runs < 1:
        print("--nr-runs must be at least 1")
        return

    paths = sorted(tests.paths(results, result_set, build_filter(args)))
    if not args.slow:
        paths = [p for p in paths if not tests.is_slow(p)]

    if len(paths) == 0:
        print("No matching tests found.")

    # the per-test log goes to the results db rather than the terminal
    if args.log:
        buffer = StringIOWithStderr()
    else:
        buffer = io.StringIO()

    root = log.getLogger()
    for h in list(root.handlers):
        root.removeHandler(h)
    log.basicConfig(
        level=log.INFO,
        format="%(asctime)s %(levelname)s %(message)s",
        stream=buffer,
    )

    for run_nr in range(args.nr_runs):
        formatter = TreeFormatter()
        if args.nr_runs > 1:
            print(f"*** Run: {run_nr} ***")
        for p in paths:
            buffer.seek(0)
            buffer.truncate()

            print(f"{formatter.tree_line(p)}", end="", flush=True)
            log.info(f"Running '{p}'")

            passed = True
            start = time.time()
            try:
                fix = annreorder.fixture.Fixture()
                tests.run(p, fix)

            except Exception as e:
                passed = False
                if bool(os.getenv("ANNREORDER_VERBOSE_TB", False)):
                    log.error(f"Exception caught: \n{traceback.format_exc()}\n")
                else:
                    log.error(f"Exception caught: {e!r}")
                while e.__cause__ or e.__context__:
                    if e.__cause__:
                        e = e.__cause__
                    else:
                        e = e.__context__
                    log.error(f"Triggered while handling Exception: {e!r}")
            elapsed = time.time() - start

            if passed:
                print(f"PASS [{elapsed:.2f}s]")
                pass_str = "PASS"
            else:
                print("FAIL")
                pass_str = "FAIL"

            result = db.TestResult(p, pass_str, buffer.getvalue(), result_set, elapsed, run_nr)
            results.insert_test_result(result, with_delete=(run_nr == 0))


# -----------------------------------------
# Shared loaders for the pipeline commands


def load_vectors(args):
    need(args, "dataset")
    return load_dataset(
        DatasetManifest(args.dataset, args.dataset_format, Metric.parse(args.metric))
    )


def load_queries(args):
    need(args, "queries")
    return read_fvecs_array(args.queries)


def search_params(args) -> SearchParams:
    return SearchParams(
        L=args.L,
        k=args.k,
        entry_mode=EntryMode(args.entry_mode),
        entry_count=args.entry_count,
        entry_ids=tuple(args.entry_ids or ()),
        seed=args.entry_seed,
        max_iterations=args.max_iterations,
    )


def build_params(args) -> BuildParams:
    return BuildParams(
        k_max=args.k_max,
        sample_rate=args.sample_rate,
        max_iters=args.max_iters,
        convergence_delta=args.convergence_delta,
        alpha=args.alpha,
        build_beam_width=args.build_beam_width,
        seed=args.seed,
        workers=args.workers,
    )


# -----------------------------------------
# 'synth' command


def cmd_synth(tests: test_register.TestRegister, args, results):
    need(args, "base_out", "queries_out")
    metric = Metric.parse(args.metric)
    ds, queries = generate_synthetic(
        args.n,
        args.d,
        args.data_seed,
        args.query_seed,
        args.n_queries,
        metric,
        args.distribution,
        args.normalize,
    )
    write_fvecs(args.base_out, ds)
    write_fvecs(args.queries_out, queries)
    echo_manifest(
        args.base_out,
        "synth",
        {
            "n": args.n,
            "d": args.d,
            "n_queries": args.n_queries,
            "data_seed": args.data_seed,
            "query_seed": args.query_seed,
            "distribution": args.distribution,
            "normalize": args.normalize,
            "metric": metric.value,
            "base_out": args.base_out,
            "queries_out": args.queries_out,
        },
    )


# -----------------------------------------
# 'gt' command


def cmd_gt(tests: test_register.TestRegister, args, results):
    need(args, "out")
    ds = load_vectors(args)
    gt = exact_ground_truth(ds, load_queries(args), args.k, args.workers)
    save_ground_truth(gt, args.out, args.dist_out)
    echo_manifest(
        args.out,
        "gt",
        {
            "dataset": args.dataset,
            "dataset_format": args.dataset_format,
            "metric": args.metric,
            "queries": args.queries,
            "k": args.k,
            "out": args.out,
            "dist_out": args.dist_out,
        },
    )


# -----------------------------------------
# 'build' command


def cmd_build(tests: test_register.TestRegister, args, results):
    need(args, "index")
    ds = load_vectors(args)
    params = build_params(args)
    with utils.timed(f"{args.builder} build of {ds.n} vectors"):
        index = build(args.builder, ds, params)
    write_graph(index.graph, args.index, args.index_format)

    manifest = {
        "dataset": args.dataset,
        "dataset_format": args.dataset_format,
        "metric": args.metric,
        "builder": args.builder,
        "build": params.to_dict(),
        "index": args.index,
        "index_format": args.index_format,
    }
    if index.entry_ids:
        manifest["entry"] = {"mode": "fixed", "ids": list(index.entry_ids)}
    echo_manifest(args.index, "build", manifest)


# -----------------------------------------
# 'adapt' command


def cmd_adapt(tests: test_register.TestRegister, args, results):
    need(args, "input", "output")
    res = ingest(args.input, args.input_format, args.k_cap, args.truncate, args.n)
    write_graph(res.graph, args.output, args.output_format)
    echo_manifest(
        args.output,
        "adapt",
        {
            "input": args.input,
            "input_format": args.input_format,
            "k_cap": args.k_cap,
            "truncate": args.truncate,
            "n": args.n,
            "output": args.output,
            "output_format": args.output_format,
            "k_max": res.graph.k_max,
            "dropped_edges": res.dropped_edges,
            "truncated_rows": res.truncated_rows,
        },
    )


# -----------------------------------------
# 'reorder' command


def cmd_reorder(tests: test_register.TestRegister, args, results):
    need(args, "index", "perm_out")
    g = load_graph(args.index, args.index_format)
    spec = ReorderSpec(args.algo, args.window, args.hub_threshold, args.seed)
    perm = compute_permutation(spec, g)
    write_permutation(perm, args.perm_out)

    ds = load_vectors(args) if args.dataset else None
    pg, pds = apply_permutation(g, ds, perm)
    if args.graph_out:
        write_graph(pg, args.graph_out, args.graph_format)
    if args.dataset_out:
        if pds is None:
            raise MissingArgument("--dataset-out needs --dataset")
        write_fvecs(args.dataset_out, pds)

    manifest = {
        "index": args.index,
        "index_format": args.index_format,
        "algo": args.algo,
        "window": args.window,
        "hub_threshold": args.hub_threshold,
        "seed": args.seed,
        "resolved": spec.resolved(g),
        "perm_out": args.perm_out,
        "graph_out": args.graph_out,
        "graph_format": args.graph_format,
        "dataset": args.dataset,
        "dataset_out": args.dataset_out,
    }
    if args.algo == "gorder":
        manifest["gorder_score"] = {
            "before": windowed_score(g, list(range(g.n)), args.window),
            "after": windowed_score(g, perm.order(), args.window),
        }
    echo_manifest(args.perm_out, "reorder", manifest)


# -----------------------------------------
# 'search' command


def cmd_search(tests: test_register.TestRegister, args, results):
    need(args, "index", "out")
    g = load_graph(args.index, args.index_format)
    ds = load_vectors(args)
    params = search_params(args)
    found = batch_search(g, ds, load_queries(args), params, args.workers)

    doc = {
        "L": params.L,
        "k": params.k,
        "entries": resolve_entries(params, g.n).tolist(),
        "results": [
            {
                "query": i,
                "ids": r.ids.tolist(),
                "distances": r.distances.tolist(),
                "hops": r.stats.hops,
                "distance_evals": r.stats.distance_evals,
            }
            for i, r in enumerate(found)
        ],
    }
    with open(args.out, "w") as f:
        json.dump(doc, f, indent=2)

    echo_manifest(
        args.out,
        "search",
        {
            "index": args.index,
            "index_format": args.index_format,
            "dataset": args.dataset,
            "dataset_format": args.dataset_format,
            "metric": args.metric,
            "queries": args.queries,
            "L": params.L,
            "k": params.k,
            "entry": {
                "mode": params.entry_mode.value,
                "count": params.entry_count,
                "seed": params.seed,
                "ids": list(params.entry_ids),
            },
            "max_iterations": params.iteration_limit,
            "out": args.out,
        },
    )


# -----------------------------------------
# 'analyze' command


def cmd_analyze(tests: test_register.TestRegister, args, results):
    need(args, "index")
    g = load_graph(args.index, args.index_format)
    labeling = read_permutation(args.perm) if args.perm else None
    report = analyze(g, labeling)
    if args.out:
        with open(args.out, "w") as f:
            f.write(report.to_json() + "\n")
    else:
        print(report.to_json())
    # without --out the manifest goes next to the index
    echo_manifest(
        args.out or args.index,
        "analyze",
        {"index": args.index, "index_format": args.index_format, "perm": args.perm, "out": args.out},
    )


# -----------------------------------------
# 'bench' command


def bench_config(args) -> config.RunConfig:
    cfg = config.read_config(args.config) if args.config else config.RunConfig()

    overrides = {}
    if args.experiment is not None:
        overrides["experiment"] = args.experiment
    if args.L_grid is not None:
        overrides["L_grid"] = tuple(args.L_grid)
    for name in ("k", "trials", "workers", "output_dir", "result_set"):
        value = getattr(args, name)
        if value is not None:
            overrides[name] = value
    if args.no_strict_recall:
        overrides["strict_recall"] = False

    cfg = cfg._replace(**overrides)
    cfg = cfg._replace(build=cfg.build._replace(workers=cfg.workers))
    config.validate(cfg)
    return cfg


def bench_inputs(cfg: config.RunConfig):
    metric = Metric.parse(cfg.dataset.metric)
    if cfg.dataset.path is None:
        s = cfg.synthetic
        ds, queries = generate_synthetic(
            s.n, s.d, cfg.seeds.data, cfg.seeds.query, s.n_queries, metric, s.distribution, s.normalize
        )
        label = cfg.dataset_label or f"synthetic-{s.distribution}-d{s.d}"
    else:
        ds = load_dataset(DatasetManifest(cfg.dataset.path, cfg.dataset.format, metric, cfg.dataset.n, cfg.dataset.d))
        queries = read_fvecs_array(cfg.queries)
        label = cfg.dataset_label or os.path.splitext(os.path.basename(cfg.dataset.path))[0]

    k = cfg.k
    if cfg.ground_truth is not None:
        gt = load_ground_truth(cfg.ground_truth)
    else:
        gt = exact_ground_truth(ds, queries, k, cfg.workers)
    return ds, queries, gt, label


def bench_entries(cfg: config.RunConfig, entry_ids) -> SearchParams:
    e = cfg.entry
    if e.mode == EntryMode.FIXED.value:
        return SearchParams(L=1, k=1, entry_mode=EntryMode.FIXED, entry_ids=tuple(e.ids))
    if entry_ids:
        return SearchParams(L=1, k=1, entry_mode=EntryMode.FIXED, entry_ids=tuple(entry_ids))
    return SearchParams(L=1, k=1, entry_count=e.count, seed=e.seed)


def run_sweep(cfg: config.RunConfig):
    ds, queries, gt, dataset_label = bench_inputs(cfg)
    if cfg.index is not None:
        g = load_graph(cfg.index, cfg.index_format)
        entry_ids = None
        index_label = cfg.index_label or os.path.splitext(os.path.basename(cfg.index))[0]
    else:
        with utils.timed(f"{cfg.builder} build of {ds.n} vectors"):
            built = build(cfg.builder, ds, cfg.build)
        g, entry_ids = built.graph, built.entry_ids
        index_label = cfg.index_label or cfg.builder

    search = bench_entries(cfg, entry_ids)
    specs = cfg.reorder_specs()
    sweep_cfg = SweepConfig(
        cfg.L_grid, cfg.k, cfg.trials, cfg.workers, cfg.strict_recall, index_label, dataset_label
    )
    records = sweep(g, ds, queries, gt, search, specs, sweep_cfg)

    lcc = average_lcc(g)
    point = scatter_point(records, lcc) if len(specs) else None
    manifest = {
        "config": config.to_dict(cfg),
        "reorder_resolved": [s.resolved(g) for s in specs],
        "entries": resolve_entries(search, g.n).tolist(),
        "average_lcc": lcc,
        "mean_speedup": point.mean_speedup if point else None,
        "speedup_pairing": SPEEDUP_PAIRING,
        "host": host_info(),
    }
    return records, manifest


def cmd_bench(tests: test_register.TestRegister, args, results: db.Results):
    cfg = bench_config(args)
    os.makedirs(cfg.output_dir, exist_ok=True)
    config.write_manifest(cfg.output_dir, config.to_dict(cfg))

    if cfg.experiment == "dimension":
        dim = cfg.dimension_sweep
        params = DimensionParams(
            dim.n,
            dim.n_queries,
            dim.distribution,
            cfg.build,
            SweepConfig(cfg.L_grid, cfg.k, cfg.trials, cfg.workers, cfg.strict_recall),
            cfg.entry.seed,
        )
        rows = dimension_sweep(dim.d_grid, (cfg.seeds.data, cfg.seeds.query), dim.builders, cfg.reorder_specs(), params)
        print(format_table(rows))
        with open(os.path.join(cfg.output_dir, "dimension.json"), "w") as f:
            json.dump({"manifest": config.to_dict(cfg), "rows": table_to_dict(rows)}, f, indent=2)
        return

    records, manifest = run_sweep(cfg)
    write_csv(os.path.join(cfg.output_dir, "records.csv"), records)
    write_json(os.path.join(cfg.output_dir, "records.json"), records, manifest)

    result_set = cfg.result_set or find_result_set(args)
    if result_set:
        results.insert_bench_records(result_set, records, manifest)
        log.info(f"stored {len(records)} records in result set '{result_set}'")

    for r in records:
        print(f"{r.index}/{r.dataset}/{r.reorder}/L={r.L}: recall {r.recall:.4f} qps {r.qps:.1f} speed-up {r.speedup:.3f}")


# -----------------------------------------
# 'compare-bench' command


def record_key(r) -> str:
    return f"{r.index}/{r.dataset}/{r.reorder}/L={r.L}"


def cmd_compare_bench(tests: test_register.TestRegister, args, results: db.Results):
    if not args.old_result_set:
        raise MissingArgument("--old-result-set is required")
    new_set = get_result_set(args)
    filt = build_filter(args)

    old = {record_key(r): r for r in results.get_bench_records(args.old_result_set)}
    new = [r for r in results.get_bench_records(new_set) if filt.matches(record_key(r), [])]

    if len(new) == 0:
        print("No matching records found.")

    for r in new:
        key = record_key(r)
        print(f"{key.ljust(50, ' ')}", end="")
        o = old.get(key)
        if o is None:
            print(f"- => {r.qps:.1f}")
        else:
            diff = r.qps - o.qps
            print(f"{o.qps:.1f} => {r.qps:.1f} [{diff * 100 / o.qps:+.1f}%]")


# -----------------------------------------
# 'scatter' command


def cmd_scatter(tests: test_register.TestRegister, args, results: db.Results):
    points = []
    for rs in args.result_sets:
        manifest = results.get_bench_manifest(rs) or {}
        if manifest.get("average_lcc") is None:
            raise ContractViolation(f"result set '{rs}' holds no bench run")
        points.append(scatter_point(results.get_bench_records(rs), manifest["average_lcc"]))

    s = community_scatter(points)
    print(
        json.dumps(
            {"points": [p._asdict() for p in s.points], "spearman": s.spearman}, indent=2
        )
    )


# -----------------------------------------
# Command line parser


class ArgumentParser(argparse.ArgumentParser):
    """Usage errors are reported as one JSON line, like every other failure."""

    def error(self, message):
        report_error("usage", message)
        sys.exit(EXIT_USAGE)


def arg_filter(p):
    p.add_argument(
        "--rx",
        metavar="PATTERN",
        type=str,
        help="select tests that match the given regular expression",
        action="append",
    )
    p.add_argument(
        "substring",
        type=str,
        nargs="*",
        help="substring to filter tests",
    )
    p.add_argument(
        "--state",
        metavar="[^]TEST_STATE",
        type=str,
        help="select tests whose result matches the given state. Use '^' to invert the selection",
        action="append",
    )
    p.add_argument(
        "--and-filters",
        help="Select tests that match _all_ filters",
        action="store_true",
    )


def build_filter(args):
    return filter.build_filter(
        getattr(args, "rx", None),
        getattr(args, "substring", None),
        getattr(args, "state", None),
        getattr(args, "and_filters", False),
    )


def arg_result_set(p):
    p.add_argument(
        "--result-set",
        metavar="RESULT_SET",
        type=str,
        help="Specify a nickname for the machine or code you are measuring",
    )


def arg_run_nr(p):
    p.add_argument(
        "--run-nr",
        metavar="RUN_NR",
        type=int,
        help="Specify which run of a result set to use",
    )


def arg_common(p):
    p.add_argument("--config", metavar="FILE", help="TOML file whose values become defaults")
    p.add_argument("--workers", type=int, default=1, help="worker threads")


def arg_dataset(p):
    p.add_argument("--dataset", metavar="PATH", help="base vectors")
    p.add_argument("--dataset-format", default="auto", choices=("auto", "fvecs", "raw-bin"))
    p.add_argument("--metric", default="l2", choices=[m.value for m in Metric])


def arg_queries(p):
    p.add_argument("--queries", metavar="PATH", help="query vectors (fvecs)")


def arg_index(p, help="graph file"):
    p.add_argument("--index", metavar="PATH", help=help)
    p.add_argument("--index-format", default="auto", choices=("auto",) + GRAPH_FORMATS)


def int_list(s):
    try:
        return [int(v) for v in s.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"'{s}' is not a comma separated list of integers")


def command_line_parser():
    parser = ArgumentParser(
        prog="annreorder",
        description="build, reorder, search and benchmark graph ANN indices",
        fromfile_prefix_chars="@",
        epilog="Arguments starting with @ will be treated as files containing one argument per line, and will be replaced with the arguments they contain.",
    )
    subparsers = parser.add_subparsers(
        title="command arguments",
        help="'{cmd} -h' for command specific options",
        metavar="command",
    )

    result_sets_p = subparsers.add_parser("result-sets", help="list result sets")
    result_sets_p.set_defaults(func=cmd_result_sets)

    result_set_delete_p = subparsers.add_parser("result-set-delete", help="delete result set")
    result_set_delete_p.set_defaults(func=cmd_result_set_delete)
    result_set_delete_p.add_argument("result_set", help="The result set to delete")

    result_set_rename_p = subparsers.add_parser("result-set-rename", help="rename result set")
    result_set_rename_p.set_defaults(func=cmd_result_set_rename)
    result_set_rename_p.add_argument("old_result_set", help="The old result set name")
    result_set_rename_p.add_argument("new_result_set", help="The new result set name")

    list_p = subparsers.add_parser("list", help="list test results")
    list_p.set_defaults(func=cmd_list)
    arg_filter(list_p)
    arg_result_set(list_p)
    arg_run_nr(list_p)

    log_p = subparsers.add_parser("log", help="list test logs")
    log_p.set_defaults(func=cmd_log)
    arg_filter(log_p)
    arg_result_set(log_p)
    arg_run_nr(log_p)

    run_p = subparsers.add_parser("run", help="run tests")
    run_p.set_defaults(func=cmd_run)
    arg_filter(run_p)
    arg_result_set(run_p)
    run_p.add_argument(
        "--nr-runs",
        metavar="NR_RUNS",
        type=int,
        default=1,
        help="The number of times to run the tests",
    )
    run_p.add_argument("--log", help="Print the log to stderr", action="store_true")
    run_p.add_argument("--slow", help="Include the slow acceptance suites", action="store_true")

    compare_p = subparsers.add_parser("compare", help="compare two result sets")
    compare_p.set_defaults(func=cmd_compare)
    arg_filter(compare_p)
    compare_p.add_argument(
        "--old-result-set",
        metavar="RESULT_SET",
        type=str,
        help="Old result set to compare against",
    )
    arg_result_set(compare_p)

    list_runs_p = subparsers.add_parser("list-runs", help="list each test run individually")
    list_runs_p.set_defaults(func=cmd_list_runs)
    arg_filter(list_runs_p)
    arg_result_set(list_runs_p)
    list_runs_p.add_argument(
        "--run-state",
        metavar="STATE",
        type=str,
        help="only show runs whose result matches the given state",
    )

    # pipeline commands
    synth_p = subparsers.add_parser("synth", help="generate synthetic base and query vectors")
    synth_p.set_defaults(func=cmd_synth)
    arg_common(synth_p)
    synth_p.add_argument("--n", type=int, default=10000)
    synth_p.add_argument("--d", type=int, default=16)
    synth_p.add_argument("--n-queries", type=int, default=1000)
    synth_p.add_argument("--data-seed", type=int, default=1)
    synth_p.add_argument("--query-seed", type=int, default=2)
    synth_p.add_argument("--distribution", default="uniform", choices=("uniform", "gaussian"))
    synth_p.add_argument("--normalize", action="store_true")
    synth_p.add_argument("--metric", default="l2", choices=[m.value for m in Metric])
    synth_p.add_argument("--base-out", metavar="PATH")
    synth_p.add_argument("--queries-out", metavar="PATH")

    gt_p = subparsers.add_parser("gt", help="exact ground truth as ivecs")
    gt_p.set_defaults(func=cmd_gt)
    arg_common(gt_p)
    arg_dataset(gt_p)
    arg_queries(gt_p)
    gt_p.add_argument("--k", type=int, default=100)
    gt_p.add_argument("--out", metavar="PATH", help="ivecs of neighbor IDs")
    gt_p.add_argument("--dist-out", metavar="PATH", help="fvecs of neighbor distances")

    build_p = subparsers.add_parser("build", help="build a graph index")
    build_p.set_defaults(func=cmd_build)
    arg_common(build_p)
    arg_dataset(build_p)
    arg_index(build_p, help="where to write the graph")
    build_p.set_defaults(index_format="fixed-bin")
    build_p.add_argument("--builder", default="nn-descent", choices=BUILDERS)
    defaults = BuildParams()
    build_p.add_argument("--k-max", type=int, default=defaults.k_max)
    build_p.add_argument("--sample-rate", type=float, default=defaults.sample_rate)
    build_p.add_argument("--max-iters", type=int, default=defaults.max_iters)
    build_p.add_argument("--convergence-delta", type=float, default=defaults.convergence_delta)
    build_p.add_argument("--alpha", type=float, default=defaults.alpha)
    build_p.add_argument("--build-beam-width", type=int, default=defaults.build_beam_width)
    build_p.add_argument("--seed", type=int, default=defaults.seed)

    adapt_p = subparsers.add_parser("adapt", help="convert a graph file to a canonical format")
    adapt_p.set_defaults(func=cmd_adapt)
    arg_common(adapt_p)
    adapt_p.add_argument("--input", metavar="PATH")
    adapt_p.add_argument("--input-format", default="auto")
    adapt_p.add_argument("--output", metavar="PATH")
    adapt_p.add_argument("--output-format", default="fixed-bin", choices=GRAPH_FORMATS)
    adapt_p.add_argument("--k-cap", type=int, help="slot count of the fixed-degree layout")
    adapt_p.add_argument("--truncate", action="store_true", help="drop edges beyond --k-cap")
    adapt_p.add_argument("--n", type=int, help="vertex count for text inputs")

    reorder_p = subparsers.add_parser("reorder", help="compute a vertex reordering")
    reorder_p.set_defaults(func=cmd_reorder)
    arg_common(reorder_p)
    arg_index(reorder_p)
    arg_dataset(reorder_p)
    reorder_p.add_argument("--algo", default="gorder", choices=ALGORITHMS)
    reorder_p.add_argument("--window", type=int, default=DEFAULT_WINDOW)
    reorder_p.add_argument("--hub-threshold", type=float)
    reorder_p.add_argument("--seed", type=int, default=0)
    reorder_p.add_argument("--perm-out", metavar="PATH")
    reorder_p.add_argument("--graph-out", metavar="PATH")
    reorder_p.add_argument("--graph-format", default="fixed-bin", choices=GRAPH_FORMATS)
    reorder_p.add_argument("--dataset-out", metavar="PATH")

    search_p = subparsers.add_parser("search", help="beam search a query file")
    search_p.set_defaults(func=cmd_search)
    arg_common(search_p)
    arg_index(search_p)
    arg_dataset(search_p)
    arg_queries(search_p)
    search_p.add_argument("--L", type=int, default=100)
    search_p.add_argument("--k", type=int, default=10)
    search_p.add_argument("--entry-mode", default="random", choices=[m.value for m in EntryMode])
    search_p.add_argument("--entry-count", type=int, default=1)
    search_p.add_argument("--entry-seed", type=int, default=0)
    search_p.add_argument("--entry-ids", type=int_list)
    search_p.add_argument("--max-iterations", type=int)
    search_p.add_argument("--out", metavar="PATH", help="JSON results")

    analyze_p = subparsers.add_parser("analyze", help="structural report of a graph")
    analyze_p.set_defaults(func=cmd_analyze)
    arg_common(analyze_p)
    arg_index(analyze_p)
    analyze_p.add_argument("--perm", metavar="PATH", help="PERM file giving the labeling to measure")
    analyze_p.add_argument("--out", metavar="PATH")

    bench_p = subparsers.add_parser("bench", help="recall/QPS sweep over reorderings")
    bench_p.set_defaults(func=cmd_bench)
    bench_p.add_argument("--config", metavar="FILE", help="TOML run configuration")
    bench_p.add_argument("--workers", type=int)
    bench_p.add_argument("--experiment", choices=("sweep", "dimension"))
    bench_p.add_argument("--L-grid", type=int_list)
    bench_p.add_argument("--k", type=int)
    bench_p.add_argument("--trials", type=int)
    bench_p.add_argument("--output-dir", metavar="DIR")
    bench_p.add_argument("--no-strict-recall", action="store_true")
    arg_result_set(bench_p)

    compare_bench_p = subparsers.add_parser("compare-bench", help="compare QPS between two result sets")
    compare_bench_p.set_defaults(func=cmd_compare_bench)
    arg_filter(compare_bench_p)
    compare_bench_p.add_argument("--old-result-set", metavar="RESULT_SET", type=str)
    arg_result_set(compare_bench_p)

    scatter_p = subparsers.add_parser("scatter", help="average LCC against mean speed-up")
    scatter_p.set_defaults(func=cmd_scatter)
    scatter_p.add_argument("result_sets", nargs="+")

    return parser, subparsers


def apply_config_defaults(subparsers, argv):
    """
    --config FILE supplies defaults for the pipeline commands; anything
    given explicitly on the command line still wins.  bench reads its
    config itself.
    """
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return

    defaults = config.flag_defaults(config.read_toml(known.config))
    defaults.pop("command", None)
    for name, p in subparsers.choices.items():
        if name != "bench":
            p.set_defaults(**defaults)


# -----------------------------------------
# Main


ERROR_KINDS = [
    (MissingArgument, "usage", EXIT_USAGE),
    (ConfigError, "config", EXIT_CONFIG),
    (RecallMismatch, "recall-mismatch", EXIT_RECALL),
    (TopologyError, "topology", EXIT_FORMAT),
    (FormatError, "format", EXIT_FORMAT),
    (ContractViolation, "contract", EXIT_CONTRACT),
    (OSError, "file", EXIT_FILE),
]


def report_error(kind, message):
    print(json.dumps({"error": kind, "message": str(message)}), file=sys.stderr)


def exit_code(e: BaseException):
    for cls, kind, code in ERROR_KINDS:
        if isinstance(e, cls):
            return kind, code
    return "internal", EXIT_OTHER


def main(argv=None):
    if argv is None:
        argv = sys.argv[1:]

    parser, subparsers = command_line_parser()
    try:
        apply_config_defaults(subparsers, argv)
    except (ConfigError, OSError) as e:
        kind, code = exit_code(e)
        report_error(kind, e)
        return code

    args = parser.parse_args(argv)
    if not hasattr(args, "func"):
        parser.print_help()
        return 0

    if args.func not in (cmd_run,):
        log.basicConfig(level=log.INFO, format="%(asctime)s %(levelname)s %(message)s")

    tests = test_register.TestRegister()
    register.register(tests)

    try:
        with db.Results(RESULTS_DB) as results:
            args.func(tests, args, results)
    except BrokenPipeError:
        os._exit(0)
    except Exception as e:
        kind, code = exit_code(e)
        if kind == "internal":
            log.error(traceback.format_exc())
        report_error(kind, e)
        return code
    return 0


if __name__ == "__main__":
    sys.exit(main())
