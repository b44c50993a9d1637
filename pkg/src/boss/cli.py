"""Command-line front end: ``boss simulate | search | eval | bench``.

Exit status is 0 on success, 1 on usage errors and 2 on data errors.
Every command that writes results also writes a ``key=value`` manifest
whose ``argv`` entry replays the run (``boss --replay MANIFEST``).
"""
from __future__ import annotations

import argparse
import datetime
import logging
import math
import shlex
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .graph import Dag, GraphError, find_compelled
from .io import (
    DataFormatError,
    read_dag,
    read_data,
    read_graph,
    read_manifest,
    read_shuffle,
    write_data,
    write_graph,
    write_manifest,
    write_shuffle,
)
from .metrics import EvalReport, evaluate, mean_sd
from .score import BicScore, DegenerateParentSetError, covariance_from_data
from .search import SearchConfig, derive_seed, run_boss
from .simgen import GRAPH_KINDS, NOISE_FAMILIES, SimConfig, simulate

log = logging.getLogger("boss")

SEED_MIXING = "splitmix64(base + (index+1) * 0x9E3779B97F4A7C15)"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _manifest_base(command: str, argv: list[str], seed) -> dict:
    return {
        "command": command,
        "argv": shlex.join(argv),
        "tool_version": __version__,
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(timespec="seconds"),
        "seed": seed,
        "seed_mixing": SEED_MIXING,
    }


def _fmt(x) -> str:
    return "NA" if isinstance(x, float) and math.isnan(x) else repr(x) if isinstance(x, float) else str(x)


def cmd_simulate(args, argv) -> int:
    cfg = SimConfig(args.p, args.avg_degree, n=args.n, noise_family=args.noise,
                    graph_kind=args.graph, seed=args.seed)
    sim = simulate(cfg)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_graph(out / "graph.txt", sim.dag)
    write_data(out / "data.csv", sim.sample.data)
    write_shuffle(out / "shuffle.csv", sim.sample.column_of)
    m = _manifest_base("simulate", argv, args.seed)
    m.update(num_vars=cfg.num_vars, avg_degree=cfg.avg_degree, n=cfg.n, noise=cfg.noise_family,
             graph=cfg.graph_kind, outputs="graph.txt,data.csv,shuffle.csv")
    write_manifest(out / "manifest.txt", m)
    print(f"wrote {out}/graph.txt ({len(sim.dag)} edges), data.csv, shuffle.csv, manifest.txt")
    return 0


def _score_from_csv(path, penalty_discount):
    x, _ = read_data(path)
    if x.shape[0] < 2:
        raise DataFormatError(f"{path}: need at least two rows")
    model = covariance_from_data(x)
    const = np.flatnonzero(np.diag(model.cov) <= 0)
    if const.size:
        raise DataFormatError(f"{path}: constant column(s) {const.tolist()}")
    return BicScore(model, penalty_discount)


def manifest_path_for(graph_path) -> Path:
    p = Path(graph_path)
    return p.with_name(p.stem + ".manifest.txt")


def cmd_search(args, argv) -> int:
    score = _score_from_csv(args.data, args.penalty_discount)
    cfg = SearchConfig(penalty_discount=args.penalty_discount, use_bes=args.bes,
                       num_starts=args.num_starts, seed=args.seed,
                       randomize_initial_order=not args.data_order,
                       max_tree_nodes=args.max_tree_nodes)
    t0 = time.perf_counter()
    result = run_boss(score, cfg, workers=args.threads)
    elapsed = time.perf_counter() - t0
    write_graph(args.out, result.cpdag)
    m = _manifest_base("search", argv, args.seed)
    m.update(data=args.data, output=args.out, penalty_discount=args.penalty_discount, bes=args.bes,
             num_starts=args.num_starts, threads=args.threads, data_order=args.data_order,
             max_tree_nodes=args.max_tree_nodes, score=repr(result.score), sweeps=result.sweeps,
             edges=len(result.cpdag), elapsed_seconds=repr(elapsed))
    write_manifest(manifest_path_for(args.out), m)
    print(f"elapsed_seconds={elapsed:.3f}")
    return 0


def _locate_shuffle(args):
    if args.shuffle:
        return read_shuffle(args.shuffle)
    if args.aligned:
        return None
    guess = Path(args.data).with_name("shuffle.csv") if args.data else None
    if guess is not None and guess.exists():
        return read_shuffle(guess)
    raise DataFormatError("missing shuffle alignment: pass --shuffle or --aligned")


def cmd_eval(args, argv) -> int:
    true_dag = read_dag(args.true_graph)
    est = read_graph(args.est_graph)
    if est.num_vars != true_dag.num_vars:
        raise DataFormatError("true and estimated graphs have different variable counts")
    column_of = _locate_shuffle(args)
    score = None
    if args.data:
        x, _ = read_data(args.data)
        if x.shape[1] != true_dag.num_vars:
            raise DataFormatError("data and graphs have different variable counts")
    if column_of is not None:
        if len(column_of) != true_dag.num_vars:
            raise DataFormatError("shuffle map size does not match the graphs")
        orig_of = np.empty_like(column_of)
        orig_of[column_of] = np.arange(len(column_of))
        est = est.relabel(orig_of)
        if args.data:
            x = x[:, column_of]
    if args.data:
        score = BicScore(covariance_from_data(x), args.penalty_discount)
    manifest = Path(args.manifest) if args.manifest else manifest_path_for(args.est_graph)
    seconds = math.nan
    if manifest.exists():
        seconds = float(read_manifest(manifest).get("elapsed_seconds", "nan"))
    report = evaluate(true_dag, est, score, seconds)
    text = ",".join(EvalReport.FIELDS) + "\n" + ",".join(_fmt(v) for v in report.row()) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def run_cell_rep(job) -> dict:
    """Simulate, search and evaluate one repetition of one grid cell."""
    cell, rep, base_seed, n, penalty, use_bes = job
    graph, noise, p, deg = cell
    seed = derive_seed(base_seed, rep)
    sim = simulate(SimConfig(p, deg, n=n, noise_family=noise, graph_kind=graph, seed=seed))
    score = BicScore(covariance_from_data(sim.sample.data), penalty)
    cfg = SearchConfig(penalty_discount=penalty, use_bes=use_bes, seed=seed)
    t0 = time.perf_counter()
    result = run_boss(score, cfg)
    elapsed = time.perf_counter() - t0
    orig_of = np.empty_like(sim.sample.column_of)
    orig_of[sim.sample.column_of] = np.arange(p)
    est = result.cpdag.relabel(orig_of)
    truth_score = BicScore(covariance_from_data(sim.sample.unshuffled()), penalty)
    report = evaluate(sim.dag, est, truth_score, elapsed)
    return {
        "graph": graph, "noise": noise, "p": p, "avg_degree": deg, "rep": rep, "seed": seed,
        **dict(zip(EvalReport.FIELDS, report.row())),
        "score_trace": result.score_trace,
    }


BENCH_COLUMNS = ("adj_pre", "adj_rec", "ori_pre", "ori_rec", "delta_bic", "edges", "seconds")


def aggregate(records: list[dict]) -> list[dict]:
    cells: dict[tuple, list[dict]] = {}
    for r in sorted(records, key=lambda r: (r["graph"], r["noise"], r["p"], r["avg_degree"], r["rep"])):
        cells.setdefault((r["graph"], r["noise"], r["p"], r["avg_degree"]), []).append(r)
    out = []
    for (graph, noise, p, deg), rs in cells.items():
        row = {"graph": graph, "noise": noise, "p": p, "avg_degree": deg, "reps": len(rs)}
        for c in BENCH_COLUMNS:
            m, sd, k = mean_sd([float(r[c]) for r in rs])
            row[c] = (m, sd, k)
        out.append(row)
    return out


def format_table(rows: list[dict]) -> str:
    head = f"{'graph':<6}{'noise':<12}{'p':>5}{'deg':>6}  " + "  ".join(f"{c:>18}" for c in BENCH_COLUMNS)
    lines = [head, "-" * len(head)]
    for r in rows:
        cells = []
        for c in BENCH_COLUMNS:
            m, sd, _ = r[c]
            cells.append(f"{'NA':>18}" if math.isnan(m) else f"{m:>9.3f} ({sd:>6.3f})")
        lines.append(f"{r['graph']:<6}{r['noise']:<12}{r['p']:>5}{r['avg_degree']:>6g}  " + "  ".join(cells))
    return "\n".join(lines) + "\n"


def run_bench(graphs, noises, ps, degrees, reps, seed, n=1000, penalty=2.0, use_bes=False,
              workers=1) -> list[dict]:
    jobs = [((g, nz, p, d), rep, seed, n, penalty, use_bes)
            for g in graphs for nz in noises for p in ps for d in degrees for rep in range(reps)]
    if workers > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run_cell_rep, jobs))
    return [run_cell_rep(j) for j in jobs]


def cmd_bench(args, argv) -> int:
    records = run_bench(args.graph, args.noise, args.p, args.avg_degree, args.reps, args.seed,
                        n=args.n, penalty=args.penalty_discount, use_bes=args.bes, workers=args.workers)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    cols = ("graph", "noise", "p", "avg_degree", "rep", "seed") + BENCH_COLUMNS
    lines = [",".join(cols)]
    for r in sorted(records, key=lambda r: (r["graph"], r["noise"], r["p"], r["avg_degree"], r["rep"])):
        lines.append(",".join(_fmt(r[c]) for c in cols))
    (out / "runs.csv").write_text("\n".join(lines) + "\n")
    rows = aggregate(records)
    agg = [",".join(("graph", "noise", "p", "avg_degree", "reps")
                    + tuple(f"{c}_{s}" for c in BENCH_COLUMNS for s in ("mean", "sd", "n")))]
    for r in rows:
        vals = [r["graph"], r["noise"], r["p"], r["avg_degree"], r["reps"]]
        for c in BENCH_COLUMNS:
            vals.extend(r[c])
        agg.append(",".join(_fmt(v) for v in vals))
    (out / "summary.csv").write_text("\n".join(agg) + "\n")
    table = format_table(rows)
    (out / "summary.txt").write_text(table)
    m = _manifest_base("bench", argv, args.seed)
    m.update(reps=args.reps, n=args.n, penalty_discount=args.penalty_discount, bes=args.bes,
             outputs="runs.csv,summary.csv,summary.txt")
    write_manifest(out / "manifest.txt", m)
    sys.stdout.write(table)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="boss", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--replay", metavar="MANIFEST", help="re-run the command recorded in a manifest")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)

    s = sub.add_parser("simulate", help="generate a random graph and linear SEM data")
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--avg-degree", type=float, required=True)
    s.add_argument("--graph", choices=GRAPH_KINDS, default="er")
    s.add_argument("--noise", choices=NOISE_FAMILIES, default="gaussian")
    s.add_argument("--n", type=int, default=1000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out-dir", required=True)

    s = sub.add_parser("search", help="run BOSS on a CSV dataset")
    s.add_argument("--data", required=True)
    s.add_argument("--penalty-discount", type=float, default=2.0)
    s.add_argument("--bes", action="store_true")
    s.add_argument("--num-starts", type=int, default=1)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("--data-order", action="store_true", help="start from the column order")
    s.add_argument("--max-tree-nodes", type=int, default=None)
    s.add_argument("--out", required=True)

    s = sub.add_parser("eval", help="score an estimated CPDAG against the true DAG")
    s.add_argument("--true-graph", required=True)
    s.add_argument("--est-graph", required=True)
    s.add_argument("--data")
    s.add_argument("--shuffle", help="shuffle map from simulate (default: next to --data)")
    s.add_argument("--aligned", action="store_true", help="graphs already share variable indices")
    s.add_argument("--penalty-discount", type=float, default=2.0)
    s.add_argument("--manifest", help="search manifest holding elapsed seconds")
    s.add_argument("--out")

    s = sub.add_parser("bench", help="simulate, search and evaluate over a grid")
    s.add_argument("--reps", type=int, default=10)
    s.add_argument("--p", type=int, nargs="+", default=[100])
    s.add_argument("--avg-degree", type=float, nargs="+", default=[2.0, 10.0])
    s.add_argument("--noise", choices=NOISE_FAMILIES, nargs="+", default=["gaussian"])
    s.add_argument("--graph", choices=GRAPH_KINDS, nargs="+", default=["er"])
    s.add_argument("--n", type=int, default=1000)
    s.add_argument("--penalty-discount", type=float, default=2.0)
    s.add_argument("--bes", action="store_true")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--workers", type=int, default=1)
    s.add_argument("--out-dir", required=True)
    return parser


COMMANDS = {"simulate": cmd_simulate, "search": cmd_search, "eval": cmd_eval, "bench": cmd_bench}


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.replay:
            argv = shlex.split(read_manifest(args.replay)["argv"])
            args = parser.parse_args(argv)
        if args.command is None:
            raise UsageError("a command is required")
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"boss: error: {exc}", file=sys.stderr)
        return 1
    except (OSError, KeyError) as exc:
        print(f"boss: error: {exc}", file=sys.stderr)
        return 2
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING)
    try:
        return COMMANDS[args.command](args, argv)
    except (DataFormatError, DegenerateParentSetError, GraphError, OSError) as exc:
        print(f"boss: error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"boss: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
