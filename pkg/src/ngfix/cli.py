"""Command-line front end: ``ngfix <subcommand> ...``."""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from .builder import BaseBuildConfig, build_base, insert_point
from .evaluation import rows_to_csv, sweep
from .fixing import FixConfig, fix_workload
from .graph import GraphIndex
from .io import read_id_lists, read_vecs, write_id_lists, write_vecs
from .maintenance import MaintenanceConfig, compact, delete_point, partial_rebuild
from .rfix import rfix
from .search import greedy_search
from .workload import KnnList, QuerySet, approx_knn, augment, exact_knn, synth_ood

log = logging.getLogger("ngfix")


def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    return int(os.environ.get("NGFIX_THREADS", "1"))


def _queries(path) -> np.ndarray:
    return read_vecs(path).astype(np.float32)


def _gt_from_file(G: GraphIndex, qs: np.ndarray, path) -> list[KnnList]:
    lists = read_id_lists(path)
    if len(lists) != len(qs):
        raise SystemExit(f"error: {path} holds {len(lists)} lists for {len(qs)} queries")
    prepared = G.store.prepare(qs)
    return [KnnList(ids, G.store.distances_to(q, ids), "file") for q, ids in zip(prepared, lists)]


def _parse_mode(text: str):
    """``exact`` or ``approx`` / ``approx:L``."""
    if text == "exact":
        return "exact", None
    if text == "approx":
        return "approx", None
    if text.startswith("approx:"):
        return "approx", int(text.split(":", 1)[1])
    raise argparse.ArgumentTypeError(f"bad ground-truth mode {text!r}")


def _mex(text: str):
    return None if text.lower() in ("inf", "none", "0") else int(text)


# -- subcommands -----------------------------------------------------------------


def cmd_synth(args) -> None:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    wl = synth_ood(args.n, args.d, args.queries + args.test, args.shift, args.seed,
                   metric=args.metric)
    write_vecs(out / "base.fvecs", wl.base.data)
    write_vecs(out / "hist.fvecs", wl.ood.vectors[: args.queries])
    write_vecs(out / "test.fvecs", wl.ood.vectors[args.queries :])
    write_vecs(out / "iid.fvecs", wl.iid.vectors)


def cmd_build(args) -> None:
    from .core import VectorStore

    if _threads(args) > 1:
        log.info("construction is sequential; --threads ignored")
    store = VectorStore(read_vecs(args.base).astype(np.float32), args.metric)
    G = build_base(store, BaseBuildConfig(args.M, args.efc, args.seed, args.mex), progress=True)
    G.save(args.out)


def cmd_gt(args) -> None:
    mode, L = args.mode
    qs = _queries(args.queries)
    if mode == "exact":
        from .core import VectorStore

        if args.index:
            G = GraphIndex.load(args.index)
            lists = exact_knn(G.store, qs, args.depth, live=G.live_mask())
        else:
            if not args.base:
                raise SystemExit("error: gt needs --base or --index")
            store = VectorStore(read_vecs(args.base).astype(np.float32), args.metric)
            lists = exact_knn(store, qs, args.depth)
    else:
        if not args.index:
            raise SystemExit("error: approximate ground truth needs --index")
        G = GraphIndex.load(args.index)
        lists = [approx_knn(G, q, args.depth, L) for q in qs]
    if len(qs) == 1 and isinstance(lists, KnnList):
        lists = [lists]
    write_id_lists(args.out, [g.ids for g in lists])


def cmd_fix(args) -> None:
    G = GraphIndex.load(args.index)
    qs = _queries(args.queries)
    schedule = FixConfig.parse_schedule(args.rounds, args.mex)
    depth = min(max(c.max_s for c in schedule), int(G.live_mask().sum()))
    if args.gt.startswith("approx"):
        _, L = _parse_mode(args.gt)
        prepared = G.store.prepare(qs)
        gt = [approx_knn(G, q, depth, L, prepared=True) for q in prepared]
    else:
        gt = _gt_from_file(G, qs, args.gt)
    qset = QuerySet(qs, gt)
    if args.rfix_only:
        final = min(schedule, key=lambda c: c.n_q)
        G.set_extra_cap(final.m_ex)
        prepared = G.store.prepare(qs)
        edges = 0
        for q, knn in zip(prepared, gt):
            edges += rfix(G, q, knn, min(final.n_q, len(knn)), args.l_probe, args.max_iters,
                          prepared=True).edges
        print(f"rfix edges: {edges}")
    else:
        report = fix_workload(G, qset, schedule, rfix=not args.no_rfix, l_probe=args.l_probe,
                              rfix_max_iters=args.max_iters)
        for r in report.rounds:
            print(f"round N_q={r.n_q} K_h={r.k_h} MaxS={r.max_s}: ngfix {r.ngfix_edges} "
                  f"rfix {r.rfix_edges} edges in {r.seconds:.1f}s")
    G.save(args.out)


def cmd_insert(args) -> None:
    G = GraphIndex.load(args.index)
    cfg = BaseBuildConfig(M=G.m_base, efC=args.efc, seed=args.seed, m_ex=G.m_ex)
    for v in read_vecs(args.add).astype(np.float32):
        insert_point(G, v, cfg)
    if args.partial_rebuild is not None:
        if not args.queries:
            raise SystemExit("error: --partial-rebuild needs --queries")
        hist = QuerySet(_queries(args.queries))
        partial_rebuild(G, hist, args.partial_rebuild,
                        FixConfig.parse_schedule(args.rounds, args.mex), seed=args.seed)
    G.save(args.out or args.index)


def cmd_delete(args) -> None:
    G = GraphIndex.load(args.index)
    for ids in read_id_lists(args.ids):
        for v in ids:
            delete_point(G, int(v))
    if args.compact:
        n = compact(G, MaintenanceConfig(repair_L=args.repair_l), force=True)
        print(f"compacted {n} points")
    G.save(args.out or args.index)


def cmd_search(args) -> None:
    G = GraphIndex.load(args.index)
    qs = G.store.prepare(_queries(args.queries))
    res = [greedy_search(G, q, args.k, None, args.L, prepared=True).ids for q in qs]
    if args.out:
        write_id_lists(args.out, res)
    else:
        for ids in res:
            print(" ".join(map(str, ids)))


def cmd_sweep(args) -> None:
    G = GraphIndex.load(args.index)
    qs = _queries(args.queries)
    gt = _gt_from_file(G, qs, args.gt)
    rows = sweep(G, qs, gt, args.k, args.l_start, args.l_step, args.l_max)
    text = rows_to_csv(rows)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_augment(args) -> None:
    out = augment(_queries(args.queries), args.ratio, args.c, args.seed, args.noise_interp)
    write_vecs(args.out, out.vectors)


def cmd_test(args) -> None:
    from .properties import run_property_suite

    report = run_property_suite(args.seed, args.trials)
    print(report.summary())
    for res in report.results.values():
        for f in res.failures:
            print(f"{f.prop} seed={f.trial_seed}: {f.message}")
    if not report.all_green:
        raise SystemExit(1)


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ngfix", description="Query-driven graph ANN index tools")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, threads=False):
        sp.add_argument("--seed", type=int, default=0)
        if threads:
            sp.add_argument("--threads", type=int, default=None,
                            help="worker threads (env NGFIX_THREADS)")

    sp = sub.add_parser("synth", help="synthetic base + OOD query files")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--queries", type=int, required=True, help="historical queries")
    sp.add_argument("--test", type=int, default=0, help="held-out test queries")
    sp.add_argument("--shift", type=float, default=2.0)
    sp.add_argument("--metric", default="l2")
    sp.add_argument("--out-dir", required=True)
    common(sp)
    sp.set_defaults(func=cmd_synth)

    sp = sub.add_parser("build", help="build the base graph")
    sp.add_argument("--base", required=True)
    sp.add_argument("--metric", default="l2")
    sp.add_argument("--M", type=int, default=16)
    sp.add_argument("--efc", type=int, default=200)
    sp.add_argument("--mex", type=_mex, default=48)
    sp.add_argument("--out", required=True)
    common(sp, threads=True)
    sp.set_defaults(func=cmd_build)

    sp = sub.add_parser("gt", help="ground-truth neighbor lists")
    sp.add_argument("--base")
    sp.add_argument("--index")
    sp.add_argument("--metric", default="l2")
    sp.add_argument("--queries", required=True)
    sp.add_argument("--depth", type=int, default=500)
    sp.add_argument("--mode", type=_parse_mode, default=("exact", None))
    sp.add_argument("--out", required=True)
    common(sp)
    sp.set_defaults(func=cmd_gt)

    sp = sub.add_parser("fix", help="repair the index with a historical workload")
    sp.add_argument("--index", required=True)
    sp.add_argument("--queries", required=True)
    sp.add_argument("--gt", required=True, help="ivecs file, or approx[:L]")
    sp.add_argument("--rounds", default="100:100:500,10:10:50")
    sp.add_argument("--mex", type=_mex, default=48)
    sp.add_argument("--l-probe", type=int, default=None)
    sp.add_argument("--max-iters", type=int, default=10)
    sp.add_argument("--no-rfix", action="store_true")
    sp.add_argument("--rfix-only", action="store_true")
    sp.add_argument("--out", required=True)
    common(sp, threads=True)
    sp.set_defaults(func=cmd_fix)

    sp = sub.add_parser("insert", help="insert points, optionally partial rebuild")
    sp.add_argument("--index", required=True)
    sp.add_argument("--add", required=True)
    sp.add_argument("--efc", type=int, default=200)
    sp.add_argument("--partial-rebuild", type=float, default=None, metavar="R")
    sp.add_argument("--queries")
    sp.add_argument("--rounds", default="100:100:500,10:10:50")
    sp.add_argument("--mex", type=_mex, default=48)
    sp.add_argument("--out")
    common(sp, threads=True)
    sp.set_defaults(func=cmd_insert)

    sp = sub.add_parser("delete", help="tombstone points, optionally compact")
    sp.add_argument("--index", required=True)
    sp.add_argument("--ids", required=True)
    sp.add_argument("--compact", action="store_true")
    sp.add_argument("--repair-l", type=int, default=800)
    sp.add_argument("--out")
    common(sp, threads=True)
    sp.set_defaults(func=cmd_delete)

    sp = sub.add_parser("search", help="k-NN search")
    sp.add_argument("--index", required=True)
    sp.add_argument("--queries", required=True)
    sp.add_argument("-k", type=int, default=10)
    sp.add_argument("-L", type=int, default=100)
    sp.add_argument("--out")
    common(sp)
    sp.set_defaults(func=cmd_search)

    sp = sub.add_parser("sweep", help="recall/NDC/QPS over search-list sizes")
    sp.add_argument("--index", required=True)
    sp.add_argument("--queries", required=True)
    sp.add_argument("--gt", required=True)
    sp.add_argument("-k", type=int, default=10)
    sp.add_argument("--l-start", type=int, default=None)
    sp.add_argument("--l-step", type=int, default=10)
    sp.add_argument("--l-max", type=int, default=100)
    sp.add_argument("--format", choices=["csv"], default="csv")
    sp.add_argument("--out")
    common(sp)
    sp.set_defaults(func=cmd_sweep)

    sp = sub.add_parser("augment", help="Gaussian-noise copies of historical queries")
    sp.add_argument("--queries", required=True)
    sp.add_argument("-c", type=float, default=0.3)
    sp.add_argument("--ratio", type=float, default=1.0)
    sp.add_argument("--noise-interp", choices=["var", "std"], default="var")
    sp.add_argument("--out", required=True)
    common(sp)
    sp.set_defaults(func=cmd_augment)

    sp = sub.add_parser("test", help="randomized property suite")
    sp.add_argument("--suite", choices=["theorems"], default="theorems")
    sp.add_argument("--trials", type=int, default=1000)
    common(sp)
    sp.set_defaults(func=cmd_test)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
