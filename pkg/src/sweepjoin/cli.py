"""Command line front end: dataset generation, joins, verification, benchmarks.

CSV conventions: interval files carry ``ts,te[,payload]`` rows (header
optional), pair files carry ``r_id,s_id`` sorted ascending.  Commands print
a JSON report to stdout so runs are easy to script against.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .core import (
    EndpointIndex,
    IntervalRelation,
    IntervalTuple,
    PredicateError,
    PredicateSpec,
    Relation,
    SweepJoinError,
    build_endpoint_index,
    check_relation,
)
from .engine import DEFAULT_CAPACITY, ChecksumConsumer, compute_gnorf
from .gapless_map import ChainedMapBaseline, GaplessHashMap
from .joins import partitioned_join, run_join
from .oracle import matrix_join

DEFAULT_ORACLE_CAP = 3000


def gen_synthetic(n: int, seed: int, lam: float = 10.0,
                  domain_hi: int = 1_000_000, name: str = "") -> Relation:
    """Random interval relation: uniform starts on [1, domain_hi] and
    exponentially distributed durations (mean ``lam``, at least 1).

    Fully determined by the seed.
    """
    rng = np.random.Generator(np.random.PCG64(seed))
    ts = rng.integers(1, domain_hi + 1, size=n)
    dur = np.maximum(1, np.rint(rng.exponential(lam, size=n))).astype(np.int64)
    te = ts + dur
    return Relation(
        name=name,
        tuples=[
            IntervalTuple(i, int(a), int(b))
            for i, (a, b) in enumerate(zip(ts.tolist(), te.tolist()))
        ],
    )


def read_intervals_csv(path: str, name: str = "") -> Relation:
    """Load an interval relation from a ts,te[,payload] CSV file."""
    tuples: List[IntervalTuple] = []
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (lineno == 1 and not row[0].strip().lstrip("-").isdigit()):
                continue  # blank line or header
            try:
                ts, te = int(row[0]), int(row[1])
                payload = int(row[2]) if len(row) > 2 and row[2].strip() else 0
            except (ValueError, IndexError) as exc:
                raise SweepJoinError(f"{path}:{lineno}: bad interval row {row!r}") from exc
            tuples.append(IntervalTuple(len(tuples), ts, te, payload))
    rel = Relation(name=name or path, tuples=tuples)
    check_relation(rel)
    return rel


def write_intervals_csv(path: str, rel: Relation) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["ts", "te", "payload"])
        for t in rel.tuples:
            w.writerow([t.ts, t.te, t.payload])


def write_pairs_csv(path: str, pairs) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["r_id", "s_id"])
        for r_id, s_id in sorted(pairs):
            w.writerow([r_id, s_id])


def read_pairs_csv(path: str) -> set:
    out = set()
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or (lineno == 1 and not row[0].strip().lstrip("-").isdigit()):
                continue
            try:
                out.add((int(row[0]), int(row[1])))
            except (ValueError, IndexError) as exc:
                raise SweepJoinError(f"{path}:{lineno}: bad pair row {row!r}") from exc
    return out


def sequence_histogram(idx_r: EndpointIndex, idx_s: EndpointIndex) -> Dict[str, float]:
    """Length distribution of maximal same-input runs in the merged event
    order (outer first on ties), bucketed 1..9 and 10+.

    Long runs are what the buffering engine exploits, so this summarizes
    how much a workload can benefit from it.
    """
    rts, rkind, _ = idx_r.cols
    sts, skind, _ = idx_s.cols
    ts = np.concatenate([rts, sts])
    kind = np.concatenate([rkind, skind])
    side = np.concatenate([
        np.zeros(len(rts), np.int64), np.ones(len(sts), np.int64),
    ])
    if len(ts) == 0:
        return {}
    order = np.lexsort((side, kind, ts))
    merged = side[order]
    boundary = np.flatnonzero(np.diff(merged)) + 1
    lengths = np.diff(np.concatenate([[0], boundary, [len(merged)]]))
    total = len(lengths)
    hist: Dict[str, float] = {}
    for ln in lengths.tolist():
        key = str(ln) if ln < 10 else "10+"
        hist[key] = hist.get(key, 0) + 1
    return {k: v / total for k, v in sorted(hist.items(), key=lambda kv: (len(kv[0]), kv[0]))}


def spec_from_args(args: argparse.Namespace) -> PredicateSpec:
    try:
        relation = IntervalRelation(args.pred)
    except ValueError:
        valid = ", ".join(r.value for r in IntervalRelation)
        raise SweepJoinError(f"unknown predicate {args.pred!r}; choose from: {valid}")
    return PredicateSpec(
        relation,
        delta=args.delta,
        epsilon=args.epsilon,
        strict=args.strict,
    ).check()


def _add_pred_args(p: argparse.ArgumentParser, required: bool = True) -> None:
    p.add_argument("--pred", required=required,
                   default=None if required else "start-preceding",
                   help="interval relation name")
    p.add_argument("--delta", type=int, default=None,
                   help="start/gap distance bound (omit to relax)")
    p.add_argument("--epsilon", type=int, default=None,
                   help="end distance bound (omit to relax)")
    p.add_argument("--strict", action="store_true",
                   help="strict boundary comparisons")


def cmd_gen(args: argparse.Namespace) -> int:
    rel = gen_synthetic(args.n, args.seed, args.lam, args.domain_hi)
    write_intervals_csv(args.out, rel)
    print(json.dumps({"written": args.out, "n": len(rel)}))
    return 0


def cmd_join(args: argparse.Namespace) -> int:
    spec = spec_from_args(args)
    rel_r = read_intervals_csv(args.left, "r")
    rel_s = read_intervals_csv(args.right, "s")
    report: dict = {
        "pred": spec.relation.value, "delta": spec.delta,
        "epsilon": spec.epsilon, "strict": spec.strict,
        "n_r": len(rel_r), "n_s": len(rel_s),
    }
    engines = ["eager", "lazy"] if args.engine == "both" else [args.engine]
    pairs = None
    stats_by_engine = {}
    for engine in engines:
        t0 = time.perf_counter()
        if args.k > 1:
            got, part_stats = partitioned_join(
                spec, rel_r, rel_s, args.k,
                engine=engine, capacity=args.capacity, parallel=args.parallel,
            )
            stats = {
                "getnext_count": sum(s.getnext_count for s in part_stats),
                "comparison_count": sum(s.comparison_count for s in part_stats),
                "output_count": sum(s.output_count for s in part_stats),
                "buffer_flushes": sum(s.buffer_flushes for s in part_stats),
                "partitions": args.k,
            }
        else:
            got, st = run_join(spec, rel_r, rel_s,
                               engine=engine, capacity=args.capacity)
            stats = {
                "getnext_count": st.getnext_count,
                "comparison_count": st.comparison_count,
                "output_count": st.output_count,
                "buffer_flushes": st.buffer_flushes,
            }
        stats["seconds"] = round(time.perf_counter() - t0, 6)
        stats_by_engine[engine] = stats
        if pairs is not None and got != pairs:
            raise SweepJoinError("engines disagree on the result pairs")
        pairs = got
    report["engines"] = stats_by_engine
    report["result_pairs"] = len(pairs)
    if len(engines) == 2:
        e, l = stats_by_engine["eager"], stats_by_engine["lazy"]
        lg = l["getnext_count"]
        report["gnorf"] = e["getnext_count"] / lg if lg else 1.0
    if args.out:
        write_pairs_csv(args.out, pairs)
        report["written"] = args.out
    print(json.dumps(report))
    return 0


def cmd_verify(args: argparse.Namespace) -> int:
    spec = spec_from_args(args)
    rel_r = read_intervals_csv(args.left, "r")
    rel_s = read_intervals_csv(args.right, "s")
    cap = args.oracle_cap
    if len(rel_r) > cap or len(rel_s) > cap:
        print(json.dumps({
            "error": f"inputs exceed the oracle cap of {cap} tuples per side",
        }))
        return 2
    want = matrix_join(spec, rel_r, rel_s)
    if args.pairs:
        got = read_pairs_csv(args.pairs)
        subject = args.pairs
    else:
        got, _ = run_join(spec, rel_r, rel_s,
                          engine=args.engine if args.engine != "both" else "lazy",
                          capacity=args.capacity)
        subject = "join"
    missing = sorted(want - got)
    extra = sorted(got - want)
    report = {
        "subject": subject,
        "expected_pairs": len(want),
        "got_pairs": len(got),
        "missing": missing[:20],
        "extra": extra[:20],
        "ok": not missing and not extra,
    }
    print(json.dumps(report))
    return 0 if report["ok"] else 1


def cmd_bench(args: argparse.Namespace) -> int:
    spec = spec_from_args(args)
    out = []
    for n in args.n:
        rel = gen_synthetic(n, args.seed, args.lam, args.domain_hi or n)
        idx = build_endpoint_index(rel)
        row: dict = {"n": n}
        for engine in ("eager", "lazy"):
            best = None
            for _ in range(args.repeat):
                sink = ChecksumConsumer()
                t0 = time.perf_counter()
                _, stats = run_join(spec, rel, rel, sink, src_r=idx, src_s=idx,
                                    engine=engine, capacity=args.capacity)
                dt = time.perf_counter() - t0
                if best is None or dt < best[0]:
                    best = (dt, stats, sink)
            dt, stats, sink = best
            row[engine] = {
                "seconds": round(dt, 6),
                "getnext_count": stats.getnext_count,
                "output_count": stats.output_count,
                "buffer_flushes": stats.buffer_flushes,
                "checksum": sink.total,
                "pairs": sink.count,
            }
        row["gnorf"] = compute_gnorf_dicts(row["eager"], row["lazy"])
        row["sequence_histogram"] = sequence_histogram(idx, idx)
        out.append(row)
    report: dict = {"pred": spec.relation.value, "capacity": args.capacity,
                    "runs": out}
    if args.map_bench:
        report["map_bench"] = map_scan_bench(args.map_bench)
    print(json.dumps(report))
    return 0


def compute_gnorf_dicts(eager: dict, lazy: dict) -> float:
    if eager["checksum"] != lazy["checksum"]:
        raise SweepJoinError("eager and lazy checksums disagree")
    lg = lazy["getnext_count"]
    return eager["getnext_count"] / lg if lg else 1.0


def map_scan_bench(n: int, churn: Optional[int] = None,
                   repeat: int = 3, seed: int = 1) -> dict:
    """Scan-aggregate throughput of the packed map vs the pointer-chasing
    one, after a deletion churn phase.

    Each map runs the fastest full scan its layout admits: the packed map
    streams its storage rows, the chained baseline has to walk node links.
    Both sum the ts field so the results are checkable against each other.
    """
    churn = n // 5 if churn is None else churn
    rng = np.random.Generator(np.random.PCG64(seed))
    removals = rng.permutation(n + churn)[:churn].tolist()
    results = {}
    for label, cls in (("gapless", GaplessHashMap), ("chained", ChainedMapBaseline)):
        m = cls()
        for k in range(n + churn):
            m.insert(k, IntervalTuple(k, k * 3 + 1, k * 3 + 2))
        for k in removals:
            m.remove(k)
        best = None
        total = 0
        for _ in range(repeat):
            t0 = time.perf_counter()
            total = m.scan_sum(1)
            dt = time.perf_counter() - t0
            best = dt if best is None else min(best, dt)
        results[label] = {"seconds": round(best, 9), "entries": len(m),
                          "checksum": total}
    if results["gapless"]["checksum"] != results["chained"]["checksum"]:
        raise SweepJoinError("map scan checksums disagree")
    results["speedup"] = results["chained"]["seconds"] / results["gapless"]["seconds"]
    return results


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sweepjoin",
                                description="plane-sweep interval joins")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="generate a synthetic interval CSV")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=1)
    g.add_argument("--lambda", dest="lam", type=float, default=10.0,
                   help="mean interval duration")
    g.add_argument("--domain-hi", type=int, default=1_000_000)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    j = sub.add_parser("join", help="join two interval CSVs")
    j.add_argument("left")
    j.add_argument("right")
    _add_pred_args(j)
    j.add_argument("--engine", choices=["eager", "lazy", "both"], default="lazy")
    j.add_argument("--capacity", type=int, default=DEFAULT_CAPACITY)
    j.add_argument("--k", type=int, default=1, help="partition count")
    j.add_argument("--parallel", action="store_true")
    j.add_argument("--out", default=None, help="write result pairs CSV here")
    j.set_defaults(func=cmd_join)

    v = sub.add_parser("verify", help="check join output against the oracle")
    v.add_argument("left")
    v.add_argument("right")
    _add_pred_args(v)
    v.add_argument("--engine", choices=["eager", "lazy", "both"], default="lazy")
    v.add_argument("--capacity", type=int, default=DEFAULT_CAPACITY)
    v.add_argument("--pairs", default=None,
                   help="verify this pairs CSV instead of running the join")
    v.add_argument("--oracle-cap", type=int, default=DEFAULT_ORACLE_CAP,
                   help="refuse inputs larger than this per side")
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bench", help="time eager vs lazy on synthetic data")
    b.add_argument("--n", type=int, nargs="+", default=[100_000])
    b.add_argument("--seed", type=int, default=1)
    b.add_argument("--lambda", dest="lam", type=float, default=10.0)
    b.add_argument("--domain-hi", type=int, default=None,
                   help="default: same as n, keeping density constant")
    b.add_argument("--repeat", type=int, default=3)
    b.add_argument("--capacity", type=int, default=DEFAULT_CAPACITY)
    b.add_argument("--map-bench", type=int, default=0, metavar="N",
                   help="also scan-benchmark the hash maps at N entries")
    _add_pred_args(b, required=False)
    b.set_defaults(func=cmd_bench)
    return p


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (SweepJoinError, PredicateError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
