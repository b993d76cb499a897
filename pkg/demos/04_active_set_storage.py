"""The packed hash map behind the sweep's active set, and partitioned joins.

The map keeps its records contiguous: removal swaps the last record into
the hole, so a full scan is one sequential pass over an array no matter
how much churn preceded it.  The chained baseline stores one node per
entry and has to follow pointers.  After a churn phase the gap is large.
"""

from sweepjoin import IntervalRelation, PredicateSpec, partitioned_join, run_join
from sweepjoin.cli import gen_synthetic, map_scan_bench

print("scan-aggregate after inserting and churning 250k entries:")
res = map_scan_bench(250_000)
for label in ("gapless", "chained"):
    r = res[label]
    print(f"  {label:8s}: {r['seconds'] * 1e3:8.3f} ms for {r['entries']} entries")
print(f"  speedup: {res['speedup']:.1f}x (checksums agree)")

print()
print("partitioned join: split one side, join parts, union the results")
rel_r = gen_synthetic(5_000, seed=1, domain_hi=5_000)
rel_s = gen_synthetic(5_000, seed=2, domain_hi=5_000)
spec = PredicateSpec(IntervalRelation.START_PRECEDING, delta=5)
whole, _ = run_join(spec, rel_r, rel_s)
for k in (1, 2, 4):
    parts, stats = partitioned_join(spec, rel_r, rel_s, k, parallel=k > 1)
    assert parts == whole
    print(f"  k={k}: {len(parts)} pairs from {k} part joins, identical result")
