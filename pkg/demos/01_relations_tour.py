"""A tour of the supported interval relations on a tiny example.

Three left intervals, two right intervals, every relation evaluated with
the sweep engine and double-checked against the brute-force oracle.
Half-open semantics throughout: [1, 3) and [3, 4) touch but do not overlap.
"""

from sweepjoin import IntervalRelation, PredicateSpec, Relation, matrix_join, run_join

rel_r = Relation.from_intervals([(0, 1), (1, 3), (2, 5)], "r")
rel_s = Relation.from_intervals([(1, 3), (3, 4)], "s")

print("r:", [(t.ts, t.te) for t in rel_r])
print("s:", [(t.ts, t.te) for t in rel_s])
print()

specs = [PredicateSpec(rel) for rel in IntervalRelation]
# a few parameterized flavors on top of the relaxed defaults
specs += [
    PredicateSpec(IntervalRelation.START_PRECEDING, delta=0),
    PredicateSpec(IntervalRelation.END_FOLLOWING, epsilon=1),
    PredicateSpec(IntervalRelation.BEFORE, delta=1),
    PredicateSpec(IntervalRelation.BEFORE, delta=1, strict=True),
]

for spec in specs:
    pairs, stats = run_join(spec, rel_r, rel_s)
    assert pairs == matrix_join(spec, rel_r, rel_s)
    params = []
    if spec.delta is not None:
        params.append(f"delta={spec.delta}")
    if spec.epsilon is not None:
        params.append(f"epsilon={spec.epsilon}")
    if spec.strict:
        params.append("strict")
    label = spec.relation.value + (f" ({', '.join(params)})" if params else "")
    print(f"{label:38s} -> {sorted(pairs)}")

print()
print("every result agreed with the brute-force oracle")
