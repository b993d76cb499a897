"""Plane-sweep interval joins for classic and distance-bounded relations."""

from .core import (
    INF,
    DELTA_RELATIONS,
    EPSILON_RELATIONS,
    PARAMETERIZED_RELATIONS,
    Endpoint,
    EndpointIndex,
    EndpointKind,
    IntervalRelation,
    IntervalTuple,
    PredicateError,
    PredicateSpec,
    Relation,
    RelationValidationError,
    SweepJoinError,
    build_endpoint_index,
    check_relation,
    compare_endpoints,
    validate_relation,
)
from .engine import (
    DEFAULT_CAPACITY,
    ChecksumConsumer,
    DuplicateActiveTupleError,
    FilteringConsumer,
    JoinStats,
    PairCollector,
    ResultPair,
    ReversingConsumer,
    TeeConsumer,
    compute_gnorf,
    join_by_s,
    lazy_join_by_s,
)
from .gapless_map import ChainedMapBaseline, DuplicateKeyError, GaplessHashMap
from .iterators import (
    EndpointIterator,
    FilteringIterator,
    FirstEndIterator,
    IndexIterator,
    MergingIterator,
    SecondStartIterator,
    ShiftingIterator,
    StreamOrderError,
    StreamSource,
    StreamSourceIterator,
)
from .joins import partitioned_join, run_join
from .oracle import eval_predicate, matrix_join, nested_loop_join

__version__ = "0.1.0"
