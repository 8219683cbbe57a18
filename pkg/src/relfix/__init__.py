"""Fixed points of self-maps on metric spaces carrying a transitive relation.

Checks existence and uniqueness hypotheses for contractions on comparable
pairs, runs certified Picard iteration, reduces path-length contractions
to finite ordered orbits, and cross-checks everything with brute force.
"""

from .errors import (
    ConditionEFailed,
    DegenerateOrbit,
    EndpointMismatch,
    InvalidInput,
    LimitMismatch,
    MapEvalError,
    NoComparablePairs,
    NonConvergedTrace,
    NoPathKnown,
    NotReachable,
    ParseError,
    RelfixError,
    UnknownIdentifier,
    VariableOutOfRange,
)
from .space import (
    Comparability,
    FiniteInstance,
    FiniteSpace,
    Relation,
    SelfMapTable,
    comparable,
    transitive_closure,
    validate_metric,
    validate_relation,
)
from .chains import Chain, chainability_threshold, check_chainable, find_monotonic_chain
from .contraction import (
    CheckResult,
    HypothesisReport,
    Monotonicity,
    check_global_contraction_on_comparables,
    check_limit_comparability,
    check_local_contraction_on_comparables,
    check_local_radial_contraction,
    check_monotonic_sequential_continuity,
    classify_monotonicity,
    tightest_constant,
)
from .picard import (
    FixedPointResult,
    IterationTrace,
    RealInstance,
    StopRule,
    UniquenessResult,
    check_hypotheses,
    iterate,
    localize_start,
    select_n0,
    solve_real,
    solve_t3,
    solve_t5,
    step_bound,
    tail_bound,
)
from .expr import RealMap, eval_map, lipschitz_probe, parse_expr, parse_map, serialize

__version__ = "0.1.0"
