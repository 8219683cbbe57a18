import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from relfix.contraction import (
    MonotonicityKind,
    check_global_contraction_on_comparables,
    check_limit_comparability,
    check_local_contraction_on_comparables,
    check_local_radial_contraction,
    check_monotonic_sequential_continuity,
    classify_monotonicity,
    tightest_constant,
)
from relfix.errors import LimitMismatch, NonConvergedTrace
from relfix.expr import RealMap
from relfix.oracle import GeneratorParams, random_instance
from relfix.picard import IterationTrace, Status, iterate
from relfix.space import Relation, SelfMapTable, is_comparable

from conftest import geo5, line_instance


def brute_ratio(inst, local):
    """Max d(fx,fy)/d(x,y) over comparable distinct pairs, by plain loops."""
    best = 0.0
    for x, y in itertools.combinations(range(inst.n), 2):
        if not is_comparable(inst.relation, x, y):
            continue
        d = inst.d(x, y)
        if local and not d < inst.epsilon:
            continue
        best = max(best, inst.d(inst.f(x), inst.f(y)) / d)
    return best


def brute_class(rel, image):
    pairs = [(x, y) for x in range(rel.n) for y in range(rel.n) if rel.holds[x, y]]
    pres = all(rel.holds[image[x], image[y]] for x, y in pairs)
    rev = all(rel.holds[image[y], image[x]] for x, y in pairs)
    return {(True, True): MonotonicityKind.BOTH, (True, False): MonotonicityKind.PRESERVING,
            (False, True): MonotonicityKind.REVERSING, (False, False): MonotonicityKind.NEITHER}[
        (pres, rev)]


def test_identity_map_classification():
    ident = SelfMapTable((0, 1, 2, 3))
    assert classify_monotonicity(Relation.universal(4), ident).kind is MonotonicityKind.BOTH
    assert classify_monotonicity(Relation.total_index_order(4), ident).kind is MonotonicityKind.PRESERVING


def test_geo5_is_preserving():
    inst = geo5()
    assert classify_monotonicity(inst.relation, inst.map).kind is MonotonicityKind.PRESERVING


def test_conflicting_pairs_are_neither():
    mono = classify_monotonicity(Relation.total_index_order(3), SelfMapTable((1, 0, 2)))
    assert mono.kind is MonotonicityKind.NEITHER
    assert mono.preserve_witness == (0, 1)
    assert mono.reverse_witness is not None


def test_geo5_local_contraction():
    assert check_local_contraction_on_comparables(geo5()).verdict
    res = check_local_contraction_on_comparables(geo5(k=0.4))
    assert not res.verdict and res.witness == (0, 1)
    x, y = res.witness
    inst = geo5(k=0.4)
    assert inst.d(inst.f(x), inst.f(y)) > inst.k * inst.d(x, y)


def test_constant_map_contracts_for_every_k():
    for k in (1e-6, 0.5, 0.999):
        inst = line_instance([0.0, 1.0, 3.0], (2, 2, 2), k=k)
        assert check_local_contraction_on_comparables(inst).verdict
        assert tightest_constant(inst, "global") == 0.0


def test_geo5_global_contraction():
    assert check_global_contraction_on_comparables(geo5()).verdict
    res = check_global_contraction_on_comparables(geo5(k=0.49))
    assert not res.verdict and res.measured_ratio == 0.5
    assert tightest_constant(geo5(), "global") == 0.5


def test_empty_relation_is_vacuous():
    inst = geo5(relation=Relation.from_edges(5, []), k=0.01)
    assert check_global_contraction_on_comparables(inst).verdict
    assert check_local_contraction_on_comparables(inst).verdict


def test_identity_has_constant_one():
    inst = line_instance([0.0, 1.0, 2.0], (0, 1, 2))
    assert tightest_constant(inst, "global") == 1.0
    assert not check_global_contraction_on_comparables(inst).verdict


def test_geo5_limit_comparability():
    trace = iterate(geo5())
    res = check_limit_comparability(geo5().relation, trace, 4)
    assert res.verdict and res.details["consistent_direction"] is True
    strict = check_limit_comparability(Relation.strict_index_order(5), trace, 4)
    assert strict.verdict


def test_limit_comparability_missing_edge():
    trace = IterationTrace(0, (0, 1, 2, 2), (1.0, 1.0, 0.0), Status.CONVERGED)
    res = check_limit_comparability(Relation.from_edges(3, [(0, 1)]), trace, 2)
    assert not res.verdict and res.witness[0] == 0


def test_limit_comparability_rejects_wrong_limit():
    with pytest.raises(LimitMismatch):
        check_limit_comparability(geo5().relation, iterate(geo5()), 3)


def test_sequential_continuity():
    assert check_monotonic_sequential_continuity(geo5(), iterate(geo5())).verdict
    swap = line_instance([0.0, 1.0], (1, 0))
    with pytest.raises(NonConvergedTrace):
        check_monotonic_sequential_continuity(swap, iterate(swap))
    const = line_instance([0.0, 1.0, 2.0], (1, 1, 1), x0=2)
    trace = iterate(const)
    assert trace.iterations <= 2
    assert check_monotonic_sequential_continuity(const, trace).verdict


def test_radial_half_map_never_refuted():
    half = RealMap.from_strings(["x1/2", "x2/2"])
    res = check_local_radial_contraction(half, [(0, 1), (0, 1)], 1.0, 0.5, 1000, seed=7)
    assert res.verdict
    assert res.details["samples_used"] > 900


@pytest.mark.parametrize("expr,k", [("x1", 0.9), ("0.6*x1", 0.5)])
def test_radial_violations_found(expr, k):
    res = check_local_radial_contraction(RealMap.from_strings([expr]), [(0, 1)], 1.0, k, 1000, seed=1)
    assert not res.verdict
    x, y = (np.array(v) for v in res.witness)
    ratio = abs(float(np.asarray(RealMap.from_strings([expr])(x) - RealMap.from_strings([expr])(y))[0]))
    assert ratio >= k * abs(float(x[0] - y[0]))


def test_radial_sampling_is_reproducible():
    fmap = RealMap.from_strings(["0.4*x1 + 0.1*sin(x2)", "0.3*x2"])
    a = check_local_radial_contraction(fmap, [(-1, 1), (-1, 1)], 0.3, 0.5, 300, seed=11)
    b = check_local_radial_contraction(fmap, [(-1, 1), (-1, 1)], 0.3, 0.5, 300, seed=11)
    assert a.to_json() == b.to_json()


instances = st.builds(
    GeneratorParams,
    seed=st.integers(0, 2**40),
    n=st.integers(1, 9),
    relation_density=st.floats(0.0, 1.0),
    metric_mode=st.sampled_from(["embedding-1d", "embedding-2d", "random-explicit", "geometric-1d"]),
    map_mode=st.sampled_from(["monotone-random", "unconstrained"]),
    relation_mode=st.sampled_from(["index", "strict-index", "components", "random"]),
    target_k=st.floats(0.1, 0.9),
)


@settings(max_examples=150, deadline=None)
@given(instances)
def test_contraction_checks_match_brute_force(params):
    inst = random_instance(params)
    for local, check in ((True, check_local_contraction_on_comparables),
                         (False, check_global_contraction_on_comparables)):
        scope = "local" if local else "global"
        t = tightest_constant(inst, scope)
        assert t == pytest.approx(brute_ratio(inst, local), rel=1e-12, abs=0)
        res = check(inst)
        holds = all(inst.d(inst.f(x), inst.f(y)) <= inst.k * inst.d(x, y) + 1e-12
                    for x, y in itertools.combinations(range(inst.n), 2)
                    if is_comparable(inst.relation, x, y)
                    and (not local or inst.d(x, y) < inst.epsilon))
        assert res.verdict == holds
        assert res.verdict == (t <= inst.k + 1e-12)
        if not res.verdict:
            x, y = res.witness
            assert inst.d(inst.f(x), inst.f(y)) > inst.k * inst.d(x, y) + 1e-12
    if check_global_contraction_on_comparables(inst).verdict:
        assert check_local_contraction_on_comparables(inst).verdict


@settings(max_examples=150, deadline=None)
@given(instances)
def test_classification_matches_brute_force(params):
    inst = random_instance(params)
    assert classify_monotonicity(inst.relation, inst.map).kind is brute_class(inst.relation, inst.map.image)
    if params.map_mode == "monotone-random":
        assert classify_monotonicity(inst.relation, inst.map).kind in (
            MonotonicityKind.PRESERVING, MonotonicityKind.BOTH)


@settings(max_examples=100, deadline=None)
@given(instances, st.randoms(use_true_random=False))
def test_classification_invariant_under_relabeling(params, rnd):
    inst = random_instance(params)
    n = inst.n
    perm = list(range(n))
    rnd.shuffle(perm)
    inv = np.argsort(perm)
    holds = inst.relation.holds[np.ix_(inv, inv)]
    image = tuple(perm[inst.map.image[inv[i]]] for i in range(n))
    moved = classify_monotonicity(Relation(holds), SelfMapTable(image))
    assert moved.kind is classify_monotonicity(inst.relation, inst.map).kind


@settings(max_examples=150, deadline=None)
@given(instances)
def test_preserving_orbit_climbs(params):
    inst = random_instance(params)
    kind = classify_monotonicity(inst.relation, inst.map).kind
    if kind not in (MonotonicityKind.PRESERVING, MonotonicityKind.BOTH):
        return
    if not inst.le(inst.x0, inst.f(inst.x0)):
        return
    its = iterate(inst).iterates
    for a, b in zip(its, its[1:]):
        assert inst.le(a, b)
