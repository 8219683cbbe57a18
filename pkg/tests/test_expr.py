import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from relfix import errors
from relfix.errors import InvalidInput, MapEvalError, ParseError
from relfix.expr import (
    BinOp,
    Call,
    Const,
    Neg,
    RealMap,
    Var,
    eval_map,
    evaluate,
    lipschitz_probe,
    parse_expr,
    serialize,
)

from expr_cases import MALFORMED, POINT, VALID


def test_affine_tree_shape():
    assert parse_expr("0.5*x1 + 0.25", 1) == BinOp("+", BinOp("*", Const(0.5), Var(1)), Const(0.25))


def test_min_call_parses():
    assert parse_expr("min(x1, x2)/2", 2) == BinOp("/", Call("min", (Var(1), Var(2))), Const(2.0))


@pytest.mark.parametrize("text,dim,expected", VALID)
def test_fixture_round_trip_and_value(text, dim, expected):
    tree = parse_expr(text, dim)
    assert parse_expr(serialize(tree), dim) == tree
    assert evaluate(tree, POINT[:dim]) == pytest.approx(expected, abs=1e-12, rel=0)


@pytest.mark.parametrize("text,dim,offset,kind", MALFORMED)
def test_malformed_offsets(text, dim, offset, kind):
    with pytest.raises(ParseError) as info:
        parse_expr(text, dim)
    assert info.value.position == offset
    assert type(info.value) is getattr(errors, kind)


def test_offsets_are_bytes():
    with pytest.raises(ParseError) as info:
        parse_expr("1 + é", 1)
    assert info.value.position == 4
    with pytest.raises(ParseError) as info:
        parse_expr("éé + x2", 1)
    assert info.value.position == 0


def test_precedence():
    assert parse_expr("2*x1+1", 1) == parse_expr("(2*x1)+1", 1)
    assert evaluate(parse_expr("2^2^3", 1), (0.0,)) == 256.0


def test_wrong_arity():
    with pytest.raises(ParseError):
        parse_expr("min(x1)", 1)
    with pytest.raises(ParseError):
        parse_expr("sin(x1, x1)", 1)


def test_eval_map_examples():
    assert eval_map(RealMap.from_strings(["0.5*x1+0.25"]), (1.0,)) == (0.75,)
    ident = RealMap.from_strings(["x1", "x2"])
    assert eval_map(ident, (3.5, -2.0)) == (3.5, -2.0)
    with pytest.raises(MapEvalError) as info:
        eval_map(RealMap.from_strings(["x1", "1/x2"]), (1.0, 0.0))
    assert info.value.component == 1


@pytest.mark.parametrize("text,point", [("sqrt(x1)", (-1.0,)), ("exp(x1)", (1000.0,)),
                                        ("x1^0.5", (-4.0,)), ("x1^-1", (0.0,)), ("x1*x1", (1e200,))])
def test_domain_faults(text, point):
    with pytest.raises(MapEvalError):
        eval_map(RealMap.from_strings([text]), point)


def test_map_dimension_checks():
    with pytest.raises(InvalidInput):
        eval_map(RealMap.from_strings(["x1", "x2"]), (1.0,))


def test_lipschitz_probe_examples():
    half = RealMap.from_strings(["x1/2"])
    assert lipschitz_probe(half, [(0, 1)], 1000, seed=3) == pytest.approx(0.5, abs=1e-12)
    est = lipschitz_probe(RealMap.from_strings(["sin(x1)"]), [(0, 0.1)], 1000, seed=3)
    assert 0.995 <= est <= 1.0
    assert lipschitz_probe(RealMap.from_strings(["7"]), [(0, 1)], 200, seed=3) == 0.0


# random trees for round-trip stability
leaves = st.one_of(
    st.floats(0, 1e6, allow_nan=False, allow_infinity=False).map(Const),
    st.integers(1, 3).map(Var),
)


def extend(children):
    return st.one_of(
        children.map(Neg),
        st.builds(BinOp, st.sampled_from("+-*/^"), children, children),
        st.builds(lambda f, a: Call(f, (a,)), st.sampled_from(["abs", "sqrt", "exp", "sin", "cos"]), children),
        st.builds(lambda f, a, b: Call(f, (a, b)), st.sampled_from(["min", "max"]), children, children),
    )


trees = st.recursive(leaves, extend, max_leaves=12)


@settings(max_examples=300)
@given(trees)
def test_serialize_round_trip(tree):
    text = serialize(tree)
    again = parse_expr(text, 3)
    assert again == tree
    assert serialize(again) == text


@settings(max_examples=200)
@given(trees, st.tuples(*[st.floats(-3, 3)] * 3))
def test_evaluation_is_deterministic(tree, x):
    try:
        a = evaluate(tree, x)
    except MapEvalError:
        with pytest.raises(MapEvalError):
            evaluate(tree, x)
        return
    b = evaluate(parse_expr(serialize(tree), 3), x)
    assert math.isfinite(a) and np.float64(a).tobytes() == np.float64(b).tobytes()
