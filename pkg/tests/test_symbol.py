import json

import numpy as np
import pytest

from qwcat.errors import DimensionMismatch, NonUnitaryError, SchemaError
from qwcat.registry import REGISTRY, coin, grover3, parse_number, resolve
from qwcat.symbol import (
    LaurentPoly,
    Regularity,
    classify_regularity,
    direct_sum,
    dump_walk,
    evaluate_symbol,
    evaluate_symbol_derivative,
    make_walk,
    parse_walk,
    propagation_radius,
    unitarity_defect,
    walk_to_document,
)

from conftest import assert_multiset_close


def coin_doc(a=0.6, b=0.8):
    t = lambda s, c: {"shift": [s], "re": c, "im": 0.0}
    return {"name": "coin", "d": 1, "n": 2, "entries": [[[t(1, a)], [t(1, -b)]], [[t(0, b)], [t(0, a)]]]}


def test_parse_coin():
    w = parse_walk(coin_doc())
    assert (w.d, w.n) == (1, 2)
    assert w == coin(0.6)


def test_parse_identity():
    w = parse_walk({"d": 1, "n": 1, "entries": [[[{"shift": [0], "re": 1}]]]})
    assert unitarity_defect(w)[0] == 0.0


def test_scaled_shift_is_rejected():
    t = [{"shift": [1], "re": 2.0, "im": 0.0}]
    doc = {"d": 1, "n": 2, "entries": [[t, []], [[], t]]}
    with pytest.raises(NonUnitaryError) as err:
        parse_walk(doc)
    assert err.value.defect > 1 and len(err.value.worst_k) == 1


def test_literal_realizable_matrix_is_not_unitary():
    a, b = 0.6, 0.8
    with pytest.raises(NonUnitaryError):
        make_walk([[{-1: a}, {-1: -b}], [{1: b}, {1: -a}]])


@pytest.mark.parametrize(
    "doc",
    [
        "{not json",
        [],
        {"d": 1, "n": 1},
        {"d": 0, "n": 1, "entries": [[[]]]},
        {"d": 1, "n": 2, "entries": [[[]]]},
        {"d": 1, "n": 1, "entries": [[[{"shift": [0, 1], "re": 1}]]]},
        {"d": 1, "n": 1, "entries": [[[{"shift": [0.5], "re": 1}]]]},
        {"d": 1, "n": 1, "entries": [[[{"shift": [0]}]]]},
        {"d": 1, "n": 1, "entries": [[[{"shift": [0], "re": "1"}]]]},
        {"d": 1, "n": 1, "entries": [[[{"shift": [0], "re": True}]]]},
    ],
)
def test_schema_errors(doc):
    with pytest.raises(SchemaError):
        parse_walk(json.dumps(doc) if not isinstance(doc, str) else doc)


def test_symbol_at_zero():
    np.testing.assert_allclose(evaluate_symbol(coin(0.6), 0.0), [[0.6, -0.8], [0.8, 0.6]], atol=1e-15)
    g = np.array([[1, -2, -2], [-2, 1, -2], [-2, -2, 1]]) / 3
    np.testing.assert_allclose(evaluate_symbol(grover3(), 0.0), g, atol=1e-15)


def test_symbol_convention():
    # S moves support by +1 and contributes exp(+ik)
    w = resolve("@shift")
    assert evaluate_symbol(w, 0.3)[0, 0] == pytest.approx(np.exp(0.3j))


@pytest.mark.parametrize("name", sorted(REGISTRY))
def test_registry_walks_validate(name):
    w = REGISTRY[name]()
    assert unitarity_defect(w)[0] <= 1e-10


@pytest.mark.parametrize("name", sorted(REGISTRY))
def test_symbol_is_periodic(name):
    w = REGISTRY[name]()
    rng = np.random.default_rng(1)
    k = rng.uniform(-4, 4, size=(16, w.d)) if w.d > 1 else rng.uniform(-4, 4, 16)
    np.testing.assert_allclose(evaluate_symbol(w, k), evaluate_symbol(w, k + 2 * np.pi), atol=4e-15)


def test_symbol_derivative_matches_finite_differences():
    w = resolve("@s3-walk")
    k, h = 0.7, 1e-6
    fd = (evaluate_symbol(w, k + h) - evaluate_symbol(w, k - h)) / (2 * h)
    np.testing.assert_allclose(evaluate_symbol_derivative(w, k), fd, atol=1e-8)


def test_two_dimensional_evaluation_shape():
    w = resolve("@grover2d")
    assert evaluate_symbol(w, np.zeros((5, 3, 2))).shape == (5, 3, 2, 2)
    with pytest.raises(DimensionMismatch):
        evaluate_symbol(w, np.zeros(3))


@pytest.mark.parametrize("ref,radius", [("@coin", 1), ("@s3-walk", 3), ("@identity", 0), ("@grover4", 3)])
def test_propagation_radius(ref, radius):
    w = resolve(ref)
    assert propagation_radius(w) == radius
    reg = classify_regularity(w)
    assert reg.kind is Regularity.FINITE_PROPAGATION and reg.radius == radius
    assert reg.analytic and reg.smooth and reg.uniform
    assert reg.implies(Regularity.ANALYTIC)


def test_regularity_string():
    assert str(classify_regularity(coin())) == "FinitePropagation(R=1)"


def test_direct_sum_layout():
    s = resolve("@shift")
    sinv = make_walk([[{-1: 1}]])
    w = direct_sum(s, sinv)
    k = 0.4
    np.testing.assert_array_equal(evaluate_symbol(w, k), np.diag([np.exp(1j * k), np.exp(-1j * k)]))
    assert propagation_radius(direct_sum(resolve("@identity"), resolve("@s3-walk"))) == 3


def test_direct_sum_doubles_multiplicity():
    g = grover3()
    w = direct_sum(g, g)
    for k in np.linspace(0, 2 * np.pi, 9):
        # independent route: roots of the characteristic polynomial
        roots = np.roots(np.poly(evaluate_symbol(g, k)))
        assert_multiset_close(np.linalg.eigvals(evaluate_symbol(w, k)), np.concatenate([roots, roots]), 1e-6)


def test_direct_sum_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        direct_sum(coin(), resolve("@grover2d"))


def test_round_trip_documents():
    for name in REGISTRY:
        w = REGISTRY[name]()
        again = parse_walk(dump_walk(w))
        assert again == w
        assert walk_to_document(again) == walk_to_document(w)


def test_laurent_poly_merges_and_drops():
    p = LaurentPoly.from_pairs([((1,), 0.5), ((1,), 0.5), ((0,), 0.0), ((-2,), 1j)])
    assert p.as_dict() == {(-2,): 1j, (1,): 1.0}
    assert p.radius == 2 and not p.is_constant


def test_parse_number():
    assert parse_number("1/sqrt(2)") == pytest.approx(2**-0.5)
    assert parse_number("2*pi") == pytest.approx(2 * np.pi)
    with pytest.raises(SchemaError):
        parse_number("__import__('os')")
    with pytest.raises(SchemaError):
        resolve("@nope")
