import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from skewseries.ringcore import (RingError, Submodule, jac_power, kernel, make_ring, modular,
                                 quotient_divisors, solve)

PN = st.sampled_from([(2, 1), (2, 2), (3, 1), (3, 2), (5, 1)])


@st.composite
def matrices(draw, max_rows=3, max_cols=3):
    p, n = draw(PN)
    r = draw(st.integers(1, max_rows))
    c = draw(st.integers(1, max_cols))
    entries = draw(st.lists(st.integers(0, p ** n - 1), min_size=r * c, max_size=r * c))
    return np.array(entries, dtype=np.int64).reshape(r, c), p, n


def brute_span(rows, q):
    out = set()
    for coeffs in itertools.product(range(q), repeat=len(rows)):
        v = sum(c * r for c, r in zip(coeffs, rows)) % q if len(rows) else None
        out.add(tuple(v))
    return out


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_span_order_matches_enumeration(data):
    A, p, n = data
    q = p ** n
    M = Submodule.span(A, p, n, A.shape[1])
    elems = brute_span(list(A), q)
    assert len(elems) == p ** M.log_order()
    for v in elems:
        assert M.contains(np.array(v))


@settings(max_examples=60, deadline=None)
@given(matrices(), st.integers(0, 10 ** 6))
def test_span_is_canonical_under_row_operations(data, seed):
    A, p, n = data
    q = p ** n
    rng = np.random.default_rng(seed)
    # a unimodular change of generators: unit lower triangular
    L = np.tril(rng.integers(0, q, (A.shape[0], A.shape[0])), -1) + np.eye(A.shape[0], dtype=np.int64)
    B = L @ A % q
    M1, M2 = Submodule.span(A, p, n, A.shape[1]), Submodule.span(B, p, n, A.shape[1])
    assert np.array_equal(M1.basis, M2.basis)


@settings(max_examples=60, deadline=None)
@given(matrices())
def test_kernel_and_image_orders(data):
    A, p, n = data
    K = kernel(A, p, n)
    for v in K.basis:
        assert not (v @ A % p ** n).any()
    im = Submodule.span(A, p, n, A.shape[1])
    # first isomorphism theorem: |ker| * |im| = |source|
    assert K.log_order() + im.log_order() == A.shape[0] * n


@settings(max_examples=60, deadline=None)
@given(matrices(), st.integers(0, 10 ** 6))
def test_solve(data, seed):
    A, p, n = data
    q = p ** n
    x = np.random.default_rng(seed).integers(0, q, A.shape[0])
    y = solve(A, x @ A % q, p, n)
    assert y is not None and np.array_equal(y @ A % q, x @ A % q)


@settings(max_examples=40, deadline=None)
@given(matrices())
def test_quotient_divisors_multiply_to_index(data):
    A, p, n = data
    big = Submodule.span(A, p, n, A.shape[1])
    small = Submodule.span(A * p % p ** n, p, n, A.shape[1])
    divs = quotient_divisors(big, small)
    assert math.prod(divs) == p ** (big.log_order() - small.log_order())


def test_composite_modulus_rejected():
    with pytest.raises(RingError):
        modular(4, 1)


def test_unknown_ring_kind_rejected():
    with pytest.raises(RingError):
        make_ring({"kind": "matrix", "p": 3})


@pytest.mark.parametrize("spec", [
    {"kind": "modular", "p": 3, "p_precision": 3},
    {"kind": "truncated_poly", "p": 3, "N": 9},
    {"kind": "group_algebra", "p": 3, "group": "cyclic:9"},
    {"kind": "product", "p": 3, "copies": 2},
])
def test_ring_axioms_on_random_triples(spec):
    R = make_ring(spec)
    rng = np.random.default_rng(7)
    for _ in range(30):
        a, b, c = (rng.integers(0, R.q, R.rank) for _ in range(3))
        assert np.array_equal(R.mul(R.mul(a, b), c), R.mul(a, R.mul(b, c)))
        assert np.array_equal(R.mul(a, (b + c) % R.q), (R.mul(a, b) + R.mul(a, c)) % R.q)
        assert np.array_equal(R.mul(R.one, a), a % R.q)


def test_jacobson_powers_descend_to_zero():
    R = make_ring({"kind": "truncated_poly", "p": 3, "N": 9})
    orders = [jac_power(R, k).log_order() for k in range(11)]
    assert orders == [9, 8, 7, 6, 5, 4, 3, 2, 1, 0, 0]
    Z = modular(3, 4)
    assert [jac_power(Z, k).log_order() for k in range(6)] == [4, 3, 2, 1, 0, 0]


def test_units():
    R = make_ring({"kind": "group_algebra", "p": 3, "group": "cyclic:9"})
    h = R.basis(1)
    assert R.is_unit(h)
    assert not R.is_unit((h - R.one) % 3)
