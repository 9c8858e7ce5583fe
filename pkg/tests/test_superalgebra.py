from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from superaut.errors import ConfigurationError, ParityError
from superaut.superalgebra import (Parameters, SuperElement, derive, grade, in_filtration,
                                   multiply, obasis)

from oracles import derive as ref_derive, from_element, mul as ref_mul

P = Parameters(5, 2, (1, 1))
P21 = Parameters(5, 2, (2, 1))
O = obasis(P)


def M(alpha, u=(), c=1, params=P):
    return SuperElement.monomial(params, alpha, u, c)


def x(i, params=P):
    return SuperElement.x(params, i)


@pytest.mark.parametrize("args", [(2, 2, (1, 1)), (3, 2, (1, 1)), (5, 1, (1,)), (7, 2, (1,)),
                                  (5, 2, (0, 1)), (9, 2, (1, 1))])
def test_bad_parameters(args):
    with pytest.raises(ConfigurationError):
        Parameters(*args)


def test_parameter_derived_quantities():
    assert P.pi == (4, 4) and P.xi == 10
    assert P21.pi == (24, 4) and P21.xi == 30
    assert [P.prime(i) for i in P.indices] == [3, 4, 1, 2]
    assert [P.mu(i) for i in P.indices] == [0, 0, 1, 1]


@pytest.mark.parametrize("params", [P, P21, Parameters(5, 3, (1, 1, 1))])
def test_dim_O(params):
    assert obasis(params).dim == params.dim_O == 2 ** params.m * int(np.prod([params.p ** t for t in params.t]))


def test_product_examples():
    assert x(1) * x(1) == M((2, 0), c=2)
    assert x(3) * x(3) == SuperElement.zero(P)
    assert x(4) * x(3) == M((0, 0), (3, 4), c=-1)
    assert M((4, 0)) * x(1) == SuperElement.zero(P)
    # with t_1 = 2 the same product survives: C(5,1) = 5 = 0 mod 5 still kills it
    assert M((4, 0), params=P21) * x(1, P21) == SuperElement.zero(P21)
    # but x^(5) x^(1) = C(6,1) x^(6) = x^(6)
    assert M((5, 0), params=P21) * x(1, P21) == M((6, 0), params=P21)


def test_derive_examples():
    assert derive(1, M((3, 0))) == M((2, 0))
    assert derive(4, M((0, 0), (3, 4))) == -x(3)
    assert derive(2, x(3)) == SuperElement.zero(P)
    assert derive(1, M((6, 0), params=P21)) == M((5, 0), params=P21)


def test_grade_examples():
    f = x(1) + M((2, 0))
    assert grade(f) == {1: x(1), 2: M((2, 0))}
    one = SuperElement.one(P)
    assert grade(one) == {0: one} and one.parity == 0
    g = M((0, 0), (3, 4))
    assert grade(g) == {2: g} and g.parity == 0
    assert in_filtration(f, 1) and not in_filtration(f, 2)
    with pytest.raises(ParityError):
        (x(1) + x(3)).parity


def test_json_roundtrip():
    f = 3 * M((1, 2), (4,)) + x(2)
    assert SuperElement.from_json(P, f.to_json()) == f


# random elements from the monomial basis

def elements(params, max_terms=4, homogeneous=True):
    Ob = obasis(params)

    @st.composite
    def build(draw):
        par = draw(st.integers(0, 1))
        idx = draw(st.lists(st.integers(0, Ob.dim - 1), min_size=1, max_size=max_terms))
        out = SuperElement.zero(params)
        for i in idx:
            mono = Ob.monomials[i]
            if homogeneous and mono.parity != par:
                continue
            out = out + SuperElement(params, {mono: draw(st.integers(1, params.p - 1))})
        return out
    return build()


@given(elements(P), elements(P))
def test_product_matches_reference(f, g):
    assert from_element(multiply(f, g)) == ref_mul(P, from_element(f), from_element(g))


@given(elements(P21), elements(P21))
def test_product_matches_reference_t21(f, g):
    assert from_element(multiply(f, g)) == ref_mul(P21, from_element(f), from_element(g))


@given(elements(P), st.integers(1, 4))
def test_derive_matches_reference(f, r):
    assert from_element(derive(r, f)) == ref_derive(P, r, from_element(f))


@given(elements(P), elements(P))
def test_supercommutative(f, g):
    sign = -1 if f.parity and g.parity else 1
    assert f * g == sign * (g * f)


@given(elements(P, 3, False), elements(P, 3, False), elements(P, 3, False))
def test_associative(f, g, h):
    assert (f * g) * h == f * (g * h)


@given(elements(P), elements(P), st.integers(1, 4))
def test_signed_leibniz(f, g, r):
    sign = -1 if P.mu(r) and f.parity else 1
    assert derive(r, f * g) == derive(r, f) * g + sign * (f * derive(r, g))


def test_supercommutative_exhaustive_on_basis():
    for a in range(O.dim):
        fa = O.basis_element(a)
        for b in range(O.dim):
            fb = O.basis_element(b)
            sign = -1 if fa.parity and fb.parity else 1
            assert O.vector(fa * fb).tolist() == ((sign * O.vector(fb * fa)) % 5).tolist()


def test_dense_layer_matches_sparse():
    rng = np.random.default_rng(0)
    for _ in range(30):
        u, v = rng.integers(0, 5, O.dim), rng.integers(0, 5, O.dim)
        assert (O.mul(u, v) == O.vector(O.element(u) * O.element(v))).all()
        r = int(rng.integers(1, 5))
        assert (O.derive(r, u) == O.vector(derive(r, O.element(u)))).all()
