from __future__ import annotations

import numpy as np
from hypothesis import given, strategies as st

from superaut.superalgebra import Parameters, SuperElement, obasis
from superaut.witt import (Derivation, OMatrix, bracket, derived, divergence, evaluate, full_space,
                           span, wbasis)

P = Parameters(5, 2, (1, 1))
W = wbasis(P)
O = obasis(P)


def M(alpha, u=(), c=1):
    return SuperElement.monomial(P, alpha, u, c)


def x(i):
    return SuperElement.x(P, i)


def D(r, f=None):
    return Derivation.from_terms(P, {r: SuperElement.one(P) if f is None else f})


def test_bracket_examples():
    assert bracket(D(1), D(2, M((2, 0)))) == D(2, x(1))
    assert bracket(D(2, x(1)), D(1, x(2))) == D(1, x(1)) - D(2, x(2))
    assert bracket(D(3), D(3)) == Derivation.zero(P)


def test_divergence_examples():
    assert divergence(D(1, x(1))) == SuperElement.one(P)
    assert divergence(D(3, x(3))) == SuperElement.one(P) * 4
    assert divergence(D(1, x(2))) == SuperElement.zero(P)


def test_evaluate_examples():
    assert evaluate(D(1), M((2, 0))) == x(1)
    assert evaluate(D(1, x(2)), x(1)) == x(2)
    assert evaluate(D(3), M((0, 0), (3, 4))) == x(4)


def test_derived_example_and_dims():
    S = span(W, [D(1), D(1, x(1))])
    assert derived(S).dim == 1 and derived(S).contains(D(1))
    full = full_space(W)
    assert full.dim == 400 == 2 * P.m * O.dim
    assert full.dims() == {-1: 4, 0: 16, 1: 32, 2: 48, 3: 64, 4: 72, 5: 64, 6: 48, 7: 32, 8: 16, 9: 4}


def test_vector_roundtrip():
    E = D(2, 3 * M((1, 1), (4,))) + D(3, x(1))
    assert W.derivation(W.vector(E)) == E


@st.composite
def derivations(draw, homogeneous=True):
    par = draw(st.integers(0, 1))
    idx = draw(st.lists(st.integers(0, W.dim - 1), min_size=1, max_size=4))
    vec = np.zeros(W.dim, dtype=np.int64)
    for i in idx:
        if homogeneous and W.w_par[i] != par:
            continue
        vec[i] = draw(st.integers(1, 4))
    return W.derivation(vec)


def _par(E):
    return E.parity if E else 0


@given(derivations(), derivations(), st.integers(0, O.dim - 1))
def test_bracket_is_supercommutator(A, B, f_idx):
    f = O.basis_element(f_idx)
    sign = -1 if _par(A) and _par(B) else 1
    assert evaluate(bracket(A, B), f) == evaluate(A, evaluate(B, f)) - sign * evaluate(B, evaluate(A, f))


@given(derivations(), derivations())
def test_super_skew(A, B):
    sign = -1 if _par(A) and _par(B) else 1
    assert bracket(A, B) == -sign * bracket(B, A)


@given(derivations(), derivations(), derivations())
def test_super_jacobi(A, B, C):
    sign = -1 if _par(A) and _par(B) else 1
    assert bracket(A, bracket(B, C)) == bracket(bracket(A, B), C) + sign * bracket(B, bracket(A, C))


@given(derivations(), derivations())
def test_divergence_superderivation(A, B):
    sign = -1 if _par(A) and _par(B) else 1
    assert divergence(bracket(A, B)) == evaluate(A, divergence(B)) - sign * evaluate(B, divergence(A))


def test_dense_bracket_paths_agree():
    rng = np.random.default_rng(1)
    X = rng.integers(0, 5, (12, W.dim)) * (rng.random((12, W.dim)) < 0.05)
    Y = rng.integers(0, 5, (12, W.dim)) * (rng.random((12, W.dim)) < 0.05)
    rows = W.bracket_rows(X, Y)
    for k in range(12):
        ref = W.vector(bracket(W.derivation(X[k]), W.derivation(Y[k])))
        assert (rows[k] == ref).all()
        assert (W.bracket_vectors(X[k], Y[k]) == ref).all()
        assert (W.ad_matrix(X[k]) @ Y[k] % 5 == ref).all()
        assert (W.ad_rows(X[k], Y[k:k + 1])[0] == ref).all()


def test_ad_rows_matches_row_brackets():
    rng = np.random.default_rng(2)
    Y = rng.integers(0, 5, (20, W.dim)) * (rng.random((20, W.dim)) < 0.1)
    for dens in (0.02, 0.3):
        x = rng.integers(0, 5, W.dim) * (rng.random(W.dim) < dens)
        assert (W.ad_rows(x, Y) == W.bracket_rows(np.tile(x, (20, 1)), Y)).all()


def test_multiplication_matrices():
    O = W.O
    rng = np.random.default_rng(3)
    f, g = rng.integers(0, 5, O.dim), rng.integers(0, 5, O.dim)
    assert (O.left_mult_matrix(f) @ g % 5 == O.mul(f, g)).all()
    assert (O.right_mult_matrix(f) @ g % 5 == O.mul(g, f)).all()


def test_omatrix_projection_basis_of_minus_one():
    # an O-basis of W given by D_i + (higher terms); the scalar part is an F-basis of W_[-1]
    E = [D(1) + D(2, x(1)), D(2) + D(3, M((0, 0), (3,))), D(3) + D(1, x(4)), D(4)]
    A = OMatrix.of_derivations(E)
    from superaut.gf import rank
    assert rank(A.pr0(), 5) == 4
    assert (A.pr0() == np.eye(4, dtype=np.int64)).all()
