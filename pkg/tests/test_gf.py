from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, strategies as st

from superaut.gf import (EchelonBasis, inverse, is_prime, lucas_binomial, matmul_mod, nullspace,
                         rank, rref, solve)
from math import comb


def test_is_prime():
    assert [n for n in range(20) if is_prime(n)] == [2, 3, 5, 7, 11, 13, 17, 19]


@pytest.mark.parametrize("n,k", [(6, 1), (10, 5), (24, 7), (25, 5), (4, 2)])
def test_lucas_matches_comb(n, k):
    assert lucas_binomial(n, k, 5) == comb(n, k) % 5


@given(st.integers(1, 12), st.integers(1, 12), st.integers(1, 12), st.integers(0, 2 ** 32 - 1))
def test_matmul_mod_matches_python(n, k, l, seed):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 5, (n, k))
    b = rng.integers(0, 5, (k, l))
    ref = [[sum(int(a[i, t]) * int(b[t, j]) for t in range(k)) % 5 for j in range(l)] for i in range(n)]
    assert matmul_mod(a, b, 5).tolist() == ref


def test_rref_small():
    R, piv = rref(np.array([[2, 4, 1], [1, 2, 4]]), 5)
    assert piv == [0, 2]
    assert R.tolist() == [[1, 2, 0], [0, 0, 1]]


@given(st.integers(0, 2 ** 32 - 1))
def test_inverse_and_nullspace(seed):
    rng = np.random.default_rng(seed)
    a = rng.integers(0, 7, (5, 5))
    if rank(a, 7) == 5:
        assert (matmul_mod(a, inverse(a, 7), 7) == np.eye(5, dtype=np.int64)).all()
    ns = nullspace(a, 7)
    assert ns.shape[0] == 5 - rank(a, 7)
    if ns.size:
        assert not matmul_mod(a, ns.T, 7).any()


def test_solve():
    a = np.array([[1, 1], [0, 1]])
    x = solve(a, np.array([3, 2]), 5)
    assert x.tolist() == [1, 2]
    assert solve(np.array([[1, 1], [1, 1]]), np.array([0, 1]), 5) is None


def test_echelon_basis_membership():
    E = EchelonBasis(3, 5)
    E.insert(np.array([[1, 2, 0], [2, 4, 0]]))
    assert E.rank == 1
    assert E.contains(np.array([[3, 1, 0], [0, 0, 1]])).tolist() == [True, False]
