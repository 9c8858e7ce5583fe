from __future__ import annotations

import numpy as np
import pytest

from superaut import autgroups as ag
from superaut.cartan import build
from superaut.errors import (ConfigurationError, DomainError, ParityError, ReconstructionError,
                             SingularityError)
from superaut.superalgebra import Parameters, SuperElement, obasis
from superaut.witt import Derivation, OMatrix, bracket, wbasis

P = Parameters(5, 2, (1, 1))
SHO = build("SHO", P)


def M(alpha, u=(), c=1):
    return SuperElement.monomial(P, alpha, u, c)


def x(i):
    return SuperElement.x(P, i)


def D(r, f=None):
    return Derivation.from_terms(P, {r: SuperElement.one(P) if f is None else f})


@pytest.fixture(scope="module")
def sigma():
    return ag.make_automorphism(P, [x(1) + M((0, 2)), x(2), x(3), x(4)])


def test_identity(sigma):
    idn = ag.identity(P)
    assert idn.is_identity() and ag.depth_O(idn) is None
    assert ag.invert(idn) == idn
    assert idn(M((2, 1), (3,))) == M((2, 1), (3,))


def test_validation_errors():
    with pytest.raises(ParityError):
        ag.make_automorphism(P, [x(3), x(2), x(1), x(4)])
    with pytest.raises(SingularityError):
        ag.make_automorphism(P, [M((2, 0)), x(2), x(3), x(4)])
    with pytest.raises(DomainError):
        ag.make_automorphism(P, [x(1) + SuperElement.one(P), x(2), x(3), x(4)])
    P21 = Parameters(5, 2, (2, 1))
    with pytest.raises(ConfigurationError):
        ag.make_automorphism(P21, [SuperElement.x(P21, i) for i in P21.indices])


def test_apply_examples(sigma):
    assert ag.depth_O(sigma) == 1
    assert sigma(M((2, 0))) == M((2, 0)) + M((1, 2)) + 3 * M((0, 4))
    assert sigma(x(3) * x(4)) == x(3) * x(4)
    assert not ag.is_homogeneous_O(sigma)


def test_invert_example(sigma):
    inv = ag.invert(sigma)
    assert inv.images[0] == x(1) - M((0, 2))
    assert ag.compose(inv, sigma).is_identity() and ag.compose(sigma, inv).is_identity()


def test_conjugate_examples(sigma):
    assert ag.conjugate(sigma, D(2)) == D(2) - D(1, x(2))
    assert ag.conjugate(sigma, D(1)) == D(1)
    assert ag.conjugate(ag.identity(P), D(3, x(1))) == D(3, x(1))


def test_conjugation_is_bracket_automorphism():
    s = ag.sample_automorphism(P, 4, 1)
    W = wbasis(P)
    rng = np.random.default_rng(0)
    for _ in range(10):
        a, b = rng.integers(0, W.dim, 2)
        A, B = W.derivation(np.eye(W.dim, dtype=np.int64)[a]), W.derivation(np.eye(W.dim, dtype=np.int64)[b])
        assert ag.conjugate(s, bracket(A, B)) == bracket(ag.conjugate(s, A), ag.conjugate(s, B))


def test_apply_is_multiplicative():
    s = ag.sample_automorphism(P, 9, 2)
    O = obasis(P)
    rng = np.random.default_rng(3)
    for _ in range(20):
        f, g = (O.basis_element(int(i)) for i in rng.integers(0, O.dim, 2))
        assert s(f * g) == s(f) * s(g)


def test_linear_depth_and_homogeneity():
    L = np.eye(4, dtype=np.int64)
    L[0, 1] = 2
    s = ag.linear_automorphism(P, L)
    assert ag.depth_O(s) == 0 and ag.is_homogeneous_O(s)


def test_invert_over_O_examples():
    I = OMatrix.identity(P)
    assert ag.invert_over_O(I) == I
    rows = [[SuperElement.zero(P)] * 4 for _ in range(4)]
    for i in range(4):
        rows[i][i] = SuperElement.one(P)
    rows[0][1] = x(1)
    A = OMatrix(P, rows)
    rows[0][1] = -x(1)
    assert ag.invert_over_O(A) == OMatrix(P, rows)


def test_invert_over_O_random():
    rng = np.random.default_rng(11)
    O = obasis(P)
    for _ in range(3):
        arr = rng.integers(0, 5, (4, 4, O.dim)) * (rng.random((4, 4, O.dim)) < 0.05)
        arr[:, :, O.one_index] = ag._random_gl(rng, 4, 5)
        A = ag._from_dense(P, arr)
        assert A @ ag.invert_over_O(A) == OMatrix.identity(P)
    bad = np.zeros((4, 4, O.dim), dtype=np.int64)
    with pytest.raises(SingularityError):
        ag.invert_over_O(ag._from_dense(P, bad))


def test_sampler_contract():
    s0 = ag.sample_automorphism(P, 0, 0)
    assert ag.depth_O(s0) == 0
    s1 = ag.sample_automorphism(P, 1, 1, SHO)
    assert ag.depth_O(s1) == 1 and ag.is_admissible(s1, SHO)
    assert ag.sample_automorphism(P, 1, 1, SHO) == s1
    assert ag.OAutomorphism.from_json(s1.to_json()) == s1


def test_generic_linear_substitution_not_admissible():
    rng = np.random.default_rng(2)
    results = [ag.is_admissible(ag.random_linear(P, rng, pairing=False), SHO) for _ in range(10)]
    assert not all(results)


def test_phi_group_laws():
    s = ag.sample_automorphism(P, 21, 1, SHO)
    t = ag.sample_automorphism(P, 22, 0, SHO)
    I = ag.GAutomorphism.identity(SHO)
    assert ag.phi(ag.identity(P), SHO) == I
    assert ag.phi(s, SHO) @ ag.phi(ag.invert(s), SHO) == I
    assert ag.phi(ag.compose(s, t), SHO) == ag.phi(s, SHO) @ ag.phi(t, SHO)
    rng = np.random.default_rng(7)
    bad = next(r for r in (ag.random_linear(P, rng, pairing=False) for _ in range(20))
               if not ag.is_admissible(r, SHO))
    with pytest.raises(DomainError):
        ag.phi(bad, SHO)


def test_depth_one_phi_raises_filtration():
    s = ag.sample_automorphism(P, 5, 1, SHO)
    f = ag.phi(s, SHO)
    deg = SHO.basis_degrees
    diff = (f.matrix - np.eye(SHO.dim, dtype=np.int64)) % 5
    rows, cols = np.nonzero(diff)
    assert np.all(deg[rows] >= deg[cols] + 1)
    assert ag.depth_g(f) == 1


@pytest.mark.parametrize("tag", ["SHO'", "SHO-bar", "SHO"])
def test_reconstruction_roundtrip(tag):
    g = build(tag, P)
    for seed in range(8):
        s = ag.sample_automorphism(P, 100 + seed, seed % 4, g)
        f = ag.phi(s, g)
        assert ag.reconstruct_sigma(f) == s
        assert ag.depth_O(s) == ag.depth_g(f)
        assert ag.is_homogeneous_O(s) == ag.is_homogeneous_g(f)
    assert ag.reconstruct_sigma(ag.GAutomorphism.identity(g)).is_identity()


def test_homogeneous_reconstruction():
    s = ag.sample_automorphism(P, 3, 0, SHO)
    r = ag.reconstruct_sigma(ag.phi(s, SHO))
    assert ag.is_homogeneous_O(r)


def test_reconstruct_rejects_non_automorphisms():
    s = ag.sample_automorphism(P, 8, 2, SHO)
    mat = ag.phi(s, SHO).matrix.copy()
    mat[7, 5] = (mat[7, 5] + 1) % 5
    with pytest.raises(ReconstructionError):
        ag.reconstruct_sigma(mat, SHO)
    with pytest.raises(ReconstructionError):
        ag.reconstruct_sigma(np.zeros((SHO.dim, SHO.dim), dtype=np.int64), SHO)


def test_uniqueness_from_minus_one():
    for seed in range(4):
        f = ag.phi(ag.sample_automorphism(P, 40 + seed, seed % 3, SHO), SHO)
        assert ag.extend_from_minus_one(f) == f


def test_transport_matrix_scalar_part_invertible():
    from superaut.gf import rank
    O = obasis(P)
    f = ag.phi(ag.sample_automorphism(P, 12, 1, SHO), SHO)
    A = ag.basis_transport_matrix(f)
    assert rank(A[:, :, O.one_index], 5) == 4


def test_commutator_depth():
    s = ag.sample_automorphism(P, 1, 1, SHO)
    t = ag.sample_automorphism(P, 2, 2, SHO)
    c = ag.commutator(s, t)
    assert ag.in_aut_i(ag.depth_O(c), 3)


def test_g_automorphism_check_reports_location():
    f = ag.phi(ag.sample_automorphism(P, 6, 1, SHO), SHO)
    assert ag.check_g_automorphism(SHO, f.matrix)["ok"]
    bad = f.matrix.copy()
    bad[3, 0] = (bad[3, 0] + 1) % 5
    res = ag.check_g_automorphism(SHO, bad)
    assert not res["ok"]
    with pytest.raises(DomainError):
        ag.g_automorphism(SHO, bad)


def test_extend_rejects_non_automorphic_minus_one_data():
    # sending every D_i to D_1 leaves the degree -1 data singular
    mat = np.zeros((SHO.dim, SHO.dim), dtype=np.int64)
    mat[0, :4] = 1
    with pytest.raises(DomainError):
        ag.extend_from_minus_one(ag.GAutomorphism(SHO, mat))
