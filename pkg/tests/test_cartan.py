from __future__ import annotations

import numpy as np
import pytest

from superaut.cartan import (build, normalize_tag, omega_element, t_h, transitivity_check,
                             verify_lemma11)
from superaut.errors import ConfigurationError
from superaut.gf import nullspace
from superaut.superalgebra import Parameters, SuperElement, obasis
from superaut.witt import Derivation, derived, divergence, full_space, span, wbasis

P = Parameters(5, 2, (1, 1))


def x(i):
    return SuperElement.x(P, i)


def D(r, f=None):
    return Derivation.from_terms(P, {r: SuperElement.one(P) if f is None else f})


def test_t_h_examples():
    assert t_h(x(1)) == D(3)
    assert t_h(x(3)) == -D(1)
    assert t_h(x(1) * x(2)) == D(3, x(2)) + D(4, x(1))


def test_tags():
    assert normalize_tag("sho-bar") == "SHO-bar"
    assert normalize_tag("SHO′") == "SHO'"
    with pytest.raises(ConfigurationError):
        normalize_tag("K")


def _sho_prime_dims_bruteforce(params):
    """dim of {T_H(a) : div T_H(a) = 0} per degree, from sparse t_h and divergence only."""
    O = obasis(params)
    out = {}
    for r in range(1, params.xi + 1):
        idx = [j for j, mono in enumerate(O.monomials) if mono.degree == r]
        if not idx:
            continue
        cols = [O.vector(divergence(t_h(O.basis_element(j)))) for j in idx]
        ker = nullspace(np.array(cols).T % params.p, params.p).shape[0]
        if ker:
            out[r - 2] = ker
    return out


def test_sho_prime_dims_match_bruteforce():
    assert build("SHO'", P).dims() == _sho_prime_dims_bruteforce(P)


def test_ho_dim_and_membership():
    HO = build("HO", P)
    assert HO.dim == obasis(P).dim - 1 == 99
    S = build("S'", P)
    assert S.contains(D(1, x(2)))
    assert build("SHO'", P).is_subspace_of(S) and build("SHO'", P).is_subspace_of(HO)


def test_sho_prime_is_s_cap_ho():
    O = obasis(P)
    g = build("SHO'", P)
    for j in range(O.dim):
        a = O.basis_element(j)
        T = t_h(a)
        assert g.contains(T) == (divergence(T) == SuperElement.zero(P))


def test_degree_ranges_and_codimension():
    bar, sho = build("SHO-bar", P), build("SHO", P)
    assert bar.degree_range() == (-1, P.xi - 4)
    assert sho.degree_range() == (-1, P.xi - 5)
    assert bar.dim - sho.dim == 1
    assert bar.contains(omega_element(P)) and not sho.contains(omega_element(P))


def test_derived_algebras_match_generic_route():
    W = wbasis(P)
    prime = build("SHO'", P)
    generic = derived(span(W, prime.basis_matrix))
    assert generic == build("SHO-bar", P)
    assert derived(span(W, generic.basis_matrix)) == build("SHO", P)


@pytest.mark.parametrize("tag", ["W", "SHO'", "SHO-bar", "SHO"])
def test_transitive(tag):
    g = build(tag, P) if tag != "W" else full_space(wbasis(P))
    assert transitivity_check(g)


def test_minus_one_part_is_full():
    for tag in ("SHO'", "SHO-bar", "SHO"):
        assert build(tag, P).dims()[-1] == 2 * P.m


def test_report_m3_all_items_pass():
    rep = verify_lemma11(Parameters(5, 3, (1, 1, 1)))
    status = {it["item"]: it["status"] for it in rep["items"]}
    assert status == {"1.1(1)": "recorded", "1.1(2)": "pass", "1.1(3)": "pass",
                      "1.1(4)": "pass", "1.1(5)": "pass"}
    assert rep["dims"]["SHO-bar"]["11"] == 1 and rep["dims"]["SHO'"]["11"] == 1


def test_top_degree_of_sho_prime_at_m2_has_extra_vector():
    # at m = 2 the degree xi - 4 equals the degree of T_H(x^(pi)), which is
    # divergence free, so SHO'_[xi-4] has dimension 2
    top = P.xi - 4
    pi_pot = SuperElement.monomial(P, P.pi)
    g = build("SHO'", P)
    assert g.contains(t_h(pi_pot)) and g.contains(omega_element(P))
    assert g.dims()[top] == 2
    assert build("SHO-bar", P).dims()[top] == 1
    rep = verify_lemma11(P)
    item5 = next(it for it in rep["items"] if it["item"] == "1.1(5)")
    assert item5["status"] == "fail" and item5["dims"] == {"SHO-bar": 1, "SHO'": 2}
