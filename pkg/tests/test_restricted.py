from __future__ import annotations

import numpy as np
import pytest

from superaut.cartan import build, t_h
from superaut.errors import NotSpecialError, ParityError
from superaut.restricted import (ad_partials_nilpotent, ad_power, is_restricted, omega_power,
                                 p_power, p_power_vector, piecewise_formula_check)
from superaut.superalgebra import Parameters, SuperElement, obasis
from superaut.witt import Derivation, evaluate, wbasis

P = Parameters(5, 2, (1, 1))
P21 = Parameters(5, 2, (2, 1))


def x(i, params=P):
    return SuperElement.x(params, i)


def D(r, f=None, params=P):
    return Derivation.from_terms(params, {r: SuperElement.one(params) if f is None else f})


def _compose_power(E, f, n):
    for _ in range(n):
        f = evaluate(E, f)
    return f


def test_p_power_examples():
    assert p_power(D(1)) == Derivation.zero(P)
    E = D(3, x(3)) - D(1, x(1))
    assert p_power(E) == E
    with pytest.raises(ParityError):
        p_power(D(3))


def test_p_power_agrees_with_composition_on_all_of_O():
    O = obasis(P)
    rng = np.random.default_rng(5)
    W = wbasis(P)
    even = np.flatnonzero(W.w_par == 0)
    for _ in range(5):
        vec = np.zeros(W.dim, dtype=np.int64)
        pick = rng.choice(even, 3, replace=False)
        vec[pick] = rng.integers(1, 5, 3)
        E = W.derivation(vec)
        Ep = p_power(E)
        for j in range(0, O.dim, 7):
            f = O.basis_element(j)
            assert evaluate(Ep, f) == _compose_power(E, f, 5)


def test_not_special_at_t21():
    # D_1^5 sends x^(5 eps_1) to 1, which no sum f_r D_r with f_r = D_1^5(x_r) = 0 does
    with pytest.raises(NotSpecialError):
        p_power(D(1, params=P21))


def test_ad_power_witness_t21():
    X = t_h(SuperElement.monomial(P21, (6, 0)))
    assert ad_power(D(1, params=P21), X) == t_h(x(1, P21))
    rep = is_restricted("SHO'", P21)
    assert not rep.restricted
    assert rep.witness["kind"] == "ad-power" and rep.witness["i"] == 1
    doc = rep.to_json()
    assert doc["restricted"] is False and doc["t"] == [2, 1] and "witness" in doc


@pytest.mark.parametrize("tag", ["W", "SHO'", "SHO-bar", "SHO"])
def test_restricted_t1(tag):
    rep = is_restricted(tag, P)
    assert rep.restricted and rep.witness is None and rep.checked > 0


def test_ad_partials_nilpotent():
    assert ad_partials_nilpotent(build("SHO", P))
    assert not ad_partials_nilpotent(build("SHO", P21))


def test_piecewise_formula_and_omega():
    res = piecewise_formula_check(P)
    assert res["checked"] > 0 and res["exceptions"] == []
    assert omega_power(P) == Derivation.zero(P)
    assert omega_power(Parameters(5, 3, (1, 1, 1))) is None


def test_p_power_vector_parity_check():
    W = wbasis(P)
    with pytest.raises(ParityError):
        p_power_vector(P, W.vector(D(3)))
