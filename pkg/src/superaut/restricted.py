"""p-th powers of even derivations and restrictedness of the Cartan-type algebras.

The p-th power of an even superderivation of O is again a superderivation;
when it is of the form ``sum_r E(x_r) D_r`` it is recovered by evaluating the
p-fold composition on the generators.  For t != 1 the divided-power
generators ``x^(p^j eps_i)`` detect the derivations that are not of this form.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .cartan import build, normalize_tag, omega_element, t_h
from .errors import NotSpecialError, ParityError
from .gf import matmul_mod
from .superalgebra import Parameters, SuperElement, obasis
from .witt import Derivation, GradedSubspace, wbasis


def _power_on(W, vec: np.ndarray, f: np.ndarray, n: int) -> np.ndarray:
    for _ in range(n):
        if not np.any(f):
            break
        f = W.apply(vec, f)
    return f


def _is_even(W, vec: np.ndarray) -> bool:
    return not np.any(vec[W.w_par == 1])


def p_power_vector(params: Parameters, vec: np.ndarray) -> np.ndarray:
    """p-th power of an even element of W given as a dense vector."""
    W, O = wbasis(params), obasis(params)
    p = params.p
    vec = np.asarray(vec, dtype=np.int64) % p
    if not _is_even(W, vec):
        raise ParityError("only even derivations have a p-th power")
    coeffs = np.zeros((2 * params.m, O.dim), dtype=np.int64)
    for k in params.indices:
        gen = np.zeros(O.dim, dtype=np.int64)
        gen[O.generator_index(k)] = 1
        coeffs[k - 1] = _power_on(W, vec, gen, p)
    out = W.from_coefficient_vectors(coeffs)
    # divided-power generators beyond x_i only exist for t_i > 1
    for i in range(1, params.m + 1):
        for j in range(1, params.t[i - 1]):
            alpha = [0] * params.m
            alpha[i - 1] = p ** j
            g = O.vector(SuperElement.monomial(params, alpha))
            if np.any(_power_on(W, vec, g, p) != W.apply(out, g)):
                raise NotSpecialError(
                    f"D^{p} is not of the form sum f_r D_r (differs on x^({p ** j}eps_{i}))")
    return out


def p_power(D: Derivation) -> Derivation:
    """``D^p`` as a derivation; D must be even."""
    if D.parity_components().get(1):
        raise ParityError("only even derivations have a p-th power")
    W = wbasis(D.params)
    return W.derivation(p_power_vector(D.params, W.vector(D)))


def _ad_power_vec(W, d: np.ndarray, x: np.ndarray, n: int) -> np.ndarray:
    for _ in range(n):
        if not np.any(x):
            break
        x = W.bracket_rows(d[None, :], x[None, :])[0]
    return x


def ad_power(D: Derivation, X: Derivation, n: int | None = None) -> Derivation:
    """``(ad D)^n X``; n defaults to p."""
    W = wbasis(D.params)
    n = D.params.p if n is None else n
    return W.derivation(_ad_power_vec(W, W.vector(D), W.vector(X), n))


@dataclass
class PPowerResult:
    element: Derivation
    power: Derivation | None
    members: dict = field(default_factory=dict)
    error: str | None = None


def p_power_report(D: Derivation, tags=("W", "S'", "HO", "SHO'", "SHO-bar", "SHO")) -> PPowerResult:
    try:
        E = p_power(D)
    except NotSpecialError as exc:
        return PPowerResult(D, None, {}, str(exc))
    return PPowerResult(D, E, {normalize_tag(t): build(t, D.params).contains(E) for t in tags})


@dataclass
class RestrictednessReport:
    algebra: str
    params: Parameters
    restricted: bool
    witness: dict | None = None
    checked: int = 0

    def to_json(self) -> dict:
        out = {"algebra": self.algebra, **self.params.to_json(), "restricted": self.restricted}
        if self.witness is not None:
            out["witness"] = self.witness
        return out


def _ad_partials_witness(g: GradedSubspace) -> dict | None:
    """Look for X in g with (ad D_i)^p X != 0, i even, trying T_H(x^((p+1)eps_i)) first."""
    params = g.params
    W, p = wbasis(params), params.p
    for i in range(1, params.m + 1):
        Di = np.zeros(W.dim, dtype=np.int64)
        Di[W.partial_index(i)] = 1
        candidates = []
        if params.pi[i - 1] >= p + 1:
            alpha = [0] * params.m
            alpha[i - 1] = p + 1
            X = t_h(SuperElement.monomial(params, alpha))
            if g.contains(X):
                candidates.append(W.vector(X))
        candidates.extend(g.basis_matrix)
        for x in candidates:
            img = _ad_power_vec(W, Di, x, p)
            if np.any(img):
                return {"kind": "ad-power", "i": i,
                        "element": W.derivation(x).to_json(),
                        "image": W.derivation(img).to_json()}
    return None


def ad_partials_nilpotent(g: GradedSubspace) -> bool:
    """(ad D_i)^p vanishes on g for every even index i."""
    W, p = wbasis(g.params), g.params.p
    B = g.basis_matrix
    for i in range(1, g.params.m + 1):
        ad = W.ad_matrix(np.eye(W.dim, dtype=np.int64)[W.partial_index(i)])
        img = B.T
        for _ in range(p):
            img = matmul_mod(ad, img, p)
        if np.any(img):
            return False
    return True


def is_restricted(tag: str, params: Parameters) -> RestrictednessReport:
    """Decide whether the algebra is closed under the p-th power map.

    A nonzero ``(ad D_i)^p`` with i even is an operator of degree -p and so
    cannot be inner; it certifies non-restrictedness.  Otherwise every even
    basis element is checked for ``D^p`` to land back in the algebra, which
    suffices because the even basis spans the even part.
    """
    tag = normalize_tag(tag)
    g = build(tag, params)
    W = wbasis(params)
    wit = _ad_partials_witness(g)
    if wit is not None:
        return RestrictednessReport(tag, params, False, wit)
    par = g.basis_parities
    checked = 0
    for row, par_b in zip(g.basis_matrix, par):
        if par_b:
            continue
        checked += 1
        try:
            E = p_power_vector(params, row)
        except NotSpecialError as exc:
            return RestrictednessReport(tag, params, False, {
                "kind": "not-special", "element": W.derivation(row).to_json(), "reason": str(exc)}, checked)
        if not g.contains(E):
            return RestrictednessReport(tag, params, False, {
                "kind": "escapes", "element": W.derivation(row).to_json(),
                "power": W.derivation(E).to_json()}, checked)
    return RestrictednessReport(tag, params, True, None, checked)


def piecewise_formula_check(params: Parameters) -> dict:
    """Compare D^p with the closed form on every even T_H(x^(alpha)x^u) in SHO'.

    The closed form: ``T_H(a)^p = T_H(a)`` when ``a = x_i x_i'`` and 0 otherwise.
    Returns the number of monomials checked and the list of exceptions.
    """
    O, W = obasis(params), wbasis(params)
    g = build("SHO'", params)
    checked, exceptions = 0, []
    for j, mono in enumerate(O.monomials):
        if mono.degree < 1 or mono.parity != 1:
            continue
        a = O.basis_element(j)
        D = t_h(a)
        v = W.vector(D)
        if not g.contains(v):
            continue
        checked += 1
        E = p_power_vector(params, v)
        special = sum(mono.alpha) == 1 and len(mono.u) == 1 \
            and mono.u[0] == params.prime(mono.alpha.index(1) + 1)
        expected = v if special else np.zeros_like(v)
        if np.any(E != expected):
            exceptions.append({"alpha": list(mono.alpha), "u": list(mono.u),
                               "power": W.derivation(E).to_json()})
    return {"checked": checked, "exceptions": exceptions}


def omega_power(params: Parameters) -> Derivation | None:
    """p-th power of [T_H(x^(pi)), T_H(x^omega)], or None when that element is odd (m odd)."""
    om = omega_element(params)
    if om.parity:
        return None
    return p_power(om)


def ad_power_identity(params: Parameters, vec: np.ndarray, targets: np.ndarray) -> bool:
    """``ad(E^p) = (ad E)^p`` on each row of ``targets``."""
    W = wbasis(params)
    E = p_power_vector(params, vec)
    lhs = W.bracket_rows(np.broadcast_to(E, targets.shape), targets)
    rhs = targets.copy()
    for _ in range(params.p):
        rhs = W.bracket_rows(np.broadcast_to(vec, targets.shape), rhs)
    return bool(np.all(lhs == rhs))

