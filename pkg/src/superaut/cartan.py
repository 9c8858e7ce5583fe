"""The odd Hamiltonian operator T_H and the algebras HO, S', SHO', SHO-bar, SHO.

Every algebra of the Hamiltonian family is the image under T_H of a graded
subspace of O (its "potentials").  T_H is injective away from the constants
and satisfies ``[T_H(a), T_H(b)] = T_H(T_H(a)(b))``, so derived algebras are
computed on potentials with the bracket ``{a, b} = T_H(a)(b)`` and pushed to
W at the end; this keeps the m = 3 instances small.
"""

from __future__ import annotations

from functools import lru_cache
from typing import Mapping

import numpy as np

from .errors import ConfigurationError, VerificationFailure
from .gf import EchelonBasis, matmul_mod, nullspace, rank
from .superalgebra import OBasis, Parameters, SuperElement, derive, obasis
from .witt import (Derivation, GradedSubspace, derived, full_space, wbasis)

TAGS = ("W", "HO", "S'", "SHO'", "SHO-bar", "SHO")
_ALIASES = {"S": "S'", "SPRIME": "S'", "SHO'": "SHO'", "SHOPRIME": "SHO'", "SHOP": "SHO'",
            "SHO-BAR": "SHO-bar", "SHOBAR": "SHO-bar", "SHO_BAR": "SHO-bar"}


def normalize_tag(tag: str) -> str:
    if tag in TAGS:
        return tag
    key = tag.upper().replace("′", "'")
    if key in ("W", "HO", "SHO"):
        return key
    if key in _ALIASES:
        return _ALIASES[key]
    raise ConfigurationError(f"unknown algebra {tag!r}; expected one of {', '.join(TAGS)}")


def t_h(a: SuperElement) -> Derivation:
    """T_H(a) = sum_i (-1)^{mu(i) p(a)} D_i(a) D_{i'}, extended linearly over parity."""
    params = a.params
    terms: dict[int, SuperElement] = {}
    for theta, part in a.parity_components().items():
        for i in params.indices:
            di = derive(i, part)
            if not di:
                continue
            if params.mu(i) and theta:
                di = -di
            j = params.prime(i)
            terms[j] = terms.get(j, SuperElement.zero(params)) + di
    return Derivation.from_terms(params, terms)


def odd_poisson(a: SuperElement, b: SuperElement) -> SuperElement:
    """``{a, b} = T_H(a)(b)``."""
    from .witt import evaluate
    return evaluate(t_h(a), b)


class PotentialBasis:
    """O with the constants dropped, graded by the degree in O, carrying the
    bracket {a, b} = T_H(a)(b) (degree i + j - 2)."""

    def __init__(self, params: Parameters):
        self.params = params
        self.O = obasis(params)
        self.dim = self.O.dim
        self.par = self.O.par
        self.degrees = list(range(1, params.xi + 1))
        self._tensors: dict = {}

    def block(self, d: int) -> slice:
        return self.O.block(d)

    def size(self, d: int) -> int:
        return self.O.size(d) if d >= 1 else 0

    def split(self, vec: np.ndarray) -> dict[int, np.ndarray]:
        parts = self.O.split(vec)
        parts.pop(0, None)
        return parts

    def join(self, parts) -> np.ndarray:
        return self.O.join(parts)

    def vector(self, f: SuperElement) -> np.ndarray:
        return self.O.vector(f)

    def element(self, vec: np.ndarray) -> SuperElement:
        return self.O.element(vec)

    def bracket_degree(self, i: int, j: int) -> int:
        return i + j - 2

    def bracket_tensor(self, i: int, j: int):
        key = (i, j)
        if key in self._tensors:
            return self._tensors[key]
        params, O = self.params, self.O
        k = i + j - 2
        if self.size(i) == 0 or self.size(j) == 0 or self.size(k) == 0:
            self._tensors[key] = None
            return None
        si, sj, sk = O.block(i), O.block(j), O.block(k)
        a = np.arange(si.start, si.stop)
        b = np.arange(sj.start, sj.stop)
        A, B = np.meshgrid(np.arange(a.size), np.arange(b.size), indexing="ij")
        ia, ib, ik, val = [], [], [], []
        for q in params.indices:
            qq = params.prime(q)
            ha, ca = O.d_idx[q, a], O.d_coef[q, a]
            hb, cb = O.d_idx[qq, b], O.d_coef[qq, b]
            ok = (ha[:, None] >= 0) & (hb[None, :] >= 0)
            mono = np.where(ok, O.prod_idx[np.maximum(ha, 0)[:, None], np.maximum(hb, 0)[None, :]], -1)
            c = O.prod_coef[np.maximum(ha, 0)[:, None], np.maximum(hb, 0)[None, :]] * ca[:, None] * cb[None, :]
            if params.mu(q):
                c = np.where(O.par[a][:, None] == 1, -c, c)
            c = c % params.p
            mask = (mono >= 0) & (c != 0)
            ia.append(A[mask])
            ib.append(B[mask])
            ik.append(mono[mask] - sk.start)
            val.append(c[mask])
        tensor = tuple(np.concatenate(x) for x in (ia, ib, ik, val))
        self._tensors[key] = tensor
        return tensor


@lru_cache(maxsize=None)
def potential_basis(params: Parameters) -> PotentialBasis:
    return PotentialBasis(params)


def th_matrix(params: Parameters, r: int) -> np.ndarray:
    """T_H restricted to O_[r], as a map into W_[r-2] (local coordinates)."""
    O, W = obasis(params), wbasis(params)
    so, sw = O.block(r), W.block(r - 2)
    mat = np.zeros((W.size(r - 2), O.size(r)), dtype=np.int64)
    for col, a in enumerate(range(so.start, so.stop)):
        for i in params.indices:
            h = O.d_idx[i, a]
            if h < 0:
                continue
            c = O.d_coef[i, a]
            if params.mu(i) and O.par[a]:
                c = -c
            mat[W.lookup[h, params.prime(i)] - sw.start, col] = c
    return mat % params.p


def push_potentials(P: GradedSubspace, name: str | None = None) -> GradedSubspace:
    """The image T_H(P) as a graded subspace of W."""
    params = P.params
    W = wbasis(params)
    out = GradedSubspace(W, name)
    for r in sorted(P.blocks):
        rows = P.blocks[r].rows
        if r < 1 or rows.shape[0] == 0:
            continue
        imgs = matmul_mod(rows, th_matrix(params, r).T, params.p)
        out.insert_block(r - 2, imgs)
    return out.freeze()


@lru_cache(maxsize=None)
def potentials(tag: str, params: Parameters) -> GradedSubspace:
    """Graded subspace of potentials a (degree >= 1) with T_H(a) spanning the algebra."""
    tag = normalize_tag(tag)
    PB = potential_basis(params)
    O, W = PB.O, wbasis(params)
    if tag == "HO":
        return full_space(PB, "HO potentials")
    if tag == "SHO'":
        out = GradedSubspace(PB, "SHO' potentials")
        for r in PB.degrees:
            if r - 2 < -1:
                continue
            comp = matmul_mod(W.divergence_matrix(r - 2), th_matrix(params, r), params.p)
            ker = nullspace(comp, params.p)
            if ker.shape[0]:
                out.insert_block(r, ker)
        return out.freeze()
    if tag == "SHO-bar":
        return derived(potentials("SHO'", params), assume_subalgebra=True)
    if tag == "SHO":
        return derived(potentials("SHO-bar", params), assume_subalgebra=True)
    raise ConfigurationError(f"{tag} is not of Hamiltonian type")


@lru_cache(maxsize=None)
def build(tag: str, params: Parameters) -> GradedSubspace:
    """Build one of W, HO, S', SHO', SHO-bar, SHO as a frozen graded subspace of W."""
    tag = normalize_tag(tag)
    W = wbasis(params)
    if tag == "W":
        return full_space(W, "W")
    if tag == "S'":
        out = GradedSubspace(W, "S'")
        for d in W.degrees:
            ker = nullspace(W.divergence_matrix(d), params.p)
            if ker.shape[0]:
                out.insert_block(d, ker)
        return out.freeze()
    g = push_potentials(potentials(tag, params), tag)
    g.name = tag
    return g


def omega_potential(params: Parameters) -> SuperElement:
    """{x^(pi), x^omega}, with omega the full odd word x_{m+1}...x_{2m}."""
    top = SuperElement.monomial(params, params.pi)
    full = SuperElement.monomial(params, None, range(params.m + 1, 2 * params.m + 1))
    return odd_poisson(top, full)


def omega_element(params: Parameters) -> Derivation:
    """[T_H(x^(pi)), T_H(x^omega)]."""
    from .witt import bracket
    top = SuperElement.monomial(params, params.pi)
    full = SuperElement.monomial(params, None, range(params.m + 1, 2 * params.m + 1))
    return bracket(t_h(top), t_h(full))


def transitivity_check(S: GradedSubspace) -> bool:
    """No nonzero element of nonnegative degree commutes with every D_r."""
    W = S.ambient
    for d in sorted(S.blocks):
        if d < 0 or S.rank(d) == 0:
            continue
        rows = S.blocks[d].rows
        img = matmul_mod(W.partial_ad_matrix(d), rows.T, S.params.p)
        if rank(img, S.params.p) != rows.shape[0]:
            return False
    return True


def partial_bracket_span(S: GradedSubspace, d: int) -> EchelonBasis:
    """Span of [D_r, S_[d]] over all r, inside W_[d-1]."""
    W = S.ambient
    out = EchelonBasis(W.size(d - 1), S.params.p)
    if S.rank(d) == 0 or W.size(d - 1) == 0:
        return out
    img = matmul_mod(W.partial_ad_matrix(d), S.blocks[d].rows.T, S.params.p)
    n = W.size(d - 1)
    out.insert(img.reshape(2 * S.params.m, n, -1).transpose(0, 2, 1).reshape(-1, n))
    return out


def _same_span(a: EchelonBasis, b: EchelonBasis) -> bool:
    return a.rank == b.rank and (a.rank == 0 or bool(np.all(b.contains(a.rows))))


def _block(S: GradedSubspace, d: int) -> EchelonBasis:
    return S.blocks[d] if d in S.blocks else EchelonBasis(S.ambient.size(d), S.params.p)


def verify_lemma11(params: Parameters, raise_on_failure: bool = False) -> dict:
    """Check the structural identities relating SHO', SHO-bar and SHO.

    Returns a JSON-ready report: a header and one entry per item with its
    status, the relevant dimension table and, on failure, the offending degree.
    """
    xi = params.xi
    W = wbasis(params)
    shop, shob, sho = build("SHO'", params), build("SHO-bar", params), build("SHO", params)
    om = omega_element(params)
    om_vec = W.vector(om)
    items = []

    def record(item, ok, dims, degree=None, **extra):
        entry = {"item": item, "status": "pass" if ok else "fail",
                 "dims": {str(k): int(v) for k, v in dims.items()}}
        if not ok and degree is not None:
            entry["degree"] = degree
        entry.update(extra)
        items.append(entry)
        if raise_on_failure and not ok:
            raise VerificationFailure(item, "identity does not hold", degree)

    # direct sum with the omega element
    in_bar = shob.contains(om_vec)
    in_sho = sho.contains(om_vec)
    ok = (shob.dim - sho.dim == 1) and bool(np.any(om_vec)) and in_bar and not in_sho \
        and sho.is_subspace_of(shob)
    record("1.1(2)", ok, {"SHO-bar": shob.dim, "SHO": sho.dim},
           omega_in_sho_bar=bool(in_bar), omega_in_sho=bool(in_sho))

    # degree ranges
    bad = None
    for name, S, top in (("SHO-bar", shob, xi - 4), ("SHO", sho, xi - 5)):
        for d in W.degrees:
            inside = -1 <= d <= top
            if (S.rank(d) > 0) != inside:
                bad = bad if bad is not None else d
    record("1.1(3)", bad is None, shob.dims(), degree=bad,
           sho_bar_range=list(shob.degree_range() or ()), sho_range=list(sho.degree_range() or ()),
           expected={"SHO-bar": [-1, xi - 4], "SHO": [-1, xi - 5]})

    # equal components and generation by the degree -1 part
    bad = None
    for d in range(-1, xi - 4):
        same = _same_span(_block(shob, d), _block(sho, d))
        gen = _same_span(partial_bracket_span(shob, d + 1), _block(shob, d))
        if not (same and gen):
            bad = d
            break
    record("1.1(4)", bad is None, sho.dims(), degree=bad)

    # top degree is one-dimensional, spanned by omega
    top = xi - 4
    ok = shob.rank(top) == 1 and shop.rank(top) == 1 and bool(np.any(om_vec)) \
        and shob.contains(om_vec) and int(om.min_degree() or -99) == top
    record("1.1(5)", ok, {"SHO-bar": shob.rank(top), "SHO'": shop.rank(top)}, degree=None if ok else top)

    # complement of SHO-bar in SHO', recorded for comparison
    comp_dims, comp_basis = {}, []
    P_shop, P_shob = potentials("SHO'", params), potentials("SHO-bar", params)
    for r in sorted(P_shop.blocks):
        rows = P_shop.blocks[r].rows
        base = _block(P_shob, r).copy()
        for row in rows:
            if base.insert(row):
                comp_dims[r - 2] = comp_dims.get(r - 2, 0) + 1
                comp_basis.append(P_shop.ambient.element(P_shop.ambient.join({r: row})).to_json())
    items.append({"item": "1.1(1)", "status": "recorded",
                  "dims": {str(k): v for k, v in comp_dims.items()},
                  "complement_potentials": comp_basis})

    return {
        "params": params.to_json(),
        "conventions": {"T_H": "sum_i (-1)^{p(D_i)p(a)} D_i(a) D_i'",
                        "div": "sum_r (-1)^{p(D_r)p(f_r)} D_r(f_r)",
                        "sign_flips": []},
        "dims": {name: {str(k): v for k, v in S.dims().items()}
                 for name, S in (("SHO'", shop), ("SHO-bar", shob), ("SHO", sho))},
        "items": items,
        "passed": all(it["status"] != "fail" for it in items),
    }
