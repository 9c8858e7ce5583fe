"""The generalized Witt superalgebra W(m,m;t) and graded subspaces of it.

An element of W is a :class:`Derivation` ``sum_r f_r D_r``.  Its F-basis is
``x^(alpha) x^u D_r``, of degree ``|alpha| + |u| - 1`` and parity
``|u| + mu(r)``; :class:`WBasis` indexes it densely, degree by degree and
even-before-odd inside each degree, so that echelon bases of Z/2-graded
subspaces come out parity-homogeneous.
"""

from __future__ import annotations

from functools import cached_property, lru_cache
from typing import Iterable, Mapping

import numpy as np

from .errors import ConfigurationError, ParityError
from .gf import EchelonBasis, bilinear_products, matmul_mod
from .superalgebra import (Monomial, Parameters, SuperElement, derive, monomial_key,
                           obasis)


class Derivation:
    """``sum_r f_r D_r`` stored as the tuple ``(f_1, ..., f_2m)``."""

    __slots__ = ("params", "coeffs", "_hash")

    def __init__(self, params: Parameters, coeffs: Iterable[SuperElement]):
        coeffs = tuple(coeffs)
        if len(coeffs) != 2 * params.m:
            raise ConfigurationError(f"need {2 * params.m} coefficients, got {len(coeffs)}")
        for f in coeffs:
            if f.params != params:
                raise ConfigurationError("coefficient lives over different parameters")
        self.params = params
        self.coeffs = coeffs
        self._hash = None

    @classmethod
    def zero(cls, params: Parameters) -> Derivation:
        return cls(params, [SuperElement.zero(params)] * (2 * params.m))

    @classmethod
    def partial(cls, params: Parameters, r: int) -> Derivation:
        return cls.from_terms(params, {r: SuperElement.one(params)})

    @classmethod
    def from_terms(cls, params: Parameters, terms: Mapping[int, SuperElement]) -> Derivation:
        coeffs = [SuperElement.zero(params)] * (2 * params.m)
        for r, f in terms.items():
            coeffs[r - 1] = coeffs[r - 1] + f
        return cls(params, coeffs)

    def coeff(self, r: int) -> SuperElement:
        return self.coeffs[r - 1]

    def _check(self, other: Derivation):
        if not isinstance(other, Derivation) or other.params != self.params:
            raise ConfigurationError("operands live over different parameters")

    def __add__(self, other):
        self._check(other)
        return Derivation(self.params, [a + b for a, b in zip(self.coeffs, other.coeffs)])

    def __sub__(self, other):
        self._check(other)
        return Derivation(self.params, [a - b for a, b in zip(self.coeffs, other.coeffs)])

    def __neg__(self):
        return Derivation(self.params, [-a for a in self.coeffs])

    def __mul__(self, c):
        if isinstance(c, (int, np.integer)):
            return Derivation(self.params, [a * int(c) for a in self.coeffs])
        return NotImplemented

    def __rmul__(self, c):
        """Scalars, or left multiplication by an element of O (the module action)."""
        if isinstance(c, (int, np.integer)):
            return self * c
        if isinstance(c, SuperElement):
            return Derivation(self.params, [c * a for a in self.coeffs])
        return NotImplemented

    def __eq__(self, other):
        if not isinstance(other, Derivation):
            return NotImplemented
        return self.params == other.params and self.coeffs == other.coeffs

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.params, self.coeffs))
        return self._hash

    def __bool__(self):
        return any(self.coeffs)

    def terms(self):
        """``(monomial, r, coefficient)`` triples."""
        for r, f in enumerate(self.coeffs, start=1):
            for mono, c in f.items():
                yield mono, r, c

    def parity_components(self) -> dict[int, Derivation]:
        parts: dict[int, dict] = {}
        for mono, r, c in self.terms():
            theta = (mono.parity + self.params.mu(r)) % 2
            parts.setdefault(theta, {}).setdefault(r, {})[mono] = c
        return {theta: Derivation.from_terms(
                    self.params, {r: SuperElement(self.params, t) for r, t in by_r.items()})
                for theta, by_r in sorted(parts.items())}

    def is_homogeneous(self) -> bool:
        return len(self.parity_components()) <= 1

    @property
    def parity(self) -> int:
        parts = self.parity_components()
        if len(parts) > 1:
            raise ParityError(f"derivation {self!r} has mixed parity")
        return next(iter(parts), 0)

    def grade(self) -> dict[int, Derivation]:
        parts: dict[int, dict] = {}
        for mono, r, c in self.terms():
            parts.setdefault(mono.degree - 1, {}).setdefault(r, {})[mono] = c
        return {d: Derivation.from_terms(
                    self.params, {r: SuperElement(self.params, t) for r, t in parts[d].items()})
                for d in sorted(parts)}

    def min_degree(self) -> int | None:
        return min((mono.degree - 1 for mono, _, _ in self.terms()), default=None)

    def __repr__(self):
        if not self:
            return "0"
        out = []
        for r, f in enumerate(self.coeffs, start=1):
            if f:
                out.append(f"({f!r})D{r}" if len(f) > 1 else f"{f!r}*D{r}".replace("1*D", "D"))
        return " + ".join(out)

    def to_json(self) -> list[dict]:
        return [{"r": r, "f": f.to_json()} for r, f in enumerate(self.coeffs, start=1) if f]

    @classmethod
    def from_json(cls, params: Parameters, data) -> Derivation:
        return cls.from_terms(params, {int(t["r"]): SuperElement.from_json(params, t["f"])
                                       for t in data})


def evaluate(D: Derivation, f: SuperElement) -> SuperElement:
    """Apply ``sum_r f_r D_r`` to ``f``."""
    if f.params != D.params:
        raise ConfigurationError("operands live over different parameters")
    out = SuperElement.zero(D.params)
    for r, fr in enumerate(D.coeffs, start=1):
        if fr:
            out = out + fr * derive(r, f)
    return out


def bracket(D: Derivation, E: Derivation) -> Derivation:
    """Supercommutator ``D E - (-1)^{|D||E|} E D``, computed on coefficients."""
    D._check(E)
    params = D.params
    out = Derivation.zero(params)
    for pd, Dh in D.parity_components().items():
        for pe, Eh in E.parity_components().items():
            sign = -1 if pd and pe else 1
            coeffs = [evaluate(Dh, es) - evaluate(Eh, ds) * sign
                      for ds, es in zip(Dh.coeffs, Eh.coeffs)]
            out = out + Derivation(params, coeffs)
    return out


def divergence(D: Derivation) -> SuperElement:
    params = D.params
    out = SuperElement.zero(params)
    for r, fr in enumerate(D.coeffs, start=1):
        for theta, part in fr.parity_components().items():
            term = derive(r, part)
            out = out - term if params.mu(r) * theta else out + term
    return out


# ---------------------------------------------------------------------------
# dense indexing of W
# ---------------------------------------------------------------------------

class WBasis:
    """Dense F-basis ``x^(alpha)x^u D_r`` of W, graded by degree."""

    def __init__(self, params: Parameters):
        self.params = params
        self.O = obasis(params)
        O, m = self.O, params.m
        entries = []
        for j, mono in enumerate(O.monomials):
            for r in params.indices:
                entries.append((mono.degree - 1, (mono.parity + params.mu(r)) % 2, j, r))
        entries.sort()
        self.dim = len(entries)
        self.w_deg = np.array([e[0] for e in entries], dtype=np.int64)
        self.w_par = np.array([e[1] for e in entries], dtype=np.int64)
        self.w_mono = np.array([e[2] for e in entries], dtype=np.int64)
        self.w_dir = np.array([e[3] for e in entries], dtype=np.int64)
        self.lookup = np.full((O.dim, 2 * m + 1), -1, dtype=np.int64)
        self.lookup[self.w_mono, self.w_dir] = np.arange(self.dim)
        self.degrees = list(range(-1, params.xi))
        self._slices = {}
        for d in self.degrees:
            idx = np.flatnonzero(self.w_deg == d)
            self._slices[d] = slice(int(idx[0]), int(idx[-1]) + 1)
        self._tensors: dict[tuple[int, int], tuple] = {}

    # -- graded ambient interface -------------------------------------------

    def block(self, d: int) -> slice:
        return self._slices[d]

    def size(self, d: int) -> int:
        s = self._slices.get(d)
        return 0 if s is None else s.stop - s.start

    def split(self, vec: np.ndarray) -> dict[int, np.ndarray]:
        return {d: vec[s] for d, s in self._slices.items() if np.any(vec[s])}

    def join(self, parts: Mapping[int, np.ndarray]) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=np.int64)
        for d, v in parts.items():
            vec[self._slices[d]] = v
        return vec

    def bracket_degree(self, i: int, j: int) -> int:
        return i + j

    def label(self, k: int) -> str:
        mono = self.O.monomials[self.w_mono[k]]
        name = "".join(["x^(" + ",".join(map(str, mono.alpha)) + ")" if any(mono.alpha) else ""]
                       + [f"x{i}" for i in mono.u])
        return f"{name or '1'}D{self.w_dir[k]}"

    # -- conversions ----------------------------------------------------------

    def vector(self, D: Derivation) -> np.ndarray:
        if D.params != self.params:
            raise ConfigurationError("derivation lives over different parameters")
        vec = np.zeros(self.dim, dtype=np.int64)
        for mono, r, c in D.terms():
            vec[self.lookup[self.O.index[mono], r]] = c
        return vec

    def derivation(self, vec: np.ndarray) -> Derivation:
        terms: dict[int, dict] = {}
        for k in np.flatnonzero(vec):
            terms.setdefault(int(self.w_dir[k]), {})[self.O.monomials[self.w_mono[k]]] = int(vec[k])
        return Derivation.from_terms(self.params, {r: SuperElement(self.params, t)
                                                   for r, t in terms.items()})

    def coefficient_vectors(self, vec: np.ndarray) -> np.ndarray:
        """Dense O-vectors of the coefficients f_r, shape (2m, dim O)."""
        out = np.zeros((2 * self.params.m, self.O.dim), dtype=np.int64)
        nz = np.flatnonzero(vec)
        out[self.w_dir[nz] - 1, self.w_mono[nz]] = vec[nz]
        return out

    def from_coefficient_vectors(self, coeffs: np.ndarray) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=np.int64)
        for r in range(1, 2 * self.params.m + 1):
            nz = np.flatnonzero(coeffs[r - 1])
            vec[self.lookup[nz, r]] = coeffs[r - 1, nz]
        return vec

    # -- dense operations -----------------------------------------------------

    def apply(self, vec: np.ndarray, f: np.ndarray) -> np.ndarray:
        """Dense evaluation of a derivation on an element of O."""
        O = self.O
        coeffs = self.coefficient_vectors(vec)
        out = np.zeros(O.dim, dtype=np.int64)
        for r in range(1, 2 * self.params.m + 1):
            if np.any(coeffs[r - 1]):
                out = out + O.mul(coeffs[r - 1], O.derive(r, f))
        return out % self.params.p

    def bracket_vectors(self, x: np.ndarray, y: np.ndarray) -> np.ndarray:
        """Dense bracket of two arbitrary elements of W."""
        p = self.params.p
        out = np.zeros(self.dim, dtype=np.int64)
        for px in (0, 1):
            xh = np.where(self.w_par == px, x, 0)
            if not np.any(xh):
                continue
            cx = self.coefficient_vectors(xh)
            for py in (0, 1):
                yh = np.where(self.w_par == py, y, 0)
                if not np.any(yh):
                    continue
                cy = self.coefficient_vectors(yh)
                sign = -1 if px and py else 1
                res = np.array([self.apply(xh, cy[s]) - sign * self.apply(yh, cx[s])
                                for s in range(2 * self.params.m)])
                out = out + self.from_coefficient_vectors(res % p)
        return out % p

    def ad_rows(self, x: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """Brackets ``[x, Y[k]]`` for one fixed x and many rows Y, via operators on O."""
        p, nr, O = self.params.p, 2 * self.params.m, self.O
        x = np.asarray(x, dtype=np.int64) % p
        Y = np.atleast_2d(np.asarray(Y, dtype=np.int64)) % p
        k = Y.shape[0]

        def coeffs(rows):
            # C[k, r] = coefficient of D_r in rows[k]
            C = np.zeros((k, nr, O.dim), dtype=np.int64)
            C[:, self.w_dir - 1, self.w_mono] = rows
            return C

        CY = coeffs(Y)
        # only monomials that occur in some coefficient of some row matter
        live = np.flatnonzero(np.any(CY, axis=(0, 1)))
        CY = CY[:, :, live]
        sgn = np.where(self.w_par[None, :] == 1, p - 1, 1) * Y % p
        CYo = coeffs(sgn)[:, :, live]
        res = np.zeros((k, nr, O.dim), dtype=np.int64)
        for px in (0, 1):
            xh = np.where(self.w_par == px, x, 0)
            if not np.any(xh):
                continue
            cx = self.coefficient_vectors(xh)
            # A @ f == xh(f), restricted to the live columns
            A = sum(matmul_mod(O.left_mult_matrix(cx[r]), O.derivative_matrix(r + 1)[:, live], p)
                    for r in range(nr) if np.any(cx[r])) % p
            res += matmul_mod(CY.reshape(-1, live.size), A.T, p).reshape(res.shape)
            # Y(x_s) = sum_r Y_r * D_r(x_s); the sign flips on odd Y when x is odd
            CS = CYo if px else CY
            for s in range(nr):
                # right multiplications by the nonzero D_r(x_s), stacked over r
                hs = {r: O.derive(r + 1, cx[s]) for r in range(nr)}
                rs = [r for r, h in hs.items() if np.any(h)]
                if not rs:
                    continue
                R = np.concatenate([O.right_mult_matrix(hs[r])[:, live].T for r in rs])
                res[:, s] -= matmul_mod(CS[:, rs].reshape(k, -1), R, p)
        return res[:, self.w_dir - 1, self.w_mono] % p

    def bracket_tensor(self, i: int, j: int):
        """Sparse structure constants of ``W_[i] x W_[j] -> W_[i+j]`` (local indices)."""
        key = (i, j)
        if key in self._tensors:
            return self._tensors[key]
        p, O = self.params.p, self.O
        k = i + j
        if self.size(i) == 0 or self.size(j) == 0 or self.size(k) == 0:
            self._tensors[key] = None
            return None
        si, sj, sk = self.block(i), self.block(j), self.block(k)
        f, r, pa = self.w_mono[si], self.w_dir[si], self.w_par[si]
        g, s, pb = self.w_mono[sj], self.w_dir[sj], self.w_par[sj]
        A, B = np.meshgrid(np.arange(f.size), np.arange(g.size), indexing="ij")
        pieces = []
        # f D_r(g) D_s
        h = O.d_idx[r[:, None], g[None, :]]
        hc = O.d_coef[r[:, None], g[None, :]]
        ok = h >= 0
        mono = np.where(ok, O.prod_idx[f[:, None], np.maximum(h, 0)], -1)
        c = np.where(ok, O.prod_coef[f[:, None], np.maximum(h, 0)] * hc, 0)
        tgt = np.where(mono >= 0, self.lookup[np.maximum(mono, 0), s[None, :]], -1)
        pieces.append((tgt, c))
        # -(-1)^{|a||b|} g D_s(f) D_r
        h = O.d_idx[s[None, :], f[:, None]]
        hc = O.d_coef[s[None, :], f[:, None]]
        ok = h >= 0
        mono = np.where(ok, O.prod_idx[g[None, :], np.maximum(h, 0)], -1)
        sign = np.where((pa[:, None] * pb[None, :]) == 1, 1, -1)
        c = np.where(ok, O.prod_coef[g[None, :], np.maximum(h, 0)] * hc * sign, 0)
        tgt = np.where(mono >= 0, self.lookup[np.maximum(mono, 0), r[:, None]], -1)
        pieces.append((tgt, c))
        ia, ib, ik, val = [], [], [], []
        for tgt, c in pieces:
            c = c % p
            mask = (tgt >= 0) & (c != 0)
            ia.append(A[mask])
            ib.append(B[mask])
            ik.append(tgt[mask] - sk.start)
            val.append(c[mask])
        tensor = tuple(np.concatenate(x) for x in (ia, ib, ik, val))
        self._tensors[key] = tensor
        return tensor

    def basis_bracket(self, a: int, b: int) -> np.ndarray:
        """Bracket of two basis vectors given by global index."""
        i, j = int(self.w_deg[a]), int(self.w_deg[b])
        out = np.zeros(self.dim, dtype=np.int64)
        tensor = self.bracket_tensor(i, j)
        if tensor is None:
            return out
        la, lb = a - self.block(i).start, b - self.block(j).start
        ia, ib, ik, val = tensor
        mask = (ia == la) & (ib == lb)
        np.add.at(out, ik[mask] + self.block(i + j).start, val[mask])
        return out % self.params.p

    @cached_property
    def full_bracket_table(self):
        """``(idx, coef)`` of shape (dim, dim, 2): every basis bracket has at most
        two terms.  Only sensible for small instances."""
        idx = np.full((self.dim, self.dim, 2), -1, dtype=np.int64)
        coef = np.zeros((self.dim, self.dim, 2), dtype=np.int64)
        for i in self.degrees:
            for j in self.degrees:
                tensor = self.bracket_tensor(i, j)
                if tensor is None:
                    continue
                ia, ib, ik, val = tensor
                ga, gb = ia + self.block(i).start, ib + self.block(j).start
                gk = ik + self.block(i + j).start
                order = np.lexsort((gk, gb, ga))
                ga, gb, gk, val = ga[order], gb[order], gk[order], val[order]
                first = np.ones(ga.size, dtype=bool)
                first[1:] = (ga[1:] != ga[:-1]) | (gb[1:] != gb[:-1])
                slot = np.where(first, 0, 1)
                idx[ga, gb, slot] = gk
                coef[ga, gb, slot] = val
        return idx, coef

    def divergence_matrix(self, d: int) -> np.ndarray:
        """``div: W_[d] -> O_[d]`` in local coordinates."""
        O, params = self.O, self.params
        sd = self.block(d)
        mat = np.zeros((O.size(d), self.size(d)), dtype=np.int64)
        if O.size(d) == 0:
            return mat
        so = O.block(d)
        for col, k in enumerate(range(sd.start, sd.stop)):
            f, r = self.w_mono[k], self.w_dir[k]
            h = O.d_idx[r, f]
            if h >= 0:
                sign = -1 if params.mu(r) and O.par[f] else 1
                mat[h - so.start, col] = sign * O.d_coef[r, f]
        return mat % params.p

    def partial_ad_matrix(self, d: int) -> np.ndarray:
        """Stacked ``[D_r, .]`` for all r as a map ``W_[d] -> (W_[d-1])^{2m}``."""
        O, params = self.O, self.params
        n_out = self.size(d - 1)
        sd = self.block(d)
        mat = np.zeros((2 * params.m * n_out, self.size(d)), dtype=np.int64)
        if n_out == 0:
            return mat
        so = self.block(d - 1)
        for col, k in enumerate(range(sd.start, sd.stop)):
            f, s = self.w_mono[k], self.w_dir[k]
            for r in params.indices:
                h = O.d_idx[r, f]
                if h >= 0:
                    tgt = self.lookup[h, s] - so.start
                    mat[(r - 1) * n_out + tgt, col] = O.d_coef[r, f]
        return mat

    def partial_index(self, r: int) -> int:
        return int(self.lookup[self.O.one_index, r])

    def ad_matrix(self, x: np.ndarray) -> np.ndarray:
        """Matrix of ``ad x = [x, .]`` on all of W (columns are images of basis vectors)."""
        p = self.params.p
        mat = np.zeros((self.dim, self.dim), dtype=np.int64)
        for i, xi in self.split(np.asarray(x, dtype=np.int64) % p).items():
            for j in self.degrees:
                tensor = self.bracket_tensor(i, j)
                if tensor is None:
                    continue
                ia, ib, ik, val = tensor
                c = xi[ia] * val % p
                ok = c != 0
                np.add.at(mat, (ik[ok] + self.block(i + j).start, ib[ok] + self.block(j).start), c[ok])
        return mat % p

    def _sorted_tensor(self, i: int, j: int):
        key = ("sorted", i, j)
        if key not in self._tensors:
            tensor = self.bracket_tensor(i, j)
            if tensor is None or tensor[0].size == 0:
                self._tensors[key] = None
            else:
                ia, ib, ik, val = tensor
                order = np.argsort(ik, kind="stable")
                ia, ib, ik, val = ia[order], ib[order], ik[order], val[order]
                keys, starts = np.unique(ik, return_index=True)
                self._tensors[key] = (ia, ib, val, keys, starts)
        return self._tensors[key]

    def bracket_rows(self, X: np.ndarray, Y: np.ndarray, chunk: int = 64) -> np.ndarray:
        """Row-wise brackets ``[X[s], Y[s]]`` of arbitrary (inhomogeneous) elements."""
        p = self.params.p
        X = np.atleast_2d(np.asarray(X, dtype=np.int64)) % p
        Y = np.atleast_2d(np.asarray(Y, dtype=np.int64)) % p
        out = np.zeros((X.shape[0], self.dim), dtype=np.int64)
        live = [d for d in self.degrees if self.size(d)]
        xs = {d: np.flatnonzero(np.any(X[:, self.block(d)], axis=1)) for d in live}
        ys = {d: np.flatnonzero(np.any(Y[:, self.block(d)], axis=1)) for d in live}
        for i in live:
            if xs[i].size == 0:
                continue
            for j in live:
                rows = np.intersect1d(xs[i], ys[j], assume_unique=True)
                if rows.size == 0:
                    continue
                st = self._sorted_tensor(i, j)
                if st is None:
                    continue
                ia, ib, val, keys, starts = st
                tgt = keys + self.block(i + j).start
                for s in range(0, rows.size, chunk):
                    r = rows[s:s + chunk]
                    xb = X[np.ix_(r, np.arange(self.block(i).start, self.block(i).stop))]
                    yb = Y[np.ix_(r, np.arange(self.block(j).start, self.block(j).stop))]
                    prod = xb[:, ia] * yb[:, ib] % p * val
                    out[np.ix_(r, tgt)] = (out[np.ix_(r, tgt)] + np.add.reduceat(prod, starts, axis=1)) % p
        return out


@lru_cache(maxsize=None)
def wbasis(params: Parameters) -> WBasis:
    return WBasis(params)


# ---------------------------------------------------------------------------
# graded subspaces
# ---------------------------------------------------------------------------

class GradedSubspace:
    """A graded subspace of a graded ambient space, one echelon basis per degree.

    The ambient is a :class:`WBasis` for subalgebras of W; anything offering
    ``degrees``, ``size``, ``block``, ``split``, ``join`` and ``dim`` works.
    The frozen basis is the concatenation of the per-degree echelon rows in
    increasing degree.
    """

    def __init__(self, ambient, name: str | None = None):
        self.ambient = ambient
        self.params = ambient.params
        self.name = name
        self.blocks: dict[int, EchelonBasis] = {}
        self.frozen = False

    def block(self, d: int) -> EchelonBasis:
        if d not in self.blocks:
            if self.frozen:
                return EchelonBasis(self.ambient.size(d), self.params.p)
            self.blocks[d] = EchelonBasis(self.ambient.size(d), self.params.p)
        return self.blocks[d]

    def _split(self, x) -> dict[int, np.ndarray]:
        if isinstance(x, Derivation):
            x = self.ambient.vector(x)
        if isinstance(x, SuperElement):
            x = self.ambient.vector(x)
        if isinstance(x, Mapping):
            return dict(x)
        return self.ambient.split(np.asarray(x, dtype=np.int64))

    def insert(self, x) -> int:
        if self.frozen:
            raise RuntimeError("cannot insert into a frozen subspace")
        return sum(self.block(d).insert(v) for d, v in self._split(x).items())

    def insert_block(self, d: int, rows: np.ndarray, limit: int | None = None) -> int:
        if self.frozen:
            raise RuntimeError("cannot insert into a frozen subspace")
        if self.ambient.size(d) == 0:
            return 0
        return self.block(d).insert(rows, limit=limit)

    def contains(self, x) -> bool:
        for d, v in self._split(x).items():
            if d not in self.blocks or not self.blocks[d].contains(v)[0]:
                return False
        return True

    def contains_vectors(self, vecs: np.ndarray) -> np.ndarray:
        """Row-wise membership for a stack of global ambient vectors."""
        vecs = np.atleast_2d(vecs)
        ok = np.ones(vecs.shape[0], dtype=bool)
        for d in self.ambient.degrees:
            s = self.ambient.block(d)
            part = vecs[:, s]
            rows = np.any(part, axis=1)
            if not np.any(rows):
                continue
            if d not in self.blocks:
                ok &= ~rows
            else:
                ok &= self.blocks[d].contains(part)
        return ok

    def rank(self, d: int) -> int:
        return self.blocks[d].rank if d in self.blocks else 0

    def dims(self) -> dict[int, int]:
        return {d: self.blocks[d].rank for d in sorted(self.blocks) if self.blocks[d].rank}

    @property
    def dim(self) -> int:
        return sum(self.dims().values())

    def degree_range(self) -> tuple[int, int] | None:
        dims = self.dims()
        return (min(dims), max(dims)) if dims else None

    def freeze(self) -> GradedSubspace:
        self.frozen = True
        for b in self.blocks.values():
            b.freeze()
        self.__dict__.pop("_basis_cache", None)
        return self

    def copy(self) -> GradedSubspace:
        other = GradedSubspace(self.ambient, self.name)
        other.blocks = {d: b.copy() for d, b in self.blocks.items()}
        return other

    # -- frozen basis -----------------------------------------------------------

    @cached_property
    def _basis_cache(self):
        degs, rows = [], []
        for d in sorted(self.blocks):
            b = self.blocks[d]
            for row in b.rows:
                degs.append(d)
                rows.append(self.ambient.join({d: row}))
        mat = np.array(rows, dtype=np.int64).reshape(len(rows), self.ambient.dim)
        return np.array(degs, dtype=np.int64), mat

    @property
    def basis_degrees(self) -> np.ndarray:
        return self._basis_cache[0]

    @property
    def basis_matrix(self) -> np.ndarray:
        """Frozen basis as global ambient vectors, shape (dim, ambient.dim)."""
        return self._basis_cache[1]

    @property
    def basis_parities(self) -> np.ndarray:
        amb = self.ambient
        par = amb.w_par if hasattr(amb, "w_par") else amb.par
        out = []
        for row in self.basis_matrix:
            nz = np.flatnonzero(row)
            out.append(int(par[nz[0]]) if nz.size else 0)
        return np.array(out, dtype=np.int64)

    def labels(self) -> list[str]:
        out, seen = [], {}
        for d in self.basis_degrees:
            k = seen.get(int(d), 0)
            seen[int(d)] = k + 1
            out.append(f"g[{int(d)}].{k}")
        return out

    def basis(self) -> list:
        conv = getattr(self.ambient, "derivation", None) or self.ambient.element
        return [conv(row) for row in self.basis_matrix]

    def coordinates(self, vecs: np.ndarray) -> np.ndarray:
        """Coordinates of global ambient vectors in the frozen basis.

        Raises ValueError if some vector is not a member.
        """
        vecs = np.atleast_2d(np.asarray(vecs, dtype=np.int64))
        cols = []
        for d in sorted(self.blocks):
            b = self.blocks[d]
            if b.rank == 0:
                continue
            cols.append(b.coordinates(vecs[:, self.ambient.block(d)]))
        for d in self.ambient.degrees:
            if d not in self.blocks and np.any(vecs[:, self.ambient.block(d)]):
                raise ValueError("vector is not in the subspace")
        if not cols:
            return np.zeros((vecs.shape[0], 0), dtype=np.int64)
        return np.concatenate(cols, axis=1)

    def is_subspace_of(self, other: GradedSubspace) -> bool:
        for d, b in self.blocks.items():
            if b.rank and (d not in other.blocks or not np.all(other.blocks[d].contains(b.rows))):
                return False
        return True

    def __eq__(self, other):
        if not isinstance(other, GradedSubspace):
            return NotImplemented
        return self.dims() == other.dims() and self.is_subspace_of(other)

    __hash__ = object.__hash__

    def __repr__(self):
        return f"GradedSubspace({self.name or '?'}, dim={self.dim})"


def full_space(ambient, name: str | None = None) -> GradedSubspace:
    S = GradedSubspace(ambient, name)
    for d in ambient.degrees:
        n = ambient.size(d)
        if n:
            S.block(d).insert(np.eye(n, dtype=np.int64))
    return S.freeze()


def span(ambient, elements, name: str | None = None) -> GradedSubspace:
    S = GradedSubspace(ambient, name)
    for x in elements:
        S.insert(x)
    return S.freeze()


def _bracket_into(out: GradedSubspace, A: GradedSubspace, B: GradedSubspace,
                  bound: GradedSubspace | None = None):
    amb = out.ambient
    p = out.params.p
    da = [d for d in sorted(A.blocks) if A.blocks[d].rank]
    db = [d for d in sorted(B.blocks) if B.blocks[d].rank]
    same = A is B
    pairs = [(i, j) for i in da for j in db if not (same and j < i)]
    pairs.sort(key=lambda ij: (amb.bracket_degree(*ij), ij[0]))
    for i, j in pairs:
        k = amb.bracket_degree(i, j)
        if amb.size(k) == 0:
            continue
        limit = None
        if bound is not None:
            limit = bound.rank(k)
            if out.rank(k) >= limit:
                continue
        tensor = amb.bracket_tensor(i, j)
        if tensor is None or tensor[0].size == 0:
            continue
        ra, rb = A.blocks[i].rows, B.blocks[j].rows
        step = max(1, 4_000_000 // max(1, rb.shape[0] * amb.size(k)))
        for start in range(0, ra.shape[0], step):
            prods = bilinear_products(ra[start:start + step], rb, tensor, amb.size(k), p)
            out.insert_block(k, prods.reshape(-1, amb.size(k)), limit=limit)
            if limit is not None and out.rank(k) >= limit:
                break


def bracket_span(A: GradedSubspace, B: GradedSubspace) -> GradedSubspace:
    """Span of all brackets [a, b] with a in A, b in B."""
    out = GradedSubspace(A.ambient)
    _bracket_into(out, A, B)
    return out.freeze()


def structure_blocks(g: GradedSubspace):
    """Yield ``(i, j, C)`` with ``C[a, b]`` the coordinates of ``[g_[i][a], g_[j][b]]``
    in the frozen basis of ``g_[i+j]``.  Raises ValueError if g is not closed."""
    amb, p = g.ambient, g.params.p
    degs = [d for d in sorted(g.blocks) if g.blocks[d].rank]
    for i in degs:
        for j in degs:
            k = amb.bracket_degree(i, j)
            ni, nj = g.blocks[i].rank, g.blocks[j].rank
            tensor = amb.bracket_tensor(i, j) if amb.size(k) else None
            if tensor is None or tensor[0].size == 0:
                continue
            prods = bilinear_products(g.blocks[i].rows, g.blocks[j].rows, tensor, amb.size(k), p)
            flat = prods.reshape(ni * nj, -1)
            if not np.any(flat):
                continue
            blk = g.blocks.get(k)
            if blk is None or not np.all(blk.contains(flat)):
                raise ValueError(f"subspace is not closed under brackets (degrees {i}, {j})")
            yield i, j, flat[:, blk.pivots].reshape(ni, nj, -1)


def structure_tensor(g: GradedSubspace) -> np.ndarray:
    """Dense structure constants ``C[a, b, c]`` of a frozen subalgebra: ``[b_a, b_b] = sum_c C[a,b,c] b_c``."""
    cached = g.__dict__.get("_structure")
    if cached is not None:
        return cached
    n = g.dim
    offs, start = {}, 0
    for d in sorted(g.blocks):
        offs[d] = start
        start += g.blocks[d].rank
    C = np.zeros((n, n, n), dtype=np.int64)
    for i, j, blk in structure_blocks(g):
        k = g.ambient.bracket_degree(i, j)
        a, b, c = blk.shape
        C[offs[i]:offs[i] + a, offs[j]:offs[j] + b, offs[k]:offs[k] + c] = blk
    if g.frozen:
        g.__dict__["_structure"] = C
    return C


def derived(S: GradedSubspace, assume_subalgebra: bool = False) -> GradedSubspace:
    """The derived algebra [S, S].

    Without ``assume_subalgebra`` the result is further closed under brackets
    until its dimension stabilizes.  With it, each degree stops as soon as it
    fills ``S`` in that degree, which is only valid when S is a subalgebra.
    """
    out = GradedSubspace(S.ambient)
    _bracket_into(out, S, S, bound=S if assume_subalgebra else None)
    if not assume_subalgebra:
        while True:
            before = out.dims()
            snap = out.copy()
            _bracket_into(out, snap, snap)
            if out.dims() == before:
                break
    return out.freeze()


# ---------------------------------------------------------------------------
# matrices over O
# ---------------------------------------------------------------------------

class OMatrix:
    """A square matrix with entries in O (an element of M_{2m}(O))."""

    __slots__ = ("params", "rows")

    def __init__(self, params: Parameters, rows):
        self.params = params
        self.rows = tuple(tuple(r) for r in rows)
        n = len(self.rows)
        if any(len(r) != n for r in self.rows):
            raise ConfigurationError("OMatrix must be square")

    @property
    def n(self) -> int:
        return len(self.rows)

    @classmethod
    def identity(cls, params: Parameters, n: int | None = None) -> OMatrix:
        n = 2 * params.m if n is None else n
        one, zero = SuperElement.one(params), SuperElement.zero(params)
        return cls(params, [[one if i == j else zero for j in range(n)] for i in range(n)])

    @classmethod
    def from_scalars(cls, params: Parameters, mat) -> OMatrix:
        one = SuperElement.one(params)
        return cls(params, [[one * int(c) for c in row] for row in np.asarray(mat)])

    @classmethod
    def of_derivations(cls, derivations) -> OMatrix:
        """Row i holds the D-coefficients of the i-th derivation."""
        derivations = list(derivations)
        return cls(derivations[0].params, [d.coeffs for d in derivations])

    def __getitem__(self, ij):
        i, j = ij
        return self.rows[i][j]

    def __matmul__(self, other: OMatrix) -> OMatrix:
        n = self.n
        zero = SuperElement.zero(self.params)
        out = []
        for i in range(n):
            row = []
            for j in range(n):
                acc = zero
                for k in range(n):
                    a, b = self.rows[i][k], other.rows[k][j]
                    if a and b:
                        acc = acc + a * b
                row.append(acc)
            out.append(row)
        return OMatrix(self.params, out)

    def __add__(self, other: OMatrix) -> OMatrix:
        return OMatrix(self.params, [[a + b for a, b in zip(r, s)]
                                     for r, s in zip(self.rows, other.rows)])

    def __sub__(self, other: OMatrix) -> OMatrix:
        return OMatrix(self.params, [[a - b for a, b in zip(r, s)]
                                     for r, s in zip(self.rows, other.rows)])

    def __neg__(self) -> OMatrix:
        return OMatrix(self.params, [[-a for a in r] for r in self.rows])

    def __eq__(self, other):
        return isinstance(other, OMatrix) and self.rows == other.rows

    __hash__ = None

    def __bool__(self):
        return any(a for r in self.rows for a in r)

    def pr0(self) -> np.ndarray:
        """Scalar parts, as an integer matrix."""
        return np.array([[a.constant_term() for a in r] for r in self.rows], dtype=np.int64)

    def pr1(self) -> OMatrix:
        return OMatrix(self.params, [[a - a.constant_term() for a in r] for r in self.rows])

    def __repr__(self):
        return "OMatrix(" + "; ".join(", ".join(map(repr, r)) for r in self.rows) + ")"
