"""Arithmetic in the supercommutative algebra O(m,m;t) = O(m;t) (x) Lambda(m).

Indices follow the usual convention: ``1..m`` are the even (divided power)
variables, ``m+1..2m`` the odd (Grassmann) ones.  A basis monomial is a pair
``(alpha, u)`` standing for ``x^(alpha) x_{u_1} ... x_{u_k}`` with ``u``
strictly increasing.

Two representations coexist:

* :class:`SuperElement`, a sparse ``{Monomial: coefficient}`` map used by
  the public API, and
* :class:`OBasis`, a dense indexing of the monomial basis with
  precomputed product and derivative tables, used by the heavy linear
  algebra (everything is a vector of residues mod p).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property, lru_cache
from typing import Iterable, Mapping, NamedTuple

import numpy as np

from .errors import ConfigurationError, ParityError
from .gf import is_prime, lucas_binomial


@dataclass(frozen=True)
class Parameters:
    p: int
    m: int
    t: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "t", tuple(int(x) for x in self.t))
        if not is_prime(self.p) or self.p <= 3:
            raise ConfigurationError(f"p must be a prime > 3, got {self.p}")
        if self.m < 2:
            raise ConfigurationError(f"m must be at least 2, got {self.m}")
        if len(self.t) != self.m or any(x < 1 for x in self.t):
            raise ConfigurationError(
                f"t must be {self.m} positive integers, got {list(self.t)}")

    @classmethod
    def restricted(cls, p: int, m: int) -> Parameters:
        return cls(p, m, (1,) * m)

    @property
    def pi(self) -> tuple[int, ...]:
        return tuple(self.p ** ti - 1 for ti in self.t)

    @property
    def xi(self) -> int:
        return sum(self.p ** ti for ti in self.t)

    @property
    def is_restricted_case(self) -> bool:
        return all(ti == 1 for ti in self.t)

    @property
    def dim_O(self) -> int:
        return 2 ** self.m * int(np.prod([self.p ** ti for ti in self.t]))

    @property
    def indices(self) -> range:
        return range(1, 2 * self.m + 1)

    def mu(self, i: int) -> int:
        """Parity of the variable x_i."""
        return 0 if i <= self.m else 1

    def prime(self, i: int) -> int:
        """The involution i -> i'."""
        return i + self.m if i <= self.m else i - self.m

    def to_json(self) -> dict:
        return {"p": self.p, "m": self.m, "t": list(self.t)}

    @classmethod
    def from_json(cls, data: Mapping) -> Parameters:
        return cls(int(data["p"]), int(data["m"]), tuple(data["t"]))


class Monomial(NamedTuple):
    alpha: tuple[int, ...]
    u: tuple[int, ...] = ()

    @property
    def degree(self) -> int:
        return sum(self.alpha) + len(self.u)

    @property
    def parity(self) -> int:
        return len(self.u) % 2


def monomial_key(mono: Monomial):
    return (mono.degree, mono.parity, mono.alpha, mono.u)


def _sort_odd(u: Iterable[int]) -> tuple[tuple[int, ...], int]:
    """Sort an odd word, returning (sorted word, sign); sign 0 on repeats."""
    u = list(u)
    if len(set(u)) != len(u):
        return (), 0
    sign = 1
    for i in range(len(u)):
        for j in range(len(u) - 1 - i):
            if u[j] > u[j + 1]:
                u[j], u[j + 1] = u[j + 1], u[j]
                sign = -sign
    return tuple(u), sign


def _merge_odd(u: tuple[int, ...], v: tuple[int, ...]):
    if set(u) & set(v):
        return None, 0
    inversions = sum(1 for a in u for b in v if a > b)
    return tuple(sorted(u + v)), (-1) ** inversions


@lru_cache(maxsize=1 << 18)
def _mono_product(params: Parameters, a: Monomial, b: Monomial):
    p = params.p
    coef = 1
    alpha = []
    for ai, bi, top in zip(a.alpha, b.alpha, params.pi):
        s = ai + bi
        if s > top:
            return None, 0
        coef = coef * lucas_binomial(s, ai, p) % p
        if coef == 0:
            return None, 0
        alpha.append(s)
    u, sign = _merge_odd(a.u, b.u)
    if u is None:
        return None, 0
    return Monomial(tuple(alpha), u), coef * sign % p


@lru_cache(maxsize=1 << 18)
def _mono_derive(params: Parameters, r: int, a: Monomial):
    m = params.m
    if r <= m:
        if a.alpha[r - 1] == 0:
            return None, 0
        alpha = list(a.alpha)
        alpha[r - 1] -= 1
        return Monomial(tuple(alpha), a.u), 1
    if r not in a.u:
        return None, 0
    k = a.u.index(r)
    return Monomial(a.alpha, a.u[:k] + a.u[k + 1:]), (-1) ** k % params.p


class SuperElement:
    """A GF(p)-linear combination of basis monomials of O(m,m;t)."""

    __slots__ = ("params", "terms", "_hash")

    def __init__(self, params: Parameters, terms: Mapping[Monomial, int] | None = None):
        self.params = params
        p = params.p
        clean = {}
        for mono, c in (terms or {}).items():
            c %= p
            if c:
                clean[mono] = c
        self.terms = clean
        self._hash = None

    @classmethod
    def zero(cls, params: Parameters) -> SuperElement:
        return cls(params)

    @classmethod
    def one(cls, params: Parameters) -> SuperElement:
        return cls(params, {Monomial((0,) * params.m, ()): 1})

    @classmethod
    def monomial(cls, params: Parameters, alpha: Iterable[int] = None,
                 u: Iterable[int] = (), c: int = 1) -> SuperElement:
        """``c * x^(alpha) x^u``; ``u`` may be unsorted (the sign is tracked)."""
        alpha = tuple(alpha) if alpha is not None else (0,) * params.m
        if len(alpha) != params.m:
            raise ConfigurationError("alpha has the wrong length")
        u = tuple(u)
        if any(not (params.m < i <= 2 * params.m) for i in u):
            raise ConfigurationError(f"odd indices must lie in {params.m + 1}..{2 * params.m}")
        if any(a < 0 for a in alpha):
            raise ConfigurationError("negative exponent")
        if any(a > top for a, top in zip(alpha, params.pi)):
            return cls(params)
        u, sign = _sort_odd(u)
        if sign == 0:
            return cls(params)
        return cls(params, {Monomial(alpha, u): c * sign})

    @classmethod
    def x(cls, params: Parameters, i: int, c: int = 1) -> SuperElement:
        """The generator x_i (i in 1..2m)."""
        if i <= params.m:
            alpha = [0] * params.m
            alpha[i - 1] = 1
            return cls.monomial(params, alpha, (), c)
        return cls.monomial(params, None, (i,), c)

    # -- arithmetic ---------------------------------------------------------

    def _check(self, other: SuperElement):
        if other.params != self.params:
            raise ConfigurationError("operands live over different parameters")

    def __add__(self, other):
        if isinstance(other, int):
            other = SuperElement.one(self.params) * other
        self._check(other)
        terms = dict(self.terms)
        for mono, c in other.terms.items():
            terms[mono] = terms.get(mono, 0) + c
        return SuperElement(self.params, terms)

    __radd__ = __add__

    def __neg__(self):
        return SuperElement(self.params, {k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, np.integer)):
            return SuperElement(self.params, {k: c * int(other) for k, c in self.terms.items()})
        if isinstance(other, SuperElement):
            return multiply(self, other)
        return NotImplemented

    def __rmul__(self, other):
        if isinstance(other, (int, np.integer)):
            return self * other
        return NotImplemented

    def __eq__(self, other):
        if isinstance(other, int):
            return self == SuperElement.one(self.params) * other
        if not isinstance(other, SuperElement):
            return NotImplemented
        return self.params == other.params and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.params, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def items(self):
        """Terms in canonical monomial order."""
        return sorted(self.terms.items(), key=lambda kv: monomial_key(kv[0]))

    def coefficient(self, mono: Monomial) -> int:
        return self.terms.get(mono, 0)

    def constant_term(self) -> int:
        return self.terms.get(Monomial((0,) * self.params.m, ()), 0)

    def is_homogeneous(self) -> bool:
        return len({mono.parity for mono in self.terms}) <= 1

    @property
    def parity(self) -> int:
        return parity(self)

    def grade(self) -> dict[int, SuperElement]:
        return grade(self)

    def min_degree(self) -> int | None:
        return min((mono.degree for mono in self.terms), default=None)

    def parity_components(self) -> dict[int, SuperElement]:
        parts: dict[int, dict] = {}
        for mono, c in self.terms.items():
            parts.setdefault(mono.parity, {})[mono] = c
        return {k: SuperElement(self.params, v) for k, v in sorted(parts.items())}

    def __repr__(self):
        if not self.terms:
            return "0"
        out = []
        for mono, c in self.items():
            body = []
            if any(mono.alpha):
                body.append("x^(" + ",".join(map(str, mono.alpha)) + ")")
            body.extend(f"x{i}" for i in mono.u)
            name = "".join(body) or "1"
            out.append(name if c == 1 and body else f"{c}*{name}" if body else str(c))
        return " + ".join(out)

    def to_json(self) -> list[dict]:
        return [{"alpha": list(mono.alpha), "u": list(mono.u), "c": int(c)}
                for mono, c in self.items()]

    @classmethod
    def from_json(cls, params: Parameters, data: Iterable[Mapping]) -> SuperElement:
        out = cls(params)
        for term in data:
            out = out + cls.monomial(params, term["alpha"], term["u"], int(term["c"]))
        return out


def multiply(f: SuperElement, g: SuperElement) -> SuperElement:
    """Product in O(m,m;t): divided-power rule on the even part, signed
    exterior product on the odd part."""
    f._check(g)
    params = f.params
    terms: dict[Monomial, int] = {}
    for a, ca in f.terms.items():
        for b, cb in g.terms.items():
            mono, coef = _mono_product(params, a, b)
            if mono is not None:
                terms[mono] = terms.get(mono, 0) + ca * cb * coef
    return SuperElement(params, terms)


def derive(r: int, f: SuperElement) -> SuperElement:
    """Apply the partial superderivation D_r."""
    params = f.params
    if not 1 <= r <= 2 * params.m:
        raise ConfigurationError(f"index {r} out of range")
    terms: dict[Monomial, int] = {}
    for a, c in f.terms.items():
        mono, coef = _mono_derive(params, r, a)
        if mono is not None:
            terms[mono] = terms.get(mono, 0) + c * coef
    return SuperElement(params, terms)


def grade(f: SuperElement) -> dict[int, SuperElement]:
    parts: dict[int, dict] = {}
    for mono, c in f.terms.items():
        parts.setdefault(mono.degree, {})[mono] = c
    return {d: SuperElement(f.params, parts[d]) for d in sorted(parts)}


def parity(f: SuperElement) -> int:
    """Z/2 parity; the zero element counts as even."""
    parities = {mono.parity for mono in f.terms}
    if len(parities) > 1:
        raise ParityError(f"element {f!r} has mixed parity")
    return parities.pop() if parities else 0


def in_filtration(f: SuperElement, k: int) -> bool:
    """Whether f lies in O_k (all components of degree >= k)."""
    return all(mono.degree >= k for mono in f.terms)


def divided_power(params: Parameters, alpha) -> SuperElement:
    return SuperElement.monomial(params, alpha)


# ---------------------------------------------------------------------------
# dense basis layer
# ---------------------------------------------------------------------------

class OBasis:
    """Dense indexing of the monomial basis of O with product/derivative tables.

    Monomials are ordered by (degree, parity, alpha, u), so each homogeneous
    degree is a contiguous block with its even part first.
    """

    def __init__(self, params: Parameters):
        self.params = params
        p, m = params.p, params.m
        self.alphas = list(itertools.product(*[range(top + 1) for top in params.pi]))
        odd = range(m + 1, 2 * m + 1)
        self.words = [w for k in range(m + 1) for w in itertools.combinations(odd, k)]
        monos = [Monomial(a, w) for a in self.alphas for w in self.words]
        monos.sort(key=monomial_key)
        self.monomials = monos
        self.index = {mono: i for i, mono in enumerate(monos)}
        self.dim = len(monos)
        self.deg = np.array([mono.degree for mono in monos], dtype=np.int64)
        self.par = np.array([mono.parity for mono in monos], dtype=np.int64)
        self.degrees = list(range(params.xi + 1))
        self._slices = {}
        for d in self.degrees:
            idx = np.flatnonzero(self.deg == d)
            self._slices[d] = slice(int(idx[0]), int(idx[-1]) + 1)
        self.one_index = self.index[Monomial((0,) * m, ())]

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

    # -- conversions ----------------------------------------------------------

    def vector(self, f: SuperElement) -> np.ndarray:
        if f.params != self.params:
            raise ConfigurationError("element lives over different parameters")
        vec = np.zeros(self.dim, dtype=np.int64)
        for mono, c in f.terms.items():
            vec[self.index[mono]] = c
        return vec

    def element(self, vec: np.ndarray) -> SuperElement:
        nz = np.flatnonzero(vec)
        return SuperElement(self.params, {self.monomials[i]: int(vec[i]) for i in nz})

    def basis_element(self, i: int) -> SuperElement:
        return SuperElement(self.params, {self.monomials[i]: 1})

    # -- tables ---------------------------------------------------------------

    @cached_property
    def _product_table(self):
        params = self.params
        p, m = params.p, params.m
        pi = np.array(params.pi)
        top = int(pi.max())
        binom = np.array([[lucas_binomial(n, k, p) for k in range(top + 1)]
                          for n in range(top + 1)], dtype=np.int64)
        A = np.array(self.alphas, dtype=np.int64).reshape(len(self.alphas), m)
        radices = pi + 1
        weights = np.array([int(np.prod(radices[i + 1:])) for i in range(m)], dtype=np.int64)
        S = A[:, None, :] + A[None, :, :]
        valid = np.all(S <= pi, axis=2)
        Sc = np.minimum(S, pi)
        coef = np.ones(valid.shape, dtype=np.int64)
        for i in range(m):
            coef = coef * binom[Sc[:, :, i], A[:, None, i]] % p
        coef[~valid] = 0
        a_idx = np.where(valid & (coef != 0), Sc @ weights, -1)

        nw = len(self.words)
        w_idx = np.full((nw, nw), -1, dtype=np.int64)
        w_sign = np.zeros((nw, nw), dtype=np.int64)
        word_pos = {w: i for i, w in enumerate(self.words)}
        for i, u in enumerate(self.words):
            for j, v in enumerate(self.words):
                w, s = _merge_odd(u, v)
                if w is not None:
                    w_idx[i, j] = word_pos[w]
                    w_sign[i, j] = s % p

        G = np.empty((len(self.alphas), nw), dtype=np.int64)
        alpha_pos = {a: i for i, a in enumerate(self.alphas)}
        for mono, gi in self.index.items():
            G[alpha_pos[mono.alpha], word_pos[mono.u]] = gi
        ma = np.array([alpha_pos[mono.alpha] for mono in self.monomials])
        mw = np.array([word_pos[mono.u] for mono in self.monomials])

        ai = a_idx[ma[:, None], ma[None, :]]
        wi = w_idx[mw[:, None], mw[None, :]]
        ok = (ai >= 0) & (wi >= 0)
        idx = np.full(ai.shape, -1, dtype=np.int64)
        idx[ok] = G[ai[ok], wi[ok]]
        c = coef[ma[:, None], ma[None, :]] * w_sign[mw[:, None], mw[None, :]] % p
        c[~ok] = 0
        return idx, c

    @property
    def prod_idx(self) -> np.ndarray:
        return self._product_table[0]

    @property
    def prod_coef(self) -> np.ndarray:
        return self._product_table[1]

    @cached_property
    def _derivative_table(self):
        params = self.params
        n = 2 * params.m
        idx = np.full((n + 1, self.dim), -1, dtype=np.int64)
        coef = np.zeros((n + 1, self.dim), dtype=np.int64)
        for r in params.indices:
            for j, mono in enumerate(self.monomials):
                res, c = _mono_derive(params, r, mono)
                if res is not None:
                    idx[r, j] = self.index[res]
                    coef[r, j] = c
        return idx, coef

    @property
    def d_idx(self) -> np.ndarray:
        """``d_idx[r, j]``: index of D_r(monomial j), or -1."""
        return self._derivative_table[0]

    @property
    def d_coef(self) -> np.ndarray:
        return self._derivative_table[1]

    # -- dense operations -----------------------------------------------------

    def mul(self, f: np.ndarray, g: np.ndarray) -> np.ndarray:
        fi = np.flatnonzero(f)
        gi = np.flatnonzero(g)
        if fi.size == 0 or gi.size == 0:
            return np.zeros(self.dim, dtype=np.int64)
        idx = self.prod_idx[np.ix_(fi, gi)]
        c = self.prod_coef[np.ix_(fi, gi)] * f[fi, None] % self.params.p * g[None, gi]
        mask = idx >= 0
        out = np.bincount(idx[mask], weights=c[mask].astype(np.float64), minlength=self.dim)
        return np.mod(out, self.params.p).astype(np.int64)

    def derive(self, r: int, f: np.ndarray) -> np.ndarray:
        idx, c = self.d_idx[r], self.d_coef[r]
        mask = (idx >= 0) & (f != 0)
        out = np.zeros(self.dim, dtype=np.int64)
        np.add.at(out, idx[mask], c[mask] * f[mask])
        return out % self.params.p

    def derivative_matrix(self, r: int) -> np.ndarray:
        mat = np.zeros((self.dim, self.dim), dtype=np.int64)
        cols = np.flatnonzero(self.d_idx[r] >= 0)
        mat[self.d_idx[r, cols], cols] = self.d_coef[r, cols]
        return mat

    def left_mult_matrix(self, v: np.ndarray) -> np.ndarray:
        """Matrix M with ``M @ w == v * w``."""
        nz = np.flatnonzero(v)
        return self._mult_matrix(self.prod_idx[nz], self.prod_coef[nz] * v[nz, None])

    def right_mult_matrix(self, v: np.ndarray) -> np.ndarray:
        """Matrix M with ``M @ w == w * v``."""
        nz = np.flatnonzero(v)
        return self._mult_matrix(self.prod_idx[:, nz].T, self.prod_coef[:, nz].T * v[nz, None])

    def _mult_matrix(self, rows: np.ndarray, vals: np.ndarray) -> np.ndarray:
        # rows[k, c] is the target index of column c for the k-th term
        flat = rows * self.dim + np.arange(self.dim)[None, :]
        ok = rows >= 0
        mat = np.bincount(flat[ok], weights=(vals[ok] % self.params.p).astype(np.float64),
                          minlength=self.dim * self.dim)
        return np.mod(mat, self.params.p).astype(np.int64).reshape(self.dim, self.dim)

    def generator_index(self, i: int) -> int:
        return self.index[next(iter(SuperElement.x(self.params, i).terms))]


@lru_cache(maxsize=None)
def obasis(params: Parameters) -> OBasis:
    return OBasis(params)
