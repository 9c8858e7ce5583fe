"""Exact linear algebra over the prime field GF(p).

Everything here works on numpy ``int64`` arrays holding residues in
``[0, p)``.  Matrix products are routed through float64 BLAS whenever the
accumulated sum is guaranteed to stay below 2**53, which keeps them exact.
"""

from __future__ import annotations

from functools import lru_cache
from math import comb

import numpy as np

_EXACT_FLOAT = 2**53


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    k = 3
    while k * k <= n:
        if n % k == 0:
            return False
        k += 2
    return True


@lru_cache(maxsize=None)
def inverse_table(p: int) -> np.ndarray:
    """``table[a]`` is the inverse of ``a`` mod p (``table[0] == 0``)."""
    table = np.zeros(p, dtype=np.int64)
    for a in range(1, p):
        table[a] = pow(a, -1, p)
    return table


def inv(a: int, p: int) -> int:
    a %= p
    if a == 0:
        raise ZeroDivisionError(f"0 has no inverse mod {p}")
    return pow(a, -1, p)


def lucas_binomial(n: int, k: int, p: int) -> int:
    """Binomial coefficient C(n, k) mod p, digit by digit in base p."""
    if k < 0 or k > n:
        return 0
    result = 1
    while n or k:
        n, ni = divmod(n, p)
        k, ki = divmod(k, p)
        if ki > ni:
            return 0
        result = result * comb(ni, ki) % p
    return result


def matmul_mod(a: np.ndarray, b: np.ndarray, p: int) -> np.ndarray:
    inner = a.shape[-1]
    if inner == 0:
        return np.zeros(a.shape[:-1] + b.shape[-1:], dtype=np.int64)
    if (p - 1) ** 2 * inner < _EXACT_FLOAT:
        out = a.astype(np.float64) @ b.astype(np.float64)
        return np.mod(out, p).astype(np.int64)
    return np.mod(a.astype(object) @ b.astype(object), p).astype(np.int64)


def rref(mat: np.ndarray, p: int) -> tuple[np.ndarray, list[int]]:
    """Reduced row echelon form mod p.

    Returns the nonzero rows of the RREF and their pivot columns.
    """
    a = np.mod(np.array(mat, dtype=np.int64), p)
    if a.ndim != 2:
        raise ValueError("rref expects a 2-d array")
    inv_t = inverse_table(p)
    nrows, ncols = a.shape
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        nz = np.flatnonzero(a[r:, c])
        if nz.size == 0:
            continue
        k = r + nz[0]
        if k != r:
            a[[r, k]] = a[[k, r]]
        a[r] = a[r] * inv_t[a[r, c]] % p
        col = a[:, c].copy()
        col[r] = 0
        rows = np.flatnonzero(col)
        if rows.size:
            a[rows] = (a[rows] - np.outer(col[rows], a[r])) % p
        pivots.append(c)
        r += 1
    return a[:r], pivots


def rank(mat: np.ndarray, p: int) -> int:
    mat = np.asarray(mat)
    if mat.size == 0:
        return 0
    return len(rref(mat, p)[1])


def nullspace(mat: np.ndarray, p: int) -> np.ndarray:
    """Basis (as rows) of ``{v : mat @ v == 0}``."""
    mat = np.asarray(mat, dtype=np.int64)
    n = mat.shape[1]
    if mat.shape[0] == 0:
        return np.eye(n, dtype=np.int64)
    r, pivots = rref(mat, p)
    free = [c for c in range(n) if c not in set(pivots)]
    basis = np.zeros((len(free), n), dtype=np.int64)
    for row, f in enumerate(free):
        basis[row, f] = 1
        for i, pc in enumerate(pivots):
            basis[row, pc] = (-r[i, f]) % p
    return basis


def inverse(mat: np.ndarray, p: int) -> np.ndarray:
    mat = np.asarray(mat, dtype=np.int64)
    n = mat.shape[0]
    if mat.shape != (n, n):
        raise ValueError("inverse expects a square matrix")
    aug = np.concatenate([mat % p, np.eye(n, dtype=np.int64)], axis=1)
    r, pivots = rref(aug, p)
    if pivots[:n] != list(range(n)) or len(pivots) < n:
        raise ZeroDivisionError("matrix is singular mod p")
    return r[:, n:]


def solve(mat: np.ndarray, rhs: np.ndarray, p: int) -> np.ndarray | None:
    """One solution ``x`` of ``mat @ x == rhs`` (rhs may hold several columns),
    or None when the system is inconsistent."""
    mat = np.asarray(mat, dtype=np.int64) % p
    rhs = np.asarray(rhs, dtype=np.int64) % p
    vec = rhs.ndim == 1
    if vec:
        rhs = rhs[:, None]
    n = mat.shape[1]
    r, pivots = rref(np.concatenate([mat, rhs], axis=1), p)
    if any(pc >= n for pc in pivots):
        return None
    x = np.zeros((n, rhs.shape[1]), dtype=np.int64)
    for i, pc in enumerate(pivots):
        x[pc] = r[i, n:]
    return x[:, 0] if vec else x


def bilinear_products(a: np.ndarray, b: np.ndarray, tensor, n_out: int,
                      p: int) -> np.ndarray:
    """All products ``a[s] * b[t]`` under a sparse bilinear map.

    ``tensor`` is ``(ia, ib, ik, val)``: basis vector ``ia`` times basis
    vector ``ib`` contributes ``val`` at output coordinate ``ik``.
    Returns an array of shape ``(len(a), len(b), n_out)``.
    """
    ia, ib, ik, val = tensor
    out = np.zeros((a.shape[0], b.shape[0], n_out), dtype=np.int64)
    if a.shape[0] == 0 or b.shape[0] == 0 or ia.size == 0:
        return out
    inner_bound = (p - 1) ** 3 * ia.size
    if inner_bound >= _EXACT_FLOAT:
        raise OverflowError("bilinear product too large for exact float path")
    order = np.argsort(ik, kind="stable")
    ia, ib, ik, val = ia[order], ib[order], ik[order], val[order]
    pa = a[:, ia].astype(np.float64) * val
    qb = b[:, ib].astype(np.float64)
    keys, starts = np.unique(ik, return_index=True)
    ends = np.append(starts[1:], ik.size)
    for k, s, e in zip(keys, starts, ends):
        out[:, :, k] = np.mod(pa[:, s:e] @ qb[:, s:e].T, p).astype(np.int64)
    return out


class EchelonBasis:
    """A subspace of GF(p)^n kept in reduced row echelon form.

    Coordinates of a member with respect to the stored rows are simply its
    entries at the pivot columns.
    """

    def __init__(self, n: int, p: int):
        self.n = n
        self.p = p
        self.rows = np.zeros((0, n), dtype=np.int64)
        self.pivots = np.zeros(0, dtype=np.int64)
        self.frozen = False

    def __len__(self) -> int:
        return self.rows.shape[0]

    @property
    def rank(self) -> int:
        return self.rows.shape[0]

    def copy(self) -> EchelonBasis:
        other = EchelonBasis(self.n, self.p)
        other.rows = self.rows.copy()
        other.pivots = self.pivots.copy()
        return other

    def reduce(self, vecs: np.ndarray) -> np.ndarray:
        x = np.mod(np.atleast_2d(np.asarray(vecs, dtype=np.int64)), self.p)
        if self.rank:
            x = (x - matmul_mod(x[:, self.pivots], self.rows, self.p)) % self.p
        return x

    def insert(self, vecs: np.ndarray, chunk: int = 1024,
               limit: int | None = None) -> int:
        """Add vectors to the span; returns how much the rank grew.

        Stops early once ``limit`` (an upper bound on the final rank) is hit.
        """
        if self.frozen:
            raise RuntimeError("cannot insert into a frozen subspace")
        vecs = np.atleast_2d(np.asarray(vecs, dtype=np.int64))
        before = self.rank
        for start in range(0, vecs.shape[0], chunk):
            if limit is not None and self.rank >= limit:
                break
            res = self.reduce(vecs[start:start + chunk])
            res = res[np.any(res, axis=1)]
            if res.shape[0] == 0:
                continue
            new_rows, new_piv = rref(res, self.p)
            if not new_piv:
                continue
            if self.rank:
                old = (self.rows - matmul_mod(self.rows[:, new_piv], new_rows,
                                              self.p)) % self.p
            else:
                old = self.rows
            rows = np.concatenate([old, new_rows])
            pivots = np.concatenate([self.pivots, np.array(new_piv)])
            order = np.argsort(pivots, kind="stable")
            self.rows, self.pivots = rows[order], pivots[order]
        return self.rank - before

    def contains(self, vecs: np.ndarray) -> np.ndarray:
        """Boolean membership per row of ``vecs``."""
        return ~np.any(self.reduce(vecs), axis=1)

    def coordinates(self, vecs: np.ndarray) -> np.ndarray:
        vecs = np.mod(np.atleast_2d(np.asarray(vecs, dtype=np.int64)), self.p)
        if not np.all(self.contains(vecs)):
            raise ValueError("vector is not in the subspace")
        return vecs[:, self.pivots]

    def freeze(self) -> EchelonBasis:
        self.frozen = True
        return self
