"""Automorphisms of O and of the Cartan-type algebra g, and the map Phi between them.

Only the restricted case t = (1, ..., 1) is supported: there every even
exponent is below p, so ``sigma(x^(alpha)) = prod y_i^{alpha_i} / alpha_i!``
and an automorphism of O is determined by the images ``y_j = sigma(x_j)`` of
the 2m generators.

Dense conventions: an automorphism of O is the (dim O x dim O) matrix whose
columns are the images of the monomial basis; an automorphism of g is the
(dim g x dim g) matrix whose columns are coordinates of the images of the
frozen basis of g.
"""

from __future__ import annotations

from functools import cached_property, lru_cache

import numpy as np

from .cartan import normalize_tag, t_h
from .errors import (ConfigurationError, DomainError, ParityError, ReconstructionError,
                     SamplingError, SingularityError)
from .gf import bilinear_products, inv, inverse, matmul_mod, rank, rref
from .superalgebra import Parameters, SuperElement, obasis
from .witt import Derivation, GradedSubspace, OMatrix, structure_tensor, wbasis


def _require_restricted(params: Parameters):
    if not params.is_restricted_case:
        raise ConfigurationError("automorphisms are only supported for t = (1, ..., 1)")


@lru_cache(maxsize=None)
def _product_tensor(params: Parameters):
    O = obasis(params)
    ia, ib = np.nonzero(O.prod_idx >= 0)
    val = O.prod_coef[ia, ib]
    keep = val != 0
    return ia[keep], ib[keep], O.prod_idx[ia, ib][keep], val[keep]


def _sigma_matrix(params: Parameters, Y: np.ndarray) -> np.ndarray:
    """Columns: images of the monomial basis under the substitution x_j -> Y[j-1]."""
    O, p = obasis(params), params.p
    S = np.zeros((O.dim, O.dim), dtype=np.int64)
    for col, mono in enumerate(O.monomials):
        if mono.u:
            prev = O.index[type(mono)(mono.alpha, mono.u[:-1])]
            S[:, col] = O.mul(S[:, prev], Y[mono.u[-1] - 1])
        elif any(mono.alpha):
            i = next(k for k, a in enumerate(mono.alpha) if a)
            alpha = list(mono.alpha)
            alpha[i] -= 1
            prev = O.index[type(mono)(tuple(alpha), ())]
            S[:, col] = O.mul(S[:, prev], Y[i]) * inv(mono.alpha[i], p) % p
        else:
            S[col, col] = 1
    return S


class OAutomorphism:
    """An automorphism of O given by the generator images ``y_j = sigma(x_j)``.

    Build through :func:`make_automorphism`, which validates the images.
    """

    def __init__(self, params: Parameters, images, _validated: bool = False):
        if not _validated:
            raise RuntimeError("use make_automorphism to construct automorphisms")
        self.params = params
        self.images = tuple(images)
        O = obasis(params)
        self.vectors = np.array([O.vector(y) for y in self.images], dtype=np.int64)

    @cached_property
    def matrix(self) -> np.ndarray:
        return _sigma_matrix(self.params, self.vectors)

    @cached_property
    def linear_part(self) -> np.ndarray:
        """``L[i-1, j-1]`` = coefficient of x_i in y_j, i.e. pr_[0](D_i y_j)."""
        O = obasis(self.params)
        gens = [O.generator_index(i) for i in self.params.indices]
        return self.vectors[:, gens].T.copy()

    def apply_vector(self, v: np.ndarray) -> np.ndarray:
        return matmul_mod(self.matrix, np.asarray(v, dtype=np.int64), self.params.p)

    def __call__(self, f: SuperElement) -> SuperElement:
        O = obasis(self.params)
        return O.element(self.apply_vector(O.vector(f)))

    @cached_property
    def inverse_vectors(self) -> np.ndarray:
        return _invert_vectors(self)

    def __eq__(self, other):
        return isinstance(other, OAutomorphism) and self.params == other.params \
            and bool(np.all(self.vectors == other.vectors))

    def __hash__(self):
        return hash((self.params, self.vectors.tobytes()))

    def is_identity(self) -> bool:
        return self == identity(self.params)

    def __repr__(self):
        return "OAutomorphism(" + ", ".join(f"x{j}->{y!r}" for j, y in
                                           zip(self.params.indices, self.images)) + ")"

    def to_json(self) -> dict:
        return {"params": self.params.to_json(), "images": [y.to_json() for y in self.images]}

    @classmethod
    def from_json(cls, data, params: Parameters | None = None) -> OAutomorphism:
        if params is None:
            params = Parameters.from_json(data["params"])
        return make_automorphism(params, [SuperElement.from_json(params, y) for y in data["images"]])


def make_automorphism(params: Parameters, images) -> OAutomorphism:
    """Validate generator images and return the automorphism they define."""
    _require_restricted(params)
    images = list(images)
    if len(images) != 2 * params.m:
        raise ConfigurationError(f"need {2 * params.m} images, got {len(images)}")
    for j, y in zip(params.indices, images):
        if not isinstance(y, SuperElement) or y.params != params:
            raise ConfigurationError(f"image of x{j} lives over different parameters")
        if not y:
            raise SingularityError(f"image of x{j} is zero")
        if not y.is_homogeneous() or y.parity != params.mu(j):
            raise ParityError(f"image of x{j} must have parity {params.mu(j)}")
        if y.constant_term():
            raise DomainError(f"image of x{j} has a constant term")
    sigma = OAutomorphism(params, images, _validated=True)
    if rank(sigma.linear_part, params.p) != 2 * params.m:
        raise SingularityError("linear part of the substitution is singular")
    return sigma


def identity(params: Parameters) -> OAutomorphism:
    return make_automorphism(params, [SuperElement.x(params, j) for j in params.indices])


def linear_automorphism(params: Parameters, L: np.ndarray) -> OAutomorphism:
    """The substitution ``x_j -> sum_i L[i-1, j-1] x_i`` (L parity-block diagonal)."""
    images = []
    for j in params.indices:
        y = SuperElement.zero(params)
        for i in params.indices:
            if L[i - 1, j - 1] % params.p:
                y = y + SuperElement.x(params, i, int(L[i - 1, j - 1]))
        images.append(y)
    return make_automorphism(params, images)


def apply(sigma: OAutomorphism, f: SuperElement) -> SuperElement:
    return sigma(f)


def compose(sigma: OAutomorphism, tau: OAutomorphism) -> OAutomorphism:
    """``sigma o tau``."""
    O = obasis(sigma.params)
    imgs = matmul_mod(sigma.matrix, tau.vectors.T, sigma.params.p).T
    return make_automorphism(sigma.params, [O.element(v) for v in imgs])


def _invert_vectors(sigma: OAutomorphism) -> np.ndarray:
    """Generator images of sigma^{-1}: invert the linear part, then cancel the
    lowest-degree discrepancy until none is left (at most xi rounds)."""
    params, O = sigma.params, obasis(sigma.params)
    p = params.p
    Linv = inverse(sigma.linear_part, p)
    lam_inv = linear_automorphism(params, Linv)
    Z = lam_inv.vectors.copy()
    G = np.zeros_like(Z)
    for k in params.indices:
        G[k - 1, O.generator_index(k)] = 1
    for _ in range(params.xi + 1):
        R = (matmul_mod(sigma.matrix, Z.T, p).T - G) % p
        if not np.any(R):
            return Z
        d = int(O.deg[np.any(R, axis=0)].min())
        lead = np.where(O.deg[None, :] == d, R, 0)
        Z = (Z - matmul_mod(lam_inv.matrix, lead.T, p).T) % p
    raise RuntimeError("inverse iteration did not terminate")


def invert(sigma: OAutomorphism) -> OAutomorphism:
    O = obasis(sigma.params)
    return make_automorphism(sigma.params, [O.element(v) for v in sigma.inverse_vectors])


def commutator(sigma: OAutomorphism, tau: OAutomorphism) -> OAutomorphism:
    """Group commutator ``sigma^{-1} tau^{-1} sigma tau``."""
    return compose(compose(invert(sigma), invert(tau)), compose(sigma, tau))


# ---------------------------------------------------------------------------
# conjugation
# ---------------------------------------------------------------------------

def conjugate_vectors(sigma: OAutomorphism, vecs: np.ndarray) -> np.ndarray:
    """Rows of ``vecs`` (elements of W) conjugated by sigma: ``sigma D sigma^{-1}``.

    The result E has ``E(x_k) = sigma(D(z_k))`` with ``z_k = sigma^{-1}(x_k)``,
    and ``D(z_k) = sum_r f_r D_r(z_k)``.
    """
    params = sigma.params
    p = params.p
    O, W = obasis(params), wbasis(params)
    vecs = np.atleast_2d(np.asarray(vecs, dtype=np.int64)) % p
    F = np.stack([vecs[:, W.lookup[:, r]] for r in params.indices], axis=1)
    Z = sigma.inverse_vectors
    out = np.zeros_like(vecs)
    for k in params.indices:
        acc = np.zeros((vecs.shape[0], O.dim), dtype=np.int64)
        for r in params.indices:
            w = O.derive(r, Z[k - 1])
            if not np.any(w) or not np.any(F[:, r - 1]):
                continue
            acc += matmul_mod(F[:, r - 1], O.right_mult_matrix(w).T, p)
        out[:, W.lookup[:, k]] = matmul_mod(acc % p, sigma.matrix.T, p)
    return out


def conjugate(sigma: OAutomorphism, D: Derivation) -> Derivation:
    W = wbasis(sigma.params)
    return W.derivation(conjugate_vectors(sigma, W.vector(D))[0])


def is_admissible(sigma: OAutomorphism, g: GradedSubspace) -> bool:
    """Does conjugation by sigma map g into itself?"""
    if g.dim == 0:
        return True
    return bool(np.all(g.contains_vectors(conjugate_vectors(sigma, g.basis_matrix))))


# ---------------------------------------------------------------------------
# automorphisms of g
# ---------------------------------------------------------------------------

class GAutomorphism:
    """A linear automorphism of g, as a matrix on the frozen basis (column j holds
    the coordinates of the image of basis vector j)."""

    def __init__(self, g: GradedSubspace, matrix, verified: bool = False):
        self.g = g
        self.matrix = np.asarray(matrix, dtype=np.int64) % g.params.p
        if self.matrix.shape != (g.dim, g.dim):
            raise ConfigurationError(f"matrix must be {g.dim}x{g.dim}")
        self.verified = verified

    @classmethod
    def identity(cls, g: GradedSubspace) -> GAutomorphism:
        return cls(g, np.eye(g.dim, dtype=np.int64), verified=True)

    def __matmul__(self, other: GAutomorphism) -> GAutomorphism:
        return GAutomorphism(self.g, matmul_mod(self.matrix, other.matrix, self.g.params.p),
                             self.verified and other.verified)

    def inverse(self) -> GAutomorphism:
        return GAutomorphism(self.g, inverse(self.matrix, self.g.params.p), self.verified)

    def __eq__(self, other):
        return isinstance(other, GAutomorphism) and self.g is other.g \
            and bool(np.all(self.matrix == other.matrix))

    __hash__ = None

    def images(self, coords: np.ndarray | None = None) -> np.ndarray:
        """W-vectors of the images of the basis (or of given coordinate columns)."""
        p = self.g.params.p
        cols = self.matrix if coords is None else matmul_mod(self.matrix, coords, p)
        return matmul_mod(cols.T, self.g.basis_matrix, p)

    def __call__(self, x: np.ndarray) -> np.ndarray:
        c = self.g.coordinates(x).T
        return self.images(c)

    def to_json(self) -> dict:
        return {"params": self.g.params.to_json(), "algebra": self.g.name,
                "basis": self.g.labels(), "matrix": self.matrix.tolist()}


def check_g_automorphism(g: GradedSubspace, matrix, seed: int = 0, pairs: int = 400) -> dict:
    """Check that a matrix is a filtered, parity-preserving automorphism of g.

    Multiplicativity is checked on all basis pairs through the structure tensor
    when ``dim g <= 200``, else on a seeded sample of ``pairs`` pairs.
    Returns a dict with per-check booleans and, on failure, a location.
    """
    p = g.params.p
    M = np.asarray(matrix, dtype=np.int64) % p
    n = g.dim
    out = {"shape": M.shape == (n, n)}
    if not out["shape"]:
        return {**out, "ok": False}
    deg, par = g.basis_degrees, g.basis_parities
    nz = M != 0
    out["invertible"] = rank(M, p) == n
    out["parity"] = not np.any(nz & (par[:, None] != par[None, :]))
    out["filtration"] = not np.any(nz & (deg[:, None] < deg[None, :]))
    if n <= 200:
        C = structure_tensor(g)
        lhs = matmul_mod(C.reshape(n * n, n), M.T, p).reshape(n, n, n)
        T = matmul_mod(M.T, C.reshape(n, n * n), p).reshape(n, n, n)
        rhs = matmul_mod(T.transpose(0, 2, 1).reshape(n * n, n), M, p).reshape(n, n, n).transpose(0, 2, 1)
        bad = np.argwhere(np.any(lhs != rhs, axis=2))
    else:
        W = g.ambient
        rng = np.random.default_rng(seed)
        a = rng.integers(0, n, pairs)
        b = rng.integers(0, n, pairs)
        B = g.basis_matrix
        br = W.bracket_rows(B[a], B[b])
        img = matmul_mod(M.T, B, p)
        lhs = matmul_mod(matmul_mod(g.coordinates(br), M.T, p), B, p)
        rhs = W.bracket_rows(img[a], img[b])
        rows = np.flatnonzero(np.any(lhs != rhs, axis=1))
        bad = np.stack([a[rows], b[rows]], axis=1)
    out["multiplicative"] = bad.shape[0] == 0
    if bad.shape[0]:
        labels = g.labels()
        out["location"] = [labels[int(bad[0, 0])], labels[int(bad[0, 1])]]
    out["ok"] = all(out[k] for k in ("shape", "invertible", "parity", "filtration", "multiplicative"))
    return out


def g_automorphism(g: GradedSubspace, matrix, seed: int = 0) -> GAutomorphism:
    """Validate a raw matrix and wrap it; raises DomainError with the failed check."""
    res = check_g_automorphism(g, matrix, seed)
    if not res["ok"]:
        failed = [k for k in ("shape", "invertible", "parity", "filtration", "multiplicative")
                  if not res.get(k, False)]
        raise DomainError(f"not an automorphism of {g.name}: fails {', '.join(failed)}"
                          + (f" at {res['location']}" if "location" in res else ""))
    return GAutomorphism(g, matrix, verified=True)


def phi(sigma: OAutomorphism, g: GradedSubspace) -> GAutomorphism:
    """Restriction of ``D -> sigma D sigma^{-1}`` to g."""
    if g.dim == 0:
        return GAutomorphism(g, np.zeros((0, 0), dtype=np.int64), True)
    imgs = conjugate_vectors(sigma, g.basis_matrix)
    ok = g.contains_vectors(imgs)
    if not np.all(ok):
        raise DomainError(f"automorphism is not admissible for {g.name}: "
                          f"{g.labels()[int(np.flatnonzero(~ok)[0])]} escapes")
    return GAutomorphism(g, g.coordinates(imgs).T, verified=True)


# ---------------------------------------------------------------------------
# filtration depth and homogeneity
# ---------------------------------------------------------------------------

def depth_O(sigma: OAutomorphism) -> int | None:
    """Largest i with (sigma - 1)(O_j) in O_{i+j} for all j; None for the identity.

    It suffices to look at generators since
    ``sigma(fg) - fg = (sigma f - f) sigma g + f (sigma g - g)``.
    """
    O = obasis(sigma.params)
    best = None
    for j in sigma.params.indices:
        diff = sigma.vectors[j - 1].copy()
        diff[O.generator_index(j)] -= 1
        diff %= sigma.params.p
        nz = np.flatnonzero(diff)
        if nz.size:
            d = int(O.deg[nz].min()) - 1
            best = d if best is None else min(best, d)
    return best


def depth_g(phi_g: GAutomorphism) -> int | None:
    """Largest i with (phi - 1)(g_j) in g_{i+j} for all j; None for the identity."""
    g = phi_g.g
    D = (phi_g.matrix - np.eye(g.dim, dtype=np.int64)) % g.params.p
    deg = g.basis_degrees
    best = None
    for b in range(g.dim):
        rows = np.flatnonzero(D[:, b])
        if rows.size:
            d = int(deg[rows].min() - deg[b])
            best = d if best is None else min(best, d)
    return best


def in_aut_i(depth: int | None, i: int) -> bool:
    return depth is None or depth >= i


def is_homogeneous_O(sigma: OAutomorphism) -> bool:
    O = obasis(sigma.params)
    return not np.any(sigma.vectors[:, O.deg != 1])


def is_homogeneous_g(phi_g: GAutomorphism) -> bool:
    deg = phi_g.g.basis_degrees
    return not np.any((phi_g.matrix != 0) & (deg[:, None] != deg[None, :]))


# ---------------------------------------------------------------------------
# matrices over O and the inverse of Phi
# ---------------------------------------------------------------------------

def _dense(A: OMatrix) -> np.ndarray:
    O = obasis(A.params)
    return np.array([[O.vector(a) for a in row] for row in A.rows], dtype=np.int64)


def _from_dense(params: Parameters, arr: np.ndarray) -> OMatrix:
    O = obasis(params)
    return OMatrix(params, [[O.element(v) for v in row] for row in arr])


def o_matmul(params: Parameters, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Product of dense O-matrices of shapes (a, n, dim O) and (n, b, dim O)."""
    O, p = obasis(params), params.p
    tensor = _product_tensor(params)
    out = np.zeros((A.shape[0], B.shape[1], O.dim), dtype=np.int64)
    for k in range(A.shape[1]):
        if np.any(A[:, k]) and np.any(B[k]):
            out += bilinear_products(A[:, k], B[k], tensor, O.dim, p)
    return out % p


def _scalar_left(S: np.ndarray, A: np.ndarray, p: int) -> np.ndarray:
    return np.einsum("ik,kjd->ijd", S, A) % p


def _scalar_right(A: np.ndarray, S: np.ndarray, p: int) -> np.ndarray:
    return np.einsum("ikd,kj->ijd", A, S) % p


def invert_over_O_dense(params: Parameters, A: np.ndarray) -> np.ndarray:
    O, p = obasis(params), params.p
    n = A.shape[0]
    A0 = A[:, :, O.one_index].copy()
    try:
        A0inv = inverse(A0, p)
    except ZeroDivisionError:
        raise SingularityError("scalar part of the O-matrix is singular") from None
    A1 = A.copy()
    A1[:, :, O.one_index] = 0
    N = _scalar_left(A0inv, A1, p)
    eye = np.zeros_like(A)
    eye[np.arange(n), np.arange(n), O.one_index] = 1
    total, term = eye.copy(), eye
    for _ in range(params.xi + 1):
        term = (-o_matmul(params, term, N)) % p
        if not np.any(term):
            break
        total = (total + term) % p
    return _scalar_right(total, A0inv, p)


def invert_over_O(A: OMatrix) -> OMatrix:
    """Inverse of a matrix over O with invertible scalar part, via
    ``(I + N)^{-1} pr_0(A)^{-1}`` and the finite Neumann series for N = pr_0(A)^{-1} pr_1(A)."""
    return _from_dense(A.params, invert_over_O_dense(A.params, _dense(A)))


def basis_transport_matrix(phi_g: GAutomorphism) -> np.ndarray:
    """Dense O-matrix whose row i holds the D-coefficients of phi(D_{i+1})."""
    g = phi_g.g
    params = g.params
    W = wbasis(params)
    part = np.zeros((2 * params.m, W.dim), dtype=np.int64)
    for r in params.indices:
        part[r - 1, W.partial_index(r)] = 1
    imgs = phi_g.images(g.coordinates(part).T)
    return np.stack([W.coefficient_vectors(v) for v in imgs])


def _extraction_candidates(params: Parameters, j: int):
    """Potentials a and directions l such that the D_l-coefficient of T_H(a) is c x_j."""
    x = lambda i: SuperElement.x(params, i)
    first = params.prime(1)
    out = []
    if j != first:
        out.append((f"T_H(x1*x{j})", x(1) * x(j), first))
    else:
        out.append((f"T_H(x2*x{j})", x(2) * x(j), params.prime(2)))
        out.append((f"T_H(x1*x{first} - x2*x{params.prime(2)})",
                    x(1) * x(first) - x(2) * x(params.prime(2)), first))
    for k in params.indices:
        if k not in (1, 2):
            out.append((f"T_H(x{k}*x{j})", x(k) * x(j), params.prime(k)))
    return out


def reconstruct_sigma(phi_g, g: GradedSubspace | None = None) -> OAutomorphism:
    """Recover sigma with phi(sigma) = phi_g.

    {phi(D_i)} is an O-basis of W.  For an element T_H(a) of g whose
    D_l-coefficient is ``c x_j``, the coefficient of ``phi(T_H(a))`` on
    ``phi(D_l)`` is ``c y_j``; the coefficients come from inverting the
    transport matrix over O.
    """
    if not isinstance(phi_g, GAutomorphism):
        if g is None:
            raise ConfigurationError("raw matrices need the algebra g")
        try:
            phi_g = g_automorphism(g, phi_g)
        except DomainError as exc:
            raise ReconstructionError(str(exc), {"stage": "validation"}) from exc
    g = phi_g.g
    params = g.params
    _require_restricted(params)
    O, W, p = obasis(params), wbasis(params), params.p
    diagnostics: dict = {"extraction": {}}
    try:
        A = basis_transport_matrix(phi_g)
        Ainv = invert_over_O_dense(params, A)
    except (SingularityError, ValueError) as exc:
        raise ReconstructionError(f"transport matrix: {exc}", {"stage": "transport"}) from exc
    images = []
    for j in params.indices:
        found = None
        for label, a, l in _extraction_candidates(params, j):
            T = t_h(a)
            coeff = T.coeff(l)
            xj = SuperElement.x(params, j)
            c = coeff.coefficient(next(iter(xj.terms)))
            if not c or coeff != xj * c:
                continue
            tv = W.vector(T)
            if not g.contains(tv):
                continue
            found = (label, tv, l, c)
            break
        if found is None:
            raise ReconstructionError(f"no extraction element for y{j} in {g.name}", diagnostics)
        label, tv, l, c = found
        diagnostics["extraction"][j] = label
        img = phi_g(tv[None, :])[0]
        crow = W.coefficient_vectors(img)[None]
        a = o_matmul(params, crow, Ainv)[0]
        images.append(O.element(a[l - 1] * inv(c, p) % p))
    try:
        sigma = make_automorphism(params, images)
    except (ParityError, SingularityError, DomainError) as exc:
        raise ReconstructionError(f"recovered images are invalid: {exc}", diagnostics) from exc
    try:
        check = phi(sigma, g)
    except DomainError as exc:
        raise ReconstructionError(f"recovered automorphism is not admissible: {exc}", diagnostics) from exc
    if check != phi_g:
        diagnostics["mismatched_entries"] = int(np.count_nonzero(check.matrix != phi_g.matrix))
        raise ReconstructionError("phi of the recovered automorphism differs from the input", diagnostics)
    return sigma


def extend_from_minus_one(phi_g: GAutomorphism) -> GAutomorphism:
    """Rebuild an automorphism of g from its values on g_[-1] alone.

    For b of degree d >= 0 the image z = psi(b) satisfies
    ``[psi(D_i), z] = psi([D_i, b])`` for all i, with the right side already
    known.  Since psi(D_i) = D_i + (higher terms), the system is triangular for
    the filtration: the degree e - 1 part of the residual determines the degree
    e coordinates of z through ``[D_i, g_[e]]``, which is injective by
    transitivity.  Raises DomainError if some system is unsolvable or not
    uniquely solvable.
    """
    g = phi_g.g
    params, W, p = g.params, g.ambient, g.params.p
    B, deg = g.basis_matrix, g.basis_degrees
    n = g.dim
    nr = 2 * params.m
    minus = np.flatnonzero(deg == -1)
    part = np.zeros((nr, W.dim), dtype=np.int64)
    for r in params.indices:
        part[r - 1, W.partial_index(r)] = 1
    part_coords = g.coordinates(part)
    if not set(np.flatnonzero(np.any(part_coords, axis=0))) <= set(minus.tolist()):
        raise DomainError("g_[-1] is not spanned by the partial derivatives")
    phiD = phi_g.images(part_coords.T)
    degrees = sorted({int(d) for d in deg if d >= 0})
    cols = {e: np.flatnonzero(deg == e) for e in degrees}
    # K[e][c, i] = [psi(D_i), b_c] for b_c in g_[e]
    adphi = np.stack([W.ad_rows(phiD[i], B) for i in range(nr)], axis=1)
    K, lead = {}, {}
    for e in degrees:
        c = cols[e]
        K[e] = adphi[c]
        blk = W.block(e - 1)
        L = K[e][:, :, blk].reshape(c.size, -1)
        piv = rref(L, p)[1]
        if len(piv) != c.size:
            raise DomainError("values on g_[-1] do not determine the automorphism")
        lead[e] = (blk, np.array(piv), inverse(L[:, piv], p))
    M = np.zeros((n, n), dtype=np.int64)
    M[:, minus] = phi_g.matrix[:, minus]
    labels = g.labels()
    adpart = np.stack([W.ad_rows(part[i], B) for i in range(nr)], axis=1)
    for d in degrees:
        bs = cols[d]
        coords = g.coordinates(adpart[bs].reshape(-1, W.dim))
        resid = matmul_mod(matmul_mod(coords, M.T, p), B, p).reshape(bs.size, nr, W.dim)
        Z = np.zeros((bs.size, n), dtype=np.int64)
        for e in degrees:
            if e < d:
                continue
            blk, piv, Linv = lead[e]
            rhs = resid[:, :, blk].reshape(bs.size, -1)[:, piv]
            z = matmul_mod(rhs, Linv, p)
            Z[:, cols[e]] = z
            resid = (resid - matmul_mod(z, K[e].reshape(cols[e].size, -1), p)
                     .reshape(resid.shape)) % p
        bad = np.flatnonzero(np.any(resid.reshape(bs.size, -1), axis=1))
        if bad.size:
            raise DomainError(f"no extension for {labels[bs[bad[0]]]}")
        M[:, bs] = Z.T
    return GAutomorphism(g, M)


# ---------------------------------------------------------------------------
# sampling
# ---------------------------------------------------------------------------

def _random_gl(rng, n: int, p: int) -> np.ndarray:
    while True:
        A = rng.integers(0, p, (n, n))
        if rank(A, p) == n:
            return A


def _hamiltonian_type(g: GradedSubspace | None) -> bool:
    if g is None or g.name is None:
        return False
    try:
        return normalize_tag(g.name) in ("HO", "SHO'", "SHO-bar", "SHO")
    except ConfigurationError:
        return False


def random_linear(params: Parameters, rng, pairing: bool) -> OAutomorphism:
    """Random parity-block linear substitution; with ``pairing`` the odd block is
    ``lam * A^{-T}`` so that T_H(x_i) stays paired with x_i'."""
    m, p = params.m, params.p
    A = _random_gl(rng, m, p)
    if pairing:
        lam = int(rng.integers(1, p))
        Bm = lam * inverse(A, p).T % p
    else:
        Bm = _random_gl(rng, m, p)
    L = np.zeros((2 * m, 2 * m), dtype=np.int64)
    L[:m, :m] = A
    L[m:, m:] = Bm
    return linear_automorphism(params, L)


def exp_automorphism(params: Parameters, vec: np.ndarray) -> OAutomorphism:
    """Substitution ``x_k -> sum_{n<p} E^n(x_k)/n!`` for an even E of positive degree."""
    O, W, p = obasis(params), wbasis(params), params.p
    images = []
    for k in params.indices:
        term = np.zeros(O.dim, dtype=np.int64)
        term[O.generator_index(k)] = 1
        acc = term.copy()
        fact = 1
        for nn in range(1, p):
            term = W.apply(vec, term)
            if not np.any(term):
                break
            fact = fact * nn % p
            acc = (acc + term * inv(fact, p)) % p
        images.append(O.element(acc))
    return make_automorphism(params, images)


def _random_even(g_or_W, d: int, rng, params: Parameters) -> np.ndarray | None:
    W = wbasis(params)
    if isinstance(g_or_W, GradedSubspace):
        blk = g_or_W.blocks.get(d)
        if blk is None or blk.rank == 0:
            return None
        rows = blk.rows
    else:
        n = W.size(d)
        if n == 0:
            return None
        rows = np.eye(n, dtype=np.int64)
    par = W.w_par[W.block(d)]
    even = rows[~np.any(rows[:, par == 1], axis=1)]
    if even.shape[0] == 0:
        return None
    k = int(rng.integers(1, min(3, even.shape[0]) + 1))
    pick = rng.choice(even.shape[0], size=k, replace=False)
    coeffs = rng.integers(1, params.p, size=k)
    local = coeffs @ even[pick] % params.p
    return W.join({d: local})


def sample_automorphism(params: Parameters, seed: int, depth: int = 0,
                        g: GradedSubspace | None = None, attempts: int = 200) -> OAutomorphism:
    """Deterministic-by-seed automorphism with depth_O exactly ``depth``.

    Depth 0 uses a random linear part (pairing-preserving for the Hamiltonian
    family), depth d >= 1 an exponential of a random even element of g_[d],
    optionally followed by further exponentials of higher degree.  With g
    given, candidates are kept only if admissible.
    """
    _require_restricted(params)
    rng = np.random.default_rng([seed, depth])
    pairing = _hamiltonian_type(g)
    source = g if g is not None else "W"
    xi = params.xi
    for _ in range(attempts):
        if depth == 0:
            sigma = random_linear(params, rng, pairing)
            if sigma.is_identity():
                continue
            extra_from = 1
        else:
            E = _random_even(source, depth, rng, params)
            if E is None:
                raise SamplingError(f"no even elements of degree {depth} to exponentiate")
            sigma = exp_automorphism(params, E)
            extra_from = depth + 1
        if rng.random() < 0.5:
            d = int(rng.integers(extra_from, max(extra_from + 1, min(xi - 2, extra_from + 3))))
            E = _random_even(source, d, rng, params)
            if E is not None:
                sigma = compose(sigma, exp_automorphism(params, E))
        if depth_O(sigma) != depth:
            continue
        if g is None or is_admissible(sigma, g):
            return sigma
    raise SamplingError(f"no admissible automorphism of depth {depth} after {attempts} attempts")
