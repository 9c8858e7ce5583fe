"""Verification suites: each returns a JSON-ready report with one entry per item.

Items carry ``status`` in {"pass", "fail", "skip", "recorded"}; a suite passes
when no item fails.
"""

from __future__ import annotations

import numpy as np

from . import autgroups as ag
from .cartan import (build, potential_basis, t_h, th_matrix,
                     transitivity_check, verify_lemma11)
from .errors import ConfigurationError, ReconstructionError
from .gf import bilinear_products, matmul_mod, rank
from .restricted import (_ad_power_vec, ad_partials_nilpotent, ad_power_identity, is_restricted,
                         omega_power, piecewise_formula_check)
from .structure import dumps, export_structure, import_structure
from .superalgebra import Parameters, SuperElement, obasis
from .witt import wbasis

HAMILTONIAN = ("SHO'", "SHO-bar", "SHO")


def _item(name, ok, **extra) -> dict:
    status = ok if isinstance(ok, str) else ("pass" if ok else "fail")
    return {"item": name, "status": status, **extra}


def _report(suite: str, params: Parameters, items: list) -> dict:
    return {"suite": suite, "params": params.to_json(), "items": items,
            "passed": all(it["status"] != "fail" for it in items)}


# ---------------------------------------------------------------------------
# engine identities
# ---------------------------------------------------------------------------

def th_bracket_identity(params: Parameters) -> tuple[bool, int]:
    """[T_H(a), T_H(b)] = T_H(T_H(a)(b)) on all pairs of basis monomials."""
    W, PB, p = wbasis(params), potential_basis(params), params.p
    pairs = 0
    for r in PB.degrees:
        for s in PB.degrees:
            k = r + s - 2
            nr, ns = PB.size(r), PB.size(s)
            pairs += nr * ns
            if W.size(k - 2) == 0 and W.size(r - 2 + s - 2) == 0:
                continue
            Tr, Ts = th_matrix(params, r).T, th_matrix(params, s).T
            wt = W.bracket_tensor(r - 2, s - 2)
            n_out = W.size(r + s - 4)
            lhs = bilinear_products(Tr, Ts, wt, n_out, p) if wt is not None \
                else np.zeros((nr, ns, n_out), dtype=np.int64)
            pt = PB.bracket_tensor(r, s)
            if pt is None:
                rhs = np.zeros_like(lhs)
            else:
                inner = bilinear_products(np.eye(nr, dtype=np.int64), np.eye(ns, dtype=np.int64),
                                          pt, PB.size(k), p)
                rhs = matmul_mod(inner.reshape(nr * ns, -1), th_matrix(params, k).T, p).reshape(lhs.shape)
            if np.any(lhs != rhs):
                return False, pairs
    return True, pairs


def th_partial_identity(params: Parameters) -> bool:
    """[D_i, T_H(f)] = T_H(D_i(f)) for all i and basis monomials f."""
    W, O, p = wbasis(params), obasis(params), params.p
    for r in range(1, params.xi + 1):
        if W.size(r - 2) == 0:
            continue
        img = matmul_mod(W.partial_ad_matrix(r - 2), th_matrix(params, r), p)
        n_out = W.size(r - 3)
        for i in params.indices:
            lhs = img[(i - 1) * n_out:i * n_out] if n_out else np.zeros((0, O.size(r)), dtype=np.int64)
            D = O.derivative_matrix(i)[O.block(r - 1), O.block(r)]
            rhs = matmul_mod(th_matrix(params, r - 1), D, p) if r - 1 >= 1 \
                else np.zeros_like(lhs)
            if np.any(lhs % p != rhs):
                return False
    return True


def _action_tensor(W, i: int, j: int):
    """Sparse tensor of ``W_[i] x O_[j] -> O_[i+j]``, (f D_r, g) -> f D_r(g)."""
    O = W.O
    k = i + j
    if W.size(i) == 0 or O.size(j) == 0 or O.size(k) == 0:
        return None
    si, sj, sk = W.block(i), O.block(j), O.block(k)
    f, r = W.w_mono[si], W.w_dir[si]
    g = np.arange(sj.start, sj.stop)
    A, B = np.meshgrid(np.arange(f.size), np.arange(g.size), indexing="ij")
    h = O.d_idx[r[:, None], g[None, :]]
    hc = O.d_coef[r[:, None], g[None, :]]
    ok = h >= 0
    mono = np.where(ok, O.prod_idx[f[:, None], np.maximum(h, 0)], -1)
    c = np.where(ok, O.prod_coef[f[:, None], np.maximum(h, 0)] * hc, 0) % W.params.p
    mask = (mono >= 0) & (c != 0)
    return A[mask], B[mask], mono[mask] - sk.start, c[mask]


def divergence_identity(params: Parameters) -> tuple[bool, int]:
    """div[D,E] = D(div E) - (-1)^{|D||E|} E(div D) on all pairs of basis elements of W."""
    W, O, p = wbasis(params), obasis(params), params.p
    pairs = 0
    for i in W.degrees:
        for j in W.degrees:
            ni, nj = W.size(i), W.size(j)
            pairs += ni * nj
            k = i + j
            n_out = O.size(k)
            if n_out == 0:
                continue
            bt = W.bracket_tensor(i, j)
            if bt is None:
                lhs = np.zeros((ni, nj, n_out), dtype=np.int64)
            else:
                br = bilinear_products(np.eye(ni, dtype=np.int64), np.eye(nj, dtype=np.int64),
                                       bt, W.size(k), p)
                lhs = matmul_mod(br.reshape(ni * nj, -1), W.divergence_matrix(k).T, p).reshape(ni, nj, n_out)
            rhs = np.zeros_like(lhs)
            at = _action_tensor(W, i, j)
            if at is not None:
                rhs += bilinear_products(np.eye(ni, dtype=np.int64), W.divergence_matrix(j).T,
                                         at, n_out, p)
            at = _action_tensor(W, j, i)
            if at is not None:
                t = bilinear_products(np.eye(nj, dtype=np.int64), W.divergence_matrix(i).T,
                                      at, n_out, p).transpose(1, 0, 2)
                pi_, pj = W.w_par[W.block(i)], W.w_par[W.block(j)]
                sign = np.where(np.outer(pi_, pj) == 1, -1, 1)[:, :, None]
                rhs -= sign * t
            if np.any(lhs != rhs % p):
                return False, pairs
    return True, pairs


def skew_symmetry_exhaustive(params: Parameters) -> bool:
    W, p = wbasis(params), params.p
    for i in W.degrees:
        for j in W.degrees:
            if W.size(i + j) == 0:
                continue
            ni, nj = W.size(i), W.size(j)
            t1, t2 = W.bracket_tensor(i, j), W.bracket_tensor(j, i)
            if t1 is None and t2 is None:
                continue
            a = bilinear_products(np.eye(ni, dtype=np.int64), np.eye(nj, dtype=np.int64), t1,
                                  W.size(i + j), p)
            b = bilinear_products(np.eye(nj, dtype=np.int64), np.eye(ni, dtype=np.int64), t2,
                                  W.size(i + j), p).transpose(1, 0, 2)
            pi_, pj = W.w_par[W.block(i)], W.w_par[W.block(j)]
            sign = np.where(np.outer(pi_, pj) == 1, 1, -1)[:, :, None]
            if np.any((a - sign * b) % p):
                return False
    return True


def _jacobi_rows(W, A, B, C, pa, pb):
    """[a,[b,c]] - [[a,b],c] - (-1)^{|a||b|} [b,[a,c]] row-wise."""
    p = W.params.p
    t1 = W.bracket_rows(A, W.bracket_rows(B, C))
    t2 = W.bracket_rows(W.bracket_rows(A, B), C)
    t3 = W.bracket_rows(B, W.bracket_rows(A, C))
    sign = np.where(pa * pb == 1, -1, 1)[:, None]
    return (t1 - t2 - sign * t3) % p


def jacobi_low_degree(params: Parameters, top: int = 2) -> tuple[bool, int]:
    """Super Jacobi on all triples of basis elements of degree <= top."""
    W, p = wbasis(params), params.p
    idx, coef = W.full_bracket_table
    S = np.flatnonzero(W.w_deg <= top)
    par = W.w_par
    count = 0
    bb, cc = np.meshgrid(S, S, indexing="ij")
    bb, cc = bb.ravel(), cc.ravel()

    def apply_left(a_vec, k_idx, k_coef):
        """[a, sum coef e_k] for arrays of (<=2) terms; returns list of (target, value)."""
        out_t, out_v = [], []
        for s in range(k_idx.shape[1]):
            ks = k_idx[:, s]
            ok = ks >= 0
            kk = np.where(ok, ks, 0)
            for s2 in range(2):
                t = np.where(ok, idx[a_vec, kk, s2], -1)
                v = np.where(ok, coef[a_vec, kk, s2] * k_coef[:, s], 0)
                out_t.append(t)
                out_v.append(v)
        return out_t, out_v

    def apply_right(k_idx, k_coef, c_vec):
        out_t, out_v = [], []
        for s in range(k_idx.shape[1]):
            ks = k_idx[:, s]
            ok = ks >= 0
            kk = np.where(ok, ks, 0)
            for s2 in range(2):
                t = np.where(ok, idx[kk, c_vec, s2], -1)
                v = np.where(ok, coef[kk, c_vec, s2] * k_coef[:, s], 0)
                out_t.append(t)
                out_v.append(v)
        return out_t, out_v

    rows = np.arange(bb.size)
    for a in S:
        av = np.full(bb.size, a)
        terms_t, terms_v = [], []
        t, v = apply_left(av, idx[bb, cc], coef[bb, cc])            # [a,[b,c]]
        terms_t += t
        terms_v += v
        t, v = apply_right(idx[av, bb], coef[av, bb], cc)           # [[a,b],c]
        terms_t += t
        terms_v += [-x for x in v]
        t, v = apply_left(bb, idx[av, cc], coef[av, cc])            # [b,[a,c]]
        sign = np.where(par[a] * par[bb] == 1, -1, 1)
        terms_t += t
        terms_v += [-sign * x for x in v]
        acc = np.zeros((bb.size, W.dim), dtype=np.int64)
        for t, v in zip(terms_t, terms_v):
            ok = t >= 0
            np.add.at(acc, (rows[ok], t[ok]), v[ok])
        count += bb.size
        if np.any(acc % p):
            return False, count
    return True, count


def random_homogeneous(params: Parameters, rng, count: int):
    """Random elements of W, each in one degree and one parity."""
    W, p = wbasis(params), params.p
    out = np.zeros((count, W.dim), dtype=np.int64)
    pars = np.zeros(count, dtype=np.int64)
    degs = [d for d in W.degrees if W.size(d)]
    for s in range(count):
        d = int(rng.choice(degs))
        theta = int(rng.integers(0, 2))
        blk = np.arange(W.block(d).start, W.block(d).stop)
        cand = blk[W.w_par[blk] == theta]
        if cand.size == 0:
            theta = 1 - theta
            cand = blk[W.w_par[blk] == theta]
        k = int(rng.integers(1, min(4, cand.size) + 1))
        pick = rng.choice(cand, size=k, replace=False)
        out[s, pick] = rng.integers(1, p, size=k)
        pars[s] = theta
    return out, pars


def jacobi_random(params: Parameters, seed: int, count: int = 1000) -> bool:
    W = wbasis(params)
    rng = np.random.default_rng(seed)
    A, pa = random_homogeneous(params, rng, count)
    B, pb = random_homogeneous(params, rng, count)
    C, _ = random_homogeneous(params, rng, count)
    return not np.any(_jacobi_rows(W, A, B, C, pa, pb))


def suite_engine(params: Parameters, seed: int = 0, samples: int = 1000) -> dict:
    items = []
    ok, n = th_bracket_identity(params)
    items.append(_item("T_H bracket identity", ok, pairs=n))
    items.append(_item("T_H commutes with partials", th_partial_identity(params)))
    ok, n = divergence_identity(params)
    items.append(_item("divergence superderivation", ok, pairs=n))
    items.append(_item("super skew-symmetry", skew_symmetry_exhaustive(params)))
    ok, n = jacobi_low_degree(params)
    items.append(_item("super Jacobi up to degree 2", ok, triples=n))
    items.append(_item("super Jacobi random triples", jacobi_random(params, seed, max(samples, 1000)),
                       triples=max(samples, 1000)))
    g = build("SHO", params)
    text = dumps(export_structure(g, "SHO"))
    back = dumps(import_structure(text, seed=seed).to_document())
    items.append(_item("export/import roundtrip", back == text, bytes=len(text)))
    again = dumps(export_structure(build("SHO", params), "SHO"))
    items.append(_item("deterministic export", again == text))
    return _report("engine", params, items)


# ---------------------------------------------------------------------------
# Cartan series and restrictedness
# ---------------------------------------------------------------------------

def suite_lemma11(params: Parameters) -> dict:
    rep = verify_lemma11(params)
    items = list(rep["items"])
    for tag in HAMILTONIAN:
        items.append(_item(f"transitive {tag}", transitivity_check(build(tag, params))))
    out = _report("lemma11", params, items)
    out["conventions"] = rep["conventions"]
    out["dims"] = rep["dims"]
    return out


def _expected_witness(params: Parameters):
    """(ad D_i)^p T_H(x^((p+1)eps_i)) for the first i with t_i > 1, with the
    expected value T_H(x^(eps_i))."""
    p = params.p
    for i in range(1, params.m + 1):
        if params.t[i - 1] > 1:
            alpha = [0] * params.m
            alpha[i - 1] = p + 1
            X = t_h(SuperElement.monomial(params, alpha))
            alpha[i - 1] = 1
            return i, X, t_h(SuperElement.monomial(params, alpha))
    return None


def suite_restricted(params: Parameters, seed: int = 0, samples: int = 20) -> dict:
    items = []
    W = wbasis(params)
    if params.is_restricted_case:
        for tag in ("W",) + HAMILTONIAN:
            rep = is_restricted(tag, params)
            items.append(_item(f"restricted {tag}", rep.restricted, checked=rep.checked,
                               witness=rep.witness))
        for tag in HAMILTONIAN:
            items.append(_item(f"(ad D_i)^p = 0 on {tag}", ad_partials_nilpotent(build(tag, params))))
        pw = piecewise_formula_check(params)
        items.append(_item("piecewise p-power formula", not pw["exceptions"], checked=pw["checked"],
                           exceptions=pw["exceptions"]))
        om = omega_power(params)
        if om is None:
            items.append(_item("omega^p = 0", "skip", reason="omega is odd when m is odd"))
        else:
            items.append(_item("omega^p = 0", not om))
        g = build("SHO", params)
        rng = np.random.default_rng(seed)
        even = g.basis_matrix[g.basis_parities == 0]
        ok = True
        targets = g.basis_matrix
        for _ in range(min(samples, 5)):
            k = int(rng.integers(1, 4))
            pick = rng.choice(even.shape[0], size=k, replace=False)
            vec = rng.integers(1, params.p, size=k) @ even[pick] % params.p
            ok &= ad_power_identity(params, vec, targets)
        items.append(_item("ad(E^p) = (ad E)^p on SHO", ok))
    else:
        for tag in HAMILTONIAN:
            rep = is_restricted(tag, params)
            items.append(_item(f"not restricted {tag}", not rep.restricted, witness=rep.witness,
                               expected=False))
        wit = _expected_witness(params)
        if wit is not None:
            i, X, expected = wit
            Di = np.zeros(W.dim, dtype=np.int64)
            Di[W.partial_index(i)] = 1
            img = _ad_power_vec(W, Di, W.vector(X), params.p)
            items.append(_item("(ad D_i)^p T_H(x^((p+1)eps_i)) = T_H(x^(eps_i))",
                               bool(np.all(img == W.vector(expected))), i=i,
                               element=X.to_json(), image=W.derivation(img).to_json()))
    return _report("restricted", params, items)


# ---------------------------------------------------------------------------
# automorphism groups
# ---------------------------------------------------------------------------

def _samples(params: Parameters, g, seed: int, count: int, depths=(0, 1, 2, 3)):
    out = []
    for s in range(count):
        d = depths[s % len(depths)]
        out.append(ag.sample_automorphism(params, seed * 100003 + s, d, g))
    return out


def suite_phi_iso(params: Parameters, seed: int = 0, samples: int = 100,
                  tags=HAMILTONIAN) -> dict:
    if not params.is_restricted_case:
        raise ConfigurationError("automorphism suites need t = (1, ..., 1)")
    items = []
    for tag in tags:
        g = build(tag, params)
        sig = _samples(params, g, seed, samples)
        phis = [ag.phi(s, g) for s in sig]
        bad = []
        for k, (s, f) in enumerate(zip(sig, phis)):
            try:
                if ag.reconstruct_sigma(f) != s:
                    bad.append(k)
            except ReconstructionError:
                bad.append(k)
        items.append(_item(f"{tag}: reconstruct(phi(sigma)) = sigma", not bad,
                           samples=len(sig), failures=bad[:5]))
        mult_bad = 0
        for k in range(len(sig)):
            s, t = sig[k], sig[(k + 1) % len(sig)]
            if ag.phi(ag.compose(s, t), g) != phis[k] @ phis[(k + 1) % len(sig)]:
                mult_bad += 1
        items.append(_item(f"{tag}: phi multiplicative", mult_bad == 0, pairs=len(sig)))
        ident = ag.reconstruct_sigma(ag.GAutomorphism.identity(g))
        items.append(_item(f"{tag}: identity", ident.is_identity()
                           and ag.phi(ag.identity(params), g) == ag.GAutomorphism.identity(g)))
        inv_ok = all((f @ ag.phi(ag.invert(s), g)) == ag.GAutomorphism.identity(g)
                     for s, f in list(zip(sig, phis))[:10])
        items.append(_item(f"{tag}: phi(sigma) phi(sigma^-1) = 1", inv_ok))
        inj = all((f == ag.GAutomorphism.identity(g)) == s.is_identity() for s, f in zip(sig, phis))
        items.append(_item(f"{tag}: injective on samples", inj))
        O, p = obasis(params), params.p
        transport = True
        for f in phis:
            A = ag.basis_transport_matrix(f)
            transport &= rank(A[:, :, O.one_index], p) == 2 * params.m
        items.append(_item(f"{tag}: O-basis transport", transport))
        rebuilt = phis[:10] if g.dim <= 200 else phis[:3]
        uniq = all(ag.extend_from_minus_one(f) == f for f in rebuilt)
        items.append(_item(f"{tag}: determined by g_[-1]", uniq, checked=len(rebuilt)))
        checked = phis[:5] if g.dim <= 200 else phis[:1]
        valid = all(ag.check_g_automorphism(g, f.matrix, seed)["ok"] for f in checked)
        items.append(_item(f"{tag}: phi(sigma) is an automorphism", valid, checked=len(checked)))
    return _report("phi-iso", params, items)


def suite_normal_series(params: Parameters, seed: int = 0, samples: int = 50,
                        tags=HAMILTONIAN) -> dict:
    if not params.is_restricted_case:
        raise ConfigurationError("automorphism suites need t = (1, ..., 1)")
    items = []
    xi = params.xi
    for tag in tags:
        g = build(tag, params)
        sig = _samples(params, g, seed + 1, samples)
        depth_ok = hom_ok = True
        for s in sig:
            f = ag.phi(s, g)
            dO, dg = ag.depth_O(s), ag.depth_g(f)
            depth_ok &= dO == dg and all(ag.in_aut_i(dO, i) == ag.in_aut_i(dg, i)
                                         for i in range(xi + 1))
            hom_ok &= ag.is_homogeneous_O(s) == ag.is_homogeneous_g(f)
        items.append(_item(f"{tag}: depth_O = depth_g", depth_ok, samples=len(sig)))
        items.append(_item(f"{tag}: homogeneity corresponds", hom_ok, samples=len(sig)))
        comm_ok, pairs = True, 0
        for k in range(samples):
            i, j = 1 + k % 2, 1 + (k // 2) % 2
            s = ag.sample_automorphism(params, seed * 7919 + 2 * k, i, g)
            t = ag.sample_automorphism(params, seed * 7919 + 2 * k + 1, j, g)
            c = ag.commutator(s, t)
            pairs += 1
            comm_ok &= ag.in_aut_i(ag.depth_O(c), i + j) and ag.in_aut_i(ag.depth_g(ag.phi(c, g)), i + j)
        items.append(_item(f"{tag}: commutator depth >= i + j", comm_ok, pairs=pairs))
    return _report("normal-series", params, items)


SUITES = ("lemma11", "restricted", "phi-iso", "normal-series", "engine")


def run_suite(name: str, params: Parameters, seed: int = 0, samples: int | None = None) -> dict:
    if name == "lemma11":
        return suite_lemma11(params)
    if name == "restricted":
        return suite_restricted(params, seed)
    if name == "phi-iso":
        return suite_phi_iso(params, seed, samples or 100)
    if name == "normal-series":
        return suite_normal_series(params, seed, samples or 50)
    if name == "engine":
        return suite_engine(params, seed)
    if name == "all":
        reports = [run_suite("lemma11", params, seed, samples),
                   run_suite("restricted", params, seed, samples)]
        if params.is_restricted_case:
            reports += [run_suite("phi-iso", params, seed, samples),
                        run_suite("normal-series", params, seed, samples)]
        reports.append(run_suite("engine", params, seed, samples))
        return {"suite": "all", "params": params.to_json(), "reports": reports,
                "passed": all(r["passed"] for r in reports)}
    raise ConfigurationError(f"unknown suite {name!r}; expected one of {', '.join(SUITES + ('all',))}")
