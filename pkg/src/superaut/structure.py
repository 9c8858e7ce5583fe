"""Structure-constant export and import.

A document has three parts: a header ``{"p", "m", "t", "algebra"}``, a basis
table (label, degree, parity and the vector in W), and one entry per ordered
basis pair with a nonzero bracket.  Serialization is canonical (sorted keys,
fixed separators), so export -> import -> export is byte-identical.
"""

from __future__ import annotations

import json
from typing import Mapping

import numpy as np

from .cartan import build, normalize_tag
from .errors import ConfigurationError, ImportRejected
from .superalgebra import Parameters
from .witt import GradedSubspace, structure_blocks, wbasis

EXHAUSTIVE_JACOBI = 64


def dumps(doc: Mapping) -> str:
    return json.dumps(doc, sort_keys=True, separators=(",", ":"), ensure_ascii=True) + "\n"


def export_structure(g: GradedSubspace, tag: str | None = None) -> dict:
    params = g.params
    W = wbasis(params)
    tag = normalize_tag(tag or g.name)
    labels = g.labels()
    degs, pars = g.basis_degrees, g.basis_parities
    basis = []
    for k, row in enumerate(g.basis_matrix):
        nz = np.flatnonzero(row)
        basis.append({"label": labels[k], "degree": int(degs[k]), "parity": int(pars[k]),
                      "vector": [[W.label(int(i)), int(row[i])] for i in nz]})
    offs, start = {}, 0
    for d in sorted(g.blocks):
        offs[d] = start
        start += g.blocks[d].rank
    entries = []
    for i, j, C in structure_blocks(g):
        k = W.bracket_degree(i, j)
        for a, b in zip(*np.nonzero(np.any(C, axis=2))):
            res = [[labels[offs[k] + int(c)], int(C[a, b, c])] for c in np.flatnonzero(C[a, b])]
            entries.append((offs[i] + int(a), offs[j] + int(b), res))
    entries.sort(key=lambda e: (e[0], e[1]))
    structure = [{"i": labels[a], "j": labels[b], "result": res} for a, b, res in entries]
    header = {"p": params.p, "m": params.m, "t": list(params.t), "algebra": tag}
    return {"header": header, "basis": basis, "structure": structure}


class AbstractAlgebra:
    """A Lie superalgebra given by structure constants on a labelled basis."""

    def __init__(self, params: Parameters, algebra: str, basis: list, table: dict):
        self.params = params
        self.algebra = algebra
        self.basis = basis
        self.labels = [b["label"] for b in basis]
        self.index = {lab: k for k, lab in enumerate(self.labels)}
        self.degree = np.array([b["degree"] for b in basis], dtype=np.int64)
        self.parity = np.array([b["parity"] for b in basis], dtype=np.int64)
        self.table = table  # (a, b) -> {c: coeff}

    @property
    def dim(self) -> int:
        return len(self.basis)

    def dense(self) -> np.ndarray:
        n = self.dim
        C = np.zeros((n, n, n), dtype=np.int64)
        for (a, b), res in self.table.items():
            for c, v in res.items():
                C[a, b, c] = v
        return C

    def bracket(self, u: Mapping[int, int], v: Mapping[int, int]) -> dict[int, int]:
        p = self.params.p
        out: dict[int, int] = {}
        for a, ca in u.items():
            for b, cb in v.items():
                for c, val in self.table.get((a, b), {}).items():
                    out[c] = (out.get(c, 0) + ca * cb * val) % p
        return {c: x for c, x in out.items() if x}

    def dims(self) -> dict[int, int]:
        vals, counts = np.unique(self.degree, return_counts=True)
        return {int(d): int(c) for d, c in zip(vals, counts)}

    def to_document(self) -> dict:
        header = {"p": self.params.p, "m": self.params.m, "t": list(self.params.t),
                  "algebra": self.algebra}
        structure = [{"i": self.labels[a], "j": self.labels[b],
                      "result": [[self.labels[c], v] for c, v in sorted(res.items())]}
                     for (a, b), res in sorted(self.table.items())]
        return {"header": header, "basis": self.basis, "structure": structure}


def _parse(doc) -> AbstractAlgebra:
    if isinstance(doc, (str, bytes)):
        try:
            doc = json.loads(doc)
        except json.JSONDecodeError as exc:
            raise ImportRejected(f"not valid JSON: {exc.msg}", f"line {exc.lineno}") from None
    if not isinstance(doc, Mapping) or not {"header", "basis", "structure"} <= set(doc):
        raise ImportRejected("document needs header, basis and structure", "top level")
    h = doc["header"]
    try:
        params = Parameters(int(h["p"]), int(h["m"]), tuple(int(x) for x in h["t"]))
        algebra = normalize_tag(str(h["algebra"]))
    except (KeyError, TypeError, ValueError, ConfigurationError) as exc:
        raise ImportRejected(f"bad header: {exc}", "header") from None
    p = params.p
    basis = doc["basis"]
    if not isinstance(basis, list):
        raise ImportRejected("basis must be a list", "basis")
    seen = set()
    for k, b in enumerate(basis):
        if not isinstance(b, Mapping) or not {"label", "degree", "parity"} <= set(b):
            raise ImportRejected("basis entry needs label, degree, parity", f"basis[{k}]")
        if b["label"] in seen:
            raise ImportRejected(f"duplicate label {b['label']!r}", f"basis[{k}]")
        if b["parity"] not in (0, 1):
            raise ImportRejected("parity must be 0 or 1", f"basis[{k}]")
        seen.add(b["label"])
    alg = AbstractAlgebra(params, algebra, list(basis), {})
    for e, entry in enumerate(doc["structure"]):
        where = f"structure[{e}]"
        try:
            a, b = alg.index[entry["i"]], alg.index[entry["j"]]
        except (KeyError, TypeError):
            raise ImportRejected("unknown basis label", where) from None
        if (a, b) in alg.table:
            raise ImportRejected("duplicate pair", where)
        res = {}
        for item in entry["result"]:
            if not isinstance(item, list) or len(item) != 2 or item[0] not in alg.index:
                raise ImportRejected("result terms are [label, coefficient] pairs", where)
            c, v = alg.index[item[0]], item[1]
            if not isinstance(v, int) or isinstance(v, bool) or not 0 < v < p:
                raise ImportRejected(f"coefficient {v!r} is not a nonzero residue mod {p}", where)
            if alg.degree[c] != alg.degree[a] + alg.degree[b]:
                raise ImportRejected("bracket does not respect the grading", where)
            if alg.parity[c] != (alg.parity[a] + alg.parity[b]) % 2:
                raise ImportRejected("bracket does not respect the parity", where)
            res[c] = v
        if res:
            alg.table[(a, b)] = res
    return alg


def _check_skew(alg: AbstractAlgebra):
    p = alg.params.p
    for (a, b), res in alg.table.items():
        sign = 1 if alg.parity[a] and alg.parity[b] else -1
        other = alg.table.get((b, a), {})
        if {c: sign * v % p for c, v in res.items()} != other:
            raise ImportRejected("super skew-symmetry fails",
                                 f"pair ({alg.labels[a]}, {alg.labels[b]})")
    for (a, b) in alg.table:
        if (b, a) not in alg.table:
            raise ImportRejected("super skew-symmetry fails",
                                 f"pair ({alg.labels[b]}, {alg.labels[a]})")


def jacobi_violations(alg: AbstractAlgebra, triples=None) -> list[tuple[int, int, int]]:
    """Triples (a, b, c) where ``[a,[b,c]] = [[a,b],c] + (-1)^{|a||b|} [b,[a,c]]`` fails.

    Exhaustive (via the dense tensor) unless ``triples`` is given.
    """
    p = alg.params.p
    par = alg.parity
    if triples is None:
        n = alg.dim
        C = alg.dense()
        Cf = C.astype(np.float64)
        bad = []
        # [a,[b,c]]_e = sum_k C[b,c,k] C[a,k,e]
        for a in range(n):
            t1 = np.mod(Cf.reshape(n * n, n) @ Cf[a], p).reshape(n, n, n)
            t2 = np.mod(np.tensordot(Cf[a], Cf, axes=([1], [0])), p)       # [[a,b],c]
            t3 = np.mod(np.einsum("ck,bke->bce", Cf[a], Cf), p)            # [b,[a,c]]
            sign = np.where(par[a] * par == 1, -1, 1)[:, None, None]
            diff = np.mod(t1 - t2 - sign * t3, p)
            for b, c in zip(*np.nonzero(np.any(diff != 0, axis=2))):
                bad.append((a, int(b), int(c)))
            if bad:
                break
        return bad
    bad = []
    for a, b, c in triples:
        ea, eb, ec = {a: 1}, {b: 1}, {c: 1}
        lhs = alg.bracket(ea, alg.bracket(eb, ec))
        r1 = alg.bracket(alg.bracket(ea, eb), ec)
        r2 = alg.bracket(eb, alg.bracket(ea, ec))
        s = -1 if par[a] and par[b] else 1
        keys = set(lhs) | set(r1) | set(r2)
        if any((lhs.get(k, 0) - r1.get(k, 0) - s * r2.get(k, 0)) % p for k in keys):
            bad.append((a, b, c))
    return bad


def import_structure(doc, verify: bool = True, seed: int = 0, samples: int = 2000) -> AbstractAlgebra:
    """Parse and re-verify a structure-constant document.

    Super Jacobi is checked exhaustively up to dimension 64, otherwise on a
    seeded sample of triples.  Raises ImportRejected with a location.
    """
    alg = _parse(doc)
    if verify:
        _check_skew(alg)
        if alg.dim <= EXHAUSTIVE_JACOBI:
            bad = jacobi_violations(alg)
        else:
            rng = np.random.default_rng(seed)
            triples = rng.integers(0, alg.dim, (samples, 3)).tolist()
            bad = jacobi_violations(alg, triples)
        if bad:
            a, b, c = bad[0]
            raise ImportRejected("super Jacobi identity fails",
                                 f"triple ({alg.labels[a]}, {alg.labels[b]}, {alg.labels[c]})")
    return alg


def matches_built(alg: AbstractAlgebra) -> bool:
    """Does the document agree with the algebra built from its header?"""
    g = build(alg.algebra, alg.params)
    return dumps(export_structure(g, alg.algebra)) == dumps(alg.to_document())
