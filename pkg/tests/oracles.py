"""Naive reference implementations used as test oracles.

Elements are dicts ``{(alpha, u): coeff}`` with alpha a tuple of exponents and
u a strictly increasing tuple of odd indices.  Nothing here touches the
package's tables.
"""

from __future__ import annotations

from math import comb


def mono_mul(params, a, b):
    (al, u), (be, v) = a, b
    p = params.p
    c = 1
    gam = []
    for i, (x, y) in enumerate(zip(al, be)):
        if x + y > params.pi[i]:
            return None, 0
        c = c * comb(x + y, x) % p
        gam.append(x + y)
    if set(u) & set(v):
        return None, 0
    seq = list(u) + list(v)
    inversions = sum(1 for i in range(len(seq)) for j in range(i + 1, len(seq)) if seq[i] > seq[j])
    if inversions % 2:
        c = -c % p
    if c == 0:
        return None, 0
    return (tuple(gam), tuple(sorted(seq))), c


def mul(params, f, g):
    out = {}
    for a, ca in f.items():
        for b, cb in g.items():
            key, c = mono_mul(params, a, b)
            if key is not None:
                out[key] = (out.get(key, 0) + ca * cb * c) % params.p
    return {k: v for k, v in out.items() if v}


def derive(params, r, f):
    m, p = params.m, params.p
    out = {}
    for (al, u), c in f.items():
        if r <= m:
            if al[r - 1] == 0:
                continue
            be = list(al)
            be[r - 1] -= 1
            key, val = (tuple(be), u), c
        else:
            if r not in u:
                continue
            pos = u.index(r)
            key = (al, tuple(x for x in u if x != r))
            val = c * (-1) ** pos
        out[key] = (out.get(key, 0) + val) % p
    return {k: v for k, v in out.items() if v}


def parity(f):
    pars = {len(u) % 2 for (_, u) in f}
    assert len(pars) <= 1
    return pars.pop() if pars else 0


def from_element(f):
    return {(tuple(mono.alpha), tuple(mono.u)): c for mono, c in f.items()}
