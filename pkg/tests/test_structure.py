from __future__ import annotations

import json

import pytest

from superaut.cartan import build
from superaut.errors import ImportRejected
from superaut.structure import dumps, export_structure, import_structure, matches_built
from superaut.superalgebra import Parameters

P = Parameters(5, 2, (1, 1))


@pytest.fixture(scope="module")
def text():
    return dumps(export_structure(build("SHO", P), "SHO"))


def test_header_and_shape(text):
    doc = json.loads(text)
    assert doc["header"] == {"p": 5, "m": 2, "t": [1, 1], "algebra": "SHO"}
    assert len(doc["basis"]) == 46
    assert text.startswith('{"basis":') and text.endswith("}\n")


def test_roundtrip_byte_identical(text):
    alg = import_structure(text)
    assert dumps(alg.to_document()) == text
    assert matches_built(alg)
    assert alg.dims() == build("SHO", P).dims()


def test_export_is_deterministic(text):
    assert dumps(export_structure(build("SHO", P), "SHO")) == text


def _first_entry(doc, i_label, j_label):
    return next(e for e in doc["structure"] if e["i"] == i_label and e["j"] == j_label)


def test_corrupted_coefficient_rejected(text):
    doc = json.loads(text)
    entry = doc["structure"][10]
    entry["result"][0][1] = entry["result"][0][1] % 4 + 1
    with pytest.raises(ImportRejected) as exc:
        import_structure(json.dumps(doc))
    assert exc.value.location.startswith("pair")


def test_skew_consistent_corruption_caught_by_jacobi(text):
    doc = json.loads(text)
    labels = {b["label"]: b for b in doc["basis"]}
    # scale [a, b] and [b, a] together: skew-symmetry survives, Jacobi does not
    e = next(e for e in doc["structure"]
             if labels[e["i"]]["degree"] == 0 and labels[e["j"]]["degree"] == 1)
    f = _first_entry(doc, e["j"], e["i"])
    for entry in (e, f):
        entry["result"] = [[lab, 2 * c % 5] for lab, c in entry["result"]]
    with pytest.raises(ImportRejected) as exc:
        import_structure(json.dumps(doc))
    assert "Jacobi" in exc.value.message and exc.value.location.startswith("triple")


@pytest.mark.parametrize("mutate,fragment", [
    (lambda d: d.pop("header"), "header, basis and structure"),
    (lambda d: d["header"].update(p=4), "bad header"),
    (lambda d: d["structure"][0].update(i="nope"), "unknown basis label"),
    (lambda d: d["structure"][0]["result"][0].__setitem__(1, 7), "not a nonzero residue"),
    (lambda d: d["basis"][3].update(parity=2), "parity must be 0 or 1"),
])
def test_malformed_documents(text, mutate, fragment):
    doc = json.loads(text)
    mutate(doc)
    with pytest.raises(ImportRejected) as exc:
        import_structure(json.dumps(doc))
    assert fragment in exc.value.message


def test_not_json():
    with pytest.raises(ImportRejected):
        import_structure("{not json")


def test_grading_violation(text):
    doc = json.loads(text)
    labels = [b["label"] for b in doc["basis"]]
    doc["structure"][0]["result"] = [[labels[-1], 1]]
    with pytest.raises(ImportRejected) as exc:
        import_structure(json.dumps(doc))
    assert "grading" in exc.value.message


def test_large_algebra_sampled_jacobi():
    g = build("W", P)
    text = dumps(export_structure(g, "W"))
    alg = import_structure(text, samples=300)
    assert alg.dim == 400 and dumps(alg.to_document()) == text
