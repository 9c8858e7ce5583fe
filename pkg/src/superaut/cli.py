"""Command-line interface.

Verbs: dims, verify, export, import, aut-sample, aut-check.  Exit codes:
0 success, 1 verification failure or rejected input, 2 usage/parameter error.
Relative output paths are resolved against $SUPERAUT_OUTPUT_DIR when set.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import autgroups as ag
from .cartan import TAGS, build, normalize_tag
from .errors import (ConfigurationError, DomainError, ImportRejected, ParityError,
                     ReconstructionError, SingularityError)
from .structure import dumps, export_structure, import_structure, matches_built
from .suites import SUITES, run_suite
from .superalgebra import Parameters

OUTPUT_ENV = "SUPERAUT_OUTPUT_DIR"


class UsageError(Exception):
    pass


def _default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def _json(doc) -> str:
    return json.dumps(doc, sort_keys=True, indent=2, default=_default) + "\n"


def _params(args) -> Parameters:
    try:
        t = tuple(int(x) for x in str(args.t).split(",") if x.strip()) if args.t else (1,) * args.m
    except ValueError:
        raise ConfigurationError(f"--t must be a comma list of integers, got {args.t!r}") from None
    return Parameters(args.p, args.m, t)


def _output_path(path: str) -> Path:
    out = Path(path)
    base = os.environ.get(OUTPUT_ENV)
    if base and not out.is_absolute():
        out = Path(base) / out
    return out


def _emit(args, text: str):
    if args.output:
        out = _output_path(args.output)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text)
    else:
        sys.stdout.write(text)


def _read(path: str) -> str:
    try:
        return Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None


# ---------------------------------------------------------------------------
# verbs
# ---------------------------------------------------------------------------

def cmd_dims(args) -> int:
    params = _params(args)
    tag = normalize_tag(args.algebra)
    g = build(tag, params)
    dims = g.dims()
    doc = {"algebra": tag, **params.to_json(), "dims": {str(d): n for d, n in dims.items()},
           "total": g.dim}
    if args.format == "json":
        _emit(args, _json(doc))
    else:
        lines = [f"{tag}(m={params.m}, t={','.join(map(str, params.t))}) over GF({params.p})",
                 f"{'degree':>6}  {'dim':>6}"]
        lines += [f"{d:>6}  {n:>6}" for d, n in dims.items()]
        lines.append(f"{'total':>6}  {g.dim:>6}")
        _emit(args, "\n".join(lines) + "\n")
    return 0


def _render_report(rep: dict) -> list[str]:
    if "reports" in rep:
        out = []
        for r in rep["reports"]:
            out += _render_report(r)
        out.append(f"all: {'PASS' if rep['passed'] else 'FAIL'}")
        return out
    out = [f"[{rep['suite']}]"]
    for it in rep["items"]:
        line = f"  {it['status'].upper():8} {it['item']}"
        if it.get("witness") and it["status"] == "pass" and "not restricted" in it["item"]:
            w = it["witness"]
            line += f"  (witness: (ad D_{w['i']})^p of {_short(w['element'])} = {_short(w['image'])})"
        out.append(line)
    out.append(f"  -> {'PASS' if rep['passed'] else 'FAIL'}")
    return out


def _short(elem) -> str:
    try:
        return json.dumps(elem, separators=(",", ":"), default=_default)[:120]
    except TypeError:
        return str(elem)[:120]


def cmd_verify(args) -> int:
    params = _params(args)
    rep = run_suite(args.suite, params, args.seed, args.samples)
    if args.format == "json":
        _emit(args, _json(rep))
    else:
        _emit(args, "\n".join(_render_report(rep)) + "\n")
        if not rep["passed"]:
            failed = _failures(rep)
            sys.stderr.write(_json({"failed": failed}))
    return 0 if rep["passed"] else 1


def _failures(rep: dict) -> list:
    if "reports" in rep:
        return [f for r in rep["reports"] for f in _failures(r)]
    return [{"suite": rep["suite"], **it} for it in rep["items"] if it["status"] == "fail"]


def cmd_export(args) -> int:
    params = _params(args)
    tag = normalize_tag(args.algebra)
    _emit(args, dumps(export_structure(build(tag, params), tag)))
    return 0


def cmd_import(args) -> int:
    text = _read(args.file)
    try:
        alg = import_structure(text, seed=args.seed, samples=args.samples or 2000)
    except ImportRejected as exc:
        doc = {"accepted": False, "reason": exc.message, "location": exc.location}
        if args.format == "json":
            _emit(args, _json(doc))
        sys.stderr.write(f"import rejected: {exc}\n")
        return 1
    doc = {"accepted": True, "algebra": alg.algebra, **alg.params.to_json(),
           "dim": alg.dim, "dims": {str(d): n for d, n in alg.dims().items()},
           "matches_built": matches_built(alg)}
    if args.format == "json":
        _emit(args, _json(doc))
    else:
        _emit(args, f"accepted {alg.algebra} (dim {alg.dim}); "
                    f"matches built algebra: {doc['matches_built']}\n")
    return 0


def cmd_aut_sample(args) -> int:
    params = _params(args)
    tag = normalize_tag(args.algebra)
    g = build(tag, params)
    sigma = ag.sample_automorphism(params, args.seed, args.depth, g)
    doc = sigma.to_json()
    doc["algebra"] = tag
    doc["depth"] = ag.depth_O(sigma)
    if args.matrix:
        doc = {**ag.phi(sigma, g).to_json(), "depth": doc["depth"]}
    _emit(args, _json(doc))
    return 0


def cmd_aut_check(args) -> int:
    try:
        data = json.loads(_read(args.file))
    except json.JSONDecodeError as exc:
        raise UsageError(f"{args.file} is not JSON: {exc.msg}") from None
    params = Parameters.from_json(data["params"]) if "params" in data else _params(args)
    tag = normalize_tag(args.algebra or data.get("algebra") or "SHO")
    g = build(tag, params)
    report: dict = {"algebra": tag, **params.to_json()}
    if "matrix" in data:
        res = ag.check_g_automorphism(g, data["matrix"], args.seed)
        report.update(kind="g-automorphism", checks=res, admissible=res["ok"])
        if res["ok"]:
            f = ag.GAutomorphism(g, data["matrix"], verified=True)
            try:
                sigma = ag.reconstruct_sigma(f)
                report.update(depth=ag.depth_g(f), homogeneous=ag.is_homogeneous_g(f),
                              sigma=sigma.to_json()["images"])
            except ReconstructionError as exc:
                report.update(admissible=False, reason=str(exc), diagnostics=exc.diagnostics)
    else:
        try:
            sigma = ag.OAutomorphism.from_json(data, params)
        except (ParityError, SingularityError, DomainError) as exc:
            report.update(kind="O-automorphism", admissible=False, reason=str(exc))
        else:
            ok = ag.is_admissible(sigma, g)
            report.update(kind="O-automorphism", admissible=ok, depth=ag.depth_O(sigma),
                          homogeneous=ag.is_homogeneous_O(sigma))
    if args.format == "json":
        _emit(args, _json(report))
    else:
        verdict = "admissible" if report["admissible"] else "NOT admissible"
        extra = f", depth {report['depth']}" if report.get("depth") is not None else ""
        _emit(args, f"{report['kind']} for {tag}: {verdict}{extra}\n")
    return 0 if report["admissible"] else 1


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def _common(sp, algebra_default: str | None = "SHO"):
    sp.add_argument("--p", type=int, default=5, help="field characteristic (prime > 3)")
    sp.add_argument("--m", type=int, default=2, help="number of even (and odd) variables")
    sp.add_argument("--t", default=None, help="comma list of t_i (default all 1)")
    sp.add_argument("--algebra", default=algebra_default, help=f"one of {', '.join(TAGS)}")
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--samples", type=int, default=None)
    sp.add_argument("--output", default=None, help=f"output file (relative to ${OUTPUT_ENV} if set)")
    sp.add_argument("--format", choices=("json", "text"), default="text")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="superaut",
                                 description="Hamiltonian Lie superalgebras over GF(p) and their automorphisms")
    sub = ap.add_subparsers(dest="verb", required=True)
    sp = sub.add_parser("dims", help="per-degree dimension table")
    _common(sp)
    sp.set_defaults(func=cmd_dims)
    sp = sub.add_parser("verify", help="run a verification suite")
    sp.add_argument("suite", choices=SUITES + ("all",))
    _common(sp)
    sp.set_defaults(func=cmd_verify)
    sp = sub.add_parser("export", help="write structure constants as canonical JSON")
    _common(sp)
    sp.set_defaults(func=cmd_export)
    sp = sub.add_parser("import", help="read and re-verify a structure-constant file")
    sp.add_argument("file")
    _common(sp)
    sp.set_defaults(func=cmd_import)
    sp = sub.add_parser("aut-sample", help="sample an admissible automorphism of O")
    _common(sp)
    sp.add_argument("--depth", type=int, default=0)
    sp.add_argument("--matrix", action="store_true", help="emit phi(sigma) as a matrix on g instead")
    sp.set_defaults(func=cmd_aut_sample)
    sp = sub.add_parser("aut-check", help="check an automorphism file against an algebra")
    sp.add_argument("file")
    _common(sp, algebra_default=None)
    sp.set_defaults(func=cmd_aut_check)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigurationError, UsageError) as exc:
        sys.stderr.write(f"superaut: error: {exc}\n")
        return 2
    except (KeyError, TypeError, ValueError) as exc:
        if args.verb in ("aut-check",):
            sys.stderr.write(f"superaut: error: malformed input: {exc}\n")
            return 2
        raise


if __name__ == "__main__":
    sys.exit(main())
