"""Command-line front end: ``harmfield <command> --spec FILE ...``.

Field specifications are JSON documents; reports are JSON (default) or plain
text.  Exit codes: 0 when every check passes, 1 on a verification failure,
2 on invalid input.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from fractions import Fraction
from importlib.metadata import PackageNotFoundError, version

import jsonschema
import numpy as np

from . import surfaces2d as s2
from .cgmetric import energy_terms
from .errors import HarmfieldError, NotPreharmonic, SchemaError
from .fields import AmbientPolyField, ConformalGradientField, KillingField, j_twist, push_forward
from .harmonic import (
    DEFAULT_SAMPLES,
    DEFAULT_SEED,
    GraphPatch,
    InfiniteSolutionSet,
    classify_cgf,
    first_variation,
    is_pq_harmonic,
    killing_harmonic_condition_2d,
    solve_metric_params,
    spinnaker,
    weitzenbock_residual,
)
from .poly import Poly
from .quadric import SURFACES, Quadric, canonical_anti_isometry, sample_points

IDENTITY_TOL = 1e-8
SEED_ENV = "HARMFIELD_SEED"

_VECTOR = {"type": "array", "items": {"type": "number"}, "minItems": 1}
_TERM = {
    "type": "array",
    "prefixItems": [{"type": "number"}, {"type": "array", "items": {"type": "integer", "minimum": 0}}],
    "items": False,
    "minItems": 2,
}
FIELD_SCHEMA = {
    "type": "object",
    "required": ["type"],
    "properties": {
        "type": {"enum": ["cgf", "killing", "poly"]},
        "pole": _VECTOR,
        "matrix": {"type": "array", "items": _VECTOR, "minItems": 1},
        "polys": {"type": "array", "items": {"type": "array", "items": _TERM}},
    },
    "allOf": [
        {"if": {"properties": {"type": {"const": "cgf"}}}, "then": {"required": ["pole"]}},
        {"if": {"properties": {"type": {"const": "killing"}}}, "then": {"required": ["matrix"]}},
        {"if": {"properties": {"type": {"const": "poly"}}}, "then": {"required": ["polys"]}},
    ],
    "additionalProperties": False,
}
SPEC_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "type": "object",
    "required": ["quadric", "field"],
    "properties": {
        "quadric": {
            "type": "object",
            "required": ["kind", "n", "v"],
            "properties": {
                "kind": {"enum": ["sphere", "hyperbolic"]},
                "n": {"type": "integer", "minimum": 1},
                "v": {"type": "integer", "minimum": 0},
            },
            "additionalProperties": False,
        },
        "field": FIELD_SCHEMA,
        "params": {
            "type": "object",
            "properties": {"p": {"type": "number"}, "q": {"type": "number"}},
            "additionalProperties": False,
        },
        "tolerances": {
            "type": "object",
            "properties": {
                "harmonic": {"type": "number", "exclusiveMinimum": 0},
                "identity": {"type": "number", "exclusiveMinimum": 0},
            },
            "additionalProperties": False,
        },
        "sampling": {
            "type": "object",
            "properties": {
                "count": {"type": "integer", "minimum": 1},
                "seed": {"type": "integer", "minimum": 0},
            },
            "additionalProperties": False,
        },
        "variation": {
            "type": "object",
            "required": ["rho", "center", "half_width"],
            "properties": {
                "rho": FIELD_SCHEMA,
                "center": _VECTOR,
                "half_width": {"type": "number", "exclusiveMinimum": 0},
                "solved_axis": {"type": "integer"},
                "branch": {"enum": [-1, 1]},
            },
            "additionalProperties": False,
        },
    },
    "additionalProperties": False,
}


# ---------------------------------------------------------------------------
# spec <-> objects
# ---------------------------------------------------------------------------

def validate_spec(doc) -> None:
    try:
        jsonschema.validate(doc, SPEC_SCHEMA)
    except jsonschema.ValidationError as exc:
        loc = "/".join(str(p) for p in exc.absolute_path) or "<root>"
        raise SchemaError(f"{loc}: {exc.message}") from None


def build_field(M: Quadric, doc):
    try:
        kind = doc["type"]
        if kind == "cgf":
            if len(doc["pole"]) != M.dim:
                raise SchemaError(f"pole must have {M.dim} entries")
            return ConformalGradientField(M, np.array(doc["pole"], dtype=float))
        if kind == "killing":
            A = np.array(doc["matrix"], dtype=float)
            if A.shape != (M.dim, M.dim):
                raise SchemaError(f"matrix must be {M.dim}x{M.dim}")
            return KillingField(M, A)
        comps = []
        if len(doc["polys"]) != M.dim:
            raise SchemaError(f"polys must have {M.dim} components")
        for table in doc["polys"]:
            terms: dict = {}
            for coef, exp in table:
                if len(exp) != M.dim:
                    raise SchemaError(f"exponent {exp} must have {M.dim} entries")
                terms[tuple(exp)] = terms.get(tuple(exp), 0) + coef
            comps.append(Poly(M.dim, terms))
        V = AmbientPolyField(M, tuple(comps))
        X = sample_points(M, 32, 0)
        if np.abs(V.tangency_residual(X)).max() > 1e-9 * max(1.0, np.abs(V(X)).max()):
            raise SchemaError("polynomial field is not tangent to the quadric")
        return V
    except SchemaError:
        raise
    except (ValueError, TypeError) as exc:
        raise SchemaError(str(exc)) from None


def load_spec(path: str) -> dict:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read {path}: {exc}") from None
    validate_spec(doc)
    return doc


def build_quadric(doc) -> Quadric:
    q = doc["quadric"]
    try:
        return Quadric(q["kind"], q["n"], q["v"])
    except ValueError as exc:
        raise SchemaError(str(exc)) from None


def field_to_doc(V) -> dict:
    if isinstance(V, ConformalGradientField):
        return {"type": "cgf", "pole": V.pole}
    if isinstance(V, KillingField):
        return {"type": "killing", "matrix": V.matrix}
    return {
        "type": "poly",
        "polys": [[[c, list(e)] for e, c in sorted(p.terms.items())] for p in V.components],
    }


def quadric_to_doc(M: Quadric) -> dict:
    return {"kind": M.kind, "n": M.n, "v": M.v}


def to_jsonable(obj):
    if isinstance(obj, Fraction):
        return {"num": obj.numerator, "den": obj.denominator}
    if isinstance(obj, np.ndarray):
        return [to_jsonable(x) for x in obj.tolist()]
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = [to_jsonable(x) for x in obj]
        if isinstance(obj, (set, frozenset)):
            items.sort(key=lambda x: json.dumps(x, sort_keys=True))
        return items
    if hasattr(obj, "value") and isinstance(getattr(obj, "value"), str):
        return obj.value
    return obj


def _pkg_version() -> str:
    try:
        return version("artifact")
    except PackageNotFoundError:
        return "0+unknown"


# ---------------------------------------------------------------------------
# option resolution
# ---------------------------------------------------------------------------

def resolve_seed(args, doc) -> int:
    if args.seed is not None:
        return args.seed
    if doc and "seed" in doc.get("sampling", {}):
        return doc["sampling"]["seed"]
    env = os.environ.get(SEED_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise SchemaError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return DEFAULT_SEED


def resolve_samples(args, doc) -> int:
    if args.samples is not None:
        return args.samples
    return (doc or {}).get("sampling", {}).get("count", DEFAULT_SAMPLES)


def resolve_params(args, doc, required: bool = True):
    spec = (doc or {}).get("params", {})
    p = args.p if args.p is not None else spec.get("p")
    q = args.q if args.q is not None else spec.get("q")
    if required and (p is None or q is None):
        raise SchemaError("metric parameters p and q are required (spec 'params' or --p/--q)")
    return p, q


def resolve_tol(args, doc):
    if args.tol is not None:
        return args.tol
    return (doc or {}).get("tolerances", {}).get("harmonic")


def _identity_tol(doc) -> float:
    return (doc or {}).get("tolerances", {}).get("identity", IDENTITY_TOL)


def _verdict(v) -> dict:
    return {
        "pass": bool(v.harmonic),
        "max_residual": v.max_residual,
        "samples": v.samples,
        "tol": v.tol,
        "method": v.method,
    }


def _require_spec(args) -> dict:
    if not args.spec:
        raise SchemaError("--spec is required for this command")
    return load_spec(args.spec)


# ---------------------------------------------------------------------------
# commands; each returns (report, ok)
# ---------------------------------------------------------------------------

def cmd_verify(args):
    doc = _require_spec(args)
    M = build_quadric(doc)
    V = build_field(M, doc["field"])
    params = resolve_params(args, doc)
    seed, count = resolve_seed(args, doc), resolve_samples(args, doc)
    v = is_pq_harmonic(V, params, count, resolve_tol(args, doc), seed)
    X = sample_points(M, count, seed)
    weitz = float(np.max(weitzenbock_residual(V, X)))
    itol = _identity_tol(doc)
    checks = {
        "harmonic": _verdict(v),
        "weitzenbock": {"pass": weitz < itol, "max_residual": weitz, "samples": count, "tol": itol},
    }
    report = {"quadric": quadric_to_doc(M), "params": {"p": params[0], "q": params[1]}, "checks": checks}
    return report, all(c["pass"] for c in checks.values()), seed


def cmd_params(args):
    doc = _require_spec(args)
    M = build_quadric(doc)
    V = build_field(M, doc["field"])
    if isinstance(V, AmbientPolyField):
        raise NotPreharmonic("parameter solving needs a conformal gradient or Killing field")
    data = spinnaker(V)
    report: dict = {
        "quadric": quadric_to_doc(M),
        "preharmonic": {"nu": data.nu, "zeta": list(data.zeta), "laplacian_F": list(data.deltaF),
                        **{k: v for k, v in data.extras.items()}},
    }
    try:
        report["solutions"] = sorted(solve_metric_params(data))
    except InfiniteSolutionSet as exc:
        report["solutions"] = None
        report["infinite"] = str(exc)
    if data.kind == "cgf":
        report["classification"] = sorted(classify_cgf(M.n, data.extras["mu"]))
    elif M.n == 2:
        sol = killing_harmonic_condition_2d(M.epsilon, data.extras["lambda"])
        report["classification"] = [] if sol is None else [sol]
    return report, True, None


def cmd_twist(args):
    doc = _require_spec(args)
    M = build_quadric(doc)
    V = build_field(M, doc["field"])
    params = resolve_params(args, doc)
    seed, count = resolve_seed(args, doc), resolve_samples(args, doc)
    tol = resolve_tol(args, doc)
    stages = [("input", V)]
    W = V
    if args.target in ("j", "both"):
        W = j_twist(W)
        stages.append(("j_twist", W))
    if args.target in ("anti", "both"):
        if W.quadric.kind != "hyperbolic":
            raise SchemaError("the canonical anti-isometry starts from a hyperbolic quadric")
        P = canonical_anti_isometry(W.quadric.n, W.quadric.v)
        W = push_forward(W, P, target=W.quadric.dual())
        stages.append(("anti_isometry", W))
    out = []
    for name, F in stages:
        v = is_pq_harmonic(F, params, count, tol, seed)
        out.append({"stage": name, "quadric": quadric_to_doc(F.quadric), "field": field_to_doc(F),
                    "harmonic": _verdict(v)})
    report = {"params": {"p": params[0], "q": params[1]}, "target": args.target, "stages": out}
    return report, all(s["harmonic"]["pass"] for s in out), seed


def _killing_from_args(args) -> "s2.Killing2D":
    if args.abc is not None:
        return s2.Killing2D(*args.abc, s2.H21)
    doc = _require_spec(args)
    M = build_quadric(doc)
    V = build_field(M, doc["field"])
    if not isinstance(V, KillingField) or M != s2.H21:
        raise SchemaError("expected a Killing field on H^2_1")
    return s2.Killing2D.from_matrix(M, V.matrix)


def cmd_fixed_points(args):
    k = _killing_from_args(args)
    r = s2.fixed_points(k)
    report = {"abc": k.abc, "lambda": s2.lambda_2d(k), "category": r.category, "points": list(r.points)}
    return report, True, None


def cmd_normal_form(args):
    k = _killing_from_args(args)
    N, P = s2.normal_form(k)
    conj, iso = s2.normal_form_residual(k, N, P)
    ok = conj < 1e-10 and iso < 1e-10
    report = {"abc": k.abc, "lambda": s2.lambda_2d(k), "normal_form": N, "conjugator": P,
              "conjugation_residual": conj, "isometry_residual": iso, "pass": ok}
    return report, ok, None


def cmd_first_variation(args):
    doc = _require_spec(args)
    if "variation" not in doc:
        raise SchemaError("spec needs a 'variation' block")
    M = build_quadric(doc)
    V = build_field(M, doc["field"])
    var = doc["variation"]
    rho = build_field(M, var["rho"])
    if len(var["center"]) != M.n:
        raise SchemaError(f"patch centre must have {M.n} coordinates")
    patch = GraphPatch(M, tuple(var["center"]), var["half_width"], var.get("solved_axis", -1), var.get("branch", 1))
    params = resolve_params(args, doc)
    fv = first_variation(V, rho, params, patch)
    if abs(fv.analytic) < 1e-8:
        ok = abs(fv.numeric) < 1e-5
    else:
        ok = fv.relative_error < 1e-3
    report = {"params": {"p": params[0], "q": params[1]}, "numeric": fv.numeric, "analytic": fv.analytic,
              "relative_error": fv.relative_error, "nodes": fv.nodes, "pass": ok}
    return report, ok, None


def cmd_energy(args):
    doc = _require_spec(args)
    M = build_quadric(doc)
    V = build_field(M, doc["field"])
    params = resolve_params(args, doc)
    seed, count = resolve_seed(args, doc), resolve_samples(args, doc)
    X = sample_points(M, count, seed)
    ev, e = energy_terms(V, X, params)
    stats = lambda a: {"min": float(a.min()), "max": float(a.max()), "mean": float(a.mean())}  # noqa: E731
    report = {"params": {"p": params[0], "q": params[1]}, "samples": count,
              "vertical": stats(ev), "total": stats(e)}
    return report, True, seed


def cmd_catalog(args):
    seed = resolve_seed(args, None)
    count = args.samples or DEFAULT_SAMPLES
    rows = []
    ok = True
    for M in SURFACES:
        k = s2.harmonic_killing_catalog(M)
        row: dict = {"quadric": M.name, "epsilon": M.epsilon}
        if k is None:
            row["representative"] = None
        else:
            v = is_pq_harmonic(k.field, (3.0, -0.5), count, args.tol, seed)
            row.update(abc=k.abc, matrix=k.matrix, **{"lambda": s2.lambda_2d(k)}, harmonic=_verdict(v))
            ok &= bool(v.harmonic)
        rows.append(row)
    return {"params": {"p": 3.0, "q": -0.5}, "catalog": rows}, ok, seed


COMMANDS = {
    "verify": cmd_verify,
    "params": cmd_params,
    "twist": cmd_twist,
    "fixed-points": cmd_fixed_points,
    "normal-form": cmd_normal_form,
    "first-variation": cmd_first_variation,
    "energy": cmd_energy,
    "catalog": cmd_catalog,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--spec", metavar="PATH")
    common.add_argument("--p", type=float)
    common.add_argument("--q", type=float)
    common.add_argument("--samples", type=int, metavar="N")
    common.add_argument("--seed", type=int, metavar="N")
    common.add_argument("--tol", type=float, metavar="X")
    common.add_argument("--format", choices=("json", "text"), default="json")
    parser = argparse.ArgumentParser(prog="harmfield", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name in ("fixed-points", "normal-form"):
            sp.add_argument("--abc", type=float, nargs=3, metavar=("A", "B", "C"))
        if name == "twist":
            sp.add_argument("--target", choices=("j", "anti", "both"), default="both")
    return parser


def _text(obj, indent: int = 0) -> list[str]:
    pad = "  " * indent
    lines = []
    if isinstance(obj, dict):
        for k, v in obj.items():
            if isinstance(v, (dict, list)) and v and not all(isinstance(x, (int, float)) for x in v):
                lines.append(f"{pad}{k}:")
                lines.extend(_text(v, indent + 1))
            else:
                lines.append(f"{pad}{k}: {json.dumps(v)}")
    elif isinstance(obj, list):
        for item in obj:
            if isinstance(item, (dict, list)):
                lines.append(f"{pad}-")
                lines.extend(_text(item, indent + 1))
            else:
                lines.append(f"{pad}- {json.dumps(item)}")
    else:
        lines.append(f"{pad}{json.dumps(obj)}")
    return lines


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True)
    return "\n".join(_text(report))


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    try:
        body, ok, seed = COMMANDS[args.command](args)
        status = "pass" if ok else "fail"
        code = 0 if ok else 1
    except (SchemaError, NotPreharmonic) as exc:
        body, status, code, seed = {"error": type(exc).__name__, "message": str(exc)}, "error", 2, None
    except HarmfieldError as exc:
        body, status, code, seed = {"error": type(exc).__name__, "message": str(exc)}, "fail", 1, None
    except ValueError as exc:
        body, status, code, seed = {"error": type(exc).__name__, "message": str(exc)}, "error", 2, None
    report = {
        "command": args.command,
        "status": status,
        "result": to_jsonable(body),
        "provenance": {"version": _pkg_version(), "seed": seed, "tol": args.tol, "spec": args.spec},
    }
    sys.stdout.write(render(report, args.format) + "\n")
    return code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
