"""JSON (de)serialisation; exact scalars travel as ``"p/q"`` strings."""

from __future__ import annotations

import json
from fractions import Fraction
from importlib import resources

import jsonschema

from .flags import AlphaWeights, FlagPoints
from .geometry import HPolytope, VPolytope, convex_hull
from .linalg import parse_scalar


class ValidationError(ValueError):
    """Input document does not match its schema."""


def scalar_out(x):
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, int) and not isinstance(x, bool):
        return str(x)
    return float(x)


def vector_out(v) -> list:
    return [scalar_out(x) for x in v]


def _schema(name: str) -> dict:
    text = resources.files("mahlercube").joinpath("schemas", f"{name}.schema.json").read_text()
    return json.loads(text)


def validate(doc, name: str):
    try:
        jsonschema.validate(doc, _schema(name))
    except jsonschema.ValidationError as exc:
        raise ValidationError(f"{name}: {exc.message}") from None


def _backend(doc) -> str:
    if "backend" in doc:
        return doc["backend"]
    rows = doc.get("vertices") or doc.get("halfspaces") or []
    return "float" if any(isinstance(x, float) for r in rows for x in r) else "exact"


def polytope_from_json(doc):
    validate(doc, "polytope")
    backend = _backend(doc)
    n = doc["dim"]
    try:
        if "vertices" in doc:
            pts = [tuple(parse_scalar(x, backend) for x in v) for v in doc["vertices"]]
            if any(len(p) != n for p in pts):
                raise ValidationError("vertex length differs from dim")
            return convex_hull(pts, backend)
        rows = [tuple(parse_scalar(x, backend) for x in a) for a in doc["halfspaces"]]
        if any(len(r) != n for r in rows):
            raise ValidationError("halfspace length differs from dim")
        return HPolytope(n, tuple(rows), backend)
    except (ValueError, ZeroDivisionError) as exc:
        if isinstance(exc, ValidationError):
            raise
        raise ValidationError(str(exc)) from None


def polytope_to_json(K) -> dict:
    if isinstance(K, VPolytope):
        return {"dim": K.dim, "backend": K.backend,
                "vertices": [vector_out(v) for v in K.vertices]}
    return {"dim": K.dim, "backend": K.backend,
            "halfspaces": [vector_out(a) for a in K.halfspaces]}


def flagpoints_to_json(X: FlagPoints) -> dict:
    return {"dim": X.dim,
            "points": [{"sign": list(F), "x": vector_out(X[F])} for F in sorted(X)]}


def flagpoints_from_json(doc) -> FlagPoints:
    validate(doc, "flagpoints")
    backend = doc.get("backend") or (
        "float" if any(isinstance(x, float) for p in doc["points"] for x in p["x"]) else "exact")
    pts = {tuple(p["sign"]): tuple(parse_scalar(x, backend) for x in p["x"])
           for p in doc["points"]}
    try:
        return FlagPoints(doc["dim"], pts)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None


def alpha_to_json(w: AlphaWeights) -> dict:
    return {"dim": w.dim,
            "alpha": [{"sign": list(F), "value": scalar_out(w[F])} for F in sorted(w)]}


def alpha_from_json(doc) -> AlphaWeights:
    validate(doc, "alphaweights")
    vals = {tuple(p["sign"]): parse_scalar(p["value"], "float" if isinstance(p["value"], float)
                                           else "exact") for p in doc["alpha"]}
    try:
        return AlphaWeights(doc["dim"], vals)
    except ValueError as exc:
        raise ValidationError(str(exc)) from None


def contact_to_json(pair) -> dict:
    return {"face": list(pair.face), "y": vector_out(pair.y), "y_star": vector_out(pair.y_star),
            "alpha": scalar_out(pair.alpha), "h": vector_out(pair.h),
            "h_star": vector_out(pair.h_star)}


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=False, separators=(", ", ": "))
