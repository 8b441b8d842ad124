"""Text surface descriptions: ``key: value`` lines, one surface per file.

Example::

    kind: circle
    radius: 1.0
    center: [0,0]
    spacing: 0.01

Values are numbers, booleans (``true``/``false``), bracketed lists of
numbers, or (for ``u``) an expression in the grammar of :mod:`.expr`.
Lines starting with ``#`` are comments.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import expr as ex
from .geom import (
    GridGraph,
    PlaneN,
    Polyline,
    ProfileSurface,
    circle_polyline,
    sample_plane_disk,
    sphere_profile,
)

# key -> value type; the order here is the canonical serialisation order
KINDS = {
    "circle": {"radius": "real", "center": "vector", "spacing": "real"},
    "sphere": {"radius": "real", "n": "int", "spacing": "real"},
    "polyline": {"vertices": "matrix", "closed": "bool", "boundary_fixed": "bool"},
    "gridgraph": {"domain": "matrix", "spacing": "real", "u": "expr"},
    "profile": {"n": "int", "points": "matrix"},
    "planedisk": {"n": "int", "k": "int", "radius": "real", "spacing": "real", "center": "vector"},
}
REQUIRED = {
    "circle": ("radius", "spacing"),
    "sphere": ("radius", "n", "spacing"),
    "polyline": ("vertices",),
    "gridgraph": ("domain", "spacing", "u"),
    "profile": ("n", "points"),
    "planedisk": ("n", "k", "radius", "spacing"),
}


class SpecError(ValueError):
    def __init__(self, message: str, line: int, column: Optional[int] = None):
        where = f"at line {line}" if column is None else f"at line {line}, column {column}"
        super().__init__(f"{message} {where}")
        self.line, self.column = line, column


@dataclass(frozen=True)
class SurfaceSpec:
    """Parsed description.  ``params`` is a sorted tuple of ``(key, value)``
    with lists stored as tuples so specs compare by value."""

    kind: str
    params: tuple

    def get(self, key, default=None):
        return dict(self.params).get(key, default)


def _to_tuple(v):
    return tuple(_to_tuple(x) for x in v) if isinstance(v, list) else v


def _parse_value(kind: str, raw: str, line: int, col: int):
    text = raw.strip()
    offset = col + (len(raw) - len(raw.lstrip()))
    if kind == "expr":
        try:
            return ex.parse_expr(text)
        except ex.ExprError as err:
            raise SpecError(err.message, line, offset + err.column - 1) from None
    if kind == "bool":
        if text not in ("true", "false"):
            raise SpecError(f"expected true or false, got {text!r}", line, offset)
        return text == "true"
    try:
        val = json.loads(text)
    except json.JSONDecodeError as err:
        if kind in ("int", "real"):
            raise SpecError(f"malformed number {text!r}", line, offset) from None
        raise SpecError(f"malformed value ({err.msg})", line, offset + err.colno - 1) from None
    if kind == "int":
        if not isinstance(val, int) or isinstance(val, bool):
            raise SpecError(f"expected an integer, got {text!r}", line, offset)
        return val
    if kind == "real":
        if not isinstance(val, (int, float)) or isinstance(val, bool) or not math.isfinite(val):
            raise SpecError(f"malformed number {text!r}", line, offset)
        return float(val)
    depth = 1 if kind == "vector" else 2

    def check(v, d):
        if d == 0:
            return isinstance(v, (int, float)) and not isinstance(v, bool) and math.isfinite(v)
        return isinstance(v, list) and len(v) > 0 and all(check(x, d - 1) for x in v)

    if not check(val, depth):
        raise SpecError(f"expected a {'list' if depth == 1 else 'list of lists'} of numbers", line, offset)
    return _to_tuple(json.loads(text, parse_int=float))


def parse_surface_spec(text: str) -> SurfaceSpec:
    """Parse a spec; raises :class:`SpecError` with line/column."""
    kind, kind_line = None, 0
    entries = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.rstrip()
        if not body.strip() or body.lstrip().startswith("#"):
            continue
        if ":" not in body:
            raise SpecError("expected 'key: value'", lineno, len(body) - len(body.lstrip()) + 1)
        key, raw = body.split(":", 1)
        col = len(key) + 2
        key = key.strip()
        if key == "kind":
            name = raw.strip()
            if kind is not None:
                raise SpecError("duplicate key 'kind'", lineno)
            if name not in KINDS:
                raise SpecError(f"unknown kind {name!r}", lineno)
            kind, kind_line = name, lineno
            continue
        if key in entries:
            raise SpecError(f"duplicate key {key!r}", lineno)
        entries[key] = (raw, lineno, col)
    if kind is None:
        raise SpecError("missing 'kind'", 1)
    schema = KINDS[kind]
    params = {}
    for key, (raw, lineno, col) in entries.items():
        if key not in schema:
            raise SpecError(f"unknown key {key!r} for kind {kind!r}", lineno, 1)
        params[key] = _parse_value(schema[key], raw, lineno, col)
    for key in REQUIRED[kind]:
        if key not in params:
            raise SpecError(f"missing key {key!r} for kind {kind!r}", kind_line)
    return SurfaceSpec(kind, tuple(sorted(params.items())))


def _format_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        return ex.format_real(v)
    if isinstance(v, tuple):
        return "[" + ", ".join(_format_value(x) for x in v) + "]"
    return ex.unparse(v)


def serialize_surface_spec(spec: SurfaceSpec) -> str:
    """Canonical text: ``kind`` first, then keys in schema order."""
    lines = [f"kind: {spec.kind}"]
    params = dict(spec.params)
    for key in KINDS[spec.kind]:
        if key in params:
            v = params[key]
            if KINDS[spec.kind][key] == "real":
                v = float(v)
            lines.append(f"{key}: {_format_value(v)}")
    return "\n".join(lines) + "\n"


def build_surface(spec: SurfaceSpec):
    """Instantiate the described surface."""
    p = dict(spec.params)
    k = spec.kind
    if k == "circle":
        return circle_polyline(p["radius"], p["spacing"], p.get("center", (0.0, 0.0)))
    if k == "sphere":
        return sphere_profile(p["radius"], p["n"], p["spacing"])
    if k == "polyline":
        return Polyline(np.array(p["vertices"]), p.get("closed", False), p.get("boundary_fixed", True))
    if k == "profile":
        return ProfileSurface(p["n"], np.array(p["points"]))
    if k == "gridgraph":
        dom = np.array(p["domain"])
        if dom.shape[1] != 2:
            raise ValueError("domain rows are [lower, upper] per axis")
        names = ex.variables(p["u"])
        n = len(dom)
        if n == 1 and "y" in names:
            raise ValueError("a one-dimensional graph cannot use y")
        node = p["u"]

        def f(*coords):
            env = dict(zip(ex.VARS, coords))
            return np.broadcast_to(ex.evaluate(node, **env), coords[0].shape)

        return GridGraph.from_function(f, dom[:, 0], dom[:, 1], p["spacing"])
    if k == "planedisk":
        n, kk = p["n"], p["k"]
        base = np.array(p.get("center", (0.0,) * (n + kk)))
        return sample_plane_disk(PlaneN.coordinate(n, kk, base), p["radius"], p["spacing"])
    raise ValueError(f"unknown kind {k!r}")


def load_surface(path: str):
    with open(path, encoding="utf-8") as fh:
        return build_surface(parse_surface_spec(fh.read()))

