"""Model files, CSV tables and PGM heatmaps.

Model files are YAML documents of one of two kinds::

    version: 1
    vertices: [a, b, c, d]
    tiles:
      - {vertices: [a, b]}            # multiset as a list (repeats allowed)
      - {vertices: {c: 2}, weight: 1/2}
    homogenize: false
    query: {alpha: [...], charges: {a: 1, d: -1}}

    version: 1
    torus:
      d: 2
      n: 256
      w0: 0.001
      prototiles:
        - {cells: [[0, 0], [1, 0], [0, 1]], weight: 1}
        - {terms: [{exponent: [0, 0], coefficient: 2}]}

Weights may be integers, floats or exact fractions written ``p/q``.
Errors carry the line and column of the offending node.
"""

from __future__ import annotations

import csv
import io as _io
import math
from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np
import yaml

from .model import Tile, TileSystem, homogenize as _homogenize
from .spectral import LaurentPolynomial, SpectralModel

__all__ = [
    "ModelError",
    "Query",
    "ModelFile",
    "parse_model",
    "load_model_file",
    "parse_model_text",
    "emit_model",
    "bundled_models",
    "resolve_model",
    "write_csv",
    "format_number",
    "write_pgm",
    "pgm_bytes",
    "gray_levels",
]

SCHEMA_VERSION = 1


class ModelError(ValueError):
    """Syntax or semantic problem in a model file, with a source position."""

    def __init__(self, message: str, source: str = "<model>", line: int | None = None, column: int | None = None):
        self.message, self.source, self.line, self.column = message, source, line, column
        where = source if line is None else f"{source}:{line}:{column}"
        super().__init__(f"{where}: {message}")


@dataclass(frozen=True)
class Query:
    alpha: tuple | None = None
    multiplicity: tuple | None = None
    charges: tuple[tuple[str, float], ...] | None = None
    offsets: tuple[tuple[int, ...], ...] | None = None
    eps: tuple[float, ...] | None = None

    def is_empty(self) -> bool:
        return all(getattr(self, k) is None for k in ("alpha", "multiplicity", "charges", "offsets", "eps"))


@dataclass(frozen=True)
class ModelFile:
    model: TileSystem | SpectralModel
    query: Query = field(default_factory=Query)
    version: int = SCHEMA_VERSION


# ---------------------------------------------------------------- parsing


class _Reader:
    """Walks a composed YAML node tree, raising positioned ModelErrors."""

    def __init__(self, source: str):
        self.source = source
        self._constructor = yaml.constructor.SafeConstructor()

    def fail(self, node, message: str):
        mark = getattr(node, "start_mark", None)
        if mark is None:
            raise ModelError(message, self.source)
        raise ModelError(message, self.source, mark.line + 1, mark.column + 1)

    def mapping(self, node, allowed: Iterable[str], required: Iterable[str] = ()) -> dict[str, Any]:
        if not isinstance(node, yaml.MappingNode):
            self.fail(node, "expected a mapping")
        allowed = set(allowed)
        out: dict[str, Any] = {}
        for knode, vnode in node.value:
            key = self.scalar(knode)
            if not isinstance(key, str):
                self.fail(knode, f"keys must be strings, got {key!r}")
            if key not in allowed:
                self.fail(knode, f"unknown field {key!r} (allowed: {', '.join(sorted(allowed))})")
            if key in out:
                self.fail(knode, f"duplicate field {key!r}")
            out[key] = vnode
        for key in required:
            if key not in out:
                self.fail(node, f"missing required field {key!r}")
        return out

    def seq(self, node) -> list:
        if not isinstance(node, yaml.SequenceNode):
            self.fail(node, "expected a list")
        return list(node.value)

    def scalar(self, node):
        if not isinstance(node, yaml.ScalarNode):
            self.fail(node, "expected a scalar")
        return self._constructor.construct_object(node, deep=True)

    def name(self, node) -> str:
        v = self.scalar(node)
        if isinstance(v, bool) or v is None:
            self.fail(node, f"invalid vertex name {v!r}")
        return str(v)

    def integer(self, node, *, minimum: int | None = None) -> int:
        v = self.scalar(node)
        if isinstance(v, bool) or not isinstance(v, int):
            self.fail(node, f"expected an integer, got {v!r}")
        if minimum is not None and v < minimum:
            self.fail(node, f"expected an integer >= {minimum}, got {v}")
        return v

    def number(self, node, *, exact: bool = True):
        v = self.scalar(node)
        if isinstance(v, bool):
            self.fail(node, f"expected a number, got {v!r}")
        if isinstance(v, (int, float)):
            return v
        if isinstance(v, str) and exact:
            try:
                return Fraction(v.strip())
            except (ValueError, ZeroDivisionError):
                pass
        self.fail(node, f"expected a number, got {v!r}")

    def weight(self, node):
        w = self.number(node)
        if isinstance(w, float) and not math.isfinite(w):
            self.fail(node, "weight must be finite")
        if not w > 0:
            self.fail(node, f"weight must be positive, got {w}")
        return w


def _parse_tile(r: _Reader, node, known: set[str]) -> tuple[Tile, Any]:
    fields = r.mapping(node, ("vertices", "weight"), ("vertices",))
    vnode = fields["vertices"]
    counts: dict[str, int] = {}
    if isinstance(vnode, yaml.SequenceNode):
        for item in r.seq(vnode):
            v = r.name(item)
            if v not in known:
                r.fail(item, f"tile references unknown vertex {v!r}")
            counts[v] = counts.get(v, 0) + 1
    elif isinstance(vnode, yaml.MappingNode):
        for knode, mnode in vnode.value:
            v = r.name(knode)
            if v not in known:
                r.fail(knode, f"tile references unknown vertex {v!r}")
            if v in counts:
                r.fail(knode, f"vertex {v!r} listed twice")
            counts[v] = r.integer(mnode, minimum=1)
    else:
        r.fail(vnode, "tile vertices must be a list or a vertex: multiplicity mapping")
    if not counts:
        r.fail(vnode, "empty tile")
    w = r.weight(fields["weight"]) if "weight" in fields else 1
    return Tile(counts), w


def _parse_prototile(r: _Reader, node, d: int) -> tuple[LaurentPolynomial, float]:
    fields = r.mapping(node, ("cells", "terms", "weight"))
    if ("cells" in fields) == ("terms" in fields):
        r.fail(node, "a prototile needs exactly one of 'cells' or 'terms'")

    def vector(vn):
        if d == 1 and isinstance(vn, yaml.ScalarNode):
            return (r.integer(vn),)
        items = r.seq(vn)
        if len(items) != d:
            r.fail(vn, f"expected {d} integer coordinates")
        return tuple(r.integer(i) for i in items)

    terms: dict[tuple[int, ...], float] = {}
    if "cells" in fields:
        cells = r.seq(fields["cells"])
        if not cells:
            r.fail(fields["cells"], "empty prototile")
        for c in cells:
            e = vector(c)
            terms[e] = terms.get(e, 0.0) + 1.0
    else:
        items = r.seq(fields["terms"])
        if not items:
            r.fail(fields["terms"], "empty prototile")
        for t in items:
            tf = r.mapping(t, ("exponent", "coefficient"), ("exponent", "coefficient"))
            e = vector(tf["exponent"])
            c = float(r.number(tf["coefficient"]))
            if e in terms:
                r.fail(t, f"exponent {list(e)} listed twice")
            terms[e] = c
    try:
        p = LaurentPolynomial(terms)
    except ValueError as exc:
        r.fail(node, str(exc))
    w = float(r.weight(fields["weight"])) if "weight" in fields else 1.0
    return p, w


def _parse_query(r: _Reader, node, system: TileSystem | None, d: int | None) -> Query:
    f = r.mapping(node, ("alpha", "multiplicity", "charges", "offsets", "eps"))
    out: dict[str, Any] = {}

    def per_vertex(vn, *, integer: bool):
        if system is None:
            r.fail(vn, "per-vertex queries need a graph model")
        if isinstance(vn, yaml.MappingNode):
            vals = {}
            for kn, xn in vn.value:
                v = r.name(kn)
                if v not in system.index:
                    r.fail(kn, f"unknown vertex {v!r}")
                vals[v] = r.integer(xn, minimum=0) if integer else r.number(xn)
            missing = [v for v in system.vertices if v not in vals]
            if missing:
                r.fail(vn, f"missing values for vertices {missing}")
            return tuple(vals[v] for v in system.vertices)
        items = r.seq(vn)
        if len(items) != system.n_vertices:
            r.fail(vn, f"expected {system.n_vertices} values, got {len(items)}")
        return tuple(r.integer(i, minimum=0) if integer else r.number(i) for i in items)

    if "alpha" in f:
        alpha = per_vertex(f["alpha"], integer=False)
        if system.is_uniform:
            total = sum(Fraction(a) if not isinstance(a, float) else a for a in alpha)
            if abs(float(total) - system.delta) > 1e-9:
                r.fail(f["alpha"], f"densities sum to {float(total):g}, expected tile size {system.delta}")
        out["alpha"] = alpha
    if "multiplicity" in f:
        out["multiplicity"] = per_vertex(f["multiplicity"], integer=True)
    if "charges" in f:
        if system is None:
            r.fail(f["charges"], "charges need a graph model")
        cn = f["charges"]
        if not isinstance(cn, yaml.MappingNode):
            r.fail(cn, "charges must map vertices to numbers")
        ch = {}
        for kn, xn in cn.value:
            v = r.name(kn)
            if v not in system.index:
                r.fail(kn, f"unknown vertex {v!r}")
            if v in ch:
                r.fail(kn, f"vertex {v!r} listed twice")
            ch[v] = float(r.number(xn))
        out["charges"] = tuple(ch.items())
    if "offsets" in f:
        dim = d if d is not None else None
        offs = []
        for on in r.seq(f["offsets"]):
            if isinstance(on, yaml.ScalarNode):
                offs.append((r.integer(on),))
            else:
                offs.append(tuple(r.integer(i) for i in r.seq(on)))
            if dim is not None and len(offs[-1]) != dim:
                r.fail(on, f"offset must have {dim} coordinates")
        out["offsets"] = tuple(offs)
    if "eps" in f:
        en = f["eps"]
        vals = [en] if isinstance(en, yaml.ScalarNode) else r.seq(en)
        eps = tuple(float(r.number(v)) for v in vals)
        for v, e in zip(vals, eps):
            if e < 0:
                r.fail(v, "eps must be nonnegative")
        out["eps"] = eps
    return Query(**out)


def parse_model_text(text: str, source: str = "<model>") -> ModelFile:
    try:
        root = yaml.compose(text)
    except yaml.MarkedYAMLError as exc:
        mark = exc.problem_mark
        raise ModelError(f"syntax error: {exc.problem}", source, mark.line + 1 if mark else None, mark.column + 1 if mark else None) from None
    r = _Reader(source)
    if root is None:
        raise ModelError("empty model file", source)
    top = r.mapping(root, ("version", "vertices", "tiles", "homogenize", "torus", "query"))
    version = r.integer(top["version"]) if "version" in top else SCHEMA_VERSION
    if version != SCHEMA_VERSION:
        r.fail(top["version"], f"unsupported schema version {version}")
    has_graph = "vertices" in top or "tiles" in top
    if has_graph == ("torus" in top):
        r.fail(root, "a model has either 'vertices' + 'tiles' or a 'torus' block")

    if "torus" in top:
        tf = r.mapping(top["torus"], ("d", "n", "w0", "eps", "prototiles"), ("d", "n", "prototiles"))
        d = r.integer(tf["d"])
        if d not in (1, 2):
            r.fail(tf["d"], "torus dimension must be 1 or 2")
        n = r.integer(tf["n"], minimum=1)
        protos = [_parse_prototile(r, pn, d) for pn in r.seq(tf["prototiles"])]
        if not protos:
            r.fail(tf["prototiles"], "at least one prototile is required")
        if "w0" in tf and "eps" in tf:
            r.fail(top["torus"], "give either 'w0' or 'eps', not both")
        if "eps" in tf:
            if len(protos) != 1:
                r.fail(tf["eps"], "'eps' needs a single prototile; use 'w0'")
            eps = float(r.number(tf["eps"]))
            w0 = eps * protos[0][1]
            src = tf["eps"]
        else:
            w0 = float(r.number(tf["w0"])) if "w0" in tf else 0.0
            src = tf.get("w0", top["torus"])
        if w0 < 0:
            r.fail(src, "singleton weight must be nonnegative")
        model: TileSystem | SpectralModel = SpectralModel(n, tuple(protos), w0)
        query = _parse_query(r, top["query"], None, d) if "query" in top else Query()
        return ModelFile(model, query, version)

    for key in ("vertices", "tiles"):
        if key not in top:
            r.fail(root, f"missing required field {key!r}")
    vnodes = r.seq(top["vertices"])
    if not vnodes:
        r.fail(top["vertices"], "no vertices")
    vertices, seen = [], set()
    for vn in vnodes:
        v = r.name(vn)
        if v in seen:
            r.fail(vn, f"duplicate vertex {v!r}")
        seen.add(v)
        vertices.append(v)
    tnodes = r.seq(top["tiles"])
    if not tnodes:
        r.fail(top["tiles"], "no tiles")
    parsed = [_parse_tile(r, tn, seen) for tn in tnodes]
    system = TileSystem(vertices, [t for t, _ in parsed], [w for _, w in parsed])
    if "homogenize" in top:
        flag = r.scalar(top["homogenize"])
        if not isinstance(flag, bool):
            r.fail(top["homogenize"], "'homogenize' must be true or false")
        if flag:
            system = _homogenize(system)
    query = _parse_query(r, top["query"], system, None) if "query" in top else Query()
    return ModelFile(system, query, version)


def bundled_models() -> list[str]:
    pkg = resources.files("multitile") / "data"
    return sorted(p.name[:-5] for p in pkg.iterdir() if p.name.endswith(".yaml"))


def resolve_model(name_or_path: str | Path) -> tuple[str, str]:
    """Return (source label, text) for a file path or a bundled fixture name."""
    p = Path(name_or_path)
    if p.exists():
        return str(p), p.read_text()
    data = resources.files("multitile") / "data"
    for stem in (str(name_or_path), f"{name_or_path}_polyomino"):
        res = data / f"{stem}.yaml"
        if res.is_file():
            return f"<bundled {stem}>", res.read_text()
    raise FileNotFoundError(f"no model file or bundled fixture named {str(name_or_path)!r}")


def load_model_file(name_or_path: str | Path) -> ModelFile:
    source, text = resolve_model(name_or_path)
    return parse_model_text(text, source)


def parse_model(name_or_path: str | Path) -> TileSystem | SpectralModel:
    return load_model_file(name_or_path).model


# ---------------------------------------------------------------- emitting


def _weight_out(w):
    if isinstance(w, Fraction):
        return w.numerator if w.denominator == 1 else f"{w.numerator}/{w.denominator}"
    if isinstance(w, (int, np.integer)):
        return int(w)
    return float(w)


def _query_out(q: Query, system: TileSystem | None) -> dict:
    out: dict[str, Any] = {}
    if q.alpha is not None:
        out["alpha"] = [_weight_out(a) for a in q.alpha]
    if q.multiplicity is not None:
        out["multiplicity"] = [int(a) for a in q.multiplicity]
    if q.charges is not None:
        out["charges"] = {v: float(c) for v, c in q.charges}
    if q.offsets is not None:
        out["offsets"] = [list(o) for o in q.offsets]
    if q.eps is not None:
        out["eps"] = [float(e) for e in q.eps]
    return out


def emit_model(model: ModelFile | TileSystem | SpectralModel) -> str:
    """Canonical YAML for a model; ``parse_model_text`` inverts it exactly."""
    mf = model if isinstance(model, ModelFile) else ModelFile(model)
    m = mf.model
    doc: dict[str, Any] = {"version": mf.version}
    if isinstance(m, SpectralModel):
        doc["torus"] = {
            "d": m.d,
            "n": m.n,
            "w0": float(m.w0),
            "prototiles": [
                {
                    "terms": [{"exponent": list(e), "coefficient": float(c)} for e, c in p.terms],
                    "weight": float(w),
                }
                for p, w in m.prototiles
            ],
        }
    else:
        doc["vertices"] = list(m.vertices)
        doc["tiles"] = [
            {"vertices": {v: int(k) for v, k in t.items()}, "weight": _weight_out(w)} for t, w in zip(m.tiles, m.weights)
        ]
    if not mf.query.is_empty():
        doc["query"] = _query_out(mf.query, None if isinstance(m, SpectralModel) else m)
    return yaml.safe_dump(doc, sort_keys=False, default_flow_style=None, width=100)


# ---------------------------------------------------------------- tables and images


def format_number(x) -> str:
    """Shortest round-tripping text for a number; exact fractions stay exact."""
    if isinstance(x, Fraction):
        return str(x)
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence]) -> Path:
    path = Path(path)
    buf = _io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([format_number(x) for x in row])
    path.write_text(buf.getvalue())
    return path


def gray_levels(values: np.ndarray) -> tuple[np.ndarray, float, float]:
    """Diverging map to bytes: min -> 0, zero -> 128, max -> 255.

    Negative values scale linearly on [min, 0] -> [0, 128] and positive ones
    on [0, max] -> [128, 255]. Returns (levels, vmin, vmax).
    """
    v = np.asarray(values, dtype=float)
    vmin = min(float(v.min()), 0.0)
    vmax = max(float(v.max()), 0.0)
    out = np.full(v.shape, 128.0)
    if vmin < 0:
        neg = v < 0
        out[neg] = 128.0 * (1.0 - v[neg] / vmin)
    if vmax > 0:
        pos = v > 0
        out[pos] = 128.0 + 127.0 * v[pos] / vmax
    return np.clip(np.rint(out), 0, 255).astype(np.uint8), vmin, vmax


def pgm_bytes(levels: np.ndarray) -> bytes:
    levels = np.asarray(levels, dtype=np.uint8)
    if levels.ndim != 2:
        raise ValueError("a PGM image is two-dimensional")
    h, w = levels.shape
    return f"P5\n{w} {h}\n255\n".encode("ascii") + np.ascontiguousarray(levels).tobytes()


def write_pgm(path: str | Path, values: np.ndarray, *, note: str = "") -> tuple[Path, Path]:
    """Write a binary PGM of ``values`` plus a ``.scale.txt`` sidecar."""
    path = Path(path)
    levels, vmin, vmax = gray_levels(values)
    path.write_bytes(pgm_bytes(levels))
    side = path.with_suffix(path.suffix + ".scale.txt")
    lines = [
        f"min {format_number(vmin)} -> 0",
        "zero -> 128",
        f"max {format_number(vmax)} -> 255",
        f"shape {values.shape[0]} {values.shape[1]}",
    ]
    if note:
        lines.append(note)
    side.write_text("\n".join(lines) + "\n")
    return path, side
