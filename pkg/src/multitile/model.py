"""Graphs, tiles and weights of the multinomial tiling model.

A :class:`TileSystem` is an ordered vertex list plus an ordered list of
tiles, each tile being a multiset of vertices with a positive weight.
Everything downstream (incidence matrix, free energy, Laplacian) uses the
dense vertex/tile order fixed here.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from numbers import Real
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "Tile",
    "TileSystem",
    "DUMMY_VERTEX",
    "build_incidence",
    "eval_tiling_polynomial",
    "log_tiling_polynomial",
    "homogenize",
    "apply_gauge",
    "dimer_system",
]

DUMMY_VERTEX = "v0"


@dataclass(frozen=True)
class Tile:
    """A multiset of vertices; ``multiplicities`` maps vertex -> t_v >= 1."""

    multiplicities: tuple[tuple[str, int], ...]

    def __init__(self, multiplicities: Mapping[str, int] | Iterable[tuple[str, int]]):
        items = dict(multiplicities).items() if not isinstance(multiplicities, Mapping) else multiplicities.items()
        clean: dict[str, int] = {}
        for v, m in items:
            m = int(m)
            if m < 0:
                raise ValueError(f"negative multiplicity {m} for vertex {v!r}")
            if m:
                clean[str(v)] = clean.get(str(v), 0) + m
        if not clean:
            raise ValueError("a tile needs at least one vertex with positive multiplicity")
        object.__setattr__(self, "multiplicities", tuple(sorted(clean.items())))

    @classmethod
    def from_vertices(cls, vertices: Iterable[str]) -> "Tile":
        counts: dict[str, int] = {}
        for v in vertices:
            counts[str(v)] = counts.get(str(v), 0) + 1
        return cls(counts)

    @property
    def size(self) -> int:
        return sum(m for _, m in self.multiplicities)

    def __getitem__(self, v: str) -> int:
        for u, m in self.multiplicities:
            if u == v:
                return m
        return 0

    def items(self):
        return iter(self.multiplicities)

    def vertices(self) -> tuple[str, ...]:
        return tuple(v for v, _ in self.multiplicities)

    def __repr__(self) -> str:
        inner = ", ".join(f"{v}^{m}" if m > 1 else v for v, m in self.multiplicities)
        return f"Tile({{{inner}}})"


@dataclass(frozen=True)
class TileSystem:
    """Vertices, tiles and positive tile weights.

    Weights may be ``int``/``Fraction`` (exact oracle arithmetic stays
    exact) or floats. ``edges`` is optional metadata and never used by the
    mathematics.
    """

    vertices: tuple[str, ...]
    tiles: tuple[Tile, ...]
    weights: tuple[Real, ...]
    edges: tuple[tuple[str, str], ...] = field(default=(), compare=False)

    def __init__(
        self,
        vertices: Sequence[str],
        tiles: Sequence[Tile | Mapping[str, int]],
        weights: Sequence[Real] | None = None,
        edges: Sequence[tuple[str, str]] = (),
    ):
        verts = tuple(str(v) for v in vertices)
        if len(set(verts)) != len(verts):
            raise ValueError("duplicate vertex identifiers")
        tl = tuple(t if isinstance(t, Tile) else Tile(t) for t in tiles)
        if weights is None:
            weights = (1,) * len(tl)
        ws = tuple(weights)
        if len(ws) != len(tl):
            raise ValueError(f"{len(ws)} weights for {len(tl)} tiles")
        known = set(verts)
        for k, t in enumerate(tl):
            for v, _ in t.items():
                if v not in known:
                    raise ValueError(f"tile {k} references unknown vertex {v!r}")
        for k, w in enumerate(ws):
            if not (w > 0) or (isinstance(w, float) and not math.isfinite(w)):
                raise ValueError(f"tile {k} has non-positive weight {w!r}")
        object.__setattr__(self, "vertices", verts)
        object.__setattr__(self, "tiles", tl)
        object.__setattr__(self, "weights", ws)
        object.__setattr__(self, "edges", tuple((str(a), str(b)) for a, b in edges))

    @cached_property
    def index(self) -> dict[str, int]:
        return {v: i for i, v in enumerate(self.vertices)}

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_tiles(self) -> int:
        return len(self.tiles)

    @cached_property
    def incidence(self) -> np.ndarray:
        D = np.zeros((self.n_vertices, self.n_tiles), dtype=np.int64)
        for k, t in enumerate(self.tiles):
            for v, m in t.items():
                D[self.index[v], k] = m
        D.setflags(write=False)
        return D

    @property
    def tile_sizes(self) -> np.ndarray:
        return np.array([t.size for t in self.tiles], dtype=np.int64)

    @property
    def is_uniform(self) -> bool:
        return len({t.size for t in self.tiles}) <= 1

    @property
    def delta(self) -> int:
        """Common tile size; raises if tiles have different sizes."""
        sizes = {t.size for t in self.tiles}
        if len(sizes) != 1:
            raise ValueError("tiles have different sizes; homogenize first")
        return sizes.pop()

    def weights_array(self) -> np.ndarray:
        return np.array([float(w) for w in self.weights])

    @cached_property
    def log_monomial_offsets(self) -> np.ndarray:
        """log w_t - sum_v log t_v!, the constant part of log(w_t x_t)."""
        out = np.empty(self.n_tiles)
        for k, (t, w) in enumerate(zip(self.tiles, self.weights)):
            out[k] = math.log(float(w)) - sum(math.lgamma(m + 1) for _, m in t.items())
        return out

    def with_weights(self, weights: Sequence[Real]) -> "TileSystem":
        return TileSystem(self.vertices, self.tiles, weights, self.edges)

    def vector(self, values: Mapping[str, Real] | Sequence[Real], *, dtype=float) -> np.ndarray:
        """Per-vertex array in dense vertex order from a mapping or sequence."""
        if isinstance(values, Mapping):
            missing = set(self.vertices) - set(map(str, values))
            if missing:
                raise ValueError(f"missing values for vertices {sorted(missing)}")
            return np.array([values[v] for v in self.vertices], dtype=dtype)
        arr = np.asarray(values, dtype=dtype)
        if arr.shape != (self.n_vertices,):
            raise ValueError(f"expected {self.n_vertices} per-vertex values, got shape {arr.shape}")
        return arr


def dimer_system(
    vertices: Sequence[str],
    edges: Sequence[tuple[str, str]],
    weights: Sequence[Real] | None = None,
) -> TileSystem:
    """Dimer model: one tile per edge."""
    tiles = [Tile.from_vertices(e) for e in edges]
    return TileSystem(vertices, tiles, weights, edges=edges)


def build_incidence(system: TileSystem) -> np.ndarray:
    """Incidence matrix D with ``D[v, t] = t_v`` (rows vertices, columns tiles)."""
    return system.incidence


def _log_x(system: TileSystem, x) -> np.ndarray:
    x = system.vector(x) if isinstance(x, Mapping) else np.asarray(x, dtype=float)
    if x.shape != (system.n_vertices,):
        raise ValueError(f"expected {system.n_vertices} gauge values")
    if np.any(~np.isfinite(x)) or np.any(x <= 0):
        raise ValueError("gauge values must be positive and finite")
    return np.log(x)


def log_tiling_polynomial(system: TileSystem, X: np.ndarray) -> float:
    """log P(e^X), evaluated stably."""
    terms = system.log_monomial_offsets + system.incidence.T @ np.asarray(X, dtype=float)
    m = terms.max()
    return float(m + np.log(np.exp(terms - m).sum()))


def eval_tiling_polynomial(system: TileSystem, x) -> float:
    """P(x) = sum_t w_t prod_v x_v^{t_v} / t_v!.

    Raises
    ------
    OverflowError
        If P(x) is not representable as a finite float.
    """
    logp = log_tiling_polynomial(system, _log_x(system, x))
    if logp > 709.0:
        raise OverflowError(f"tiling polynomial overflows (log P = {logp:.6g})")
    return math.exp(logp)


def homogenize(system: TileSystem, dummy: str = DUMMY_VERTEX) -> TileSystem:
    """Pad every tile with copies of a dummy vertex so all tiles share one size.

    The dummy is appended last in the vertex order. A tile padded with m
    copies picks up the monomial factor x_0^m / m! through the usual t_v!
    normalisation. Uniform systems are returned unchanged.
    """
    if system.is_uniform:
        return system
    if dummy in system.index:
        raise ValueError(f"dummy vertex name {dummy!r} already in use")
    delta = max(t.size for t in system.tiles)
    tiles = []
    for t in system.tiles:
        m = delta - t.size
        counts = dict(t.items())
        if m:
            counts[dummy] = m
        tiles.append(Tile(counts))
    return TileSystem(system.vertices + (dummy,), tiles, system.weights, system.edges)


def apply_gauge(system: TileSystem, f) -> TileSystem:
    """Gauge transform: w'_t = w_t prod_v f(v)^{t_v}.

    ``f`` is a mapping vertex -> value or a sequence in vertex order. With
    int/Fraction entries and exact weights the result stays exact.
    """
    if isinstance(f, Mapping):
        fv = [f[v] for v in system.vertices]
    else:
        fv = list(f)
        if len(fv) != system.n_vertices:
            raise ValueError(f"expected {system.n_vertices} gauge values")
    for val in fv:
        if not (val > 0):
            raise ValueError("gauge transformation must be strictly positive")
    exact = all(isinstance(val, (int, Fraction)) for val in fv)
    new = []
    for t, w in zip(system.tiles, system.weights):
        if exact and isinstance(w, (int, Fraction)):
            acc = Fraction(w)
            for v, m in t.items():
                acc *= Fraction(fv[system.index[v]]) ** m
        else:
            acc = float(w)
            for v, m in t.items():
                acc *= float(fv[system.index[v]]) ** m
        new.append(acc)
    return system.with_weights(new)
