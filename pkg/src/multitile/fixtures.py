"""Constructors for the standard small tiling systems used in tests and demos."""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .model import Tile, TileSystem, dimer_system, homogenize

__all__ = [
    "cycle_dimers",
    "cyclic_bars",
    "path_with_singletons",
    "grid_bars",
    "aztec_diamond",
    "aztec_caption_weights",
    "honeycomb",
    "slab_torus",
    "torus_dimers",
    "torus_polyomino",
]


def cycle_dimers(n: int = 4) -> TileSystem:
    """Dimers on the n-cycle with vertices ``1..n``; tiles 12, 23, ..., n1."""
    vs = [str(i) for i in range(1, n + 1)]
    return dimer_system(vs, [(vs[i], vs[(i + 1) % n]) for i in range(n)])


def cyclic_bars(n: int, length: int = 3) -> TileSystem:
    """Translates {i, ..., i+length-1} on Z/n (identical multisets kept once)."""
    vs = [str(i) for i in range(n)]
    tiles, seen = [], set()
    for i in range(n):
        t = Tile.from_vertices(vs[(i + k) % n] for k in range(length))
        if t not in seen:
            seen.add(t)
            tiles.append(t)
    return TileSystem(vs, tiles)


def path_with_singletons(n: int = 5, *, homogenized: bool = True) -> TileSystem:
    """Path 1..n tiled by singletons and adjacent pairs.

    Tiles are ordered singletons 1..n, then dominoes 12, 23, ... With
    ``homogenized`` the dummy vertex ``v0`` is appended and each singleton
    becomes {v0, i}.
    """
    vs = [str(i) for i in range(1, n + 1)]
    tiles = [Tile({v: 1}) for v in vs] + [Tile.from_vertices((vs[i], vs[i + 1])) for i in range(n - 1)]
    sys = TileSystem(vs, tiles)
    return homogenize(sys) if homogenized else sys


def grid_bars(n: int, length: int = 3) -> TileSystem:
    """Horizontal and vertical bars of ``length`` in an n x n grid; vertices ``x,y``."""
    vs = [f"{x},{y}" for y in range(n) for x in range(n)]
    tiles = []
    for y in range(n):
        for x in range(n - length + 1):
            tiles.append(Tile.from_vertices(f"{x + k},{y}" for k in range(length)))
    for x in range(n):
        for y in range(n - length + 1):
            tiles.append(Tile.from_vertices(f"{x},{y + k}" for k in range(length)))
    return TileSystem(vs, tiles)


def aztec_diamond(k: int) -> TileSystem:
    """Dimers on the Aztec diamond of order k.

    Squares are indexed by rotated coordinates (u, v) = (x + y, x - y) of
    their centres, |u|, |v| <= k with u, v of opposite parity. White squares
    have u = k (mod 2). Vertex names are ``"u,v"``; edges are listed white
    first.
    """
    squares = [(u, v) for u in range(-k, k + 1) for v in range(-k, k + 1) if (u - v) % 2]
    names = [f"{u},{v}" for u, v in squares]
    edges = []
    for u, v in squares:
        if (u - k) % 2:
            continue
        for du, dv in ((1, 1), (1, -1), (-1, -1), (-1, 1)):
            a, b = u + du, v + dv
            if abs(a) <= k and abs(b) <= k:
                edges.append((f"{u},{v}", f"{a},{b}"))
    return dimer_system(names, edges)


def aztec_is_white(name: str, k: int) -> bool:
    u, _ = map(int, name.split(","))
    return (u - k) % 2 == 0


def aztec_caption_weights(k: int) -> np.ndarray:
    """Closed-form critical edge weights of the order-k Aztec diamond.

    Weights are normalised to sum to 1 at every square, in the edge order
    of :func:`aztec_diamond`. A white square (u, v) has x + y = (k - u)/2 and
    x - y = (v + k + 1)/2; its E, N, W, S edges go to the offsets (1, 1),
    (1, -1), (-1, -1), (-1, 1) and carry (x+y)(x-y), (x+y)(k+1-x+y),
    (k-x-y)(k+1-x+y), (k-x-y)(x-y), all divided by k(k+1).
    """
    system = aztec_diamond(k)
    out = np.empty(system.n_tiles)
    for i, (a, b) in enumerate(system.edges):
        u, v = map(int, a.split(","))
        u2, v2 = map(int, b.split(","))
        s, d = (k - u) // 2, (v + k + 1) // 2
        q = {
            (1, 1): s * d,
            (1, -1): s * (k + 1 - d),
            (-1, -1): (k - s) * (k + 1 - d),
            (-1, 1): (k - s) * d,
        }[(u2 - u, v2 - v)]
        out[i] = q / (k * (k + 1))
    return out


def honeycomb(n: int) -> TileSystem:
    """The n x n honeycomb whose dimer covers biject with monotone paths.

    White W(i,j) and black B(i,j) for 0 <= i, j <= n, minus W(n,n) and
    B(0,0). W(i,j) is adjacent to B(i,j), B(i+1,j) and B(i,j+1) when those
    exist. Names are ``"w:i,j"`` / ``"b:i,j"``.
    """
    whites = [(i, j) for i in range(n + 1) for j in range(n + 1) if (i, j) != (n, n)]
    blacks = [(i, j) for i in range(n + 1) for j in range(n + 1) if (i, j) != (0, 0)]
    bset = set(blacks)
    names = [f"w:{i},{j}" for i, j in whites] + [f"b:{i},{j}" for i, j in blacks]
    edges = []
    for i, j in whites:
        for b in ((i, j), (i + 1, j), (i, j + 1)):
            if b in bset:
                edges.append((f"w:{i},{j}", f"b:{b[0]},{b[1]}"))
    return dimer_system(names, edges)


def slab_torus(n: int, m: int = 4) -> TileSystem:
    """Dimers on the slab 0 <= x+y+z <= n of Z^3 modulo m*(1,-1,0), m*(0,1,-1).

    Level-L vertices (i, j) mod m stand for (L,0,0) + i(1,-1,0) + j(0,1,-1);
    the up-neighbours of (L,i,j) are (L+1,i,j), (L+1,i-1,j), (L+1,i-1,j-1).
    Names are ``"L:i,j"``; even levels are white.
    """
    names = [f"{L}:{i},{j}" for L in range(n + 1) for i in range(m) for j in range(m)]
    edges = []
    for L in range(n + 1):
        for i in range(m):
            for j in range(m):
                if L == n:
                    continue
                a = f"{L}:{i},{j}"
                for ii, jj in ((i, j), (i - 1, j), (i - 1, j - 1)):
                    b = f"{L + 1}:{ii % m},{jj % m}"
                    edges.append((a, b) if L % 2 == 0 else (b, a))
    return dimer_system(names, edges)


def slab_level(name: str) -> int:
    return int(name.split(":")[0])


def torus_dimers(m: int) -> TileSystem:
    """Dimers on the square-lattice torus Z^2 / mZ^2; vertices ``"x,y"``."""
    if m < 3:
        raise ValueError("torus side must be at least 3 to avoid multi-edges")
    names = [f"{x},{y}" for y in range(m) for x in range(m)]
    edges = []
    for y in range(m):
        for x in range(m):
            edges.append((f"{x},{y}", f"{(x + 1) % m},{y}"))
            edges.append((f"{x},{y}", f"{x},{(y + 1) % m}"))
    return dimer_system(names, edges)


def torus_polyomino(cells, n: int, *, singletons: bool = True, singleton_weight=Fraction(1)) -> TileSystem:
    """Translates of a prototile on (Z/n)^d, optionally with singleton tiles.

    ``cells`` lists integer offsets (tuples, or ints for d = 1). Tiles are
    ordered by translation vector in row-major order; singletons follow and
    the system is homogenised with the dummy ``v0``.
    """
    cells = [(c,) if isinstance(c, int) else tuple(c) for c in cells]
    d = len(cells[0])
    import itertools

    sites = list(itertools.product(range(n), repeat=d))
    name = lambda s: ",".join(str(a % n) for a in s)  # noqa: E731
    vs = [name(s) for s in sites]
    tiles = [Tile.from_vertices(name(tuple(a + c for a, c in zip(s, cell))) for cell in cells) for s in sites]
    weights = [1] * len(tiles)
    if singletons:
        tiles += [Tile({v: 1}) for v in vs]
        weights += [singleton_weight] * len(vs)
    sys = TileSystem(vs, tiles, weights)
    return homogenize(sys) if singletons else sys
