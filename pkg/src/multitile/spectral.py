"""Translation-invariant tilings of the torus (Z/n)^d with singleton defects.

A prototile with characteristic Laurent polynomial p, translated over the
torus with weight w, plus singletons of weight w0 = eps * w. Characters of
the torus diagonalise the Laplacian, so normalised tile covariances are

    Cov(X_0, X_s) / (K w0) = n^-d  sum_{chi != 1}  chi^s / (eps + |p(chi)|^2).

As eps -> 0 the sum concentrates at the zeros of p on the unit torus; the
helpers here locate those zeros, classify them, and evaluate the resulting
Bessel-K / exponential asymptotics.
"""

from __future__ import annotations

import cmath
import itertools
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.fft

from .bessel import quadratic_form_bessel

__all__ = [
    "LaurentPolynomial",
    "SpectralModel",
    "TorusRoot",
    "TorusRootReport",
    "PoleError",
    "NonSimpleRootsError",
    "VarianceEstimate",
    "Heatmap",
    "symbol_eigenvalue",
    "covariance_dft",
    "covariance_grid",
    "find_torus_roots",
    "transversality_margin",
    "integer_relation",
    "asymptotic_covariance",
    "variance_log_estimate",
    "covariance_heatmap",
    "L_TRIOMINO",
    "KEY_POLYOMINO",
    "SQUARE_POLYOMINO",
    "PLUS_POLYOMINO",
    "PRODUCT_POLYOMINO",
    "WEIGHTED_TILE",
    "BARS3",
    "QUASIPERIODIC_1D",
]

TWO_PI = 2.0 * math.pi
ZERO_MODE_TOL = 1e-20  # |p(chi)|^2 / ||p||^2 below this counts as a lattice root
SIMPLE_MARGIN = 1e-6
RESIDUAL_TOL = 1e-8


class PoleError(ZeroDivisionError):
    """eps = 0 while p vanishes at a lattice character."""

    def __init__(self, characters):
        self.characters = [tuple(int(a) for a in c) for c in characters]
        super().__init__(
            f"p vanishes at lattice character(s) {self.characters[:4]} (index k for exp(2 pi i k / n)); "
            "pass eps > 0 or zero_modes='project'"
        )


class NonSimpleRootsError(ValueError):
    def __init__(self, report: "TorusRootReport"):
        self.report = report
        super().__init__(f"asymptotics need isolated simple torus roots; root finder says {report.verdict}")


# ---------------------------------------------------------------- polynomials


@dataclass(frozen=True)
class LaurentPolynomial:
    """Finite sum of c_e z^e over integer exponent vectors e (d = 1 or 2)."""

    terms: tuple[tuple[tuple[int, ...], float], ...]

    def __init__(self, terms: Mapping | Iterable[tuple]):
        items = terms.items() if isinstance(terms, Mapping) else terms
        acc: dict[tuple[int, ...], float] = {}
        for e, c in items:
            e = (int(e),) if isinstance(e, (int, np.integer)) else tuple(int(a) for a in e)
            acc[e] = acc.get(e, 0.0) + float(c)
        acc = {e: c for e, c in acc.items() if c != 0.0}
        if not acc:
            raise ValueError("Laurent polynomial is identically zero")
        dims = {len(e) for e in acc}
        if len(dims) != 1 or dims.pop() not in (1, 2):
            raise ValueError("exponents must all have length 1 or all length 2")
        object.__setattr__(self, "terms", tuple(sorted(acc.items())))

    @classmethod
    def from_cells(cls, cells: Iterable) -> "LaurentPolynomial":
        """Characteristic polynomial of a polyomino given by its cells."""
        return cls([(c, 1.0) for c in cells])

    @property
    def d(self) -> int:
        return len(self.terms[0][0])

    @property
    def exponents(self) -> np.ndarray:
        return np.array([e for e, _ in self.terms], dtype=np.int64)

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([c for _, c in self.terms])

    @property
    def norm(self) -> float:
        """Sum of absolute coefficients, an upper bound for |p| on the torus."""
        return float(np.abs(self.coefficients).sum())

    def __mul__(self, other: "LaurentPolynomial") -> "LaurentPolynomial":
        if other.d != self.d:
            raise ValueError("dimension mismatch")
        out: dict[tuple[int, ...], float] = {}
        for e1, c1 in self.terms:
            for e2, c2 in other.terms:
                e = tuple(a + b for a, b in zip(e1, e2))
                out[e] = out.get(e, 0.0) + c1 * c2
        return LaurentPolynomial(out)

    def _monomials(self, z: Sequence) -> list[np.ndarray]:
        z = [np.asarray(a, dtype=complex) for a in z]
        if len(z) != self.d:
            raise ValueError(f"expected {self.d} coordinates")
        return [c * math.prod((zk**ek for zk, ek in zip(z, e)), start=1.0) for e, c in self.terms]

    def __call__(self, *z):
        return sum(self._monomials(z))

    def log_derivative(self, k: int, *z):
        """z_k dp/dz_k, i.e. -i times the derivative along the k-th angle."""
        return sum(m * e[k] for m, (e, _) in zip(self._monomials(z), self.terms))

    def gradient(self, *z) -> tuple:
        return tuple(self.log_derivative(k, *z) for k in range(self.d))

    def at_angles(self, angles) -> complex:
        return complex(self(*(cmath.exp(1j * a) for a in np.atleast_1d(angles))))

    def on_grid(self, n: int) -> np.ndarray:
        """Values at all characters exp(2 pi i k / n), k in (Z/n)^d, as an n^d array."""
        out = np.zeros((n,) * self.d, dtype=complex)
        ks = np.arange(n)
        for e, c in self.terms:
            factors = [np.exp(2j * np.pi * ((ek * ks) % n) / n) for ek in e]
            out += c * (factors[0] if self.d == 1 else np.multiply.outer(factors[0], factors[1]))
        return out

    def coefficients_in(self, k: int, z_other: complex) -> np.ndarray:
        """Coefficients (highest degree first) of p as a polynomial in z_k.

        The other coordinate is fixed at ``z_other``; exponents are shifted
        so the lowest power of z_k is zero.
        """
        e = self.exponents
        lo, hi = e[:, k].min(), e[:, k].max()
        out = np.zeros(hi - lo + 1, dtype=complex)
        other = 1 - k if self.d == 2 else None
        for (ex, c) in self.terms:
            val = c * (z_other ** ex[other] if other is not None else 1.0)
            out[hi - ex[k]] += val
        return out

    def describe(self) -> str:
        parts = []
        for e, c in self.terms:
            parts.append(f"{c:g}*" + "*".join(f"{v}^{a}" for v, a in zip("zu", e)))
        return " + ".join(parts)


BARS3 = LaurentPolynomial.from_cells([0, 1, 2])
QUASIPERIODIC_1D = LaurentPolynomial({-1: 2.0, 0: 1.0, 1: 2.0})
L_TRIOMINO = LaurentPolynomial.from_cells([(0, 0), (1, 0), (0, 1)])
KEY_POLYOMINO = LaurentPolynomial.from_cells([(i, 0) for i in range(7)] + [(0, 1), (1, 1), (4, 1), (6, 1)])
SQUARE_POLYOMINO = LaurentPolynomial.from_cells([(0, 0), (1, 0), (0, 1), (1, 1)])
PLUS_POLYOMINO = LaurentPolynomial.from_cells([(0, 0), (1, 0), (-1, 0), (0, 1), (0, -1)])
PRODUCT_POLYOMINO = LaurentPolynomial.from_cells([(0, 0), (1, 0), (3, 0)]) * LaurentPolynomial.from_cells(
    [(0, 0), (0, 1), (0, 3)]
)
WEIGHTED_TILE = LaurentPolynomial({(0, 0): 2.0, (1, 0): 3.0, (0, 1): 4.0})


# ---------------------------------------------------------------- model


@dataclass(frozen=True)
class SpectralModel:
    """Prototiles (p_i, w_i) translated over (Z/n)^d, singletons of weight w0."""

    n: int
    prototiles: tuple[tuple[LaurentPolynomial, float], ...]
    w0: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "prototiles", tuple((p, float(w)) for p, w in self.prototiles))
        if self.n < 1:
            raise ValueError("torus side must be positive")
        if not self.prototiles:
            raise ValueError("at least one prototile is required")
        if len({p.d for p, _ in self.prototiles}) != 1:
            raise ValueError("prototiles must share a dimension")
        if any(w <= 0 for _, w in self.prototiles):
            raise ValueError("prototile weights must be positive")
        if self.w0 < 0:
            raise ValueError("singleton weight must be nonnegative")

    @classmethod
    def single(cls, p: LaurentPolynomial, n: int, eps: float, w: float = 1.0) -> "SpectralModel":
        return cls(n, ((p, w),), eps * w)

    @property
    def d(self) -> int:
        return self.prototiles[0][0].d

    @property
    def polynomial(self) -> LaurentPolynomial:
        if len(self.prototiles) != 1:
            raise ValueError("this operation needs a single prototile")
        return self.prototiles[0][0]

    @property
    def eps(self) -> float:
        self.polynomial  # noqa: B018 - enforce the single-prototile case
        return self.w0 / self.prototiles[0][1]

    @cached_property
    def _symbol_grid(self) -> np.ndarray:
        """|p(chi)|^2 on all characters."""
        return np.abs(self.polynomial.on_grid(self.n)) ** 2


def symbol_eigenvalue(model: SpectralModel, z) -> float:
    """lambda_z = w0 + sum_i w_i p_i(z) p_i(1/z) at a point of the unit torus."""
    z = tuple(np.atleast_1d(np.asarray(z, dtype=complex)))
    if len(z) != model.d:
        raise ValueError(f"expected a point of the {model.d}-torus")
    if any(abs(abs(a) - 1.0) > 1e-12 for a in z):
        raise ValueError("point must lie on the unit torus")
    zinv = tuple(1.0 / a for a in z)
    lam = model.w0 + sum(w * complex(p(*z) * p(*zinv)).real for p, w in model.prototiles)
    return float(lam)


# ---------------------------------------------------------------- DFT covariance


def _zero_characters(model: SpectralModel) -> np.ndarray:
    p2 = model._symbol_grid
    mask = p2 <= ZERO_MODE_TOL * model.polynomial.norm ** 2
    mask.flat[0] = False
    return mask


def _spectral_weights(model: SpectralModel, zero_modes: str) -> tuple[np.ndarray, str]:
    """Per-character weights G with Cov = ifft(G), and the normalisation used."""
    if zero_modes not in ("error", "project"):
        raise ValueError("zero_modes must be 'error' or 'project'")
    eps = model.eps
    p2 = model._symbol_grid
    zeros = _zero_characters(model)
    if eps > 0:
        G = 1.0 / (eps + p2)
        G.flat[0] = 0.0
        return G, "K*w0"
    if zero_modes == "project":
        # crystal limit Cov/(K w) = lim eps Cov/(K w0); zero without lattice roots
        return zeros.astype(float), "K*w"
    if zeros.any():
        raise PoleError(np.argwhere(zeros))
    with np.errstate(divide="ignore"):
        G = 1.0 / p2
    G.flat[0] = 0.0
    return G, "K*w0"


def covariance_grid(model: SpectralModel, *, zero_modes: str = "error", workers: int | None = None) -> np.ndarray:
    """Normalised covariances for every offset s in (Z/n)^d, by inverse FFT.

    Entry [s] is Cov(X_0, X_s)/(K w0). With eps = 0, ``zero_modes='project'``
    returns the crystal limit Cov/(K w) instead: n^-d times the sum of chi^s
    over the lattice roots of p, which vanishes when there are none.
    """
    G, _ = _spectral_weights(model, zero_modes)
    C = scipy.fft.ifftn(G, workers=workers)
    scale = max(float(np.abs(C).max()), 1e-300)
    if float(np.abs(C.imag).max()) > 1e-9 * scale:
        raise ArithmeticError("covariance has a non-negligible imaginary part; p is not real")
    return C.real


def _as_offsets(model: SpectralModel, s) -> tuple[np.ndarray, bool]:
    arr = np.asarray(s, dtype=np.int64)
    if model.d == 1:
        return arr.reshape(-1, 1), arr.ndim == 0
    if arr.ndim == 1:
        if arr.shape != (2,):
            raise ValueError("a 2d offset is a pair (s, t)")
        return arr.reshape(1, 2), True
    return arr.reshape(-1, 2), False


def covariance_dft(model: SpectralModel, s, *, zero_modes: str = "error"):
    """Cov(X_0, X_s)/(K w0) by direct compensated summation over characters.

    ``s`` is an int (d = 1), a pair (d = 2), or an array of such offsets.
    Returns a float for a single offset, else an array.
    """
    G, _ = _spectral_weights(model, zero_modes)
    offs, single = _as_offsets(model, s)
    n = model.n
    k = np.indices(G.shape).reshape(model.d, -1).T
    g = G.reshape(-1)
    nz = g != 0.0
    k, g = k[nz], g[nz]
    out = np.empty(len(offs))
    for i, off in enumerate(offs):
        phase = TWO_PI * ((k @ off) % n) / n
        re = math.fsum(g * np.cos(phase)) / n**model.d
        im = math.fsum(g * np.sin(phase)) / n**model.d
        if abs(im) > 1e-9 * max(abs(re), 1e-300) and abs(im) > 1e-12:
            raise ArithmeticError(f"imaginary part {im:.3e} at offset {tuple(off)}")
        out[i] = re
    return float(out[0]) if single else out


# ---------------------------------------------------------------- torus roots


@dataclass(frozen=True)
class TorusRoot:
    angles: tuple[float, ...]
    kind: str  # "SIMPLE" | "NON_TRANSVERSAL"
    margin: float
    residual: float
    gradient: tuple[complex, ...]

    @property
    def point(self) -> tuple[complex, ...]:
        return tuple(cmath.exp(1j * a) for a in self.angles)


@dataclass(frozen=True)
class TorusRootReport:
    """Zeros of p on the unit torus.

    ``verdict`` is NO_ROOTS, POINTS, CURVE or UNRESOLVED. ``curves`` holds
    sampled angle pairs of one-dimensional zero families; singular points
    found on them are listed in ``roots`` as NON_TRANSVERSAL.
    """

    polynomial: LaurentPolynomial
    verdict: str
    roots: tuple[TorusRoot, ...] = ()
    curves: tuple[np.ndarray, ...] = field(default=(), repr=False)
    unresolved: tuple[tuple[float, ...], ...] = ()

    @property
    def all_simple(self) -> bool:
        return self.verdict == "POINTS" and all(r.kind == "SIMPLE" for r in self.roots)

    def summary(self) -> str:
        lines = [f"verdict: {self.verdict}"]
        for r in self.roots:
            ang = ", ".join(f"{a / math.pi:.6f}pi" for a in r.angles)
            lines.append(f"  root ({ang})  {r.kind}  margin={r.margin:.3g}  |p|={r.residual:.2e}")
        for c in self.curves:
            lines.append(f"  curve with {len(c)} samples")
        for u in self.unresolved:
            lines.append(f"  unresolved near {tuple(round(a, 6) for a in u)}")
        return "\n".join(lines)


def transversality_margin(A: complex, B: complex) -> float:
    """|sin| of the angle between A = z p_z and B = u p_u; 0 when either vanishes.

    Positive exactly when A/B is not real, which is the transversality
    condition for the zero set of p to meet the torus in isolated points.
    """
    na, nb = abs(A), abs(B)
    if na == 0.0 or nb == 0.0:
        return 0.0
    return abs((A * B.conjugate()).imag) / (na * nb)


def _wrap(a: float) -> float:
    return a % TWO_PI


def _angdist(a, b) -> float:
    d = (np.asarray(a) - np.asarray(b) + math.pi) % TWO_PI - math.pi
    return float(np.max(np.abs(d)))


def _make_root(p: LaurentPolynomial, angles: Sequence[float]) -> TorusRoot:
    z = [cmath.exp(1j * a) for a in angles]
    grad = tuple(complex(g) for g in p.gradient(*z))
    res = abs(complex(p(*z)))
    if p.d == 1:
        margin = abs(grad[0]) / p.norm
    else:
        margin = transversality_margin(*grad)
    kind = "SIMPLE" if margin > SIMPLE_MARGIN else "NON_TRANSVERSAL"
    return TorusRoot(tuple(_wrap(a) for a in angles), kind, float(margin), float(res), grad)


def _roots_1d(p: LaurentPolynomial, tol: float) -> TorusRootReport:
    coeffs = p.coefficients_in(0, 1.0)
    raw = np.roots(coeffs) if len(coeffs) > 1 else np.array([])
    found: list[TorusRoot] = []
    for r in raw:
        if abs(abs(r) - 1.0) > tol:
            continue
        th = float(np.angle(r))
        for _ in range(30):
            z = cmath.exp(1j * th)
            dp = complex(p.log_derivative(0, z))
            if abs(dp) < 1e-14 * p.norm:
                break
            step = (complex(p(z)) / (1j * dp)).real
            th -= step
            if abs(step) < 1e-15:
                break
        root = _make_root(p, [th])
        if root.residual > max(RESIDUAL_TOL, 1e3 * tol) * p.norm:
            continue
        if any(_angdist(root.angles, q.angles) < 1e-6 for q in found):
            continue
        found.append(root)
    found.sort(key=lambda r: r.angles)
    return TorusRootReport(p, "POINTS" if found else "NO_ROOTS", tuple(found))


def _sweep(p: LaurentPolynomial, axis: int, samples: int):
    """Solve p = 0 in the other coordinate along a grid of the ``axis`` circle.

    Returns hits (grid index, angle on axis, angle of root, ||root| - 1|) and
    the grid indices whose fibre polynomial vanishes identically.
    """
    other = 1 - axis
    hits, degenerate = [], []
    scale = p.norm
    for j in range(samples):
        th = TWO_PI * j / samples
        coeffs = p.coefficients_in(other, cmath.exp(1j * th))
        small = np.abs(coeffs) <= 1e-13 * scale
        if small.all():
            degenerate.append(j)
            continue
        first = int(np.argmax(~small))
        coeffs = coeffs[first:]
        if len(coeffs) < 2:
            continue
        for u in np.roots(coeffs):
            if u == 0:
                continue
            dist = abs(abs(u) - 1.0)
            if dist < 0.05:
                hits.append((j, th, float(np.angle(u)), dist))
    return hits, degenerate


def _runs(indices: Iterable[int], samples: int) -> list[list[int]]:
    """Maximal runs of consecutive grid indices (cyclically)."""
    idx = sorted(set(indices))
    if not idx:
        return []
    runs = [[idx[0]]]
    for a in idx[1:]:
        if a == runs[-1][-1] + 1:
            runs[-1].append(a)
        else:
            runs.append([a])
    if len(runs) > 1 and runs[0][0] == 0 and runs[-1][-1] == samples - 1:
        runs[0] = runs.pop() + runs[0]
    return runs


def _newton_2d(p: LaurentPolynomial, angles, iters: int = 60):
    th = np.array(angles, dtype=float)
    for _ in range(iters):
        z = [cmath.exp(1j * a) for a in th]
        val = complex(p(*z))
        A, B = (complex(g) for g in p.gradient(*z))
        J = np.array([[(1j * A).real, (1j * B).real], [(1j * A).imag, (1j * B).imag]])
        F = np.array([val.real, val.imag])
        step = np.linalg.lstsq(J, -F, rcond=1e-12)[0]
        th = th + step
        if np.abs(step).max() < 1e-15:
            break
    return th, abs(complex(p(*(cmath.exp(1j * a) for a in th))))


def _singular_refine(p: LaurentPolynomial, angles, iters: int = 60):
    """Gauss-Newton on (p, z p_z, u p_u) = 0 in the two angles."""
    th = np.array(angles, dtype=float)

    def resid(t):
        z = [cmath.exp(1j * a) for a in t]
        vals = [complex(p(*z)), *(complex(g) for g in p.gradient(*z))]
        return np.array([f(v) for v in vals for f in (lambda x: x.real, lambda x: x.imag)])

    h = 1e-7
    for _ in range(iters):
        r = resid(th)
        J = np.column_stack([(resid(th + h * e) - resid(th - h * e)) / (2 * h) for e in np.eye(2)])
        step = np.linalg.lstsq(J, -r, rcond=1e-10)[0]
        th = th + step
        if np.abs(step).max() < 1e-14:
            break
    return th, float(np.linalg.norm(resid(th)))


def _cluster(points: list[tuple[int, float, float, float]], samples: int) -> list[list[tuple]]:
    """Union points adjacent in the sweep grid with nearby root angles."""
    parent = list(range(len(points)))

    def find(a):
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    by_j: dict[int, list[int]] = {}
    for i, (j, *_rest) in enumerate(points):
        by_j.setdefault(j, []).append(i)
    for i, (j, _, ph, _) in enumerate(points):
        for jj in (j, (j + 1) % samples):
            for k in by_j.get(jj, ()):
                if k != i and _angdist(ph, points[k][2]) < 0.2:
                    parent[find(i)] = find(k)
    groups: dict[int, list] = {}
    for i in range(len(points)):
        groups.setdefault(find(i), []).append(points[i])
    return list(groups.values())


def _roots_2d(p: LaurentPolynomial, tol: float, samples: int) -> TorusRootReport:
    curve_tol = 1e-9
    curves: list[np.ndarray] = []
    candidates: list[tuple[float, float, float]] = []
    for axis in (0, 1):
        hits, degenerate = _sweep(p, axis, samples)

        def oriented(th, ph):
            return (th, ph) if axis == 0 else (ph, th)

        exact = [h for h in hits if h[3] <= curve_tol]
        on_curve = set()
        for run in _runs([h[0] for h in exact], samples):
            if len(run) >= 3:
                rs = set(run)
                pts = [oriented(h[1], h[2]) for h in exact if h[0] in rs]
                curves.append(np.array(pts))
                on_curve |= rs
        for run in _runs(degenerate, samples):
            # the whole circle over these grid angles is a zero set
            phis = np.linspace(0, TWO_PI, 256, endpoint=False)
            for j in run:
                th = TWO_PI * j / samples
                curves.append(np.array([oriented(th, ph) for ph in phis]))
        rest = [h for h in hits if h[0] not in on_curve]
        for group in _cluster(rest, samples):
            j, th, ph, dist = min(group, key=lambda h: h[3])
            candidates.append((*oriented(th, ph), dist))

    curve_pts = np.vstack(curves) if curves else np.zeros((0, 2))

    def near_curve(ang, radius=0.1):
        if not len(curve_pts):
            return False
        d = (curve_pts - np.asarray(ang) + math.pi) % TWO_PI - math.pi
        return bool((np.abs(d).max(axis=1) < radius).any())

    roots: list[TorusRoot] = []
    unresolved: list[tuple[float, float]] = []

    def add(root: TorusRoot):
        if not any(_angdist(root.angles, q.angles) < 1e-6 for q in roots):
            roots.append(root)

    for th, ph, dist in candidates:
        if near_curve((th, ph)):
            continue
        ang, res = _newton_2d(p, (th, ph))
        if res <= RESIDUAL_TOL * p.norm:
            add(_make_root(p, ang))
        elif dist < 1e-6:
            unresolved.append((th, ph))

    # singular points on zero curves: where the gradient vanishes as well
    for c in curves:
        g = np.array([sum(abs(complex(x)) for x in p.gradient(*(cmath.exp(1j * a) for a in pt))) for pt in c])
        g /= p.norm
        for i in range(len(c)):
            if g[i] < 0.05 and g[i] <= g[i - 1] and g[i] <= g[(i + 1) % len(c)]:
                ang, res = _singular_refine(p, c[i])
                if res <= RESIDUAL_TOL * p.norm:
                    add(_make_root(p, ang))

    roots.sort(key=lambda r: r.angles)
    if unresolved:
        verdict = "UNRESOLVED"
    elif curves:
        verdict = "CURVE"
    elif roots:
        verdict = "POINTS"
    else:
        verdict = "NO_ROOTS"
    return TorusRootReport(p, verdict, tuple(roots), tuple(curves), tuple(unresolved))


def find_torus_roots(p: LaurentPolynomial, tol: float = 1e-6, *, samples: int = 4096) -> TorusRootReport:
    """Locate and classify the zeros of p on the unit torus.

    d = 1 uses companion-matrix roots. d = 2 sweeps each coordinate circle
    on ``samples`` grid points, solves for the other coordinate, clusters
    near-unimodular solutions and polishes them by Newton's method.
    """
    if p.d == 1:
        return _roots_1d(p, tol)
    if samples < 4096:
        raise ValueError("use at least 4096 sweep samples")
    return _roots_2d(p, tol, samples)


def integer_relation(angles: Sequence[float], max_coeff: int = 50, margin: float = 1e-6):
    """Smallest nonzero integer vector m, |m_i| <= max_coeff, with m . angles in 2 pi Z.

    Returns None when no such relation exists, i.e. the angles look
    independent of pi at this resolution.
    """
    angles = np.asarray(angles, dtype=float) / TWO_PI
    best = None
    rng = range(-max_coeff, max_coeff + 1)
    for m in itertools.product(rng, repeat=len(angles)):
        if not any(m):
            continue
        x = float(np.dot(m, angles))
        if abs(x - round(x)) <= margin:
            size = max(abs(a) for a in m)
            if best is None or size < max(abs(a) for a in best):
                best = m
    return best


# ---------------------------------------------------------------- asymptotics


def _simple_roots(p: LaurentPolynomial, report: TorusRootReport | None) -> TorusRootReport:
    report = report if report is not None else find_torus_roots(p)
    if not report.all_simple:
        raise NonSimpleRootsError(report)
    return report


def asymptotic_covariance(p: LaurentPolynomial, eps: float, s, *, report: TorusRootReport | None = None) -> float:
    """Small-eps approximation of Cov(X_0, X_s)/(K w0) on the infinite lattice.

    Each simple root contributes its character times the Green's function
    of the quadratic form |z p_z x + u p_u y|^2 (d = 2), or
    exp(-|s| sqrt(eps/A)) / (2 sqrt(eps A)) with A = |z p'(z)|^2 (d = 1).
    """
    if eps <= 0:
        raise ValueError("eps must be positive")
    report = _simple_roots(p, report)
    if p.d == 1:
        s = int(np.asarray(s).reshape(-1)[0])
        total = 0.0
        for r in report.roots:
            A = abs(r.gradient[0]) ** 2
            total += math.cos(s * r.angles[0]) * math.exp(-abs(s) * math.sqrt(eps / A)) / (2 * math.sqrt(eps * A))
        return total
    s, t = (int(a) for a in s)
    if s == 0 and t == 0:
        raise ValueError("the 2d asymptotic form needs a nonzero offset")
    total = 0.0
    for r in report.roots:
        A, B = r.gradient
        a, b, c = abs(A) ** 2, 2 * (A * B.conjugate()).real, abs(B) ** 2
        total += math.cos(s * r.angles[0] + t * r.angles[1]) * quadratic_form_bessel(a, b, c, eps, s, t) / TWO_PI
    return total


@dataclass(frozen=True)
class VarianceEstimate:
    """Variance/(K w0) ~ coefficient * (log(1/eps) + constant)."""

    coefficient: float
    constant: float | None
    eps: float

    @property
    def value(self) -> float:
        return self.coefficient * (math.log(1.0 / self.eps) + (self.constant or 0.0))


def _is_l_triomino(p: LaurentPolynomial) -> bool:
    e = p.exponents - p.exponents.min(axis=0)
    shape = sorted(map(tuple, e))
    coeffs = set(p.coefficients)
    if len(coeffs) != 1:
        return False
    return shape in ([(0, 0), (0, 1), (1, 0)], [(0, 1), (1, 0), (1, 1)])


def variance_log_estimate(p: LaurentPolynomial, eps: float, *, report: TorusRootReport | None = None) -> VarianceEstimate:
    """Leading log(1/eps) growth of the tile-count variance (d = 2).

    Each simple root adds 1/(2 pi sqrt(4ac - b^2)). The additive constant is
    only known for the L-triomino (log 9); elsewhere it is left as None.
    """
    if not 0 < eps < 0.1:
        raise ValueError("the log estimate is meant for 0 < eps < 0.1")
    if p.d != 2:
        raise ValueError("variance_log_estimate is two-dimensional")
    report = _simple_roots(p, report)
    coef = 0.0
    for r in report.roots:
        A, B = r.gradient
        a, b, c = abs(A) ** 2, 2 * (A * B.conjugate()).real, abs(B) ** 2
        coef += 1.0 / (TWO_PI * math.sqrt(4 * a * c - b * b))
    constant = math.log(9.0) if _is_l_triomino(p) else None
    return VarianceEstimate(coef, constant, eps)


# ---------------------------------------------------------------- heatmaps


@dataclass(frozen=True)
class Heatmap:
    """Covariances on a centred square window; ``values[i, j]`` is offset (j - h, i - h)."""

    values: np.ndarray
    half: int
    normalisation: str


def covariance_heatmap(model: SpectralModel, window: int = 61, *, zero_modes: str = "error", workers=None) -> Heatmap:
    if window < 1 or window > 101:
        raise ValueError("window must be between 1 and 101")
    if window > model.n:
        raise ValueError("window is wider than the torus")
    _, norm = _spectral_weights(model, zero_modes)
    grid = covariance_grid(model, zero_modes=zero_modes, workers=workers)
    h = window // 2
    offs = np.arange(-h, window - h) % model.n
    if model.d == 1:
        values = grid[offs][None, :]
    else:
        values = grid[np.ix_(offs, offs)].T  # rows indexed by t, columns by s
    return Heatmap(np.ascontiguousarray(values), h, norm)
