"""Tiling Laplacian, multiplicity response, tile covariances and Coulomb energy."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .gauge import GaugeSolution
from .homology import real_kernels
from .model import TileSystem

__all__ = [
    "TilingLaplacian",
    "CovarianceMatrix",
    "ColoringViolation",
    "tiling_laplacian",
    "multiplicity_response",
    "tile_covariance",
    "coulomb_energy",
    "coulomb_quadratic_form",
]

PINV_RTOL = 1e-10


class ColoringViolation(ValueError):
    """A density change has a component along ker D* (it breaks a coloring)."""

    def __init__(self, message, coloring=None, component=0.0):
        super().__init__(message)
        self.coloring = coloring
        self.component = component


@dataclass(frozen=True)
class TilingLaplacian:
    """Delta = D C D* for tile weights C, with its pseudo-inverse."""

    system: TileSystem = field(repr=False)
    weights: np.ndarray
    matrix: np.ndarray

    @cached_property
    def _eig(self):
        lam, V = np.linalg.eigh(self.matrix)
        keep = lam > PINV_RTOL * max(lam.max(initial=0.0), 0.0)
        return lam, V, keep

    @cached_property
    def pseudo_inverse(self) -> np.ndarray:
        lam, V, keep = self._eig
        Vk = V[:, keep]
        return (Vk / lam[keep]) @ Vk.T

    @property
    def rank(self) -> int:
        return int(self._eig[2].sum())

    @cached_property
    def kernel(self) -> np.ndarray:
        lam, V, keep = self._eig
        return V[:, ~keep]

    @cached_property
    def response_kernel(self) -> np.ndarray:
        """The tile-space operator D* Delta^+ D."""
        D = self.system.incidence.astype(float)
        return D.T @ self.pseudo_inverse @ D

    def projection(self) -> np.ndarray:
        """C D* Delta^+ D, idempotent with kernel ker D."""
        return self.weights[:, None] * self.response_kernel


def tiling_laplacian(system: TileSystem, weights=None) -> TilingLaplacian:
    """Assemble Delta_{u,v} = sum_t w_t t_u t_v.

    ``weights`` defaults to the system's own tile weights; pass a
    :class:`GaugeSolution` or an array of critical weights to use those.
    """
    if isinstance(weights, GaugeSolution):
        weights = weights.critical_weights
    w = system.weights_array() if weights is None else np.asarray(weights, dtype=float)
    if w.shape != (system.n_tiles,):
        raise ValueError("one weight per tile expected")
    D = system.incidence.astype(float)
    M = (D * w) @ D.T
    return TilingLaplacian(system, w, 0.5 * (M + M.T))


def multiplicity_response(L: TilingLaplacian, dalpha, *, rtol: float = 1e-8) -> np.ndarray:
    """Relative gauge change dx/x = Delta^+ dalpha.

    The answer is the representative orthogonal to ker D*. Raises
    :class:`ColoringViolation` when dalpha leaves Im(D) by more than
    ``rtol`` relative.
    """
    da = np.asarray(dalpha, dtype=float)
    scale = max(np.linalg.norm(da), 1e-300)
    if abs(da.sum()) > rtol * max(scale, 1.0):
        raise ColoringViolation(f"density change must sum to zero (sum = {da.sum():.3e})")
    _, cok, _ = real_kernels(L.system.incidence)
    if cok.shape[1]:
        comps = cok.T @ da
        k = int(np.argmax(np.abs(comps)))
        if abs(comps[k]) > rtol * scale:
            phi = cok[:, k]
            raise ColoringViolation(
                f"density change violates coloring {np.round(phi, 6).tolist()} (component {comps[k]:.3e})",
                phi,
                float(comps[k]),
            )
    return L.pseudo_inverse @ da


@dataclass(frozen=True)
class CovarianceMatrix:
    """Limiting covariance of tile counts, Cov = K diag(w)(I - C K)."""

    matrix: np.ndarray
    K: float

    @property
    def normalized(self) -> np.ndarray:
        return self.matrix / self.K


def tile_covariance(system: TileSystem, solution: GaugeSolution | np.ndarray, K: float) -> CovarianceMatrix:
    """Gaussian covariance of tile counts for K tiles at the critical gauge."""
    w = solution.critical_weights if isinstance(solution, GaugeSolution) else np.asarray(solution, dtype=float)
    L = tiling_laplacian(system, w)
    Kmat = L.response_kernel
    C = K * (np.diag(w) - w[:, None] * Kmat * w[None, :])
    return CovarianceMatrix(0.5 * (C + C.T), float(K))


def coulomb_quadratic_form(L: TilingLaplacian, v) -> float:
    v = np.asarray(v, dtype=float)
    return float(v @ L.pseudo_inverse @ v)


def coulomb_energy(L: TilingLaplacian, charges, *, multiplicity: float = 1.0, delta: int | None = None) -> float:
    """Second-order change of the growth rate for d-charges q.

    With dalpha = delta q / (n N) this returns -1/2 dalpha^T Delta^+ dalpha.
    The scaling assumes a vertex-transitive setting with N_v = N; use
    :func:`coulomb_quadratic_form` for the raw form on other graphs.
    """
    q = np.asarray(charges, dtype=float)
    if q.shape != (L.system.n_vertices,):
        raise ValueError("one charge per vertex expected")
    if abs(q.sum()) > 1e-12 * max(1.0, np.abs(q).sum()):
        raise ValueError(f"charges must sum to zero (sum = {q.sum():.3e})")
    delta = L.system.delta if delta is None else delta
    da = delta * q / (L.system.n_vertices * multiplicity)
    return -0.5 * coulomb_quadratic_form(L, da)
