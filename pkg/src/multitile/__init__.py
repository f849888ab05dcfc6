"""Multinomial tilings of finite graphs and torus lattices.

Exact counts and brute-force oracles, critical gauges and growth rates,
Gaussian tile-count covariances, Coulomb energies, and spectral
covariance asymptotics for translation-invariant tilings of tori.
"""

__version__ = "0.1.0"

from .bessel import bessel_k0, k0, quadratic_form_bessel
from .gauge import (
    BoundaryDensityError,
    ConvergenceError,
    GaugeSolution,
    InfeasibleDensityError,
    SolverOptions,
    free_energy,
    growth_rate,
    solve_bipartite_dimer_gauge,
    solve_critical_gauge,
    tile_probabilities,
)
from .homology import (
    check_integer_feasibility_small,
    check_real_feasibility,
    homology_report,
    interior_margin,
    is_coloring,
    smith_normal_form,
)
from .io import ModelError, emit_model, load_model_file, parse_model, parse_model_text
from .model import DUMMY_VERTEX, Tile, TileSystem, apply_gauge, dimer_system, eval_tiling_polynomial, homogenize
from .oracle import (
    BudgetExceeded,
    brute_force_blowup_tilings,
    count_labelled_tilings,
    enumerate_tile_count_vectors,
    exact_distribution,
    partition_function,
)
from .response import coulomb_energy, multiplicity_response, tile_covariance, tiling_laplacian
from .spectral import (
    LaurentPolynomial,
    NonSimpleRootsError,
    PoleError,
    SpectralModel,
    asymptotic_covariance,
    covariance_dft,
    covariance_grid,
    covariance_heatmap,
    find_torus_roots,
    integer_relation,
    symbol_eigenvalue,
    transversality_margin,
    variance_log_estimate,
)
