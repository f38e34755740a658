"""Heterogeneous Cournot oligopoly maps under isoelastic demand with
quadratic costs, and local stability analysis of their equilibria."""

from ._accel import NUMBA_ENABLED, backend_name
from .dynamics import (
    InvalidState,
    Kind,
    Mechanism,
    ModelSpec,
    NoConvergence,
    Outcome,
    Trajectory,
    boundary_equilibria,
    build_model,
    equilibria,
    full_state,
    gb,
    gba,
    gbal,
    gbalr,
    interior_equilibrium,
    preset,
    rational_output,
    refine_fixed_point,
    simulate,
    step,
)
from .market import (
    DomainError,
    MarketParams,
    OutputVector,
    best_response,
    lma_response,
    marginal_profit,
    price,
    profit,
)
from .region import GridDef, RegionGrid, export_region, scan_plane, verify_tables
from .stability import (
    CharPoly,
    ConditionBlock,
    SchurCohnReport,
    cd_block,
    char_poly,
    corollary_conditions,
    jacobian_analytic,
    jacobian_fd,
    schur_cohn,
    stability_threshold,
    threshold_ordering,
)

__version__ = "0.1.0"
