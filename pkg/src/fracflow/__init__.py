"""fracflow: pseudo-spectral simulation and verification toolkit for nonlocal
dissipative interface dynamics on the 1D torus."""

from .spectral import (
    GridSpec,
    NormReport,
    SpectralField,
    calderon_power,
    derivative,
    embed,
    extrema,
    field_from_coeffs,
    from_physical,
    harmonic_field,
    hilbert,
    l2_inner,
    l2_norm,
    load_snapshot,
    norms,
    phys_grid,
    pointwise_product,
    project_mean_zero,
    random_field,
    restrict_band,
    save_snapshot,
    scale_symbol_check,
    sobolev_norm,
    to_physical,
    wiener_distance,
    wiener_norm,
    zero_field,
)
from .nonlinear import (
    BoundCheck,
    RhsEvaluator,
    SymbolBoundsReport,
    SymbolPair,
    format_symbol_report,
    rhs_convolution,
    rhs_pseudospectral,
    rhs_pv_quadrature,
    sigma1_values,
    sigma3_values,
    symbol_pair,
    trilinear_capillary,
    trilinear_capillary_modesum,
    trilinear_gravity,
    trilinear_gravity_modesum,
    verify_symbol_bounds,
)
from .ckseries import (
    CatalanReport,
    SeriesExpansion,
    analytic_scale,
    build_expansion,
    catalan,
    catalan_bound_check,
    ck_recurse,
    ck_sum,
    ck_zero_term,
    series_tail_bound,
    strip_preservation_bound,
)
from .evolve import (
    BASE_DISS_ORDERS,
    CSV_HEADER,
    SolverConfig,
    Trajectory,
    diagnostics_rows,
    evolve,
    linear_propagator,
    linear_symbol,
    mild_residual,
    step,
    write_diagnostics_csv,
)
from .dyadic import (
    DyadicFilter,
    almost_orthogonality_defect,
    bony_terms,
    commutator_constant_probe,
    delta_q,
    dyadic_commutator,
    dyadic_filter,
    dyadic_regularity_probe,
    s_q,
    wsp_norm,
)
from .monitors import (
    MonitorVerdict,
    TrilinearConstantReport,
    TurningReport,
    check_a0_decay,
    check_a1_monotone,
    check_energy_H2,
    check_energy_H32,
    check_energy_L2,
    check_max_principle,
    check_time_derivative,
    format_monitor_report,
    measure_trilinear_constants,
    monitor_failures,
    time_derivative_field,
    turning_monitor,
)

__version__ = "0.1.0"
