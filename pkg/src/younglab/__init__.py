"""Simulation and verification laboratory for Young-diagram height dynamics.

Two column statistics are covered: unrestricted diagrams (U, non-increasing
columns) and restricted diagrams (RU, strictly decreasing columns).  The
package samples grandcanonical ensembles, runs the event-driven corner
dynamics, solves the hydrodynamic PDEs and fluctuation SPDEs, and checks the
sqrt(N)-scaled height fluctuations against their Gaussian limits.
"""

__version__ = "0.1.0"

from .dynamics import (
    TrajectoryRecord,
    TransitionEvent,
    derive_seed,
    enumerate_transitions,
    rotate_to_wasep,
    rotated_particle_count,
    simulate,
    to_occupancy,
    total_rate,
)
from .ensembles import (
    ALPHA,
    BETA,
    EnsembleError,
    GrandcanonicalParams,
    Stat,
    YoungDiagram,
    calibrate_epsilon,
    diagram_from_differences,
    finite_size_covariance,
    finite_size_mean_height,
    mean_size,
    partition_sum,
    sample_grandcanonical,
    sample_height_differences,
    static_covariance,
    vershik_curve,
)
from .fluctlab import (
    CovarianceReport,
    EnsembleStats,
    FluctuationSample,
    GreenKernelReport,
    covariance_standard_error,
    decay_rate_estimate,
    default_probes,
    drift_spectral_gap,
    equilibrium_mobility,
    fluctuation_field,
    green_kernel_solve,
    ks_critical,
    ks_statistic,
    poincare_constant,
    rayleigh_quotient,
    run_dynamic_experiment,
    run_static_experiment,
    spde_invariant_experiment,
    sturm_liouville_bands,
    true_null_pass_rate,
)
from .pde import (
    TimeProfiles,
    omega_infinity,
    rho_infinity_line,
    rho_u_infinity,
    solve_burgers,
    solve_omega,
    solve_psi_ru,
    solve_psi_u,
    solve_rho_u,
    stationarity_drift,
    stationary_profile,
)
from .spde import (
    NoiseField,
    SpdePaths,
    SpdeSystem,
    integrate_spde,
    line_system,
    natural_boundary_check,
    neumann_heat_kernel,
    phi_bar_system,
    recover_psi_r,
    rotate_line_field,
    ru_system,
    scheme_covariance,
    solve_spde_line,
    solve_spde_phi_bar,
    solve_spde_ru,
    solve_spde_u,
    stationary_covariance,
    transform_line_to_u,
    u_system,
)
from .transforms import (
    Domain,
    LatticeField,
    NormSpace,
    Profile,
    WeightedNorm,
    cumulative_hole_integral,
    height_function,
    hopf_cole_field,
    hopf_cole_lattice,
    phi_u,
    phi_u_inverse,
    rotated_height,
    rotated_height_counting,
    scaled_height,
    symmetrize_hopf_cole,
    weighted_norm,
)
