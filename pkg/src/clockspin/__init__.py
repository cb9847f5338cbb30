"""Discrete spin fields on planar lattices with values on the circle or on
its N-point clock discretization: energies and their scaling regimes,
vortex detection, the flat metric on vortex measures, explicit field
constructions, and constrained-relaxation solvers for core and
renormalized energies."""

from .energy import (
    EnergyReport,
    clock_energy,
    dirichlet_energy,
    energy_report,
    jacobian_pairing,
    jump_functional,
    phi_integrand,
    xy_energy,
)
from .constructions import (
    JumpSpec,
    VortexSpec,
    composite_field,
    pure_jump_field,
    sample_smooth,
    transition_field,
    vortex_field,
)
from .flat_metric import FlatResult, flat_distance, flat_lower_bound
from .geometry import Domain, boundary_dist, cpow, geodesic_dist, norm21, rotate
from .harness import (
    RegimeSweepSpec,
    SweepRow,
    build_construction,
    jacobian_equivalence_check,
    render_field,
    run_sweep,
)
from .lattice import (
    ClockField,
    ClockParams,
    Lattice,
    SpinField,
    affine_interpolation,
    bonds,
    build_lattice,
    discrete_boundary,
    load_field,
    pc_value,
    project_clock,
    save_field,
)
from .minimization import (
    BoundaryCondition,
    MinimizationResult,
    RenormalizedInput,
    core_energy,
    core_energy_limit,
    harmonic_R0,
    m_tilde,
    m_tilde_solve,
    relax,
    renormalized_energy,
    solve_laplace_dirichlet,
)
from .vorticity import (
    VortexMeasure,
    loop_degree,
    plaquette_vorticity,
    psi,
    q_project,
    triangle_vorticity,
    vorticity_measure,
    vorticity_measure_centered,
)

__version__ = "0.1.0"
