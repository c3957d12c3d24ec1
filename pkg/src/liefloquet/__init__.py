"""Periodic first integrals for time-dependent Hamiltonian systems of Lie type.

The pipeline: represent the system over a finite-dimensional Lie algebra,
integrate the induced Euler system dxi/dt = -[phi(t), xi], build the
fundamental solution and monodromy, classify Floquet multipliers with
Killing-form admissibility, and assemble first integrals
I(t, x) = sum_j xi_j(t) H_j(x) certified by conservation along flows.
"""

from .algebra import (
    AlgebraError,
    AntisymmetryViolation,
    DimensionMismatch,
    JacobiViolation,
    LieAlgebra,
    ad_matrix,
    algebra_from_dict,
    algebra_to_dict,
    bracket,
    build_algebra,
    center,
    is_semisimple,
    killing_gram,
    killing_pairing,
    load_algebra,
    preset_algebra,
    quotient_by_center,
)
from .dynamics import (
    ConservationReport,
    DomainExit,
    FirstIntegral,
    HamiltonianBasis,
    LieHamiltonianSystem,
    PhaseSpace,
    Trajectory,
    build_system,
    conservation_report,
    first_integral,
    hamiltonian_basis,
    hamiltonian_vector_field,
    integral_value,
    integral_values,
    integrate_flow,
    phase_space,
    poisson_bracket,
    poisson_isomorphism_check,
    verify_closure,
)
from .expressions import (
    DomainError,
    Expression,
    ParseError,
    UnboundVariable,
    differentiate,
    evaluate,
    parse,
    serialize,
    variables,
)
from .floquet import (
    CoefficientCurve,
    EigenConvergenceFailure,
    FloquetClassification,
    FundamentalSolution,
    NoGeneratorFound,
    NonInvertibleFundamental,
    PeriodicGenerator,
    coefficient_curve,
    delta_vector,
    evaluate_F,
    floquet_classify,
    fundamental_solution,
    integrate_euler,
    periodic_generators,
    phi_at,
    select_generator,
)
from .milne_pinney import (
    MPParams,
    casimir,
    cross_product_residual,
    mp_params,
    mp_periodic_integral,
    mp_system,
)

__version__ = "0.1.0"
