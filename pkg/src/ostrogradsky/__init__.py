"""Canonical treatment of fourth-order models built from a first-order Lagrangian.

A model couples a Lagrangian in variables ``q`` with a lift
``q = alpha(qbar) + beta(qbar) @ qbar_dot``; the package derives the
higher-order dynamics, its canonical form and its constraints, and integrates
them with optional projection onto the constraint manifold.
"""

from .constraints import (
    ConstraintChain,
    ConstraintSet,
    FunctionConstraintSet,
    LinearConstraintSet,
    build_constraint_chain,
    constraint_matrix,
    dirac_bracket,
    poisson_bracket,
    primary_constraints,
    project,
)
from .dynamics import (
    GradH,
    canonical_rhs,
    fourth_order_residual,
    hamiltonian,
    hamiltonian_gradient,
    omega,
    second_order_residual,
    solve_fourth_derivative,
)
from .errors import (
    DivergenceError,
    OstrogradskyError,
    ProjectionError,
    SecondClassError,
    SingularityError,
    StructureError,
)
from .integrate import (
    Trajectory,
    drift_report,
    growth_rate_fit,
    integrate,
    integrate_jet,
    integrate_many,
    step_rk4,
    write_csv,
    write_json,
)
from .kinematics import (
    CanonicalState,
    Jet,
    accel_from_canonical,
    canonical_from_jet,
    induced_lagrangian,
    jerk_from_canonical,
    jet_from_canonical,
    lift_q,
    lift_qdot,
    momenta,
)
from .model import (
    LagrangianSpec,
    ModelSpec,
    TransformSpec,
    ValidationReport,
    gram_inverse,
    validate_model,
)
from .system import CanonicalSystem

__version__ = "0.1.0"
