"""Three-dimensional harmonic oscillator driven through a linear two-variable lift.

The lift is ``q1 = qbar1 + lam*qbar2_dot``, ``q2 = qbar2``, ``q3 = lam*qbar1_dot``.
Besides the model itself the module holds closed-form expressions (solutions,
Hamiltonian, canonical equations, constraints and their bracket matrix) that
the generic machinery is tested against.
"""

from dataclasses import dataclass

import numpy as np

from .errors import StructureError
from .kinematics import CanonicalState, Jet, as_phase_array, split
from .model import LagrangianSpec, ModelSpec, TransformSpec


@dataclass(frozen=True)
class OscillatorParams:
    m: float = 1.0
    h1: float = 1.0
    h2: float = 1.0
    h3: float = 1.0
    lam: float = 1.0

    def __post_init__(self):
        if self.lam == 0:
            raise StructureError("lambda", "the lift is singular for lambda = 0")
        if not self.m > 0:
            raise StructureError("m", "mass must be positive")

    @classmethod
    def isotropic(cls, m=1.0, h=1.0, lam=1.0):
        return cls(m, h, h, h, lam)

    @property
    def springs(self):
        return np.array([self.h1, self.h2, self.h3], dtype=float)

    @property
    def omegas(self):
        return np.sqrt(self.springs / self.m)

    @property
    def is_isotropic(self):
        return self.h1 == self.h2 == self.h3

    @property
    def h(self):
        self.require_isotropic()
        return self.h1

    @property
    def omega(self):
        return float(np.sqrt(self.h / self.m))

    @property
    def Omega(self):
        """Dimensionless ``lam^2 omega^2``."""
        return self.lam**2 * self.h / self.m

    def require_isotropic(self):
        if not self.is_isotropic:
            raise StructureError("h", "closed form only valid for h1 = h2 = h3")


def make_oscillator(params=OscillatorParams()):
    lam = float(params.lam)
    hs = params.springs
    beta_const = np.array([[0.0, lam], [0.0, 0.0], [lam, 0.0]])
    dalpha_const = np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]])

    lagrangian = LagrangianSpec(
        m=float(params.m),
        u=lambda q: np.zeros(3),
        V=lambda q: 0.5 * float(hs @ (q * q)),
        du=lambda q: np.zeros((3, 3)),
        dV=lambda q: hs * q,
        dim=3,
        ddu=lambda q: np.zeros((3, 3, 3)),
        ddV=lambda q: np.diag(hs),
    )
    transform = TransformSpec(
        alpha=lambda qb: np.array([qb[0], qb[1], 0.0]),
        beta=lambda qb: beta_const.copy(),
        dalpha=lambda qb: dalpha_const.copy(),
        dbeta=lambda qb: np.zeros((3, 2, 2)),
        ddalpha=lambda qb: np.zeros((3, 2, 2)),
        ddbeta=lambda qb: np.zeros((3, 2, 2, 2)),
        I=3,
        K=2,
        d3alpha=lambda qb: np.zeros((3, 2, 2, 2)),
        d3beta=lambda qb: np.zeros((3, 2, 2, 2, 2)),
    )
    return ModelSpec(lagrangian, transform, name="oscillator", affine=True)


def induced_lagrangian(params, jet):
    """Higher-order Lagrangian in terms of ``qbar`` and two derivatives."""
    m, lam = params.m, params.lam
    h1, h2, h3 = params.springs
    (x1, x2), (v1, v2), (a1, a2) = jet.qbar, jet.qbar_dot, jet.qbar_ddot
    kinetic = 0.5 * m * (v1**2 + v2**2 + lam**2 * (a1**2 + a2**2) + 2 * lam * v1 * a2)
    potential = 0.5 * (
        h1 * x1**2 + h2 * x2**2 + lam**2 * (h3 * v1**2 + h1 * v2**2) + 2 * lam * h1 * x1 * v2
    )
    return kinetic - potential


def fourth_order_closed_form(params, derivs):
    """Both displayed forms of the two fourth-order equations.

    ``derivs`` has shape ``(5, 2)``: ``qbar`` and its derivatives up to order 4.
    Returns ``(expanded, factorized)``, each of length 2.
    """
    m, lam = params.m, params.lam
    h1, h2, h3 = params.springs
    d = np.asarray(derivs, dtype=float)
    x1, x2 = d[:, 0], d[:, 1]
    expanded = np.array(
        [
            h1 * (x1[0] + lam * x2[1])
            + m * (x1[2] + lam * x2[3])
            - lam**2 * h3 * x1[2]
            - lam**2 * m * x1[4],
            h2 * x2[0]
            + m * x2[2]
            - lam * h1 * (x1[1] + lam * x2[2])
            - lam * m * (x1[3] + lam * x2[4]),
        ]
    )
    # q_i and derivatives from the lift
    q1 = x1[:4] + lam * x2[1:5]
    q2 = x2[:4]
    q3 = lam * x1[1:5]
    factorized = np.array(
        [
            m * q1[2] + h1 * q1[0] - lam * (m * q3[3] + h3 * q3[1]),
            m * q2[2] + h2 * q2[0] - lam * (m * q1[3] + h1 * q1[1]),
        ]
    )
    return expanded, factorized


def analytic_q(params, c, c_prime, t):
    """Three uncoupled oscillators; returns ``(q, qdot, qddot)``."""
    w = params.omegas
    c = np.asarray(c, dtype=float)
    cp = np.asarray(c_prime, dtype=float)
    cos, sin = np.cos(w * t), np.sin(w * t)
    q = c * cos + cp * sin
    qd = w * (-c * sin + cp * cos)
    qdd = -(w**2) * q
    return q, qd, qdd


def analytic_qbar_candidate(params, c, c_prime, t, order=4):
    """``qbar`` suggested by inverting the lift on the oscillator solutions.

    Returns an array of shape ``(order + 1, 2)`` with the time derivatives.
    Only for equal springs is this a solution of the fourth-order equations.
    """
    w1, w2, _ = params.omegas
    lam = params.lam
    c = np.asarray(c, dtype=float)
    cp = np.asarray(c_prime, dtype=float)
    out = np.empty((order + 1, 2))
    for n in range(order + 1):
        e1 = (1j * w1) ** n * np.exp(1j * w1 * t)
        e2 = (1j * w2) ** n * np.exp(1j * w2 * t)
        cos1, sin1 = e1.real, e1.imag
        cos2, sin2 = e2.real, e2.imag
        out[n, 0] = c[0] * cos1 + cp[0] * sin1 + lam * w2 * (c[1] * sin2 - cp[1] * cos2)
        out[n, 1] = c[1] * cos2 + cp[1] * sin2
    return out


def _modes(params):
    params.require_isotropic()
    lam = params.lam
    rate = np.sqrt(3.0) / (2 * lam)
    freq = 1.0 / (2 * lam)
    return params.omega, complex(-rate, freq), complex(rate, freq)


def analytic_qbar_derivatives(params, cbar, t, order=4):
    """General isotropic solution and its time derivatives, shape ``(order+1, 2)``.

    ``cbar[0:4]`` weight the two oscillators, ``cbar[4:6]`` the decaying and
    ``cbar[6:8]`` the growing contributions.
    """
    w, mu_minus, mu_plus = _modes(params)
    c = np.asarray(cbar, dtype=float)
    if c.shape != (8,):
        raise StructureError("cbar", "eight coefficients required")
    out = np.empty((order + 1, 2))
    for n in range(order + 1):
        eo = (1j * w) ** n * np.exp(1j * w * t)
        ed = mu_minus**n * np.exp(mu_minus * t)
        eg = mu_plus**n * np.exp(mu_plus * t)
        out[n, 0] = (
            c[0] * eo.real + c[1] * eo.imag
            + c[4] * ed.real + c[5] * ed.imag
            + c[6] * eg.real + c[7] * eg.imag
        )
        out[n, 1] = (
            c[2] * eo.real + c[3] * eo.imag
            + c[5] * ed.real - c[4] * ed.imag
            + c[7] * eg.real - c[6] * eg.imag
        )
    return out


def analytic_qbar(params, cbar, t):
    """Jet of the isotropic solution at ``t`` and its fourth derivative."""
    d = analytic_qbar_derivatives(params, cbar, t, order=4)
    return Jet(d[0], d[1], d[2], d[3]), d[4]


def canonical_closed_form(params, jet):
    """Canonical variables of a full jet, written out component by component."""
    m, lam = params.m, params.lam
    h1, _, h3 = params.springs
    (x1, x2), (v1, v2), (a1, a2), (j1, j2) = (
        jet.qbar, jet.qbar_dot, jet.qbar_ddot, jet.qbar_dddot,
    )
    P21 = lam**2 * m * a1
    P22 = lam * m * (v1 + lam * a2)
    P11 = m * (v1 + lam * a2 - lam**2 * j1) - lam**2 * h3 * v1
    P12 = m * (v2 - lam * a1 - lam**2 * j2) - lam * h1 * (x1 + lam * v2)
    return CanonicalState([x1, x2], [v1, v2], [P11, P12], [P21, P22])


def hamiltonian_closed_form(params, state):
    m, lam = params.m, params.lam
    h1, h2, h3 = params.springs
    (Q11, Q12), (Q21, Q22), (P11, P12), (P21, P22) = split(as_phase_array(state, 2))
    return (
        (P21**2 + P22**2) / (2 * lam**2 * m)
        + (P11 - P22 / lam) * Q21
        + P12 * Q22
        - 0.5 * m * Q22**2
        + 0.5 * (h1 * (Q11 + lam * Q22) ** 2 + h2 * Q12**2 + h3 * lam**2 * Q21**2)
    )


def canonical_equations_closed_form(params, state):
    """Hamilton's equations written out; returns the flat tangent ``[Q1', Q2', P1', P2']``."""
    m, lam = params.m, params.lam
    h1, h2, h3 = params.springs
    (Q11, Q12), (Q21, Q22), (P11, P12), (P21, P22) = split(as_phase_array(state, 2))
    return np.array(
        [
            Q21,
            Q22,
            P21 / (lam**2 * m),
            P22 / (lam**2 * m) - Q21 / lam,
            -h1 * (Q11 + lam * Q22),
            -h2 * Q12,
            P22 / lam - P11 - lam**2 * h3 * Q21,
            m * Q22 - lam * h1 * (Q11 + lam * Q22) - P12,
        ]
    )


def isotropic_constraint_matrix(params):
    """Jacobian ``A`` of the four constraints: ``phi = A @ [Q1, Q2, P1, P2]``."""
    m, lam, h = params.m, params.lam, params.h
    A = np.zeros((4, 8))
    # columns: Q11 Q12 Q21 Q22 P11 P12 P21 P22
    A[0, 4], A[0, 7] = lam, -1.0
    A[1, 5], A[1, 3] = lam, -lam * m
    A[2, 7], A[2, 2], A[2, 1] = -1.0, lam * m, -(lam**2) * h
    A[3] = A[1]
    A[3, 6] += 1.0
    A[3, 0] += lam**2 * h
    return A


def isotropic_constraints(params, state):
    """The four isotropic constraints as written out for this model."""
    return isotropic_constraint_matrix(params) @ as_phase_array(state, 2)


def constrained_hamiltonian(params, state):
    """Hamiltonian with the two primary constraints substituted; non-negative."""
    m, lam, h = params.m, params.lam, params.h
    (Q11, Q12), (Q21, Q22), _, (P21, P22) = split(as_phase_array(state, 2))
    return (
        (P21**2 + P22**2) / (2 * lam**2 * m)
        + 0.5 * m * Q22**2
        + 0.5 * h * ((Q11 + lam * Q22) ** 2 + Q12**2 + lam**2 * Q21**2)
    )


def isotropic_bracket_matrix(params):
    """Closed-form Poisson brackets among the four constraints."""
    lam, m, Om = params.lam, params.m, params.Omega
    return lam * m * np.array(
        [
            [0.0, -1.0, 0.0, -1.0 - Om],
            [1.0, 0.0, 1.0 + Om, 0.0],
            [0.0, -1.0 - Om, 0.0, -Om],
            [1.0 + Om, 0.0, Om, 0.0],
        ]
    )


def isotropic_constraint_set(params):
    """The four constraints packaged for projection and diagnostics."""
    from .constraints import LinearConstraintSet

    return LinearConstraintSet(
        isotropic_constraint_matrix(params), names=("phi1", "phi2", "phi3", "phi4")
    )


def state_from_cbar(spec, params, cbar, t=0.0):
    """Canonical state of the isotropic analytic solution at time ``t``."""
    from .kinematics import canonical_from_jet

    jet, _ = analytic_qbar(params, cbar, t)
    return canonical_from_jet(spec, jet)
