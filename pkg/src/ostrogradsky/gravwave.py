"""Single transverse Fourier mode of the linearized fourth-order wave equation.

The amplitude obeys ``(d^2/dt^2 + w^2)^2 h = 0`` with ``w = c k``. Its general
solution contains secular terms ``t cos(w t)``, ``t sin(w t)`` besides the plane
waves; the plane waves are singled out by ``hddot + w^2 h = 0``.
"""

from dataclasses import dataclass

import numpy as np

from .constraints import LinearConstraintSet
from .errors import StructureError
from .model import LagrangianSpec, ModelSpec, TransformSpec


@dataclass(frozen=True)
class ModeParams:
    """Wave speed ``c`` and wavenumber ``k``.

    The two transverse polarizations obey identical, decoupled equations, so
    a single scalar amplitude stands for either of them.
    """

    c: float = 1.0
    k: float = 1.0

    def __post_init__(self):
        if not self.c > 0:
            raise StructureError("c", f"wave speed must be positive, got {self.c}")
        if self.k < 0:
            raise StructureError("k", f"wavenumber must be non-negative, got {self.k}")

    @property
    def omega(self):
        return self.c * self.k


def mode_residual(params, h, h_dot, h_ddot, h_dddot, h_4):
    """``h'''' + 2 w^2 h'' + w^4 h``; ``h_dot`` and ``h_dddot`` do not enter."""
    w2 = params.omega**2
    return h_4 + 2 * w2 * h_ddot + w2 * w2 * h


def mode_constraint(params, h_ddot, h_dddot, h_dot, h):
    """``h''' + w^2 h'``, the time derivative of ``h'' + w^2 h``."""
    return h_dddot + params.omega**2 * h_dot


def box_residual(params, h, h_ddot):
    """``h'' + w^2 h``; zero exactly on plane waves."""
    return h_ddot + params.omega**2 * h


def plane_wave(params, amplitude_cos, amplitude_sin, t):
    """State ``(h, h', h'', h''')`` of ``a cos(w t) + b sin(w t)``."""
    w = params.omega
    if w == 0.0:
        return np.array([amplitude_cos + amplitude_sin * t, amplitude_sin, 0.0, 0.0])
    c, s = np.cos(w * t), np.sin(w * t)
    h = amplitude_cos * c + amplitude_sin * s
    hd = w * (-amplitude_cos * s + amplitude_sin * c)
    return np.array([h, hd, -w * w * h, -w * w * hd])


def secular_wave(params, amplitude, t):
    """State of ``amplitude * t cos(w t)`` and its derivatives."""
    w = params.omega
    c, s = np.cos(w * t), np.sin(w * t)
    h = t * c
    hd = c - w * t * s
    hdd = -2 * w * s - w * w * t * c
    hddd = -3 * w * w * c + w**3 * t * s
    return amplitude * np.array([h, hd, hdd, hddd])


class ModeSystem:
    """First-order form of the mode equation in ``x = (h, h', h'', h''')``.

    ``energy`` is the conserved Ostrogradsky Hamiltonian of
    ``L = (h'' + w^2 h)^2 / 2`` expressed through ``x``; it is indefinite.
    The default constraints are ``h''' + w^2 h'`` and ``h'' + w^2 h``.
    """

    name = "gravwave-mode"
    dim = 4

    def __init__(self, params):
        self.params = params
        w2 = params.omega**2
        self.A = np.array(
            [
                [0.0, 1.0, 0.0, 0.0],
                [0.0, 0.0, 1.0, 0.0],
                [0.0, 0.0, 0.0, 1.0],
                [-w2 * w2, 0.0, -2.0 * w2, 0.0],
            ]
        )
        self.b = np.zeros(4)

    @property
    def affine_form(self):
        return self.A, self.b

    def rhs(self, x):
        return self.A @ x

    def energy(self, x):
        h, hd, hdd, hddd = x
        w2 = self.params.omega**2
        P2 = hdd + w2 * h
        P1 = -(hddd + w2 * hd)
        return float(P1 * hd + 0.5 * P2 * P2 - w2 * h * P2)

    def energies(self, X):
        w2 = self.params.omega**2
        h, hd, hdd, hddd = X.T
        P2 = hdd + w2 * h
        return -(hddd + w2 * hd) * hd + 0.5 * P2 * P2 - w2 * h * P2

    def default_constraints(self):
        w2 = self.params.omega**2
        A = np.array([[0.0, w2, 0.0, 1.0], [w2, 0.0, 1.0, 0.0]])
        return LinearConstraintSet(A, names=("psi", "box"))

    def column_names(self):
        return ["h", "h_dot", "h_ddot", "h_dddot"]

    def coerce(self, state):
        x = np.asarray(state, dtype=float)
        if x.shape != (4,):
            raise StructureError("state", f"expected length 4, got shape {x.shape}")
        return x.copy()


def make_mode_model(params):
    return ModeSystem(params)


def make_mode_spec(params):
    """The mode equation as a lifted first-order model with ``I = 2``, ``K = 1``.

    With ``q = (h', h)``, ``u(q) = (w^2 q2, -q1 / 2)`` and ``V = -w^4 q2^2 / 2``
    the induced Lagrangian is ``(h'' + w^2 h)^2 / 2``, so the generic canonical
    machinery reproduces :class:`ModeSystem` with ``(Q1, Q2) = (h, h')``.
    """
    w2 = params.omega**2
    lagrangian = LagrangianSpec(
        m=1.0,
        u=lambda q: np.array([w2 * q[1], -0.5 * q[0]]),
        V=lambda q: -0.5 * w2 * w2 * q[1] ** 2,
        du=lambda q: np.array([[0.0, w2], [-0.5, 0.0]]),
        dV=lambda q: np.array([0.0, -w2 * w2 * q[1]]),
        dim=2,
        ddu=lambda q: np.zeros((2, 2, 2)),
        ddV=lambda q: np.array([[0.0, 0.0], [0.0, -w2 * w2]]),
    )
    transform = TransformSpec(
        alpha=lambda qb: np.array([0.0, qb[0]]),
        beta=lambda qb: np.array([[1.0], [0.0]]),
        dalpha=lambda qb: np.array([[0.0], [1.0]]),
        dbeta=lambda qb: np.zeros((2, 1, 1)),
        ddalpha=lambda qb: np.zeros((2, 1, 1)),
        ddbeta=lambda qb: np.zeros((2, 1, 1, 1)),
        I=2,
        K=1,
        d3alpha=lambda qb: np.zeros((2, 1, 1, 1)),
        d3beta=lambda qb: np.zeros((2, 1, 1, 1, 1)),
    )
    return ModelSpec(lagrangian, transform, name="gravwave-mode", affine=True)


def canonical_from_mode(params, x):
    """Map ``(h, h', h'', h''')`` to ``[Q1, Q2, P1, P2]``."""
    h, hd, hdd, hddd = x
    w2 = params.omega**2
    return np.array([h, hd, -(hddd + w2 * hd), hdd + w2 * h])
