"""Euler-Lagrange residuals, the Ostrogradsky Hamiltonian and its exact gradient."""

from dataclasses import dataclass

import numpy as np

from .errors import StructureError
from .kinematics import (
    CanonicalState,
    Jet,
    _accel,
    _effective_dalpha,
    _qddot,
    _qdot,
    as_phase_array,
    geometry,
    geometry_no_gram,
    split,
)
from .model import gram_inverse

Array = np.ndarray


@dataclass(frozen=True)
class GradH:
    dQ1: Array
    dQ2: Array
    dP1: Array
    dP2: Array

    def as_array(self):
        return np.concatenate([self.dQ1, self.dQ2, self.dP1, self.dP2])


def omega(spec, q):
    """Antisymmetric gyroscopic matrix ``du_i/dq_j - du_j/dq_i``."""
    du = np.asarray(spec.lagrangian.du(np.asarray(q, dtype=float)))
    return du - du.T


def second_order_residual(spec, q, qdot, qddot):
    lg = spec.lagrangian
    q = np.asarray(q, dtype=float)
    qdot = np.asarray(qdot, dtype=float)
    return lg.m * np.asarray(qddot) + omega(spec, q) @ qdot + np.asarray(lg.dV(q))


def _directional(fn, x, direction):
    """Central difference of ``fn`` at ``x`` along ``direction``."""
    norm = np.linalg.norm(direction)
    if norm == 0.0:
        return np.zeros_like(np.asarray(fn(x), dtype=float))
    h = 1e-5 * max(1.0, np.linalg.norm(x)) / norm
    return (np.asarray(fn(x + h * direction)) - np.asarray(fn(x - h * direction))) / (2 * h)


def _third_lift(spec, g, qbar, v, a, j, s):
    """Third time derivative of ``q`` along a jet with fourth derivative ``s``."""
    tr = spec.transform
    if tr.d3alpha is not None:
        d3a_v = np.einsum("iklm,m->ikl", tr.d3alpha(qbar), v)
    else:
        d3a_v = _directional(tr.ddalpha, qbar, v)
    if tr.d3beta is not None:
        d3b_v = np.einsum("iklmn,n->iklm", tr.d3beta(qbar), v)
    else:
        d3b_v = _directional(tr.ddbeta, qbar, v)
    ddb_v = np.einsum("iklm,m->ikl", g.ddbeta, v)
    return (
        np.einsum("ikl,k,l->i", d3a_v, v, v)
        + 2.0 * np.einsum("ikl,k,l->i", g.ddalpha, a, v)
        + np.einsum("ikl,k,l->i", g.ddalpha, v, a)
        + g.dalpha @ j
        + np.einsum("iklm,k,l,m->i", d3b_v, v, v, v)
        + np.einsum("iklm,k,l,m->i", g.ddbeta, a, v, v)
        + np.einsum("iklm,k,l,m->i", g.ddbeta, v, a, v)
        + np.einsum("iklm,k,l,m->i", g.ddbeta, v, v, a)
        + 2.0 * np.einsum("ikl,k,l->i", ddb_v, a, v)
        + 2.0 * np.einsum("ikl,k,l->i", g.dbeta, j, v)
        + 2.0 * np.einsum("ikl,k,l->i", g.dbeta, a, a)
        + np.einsum("ikl,k,l->i", ddb_v, v, a)
        + np.einsum("ikl,k,l->i", g.dbeta, a, a)
        + np.einsum("ikl,k,l->i", g.dbeta, v, j)
        + np.einsum("ikl,l,k->i", g.dbeta, v, j)
        + g.beta @ s
    )


def fourth_order_residual(spec, jet, qbar_4):
    """Residual of the K fourth-order equations obtained by restricted variation.

    ``(dalpha_ik + dbeta_ilk v_l) E_i - d/dt (beta_ik E_i)`` with
    ``E = m qddot + omega qdot + dV``; the time derivative acts on ``E`` too,
    which brings in the fourth derivative ``qbar_4``.
    """
    if jet.qbar_ddot is None or jet.qbar_dddot is None:
        raise StructureError("qbar_dddot", "full jet required")
    lg = spec.lagrangian
    m = lg.m
    qbar, v, a, j = jet.qbar, jet.qbar_dot, jet.qbar_ddot, jet.qbar_dddot
    s = np.asarray(qbar_4, dtype=float)
    g = geometry_no_gram(spec, qbar)
    q = g.alpha + g.beta @ v
    qd = _qdot(g, v, a)
    qdd = _qddot(g, v, a, j)
    qddd = _third_lift(spec, g, qbar, v, a, j, s)

    du = np.asarray(lg.du(q))
    om = du - du.T
    dV = np.asarray(lg.dV(q))
    if lg.ddu is not None:
        ddu_qd = np.einsum("ijl,l->ij", lg.ddu(q), qd)
    else:
        ddu_qd = _directional(lg.du, q, qd)
    om_dot = ddu_qd - ddu_qd.T
    if lg.ddV is not None:
        hess_qd = np.asarray(lg.ddV(q)) @ qd
    else:
        hess_qd = _directional(lg.dV, q, qd)

    E = m * qdd + om @ qd + dV
    E_dot = m * qddd + om_dot @ qd + om @ qdd + hess_qd
    beta_dot = np.einsum("ikl,l->ik", g.dbeta, v)
    return _effective_dalpha(g, v).T @ E - beta_dot.T @ E - g.beta.T @ E_dot


def solve_fourth_derivative(spec, jet):
    """Fourth derivative of ``qbar`` that makes the fourth-order residual vanish.

    The residual is affine in ``qbar_4`` with leading coefficient
    ``-m beta^T beta``, so one evaluation at zero suffices.
    """
    r0 = fourth_order_residual(spec, jet, np.zeros(spec.K))
    B = gram_inverse(spec, jet.qbar)
    return B @ r0 / spec.lagrangian.m


def jet_rhs(spec, y):
    """First-order form of the fourth-order equations on ``[qbar, v, a, j]``."""
    jet = Jet.from_array(y)
    s = solve_fourth_derivative(spec, jet)
    return np.concatenate([jet.qbar_dot, jet.qbar_ddot, jet.qbar_dddot, s])


class _Eval:
    """Shared intermediate quantities at one phase-space point."""

    __slots__ = ("g", "Q1", "Q2", "P1", "P2", "q", "a", "qd", "u", "du", "pi", "X")

    def __init__(self, spec, x):
        self.Q1, self.Q2, self.P1, self.P2 = split(x)
        g = self.g = geometry(spec, self.Q1)
        lg = spec.lagrangian
        self.q = g.alpha + g.beta @ self.Q2
        self.a = _accel(spec, g, self.q, self.Q2, self.P2)
        self.qd = _qdot(g, self.Q2, self.a)
        self.u = np.asarray(lg.u(self.q))
        self.du = np.asarray(lg.du(self.q))
        self.pi = lg.m * self.qd + self.u
        self.X = _effective_dalpha(g, self.Q2)


def hamiltonian(spec, state):
    x = as_phase_array(state, spec.K)
    ev = _Eval(spec, x)
    lg = spec.lagrangian
    return float(
        0.5 * lg.m * ev.qd @ ev.qd
        + lg.V(ev.q)
        + (ev.P1 - ev.X.T @ ev.pi) @ ev.Q2
    )


def _gradient_array(spec, x):
    ev = _Eval(spec, x)
    g, v, a = ev.g, ev.Q2, ev.a
    lg = spec.lagrangian
    force = np.asarray(lg.dV(ev.q)) - ev.du.T @ ev.qd
    # total time derivative of dalpha_ik + dbeta_ilk v_l, with a from the momenta
    X_dot = (
        g.ddalpha @ v
        + (g.ddbeta @ v).transpose(0, 2, 1) @ v
        + g.dbeta.transpose(0, 2, 1) @ a
    )
    dQ1 = ev.X.T @ force - X_dot.T @ ev.pi
    dQ2 = ev.P1 + g.beta.T @ force - (ev.X + g.dbeta @ v).T @ ev.pi
    return np.concatenate([dQ1, dQ2, v, a])


def hamiltonian_gradient(spec, state):
    x = as_phase_array(state, spec.K)
    K = spec.K
    d = _gradient_array(spec, x)
    return GradH(d[:K], d[K : 2 * K], d[2 * K : 3 * K], d[3 * K :])


def canonical_rhs_array(spec, x):
    d = _gradient_array(spec, x)
    n = d.size // 2
    return np.concatenate([d[n:], -d[:n]])


def canonical_rhs(spec, state):
    """Hamilton's equations; returns the tangent as a :class:`CanonicalState`."""
    x = as_phase_array(state, spec.K)
    return CanonicalState.from_array(canonical_rhs_array(spec, x))


def potential_bar(spec, state):
    """``V`` composed with the position lift, as a function of ``(Q1, Q2)``."""
    Q1, Q2, _, _ = split(as_phase_array(state, spec.K))
    g = geometry_no_gram(spec, Q1)
    return float(spec.lagrangian.V(g.alpha + g.beta @ Q2))
