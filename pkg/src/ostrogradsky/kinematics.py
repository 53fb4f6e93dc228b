"""Lift of basic variables to the original ones, and the jet <-> canonical maps.

Canonical variables follow the Ostrogradsky construction: ``Q1 = qbar``,
``Q2 = qbar_dot`` and the two momenta ``P1``, ``P2``. A phase-space point is
stored either as a :class:`CanonicalState` or as the flat array
``[Q1, Q2, P1, P2]`` of length ``4K``.
"""

from dataclasses import dataclass
from typing import NamedTuple, Optional

import numpy as np

from .errors import StructureError
from .model import gram_inverse

Array = np.ndarray


@dataclass(frozen=True)
class Jet:
    """``qbar`` with its first three time derivatives (the jerk is optional)."""

    qbar: Array
    qbar_dot: Array
    qbar_ddot: Optional[Array] = None
    qbar_dddot: Optional[Array] = None

    def __post_init__(self):
        for name in ("qbar", "qbar_dot", "qbar_ddot", "qbar_dddot"):
            val = getattr(self, name)
            if val is not None:
                object.__setattr__(self, name, np.asarray(val, dtype=float))
        K = self.qbar.shape
        for name in ("qbar_dot", "qbar_ddot", "qbar_dddot"):
            val = getattr(self, name)
            if val is not None and val.shape != K:
                raise StructureError(name, f"expected shape {K}, got {val.shape}")

    @property
    def K(self):
        return self.qbar.size

    def as_array(self):
        parts = [self.qbar, self.qbar_dot, self.qbar_ddot, self.qbar_dddot]
        if any(p is None for p in parts):
            raise StructureError("qbar_dddot", "full jet required")
        return np.concatenate(parts)

    @classmethod
    def from_array(cls, x):
        x = np.asarray(x, dtype=float)
        K = x.size // 4
        return cls(x[:K], x[K : 2 * K], x[2 * K : 3 * K], x[3 * K :])


@dataclass(frozen=True)
class CanonicalState:
    Q1: Array
    Q2: Array
    P1: Array
    P2: Array

    def __post_init__(self):
        for name in ("Q1", "Q2", "P1", "P2"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        for name in ("Q2", "P1", "P2"):
            if getattr(self, name).shape != self.Q1.shape:
                raise StructureError(name, f"expected shape {self.Q1.shape}")

    @property
    def K(self):
        return self.Q1.size

    def as_array(self):
        return np.concatenate([self.Q1, self.Q2, self.P1, self.P2])

    @classmethod
    def from_array(cls, x):
        x = np.asarray(x, dtype=float)
        if x.ndim != 1 or x.size % 4:
            raise StructureError("state", f"length must be a multiple of 4, got {x.shape}")
        K = x.size // 4
        return cls(x[:K], x[K : 2 * K], x[2 * K : 3 * K], x[3 * K :])

    @classmethod
    def zeros(cls, K):
        return cls.from_array(np.zeros(4 * K))


def split(x):
    """Split a flat phase-space array into ``(Q1, Q2, P1, P2)`` views."""
    K = x.size // 4
    return x[:K], x[K : 2 * K], x[2 * K : 3 * K], x[3 * K :]


def as_phase_array(state, K=None):
    if isinstance(state, CanonicalState):
        x = state.as_array()
    else:
        x = np.asarray(state, dtype=float)
    if K is not None and x.shape != (4 * K,):
        raise StructureError("state", f"expected length {4 * K}, got shape {x.shape}")
    return x


class Geometry(NamedTuple):
    """Transformation data evaluated at one ``qbar``."""

    alpha: Array
    beta: Array
    dalpha: Array
    dbeta: Array
    ddalpha: Array
    ddbeta: Array
    B: Array


def geometry(spec, qbar):
    tr = spec.transform
    beta = np.asarray(tr.beta(qbar), dtype=float)
    return Geometry(
        np.asarray(tr.alpha(qbar), dtype=float),
        beta,
        np.asarray(tr.dalpha(qbar), dtype=float),
        np.asarray(tr.dbeta(qbar), dtype=float),
        np.asarray(tr.ddalpha(qbar), dtype=float),
        np.asarray(tr.ddbeta(qbar), dtype=float),
        gram_inverse(spec, qbar, beta),
    )


def _check(spec, name, vec):
    vec = np.asarray(vec, dtype=float)
    if vec.shape != (spec.K,):
        raise StructureError(name, f"expected length {spec.K}, got shape {vec.shape}")
    return vec


def lift_q(spec, qbar, qbar_dot):
    qbar = _check(spec, "qbar", qbar)
    qbar_dot = _check(spec, "qbar_dot", qbar_dot)
    tr = spec.transform
    return np.asarray(tr.alpha(qbar)) + np.asarray(tr.beta(qbar)) @ qbar_dot


def _qdot(g, v, a):
    return g.dalpha @ v + (g.dbeta @ v) @ v + g.beta @ a


def _qddot(g, v, a, j):
    # exact time derivative of the velocity lift
    return (
        np.einsum("ikl,k,l->i", g.ddalpha, v, v)
        + g.dalpha @ a
        + np.einsum("iklm,k,l,m->i", g.ddbeta, v, v, v)
        + 2.0 * np.einsum("ikl,k,l->i", g.dbeta, a, v)
        + np.einsum("ikl,k,l->i", g.dbeta, v, a)
        + g.beta @ j
    )


def _effective_dalpha(g, v):
    """``dalpha_ik + dbeta_ilk v_l``: derivative of the lift ``q`` w.r.t. ``qbar``."""
    return g.dalpha + g.dbeta.transpose(0, 2, 1) @ v


def lift_qdot(spec, jet):
    if jet.qbar_ddot is None:
        raise StructureError("qbar_ddot", "acceleration required")
    qbar = _check(spec, "qbar", jet.qbar)
    g = geometry_no_gram(spec, qbar)
    return _qdot(g, _check(spec, "qbar_dot", jet.qbar_dot), _check(spec, "qbar_ddot", jet.qbar_ddot))


def induced_lagrangian(spec, jet):
    """First-order Lagrangian evaluated on the lift of ``(qbar, qbar', qbar'')``."""
    q = lift_q(spec, jet.qbar, jet.qbar_dot)
    qd = lift_qdot(spec, jet)
    lg = spec.lagrangian
    return float(0.5 * lg.m * qd @ qd + qd @ lg.u(q) - lg.V(q))


def lift_qddot(spec, jet):
    """Second time derivative of ``q`` along the jet (needs the jerk)."""
    if jet.qbar_dddot is None:
        raise StructureError("qbar_dddot", "jerk required")
    g = geometry_no_gram(spec, _check(spec, "qbar", jet.qbar))
    return _qddot(g, jet.qbar_dot, jet.qbar_ddot, jet.qbar_dddot)


def geometry_no_gram(spec, qbar):
    tr = spec.transform
    return Geometry(
        np.asarray(tr.alpha(qbar), dtype=float),
        np.asarray(tr.beta(qbar), dtype=float),
        np.asarray(tr.dalpha(qbar), dtype=float),
        np.asarray(tr.dbeta(qbar), dtype=float),
        np.asarray(tr.ddalpha(qbar), dtype=float),
        np.asarray(tr.ddbeta(qbar), dtype=float),
        None,
    )


def momenta(spec, jet):
    """Ostrogradsky momenta ``(P1, P2)`` of a full jet."""
    if jet.qbar_ddot is None:
        raise StructureError("qbar_ddot", "acceleration required")
    if jet.qbar_dddot is None:
        raise StructureError("qbar_dddot", "jerk required for P1")
    qbar = _check(spec, "qbar", jet.qbar)
    v = _check(spec, "qbar_dot", jet.qbar_dot)
    a = _check(spec, "qbar_ddot", jet.qbar_ddot)
    j = _check(spec, "qbar_dddot", jet.qbar_dddot)
    g = geometry_no_gram(spec, qbar)
    lg = spec.lagrangian
    m = lg.m
    q = g.alpha + g.beta @ v
    qd = _qdot(g, v, a)
    qdd = _qddot(g, v, a, j)
    u = np.asarray(lg.u(q))
    du = np.asarray(lg.du(q))
    pi = m * qd + u
    P2 = g.beta.T @ pi
    euler = m * qdd + (du - du.T) @ qd + np.asarray(lg.dV(q))
    P1 = -g.beta.T @ euler + _effective_dalpha(g, v).T @ pi
    return P1, P2


def _accel(spec, g, q, v, P2):
    u = np.asarray(spec.lagrangian.u(q))
    m = spec.lagrangian.m
    drift = g.dalpha @ v + (g.dbeta @ v) @ v
    return g.B @ ((P2 - g.beta.T @ u) / m - g.beta.T @ drift)


def accel_from_canonical(spec, state):
    """Acceleration ``qbar_ddot(Q1, Q2, P2)`` recovered from the momentum ``P2``."""
    Q1, Q2, _, P2 = split(as_phase_array(state, spec.K))
    g = geometry(spec, Q1)
    q = g.alpha + g.beta @ Q2
    return _accel(spec, g, q, Q2, P2)


def _jerk(spec, g, q, v, a, P1):
    lg = spec.lagrangian
    m = lg.m
    u = np.asarray(lg.u(q))
    du = np.asarray(lg.du(q))
    qd = _qdot(g, v, a)
    # q_ddot with the jerk term removed
    acc0 = _qddot(g, v, a, np.zeros_like(v))
    force = ((du - du.T) @ qd + np.asarray(lg.dV(q))) / m
    rhs = -P1 / m + _effective_dalpha(g, v).T @ (qd + u / m) - g.beta.T @ (acc0 + force)
    return g.B @ rhs


def jerk_from_canonical(spec, state):
    """Third derivative ``qbar_dddot`` recovered from ``P1`` (given the acceleration)."""
    Q1, Q2, P1, P2 = split(as_phase_array(state, spec.K))
    g = geometry(spec, Q1)
    q = g.alpha + g.beta @ Q2
    a = _accel(spec, g, q, Q2, P2)
    return _jerk(spec, g, q, Q2, a, P1)


def canonical_from_jet(spec, jet):
    P1, P2 = momenta(spec, jet)
    return CanonicalState(jet.qbar.copy(), jet.qbar_dot.copy(), P1, P2)


def jet_from_canonical(spec, state):
    Q1, Q2, P1, P2 = split(as_phase_array(state, spec.K))
    g = geometry(spec, Q1)
    q = g.alpha + g.beta @ Q2
    a = _accel(spec, g, q, Q2, P2)
    j = _jerk(spec, g, q, Q2, a, P1)
    return Jet(Q1.copy(), Q2.copy(), a, j)
