"""Constraint sets, the iterated constraint chain, Poisson and Dirac brackets.

Observables and constraints are functions of the flat phase-space array
``x = [Q1, Q2, P1, P2]``. Brackets use the canonical pairing ``(Q1, P1)``,
``(Q2, P2)``.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ProjectionError, SecondClassError, StructureError
from .kinematics import (
    CanonicalState,
    _accel,
    _effective_dalpha,
    _qdot,
    as_phase_array,
    geometry,
    split,
)
from .system import as_system

CLOSURE_TOLERANCE = 1e-8
PROJECTION_TOLERANCE = 1e-10
DIRAC_CONDITION_LIMIT = 1e12


def poisson_tensor(dim):
    n = dim // 2
    omega = np.zeros((dim, dim))
    omega[:n, n:] = np.eye(n)
    omega[n:, :n] = -np.eye(n)
    return omega


def numeric_gradient(f, x, rel_step=1e-3):
    """Five-point central-difference gradient (or Jacobian, for vector ``f``)."""
    x = np.asarray(x, dtype=float)
    f0 = np.asarray(f(x), dtype=float)
    out = np.empty(f0.shape + (x.size,))
    for j in range(x.size):
        h = rel_step * max(1.0, abs(x[j]))
        e = np.zeros_like(x)
        e[j] = h
        out[..., j] = (
            -np.asarray(f(x + 2 * e)) + 8 * np.asarray(f(x + e))
            - 8 * np.asarray(f(x - e)) + np.asarray(f(x - 2 * e))
        ) / (12 * h)
    return out


def lie_derivative(f, vector_field, x, rel_step=1e-2):
    """Derivative of ``f`` along ``vector_field`` at ``x`` (five-point stencil).

    The stencil is exact for polynomials of degree four, so for affine fields
    and affine ``f`` the result is exact up to rounding at any step.
    """
    x = np.asarray(x, dtype=float)
    d = np.asarray(vector_field(x), dtype=float)
    norm = np.linalg.norm(d)
    if norm == 0.0:
        return 0.0 * np.asarray(f(x), dtype=float)
    s = rel_step * max(1.0, np.linalg.norm(x)) / norm
    return (
        -np.asarray(f(x + 2 * s * d)) + 8 * np.asarray(f(x + s * d))
        - 8 * np.asarray(f(x - s * d)) + np.asarray(f(x - 2 * s * d))
    ) / (12 * s)


def primary_constraints(spec, state):
    """``P1_k - (m qdot_i + u_i)(dalpha_ik + dbeta_ilk Q2_l)``."""
    x = as_phase_array(state, spec.K)
    Q1, Q2, P1, P2 = split(x)
    g = geometry(spec, Q1)
    q = g.alpha + g.beta @ Q2
    a = _accel(spec, g, q, Q2, P2)
    lg = spec.lagrangian
    pi = lg.m * _qdot(g, Q2, a) + np.asarray(lg.u(q))
    return P1 - _effective_dalpha(g, Q2).T @ pi


class ConstraintSet:
    """A finite set of scalar constraints with values and a Jacobian."""

    names = ()

    def values(self, x):
        raise NotImplementedError

    def jacobian(self, x):
        return numeric_gradient(self.values, as_phase_array(x))

    def __len__(self):
        return len(self.names)

    def max_abs(self, x):
        v = self.values(x)
        return float(np.max(np.abs(v))) if np.size(v) else 0.0


class LinearConstraintSet(ConstraintSet):
    """Affine constraints ``A @ x + b``."""

    def __init__(self, A, b=None, names=None):
        self.A = np.atleast_2d(np.asarray(A, dtype=float))
        self.b = np.zeros(self.A.shape[0]) if b is None else np.asarray(b, dtype=float)
        self.names = tuple(names) if names else tuple(f"c{i + 1}" for i in range(len(self.b)))
        # minimum-norm correction operator for one-shot projection
        self._pinv = np.linalg.pinv(self.A)

    def values(self, x):
        return self.A @ as_phase_array(x) + self.b

    def jacobian(self, x):
        return self.A

    def batch_values(self, X):
        return X @ self.A.T + self.b

    def project_array(self, x):
        return x - self._pinv @ (self.A @ x + self.b)


class FunctionConstraintSet(ConstraintSet):
    """Constraints given as a list of scalar functions, with optional gradients."""

    def __init__(self, functions, names=None, gradients=None):
        self.functions = list(functions)
        self.gradients = list(gradients) if gradients else None
        self.names = tuple(names) if names else tuple(f"c{i + 1}" for i in range(len(self.functions)))

    def values(self, x):
        x = as_phase_array(x)
        return np.array([float(f(x)) for f in self.functions])

    def jacobian(self, x):
        x = as_phase_array(x)
        if self.gradients is not None:
            return np.array([np.asarray(g(x), dtype=float) for g in self.gradients])
        return numeric_gradient(self.values, x)


class PrimaryConstraints(ConstraintSet):
    def __init__(self, spec):
        self.spec = spec
        self.names = tuple(f"primary_{k + 1}" for k in range(spec.K))

        self._linear = self._sample_linear() if spec.affine else None

    def _sample_linear(self):
        # affine models give affine constraints; probe once, confirm at a random point
        n = 4 * self.spec.K
        b = primary_constraints(self.spec, np.zeros(n))
        A = np.array([primary_constraints(self.spec, e) - b for e in np.eye(n)]).T
        x = np.random.default_rng(12345).uniform(-1.0, 1.0, n)
        exact = primary_constraints(self.spec, x)
        if np.max(np.abs(A @ x + b - exact)) > 1e-10 * max(1.0, np.max(np.abs(exact))):
            return None
        return A, b

    def values(self, x):
        if self._linear is not None:
            A, b = self._linear
            return A @ as_phase_array(x) + b
        return primary_constraints(self.spec, x)

    def jacobian(self, x):
        if self._linear is not None:
            return self._linear[0]
        return super().jacobian(x)

    def batch_values(self, X):
        if self._linear is None:
            return np.array([self.values(x) for x in X]).reshape(len(X), -1)
        A, b = self._linear
        return X @ A.T + b


def poisson_bracket(f, g, state, grad_f=None, grad_g=None):
    """Canonical Poisson bracket ``{f, g}`` at ``state``.

    Gradients are taken numerically unless callables ``grad_f``/``grad_g``
    are supplied.
    """
    x = as_phase_array(state)
    df = np.asarray(grad_f(x) if grad_f else numeric_gradient(f, x), dtype=float)
    dg = np.asarray(grad_g(x) if grad_g else numeric_gradient(g, x), dtype=float)
    n = x.size // 2
    return float(df[:n] @ dg[n:] - df[n:] @ dg[:n])


def coordinate(block, index):
    """Observable returning one canonical coordinate, e.g. ``coordinate("P1", 0)``."""
    offset = ("Q1", "Q2", "P1", "P2").index(block)

    def f(x):
        return x[offset * (x.size // 4) + index]

    f.__name__ = f"{block}_{index + 1}"
    return f


def constraint_matrix(constraints, state):
    """Antisymmetric matrix of pairwise brackets among the constraints."""
    x = as_phase_array(state)
    J = np.atleast_2d(constraints.jacobian(x))
    C = J @ poisson_tensor(x.size) @ J.T
    return 0.5 * (C - C.T)


def dirac_bracket(f, g, constraints, state, grad_f=None, grad_g=None):
    """``{f,g} - {f,phi_a} (C^-1)_ab {phi_b,g}`` for second-class constraints."""
    x = as_phase_array(state)
    C = constraint_matrix(constraints, x)
    cond = np.linalg.cond(C)
    if not np.isfinite(cond) or cond > DIRAC_CONDITION_LIMIT:
        raise SecondClassError("constraint bracket matrix is singular", cond)
    omega = poisson_tensor(x.size)
    J = np.atleast_2d(constraints.jacobian(x))
    df = np.asarray(grad_f(x) if grad_f else numeric_gradient(f, x), dtype=float)
    dg = np.asarray(grad_g(x) if grad_g else numeric_gradient(g, x), dtype=float)
    f_phi = df @ omega @ J.T
    phi_g = J @ omega @ dg
    return float(df @ omega @ dg - f_phi @ np.linalg.solve(C, phi_g))


# ---------------------------------------------------------------- chain


@dataclass
class Closure:
    closed: bool
    level: int
    coefficients: np.ndarray
    residual: float


@dataclass
class ChainConstraint:
    name: str
    level: int
    function: object
    # affine representation (row, offset) when the chain is built exactly
    row: np.ndarray = None
    offset: float = 0.0

    def __call__(self, x):
        if self.row is not None:
            return float(self.row @ x + self.offset)
        return float(self.function(x))


@dataclass
class ConstraintChain(ConstraintSet):
    """Independent constraints found by repeatedly bracketing with ``H``.

    ``levels[j]`` lists the names of the independent constraints first seen
    at level ``j + 1``; ``redundant`` records components that were linear
    combinations of earlier ones, with their coefficients.
    """

    constraints: list
    closure: Closure
    levels: list = field(default_factory=list)
    redundant: list = field(default_factory=list)
    exact: bool = False

    @property
    def names(self):
        return tuple(c.name for c in self.constraints)

    def values(self, x):
        x = as_phase_array(x)
        if self.exact:
            return self._A @ x + self._b
        return np.array([c(x) for c in self.constraints])

    def jacobian(self, x):
        if self.exact:
            return self._A
        return numeric_gradient(self.values, as_phase_array(x))

    def __post_init__(self):
        if self.exact:
            self._A = np.array([c.row for c in self.constraints])
            self._b = np.array([c.offset for c in self.constraints])

    def as_constraint_set(self):
        if self.exact:
            return LinearConstraintSet(self._A, self._b, names=self.names)
        return self


def _probe_states(dim, n, seed):
    return np.random.default_rng(seed).uniform(-1.0, 1.0, size=(n, dim))


def _fit(F, g, tol):
    """Least-squares coefficients of ``g`` on the columns of ``F``; rms residual."""
    scale = max(1.0, float(np.sqrt(np.mean(g * g))))
    if F.shape[1] == 0:
        return np.zeros(0), float(np.sqrt(np.mean(g * g))) / scale
    coef, *_ = np.linalg.lstsq(F, g, rcond=None)
    res = F @ coef - g
    return coef, float(np.sqrt(np.mean(res * res))) / scale


def build_constraint_chain(
    model,
    max_level=None,
    probe_states=None,
    base=None,
    tol=CLOSURE_TOLERANCE,
    seed=0,
):
    """Iterate ``phi^(j+1) = {phi^(j), H}`` from the primary constraints to closure.

    Each new component is fitted, across the probe states, as a
    state-independent linear combination of the constraints kept so far. A
    component that fits is recorded as redundant and not propagated. The chain
    closes at the first level whose components all fit; the fitted
    coefficients of that level form the closure certificate. ``max_level``
    defaults to one more than the phase-space dimension, which bounds the
    number of independent constraints.

    For affine models with affine base constraints the brackets are computed
    exactly on coefficient rows; otherwise nested five-point differences along
    the Hamiltonian vector field are used.
    """
    system = as_system(model)
    dim = system.dim
    if max_level is None:
        max_level = dim + 1
    if max_level < 1:
        raise StructureError("max_level", "must be at least 1")
    affine = getattr(system, "affine_form", None)
    if base is None:
        spec = system.spec
        base = [
            (lambda x, k=k: float(primary_constraints(spec, x)[k]))
            for k in range(spec.K)
        ]
    base = list(base)
    if probe_states is None:
        probe_states = _probe_states(dim, max(4 * dim, 24), seed)
    probes = np.asarray(probe_states, dtype=float)

    rows = None
    if affine is not None:
        rows = _affine_rows(base, dim, probes)
    exact = rows is not None

    kept = []
    F = np.empty((dim + 1 if exact else len(probes), 0))
    levels = []
    redundant = []
    current = []
    for k, f in enumerate(base):
        c = ChainConstraint(f"phi1_{k + 1}", 1, f)
        if exact:
            c.row, c.offset = rows[k]
        current.append(c)

    closure = None
    for level in range(1, max_level + 1):
        new = []
        level_coefs = []
        worst = 0.0
        for c in current:
            if exact:
                g = np.append(c.row, c.offset)
            else:
                g = np.array([c(x) for x in probes])
            coef, res = _fit(F, g, tol)
            if res < tol:
                coef_full = np.zeros(len(kept))
                coef_full[: len(coef)] = coef
                scale = np.max(np.abs(coef_full), initial=0.0)
                coef_full[np.abs(coef_full) < 1e-12 * max(scale, 1.0)] = 0.0
                level_coefs.append(coef_full)
                redundant.append((c.name, coef_full))
                worst = max(worst, res)
            else:
                kept.append(c)
                new.append(c)
                F = np.column_stack([F, g])
        levels.append([c.name for c in new])
        if not new:
            closure = Closure(True, level, np.array(level_coefs), worst)
            levels.pop()
            break
        if level == max_level:
            break
        current = []
        for idx, c in enumerate(new):
            name = f"phi{level + 1}_{idx + 1}"
            if exact:
                A, b = affine
                row = c.row @ A
                nc = ChainConstraint(name, level + 1, None, row, float(c.row @ b))
            else:
                parent = c
                nc = ChainConstraint(
                    name,
                    level + 1,
                    lambda x, p=parent: float(lie_derivative(p, system.rhs, x)),
                )
            current.append(nc)
    if closure is None:
        closure = Closure(False, max_level, np.zeros((0, len(kept))), float("nan"))
    return ConstraintChain(kept, closure, levels, redundant, exact)


def _affine_rows(functions, dim, probes):
    """Exact ``(row, offset)`` for each function if all of them are affine."""
    out = []
    zero = np.zeros(dim)
    for f in functions:
        b = float(f(zero))
        row = np.array([float(f(e)) - b for e in np.eye(dim)])
        for x in probes[:4]:
            val = float(f(x))
            if abs(row @ x + b - val) > 1e-10 * max(1.0, abs(val)):
                return None
        out.append((row, b))
    return out


# ---------------------------------------------------------------- projection


def project(constraints, state, max_iter=20, tol=PROJECTION_TOLERANCE):
    """Nearest point (Euclidean, canonical coordinates) on the constraint manifold.

    Gauss-Newton with minimum-norm steps. Returns the same type as ``state``.
    """
    was_state = isinstance(state, CanonicalState)
    x = as_phase_array(state).copy()
    x = project_array(constraints, x, max_iter, tol)
    return CanonicalState.from_array(x) if was_state else x


def project_array(constraints, x, max_iter=20, tol=PROJECTION_TOLERANCE):
    if isinstance(constraints, ConstraintChain):
        constraints = constraints.as_constraint_set()
    phi = constraints.values(x)
    if np.max(np.abs(phi), initial=0.0) < tol:
        return x
    if isinstance(constraints, LinearConstraintSet):
        x = constraints.project_array(x)
        phi = constraints.values(x)
        if np.max(np.abs(phi), initial=0.0) < tol:
            return x
    for it in range(max_iter):
        J = np.atleast_2d(constraints.jacobian(x))
        step, *_ = np.linalg.lstsq(J, phi, rcond=None)
        x = x - step
        phi = constraints.values(x)
        if np.max(np.abs(phi), initial=0.0) < tol:
            return x
    raise ProjectionError(float(np.max(np.abs(phi))), max_iter)
