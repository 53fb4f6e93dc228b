"""First-order systems consumed by the integrator and the constraint machinery."""

import numpy as np

from .dynamics import canonical_rhs_array, hamiltonian
from .errors import OstrogradskyError
from .kinematics import CanonicalState, as_phase_array


class CanonicalSystem:
    """Hamilton's equations of a :class:`~ostrogradsky.model.ModelSpec`.

    For models declared affine the vector field is sampled once into an exact
    matrix form ``A @ x + b``, and the declaration is checked at a random point.
    """

    canonical = True

    def __init__(self, spec, check_affine=True):
        self.spec = spec
        self.name = spec.name
        self.K = spec.K
        self.dim = 4 * spec.K
        self._affine = None
        self._quadratic = None
        if spec.affine:
            self._affine = self._sample_affine(check_affine)
            self._quadratic = self._sample_quadratic(check_affine)

    def _sample_affine(self, check):
        n = self.dim
        b = canonical_rhs_array(self.spec, np.zeros(n))
        A = np.empty((n, n))
        for j in range(n):
            e = np.zeros(n)
            e[j] = 1.0
            A[:, j] = canonical_rhs_array(self.spec, e) - b
        if check:
            x = np.random.default_rng(12345).uniform(-1.0, 1.0, n)
            exact = canonical_rhs_array(self.spec, x)
            err = np.max(np.abs(A @ x + b - exact))
            if err > 1e-10 * max(1.0, np.max(np.abs(exact))):
                raise OstrogradskyError(
                    f"model '{self.name}' is declared affine but its vector field "
                    f"is not (deviation {err:.2e})"
                )
        return A, b

    def _sample_quadratic(self, check):
        # H(x) = x.M.x / 2 + g.x + c from values at 0, e_i and e_i + e_j
        n = self.dim
        H = lambda x: hamiltonian(self.spec, x)
        eye = np.eye(n)
        c = H(np.zeros(n))
        h1 = np.array([H(e) for e in eye])
        hm = np.array([H(-e) for e in eye])
        M = np.diag(h1 + hm - 2 * c)
        g = 0.5 * (h1 - hm)
        for i in range(n):
            for j in range(i + 1, n):
                M[i, j] = M[j, i] = H(eye[i] + eye[j]) - h1[i] - h1[j] + c
        if check:
            x = np.random.default_rng(54321).uniform(-1.0, 1.0, n)
            exact = H(x)
            err = abs(0.5 * x @ M @ x + g @ x + c - exact)
            if err > 1e-10 * max(1.0, abs(exact)):
                raise OstrogradskyError(
                    f"model '{self.name}' is declared affine but its Hamiltonian "
                    f"is not quadratic (deviation {err:.2e})"
                )
        return M, g, c

    @property
    def affine_form(self):
        """``(A, b)`` with ``rhs(x) = A @ x + b``, or ``None``."""
        return self._affine

    def rhs(self, x):
        if self._affine is not None:
            A, b = self._affine
            return A @ x + b
        return canonical_rhs_array(self.spec, x)

    def energy(self, x):
        if self._quadratic is not None:
            M, g, c = self._quadratic
            return float(0.5 * x @ M @ x + g @ x + c)
        return hamiltonian(self.spec, x)

    def energies(self, X):
        """Energy of each row of ``X``."""
        if self._quadratic is not None:
            M, g, c = self._quadratic
            return 0.5 * np.einsum("ni,ij,nj->n", X, M, X) + X @ g + c
        return np.array([hamiltonian(self.spec, x) for x in X])

    def default_constraints(self):
        from .constraints import PrimaryConstraints

        return PrimaryConstraints(self.spec)

    def column_names(self):
        K = self.K
        return [f"{blk}_{k + 1}" for blk in ("Q1", "Q2", "P1", "P2") for k in range(K)]

    def coerce(self, state):
        return as_phase_array(state, self.K).copy()

    def unpack(self, x):
        return CanonicalState.from_array(x)


def as_system(obj):
    """Wrap a model spec; pass systems through unchanged."""
    if hasattr(obj, "rhs") and hasattr(obj, "dim"):
        return obj
    return CanonicalSystem(obj)


class TimeReversed:
    """The same system run backwards in time: ``xdot = -rhs(x)``."""

    def __init__(self, system):
        self.base = as_system(system)
        self.name = f"{self.base.name} (reversed)"
        self.dim = self.base.dim
        form = getattr(self.base, "affine_form", None)
        self.affine_form = None if form is None else (-form[0], -form[1])

    def rhs(self, x):
        return -self.base.rhs(x)

    def energy(self, x):
        return self.base.energy(x)

    def default_constraints(self):
        return self.base.default_constraints()

    def column_names(self):
        return self.base.column_names()
