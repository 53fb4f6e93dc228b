"""Model data: a first-order Lagrangian plus a velocity-dependent change of variables.

The Lagrangian has the form ``L = m/2 qdot.qdot + qdot.u(q) - V(q)`` in ``I``
variables ``q``. The variables are expressed through ``K <= I`` basic variables
``qbar`` and their velocities, ``q = alpha(qbar) + beta(qbar) @ qbar_dot``.

All derivatives are supplied analytically by the caller. :func:`validate_model`
cross-checks them against central finite differences.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import SingularityError, StructureError

#: smallest admissible ratio sigma_min / sigma_max of beta
REGULARITY_THRESHOLD = 1e-10
#: largest admissible condition number of the Gram matrix beta^T beta
GRAM_CONDITION_LIMIT = 1e12
#: relative tolerance for derivative cross-checks
DERIVATIVE_TOLERANCE = 1e-5

Array = np.ndarray


@dataclass(frozen=True)
class LagrangianSpec:
    """First-order Lagrangian ``m/2 |qdot|^2 + qdot.u(q) - V(q)``.

    ``du(q)[i, j]`` is ``d u_i / d q_j``. The optional second derivatives
    ``ddu(q)[i, j, l] = d^2 u_i / dq_j dq_l`` and ``ddV(q)`` (Hessian) are only
    needed by the fourth-order residual; when absent they are replaced by
    directional central differences of ``du`` and ``dV``.
    """

    m: float
    u: Callable[[Array], Array]
    V: Callable[[Array], float]
    du: Callable[[Array], Array]
    dV: Callable[[Array], Array]
    dim: int
    ddu: Optional[Callable[[Array], Array]] = None
    ddV: Optional[Callable[[Array], Array]] = None

    def __post_init__(self):
        if not self.m > 0:
            raise StructureError("m", f"mass must be positive, got {self.m}")
        if int(self.dim) < 1:
            raise StructureError("dim", "I must be a positive integer")


@dataclass(frozen=True)
class TransformSpec:
    """Transformation ``q = alpha(qbar) + beta(qbar) @ qbar_dot``.

    Index layout (``i`` over I, the rest over K):

    - ``dalpha[i, k] = d alpha_i / d qbar_k``
    - ``dbeta[i, k, l] = d beta_ik / d qbar_l``
    - ``ddalpha[i, k, l] = d dalpha_ik / d qbar_l``
    - ``ddbeta[i, k, l, n] = d dbeta_ikl / d qbar_n``

    Third derivatives ``d3alpha`` and ``d3beta`` (one more trailing index) are
    optional; they enter only the fourth-order residual.
    """

    alpha: Callable[[Array], Array]
    beta: Callable[[Array], Array]
    dalpha: Callable[[Array], Array]
    dbeta: Callable[[Array], Array]
    ddalpha: Callable[[Array], Array]
    ddbeta: Callable[[Array], Array]
    I: int
    K: int
    d3alpha: Optional[Callable[[Array], Array]] = None
    d3beta: Optional[Callable[[Array], Array]] = None

    def __post_init__(self):
        if int(self.K) < 1 or int(self.I) < 1:
            raise StructureError("K", "dimensions must be positive")
        if self.K > self.I:
            raise StructureError("K", f"K={self.K} exceeds I={self.I}")


@dataclass(frozen=True)
class ModelSpec:
    """A Lagrangian together with the lift that defines the higher-order model.

    ``affine`` declares that the lift is linear and the Lagrangian quadratic,
    so that the canonical vector field is affine in the phase-space point.
    Integration and constraint-chain construction use this to work with an
    exact matrix form; the declaration is checked when that form is built.
    """

    lagrangian: LagrangianSpec
    transform: TransformSpec
    name: str = "custom"
    affine: bool = False

    def __post_init__(self):
        if self.lagrangian.dim != self.transform.I:
            raise StructureError(
                "I",
                f"lagrangian has I={self.lagrangian.dim} but transform has "
                f"I={self.transform.I}",
            )

    @property
    def I(self):
        return self.transform.I

    @property
    def K(self):
        return self.transform.K

    @property
    def m(self):
        return self.lagrangian.m

    @property
    def phase_dim(self):
        return 4 * self.transform.K


def _call(fn, x, shape, name):
    out = np.asarray(fn(x), dtype=float)
    if out.shape != shape:
        raise StructureError(name, f"expected shape {shape}, got {out.shape}")
    return out


def _fd_step(x):
    return np.maximum(1e-6, 1e-6 * np.abs(x))


def central_jacobian(fn, x, out_shape):
    """Central-difference derivative of ``fn`` at ``x``; the new axis is last."""
    x = np.asarray(x, dtype=float)
    h = _fd_step(x)
    jac = np.empty(tuple(out_shape) + (x.size,))
    for j in range(x.size):
        e = np.zeros_like(x)
        e[j] = h[j]
        jac[..., j] = (np.asarray(fn(x + e)) - np.asarray(fn(x - e))) / (2 * h[j])
    return jac


def _mismatch(analytic, numeric):
    scale = max(1.0, float(np.max(np.abs(analytic), initial=0.0)))
    return float(np.max(np.abs(analytic - numeric), initial=0.0)) / scale


@dataclass
class PointReport:
    qbar: Array
    mismatches: dict
    sigma_min: float
    sigma_max: float
    regular: bool
    passed: bool


@dataclass
class ValidationReport:
    points: list = field(default_factory=list)
    correspondence_case: bool = False

    @property
    def passed(self):
        return all(p.passed for p in self.points)

    def worst(self):
        """Largest mismatch per derivative over all points."""
        out = {}
        for p in self.points:
            for key, val in p.mismatches.items():
                out[key] = max(out.get(key, 0.0), val)
        return out

    def summary(self):
        lines = []
        for p in self.points:
            worst = max(p.mismatches, key=p.mismatches.get)
            lines.append(
                f"qbar={np.array2string(p.qbar, precision=4)} "
                f"sigma=({p.sigma_min:.3e},{p.sigma_max:.3e}) "
                f"worst={worst}:{p.mismatches[worst]:.2e} "
                f"{'PASS' if p.passed else 'FAIL'}"
            )
        return "\n".join(lines)


def check_shapes(spec, qbar):
    """Evaluate every callback once and check its shape; returns nothing."""
    I, K = spec.I, spec.K
    tr, lg = spec.transform, spec.lagrangian
    qbar = np.asarray(qbar, dtype=float)
    if qbar.shape != (K,):
        raise StructureError("qbar", f"expected length {K}, got shape {qbar.shape}")
    _call(tr.alpha, qbar, (I,), "alpha")
    _call(tr.beta, qbar, (I, K), "beta")
    _call(tr.dalpha, qbar, (I, K), "dalpha")
    _call(tr.dbeta, qbar, (I, K, K), "dbeta")
    _call(tr.ddalpha, qbar, (I, K, K), "ddalpha")
    _call(tr.ddbeta, qbar, (I, K, K, K), "ddbeta")
    if tr.d3alpha is not None:
        _call(tr.d3alpha, qbar, (I, K, K, K), "d3alpha")
    if tr.d3beta is not None:
        _call(tr.d3beta, qbar, (I, K, K, K, K), "d3beta")
    q = np.zeros(I)
    _call(lg.u, q, (I,), "u")
    _call(lg.du, q, (I, I), "du")
    _call(lg.V, q, (), "V")
    _call(lg.dV, q, (I,), "dV")
    if lg.ddu is not None:
        _call(lg.ddu, q, (I, I, I), "ddu")
    if lg.ddV is not None:
        _call(lg.ddV, q, (I, I), "ddV")


def validate_model(spec, sample_points, tol=DERIVATIVE_TOLERANCE):
    """Cross-check all supplied derivatives and the rank of beta.

    For each sample ``qbar`` the Lagrangian callbacks are checked at
    ``q = alpha(qbar) + beta(qbar) @ qbar``, an arbitrary but deterministic
    point in the range of the transformation.
    """
    points = [np.asarray(p, dtype=float) for p in sample_points]
    if not points:
        raise StructureError("sample_points", "at least one point is required")
    I, K = spec.I, spec.K
    tr, lg = spec.transform, spec.lagrangian
    report = ValidationReport(correspondence_case=(2 * I == 3 * K))
    for qbar in points:
        check_shapes(spec, qbar)
        mis = {
            "dalpha": _mismatch(
                _call(tr.dalpha, qbar, (I, K), "dalpha"),
                central_jacobian(tr.alpha, qbar, (I,)),
            ),
            "dbeta": _mismatch(
                _call(tr.dbeta, qbar, (I, K, K), "dbeta"),
                central_jacobian(tr.beta, qbar, (I, K)),
            ),
            "ddalpha": _mismatch(
                _call(tr.ddalpha, qbar, (I, K, K), "ddalpha"),
                central_jacobian(tr.dalpha, qbar, (I, K)),
            ),
            "ddbeta": _mismatch(
                _call(tr.ddbeta, qbar, (I, K, K, K), "ddbeta"),
                central_jacobian(tr.dbeta, qbar, (I, K, K)),
            ),
        }
        if tr.d3alpha is not None:
            mis["d3alpha"] = _mismatch(
                tr.d3alpha(qbar), central_jacobian(tr.ddalpha, qbar, (I, K, K))
            )
        if tr.d3beta is not None:
            mis["d3beta"] = _mismatch(
                tr.d3beta(qbar), central_jacobian(tr.ddbeta, qbar, (I, K, K, K))
            )
        beta = tr.beta(qbar)
        q = tr.alpha(qbar) + beta @ qbar
        mis["du"] = _mismatch(
            _call(lg.du, q, (I, I), "du"), central_jacobian(lg.u, q, (I,))
        )
        mis["dV"] = _mismatch(
            _call(lg.dV, q, (I,), "dV"),
            central_jacobian(lambda x: np.asarray(lg.V(x)), q, ()),
        )
        if lg.ddu is not None:
            mis["ddu"] = _mismatch(lg.ddu(q), central_jacobian(lg.du, q, (I, I)))
        if lg.ddV is not None:
            mis["ddV"] = _mismatch(lg.ddV(q), central_jacobian(lg.dV, q, (I,)))
        sv = np.linalg.svd(beta, compute_uv=False)
        regular = bool(sv[-1] > REGULARITY_THRESHOLD * sv[0])
        passed = regular and all(v < tol for v in mis.values())
        report.points.append(
            PointReport(qbar, mis, float(sv[-1]), float(sv[0]), regular, passed)
        )
    return report


_GRAM_CACHE = {}


def _invert_gram(beta):
    key = (beta.shape, beta.tobytes())
    hit = _GRAM_CACHE.get(key)
    if hit is not None:
        return hit
    gram = beta.T @ beta
    try:
        B = np.linalg.inv(gram)
    except np.linalg.LinAlgError:
        raise SingularityError("Gram matrix beta^T beta is singular") from None
    # Frobenius-norm estimate; bounds the 2-norm condition number from above
    cond = float(np.linalg.norm(gram) * np.linalg.norm(B))
    if not np.isfinite(cond) or cond > GRAM_CONDITION_LIMIT:
        raise SingularityError("Gram matrix beta^T beta is singular", cond)
    B = 0.5 * (B + B.T)
    B.flags.writeable = False
    if len(_GRAM_CACHE) > 256:
        _GRAM_CACHE.clear()
    _GRAM_CACHE[key] = B
    return B


def gram_inverse(spec, qbar, beta=None):
    """Inverse of the Gram matrix ``beta^T beta`` at ``qbar``."""
    if beta is None:
        beta = spec.transform.beta(np.asarray(qbar, dtype=float))
    return _invert_gram(np.ascontiguousarray(beta, dtype=float))
