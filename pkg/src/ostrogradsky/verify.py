"""Numerical self-checks for the built-in models, used by ``ostrogradsky verify``."""

from dataclasses import dataclass

import numpy as np

from . import gravwave as gw
from . import oscillator as osc
from .constraints import build_constraint_chain, constraint_matrix, lie_derivative
from .dynamics import canonical_rhs_array, hamiltonian, hamiltonian_gradient
from .integrate import drift_report, integrate
from .kinematics import CanonicalState, Jet, canonical_from_jet, jet_from_canonical
from .model import validate_model
from .system import CanonicalSystem


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    limit: float

    def line(self):
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.value:.3e} (limit {self.limit:.1e})"


def _check(name, value, limit):
    value = float(value)
    return Check(name, bool(np.isfinite(value) and value < limit), value, limit)


def fd_gradient(fn, x, rel=1e-5):
    """Central differences of a scalar function."""
    g = np.empty_like(x)
    for i in range(x.size):
        h = rel * max(1.0, abs(x[i]))
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (fn(x + e) - fn(x - e)) / (2 * h)
    return g


def gradient_error(spec, states):
    """Worst relative mismatch between the exact gradient and central differences."""
    worst = 0.0
    for x in states:
        exact = hamiltonian_gradient(spec, x)
        exact = np.concatenate([exact.dQ1, exact.dQ2, exact.dP1, exact.dP2])
        fd = fd_gradient(lambda z: hamiltonian(spec, z), x)
        worst = max(worst, np.max(np.abs(exact - fd)) / max(1.0, np.max(np.abs(exact))))
    return worst


def round_trip_error(spec, jets):
    worst = 0.0
    for y in jets:
        jet = Jet.from_array(y)
        back = jet_from_canonical(spec, canonical_from_jet(spec, jet)).as_array()
        worst = max(worst, np.max(np.abs(back - y)))
        state = CanonicalState.from_array(y)
        again = canonical_from_jet(spec, jet_from_canonical(spec, state)).as_array()
        worst = max(worst, np.max(np.abs(again - y)))
    return worst


def verify_oscillator(params, seed=0, spec=None):
    rng = np.random.default_rng(seed)
    spec = spec or osc.make_oscillator(params)
    K = spec.K
    checks = []

    report = validate_model(spec, rng.uniform(-1, 1, (10, K)))
    checks.append(_check("derivative callbacks", max(report.worst().values()), 1e-5))
    checks[-1].passed = checks[-1].passed and report.passed

    states = rng.uniform(-1, 1, (100, 4 * K))
    checks.append(_check("exact gradient vs differences", gradient_error(spec, states), 1e-6))
    checks.append(_check("jet/canonical round trip", round_trip_error(spec, states), 1e-9))

    err = 0.0
    for x in states[:20]:
        err = max(err, abs(hamiltonian(spec, x) - osc.hamiltonian_closed_form(params, x)))
        rhs = canonical_rhs_array(spec, x)
        err = max(err, np.max(np.abs(rhs - osc.canonical_equations_closed_form(params, x))))
    checks.append(_check("closed-form Hamiltonian and equations", err, 1e-10))

    chain = build_constraint_chain(spec)
    checks.append(
        Check("constraint chain closure level", chain.closure.closed, chain.closure.level, 4 * K + 1)
    )

    if params.is_isotropic:
        system = CanonicalSystem(spec)
        cs = osc.isotropic_constraint_set(params)
        lam = params.lam
        err = 0.0
        for x in states[:20]:
            phi = cs.values(x)
            d4 = lie_derivative(lambda z: cs.values(z)[3], system.rhs, x)
            err = max(err, abs(lam * d4 - (phi[2] - phi[0])))
        checks.append(_check("closure identity", err, 1e-8))
        C = constraint_matrix(cs, states[0])
        checks.append(
            _check("bracket matrix", np.max(np.abs(C - osc.isotropic_bracket_matrix(params))), 1e-10)
        )
        x0 = osc.state_from_cbar(spec, params, np.array([1.0, 0, 0, 0, 0, 0, 0, 0]))
        traj = integrate(system, x0, 1e-3, 10000, mode="projected", constraints=cs)
        rep = drift_report(traj)
        checks.append(_check("projected run constraint residual", rep["max_constraint_norm"], 1e-8))
        checks.append(
            _check("projected run energy drift", rep["max_H_drift"] / max(1.0, abs(traj.H_values[0])), 1e-6)
        )

    return checks


def verify_mode(params, seed=0):
    checks = []
    w = params.omega
    system = gw.make_mode_model(params)
    rng = np.random.default_rng(seed)

    # plane and secular waves both solve the fourth-order equation
    worst = 0.0
    for t in rng.uniform(0, 5, 10):
        for x in (gw.plane_wave(params, 1.0, 0.5, t), gw.secular_wave(params, 1.0, t)):
            worst = max(worst, abs(gw.mode_residual(params, *x, float(system.rhs(x)[3]))))
    checks.append(_check("mode residual on plane and secular waves", worst, 1e-10))

    if w > 0:
        x = gw.secular_wave(params, 1.0, 0.0)
        checks.append(
            Check(
                "secular wave violates the constraint",
                abs(gw.mode_constraint(params, x[2], x[3], x[1], x[0])) > 1e-6,
                abs(gw.mode_constraint(params, x[2], x[3], x[1], x[0])),
                1e-6,
            )
        )

    err = 0.0
    for x in rng.uniform(-1, 1, (10, 4)):
        d = lie_derivative(lambda z: gw.box_residual(params, z[0], z[2]), system.rhs, x)
        err = max(err, abs(d - gw.mode_constraint(params, x[2], x[3], x[1], x[0])))
    checks.append(_check("constraint is the derivative of the box residual", err, 1e-6))

    spec = gw.make_mode_spec(params)
    states = rng.uniform(-1, 1, (100, 4))
    checks.append(_check("exact gradient vs differences", gradient_error(spec, states), 1e-6))
    checks.append(_check("jet/canonical round trip", round_trip_error(spec, states), 1e-9))
    err = 0.0
    for x in states[:20]:
        y = gw.canonical_from_mode(params, x)
        err = max(err, abs(hamiltonian(spec, y) - system.energy(x)))
        err = max(err, np.max(np.abs(canonical_rhs_array(spec, y) - gw.canonical_from_mode(params, system.rhs(x)))))
    checks.append(_check("canonical form matches the mode system", err, 1e-10))

    x0 = gw.plane_wave(params, 1.0, 0.0, 0.0)
    traj = integrate(system, x0, 1e-3, 10000)
    ref = np.array([gw.plane_wave(params, 1.0, 0.0, t) for t in traj.times])
    checks.append(_check("plane wave preserved", np.max(np.abs(traj.states - ref)), 1e-6))

    x0 = x0 + np.array([0.0, 0.0, 0.01, 0.0])
    traj = integrate(system, x0, 1e-3, 10000, mode="projected")
    box = np.max(np.abs(traj.states[:, 2] + w * w * traj.states[:, 0]))
    checks.append(_check("projected run stays on the plane-wave manifold", box, 1e-8))
    return checks
