import numpy as np
import pytest

from ostrogradsky import StructureError, drift_report, growth_rate_fit, integrate
from ostrogradsky import gravwave as gw
from ostrogradsky.constraints import build_constraint_chain, lie_derivative

P = gw.ModeParams(c=1.0, k=2.0)


def cos2(t, n):
    """n-th derivative of cos 2t."""
    return np.real((2j) ** n * np.exp(2j * t))


def tcos2(t, n):
    """n-th derivative of t cos 2t."""
    return t * cos2(t, n) + n * cos2(t, n - 1) if n else t * cos2(t, 0)


def test_params_validation():
    with pytest.raises(StructureError):
        gw.ModeParams(c=0.0, k=1.0)
    with pytest.raises(StructureError):
        gw.ModeParams(c=1.0, k=-1.0)


def test_residual_examples():
    t = 0.3
    assert abs(gw.mode_residual(P, *[cos2(t, n) for n in range(5)])) < 1e-12
    assert abs(gw.mode_residual(P, *[tcos2(t, n) for n in range(5)])) < 1e-12
    assert gw.mode_residual(P, 0, 0, 0, 0, 0) == 0


def test_constraint_examples():
    t = 0.3
    assert abs(gw.mode_constraint(P, cos2(t, 2), cos2(t, 3), cos2(t, 1), cos2(t, 0))) < 1e-12
    assert gw.mode_constraint(P, tcos2(0, 2), tcos2(0, 3), tcos2(0, 1), tcos2(0, 0)) == pytest.approx(-8.0)
    assert gw.mode_constraint(P, 0, 0, 0, 0) == 0


def test_wave_helpers_match_derivatives():
    for t in (0.0, 0.7, 2.1):
        np.testing.assert_allclose(gw.plane_wave(P, 1.0, 0.0, t), [cos2(t, n) for n in range(4)], atol=1e-12)
        np.testing.assert_allclose(gw.secular_wave(P, 1.0, t), [tcos2(t, n) for n in range(4)], atol=1e-12)


def test_secular_solves_but_violates(rng):
    system = gw.make_mode_model(P)
    for t in rng.uniform(0.1, 5, 5):
        x = gw.secular_wave(P, 1.0, t)
        h4 = system.rhs(x)[3]
        assert abs(gw.mode_residual(P, *x, h4)) < 1e-10
        assert abs(gw.mode_constraint(P, x[2], x[3], x[1], x[0])) > 1e-3


def test_constraint_is_time_derivative_of_box(rng):
    system = gw.make_mode_model(P)
    for x in rng.uniform(-1, 1, (20, 4)):
        d = lie_derivative(lambda z: gw.box_residual(P, z[0], z[2]), system.rhs, x)
        assert d == pytest.approx(gw.mode_constraint(P, x[2], x[3], x[1], x[0]), abs=1e-6)


def test_energy_conserved_and_indefinite(rng):
    system = gw.make_mode_model(P)
    x0 = rng.uniform(-1, 1, 4)
    traj = integrate(system, x0, 1e-3, 5000)
    assert drift_report(traj)["max_H_drift"] < 1e-8
    values = [system.energy(x) for x in rng.uniform(-1, 1, (50, 4))]
    assert min(values) < 0 < max(values)
    X = rng.uniform(-1, 1, (5, 4))
    np.testing.assert_allclose(system.energies(X), [system.energy(x) for x in X], atol=1e-14)


def test_plane_wave_manifold_invariant(rng):
    system = gw.make_mode_model(P)
    a, b = rng.normal(size=2)
    x0 = gw.plane_wave(P, a, b, 0.0)
    traj = integrate(system, x0, 1e-3, 10000)
    w2 = P.omega**2
    assert np.max(np.abs(traj.states[:, 2] + w2 * traj.states[:, 0])) < 1e-8
    assert np.max(np.abs(traj.states[:, 3] + w2 * traj.states[:, 1])) < 1e-8


def test_free_run_plane_wave():
    traj = integrate(gw.make_mode_model(P), [1, 0, -4, 0], 1e-3, 10000)
    assert np.max(np.abs(traj.states[:, 0] - np.cos(2 * traj.times))) < 1e-6


def test_perturbed_free_run_grows_linearly():
    traj = integrate(gw.make_mode_model(P), [1, 0, -3.99, 0], 1e-3, 100000, record_every=10)
    fit = growth_rate_fit(
        traj, (20, 100), envelope="linear", reference=lambda t: gw.plane_wave(P, 1.0, 0.0, t), period=np.pi
    )
    assert fit["r2"] > 0.99
    assert fit["rate"] > 0
    # closed form: the deviation is 0.0025 t sin 2t plus bounded terms
    t = traj.times[-1]
    exact = np.cos(2 * t) + 0.0025 * t * np.sin(2 * t)
    assert traj.states[-1, 0] == pytest.approx(exact, abs=1e-8)


def test_perturbed_projected_run_is_bounded():
    system = gw.make_mode_model(P)
    traj = integrate(system, [1, 0, -3.99, 0], 1e-3, 20000, mode="projected")
    rep = drift_report(traj)
    assert rep["max_constraint_norm"] < 1e-8
    assert np.max(np.abs(traj.states[:, 2] + 4 * traj.states[:, 0])) < 1e-8
    assert np.max(np.abs(traj.states[:, 0])) < 1.01


def test_mode_chain():
    chain = build_constraint_chain(
        gw.make_mode_model(P), base=[lambda z: gw.mode_constraint(P, z[2], z[3], z[1], z[0])]
    )
    assert chain.exact and chain.closure.closed and chain.closure.level == 3
    np.testing.assert_allclose(chain.closure.coefficients, [[-4.0, 0.0]], atol=1e-12)


def test_zero_wavenumber():
    p = gw.ModeParams(c=2.0, k=0.0)
    system = gw.make_mode_model(p)
    x0 = gw.plane_wave(p, 1.0, 0.5, 0.0)
    traj = integrate(system, x0, 1e-2, 100, mode="projected")
    np.testing.assert_allclose(traj.states[-1], gw.plane_wave(p, 1.0, 0.5, 1.0), atol=1e-12)


@pytest.mark.parametrize("c,k", [(1.0, 1.0), (1.3, 0.7), (2.0, 0.0)])
def test_lifted_model_reproduces_mode_system(c, k, rng):
    from ostrogradsky import hamiltonian, validate_model
    from ostrogradsky.dynamics import canonical_rhs_array

    params = gw.ModeParams(c, k)
    spec = gw.make_mode_spec(params)
    system = gw.make_mode_model(params)
    assert validate_model(spec, rng.uniform(-1, 1, (5, 1))).passed
    for x in rng.uniform(-1, 1, (20, 4)):
        y = gw.canonical_from_mode(params, x)
        assert hamiltonian(spec, y) == pytest.approx(system.energy(x), abs=1e-12)
        np.testing.assert_allclose(
            canonical_rhs_array(spec, y), gw.canonical_from_mode(params, system.rhs(x)), atol=1e-12
        )


def test_lifted_model_momenta_match_constraint_forms():
    # P2 is the box residual and P1 is minus the first constraint
    params = gw.ModeParams(1.0, 2.0)
    x = np.array([0.3, -0.2, 0.5, 0.1])
    y = gw.canonical_from_mode(params, x)
    assert y[3] == pytest.approx(gw.box_residual(params, x[0], x[2]))
    assert y[2] == pytest.approx(-gw.mode_constraint(params, x[2], x[3], x[1], x[0]))
