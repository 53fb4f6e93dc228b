import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from models import random_model
from ostrogradsky import (
    CanonicalState,
    Jet,
    StructureError,
    accel_from_canonical,
    canonical_from_jet,
    jerk_from_canonical,
    jet_from_canonical,
    lift_q,
    lift_qdot,
    momenta,
)
from ostrogradsky import oscillator as osc

SPEC0 = random_model(0)
UNIT = osc.OscillatorParams.isotropic()
UNIT_SPEC = osc.make_oscillator(UNIT)
unit_box = arrays(np.float64, (8,), elements=st.floats(-1, 1))


def test_lift_q_examples(unit_spec):
    np.testing.assert_array_equal(lift_q(unit_spec, [1, 2], [3, 4]), [5, 2, 3])
    np.testing.assert_array_equal(lift_q(unit_spec, [0, 0], [0, 0]), [0, 0, 0])
    spec2 = osc.make_oscillator(osc.OscillatorParams.isotropic(lam=2.0))
    np.testing.assert_array_equal(lift_q(spec2, [1, 0], [0, 1]), [3, 0, 0])


def test_lift_q_dimension_mismatch(unit_spec):
    with pytest.raises(StructureError):
        lift_q(unit_spec, [1, 2, 3], [0, 0])


def test_lift_qdot_examples(unit_spec):
    jet = Jet([0, 0], [3, 4], [5, 6])
    np.testing.assert_array_equal(lift_qdot(unit_spec, jet), [9, 4, 5])
    np.testing.assert_array_equal(lift_qdot(unit_spec, Jet([0, 0], [0, 0], [0, 0])), [0, 0, 0])
    spec2 = osc.make_oscillator(osc.OscillatorParams.isotropic(lam=2.0))
    np.testing.assert_array_equal(lift_qdot(spec2, Jet([0, 0], [1, 0], [0, 1])), [3, 0, 0])


def test_lift_qdot_needs_acceleration(unit_spec):
    with pytest.raises(StructureError):
        lift_qdot(unit_spec, Jet([0, 0], [1, 1]))


def test_lift_qdot_is_time_derivative(nonlinear, rng):
    # differentiate q(t) = alpha(qbar(t)) + beta(qbar(t)) qbar'(t) along a polynomial path
    c = rng.normal(size=(4, 2))
    path = lambda t: c[0] + c[1] * t + c[2] * t**2 + c[3] * t**3
    dpath = lambda t: c[1] + 2 * c[2] * t + 3 * c[3] * t**2
    ddpath = lambda t: 2 * c[2] + 6 * c[3] * t
    t, h = 0.3, 1e-5
    q = lambda s: lift_q(nonlinear, path(s), dpath(s))
    fd = (q(t + h) - q(t - h)) / (2 * h)
    np.testing.assert_allclose(
        lift_qdot(nonlinear, Jet(path(t), dpath(t), ddpath(t))), fd, atol=1e-8
    )


def test_momenta_P2_example(unit_spec):
    _, P2 = momenta(unit_spec, Jet([0, 0], [3, 4], [5, 6], [0, 0]))
    np.testing.assert_allclose(P2, [5, 9])


def test_momenta_zero(unit_spec):
    P1, P2 = momenta(unit_spec, Jet(np.zeros(2), np.zeros(2), np.zeros(2), np.zeros(2)))
    np.testing.assert_array_equal(P1, 0)
    np.testing.assert_array_equal(P2, 0)


def test_momenta_requires_jerk(unit_spec):
    with pytest.raises(StructureError):
        momenta(unit_spec, Jet([0, 0], [1, 1], [1, 1]))


def test_momenta_on_analytic_solution_match_closed_form(unit, unit_spec):
    jet, _ = osc.analytic_qbar(unit, [0.4, -1.1, 0.7, 0.2, 0.3, 0.5, -0.2, 0.9], 0.0)
    ref = osc.canonical_closed_form(unit, jet)
    P1, P2 = momenta(unit_spec, jet)
    np.testing.assert_allclose(P1, ref.P1, atol=1e-12)
    np.testing.assert_allclose(P2, ref.P2, atol=1e-12)


def test_canonical_from_jet_worked_example(unit_spec):
    jet = Jet([1, 2], [3, 4], [5, 6], [7, 8])
    s = canonical_from_jet(unit_spec, jet)
    np.testing.assert_array_equal(s.Q1, [1, 2])
    np.testing.assert_array_equal(s.Q2, [3, 4])
    np.testing.assert_allclose(s.P2, [5, 9], atol=1e-14)
    np.testing.assert_allclose(s.P1, [-1, -14], atol=1e-14)


def test_accel_examples(unit_spec):
    s = CanonicalState([0, 0], [3, 4], [0, 0], [5, 9])
    np.testing.assert_allclose(accel_from_canonical(unit_spec, s), [5, 6], atol=1e-14)
    np.testing.assert_array_equal(accel_from_canonical(unit_spec, CanonicalState.zeros(2)), 0)


def test_accel_round_trip_nonlinear(nonlinear, rng):
    for x in rng.uniform(-1, 1, (20, 8)):
        s = CanonicalState.from_array(x)
        a = accel_from_canonical(nonlinear, s)
        _, P2 = momenta(nonlinear, Jet(s.Q1, s.Q2, a, np.zeros(2)))
        np.testing.assert_allclose(P2, s.P2, atol=1e-10)


def test_jerk_zero_state(unit_spec):
    np.testing.assert_array_equal(jerk_from_canonical(unit_spec, CanonicalState.zeros(2)), 0)


def test_jerk_matches_analytic_third_derivative(unit, unit_spec):
    cbar = [0.3, 0.8, -0.5, 0.1, 0.2, -0.4, 0.6, 0.3]
    jet, _ = osc.analytic_qbar(unit, cbar, 0.3)
    state = osc.canonical_closed_form(unit, jet)
    np.testing.assert_allclose(jerk_from_canonical(unit_spec, state), jet.qbar_dddot, atol=1e-8)


def test_P2_ignores_jerk(nonlinear, rng):
    y = rng.uniform(-1, 1, 8)
    jet = Jet.from_array(y)
    other = Jet(jet.qbar, jet.qbar_dot, jet.qbar_ddot, jet.qbar_dddot + rng.normal(size=2))
    assert np.array_equal(momenta(nonlinear, jet)[1], momenta(nonlinear, other)[1])


def test_zero_round_trip(unit_spec):
    zero = Jet(np.zeros(2), np.zeros(2), np.zeros(2), np.zeros(2))
    np.testing.assert_array_equal(canonical_from_jet(unit_spec, zero).as_array(), 0)
    np.testing.assert_array_equal(jet_from_canonical(unit_spec, CanonicalState.zeros(2)).as_array(), 0)


@settings(max_examples=100, deadline=None)
@given(unit_box)
def test_round_trip_nonlinear(y):
    jet = Jet.from_array(y)
    back = jet_from_canonical(SPEC0, canonical_from_jet(SPEC0, jet))
    np.testing.assert_allclose(back.as_array(), y, atol=1e-9)
    state = CanonicalState.from_array(y)
    again = canonical_from_jet(SPEC0, jet_from_canonical(SPEC0, state))
    np.testing.assert_allclose(again.as_array(), y, atol=1e-9)


@settings(max_examples=50, deadline=None)
@given(arrays(np.float64, (8,), elements=st.floats(-3, 3)))
def test_oscillator_canonical_matches_closed_form(y):
    jet = Jet.from_array(y)
    np.testing.assert_allclose(
        canonical_from_jet(UNIT_SPEC, jet).as_array(),
        osc.canonical_closed_form(UNIT, jet).as_array(),
        atol=1e-12,
    )


def test_anisotropic_closed_form(rng):
    p = osc.OscillatorParams(1.3, 0.7, 2.0, 1.1, 0.8)
    spec = osc.make_oscillator(p)
    for y in rng.uniform(-1, 1, (10, 8)):
        jet = Jet.from_array(y)
        np.testing.assert_allclose(
            canonical_from_jet(spec, jet).as_array(),
            osc.canonical_closed_form(p, jet).as_array(),
            atol=1e-12,
        )


def test_jet_shape_validation():
    with pytest.raises(StructureError):
        Jet([0, 0], [0, 0, 0])
    with pytest.raises(StructureError):
        CanonicalState([0, 0], [0], [0, 0], [0, 0])
    with pytest.raises(StructureError):
        CanonicalState.from_array(np.zeros(7))


def test_larger_model_round_trip(rng):
    spec = random_model(4, I=5, K=3)
    for y in rng.uniform(-1, 1, (10, 12)):
        back = jet_from_canonical(spec, canonical_from_jet(spec, Jet.from_array(y)))
        np.testing.assert_allclose(back.as_array(), y, atol=1e-9)
