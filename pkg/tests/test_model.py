import dataclasses

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from models import random_model
from ostrogradsky import (
    LagrangianSpec,
    ModelSpec,
    SingularityError,
    StructureError,
    TransformSpec,
    gram_inverse,
    validate_model,
)
from ostrogradsky import oscillator as osc
from ostrogradsky.model import central_jacobian


def constant_beta_spec(beta):
    I, K = beta.shape
    tr = TransformSpec(
        alpha=lambda qb: np.zeros(I),
        beta=lambda qb: beta,
        dalpha=lambda qb: np.zeros((I, K)),
        dbeta=lambda qb: np.zeros((I, K, K)),
        ddalpha=lambda qb: np.zeros((I, K, K)),
        ddbeta=lambda qb: np.zeros((I, K, K, K)),
        I=I,
        K=K,
    )
    lg = LagrangianSpec(
        m=1.0,
        u=lambda q: np.zeros(I),
        V=lambda q: 0.5 * q @ q,
        du=lambda q: np.zeros((I, I)),
        dV=lambda q: q,
        dim=I,
    )
    return ModelSpec(lg, tr)


def test_oscillator_passes_at_origin(unit_spec):
    rep = validate_model(unit_spec, [np.zeros(2)])
    assert rep.passed
    p = rep.points[0]
    assert p.sigma_min == pytest.approx(1.0)
    assert p.sigma_max == pytest.approx(1.0)


def test_singular_values_scale_with_lambda():
    spec = osc.make_oscillator(osc.OscillatorParams.isotropic(lam=2.5))
    p = validate_model(spec, [np.zeros(2)]).points[0]
    assert (p.sigma_min, p.sigma_max) == pytest.approx((2.5, 2.5))


def test_scaled_dV_fails_on_dV(unit_spec):
    lg = unit_spec.lagrangian
    bad = dataclasses.replace(lg, dV=lambda q: 2.0 * lg.dV(q))
    spec = dataclasses.replace(unit_spec, lagrangian=bad)
    rep = validate_model(spec, [np.array([0.3, -0.7])])
    assert not rep.passed
    worst = rep.worst()
    assert worst["dV"] > 1e-5
    # ddV is checked against differences of the corrupted dV, so it fails too
    assert all(v < 1e-5 for k, v in worst.items() if k not in ("dV", "ddV"))


def test_oscillator_random_points_pass(unit_spec, rng):
    rep = validate_model(unit_spec, rng.uniform(-1, 1, (10, 2)))
    assert rep.passed
    assert max(rep.worst().values()) < 1e-5


def test_nonlinear_model_passes(nonlinear, rng):
    rep = validate_model(nonlinear, rng.uniform(-1, 1, (5, 2)))
    assert rep.passed, rep.summary()
    assert {"d3alpha", "d3beta", "ddu", "ddV"} <= set(rep.worst())


def test_wrong_callback_shape_names_field(unit_spec):
    tr = dataclasses.replace(unit_spec.transform, dbeta=lambda qb: np.zeros((3, 2)))
    spec = dataclasses.replace(unit_spec, transform=tr)
    with pytest.raises(StructureError) as exc:
        validate_model(spec, [np.zeros(2)])
    assert exc.value.field == "dbeta"


def test_wrong_point_length(unit_spec):
    with pytest.raises(StructureError) as exc:
        validate_model(unit_spec, [np.zeros(3)])
    assert exc.value.field == "qbar"


def test_empty_sample_points(unit_spec):
    with pytest.raises(StructureError):
        validate_model(unit_spec, [])


def test_mismatched_dimensions(unit_spec):
    lg = dataclasses.replace(unit_spec.lagrangian, dim=4)
    with pytest.raises(StructureError) as exc:
        ModelSpec(lg, unit_spec.transform)
    assert exc.value.field == "I"


def test_nonpositive_mass_rejected(unit_spec):
    with pytest.raises(StructureError):
        dataclasses.replace(unit_spec.lagrangian, m=0.0)


def test_rank_deficient_beta_reported():
    beta = np.array([[1.0, 2.0], [2.0, 4.0], [0.0, 0.0]])
    rep = validate_model(constant_beta_spec(beta), [np.zeros(2)])
    assert not rep.points[0].regular
    assert not rep.passed


def test_correspondence_case_flag(unit_spec):
    assert validate_model(unit_spec, [np.zeros(2)]).correspondence_case
    beta = np.eye(4)[:, :2]
    assert not validate_model(constant_beta_spec(beta), [np.zeros(2)]).correspondence_case


def test_validation_is_deterministic(nonlinear, rng):
    pts = rng.uniform(-1, 1, (4, 2))
    a, b = validate_model(nonlinear, pts), validate_model(nonlinear, pts)
    assert [p.mismatches for p in a.points] == [p.mismatches for p in b.points]
    assert a.summary() == b.summary()


def test_gram_inverse_unit_lambda(unit_spec):
    np.testing.assert_array_equal(gram_inverse(unit_spec, np.zeros(2)), np.eye(2))


def test_gram_inverse_lambda_two():
    spec = osc.make_oscillator(osc.OscillatorParams.isotropic(lam=2.0))
    np.testing.assert_allclose(gram_inverse(spec, np.zeros(2)), 0.25 * np.eye(2), atol=1e-15)


def test_gram_inverse_singular_raises():
    beta = np.array([[1.0, 1.0], [1.0, 1.0], [0.0, 0.0]])
    with pytest.raises(SingularityError) as exc:
        gram_inverse(constant_beta_spec(beta), np.zeros(2))
    assert exc.value.condition is None or exc.value.condition > 1e12


def test_gram_inverse_ill_conditioned_carries_condition():
    beta = np.array([[1.0, 0.0], [0.0, 1e-7], [0.0, 0.0]])
    with pytest.raises(SingularityError) as exc:
        gram_inverse(constant_beta_spec(beta), np.zeros(2))
    assert exc.value.condition > 1e12


@settings(max_examples=60, deadline=None)
@given(arrays(np.float64, (3, 2), elements=st.floats(-1, 1)))
def test_gram_inverse_random_beta(beta):
    sv = np.linalg.svd(beta, compute_uv=False)
    if sv[-1] < 0.05:
        return
    B = gram_inverse(constant_beta_spec(beta.copy()), np.zeros(2))
    np.testing.assert_allclose(B @ (beta.T @ beta), np.eye(2), atol=1e-12)
    np.testing.assert_array_equal(B, B.T)


def test_gram_inverse_on_validated_points(nonlinear, rng):
    pts = rng.uniform(-1, 1, (10, 2))
    assert validate_model(nonlinear, pts).passed
    for qb in pts:
        beta = nonlinear.transform.beta(qb)
        np.testing.assert_allclose(
            gram_inverse(nonlinear, qb) @ (beta.T @ beta), np.eye(2), atol=1e-10
        )


def test_central_jacobian_matches_linear_map():
    A = np.arange(6.0).reshape(2, 3)
    np.testing.assert_allclose(central_jacobian(lambda x: A @ x, np.ones(3), (2,)), A, atol=1e-8)


def test_random_model_dims():
    spec = random_model(3, I=4, K=3)
    assert (spec.I, spec.K, spec.phase_dim) == (4, 3, 12)
