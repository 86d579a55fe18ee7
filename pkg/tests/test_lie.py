import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from spacerotor.errors import DegenerateError, NotSkewError
from spacerotor.lie import (
    dexpinv,
    exp_so3,
    hat,
    is_rotation,
    orthogonality_residual,
    reorthonormalize,
    right_jacobian,
    spatial_momentum,
    vee,
)

vec3 = st.lists(st.floats(-3.0, 3.0), min_size=3, max_size=3).map(np.array)
RZ90 = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])


def test_hat_examples():
    assert np.array_equal(hat([0, 0, 0]), np.zeros((3, 3)))
    assert np.array_equal(hat([1, 2, 3]), [[0, -3, 2], [3, 0, -1], [-2, 1, 0]])
    assert np.array_equal(hat([0, 0, 1]) @ [1, 0, 0], [0, 1, 0])


def test_vee_examples():
    assert np.array_equal(vee(np.zeros((3, 3))), [0, 0, 0])
    assert np.array_equal(vee(hat([1, 2, 3])), [1, 2, 3])
    assert np.array_equal(vee(hat([-4, 0, 7])), [-4, 0, 7])


def test_vee_rejects_non_skew():
    with pytest.raises(NotSkewError):
        vee(np.eye(3))


@given(vec3, vec3)
def test_hat_is_cross_product(a, b):
    assert np.allclose(hat(a) @ b, np.cross(a, b), atol=1e-12)


def test_exp_examples():
    assert np.array_equal(exp_so3([0, 0, 0]), np.eye(3))
    assert np.allclose(exp_so3([0, 0, math.pi / 2]), RZ90, atol=1e-15)
    assert np.allclose(exp_so3([math.pi, 0, 0]), np.diag([1.0, -1.0, -1.0]), atol=1e-15)


@given(vec3)
def test_exp_lands_on_group(v):
    assert is_rotation(exp_so3(v), tol=1e-13)


def test_exp_small_angle_branch_is_continuous():
    v = np.array([1.0, -2.0, 0.5])
    for scale in (1e-7, 1e-8, 1e-9):
        assert np.allclose(exp_so3(scale * v), np.eye(3) + hat(scale * v), atol=1e-15)


def test_right_jacobian_matches_finite_differences():
    v = np.array([0.4, -0.3, 0.9])
    w = np.array([0.2, 0.5, -0.1])
    h = 1e-6
    # exp(v + h w) ~ exp(v) exp(h Jr(v) w)
    lhs = exp_so3(v).T @ (exp_so3(v + h * w) - exp_so3(v - h * w)) / (2 * h)
    assert np.allclose(vee(lhs, tol=1e-8), right_jacobian(v) @ w, atol=1e-8)
    assert np.allclose(right_jacobian(np.zeros(3)), np.eye(3))


def test_dexpinv_inverts_right_jacobian_to_fourth_order():
    w = np.array([0.3, 0.1, -0.2])
    for r in (0.1, 0.05):
        u = r * np.array([1.0, -2.0, 1.5])
        gap = np.linalg.norm(right_jacobian(u) @ dexpinv(u, w) - w)
        assert gap < 0.5 * r**4


def test_reorthonormalize_examples():
    assert np.allclose(reorthonormalize(RZ90), RZ90, atol=1e-14)
    near = np.eye(3) + 1e-6 * hat([1, 1, 1])
    assert orthogonality_residual(reorthonormalize(near)) < 1e-12
    assert np.allclose(reorthonormalize(2 * np.eye(3)), np.eye(3), atol=1e-15)


def test_reorthonormalize_degenerate():
    with pytest.raises(DegenerateError):
        reorthonormalize(np.diag([1.0, 1.0, 0.0]))
    with pytest.raises(DegenerateError):
        reorthonormalize(np.diag([1.0, 1.0, -1.0]))


@settings(max_examples=50)
@given(vec3)
def test_reorthonormalize_is_idempotent(v):
    R = exp_so3(v) + 1e-4 * np.sin(np.arange(9.0)).reshape(3, 3)
    once = reorthonormalize(R)
    assert np.allclose(reorthonormalize(once), once, atol=1e-14)


def test_spatial_momentum_examples():
    assert np.array_equal(spatial_momentum(np.eye(3), [1, 2, 3]), [1, 2, 3])
    assert np.allclose(spatial_momentum(RZ90, [1, 0, 0]), [0, 1, 0])
    assert np.array_equal(spatial_momentum(RZ90, [0, 0, 0]), [0, 0, 0])
