import numpy as np
import pytest

from spacerotor import hamilton_jacobi as hj
from spacerotor.dynamics import constant_torque
from spacerotor.model import COINCIDENT, NONCOINCIDENT, InertiaParams, ReducedStateC, ReducedStateN

P = InertiaParams(3.0, 2.0, 1.0, 1.0)
PG = InertiaParams(3.0, 2.0, 1.0, 1.0, 1.0, (0.0, 0.0, 1.0))
S_C = ReducedStateC([0.8, -0.5, 1.1], 0.3, 0.6)
S_N = ReducedStateN([0.8, -0.5, 1.1], [0.0, 0.6, 0.8], 0.3, 0.6)


def test_type1_c_examples():
    lhs, rhs = hj.type1_sides_c(np.array([1, 1, 1, 0, 1.0]), P)
    assert hj.type1_residual_c(np.array([1, 1, 1, 0, 1.0]), P) == 0.0
    assert np.allclose(lhs[0:3], [-1 / 2, 1 / 3, 1 / 6], atol=1e-15)
    assert np.array_equal(lhs, rhs)
    lhs, rhs = hj.type1_sides_c(np.array([0, 0, 0, 2.0, 0]), P)
    assert np.array_equal(lhs, np.zeros(5)) and np.array_equal(rhs, np.zeros(5))


def test_type1_n_examples():
    g = np.array([1, 1, 1, 0, 0, 1, 0, 1.0])
    lhs, rhs = hj.type1_sides_n(g, PG)
    assert np.allclose(lhs[0:3], [-1 / 2, 1 / 3, 1 / 6], atol=1e-15)
    assert np.allclose(lhs[3:6], [-1 / 2, 1 / 3, 0], atol=1e-15)
    assert np.array_equal(lhs, rhs)
    hanging = np.array([0, 0, 0, 0, 0, 1, 0, 0.0])
    lhs, rhs = hj.type1_sides_n(hanging, PG)
    assert np.array_equal(lhs, np.zeros(8)) and np.array_equal(rhs, np.zeros(8))


def test_type1_random():
    rng = np.random.default_rng(0)
    for _ in range(200):
        p = InertiaParams(*rng.uniform(0.5, 5, 4), rng.uniform(0, 5), (0.6, 0.0, 0.8))
        assert hj.type1_residual_c(rng.uniform(-3, 3, 5), p) <= 1e-15
        assert hj.type1_residual_n(rng.uniform(-3, 3, 8), p) <= 1e-15


def W(q):
    return float(np.sin(q[0]) * q[1] + q[2] ** 3 * q[3] + np.cos(q[3]) * q[0] * q[2])


Q = np.array([0.3, -0.4, 0.2, 1.1])


def test_closedness_witnesses():
    const = np.array([0.3, -1.2, 0.5, 2.0])
    assert hj.closedness_residual(lambda q: const, Q) < 1e-9
    assert hj.closedness_residual(hj.GradientForm(W), Q) < 1e-6
    nonclosed = lambda q: np.array([q[1], 0.0, 0.0, 0.0])
    assert hj.closedness_residual(nonclosed, Q) == pytest.approx(1.0, abs=1e-6)


def test_closedness_of_reduced_forms():
    for case, G in ((COINCIDENT, None), (NONCOINCIDENT, [0.0, 0.6, 0.8])):
        form = hj.reduced_form_from_generator(W, case, G)
        assert hj.closedness_residual_reduced(form, Q) < 1e-6
    with pytest.raises(ValueError):
        hj.reduced_form_from_generator(W, NONCOINCIDENT)
    # constant body momentum is not closed once pulled into the chart
    twisted = lambda q: np.array([1.0, 0.0, 0.0, q[3], 0.0])
    assert hj.closedness_residual_reduced(twisted, Q) > 1e-3


def test_momentum_level_for_rotor_only_forms():
    form = lambda q: np.array([0.0, 0.0, 0.0, q[3], np.sin(q[3])])
    assert hj.momentum_level_residual(form, Q, [0, 0, 0]) == 0.0
    form = lambda q: np.array([1.0, 0.0, 0.0, q[3], 0.0])
    assert hj.momentum_level_residual(form, np.zeros(4), [1, 0, 0]) == 0.0


@pytest.mark.parametrize("case,p,s", [(COINCIDENT, P, S_C), (NONCOINCIDENT, PG, S_N)])
def test_type2_identity_and_flow(case, p, s):
    lhs, rhs = hj.type2_residual(hj.identity_map, None, s, p)
    assert lhs < 1e-6 and rhs < 1e-6
    flow = hj.flow_point_map(p, case, 0.05, 1e-3)
    lhs, rhs = hj.type2_residual(flow, None, s, p)
    assert lhs < 1e-5 and rhs < 1e-5


@pytest.mark.parametrize("case,p,s", [(COINCIDENT, P, S_C), (NONCOINCIDENT, PG, S_N)])
def test_type2_broken_map_fails_on_both_sides(case, p, s):
    lhs, rhs = hj.type2_residual(hj.scale_pi_map(2.0), None, s, p)
    assert lhs > 1e-2 and rhs > 1e-2


def test_type2_control_lift_is_invisible():
    base = hj.type2_residual_c(hj.identity_map, None, S_C, P)
    lifted = hj.type2_residual_c(hj.identity_map, None, S_C, P, u=constant_torque(0.3))
    assert lifted == pytest.approx(base, abs=1e-15)


def test_type2_flat_state_needs_case():
    with pytest.raises(ValueError):
        hj.type2_residual(hj.identity_map, None, S_C.to_array(), P)
    lhs, _ = hj.type2_residual_n(hj.identity_map, hj.identity_map, S_N.to_array(), PG)
    assert lhs < 1e-6


def test_poisson_map_residual():
    assert hj.poisson_map_residual(hj.identity_map, S_C) < 1e-9
    flow = hj.flow_point_map(PG, NONCOINCIDENT, 0.05, 1e-3)
    assert hj.poisson_map_residual(flow, S_N) < 1e-5
    # doubling Pi doubles one side of {Pi1, Pi2} = -Pi3 but quadruples the other
    broken = hj.poisson_map_residual(hj.scale_pi_map(2.0), S_C)
    assert broken == pytest.approx(2 * np.max(np.abs(S_C.Pi)), rel=1e-6)


def test_equivalence_battery_concordant():
    maps = hj.standard_battery(P, COINCIDENT, flow_times=(0.01,))
    records = hj.type2_equivalence(maps, [S_C], P, COINCIDENT)
    assert [r.map_name for r in records] == ["identity", "flow:0.01", "scale_pi:2"]
    assert all(r.concordant for r in records)
    assert [r.lhs_ok for r in records] == [True, True, False]
