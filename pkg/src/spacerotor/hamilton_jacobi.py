"""Residual evaluators for the reduced Hamilton-Jacobi equations.

Everything lives on the reduced Poisson manifolds ``(Pi, alpha, l)`` and
``(Pi, Gamma, alpha, l)``. Point maps (``eps``, ``lam``) are callables on
flat arrays of the matching length. One-forms on the configuration space
are evaluated in the chart ``q = (theta, alpha)``, where ``theta`` are
exponential coordinates of the attitude about a reference rotation.

Residual scales: pure algebra is exact to round-off, one finite-difference
layer sits near 1e-9, two layers near 1e-6.
"""

from dataclasses import dataclass

import numpy as np

from .brackets import (
    coordinates,
    gradient,
    hamiltonian_vf_via_bracket,
    jacobian,
    product_bracket,
)
from .dynamics import apply_control, reduced_flow_map, reduced_rhs
from .lie import exp_so3, right_jacobian
from .model import (
    COINCIDENT,
    NONCOINCIDENT,
    ReducedStateC,
    ReducedStateN,
    hamiltonian_field,
    state_class,
)

# -- Type I -----------------------------------------------------------------------


def type1_sides_c(gbar, p):
    """Both transcriptions of the coincident Type I equation.

    Returns ``(lhs, rhs)`` as 5-vectors over ``(Pi, alpha, l)``. The left side
    is written in the unreduced covector slots (``gamma_4..gamma_8``), filled
    from ``gbar`` by the component identification; the right side is the
    reduced Hamiltonian field written directly in ``gbar``.
    """
    g = np.zeros(9)  # 1-based: g[1..8]; attitude slots g[1..3] are not read
    g[4], g[5], g[6] = gbar[0], gbar[1], gbar[2]
    g[7], g[8] = gbar[3], gbar[4]
    I1, I2, I3, J3 = p.Ibar1, p.Ibar2, p.Ibar3, p.J3

    lhs = np.array(
        [
            ((I2 - I3) * g[5] * g[6] - I2 * g[5] * g[8]) / (I2 * I3),
            ((I3 - I1) * g[6] * g[4] + I1 * g[4] * g[8]) / (I3 * I1),
            ((I1 - I2) * g[4] * g[5]) / (I1 * I2),
            -(g[6] - g[8]) / I3 + g[8] / J3,
            0.0,
        ]
    )

    b1, b2, b3, _, b5 = (float(v) for v in gbar)
    rhs = np.array(
        [
            ((I2 - I3) * b2 * b3 - I2 * b2 * b5) / (I2 * I3),
            ((I3 - I1) * b3 * b1 + I1 * b1 * b5) / (I3 * I1),
            ((I1 - I2) * b1 * b2) / (I1 * I2),
            -(b3 - b5) / I3 + b5 / J3,
            0.0,
        ]
    )
    return lhs, rhs


def type1_sides_n(gbar, p):
    """Both transcriptions of the non-coincident Type I equation.

    8-vectors over ``(Pi, Gamma, alpha, l)``; unreduced slots are
    ``gamma_7..gamma_14``. The Gamma rows carry ``Gamma x Omega``, so the
    rotor coupling term pairs a Gamma slot with ``l``.
    """
    g = np.zeros(15)  # 1-based: g[1..14]; attitude/translation slots unused
    g[7], g[8], g[9] = gbar[0], gbar[1], gbar[2]
    g[10], g[11], g[12] = gbar[3], gbar[4], gbar[5]
    g[13], g[14] = gbar[6], gbar[7]
    I1, I2, I3, J3 = p.Ibar1, p.Ibar2, p.Ibar3, p.J3
    gh = p.gh
    c1, c2, c3 = p.chi

    lhs = np.array(
        [
            ((I2 - I3) * g[8] * g[9] - I2 * g[8] * g[14]) / (I2 * I3)
            + gh * (g[11] * c3 - g[12] * c2),
            ((I3 - I1) * g[9] * g[7] + I1 * g[7] * g[14]) / (I3 * I1)
            + gh * (g[12] * c1 - g[10] * c3),
            ((I1 - I2) * g[7] * g[8]) / (I1 * I2) + gh * (g[10] * c2 - g[11] * c1),
            (I2 * g[11] * g[9] - I3 * g[12] * g[8] - I2 * g[11] * g[14]) / (I2 * I3),
            (I3 * g[12] * g[7] - I1 * g[10] * g[9] + I1 * g[10] * g[14]) / (I3 * I1),
            (I1 * g[10] * g[8] - I2 * g[11] * g[7]) / (I1 * I2),
            -(g[9] - g[14]) / I3 + g[14] / J3,
            0.0,
        ]
    )

    b1, b2, b3, b4, b5, b6, _, b8 = (float(v) for v in gbar)
    rhs = np.array(
        [
            ((I2 - I3) * b2 * b3 - I2 * b2 * b8) / (I2 * I3) + gh * (b5 * c3 - b6 * c2),
            ((I3 - I1) * b3 * b1 + I1 * b1 * b8) / (I3 * I1) + gh * (b6 * c1 - b4 * c3),
            ((I1 - I2) * b1 * b2) / (I1 * I2) + gh * (b4 * c2 - b5 * c1),
            (I2 * b5 * b3 - I3 * b6 * b2 - I2 * b5 * b8) / (I2 * I3),
            (I3 * b6 * b1 - I1 * b4 * b3 + I1 * b4 * b8) / (I3 * I1),
            (I1 * b4 * b2 - I2 * b5 * b1) / (I1 * I2),
            -(b3 - b8) / I3 + b8 / J3,
            0.0,
        ]
    )
    return lhs, rhs


def type1_residual_c(gbar, p):
    lhs, rhs = type1_sides_c(gbar, p)
    return float(np.max(np.abs(lhs - rhs)))


def type1_residual_n(gbar, p):
    lhs, rhs = type1_sides_n(gbar, p)
    return float(np.max(np.abs(lhs - rhs)))


# -- one-forms and closedness -------------------------------------------------------


def closedness_residual(gamma, q):
    """Max-norm of ``d gamma`` at chart point ``q``.

    ``gamma`` maps chart coordinates to covector components in the same
    chart. The coefficient matrix ``dgamma_j/dq_i - dgamma_i/dq_j`` is
    assembled by central differences.
    """
    J = jacobian(gamma, q)
    return float(np.max(np.abs(J - J.T)))


def reduced_to_chart(gbar_form):
    """Turn a reduced one-form ``(theta, alpha) -> gbar`` into chart components.

    The body momentum pairs with attitude velocities through the right
    Jacobian of exp, so the theta-covector is ``right_jacobian(theta).T @ Pi``;
    the alpha-covector is ``l`` (last slot).
    """

    def gamma(q):
        q = np.asarray(q, dtype=float)
        gbar = np.asarray(gbar_form(q), dtype=float)
        return np.concatenate([right_jacobian(q[0:3]).T @ gbar[0:3], gbar[-1:]])

    return gamma


def closedness_residual_reduced(gbar_form, q):
    return closedness_residual(reduced_to_chart(gbar_form), q)


class GradientForm:
    """Chart one-form ``dW`` of a generating function, by central differences."""

    def __init__(self, W):
        self.W = W

    def __call__(self, q):
        return gradient(self.W, np.asarray(q, dtype=float))


def reduced_form_from_generator(W, case=COINCIDENT, Gamma=None):
    """Reduced one-form whose chart components are ``dW``.

    Inverts :func:`reduced_to_chart`: ``Pi = right_jacobian(theta)^-T dW/dtheta``,
    ``l = dW/dalpha``. The non-coincident case needs a fixed ``Gamma``.
    """
    dW = GradientForm(W)
    if case == NONCOINCIDENT and Gamma is None:
        raise ValueError("Gamma is required for the non-coincident case")

    def gbar_form(q):
        q = np.asarray(q, dtype=float)
        g = dW(q)
        Pi = np.linalg.solve(right_jacobian(q[0:3]).T, g[0:3])
        if case == COINCIDENT:
            return np.array([*Pi, q[3], g[3]])
        return np.array([*Pi, *Gamma, q[3], g[3]])

    return gbar_form


def momentum_level_residual(gbar_form, q, mu, reference=None):
    """Distance of ``A(theta) Pi`` from the momentum level ``mu``.

    Diagnostic for ``Im(gamma)`` lying in a momentum level set. Only the
    ``mu = 0`` family (forms depending on alpha alone) is known to be exact.
    """
    q = np.asarray(q, dtype=float)
    R = np.eye(3) if reference is None else np.asarray(reference, dtype=float)
    A = R @ exp_so3(q[0:3])
    Pi = np.asarray(gbar_form(q), dtype=float)[0:3]
    return float(np.max(np.abs(A @ Pi - np.asarray(mu, dtype=float))))


# -- Type II -----------------------------------------------------------------------


def _flat(s, case):
    if isinstance(s, (ReducedStateC, ReducedStateN)):
        return s.to_array()
    return np.asarray(s, dtype=float)


def _case(s, case):
    if isinstance(s, ReducedStateC):
        return COINCIDENT
    if isinstance(s, ReducedStateN):
        return NONCOINCIDENT
    if case is None:
        raise ValueError("case is required for flat-array states")
    return case


def _base_projected_field(y, p, case, u, t):
    """Controlled reduced field at ``y`` with the rotor torque's vertical lift removed.

    The lift is vertical, so the base projection in the Type II equations
    annihilates it and only the Hamiltonian part survives.
    """
    cls = state_class(case)
    Y = cls.from_array(y)
    controlled = apply_control(cls.from_array(reduced_rhs(case)(y, p)), u, Y, t).to_array()
    lift = apply_control(cls.from_array(np.zeros(cls.size)), u, Y, t).to_array()
    return controlled - lift


def _rk4_step(f, x, h):
    k1 = f(x)
    k2 = f(x + 0.5 * h * k1)
    k3 = f(x + 0.5 * h * k2)
    k4 = f(x + h * k3)
    return x + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def type2_residual(eps, lam, s, p, case=None, u=None, t=0.0, tau=1e-3):
    """Dual residuals for the reduced Type II equation.

    ``lhs_res`` is the linearised form
    ``|D eps(s) X_{h.eps}(s) - D lam(eps(s)) X(eps(s))|``, where
    ``X_{h.eps}`` comes from the product bracket with a finite-difference
    gradient of ``h . eps`` and ``X`` is the controlled reduced field seen
    through the base projection.

    ``rhs_res`` evaluates the Type II equation along a curve: the integral
    curve of ``X_{h.eps}`` through ``s`` is advanced by ``+-tau``, pushed
    through ``eps``, and its central-difference velocity is compared with
    the closed-form ``X_h`` at ``eps(s)``.

    ``lam=None`` means the identity. Returns ``(lhs_res, rhs_res)``.
    """
    case = _case(s, case)
    x = _flat(s, case)
    H = hamiltonian_field(p, case)

    def pulled_back(z):
        return H(eps(z))

    def X_pulled(z):
        return hamiltonian_vf_via_bracket(pulled_back, z, case).to_array()

    y = np.asarray(eps(x), dtype=float)

    X_at_x = X_pulled(x)
    D_eps = jacobian(eps, x)
    X_tilde = _base_projected_field(y, p, case, u, t)
    D_lam = np.eye(len(y)) if lam is None else jacobian(lam, y)
    lhs_res = float(np.max(np.abs(D_eps @ X_at_x - D_lam @ X_tilde)))

    forward = _rk4_step(X_pulled, x, tau)
    backward = _rk4_step(X_pulled, x, -tau)
    velocity = (np.asarray(eps(forward)) - np.asarray(eps(backward))) / (2.0 * tau)
    rhs_res = float(np.max(np.abs(velocity - reduced_rhs(case)(y, p))))
    return lhs_res, rhs_res


def type2_residual_c(eps, lam, s, p, u=None, t=0.0, tau=1e-3):
    return type2_residual(eps, lam, s, p, COINCIDENT, u, t, tau)


def type2_residual_n(eps, lam, s, p, u=None, t=0.0, tau=1e-3):
    return type2_residual(eps, lam, s, p, NONCOINCIDENT, u, t, tau)


class _RowField:
    """``x_i . eps`` with its gradient taken from a precomputed Jacobian row."""

    def __init__(self, eps, index, row):
        self._eps = eps
        self._index = index
        self._row = row

    def __call__(self, x):
        return float(self._eps(x)[self._index])

    def gradient(self, x):
        return self._row


def poisson_map_residual(eps, s, case=None):
    """Max over coordinate pairs of ``|{F.eps, G.eps}(s) - {F, G}(eps(s))|``."""
    case = _case(s, case)
    x = _flat(s, case)
    y = np.asarray(eps(x), dtype=float)
    D = jacobian(eps, x)
    br = product_bracket(case)
    coords = coordinates(case)
    pulled = [_RowField(eps, i, D[i]) for i in range(len(coords))]
    worst = 0.0
    for i in range(len(coords)):
        for j in range(i + 1, len(coords)):
            gap = br(pulled[i], pulled[j], x) - br(coords[i], coords[j], y)
            worst = max(worst, abs(gap))
    return float(worst)


# -- standard map battery -------------------------------------------------------------


@dataclass(frozen=True)
class PointMap:
    name: str
    fn: object
    poisson: bool

    def __call__(self, x):
        return self.fn(x)


def identity_map(x):
    return np.array(x, dtype=float)


def scale_pi_map(factor):
    """``Pi -> factor * Pi``; not a Poisson map unless ``factor == 1``."""

    def f(x):
        y = np.array(x, dtype=float)
        y[0:3] *= factor
        return y

    return f


def flow_point_map(p, case, duration, dt):
    return reduced_flow_map(p, case, duration, dt)


def standard_battery(p, case, flow_times=(0.01, 0.05, 0.1), flow_dt=1e-3, scale=2.0):
    """Identity, short reduced flows, and a broken scaling map."""
    maps = [PointMap("identity", identity_map, True)]
    for tf in flow_times:
        maps.append(PointMap(f"flow:{tf:g}", flow_point_map(p, case, tf, flow_dt), True))
    maps.append(PointMap(f"scale_pi:{scale:g}", scale_pi_map(scale), scale == 1.0))
    return maps


@dataclass(frozen=True)
class EquivalenceRecord:
    case: str
    map_name: str
    point: int
    lhs_res: float
    rhs_res: float
    tol: float

    @property
    def lhs_ok(self):
        return self.lhs_res < self.tol

    @property
    def rhs_ok(self):
        return self.rhs_res < self.tol

    @property
    def concordant(self):
        return self.lhs_ok == self.rhs_ok


def type2_equivalence(maps, states, p, case, tol=1e-4, u=None):
    """Run every map at every state; one record per pair."""
    records = []
    for m in maps:
        for k, s in enumerate(states):
            lhs, rhs = type2_residual(m, None, s, p, case, u)
            records.append(EquivalenceRecord(case, m.name, k, lhs, rhs, tol))
    return records

