"""Reduced vector fields, rotor control, attitude reconstruction, integrators.

Control laws are callables ``u(state, t) -> float`` giving the rotor torque.
They receive the *reduced* state, so they cannot depend on the attitude.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import NonFiniteError
from .lie import dexpinv, exp_so3, hat, reorthonormalize
from .model import (
    COINCIDENT,
    ReducedStateC,
    ReducedStateN,
    body_rates,
    hamiltonian,
)


@dataclass(frozen=True)
class FullStateC:
    A: np.ndarray
    reduced: ReducedStateC

    def __post_init__(self):
        object.__setattr__(self, "A", np.array(self.A, dtype=float).reshape(3, 3))

    def to_array(self):
        return np.concatenate([self.A.ravel(), self.reduced.to_array()])

    @classmethod
    def from_array(cls, x):
        return cls(x[0:9], ReducedStateC.from_array(x[9:]))


@dataclass(frozen=True)
class FullStateN:
    A: np.ndarray
    reduced: ReducedStateN

    def __post_init__(self):
        object.__setattr__(self, "A", np.array(self.A, dtype=float).reshape(3, 3))

    def to_array(self):
        return np.concatenate([self.A.ravel(), self.reduced.to_array()])

    @classmethod
    def from_array(cls, x):
        return cls(x[0:9], ReducedStateN.from_array(x[9:]))


FULL_STATES = (FullStateC, FullStateN)


def reduced_part(s):
    return s.reduced if isinstance(s, FULL_STATES) else s


# -- control laws ---------------------------------------------------------------


def no_control(state, t):
    return 0.0


def constant_torque(value):
    value = float(value)

    def u(state, t):
        return value

    return u


def linear_feedback(gain):
    """Rotor torque ``-gain * l``."""
    gain = float(gain)

    def u(state, t):
        return -gain * reduced_part(state).l

    return u


# -- closed-form reduced fields -------------------------------------------------


def _pidot(Pi1, Pi2, Pi3, l, p):
    I1, I2, I3 = p.Ibar1, p.Ibar2, p.Ibar3
    return (
        ((I2 - I3) * Pi2 * Pi3 - I2 * Pi2 * l) / (I2 * I3),
        ((I3 - I1) * Pi3 * Pi1 + I1 * Pi1 * l) / (I3 * I1),
        ((I1 - I2) * Pi1 * Pi2) / (I1 * I2),
    )


def _alphadot(Pi3, l, p):
    return -(Pi3 - l) / p.Ibar3 + l / p.J3


def _rhs_c(x, p):
    Pi1, Pi2, Pi3, _, l = x
    return np.array([*_pidot(Pi1, Pi2, Pi3, l, p), _alphadot(Pi3, l, p), 0.0])


def _rhs_n(x, p):
    Pi1, Pi2, Pi3, G1, G2, G3, _, l = x
    I1, I2, I3 = p.Ibar1, p.Ibar2, p.Ibar3
    c1, c2, c3 = p.chi
    gh = p.gh
    d1, d2, d3 = _pidot(Pi1, Pi2, Pi3, l, p)
    return np.array(
        [
            d1 + gh * (G2 * c3 - G3 * c2),
            d2 + gh * (G3 * c1 - G1 * c3),
            d3 + gh * (G1 * c2 - G2 * c1),
            (I2 * G2 * Pi3 - I3 * G3 * Pi2 - I2 * G2 * l) / (I2 * I3),
            (I3 * G3 * Pi1 - I1 * G1 * Pi3 + I1 * G1 * l) / (I3 * I1),
            (I1 * G1 * Pi2 - I2 * G2 * Pi1) / (I1 * I2),
            _alphadot(Pi3, l, p),
            0.0,
        ]
    )


def vf_reduced_c(s, p):
    """Uncontrolled reduced field, coincident centres."""
    return ReducedStateC.from_array(_rhs_c(s.to_array(), p))


def vf_reduced_n(s, p):
    """Uncontrolled reduced field, non-coincident centres."""
    return ReducedStateN.from_array(_rhs_n(s.to_array(), p))


def vf_reduced(s, p):
    return vf_reduced_n(s, p) if isinstance(s, ReducedStateN) else vf_reduced_c(s, p)


def reduced_rhs(case):
    """Array-level closed-form field ``f(x, p)`` for the given case."""
    return _rhs_c if case == COINCIDENT else _rhs_n


def _torque(u, s, t):
    if u is None:
        return 0.0
    value = float(u(reduced_part(s), t))
    if not np.isfinite(value):
        raise NonFiniteError(f"control law returned {value!r} at t={t}")
    return value


def apply_control(base, u, s, t):
    """Add the rotor torque's vertical lift to a tangent.

    Only the rotor momentum rate changes: ``l_dot -> l_dot + u(s, t)``.
    ``base`` may be a reduced or a full-state tangent.
    """
    torque = _torque(u, s, t)
    if isinstance(base, FULL_STATES):
        return type(base)(base.A, apply_control(base.reduced, u, s, t))
    x = base.to_array()
    x[-1] += torque
    return type(base).from_array(x)


def vf_full(s, p, u=None, t=0.0):
    """Full-state field: ``A_dot = A hat(Omega)`` plus the controlled reduced field."""
    r = s.reduced
    Omega = body_rates(r.Pi, r.l, p)
    Adot = s.A @ hat(Omega)
    red = apply_control(vf_reduced(r, p), u, r, t)
    return type(s)(Adot, red)


def reduced_field(p, u=None):
    """``field(t, s)`` for reduced states of either case."""

    def f(t, s):
        return apply_control(vf_reduced(s, p), u, s, t)

    return f


def full_field(p, u=None):
    def f(t, s):
        return vf_full(s, p, u, t)

    return f


# -- trajectories -----------------------------------------------------------------


@dataclass
class Trajectory:
    """Time-stamped states plus observer columns (one value per sample)."""

    t: np.ndarray
    states: list
    columns: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.states)

    @property
    def final(self):
        return self.states[-1]


def conserved_quantities(p):
    """Observer recording energy, Casimirs and spatial momentum."""
    from .reduction import casimirs, momentum_map

    def observe(s):
        r = reduced_part(s)
        row = {"H": hamiltonian(r, p)}
        c = casimirs(r)
        if isinstance(r, ReducedStateC):
            row["casimir_pi2"] = c[0]
        else:
            row["casimir_pigamma"], row["casimir_gamma2"] = c
        if isinstance(s, FULL_STATES):
            m = momentum_map(s)
            row.update(mu1=m.mu[0], mu2=m.mu[1], mu3=m.mu[2])
            if m.a is not None:
                row.update(a1=m.a[0], a2=m.a[1], a3=m.a[2])
        return row

    return observe


def _record(traj, t, s, observers):
    traj.t.append(t)
    traj.states.append(s)
    for obs in observers:
        for key, value in obs(s).items():
            traj.columns.setdefault(key, []).append(value)


def _finish(traj):
    traj.t = np.array(traj.t)
    traj.columns = {k: np.array(v) for k, v in traj.columns.items()}
    return traj


def _check(y, step):
    if not np.all(np.isfinite(y)):
        raise NonFiniteError(f"integration produced non-finite state at step {step}", step=step)


def integrate_rk4(
    field, s0, dt, steps, observers=(), stride=1, reorthonormalize_every=100, t0=0.0
):
    """Classical fixed-step RK4 on the flat coordinates of ``s0``.

    For full states the attitude is advanced additively and projected back
    onto SO(3) every ``reorthonormalize_every`` steps (0 disables).
    """
    if not dt > 0:
        raise ValueError("dt must be > 0")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    cls = type(s0)
    full = isinstance(s0, FULL_STATES)

    def f(t, y):
        return field(t, cls.from_array(y)).to_array()

    traj = Trajectory([], [])
    _record(traj, t0, s0, observers)
    y = s0.to_array()
    for n in range(1, steps + 1):
        t = t0 + (n - 1) * dt
        k1 = f(t, y)
        k2 = f(t + 0.5 * dt, y + 0.5 * dt * k1)
        k3 = f(t + 0.5 * dt, y + 0.5 * dt * k2)
        k4 = f(t + dt, y + dt * k3)
        y = y + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        _check(y, n)
        if full and reorthonormalize_every and n % reorthonormalize_every == 0:
            y[0:9] = reorthonormalize(y[0:9].reshape(3, 3)).ravel()
        if n % stride == 0 or n == steps:
            _record(traj, t0 + n * dt, cls.from_array(y), observers)
    return _finish(traj)


def _body_velocity(A, Adot):
    M = A.T @ Adot
    return 0.5 * np.array([M[2, 1] - M[1, 2], M[0, 2] - M[2, 0], M[1, 0] - M[0, 1]])


def integrate_lie_rkmk4(field, s0, dt, steps, observers=(), stride=1, t0=0.0):
    """Fourth-order Runge-Kutta-Munthe-Kaas for full states.

    The attitude is only ever updated by right multiplication with
    ``exp_so3`` increments, so it stays on SO(3) without projection. The
    reduced part uses the matching classical RK4 stages.
    """
    if not isinstance(s0, FULL_STATES):
        raise TypeError("integrate_lie_rkmk4 needs a full state")
    if not dt > 0:
        raise ValueError("dt must be > 0")
    if steps < 1:
        raise ValueError("steps must be >= 1")
    cls = type(s0)
    red_cls = type(s0.reduced)

    def stage(t, A, r):
        tan = field(t, cls(A, red_cls.from_array(r)))
        return _body_velocity(A, tan.A), tan.reduced.to_array()

    traj = Trajectory([], [])
    _record(traj, t0, s0, observers)
    A = s0.A.copy()
    r = s0.reduced.to_array()
    for n in range(1, steps + 1):
        t = t0 + (n - 1) * dt
        w1, f1 = stage(t, A, r)
        k1 = w1
        u2 = 0.5 * dt * k1
        w2, f2 = stage(t + 0.5 * dt, A @ exp_so3(u2), r + 0.5 * dt * f1)
        k2 = dexpinv(u2, w2)
        u3 = 0.5 * dt * k2
        w3, f3 = stage(t + 0.5 * dt, A @ exp_so3(u3), r + 0.5 * dt * f2)
        k3 = dexpinv(u3, w3)
        u4 = dt * k3
        w4, f4 = stage(t + dt, A @ exp_so3(u4), r + dt * f3)
        k4 = dexpinv(u4, w4)
        A = A @ exp_so3((dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4))
        r = r + (dt / 6.0) * (f1 + 2.0 * f2 + 2.0 * f3 + f4)
        _check(A, n)
        _check(r, n)
        if n % stride == 0 or n == steps:
            _record(traj, t0 + n * dt, cls(A, red_cls.from_array(r)), observers)
    return _finish(traj)


def reduced_flow_map(p, case, duration, dt, u=None):
    """Time-``duration`` RK4 flow of the reduced field as a map on flat arrays.

    Runs directly on arrays; equivalent to ``integrate_rk4`` with
    ``reduced_field`` but without recording a trajectory.
    """
    rhs = reduced_rhs(case)
    steps = max(1, int(round(abs(duration) / dt)))
    h = duration / steps
    cls = ReducedStateC if case == COINCIDENT else ReducedStateN

    def f(t, y):
        out = rhs(y, p)
        if u is not None:
            out[-1] += _torque(u, cls.from_array(y), t)
        return out

    def flow(x):
        y = np.array(x, dtype=float)
        for n in range(steps):
            t = n * h
            k1 = f(t, y)
            k2 = f(t + 0.5 * h, y + 0.5 * h * k1)
            k3 = f(t + 0.5 * h, y + 0.5 * h * k2)
            k4 = f(t + h, y + h * k3)
            y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        return y

    return flow

