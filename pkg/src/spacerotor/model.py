"""Physical parameters, state containers, Hamiltonians and the Legendre map.

Two reduced phase spaces are used throughout:

* coincident centres: ``(Pi, alpha, l)``, flattened as 5 floats;
* non-coincident centres: ``(Pi, Gamma, alpha, l)``, flattened as 8 floats.

The flat layouts are what scalar fields, point maps and integrators see.
"""

from dataclasses import dataclass, field

import numpy as np

COINCIDENT = "coincident"
NONCOINCIDENT = "noncoincident"
CASES = (COINCIDENT, NONCOINCIDENT)


def _vec3(v):
    a = np.array(v, dtype=float).reshape(3)
    return a


@dataclass(frozen=True)
class InertiaParams:
    """Augmented principal inertias, rotor inertia and gravity data.

    ``Ibar1`` and ``Ibar2`` already include the rotor's transverse inertia.
    ``gh`` is gravity times the buoyancy/gravity offset; total mass is 1.
    """

    Ibar1: float
    Ibar2: float
    Ibar3: float
    J3: float
    gh: float = 0.0
    chi: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))

    def __post_init__(self):
        object.__setattr__(self, "chi", _vec3(self.chi))
        for name in ("Ibar1", "Ibar2", "Ibar3", "J3"):
            value = getattr(self, name)
            if not (np.isfinite(value) and value > 0.0):
                raise ValueError(f"{name} must be finite and > 0, got {value!r}")
        if not (np.isfinite(self.gh) and self.gh >= 0.0):
            raise ValueError(f"gh must be finite and >= 0, got {self.gh!r}")
        if abs(np.linalg.norm(self.chi) - 1.0) > 1e-12:
            raise ValueError("chi must be a unit vector")

    @property
    def Ibar(self):
        return np.array([self.Ibar1, self.Ibar2, self.Ibar3])


@dataclass(frozen=True)
class VelocityState:
    Omega: np.ndarray
    alpha: float
    alphadot: float

    def __post_init__(self):
        object.__setattr__(self, "Omega", _vec3(self.Omega))


@dataclass(frozen=True)
class ReducedStateC:
    """Reduced state (or tangent) for coincident centres."""

    Pi: np.ndarray
    alpha: float
    l: float

    size = 5

    def __post_init__(self):
        object.__setattr__(self, "Pi", _vec3(self.Pi))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "l", float(self.l))

    def to_array(self):
        return np.array([*self.Pi, self.alpha, self.l])

    @classmethod
    def from_array(cls, x):
        return cls(x[0:3], x[3], x[4])


@dataclass(frozen=True)
class ReducedStateN:
    """Reduced state (or tangent) for non-coincident centres.

    ``Gamma`` is the gravity direction seen from the body.
    """

    Pi: np.ndarray
    Gamma: np.ndarray
    alpha: float
    l: float

    size = 8

    def __post_init__(self):
        object.__setattr__(self, "Pi", _vec3(self.Pi))
        object.__setattr__(self, "Gamma", _vec3(self.Gamma))
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "l", float(self.l))

    def to_array(self):
        return np.array([*self.Pi, *self.Gamma, self.alpha, self.l])

    @classmethod
    def from_array(cls, x):
        return cls(x[0:3], x[3:6], x[6], x[7])


def state_class(case):
    if case == COINCIDENT:
        return ReducedStateC
    if case == NONCOINCIDENT:
        return ReducedStateN
    raise ValueError(f"unknown case {case!r}")


def case_of(state):
    if isinstance(state, ReducedStateC):
        return COINCIDENT
    if isinstance(state, ReducedStateN):
        return NONCOINCIDENT
    raise TypeError(f"not a reduced state: {type(state).__name__}")


def body_rates(Pi, l, p):
    """Carrier angular velocity from momenta."""
    return np.array([Pi[0] / p.Ibar1, Pi[1] / p.Ibar2, (Pi[2] - l) / p.Ibar3])


def legendre_forward(v, p):
    Om = v.Omega
    l = p.J3 * (Om[2] + v.alphadot)
    Pi = (p.Ibar1 * Om[0], p.Ibar2 * Om[1], p.Ibar3 * Om[2] + l)
    return ReducedStateC(Pi, v.alpha, l)


def legendre_inverse(s, p):
    Omega = body_rates(s.Pi, s.l, p)
    return VelocityState(Omega, s.alpha, s.l / p.J3 - Omega[2])


def kinetic_energy(v, p):
    """Lagrangian of the coincident case, in velocity variables."""
    Om = v.Omega
    return 0.5 * (
        p.Ibar1 * Om[0] ** 2
        + p.Ibar2 * Om[1] ** 2
        + p.Ibar3 * Om[2] ** 2
        + p.J3 * (Om[2] + v.alphadot) ** 2
    )


def _h_c(Pi1, Pi2, Pi3, l, p):
    return 0.5 * (Pi1**2 / p.Ibar1 + Pi2**2 / p.Ibar2 + (Pi3 - l) ** 2 / p.Ibar3 + l**2 / p.J3)


def hamiltonian_c(s, p):
    return _h_c(s.Pi[0], s.Pi[1], s.Pi[2], s.l, p)


def hamiltonian_n(s, p):
    return _h_c(s.Pi[0], s.Pi[1], s.Pi[2], s.l, p) + p.gh * float(np.dot(s.Gamma, p.chi))


def grad_hamiltonian_c(s, p):
    """Returns ``(dPi, dalpha, dl)``."""
    dPi = body_rates(s.Pi, s.l, p)
    dl = -(s.Pi[2] - s.l) / p.Ibar3 + s.l / p.J3
    return dPi, 0.0, dl


def grad_hamiltonian_n(s, p):
    """Returns ``(dPi, dGamma, dalpha, dl)``."""
    dPi, dalpha, dl = grad_hamiltonian_c(s, p)
    return dPi, p.gh * p.chi, dalpha, dl


def hamiltonian(s, p):
    """Dispatch on the state type."""
    if isinstance(s, ReducedStateN):
        return hamiltonian_n(s, p)
    return hamiltonian_c(s, p)


def hamiltonian_field(p, case):
    """Hamiltonian as a scalar field on the flat reduced coordinates."""
    cls = state_class(case)
    if cls is ReducedStateC:
        return lambda x: _h_c(x[0], x[1], x[2], x[4], p)
    return lambda x: _h_c(x[0], x[1], x[2], x[7], p) + p.gh * (
        x[3] * p.chi[0] + x[4] * p.chi[1] + x[5] * p.chi[2]
    )
