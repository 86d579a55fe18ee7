"""Lie-Poisson and canonical brackets on the two reduced phase spaces.

A scalar field is any callable taking a flat float array and returning a
float. Fields may expose an exact ``gradient(x)`` method; otherwise
gradients are taken by central differences with step
``1e-6 * max(1, |x_i|)``. Fields must be safe to evaluate concurrently.

Coordinate layouts follow :mod:`spacerotor.model`: ``(Pi, alpha, l)`` and
``(Pi, Gamma, alpha, l)``. The pure factors use ``Pi`` (3 floats),
``(alpha, l)`` (2 floats) and ``(Pi, Gamma)`` (6 floats).

The Jacobi identity holds analytically for every bracket here; it is not
checked numerically.
"""

import numpy as np

from .errors import NonFiniteError
from .model import COINCIDENT, NONCOINCIDENT, ReducedStateC, ReducedStateN, state_class

FD_REL_STEP = 1e-6


def fd_steps(x):
    return FD_REL_STEP * np.maximum(1.0, np.abs(x))


def gradient(F, x):
    """Gradient of ``F`` at ``x``; exact when ``F`` provides one."""
    x = np.asarray(x, dtype=float)
    exact = getattr(F, "gradient", None)
    if exact is not None:
        g = np.asarray(exact(x), dtype=float)
    else:
        steps = fd_steps(x)
        g = np.empty_like(x)
        for i, h in enumerate(steps):
            xp = x.copy()
            xm = x.copy()
            xp[i] += h
            xm[i] -= h
            g[i] = (F(xp) - F(xm)) / (2.0 * h)
    if not np.all(np.isfinite(g)):
        raise NonFiniteError(f"non-finite gradient probe at {x}")
    return g


def jacobian(f, x):
    """Central-difference Jacobian of a vector map, same step rule as ``gradient``."""
    x = np.asarray(x, dtype=float)
    steps = fd_steps(x)
    cols = []
    for i, h in enumerate(steps):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        cols.append((np.asarray(f(xp), dtype=float) - np.asarray(f(xm), dtype=float)) / (2.0 * h))
    J = np.column_stack(cols)
    if not np.all(np.isfinite(J)):
        raise NonFiniteError(f"non-finite Jacobian probe at {x}")
    return J


class CoordinateField:
    """The ``index``-th coordinate function, with its exact gradient."""

    def __init__(self, index, dim, name=None):
        self.index = index
        self.dim = dim
        self.name = name or f"x{index}"

    def __call__(self, x):
        return float(x[self.index])

    def gradient(self, x):
        g = np.zeros(self.dim)
        g[self.index] = 1.0
        return g

    def __repr__(self):
        return f"CoordinateField({self.name})"


_NAMES = {
    COINCIDENT: ("Pi1", "Pi2", "Pi3", "alpha", "l"),
    NONCOINCIDENT: ("Pi1", "Pi2", "Pi3", "Gamma1", "Gamma2", "Gamma3", "alpha", "l"),
}


def coordinates(case):
    """Coordinate functions of the reduced space, in flat order."""
    names = _NAMES[case]
    return [CoordinateField(i, len(names), n) for i, n in enumerate(names)]


class _WithGradient:
    """A field paired with a precomputed gradient at one point."""

    def __init__(self, F, g):
        self._F = F
        self._g = g

    def __call__(self, x):
        return self._F(x)

    def gradient(self, x):
        return self._g


# -- pure bracket formulas on gradient vectors --------------------------------


def _so3(Pi, dF, dK):
    return -float(np.dot(Pi, np.cross(dF, dK)))


def _canonical(dF_alpha, dF_l, dK_alpha, dK_l):
    return dF_alpha * dK_l - dK_alpha * dF_l


def _se3(Pi, Gamma, dF_Pi, dF_Gamma, dK_Pi, dK_Gamma):
    return _so3(Pi, dF_Pi, dK_Pi) - float(
        np.dot(Gamma, np.cross(dF_Pi, dK_Gamma) - np.cross(dK_Pi, dF_Gamma))
    )


# -- public brackets ----------------------------------------------------------


def bracket_so3(F, K, Pi):
    """Rigid-body bracket ``-Pi . (grad F x grad K)`` on so*(3)."""
    Pi = np.asarray(Pi, dtype=float)
    return _so3(Pi, gradient(F, Pi), gradient(K, Pi))


def bracket_canonical_r(F, K, alpha, l):
    """Canonical bracket on T*R, fields take ``(alpha, l)``."""
    x = np.array([alpha, l], dtype=float)
    dF = gradient(F, x)
    dK = gradient(K, x)
    return _canonical(dF[0], dF[1], dK[0], dK[1])


def _as_flat(s, cls):
    if isinstance(s, cls):
        return s.to_array()
    x = np.asarray(s, dtype=float)
    if x.shape != (cls.size,):
        raise ValueError(f"expected {cls.__name__} or a flat array of length {cls.size}")
    return x


def bracket_product_c(F, K, s):
    """Bracket on so*(3) x T*R: rigid-body part plus canonical part."""
    x = _as_flat(s, ReducedStateC)
    dF = gradient(F, x)
    dK = gradient(K, x)
    return _so3(x[0:3], dF[0:3], dK[0:3]) + _canonical(dF[3], dF[4], dK[3], dK[4])


def bracket_se3(F, K, Pi, Gamma):
    """Heavy-top bracket on se*(3); fields take ``(Pi, Gamma)``."""
    x = np.concatenate([np.asarray(Pi, dtype=float), np.asarray(Gamma, dtype=float)])
    dF = gradient(F, x)
    dK = gradient(K, x)
    return _se3(x[0:3], x[3:6], dF[0:3], dF[3:6], dK[0:3], dK[3:6])


def bracket_product_n(F, K, s):
    """Bracket on se*(3) x T*R: heavy-top part plus canonical part."""
    x = _as_flat(s, ReducedStateN)
    dF = gradient(F, x)
    dK = gradient(K, x)
    return _se3(x[0:3], x[3:6], dF[0:3], dF[3:6], dK[0:3], dK[3:6]) + _canonical(
        dF[6], dF[7], dK[6], dK[7]
    )


def product_bracket(case):
    return bracket_product_c if case == COINCIDENT else bracket_product_n


def _resolve(s, case):
    if isinstance(s, ReducedStateC):
        return COINCIDENT, s.to_array()
    if isinstance(s, ReducedStateN):
        return NONCOINCIDENT, s.to_array()
    if case is None:
        raise ValueError("case is required when the state is a flat array")
    return case, _as_flat(s, state_class(case))


def hamiltonian_vf_via_bracket(H, s, case=None):
    """Hamiltonian vector field ``x_i_dot = {x_i, H}`` for every coordinate.

    Returns a tangent of the same state type as ``s``. ``s`` may also be a
    flat array, in which case ``case`` selects the manifold.
    """
    case, x = _resolve(s, case)
    H_fixed = _WithGradient(H, gradient(H, x))
    br = product_bracket(case)
    xdot = np.array([br(c, H_fixed, x) for c in coordinates(case)])
    return state_class(case).from_array(xdot)


def poisson_tensor(s, case=None):
    """Matrix of coordinate brackets ``{x_i, x_j}`` at ``s``."""
    case, x = _resolve(s, case)
    coords = coordinates(case)
    br = product_bracket(case)
    n = len(coords)
    P = np.zeros((n, n))
    for i in range(n):
        for j in range(n):
            P[i, j] = br(coords[i], coords[j], x)
    return P
