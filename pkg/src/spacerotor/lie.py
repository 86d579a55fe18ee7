"""so(3) / SO(3) primitives.

Vectors are length-3 float arrays, rotations are 3x3 float arrays. Every
function here is pure and returns fresh arrays.
"""

import numpy as np

from .errors import DegenerateError, NotSkewError

SMALL_ANGLE = 1e-8


def hat(v):
    """Skew matrix with ``hat(v) @ w == cross(v, w)``."""
    x, y, z = (float(c) for c in v)
    return np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])


def vee(M, tol=1e-10):
    """Inverse of :func:`hat`.

    Raises:
        NotSkewError: if ``M + M.T`` is not within ``tol`` of zero.
    """
    M = np.asarray(M, dtype=float)
    if M.shape != (3, 3):
        raise NotSkewError(f"expected a 3x3 matrix, got shape {M.shape}")
    if np.linalg.norm(M + M.T) >= tol:
        raise NotSkewError("matrix is not skew-symmetric")
    return np.array([M[2, 1], M[0, 2], M[1, 0]])


def exp_so3(v):
    """Rodrigues formula, with a Taylor branch below ``SMALL_ANGLE``."""
    v = np.asarray(v, dtype=float)
    K = hat(v)
    theta = float(np.linalg.norm(v))
    if theta < SMALL_ANGLE:
        a = 1.0 - theta**2 / 6.0
        b = 0.5 - theta**2 / 24.0
    else:
        a = np.sin(theta) / theta
        b = (1.0 - np.cos(theta)) / theta**2
    return np.eye(3) + a * K + b * (K @ K)


def right_jacobian(v):
    """Right Jacobian of the exponential map.

    For ``A(theta) = exp_so3(theta)`` the body angular velocity is
    ``right_jacobian(theta) @ theta_dot``.
    """
    v = np.asarray(v, dtype=float)
    K = hat(v)
    theta = float(np.linalg.norm(v))
    if theta < SMALL_ANGLE:
        a = 0.5 - theta**2 / 24.0
        b = 1.0 / 6.0 - theta**2 / 120.0
    else:
        a = (1.0 - np.cos(theta)) / theta**2
        b = (theta - np.sin(theta)) / theta**3
    return np.eye(3) - a * K + b * (K @ K)


def dexpinv(u, w):
    """Truncated inverse right-trivialised differential of exp.

    Solves ``exp(u)^-1 d/dt exp(u) = w`` for ``u_dot`` up to the third-order
    commutator, which is what a fourth-order Munthe-Kaas scheme needs.
    """
    uw = np.cross(u, w)
    return w + 0.5 * uw + np.cross(u, uw) / 12.0


def reorthonormalize(R):
    """Nearest rotation in the Frobenius norm (polar projection).

    Raises:
        DegenerateError: for non-positive determinant or rank deficiency.
    """
    R = np.asarray(R, dtype=float)
    det = np.linalg.det(R)
    if not np.isfinite(det) or det <= 0.0:
        raise DegenerateError(f"cannot project matrix with det={det:g} onto SO(3)")
    U, sigma, Vt = np.linalg.svd(R)
    if sigma[-1] <= 1e-12 * sigma[0]:
        raise DegenerateError("matrix is rank deficient")
    return U @ Vt


def orthogonality_residual(R):
    """Frobenius norm of ``R.T @ R - I``."""
    R = np.asarray(R, dtype=float)
    return float(np.linalg.norm(R.T @ R - np.eye(3)))


def is_rotation(R, tol=1e-12):
    R = np.asarray(R, dtype=float)
    return orthogonality_residual(R) < tol and abs(np.linalg.det(R) - 1.0) < tol


def spatial_momentum(A, Pi):
    """Transport body angular momentum to the spatial frame, ``A @ Pi``."""
    return np.asarray(A, dtype=float) @ np.asarray(Pi, dtype=float)
