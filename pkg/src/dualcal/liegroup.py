"""SE(3)/se(3) primitives: hat/vee, exp/log, adjoint and differential Jacobians.

Twist convention used everywhere in this package: a twist is a length-6
vector ``[wx, wy, wz, rx, ry, rz]`` with the rotation part first (radians
when exponentiated with a unit joint value) and the translation part in
meters.  A pose is a plain 4x4 numpy array on SE(3).

The two differential Jacobians ``left_jacobian`` and ``joint_jacobian``
map additive twist increments to the left-trivialized derivative of the
exponential, i.e. ``vee(d exp(xi^) * exp(-xi^)) = J(xi) dxi``.
"""

import numpy as np

from .errors import NearPiRotationError, StructureError

# Below this rotation angle the exp/log coefficient formulas switch to
# Taylor expansions.  Their cancellation errors are damped by matching
# powers of the skew matrix, so a tiny threshold suffices.
SMALL_ANGLE = 1e-5

# The differential-Jacobian coefficients multiply powers of the full
# algebra adjoint, whose translation block is O(1), so their cancellation
# errors (~1e-16/theta^4 for the Omega^3 term) are not damped; the Taylor
# branch must take over much earlier.  At 0.08 both branches carry
# <= ~1e-12 absolute error.
JACOBIAN_SMALL_ANGLE = 8e-2

_PI_MARGIN = 1e-6


def skew(w):
    """3-vector -> 3x3 skew-symmetric matrix."""
    return np.array([
        [0.0, -w[2], w[1]],
        [w[2], 0.0, -w[0]],
        [-w[1], w[0], 0.0],
    ])


def unskew(W):
    """Inverse of :func:`skew` (reads entries, no arithmetic)."""
    return np.array([W[2, 1], W[0, 2], W[1, 0]])


def hat(xi):
    """Twist coordinates -> 4x4 se(3) matrix."""
    xi = np.asarray(xi, dtype=float)
    H = np.zeros((4, 4))
    H[:3, :3] = skew(xi[:3])
    H[:3, 3] = xi[3:]
    return H


def vee(M):
    """4x4 se(3) matrix -> twist coordinates.

    Raises StructureError if the bottom row is nonzero or the upper-left
    block is not skew-symmetric (tolerance 1e-9).
    """
    M = np.asarray(M, dtype=float)
    if M.shape != (4, 4):
        raise StructureError(f"expected 4x4 matrix, got {M.shape}")
    if np.abs(M[3, :]).max() > 1e-9:
        raise StructureError("bottom row of a twist matrix must be zero")
    if np.abs(M[:3, :3] + M[:3, :3].T).max() > 1e-9:
        raise StructureError("rotation block of a twist matrix must be skew-symmetric")
    return np.concatenate([unskew(M[:3, :3]), M[:3, 3]])


def make_pose(R, t):
    T = np.eye(4)
    T[:3, :3] = R
    T[:3, 3] = t
    return T


def pose_inv(T):
    R = T[:3, :3]
    return make_pose(R.T, -R.T @ T[:3, 3])


def is_pose(T, tol=1e-9):
    T = np.asarray(T)
    if T.shape != (4, 4):
        return False
    R = T[:3, :3]
    ortho = np.linalg.norm(R.T @ R - np.eye(3)) < tol
    return ortho and np.linalg.det(R) > 0 and np.allclose(T[3], [0, 0, 0, 1])


def apply_pose(T, points):
    """Transform one point (3,) or a stack of points (N, 3)."""
    p = np.asarray(points, dtype=float)
    if p.ndim == 1:
        return T[:3, :3] @ p + T[:3, 3]
    return p @ T[:3, :3].T + T[:3, 3]


def _so3_coeffs(theta):
    # a = sin(t)/t, b = (1-cos(t))/t^2, c = (t-sin(t))/t^3
    if theta < SMALL_ANGLE:
        t2 = theta * theta
        a = 1.0 - t2 / 6.0 + t2 * t2 / 120.0
        b = 0.5 - t2 / 24.0 + t2 * t2 / 720.0
        c = 1.0 / 6.0 - t2 / 120.0 + t2 * t2 / 5040.0
    else:
        a = np.sin(theta) / theta
        b = (1.0 - np.cos(theta)) / (theta * theta)
        c = (theta - np.sin(theta)) / (theta ** 3)
    return a, b, c


def exp_so3(w):
    """Rodrigues formula for a rotation vector."""
    w = np.asarray(w, dtype=float)
    theta = np.linalg.norm(w)
    a, b, _ = _so3_coeffs(theta)
    W = skew(w)
    return np.eye(3) + a * W + b * (W @ W)


def log_so3(R):
    """Rotation matrix -> rotation vector; angle must stay below pi."""
    cos_theta = np.clip((np.trace(R) - 1.0) / 2.0, -1.0, 1.0)
    theta = np.arccos(cos_theta)
    if theta >= np.pi - _PI_MARGIN:
        raise NearPiRotationError(
            f"rotation angle {theta:.9f} within {_PI_MARGIN} of pi; logarithm unstable")
    v = unskew(R - R.T)
    if theta < SMALL_ANGLE:
        t2 = theta * theta
        scale = 0.5 + t2 / 12.0 + 7.0 * t2 * t2 / 720.0
    else:
        scale = theta / (2.0 * np.sin(theta))
    return scale * v


def exp_se3(xi):
    """Exponential map se(3) -> SE(3)."""
    xi = np.asarray(xi, dtype=float)
    w, rho = xi[:3], xi[3:]
    theta = np.linalg.norm(w)
    a, b, c = _so3_coeffs(theta)
    W = skew(w)
    W2 = W @ W
    R = np.eye(3) + a * W + b * W2
    V = np.eye(3) + b * W + c * W2
    return make_pose(R, V @ rho)


def log_se3(T):
    """Logarithm map SE(3) -> twist coordinates.

    Raises NearPiRotationError when the rotation angle is within 1e-6 of
    pi; callers decide how to recover (calibration increments are small,
    so this path is unreachable in normal operation).
    """
    T = np.asarray(T, dtype=float)
    w = log_so3(T[:3, :3])
    theta = np.linalg.norm(w)
    W = skew(w)
    if theta < SMALL_ANGLE:
        t2 = theta * theta
        d = 1.0 / 12.0 + t2 / 720.0 + t2 * t2 / 30240.0
    else:
        d = 1.0 / (theta * theta) - (1.0 + np.cos(theta)) / (2.0 * theta * np.sin(theta))
    Vinv = np.eye(3) - 0.5 * W + d * (W @ W)
    return np.concatenate([w, Vinv @ T[:3, 3]])


def rotation_angle(R):
    """Angle of a rotation matrix in [0, pi].

    Same value as arccos((tr(R)-1)/2) but evaluated through atan2 of the
    skew part: arccos alone cannot resolve angles below ~1e-8 rad in
    double precision.
    """
    s = 0.5 * np.linalg.norm(unskew(R - R.T))
    c = np.clip((np.trace(R) - 1.0) / 2.0, -1.0, 1.0)
    return float(np.arctan2(min(s, 1.0), c))


def adjoint(T):
    """6x6 adjoint of a pose: [[R, 0], [t^ R, R]]."""
    R = T[:3, :3]
    t = T[:3, 3]
    Ad = np.zeros((6, 6))
    Ad[:3, :3] = R
    Ad[3:, :3] = skew(t) @ R
    Ad[3:, 3:] = R
    return Ad


def ad(xi):
    """6x6 algebra adjoint of a twist: [[w^, 0], [rho^, w^]]."""
    xi = np.asarray(xi, dtype=float)
    A = np.zeros((6, 6))
    W = skew(xi[:3])
    A[:3, :3] = W
    A[3:, 3:] = W
    A[3:, :3] = skew(xi[3:])
    return A


def left_jacobian(xi):
    """Differential of the exponential map at ``xi``.

    Closed form: I + c2*O + c3*O^2 + c4*O^3 + c5*O^4 with O = ad(xi) and
    trigonometric coefficients in theta = |w|; equal to the series
    sum_k O^k/(k+1)!.  Taylor fallback below JACOBIAN_SMALL_ANGLE.
    """
    xi = np.asarray(xi, dtype=float)
    theta = np.linalg.norm(xi[:3])
    if theta < JACOBIAN_SMALL_ANGLE:
        t2 = theta * theta
        t4 = t2 * t2
        t6 = t4 * t2
        c2 = 0.5 - t4 / 720.0 + t6 / 20160.0
        c3 = 1.0 / 6.0 - t4 / 5040.0 + t6 / 181440.0
        c4 = 1.0 / 24.0 - t2 / 360.0 + t4 / 13440.0 - t6 / 907200.0
        c5 = 1.0 / 120.0 - t2 / 2520.0 + t4 / 120960.0 - t6 / 9979200.0
    else:
        s, co = np.sin(theta), np.cos(theta)
        t2 = theta * theta
        c2 = (4.0 - theta * s - 4.0 * co) / (2.0 * t2)
        c3 = (4.0 * theta - 5.0 * s + theta * co) / (2.0 * t2 * theta)
        c4 = (2.0 - theta * s - 2.0 * co) / (2.0 * t2 * t2)
        c5 = (2.0 * theta - 3.0 * s + theta * co) / (2.0 * t2 * t2 * theta)
    O = ad(xi)
    O2 = O @ O
    return np.eye(6) + c2 * O + c3 * O2 + c4 * (O2 @ O) + c5 * (O2 @ O2)


def joint_jacobian(xi, q):
    """Differential of ``exp(xi^ q)`` with respect to the twist at fixed q.

    Equals q * left_jacobian(q * xi): the series in ad(q*xi) from the
    definite-integral expansion times the chain-rule factor q.  Vanishes
    linearly as q -> 0 (a joint at zero contributes nothing).
    """
    return q * left_jacobian(q * np.asarray(xi, dtype=float))
