"""Consolidated dual-arm error model.

The closed-loop chain A X B = Y C Z is rearranged to predict the
measurable transform B from the full parameter set: the coordinate
twists xi_x, xi_y, xi_z and both arms' joint twists.  The per-sample
analytical Jacobian maps additive increments of all parameters to the
left-trivialized residual; columns follow the layout
[xi_x, xi_y, xi_z, xi_a^1..n, xi_c^1..n].
"""

from dataclasses import dataclass, field

import numpy as np

from . import liegroup as lie
from .errors import StructureError, ValidationError
from .kinematics import RobotModel, forward_kinematics
from .numerics import numeric_rank


@dataclass
class DualArmSystem:
    """Two arms plus the three static coordinate transforms.

    X: flange->sensor of the sensor arm, Y: base->base, Z: flange->tool
    of the tool arm.  Both arms share the same joint count.
    """

    sensor_arm: RobotModel
    tool_arm: RobotModel
    X: np.ndarray
    Y: np.ndarray
    Z: np.ndarray

    def __post_init__(self):
        if self.sensor_arm.n != self.tool_arm.n:
            raise ValidationError("both arms must have the same joint count")
        for name in ("X", "Y", "Z"):
            T = np.asarray(getattr(self, name), dtype=float)
            if not lie.is_pose(T):
                raise ValidationError(f"{name} is not a valid pose")
            setattr(self, name, T)

    @property
    def n(self):
        return self.sensor_arm.n

    def copy(self):
        return DualArmSystem(self.sensor_arm.copy(), self.tool_arm.copy(),
                             self.X.copy(), self.Y.copy(), self.Z.copy())


@dataclass
class MeasurementSample:
    """Joint readings of both arms plus the measured tool pose B*."""

    q_a: np.ndarray
    q_c: np.ndarray
    B_meas: np.ndarray

    def __post_init__(self):
        self.q_a = np.asarray(self.q_a, dtype=float)
        self.q_c = np.asarray(self.q_c, dtype=float)
        self.B_meas = np.asarray(self.B_meas, dtype=float)
        if not lie.is_pose(self.B_meas):
            raise ValidationError("B_meas is not a valid pose")


@dataclass
class CalibrationState:
    """Full parameter vector of the unified calibration.

    Coordinate twists plus 2n joint twists are optimized (dimension
    12n+18); the two zero-offset twists are fixed at their nominal
    values and never enter the parameter vector.
    """

    xi_x: np.ndarray
    xi_y: np.ndarray
    xi_z: np.ndarray
    joints_a: np.ndarray  # (n, 6)
    joints_c: np.ndarray  # (n, 6)
    xi_st_a: np.ndarray
    xi_st_c: np.ndarray

    def __post_init__(self):
        for name in ("xi_x", "xi_y", "xi_z", "xi_st_a", "xi_st_c"):
            setattr(self, name, np.asarray(getattr(self, name), dtype=float).reshape(6))
        self.joints_a = np.atleast_2d(np.asarray(self.joints_a, dtype=float))
        self.joints_c = np.atleast_2d(np.asarray(self.joints_c, dtype=float))
        if self.joints_a.shape != self.joints_c.shape or self.joints_a.shape[1] != 6:
            raise ValidationError("joint twist blocks must both be (n, 6)")

    @property
    def n(self):
        return self.joints_a.shape[0]

    @property
    def dim(self):
        return 12 * self.n + 18

    @classmethod
    def from_system(cls, system):
        return cls(
            xi_x=lie.log_se3(system.X),
            xi_y=lie.log_se3(system.Y),
            xi_z=lie.log_se3(system.Z),
            joints_a=system.sensor_arm.joint_twists.copy(),
            joints_c=system.tool_arm.joint_twists.copy(),
            xi_st_a=system.sensor_arm.zero_offset.copy(),
            xi_st_c=system.tool_arm.zero_offset.copy(),
        )

    def to_system(self, names=("sensor_arm", "tool_arm")):
        arm_a = RobotModel(names[0], self.joints_a.copy(), self.xi_st_a.copy())
        arm_c = RobotModel(names[1], self.joints_c.copy(), self.xi_st_c.copy())
        return DualArmSystem(arm_a, arm_c, lie.exp_se3(self.xi_x),
                             lie.exp_se3(self.xi_y), lie.exp_se3(self.xi_z))

    def copy(self):
        return CalibrationState(self.xi_x.copy(), self.xi_y.copy(), self.xi_z.copy(),
                                self.joints_a.copy(), self.joints_c.copy(),
                                self.xi_st_a.copy(), self.xi_st_c.copy())

    def pack(self):
        """Parameter vector in the canonical column order."""
        return np.concatenate([self.xi_x, self.xi_y, self.xi_z,
                               self.joints_a.ravel(), self.joints_c.ravel()])

    def blocks(self):
        """Views of the optimized twists in column order (2n+3 of them)."""
        out = [self.xi_x, self.xi_y, self.xi_z]
        out += [self.joints_a[k] for k in range(self.n)]
        out += [self.joints_c[k] for k in range(self.n)]
        return out

    def apply_delta(self, delta, mode="additive"):
        """New state with the increment applied per 6-block.

        additive:        xi <- xi + d
        multiplicative:  xi <- log(exp(xi^) exp(d^))
        Both agree to second order in |d|.
        """
        delta = np.asarray(delta, dtype=float)
        if delta.shape != (self.dim,):
            raise StructureError(f"delta must have length {self.dim}")
        new = self.copy()
        for i, xi in enumerate(new.blocks()):
            d = delta[6 * i: 6 * i + 6]
            if mode == "additive":
                xi += d
            elif mode == "multiplicative":
                xi[:] = lie.log_se3(lie.exp_se3(xi) @ lie.exp_se3(d))
            else:
                raise ValueError(f"unknown update mode '{mode}'")
        return new


@dataclass
class SampleJacobian:
    """Named 6x6 blocks of one sample's Jacobian plus the assembled row."""

    J_x: np.ndarray
    J_y: np.ndarray
    J_z: np.ndarray
    J_a: list  # n blocks
    J_c: list  # n blocks
    full: np.ndarray = field(default=None)

    def assemble(self):
        self.full = np.hstack([self.J_x, self.J_y, self.J_z] + self.J_a + self.J_c)
        return self.full


def _check_sample(state, sample):
    if sample.q_a.shape != (state.n,) or sample.q_c.shape != (state.n,):
        raise StructureError("sample joint vectors do not match the state's joint count")


def predict_B(state, sample):
    """Predicted tool-in-sensor pose from the full PoE chain."""
    _check_sample(state, sample)
    T = lie.exp_se3(-state.xi_x) @ lie.exp_se3(-state.xi_st_a)
    for k in range(state.n - 1, -1, -1):
        T = T @ lie.exp_se3(-state.joints_a[k] * sample.q_a[k])
    T = T @ lie.exp_se3(state.xi_y)
    for k in range(state.n):
        T = T @ lie.exp_se3(state.joints_c[k] * sample.q_c[k])
    return T @ lie.exp_se3(state.xi_st_c) @ lie.exp_se3(state.xi_z)


def residual(state, sample):
    """Closed-loop error twist log(B' B*^-1) (exact logarithm)."""
    Bp = predict_B(state, sample)
    return lie.log_se3(Bp @ lie.pose_inv(sample.B_meas))


def residual_and_jacobian(state, sample):
    """Residual twist and the per-sample Jacobian in one chain walk.

    Block structure: J_x = -J(-xi_x) with no transport; every other block
    is the adjoint of the chain prefix preceding its exponential times
    the appropriate differential, joint blocks of the sensor arm carrying
    a leading minus because their exponentials enter inverted.
    """
    _check_sample(state, sample)
    n = state.n
    J_x = -lie.left_jacobian(-state.xi_x)
    prefix = lie.exp_se3(-state.xi_x) @ lie.exp_se3(-state.xi_st_a)
    J_a = [None] * n
    for k in range(n - 1, -1, -1):
        J_a[k] = -lie.adjoint(prefix) @ lie.joint_jacobian(-state.joints_a[k], sample.q_a[k])
        prefix = prefix @ lie.exp_se3(-state.joints_a[k] * sample.q_a[k])
    J_y = lie.adjoint(prefix) @ lie.left_jacobian(state.xi_y)
    prefix = prefix @ lie.exp_se3(state.xi_y)
    J_c = []
    for k in range(n):
        J_c.append(lie.adjoint(prefix) @ lie.joint_jacobian(state.joints_c[k], sample.q_c[k]))
        prefix = prefix @ lie.exp_se3(state.joints_c[k] * sample.q_c[k])
    prefix = prefix @ lie.exp_se3(state.xi_st_c)
    J_z = lie.adjoint(prefix) @ lie.left_jacobian(state.xi_z)
    Bp = prefix @ lie.exp_se3(state.xi_z)
    e = lie.log_se3(Bp @ lie.pose_inv(sample.B_meas))
    jac = SampleJacobian(J_x, J_y, J_z, J_a, J_c)
    jac.assemble()
    return e, jac


def sample_jacobian(state, sample):
    _, jac = residual_and_jacobian(state, sample)
    return jac


def stack(state, samples):
    """Stacked residual vector (6m,) and Jacobian (6m, 12n+18)."""
    if len(samples) < 1:
        raise StructureError("need at least one sample")
    m = len(samples)
    e = np.empty(6 * m)
    J = np.empty((6 * m, state.dim))
    for i, sample in enumerate(samples):
        ei, jac = residual_and_jacobian(state, sample)
        e[6 * i: 6 * i + 6] = ei
        J[6 * i: 6 * i + 6, :] = jac.full
    return e, J


@dataclass
class IdentifiabilityReport:
    singular_values: np.ndarray
    rank: int
    needed: int
    condition_number: float
    threshold: float
    excitation_violations: list
    well_posed: bool

    def to_dict(self):
        return {
            "singular_values": self.singular_values.tolist(),
            "rank": self.rank,
            "needed": self.needed,
            "condition_number": self.condition_number,
            "threshold": self.threshold,
            "excitation_violations": self.excitation_violations,
            "well_posed": self.well_posed,
        }


def identifiability_report(J, samples, q_min=0.15, rank_rel_threshold=1e-8):
    """Rank/conditioning diagnostics of a stacked Jacobian.

    Never raises: reports the singular values of J, the numeric rank at
    sigma_max * rank_rel_threshold, the condition number, and the samples
    whose joints sit below q_min (weakly exciting; their twist
    contributions degenerate as q -> 0).  Singular values come from an
    SVD of J itself: an eigendecomposition of J^T J squares the
    condition number and cannot resolve the 1e-8 rank threshold.
    """
    J = np.asarray(J, dtype=float)
    sv = np.linalg.svd(J, compute_uv=False)
    rank = numeric_rank(sv, rank_rel_threshold)
    needed = J.shape[1]
    cond = float(sv[0] / sv[needed - 1]) if sv[needed - 1] > 1e-300 else float("inf")
    violations = []
    for i, sample in enumerate(samples):
        for arm, q in (("a", sample.q_a), ("c", sample.q_c)):
            for k in range(q.shape[0]):
                if abs(q[k]) < q_min:
                    violations.append({"sample": i, "arm": arm, "joint": k, "q": float(q[k])})
    return IdentifiabilityReport(
        singular_values=sv,
        rank=rank,
        needed=needed,
        condition_number=cond,
        threshold=float(sv[0] * rank_rel_threshold),
        excitation_violations=violations,
        well_posed=bool(rank == needed),
    )
