"""Product-of-exponentials forward kinematics for one serial arm."""

import json
from dataclasses import dataclass
from importlib import resources

import numpy as np

from . import liegroup as lie
from .errors import StructureError, ValidationError


@dataclass
class RobotModel:
    """n joint twists (base frame) plus the fixed zero-offset twist.

    The zero-offset twist encodes the user-defined zero reference
    configuration; it is never optimized.
    """

    name: str
    joint_twists: np.ndarray  # (n, 6)
    zero_offset: np.ndarray   # (6,)

    def __post_init__(self):
        self.joint_twists = np.atleast_2d(np.asarray(self.joint_twists, dtype=float))
        self.zero_offset = np.asarray(self.zero_offset, dtype=float)
        if self.joint_twists.shape[1] != 6 or self.joint_twists.shape[0] < 1:
            raise ValidationError(f"joint_twists must be (n>=1, 6), got {self.joint_twists.shape}")
        if self.zero_offset.shape != (6,):
            raise ValidationError("zero_offset must be a 6-vector")
        if not (np.isfinite(self.joint_twists).all() and np.isfinite(self.zero_offset).all()):
            raise ValidationError("robot model twists must be finite")

    @property
    def n(self):
        return self.joint_twists.shape[0]

    def copy(self):
        return RobotModel(self.name, self.joint_twists.copy(), self.zero_offset.copy())


def forward_kinematics(model, q):
    """End pose exp(xi^1 q^1) ... exp(xi^n q^n) exp(xi_st)."""
    q = np.asarray(q, dtype=float)
    if q.shape != (model.n,):
        raise StructureError(f"joint vector length {q.shape} does not match n={model.n}")
    T = np.eye(4)
    for k in range(model.n):
        T = T @ lie.exp_se3(model.joint_twists[k] * q[k])
    return T @ lie.exp_se3(model.zero_offset)


def perturb_model(model, deltas):
    """New model with exp(xi_new^) = exp(xi_nom^) exp(delta^) per joint.

    The zero offset is left untouched.
    """
    deltas = np.atleast_2d(np.asarray(deltas, dtype=float))
    if deltas.shape != (model.n, 6):
        raise StructureError(f"expected {model.n} twist deltas, got {deltas.shape}")
    new_twists = np.empty_like(model.joint_twists)
    for k in range(model.n):
        if np.all(deltas[k] == 0.0):
            new_twists[k] = model.joint_twists[k]
        else:
            T = lie.exp_se3(model.joint_twists[k]) @ lie.exp_se3(deltas[k])
            new_twists[k] = lie.log_se3(T)
    return RobotModel(model.name, new_twists, model.zero_offset.copy())


def model_to_dict(model):
    return {
        "name": model.name,
        "n": model.n,
        "joint_twists": model.joint_twists.tolist(),
        "zero_offset": model.zero_offset.tolist(),
    }


def model_from_dict(d):
    for key in ("name", "n", "joint_twists", "zero_offset"):
        if key not in d:
            raise ValidationError(f"robot model is missing field '{key}'")
    model = RobotModel(d["name"], d["joint_twists"], d["zero_offset"])
    if model.n != d["n"]:
        raise ValidationError(f"field 'n'={d['n']} disagrees with {model.n} joint twists")
    return model


def load_model(path):
    with open(path) as f:
        return model_from_dict(json.load(f))


def save_model(model, path):
    with open(path, "w") as f:
        json.dump(model_to_dict(model), f, indent=1)
        f.write("\n")


def default_arm(name="ur5_like"):
    """Bundled 6-DoF arm with UR5-like geometry.

    These are toolkit defaults built from the public UR5 dimensions (the
    zero-offset frame is our own choice, aligned with the base); they are
    stand-ins for simulation, not manufacturer data.
    """
    text = resources.files("dualcal.assets").joinpath("ur5_like.json").read_text()
    model = model_from_dict(json.loads(text))
    model.name = name
    return model
