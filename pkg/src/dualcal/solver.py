"""Damped Gauss-Newton refinement of the full calibration state."""

from dataclasses import dataclass, field

import numpy as np

from .chain import stack
from .numerics import solve_damped_normal


@dataclass
class SolverConfig:
    damping: float = 1e-3
    tol_inf: float = 1e-3       # infinity-norm threshold on the increment
    max_iters: int = 100
    update_mode: str = "additive"  # or "multiplicative"

    def __post_init__(self):
        if self.tol_inf <= 0:
            raise ValueError("tol_inf must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be at least 1")
        if self.update_mode not in ("additive", "multiplicative"):
            raise ValueError(f"unknown update mode '{self.update_mode}'")


@dataclass
class SolveTrace:
    residual_norms: list = field(default_factory=list)
    step_norms: list = field(default_factory=list)   # infinity norms
    dampings: list = field(default_factory=list)
    converged: bool = False
    iterations: int = 0

    def to_dict(self):
        return {
            "residual_norms": self.residual_norms,
            "step_norms": self.step_norms,
            "dampings": self.dampings,
            "converged": self.converged,
            "iterations": self.iterations,
        }


def step(state, samples, config):
    """One damped Gauss-Newton step.

    The residual model is e(xi + d) ~ e(xi) + J d, so the increment
    minimizes |e + J d|^2 + damping*|d|^2, i.e. it solves
    (J^T J + damping I) d = -J^T e.  Returns (new_state, delta, e).
    """
    e, J = stack(state, samples)
    delta = solve_damped_normal(J, -e, config.damping)
    return state.apply_delta(delta, config.update_mode), delta, e


def solve(initial_state, samples, config=None):
    """Iterate until |delta|_inf <= tol_inf or max_iters.

    The trace records |e|, |delta|_inf and the damping per iteration;
    monotone decrease of |e| is not guaranteed (fixed damping, no line
    search) but holds on well-initialized problems.
    """
    if config is None:
        config = SolverConfig()
    state = initial_state.copy()
    trace = SolveTrace()
    for _ in range(config.max_iters):
        new_state, delta, e = step(state, samples, config)
        step_inf = float(np.abs(delta).max())
        trace.residual_norms.append(float(np.linalg.norm(e)))
        trace.step_norms.append(step_inf)
        trace.dampings.append(config.damping)
        trace.iterations += 1
        state = new_state
        if step_inf <= config.tol_inf:
            trace.converged = True
            break
    return state, trace
