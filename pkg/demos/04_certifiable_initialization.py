"""Certifiably correct coordinate initialization.

The coordinate-only problem is lifted to a 133-dimensional homogeneous
vector, its chain residuals become linear, the SO(3)/Kronecker structure
becomes 160 quadratic equalities, and the semidefinite relaxation is
solved by operator-splitting ADMM.  The recovered candidate comes with
an a-posteriori sub-optimality gap eta; tiny eta certifies near-global
optimality of the initialization.
"""

import time

import numpy as np

from dualcal import sdp_init as sdp
from dualcal.evaluate import rotation_angle
from dualcal.simulate import generate_dataset

np.set_printoptions(precision=4, suppress=True)

ds = generate_dataset(m=40, kin_tag="MH", noise_tag="M", seed=7)
nominal = ds.nominal_system
print(f"dataset: {len(ds.samples)} samples, kinematic level MH, noise level M")

problem = sdp.build_problem(nominal.sensor_arm, nominal.tool_arm, ds.samples)
print(f"lifted QCQP: dim {sdp.DIM}, {len(problem.constraints)} quadratic "
      f"constraints, |Q|_F = {np.linalg.norm(problem.Q):.1f}")

t0 = time.perf_counter()
res = sdp.solve_sdp(problem, tol_factor=1e-10)
print(f"ADMM: {res.iterations} iterations in {time.perf_counter() - t0:.1f} s, "
      f"residuals {res.primal_res:.1e}/{res.dual_res:.1e}, p_sdp = {res.p_sdp:.4e}")

w_star, X, Y, Z, rank_ratio = sdp.extract(res.W)
eta, abs_gap, p_cert = sdp.certify(w_star, problem.Q, res.p_sdp, problem.residual_stack)
print(f"rank ratio lambda2/lambda1 = {rank_ratio:.2e} (rank-1 => relaxation tight)")
print(f"certificate: eta = {eta:.2e}, absolute gap = {abs_gap:.2e}")

gt = ds.gt_system
for name, est, true in (("X", X, gt.X), ("Y", Y, gt.Y), ("Z", Z, gt.Z)):
    rot_err = np.degrees(rotation_angle(est[:3, :3] @ true[:3, :3].T))
    trans_err = 1e3 * np.linalg.norm(est[:3, 3] - true[:3, 3])
    print(f"  {name}: rotation error {rot_err:.4f} deg, translation error "
          f"{trans_err:.3f} mm (vs ground truth; residual kinematic bias remains)")
