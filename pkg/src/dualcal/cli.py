"""Command-line pipelines: generate / init / calibrate / evaluate /
identifiability / ball-eval.

Everything is JSON in, JSON out (schemas in docs/formats.md); poses are
4x4 row-major with translations in meters.  Exit codes: 0 success,
2 validation problem, 3 numerical failure.  Set DUALCAL_LOG=info or
=debug for progress output.
"""

import argparse
import json
import logging
import os
import sys

import numpy as np

from .chain import CalibrationState, stack, identifiability_report, MeasurementSample
from .errors import CalibrationError, ValidationError
from .liegroup import log_se3
from .evaluate import ball_consistency, evaluate_dataset
from .sdp_init import initialize
from .simulate import (dataset_to_dict, default_system, generate_dataset,
                       load_dataset, system_from_dict, system_to_dict)
from .solver import SolverConfig, solve

log = logging.getLogger("dualcal")


def _setup_logging():
    level = os.environ.get("DUALCAL_LOG", "warning").lower()
    levels = {"debug": logging.DEBUG, "info": logging.INFO,
              "warning": logging.WARNING, "quiet": logging.ERROR}
    logging.basicConfig(format="%(levelname)s %(message)s",
                        level=levels.get(level, logging.WARNING))


def _load_json(path, what):
    try:
        with open(path) as f:
            return json.load(f)
    except FileNotFoundError:
        raise ValidationError(f"{what} file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{what} file {path} is not valid JSON: {exc}")


def _write_json(obj, path):
    with open(path, "w") as f:
        json.dump(obj, f)
        f.write("\n")
    log.info("wrote %s", path)


def _pose_from(obj, name):
    T = np.asarray(obj, dtype=float)
    if T.shape != (4, 4):
        raise ValidationError(f"field '{name}' must be a 4x4 row-major pose")
    return T


def cmd_generate(args):
    system = system_from_dict(_load_json(args.system, "system")) if args.system else default_system()
    ds = generate_dataset(args.samples, args.kin_level, args.noise_level,
                          args.seed, system=system, q_min=args.q_min, d_min=args.d_min)
    _write_json(dataset_to_dict(ds, blind=args.blind), args.out)
    return 0


def _run_init(ds, args):
    log.info("solving SDP initialization (m=%d samples)", len(ds.samples))
    init = initialize(ds.nominal_system.sensor_arm, ds.nominal_system.tool_arm,
                      ds.samples, alpha=args.alpha, tol_factor=args.sdp_tol,
                      max_iters=args.sdp_max_iters)
    log.info("init: eta=%.3e rank_ratio=%.3e iters=%d", init.eta,
             init.rank_ratio, init.iterations)
    return init


def cmd_init(args):
    ds = load_dataset(args.data)
    _write_json(_run_init(ds, args).to_dict(), args.out)
    return 0


def cmd_calibrate(args):
    ds = load_dataset(args.data)
    nominal = ds.nominal_system
    if args.init:
        d = _load_json(args.init, "init")
        X = _pose_from(d["X"], "X")
        Y = _pose_from(d["Y"], "Y")
        Z = _pose_from(d["Z"], "Z")
        init_record = d
    else:
        init = _run_init(ds, args)
        X, Y, Z = init.X, init.Y, init.Z
        init_record = init.to_dict()
    state0 = CalibrationState(
        xi_x=log_se3(X),
        xi_y=log_se3(Y),
        xi_z=log_se3(Z),
        joints_a=nominal.sensor_arm.joint_twists,
        joints_c=nominal.tool_arm.joint_twists,
        xi_st_a=nominal.sensor_arm.zero_offset,
        xi_st_c=nominal.tool_arm.zero_offset,
    )
    config = SolverConfig(damping=args.damping, tol_inf=args.tol,
                          max_iters=args.max_iters, update_mode=args.update_mode)
    final, trace = solve(state0, ds.samples, config)
    e, _ = stack(final, ds.samples)
    system = final.to_system((nominal.sensor_arm.name, nominal.tool_arm.name))
    out = system_to_dict(system)
    out["trace"] = trace.to_dict()
    out["final_residual_norm"] = float(np.linalg.norm(e))
    out["init"] = init_record
    out["eta"] = init_record.get("eta")
    _write_json(out, args.out)
    log.info("calibrate: %d iterations, final |e| = %.3e", trace.iterations,
             out["final_residual_norm"])
    return 0


def _load_calib_system(path):
    return system_from_dict(_load_json(path, "calibration"))


def cmd_evaluate(args):
    ds = load_dataset(args.data)
    calib = _load_calib_system(args.calib)
    mode = "coordinate_only" if args.nominal_kinematics else args.mode
    report = evaluate_dataset(ds, calib, mode)
    _write_json(report.to_dict(), args.out)
    if args.csv:
        d = report.to_dict()
        with open(args.csv, "w") as f:
            f.write("metric,mean,std,median,q1,q3,max\n")
            for name in ("rot_deg", "trans_mm"):
                s = d[name]
                f.write(f"{name},{s['mean']},{s['std']},{s['median']},"
                        f"{s['q1']},{s['q3']},{s['max']}\n")
        log.info("wrote %s", args.csv)
    return 0


def cmd_identifiability(args):
    ds = load_dataset(args.data)
    source = _load_calib_system(args.calib) if args.calib else ds.nominal_system
    state = CalibrationState.from_system(source)
    _, J = stack(state, ds.samples)
    report = identifiability_report(J, ds.samples, q_min=args.q_min)
    _write_json(report.to_dict(), args.out)
    return 0


def cmd_ball_eval(args):
    calib = _load_calib_system(args.calib)
    d = _load_json(args.clouds, "clouds")
    if "postures" not in d:
        raise ValidationError("clouds file is missing field 'postures'")
    samples, clouds = [], []
    for i, p in enumerate(d["postures"]):
        for key in ("q_a", "q_c", "points"):
            if key not in p:
                raise ValidationError(f"posture {i} is missing field '{key}'")
        samples.append(MeasurementSample(np.array(p["q_a"], dtype=float),
                                         np.array(p["q_c"], dtype=float),
                                         np.eye(4)))
        clouds.append(np.array(p["points"], dtype=float))
    if args.nominal_kinematics:
        if not args.data:
            raise ValidationError("--nominal-kinematics needs --data for the nominal arms")
        nominal = load_dataset(args.data).nominal_system
        arm_a, arm_c = nominal.sensor_arm, nominal.tool_arm
    else:
        arm_a, arm_c = calib.sensor_arm, calib.tool_arm
    result = ball_consistency(clouds, samples, calib.X, calib.Y, arm_a, arm_c)
    _write_json(result.to_dict(), args.out)
    log.info("r_MEB = %.4f mm", 1e3 * result.r_meb)
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="dualcal",
                                description="Dual-arm coordinate/kinematic calibration toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a synthetic dataset")
    g.add_argument("--system", help="system JSON (default: bundled dual UR5-like setup)")
    g.add_argument("--samples", type=int, required=True)
    g.add_argument("--kin-level", default="M", help="L|ML|M|MH|H|QH|none")
    g.add_argument("--noise-level", default="M", help="L|ML|M|MH|H|QH|none")
    g.add_argument("--seed", type=int, required=True)
    g.add_argument("--q-min", type=float, default=0.15)
    g.add_argument("--d-min", type=float, default=0.3)
    g.add_argument("--blind", action="store_true", help="omit the ground-truth system")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    def add_sdp_args(sp):
        sp.add_argument("--alpha", type=float, default=1.0)
        sp.add_argument("--sdp-tol", type=float, default=1e-10,
                        help="ADMM residual tolerance factor")
        sp.add_argument("--sdp-max-iters", type=int, default=50000)

    i = sub.add_parser("init", help="certifiable SDP coordinate initialization")
    i.add_argument("--data", required=True)
    i.add_argument("--out", required=True)
    add_sdp_args(i)
    i.set_defaults(func=cmd_init)

    c = sub.add_parser("calibrate", help="unified coordinate+kinematic calibration")
    c.add_argument("--data", required=True)
    c.add_argument("--init", help="initialization JSON (default: run the SDP)")
    c.add_argument("--out", required=True)
    c.add_argument("--damping", type=float, default=1e-3)
    c.add_argument("--tol", type=float, default=1e-3,
                   help="stop when |increment|_inf falls below this")
    c.add_argument("--max-iters", type=int, default=100)
    c.add_argument("--update-mode", default="additive",
                   choices=("additive", "multiplicative"))
    add_sdp_args(c)
    c.set_defaults(func=cmd_calibrate)

    e = sub.add_parser("evaluate", help="closed-loop deviation report")
    e.add_argument("--data", required=True)
    e.add_argument("--calib", required=True)
    e.add_argument("--mode", default="joint", choices=("joint", "coordinate_only"))
    e.add_argument("--nominal-kinematics", action="store_true",
                   help="shorthand for --mode coordinate_only")
    e.add_argument("--out", required=True)
    e.add_argument("--csv", help="also write summary quantiles as CSV")
    e.set_defaults(func=cmd_evaluate)

    d = sub.add_parser("identifiability", help="rank/excitation diagnostics")
    d.add_argument("--data", required=True)
    d.add_argument("--calib", help="evaluate at a calibrated state (default: nominal)")
    d.add_argument("--q-min", type=float, default=0.15)
    d.add_argument("--out", required=True)
    d.set_defaults(func=cmd_identifiability)

    b = sub.add_parser("ball-eval", help="cooperative-measuring r_MEB score")
    b.add_argument("--clouds", required=True, help="per-posture point clouds JSON")
    b.add_argument("--calib", required=True)
    b.add_argument("--nominal-kinematics", action="store_true")
    b.add_argument("--data", help="dataset JSON for nominal arms (with --nominal-kinematics)")
    b.add_argument("--out", required=True)
    b.set_defaults(func=cmd_ball_eval)
    return p


def main(argv=None):
    _setup_logging()
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValidationError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CalibrationError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
