"""Command line interface: ``mimutrack {run,simulate,drift,roundtrip}``."""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from mimutrack.errors import MimuError
from mimutrack.pipeline import (
    RunConfig,
    emit_reports,
    format_imu_log,
    load_config,
    load_imu_log,
    parse_imu_log,
    run_pipeline,
)
from mimutrack.simulator import (
    DEFAULT_DT,
    NoiseModel,
    drift_experiment,
    format_truth,
    load_motion_script,
    synth_imu,
    synth_truth,
)


def _config(args):
    config = load_config(args.config) if args.config else RunConfig()
    if getattr(args, "dt", None) is not None:
        config = RunConfig(config.detector, config.gravity, config.calibration, args.dt)
    return config


def _noise(args):
    return NoiseModel(
        accel_white_noise_std=args.accel_noise,
        accel_bias=np.array(args.accel_bias),
        orientation_error_std=math.radians(args.orientation_noise_deg),
        orientation_error_corr_time=args.orientation_corr_time,
        seed=args.seed,
    )


def _simulate(args, config):
    dt = args.dt if args.dt is not None else (config.dt or DEFAULT_DT)
    script = load_motion_script(args.script)
    truth = synth_truth(script, dt, config.calibration.origin_nav, config.calibration)
    log = synth_imu(truth, config.calibration, _noise(args), config.gravity)
    return truth, log


def cmd_run(args):
    config = _config(args)
    result = run_pipeline(load_imu_log(args.log), config)
    emit_reports(result, args.out)
    print(f"{len(result.segments)} motion segments; reports written to {args.out}")
    return 0


def cmd_simulate(args):
    config = _config(args)
    truth, log = _simulate(args, config)
    os.makedirs(args.out, exist_ok=True)
    with open(os.path.join(args.out, "imu_log.csv"), "w", encoding="utf-8") as fh:
        fh.write(format_imu_log(log))
    with open(os.path.join(args.out, "truth.csv"), "w", encoding="utf-8") as fh:
        fh.write(format_truth(truth))
    print(f"{len(log)} samples written to {args.out}")
    return 0


def cmd_drift(args):
    result = drift_experiment(_noise(args), args.duration, args.trials,
                              args.dt if args.dt is not None else DEFAULT_DT)
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "drift.csv"), "w", encoding="utf-8") as fh:
            fh.write(result.to_csv())
    slope = "n/a" if result.slope is None else f"{result.slope:.4f}"
    print(f"log-log slope: {slope}")
    return 0


def cmd_roundtrip(args):
    config = _config(args)
    truth, log = _simulate(args, config)
    # go through the text format so the run sees exactly what `run` would read
    result = run_pipeline(parse_imu_log(format_imu_log(log)), config)
    err = float(np.max(np.linalg.norm(result.trajectory.s - truth.s, axis=1)))
    if args.out:
        emit_reports(result, args.out)
    print(f"motion segments: {len(result.segments)}")
    print(f"max displacement error: {err!r} m")
    return 0


def _add_noise_args(p):
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--accel-noise", type=float, default=0.0, metavar="STD",
                   help="accelerometer white noise std, m/s^2")
    p.add_argument("--accel-bias", type=float, nargs=3, default=[0.0, 0.0, 0.0],
                   metavar=("BX", "BY", "BZ"), help="body-frame accelerometer bias, m/s^2")
    p.add_argument("--orientation-noise-deg", type=float, default=0.0, metavar="STD",
                   help="reported-angle error std, degrees")
    p.add_argument("--orientation-corr-time", type=float, default=0.0, metavar="SECONDS",
                   help="orientation error correlation time (0 = independent per sample)")


def build_parser():
    parser = argparse.ArgumentParser(prog="mimutrack", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="estimate a trajectory from an IMU log")
    p.add_argument("log")
    p.add_argument("--config")
    p.add_argument("--out", default="out")
    p.add_argument("--dt", type=float)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("simulate", help="synthesize an IMU log from a motion script")
    p.add_argument("script")
    p.add_argument("--config")
    p.add_argument("--out", default="sim")
    p.add_argument("--dt", type=float)
    _add_noise_args(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("drift", help="Monte-Carlo drift of free double integration")
    p.add_argument("--duration", type=float, default=60.0)
    p.add_argument("--trials", type=int, default=100)
    p.add_argument("--dt", type=float)
    p.add_argument("--out")
    _add_noise_args(p)
    p.set_defaults(func=cmd_drift, accel_noise=0.01)

    p = sub.add_parser("roundtrip", help="simulate, run, and compare with ground truth")
    p.add_argument("script")
    p.add_argument("--config")
    p.add_argument("--out")
    p.add_argument("--dt", type=float)
    _add_noise_args(p)
    p.set_defaults(func=cmd_roundtrip)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (MimuError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
