"""
End-to-end estimation: log ingest, separation, projection, detection,
integration and report writing.

IMU log format
--------------
CSV with the exact header ``t_s,ax,ay,az,roll_deg,pitch_deg,yaw_deg``.
Accelerations are body-frame m/s^2, angles are degrees and converted to
radians on ingest.

Config format
-------------
``key = value`` lines, ``#`` comments. Keys (all optional):
``window_n`` (2), ``lambda_v`` (0.01), ``lambda_m`` (4), ``g`` (9.80665),
``calibration`` (path, identity when absent; relative to the config file),
``dt`` (seconds; inferred from timestamps when absent).
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field

import numpy as np

from mimutrack.errors import ConfigError, IngestError, ParseError
from mimutrack.frames import EulerAngles, FrameCalibration, load_calibration
from mimutrack.gravity import GravityModel, motion_accel_body, motion_accel_nav
from mimutrack.integrator import TrajectoryEstimate, reconstruct
from mimutrack.motiondetect import (
    DetectorConfig,
    resultant_accel,
    segment_motion,
    sliding_variance,
    threshold_mask,
)

LOG_HEADER = "t_s,ax,ay,az,roll_deg,pitch_deg,yaw_deg"
TRAJECTORY_HEADER = "t,sx,sy,sz,vx,vy,vz"
DIAGNOSTICS_HEADER = "t,a_mr,sigma2,mask"
SEGMENTS_HEADER = "begin,end,t_begin,t_end,duration_ms"

# allowed relative deviation of any sample gap from the median gap
DT_JITTER_TOL = 0.10


@dataclass(frozen=True)
class ImuSample:
    t: float
    accel: np.ndarray
    angles: EulerAngles


@dataclass(frozen=True)
class ImuLog:
    """A sequence of IMU samples stored column-wise.

    Attributes
    ----------
    t : numpy.ndarray, shape (N,)
        Strictly increasing timestamps, s.
    accel : numpy.ndarray, shape (N, 3)
        Raw body-frame acceleration, m/s^2.
    angles : numpy.ndarray, shape (N, 3)
        Reported [roll, pitch, yaw], rad.
    """

    t: np.ndarray
    accel: np.ndarray
    angles: np.ndarray

    def __post_init__(self):
        t = np.asarray(self.t, dtype=float).reshape(-1)
        accel = np.asarray(self.accel, dtype=float).reshape(-1, 3)
        angles = np.asarray(self.angles, dtype=float).reshape(-1, 3)
        if not (t.shape[0] == accel.shape[0] == angles.shape[0]):
            raise ValueError("t, accel and angles must have the same length")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(accel))
                and np.all(np.isfinite(angles))):
            raise ValueError("IMU log contains non-finite values")
        if np.any(np.diff(t) <= 0):
            raise IngestError("timestamps must be strictly increasing")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "accel", accel)
        object.__setattr__(self, "angles", angles)

    def __len__(self):
        return self.t.shape[0]

    def __getitem__(self, k):
        return ImuSample(float(self.t[k]), self.accel[k], EulerAngles(*self.angles[k]))

    @classmethod
    def from_samples(cls, samples):
        samples = list(samples)
        return cls(
            t=[s.t for s in samples],
            accel=[s.accel for s in samples],
            angles=[s.angles.as_array() for s in samples],
        )


def parse_imu_log(text):
    """Parse IMU log CSV text.

    Raises
    ------
    ParseError
        Empty input, wrong header, malformed row (naming its line), or
        non-increasing timestamps.
    """
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise ParseError("empty IMU log")
    if lines[0].strip().replace(" ", "") != LOG_HEADER:
        raise ParseError(f"expected header {LOG_HEADER!r}", 1)

    rows = []
    last_t = -math.inf
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != 7:
            raise ParseError(f"expected 7 fields, got {len(fields)}", lineno)
        try:
            row = [float(f) for f in fields]
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        if not all(math.isfinite(x) for x in row):
            raise ParseError("non-finite value", lineno)
        if row[0] <= last_t:
            raise ParseError(f"timestamp {row[0]} does not increase", lineno)
        last_t = row[0]
        rows.append(row)
    if not rows:
        raise ParseError("IMU log has no samples")

    data = np.array(rows)
    return ImuLog(t=data[:, 0], accel=data[:, 1:4], angles=np.radians(data[:, 4:7]))


def load_imu_log(path):
    with open(path, encoding="utf-8") as fh:
        return parse_imu_log(fh.read())


def format_imu_log(log):
    out = [LOG_HEADER]
    deg = np.degrees(log.angles)
    for k in range(len(log)):
        row = [log.t[k], *log.accel[k], *deg[k]]
        out.append(",".join(repr(float(x)) for x in row))
    return "\n".join(out) + "\n"


def infer_dt(t, tol=DT_JITTER_TOL):
    """Median sample gap, rejecting logs whose gaps stray more than ``tol`` from it."""
    t = np.asarray(t, dtype=float)
    if t.size < 2:
        raise IngestError("need at least two samples to infer dt")
    gaps = np.diff(t)
    dt = float(np.median(gaps))
    worst = float(np.max(np.abs(gaps - dt)))
    if worst > tol * dt:
        raise IngestError(f"sample gaps deviate from median {dt} s by up to {worst} s")
    return dt


@dataclass(frozen=True)
class RunConfig:
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    gravity: GravityModel = field(default_factory=GravityModel)
    calibration: FrameCalibration = field(default_factory=FrameCalibration.identity)
    dt: float | None = None

    def __post_init__(self):
        if self.dt is not None and not (math.isfinite(self.dt) and self.dt > 0):
            raise ConfigError(f"dt override must be positive, got {self.dt}")


_CONFIG_KEYS = ("window_n", "lambda_v", "lambda_m", "g", "calibration", "dt")


def parse_config(text, base_dir="."):
    """Parse ``key = value`` configuration text into a :class:`RunConfig`."""
    values = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError("expected 'key = value'", lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise ParseError(f"unknown config key {key!r}", lineno)
        try:
            if key in ("window_n", "lambda_m"):
                values[key] = int(value)
            elif key == "calibration":
                values[key] = value
            else:
                values[key] = float(value)
        except ValueError:
            raise ParseError(f"bad value for {key}: {value!r}", lineno) from None

    defaults = DetectorConfig()
    detector = DetectorConfig(
        window_n=values.get("window_n", defaults.window_n),
        lambda_v=values.get("lambda_v", defaults.lambda_v),
        lambda_m=values.get("lambda_m", defaults.lambda_m),
    )
    calib = FrameCalibration.identity()
    if "calibration" in values:
        calib = load_calibration(os.path.join(base_dir, values["calibration"]))
    return RunConfig(
        detector=detector,
        gravity=GravityModel(values.get("g", GravityModel().g_magnitude)),
        calibration=calib,
        dt=values.get("dt"),
    )


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read(), base_dir=os.path.dirname(os.path.abspath(path)))


@dataclass(frozen=True)
class Diagnostics:
    am_nav: np.ndarray
    a_mr: np.ndarray
    variance: np.ndarray
    mask: np.ndarray


@dataclass(frozen=True)
class PipelineResult:
    trajectory: TrajectoryEstimate
    segments: tuple
    diagnostics: Diagnostics
    dt: float
    origin: np.ndarray


def run_pipeline(samples, config=RunConfig()):
    """Estimate the trajectory of an IMU log.

    Gravity separation, projection to the navigation frame, resultant
    magnitude, sliding variance, thresholding, segmentation and
    segment-wise integration, in that order.
    """
    log = samples if isinstance(samples, ImuLog) else ImuLog.from_samples(samples)
    det = config.detector
    if len(log) < det.window_n:
        raise ConfigError(f"log has {len(log)} samples, fewer than window_n={det.window_n}")
    dt = config.dt if config.dt is not None else infer_dt(log.t)

    am_body = motion_accel_body(log.accel, log.angles, config.gravity)
    am_nav = motion_accel_nav(am_body, log.angles, config.calibration)
    a_mr = resultant_accel(am_nav)
    variance = sliding_variance(a_mr, det.window_n)
    mask = threshold_mask(variance, det.lambda_v)
    segments = tuple(segment_motion(mask, det.lambda_m))
    origin = np.array(config.calibration.origin_nav)
    trajectory = reconstruct(am_nav, segments, dt, origin, times=log.t)
    return PipelineResult(
        trajectory=trajectory,
        segments=segments,
        diagnostics=Diagnostics(am_nav, a_mr, variance, mask),
        dt=dt,
        origin=origin,
    )


def _fmt(x):
    return repr(float(x))


def _csv(header, rows):
    return "\n".join([header] + [",".join(r) for r in rows]) + "\n"


def segment_rows(result):
    t = result.trajectory.t
    rows = []
    for seg in result.segments:
        t0, t1 = t[seg.begin], t[seg.end]
        rows.append((str(seg.begin), str(seg.end), _fmt(t0), _fmt(t1), _fmt((t1 - t0) * 1000.0)))
    return rows


def render_reports(result):
    """Report file name -> text content."""
    traj = result.trajectory
    diag = result.diagnostics
    trajectory_csv = _csv(TRAJECTORY_HEADER, (
        [_fmt(traj.t[k]), *map(_fmt, traj.s[k]), *map(_fmt, traj.v[k])] for k in range(len(traj))
    ))
    diagnostics_csv = _csv(DIAGNOSTICS_HEADER, (
        [_fmt(traj.t[k]), _fmt(diag.a_mr[k]), _fmt(diag.variance[k]), str(int(diag.mask[k]))]
        for k in range(len(traj))
    ))
    segments_csv = _csv(SEGMENTS_HEADER, segment_rows(result))

    disp = traj.s[-1] - result.origin
    lo, hi = traj.s.min(axis=0), traj.s.max(axis=0)
    summary = [
        f"samples: {len(traj)}",
        f"dt_s: {_fmt(result.dt)}",
        f"motion_segments: {len(result.segments)}",
        f"final_position_m: {' '.join(map(_fmt, traj.s[-1]))}",
        f"final_displacement_m: {' '.join(map(_fmt, disp))}",
    ]
    for axis, a, b in zip("xyz", lo, hi):
        summary.append(f"extent_{axis}_m: min {_fmt(a)} max {_fmt(b)} span {_fmt(b - a)}")
    return {
        "trajectory.csv": trajectory_csv,
        "diagnostics.csv": diagnostics_csv,
        "segments.csv": segments_csv,
        "summary.txt": "\n".join(summary) + "\n",
    }


def emit_reports(result, out_dir):
    """Write trajectory, diagnostics, segments and summary reports to ``out_dir``.

    Returns the list of written paths. Raises ``OSError`` if the directory
    cannot be created or written.
    """
    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for name, text in render_reports(result).items():
        path = os.path.join(out_dir, name)
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
        paths.append(path)
    return paths
