"""
Synthetic MIMU logs with known ground truth.

Truth kinematics are built phase by phase, using the same rectangular
recurrence as :mod:`mimutrack.integrator`, so without noise the estimator
recovers the truth to rounding error. :func:`synth_imu` runs the sensor
model forward::

    raw = R_bi (R_ni^T a_nav + g) + bias + white noise

and reports the true attitude plus an orientation error.

Phase kinds
-----------
rest
    No motion. Velocity is pinned to zero for the whole phase.
accel-pulse
    Acceleration held constant over every sample of the phase, or an
    explicit per-sample ``(k, 3)`` profile.
swing
    One full sine period ``peak * sin(2 pi j / k)`` over the ``k`` samples
    of the phase: accelerate, then decelerate back to zero velocity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import lfilter

from mimutrack.errors import ConfigError, ParseError
from mimutrack.frames import (
    EulerAngles,
    FrameCalibration,
    as_angle_array,
    rotation_body_from_inertial,
)
from mimutrack.gravity import GravityModel, motion_accel_body, motion_accel_nav
from mimutrack.integrator import integrate_segment
from mimutrack.pipeline import ImuLog

# 25 ms period: 2150 ms of rest spread over samples 0..86
DEFAULT_DT = 0.025

PHASE_KINDS = ("rest", "accel-pulse", "swing")

# samples per interval of the demonstration schedule (rest first, alternating)
DEMO_SAMPLE_COUNTS = (87, 8, 20, 12, 14, 15, 30, 7, 58)
# reported duration of each interval, ms
DEMO_DURATIONS_MS = (2150, 175, 475, 275, 325, 350, 725, 125, 1425)


@dataclass(frozen=True)
class Phase:
    """One stretch of a motion script.

    ``accel`` is a navigation-frame vector (``frame="nav"``) or a body-frame
    vector rotated by the true attitude (``frame="body"``). For
    ``accel-pulse`` it may also be a ``(k, 3)`` per-sample profile. For
    ``swing`` it is the peak acceleration. When ``attitude_end`` is given the
    attitude ramps linearly from ``attitude`` to it across the phase.
    """

    kind: str
    duration: float
    accel: np.ndarray = field(default_factory=lambda: np.zeros(3))
    attitude: EulerAngles = EulerAngles(0.0, 0.0, 0.0)
    attitude_end: EulerAngles | None = None
    frame: str = "nav"

    def __post_init__(self):
        if self.kind not in PHASE_KINDS:
            raise ConfigError(f"unknown phase kind {self.kind!r}")
        if not (math.isfinite(self.duration) and self.duration > 0):
            raise ConfigError(f"phase duration must be positive, got {self.duration}")
        if self.frame not in ("nav", "body"):
            raise ConfigError(f"phase frame must be 'nav' or 'body', got {self.frame!r}")
        accel = np.array(self.accel, dtype=float)
        if accel.shape[-1:] != (3,) or accel.ndim > 2:
            raise ConfigError(f"phase acceleration has shape {accel.shape}")
        if accel.ndim == 2 and self.kind != "accel-pulse":
            raise ConfigError("per-sample profiles are only allowed for accel-pulse phases")
        if not np.all(np.isfinite(accel)):
            raise ConfigError("phase acceleration must be finite")
        if self.kind == "rest" and np.any(accel != 0):
            raise ConfigError("rest phases cannot carry acceleration")
        accel.setflags(write=False)
        object.__setattr__(self, "accel", accel)

    def n_samples(self, dt):
        if self.accel.ndim == 2:
            k = self.accel.shape[0]
            if abs(k * dt - self.duration) > 1e-9 * max(1.0, self.duration) + dt / 2:
                raise ConfigError(
                    f"profile of {k} samples does not fill a {self.duration} s phase at dt={dt}"
                )
            return k
        k = int(round(self.duration / dt))
        if k < 1:
            raise ConfigError(f"phase of {self.duration} s is shorter than one sample at dt={dt}")
        return k


@dataclass(frozen=True)
class MotionScript:
    phases: tuple

    def __post_init__(self):
        object.__setattr__(self, "phases", tuple(self.phases))

    def __len__(self):
        return len(self.phases)

    def __iter__(self):
        return iter(self.phases)


@dataclass(frozen=True)
class NoiseModel:
    """Sensor error model.

    Attributes
    ----------
    accel_white_noise_std : float
        Per-axis Gaussian accelerometer noise, m/s^2.
    accel_bias : array_like, shape (3,)
        Constant body-frame accelerometer bias, m/s^2.
    orientation_error_std : float
        Standard deviation of the error added to each reported angle, rad.
    orientation_error_corr_time : float
        Correlation time of the orientation error, s. ``0`` draws it
        independently for every sample; a positive value makes it a
        first-order Gauss-Markov process with the same stationary std
        (``inf`` gives a constant offset per run).
    seed : int
    """

    accel_white_noise_std: float = 0.0
    accel_bias: np.ndarray = field(default_factory=lambda: np.zeros(3))
    orientation_error_std: float = 0.0
    orientation_error_corr_time: float = 0.0
    seed: int = 0

    def __post_init__(self):
        bias = np.array(self.accel_bias, dtype=float).reshape(-1)
        if bias.shape != (3,) or not np.all(np.isfinite(bias)):
            raise ConfigError("accel_bias must be a finite 3-vector")
        bias.setflags(write=False)
        object.__setattr__(self, "accel_bias", bias)
        for name in ("accel_white_noise_std", "orientation_error_std",
                     "orientation_error_corr_time"):
            value = getattr(self, name)
            if math.isnan(value) or value < 0:
                raise ConfigError(f"{name} must be >= 0, got {value}")

    def with_seed(self, seed):
        return NoiseModel(self.accel_white_noise_std, self.accel_bias,
                          self.orientation_error_std, self.orientation_error_corr_time, seed)


# Demonstration preset: 0.02 m/s^2 accelerometer noise, 1 deg per-sample
# orientation error.
DEMO_NOISE = NoiseModel(accel_white_noise_std=0.02, orientation_error_std=math.radians(1.0))


@dataclass(frozen=True)
class Truth:
    """Ground-truth kinematics, one row per sample.

    ``motion_spans`` lists the inclusive sample ranges of non-rest phases.
    """

    dt: float
    t: np.ndarray
    angles: np.ndarray
    a_nav: np.ndarray
    v: np.ndarray
    s: np.ndarray
    phase_index: np.ndarray
    motion_spans: tuple

    def __len__(self):
        return len(self.t)


def swing_profile(n_samples, peak, active=None):
    """Per-sample ``peak * sin(2 pi j / active)`` for ``j < active``, zero after.

    The sum over one period vanishes, so velocity returns to its starting
    value at the end of the swing.
    """
    active = n_samples if active is None else active
    if not 1 <= active <= n_samples:
        raise ConfigError(f"active length {active} outside 1..{n_samples}")
    j = np.arange(n_samples)
    w = np.where(j < active, np.sin(2 * np.pi * j / active), 0.0)
    return w[:, None] * np.asarray(peak, dtype=float)[None, :]


def _phase_attitudes(phase, k):
    start = phase.attitude.as_array()
    if phase.attitude_end is None or k == 1:
        return np.tile(start, (k, 1))
    end = phase.attitude_end.as_array()
    frac = np.arange(k) / (k - 1)
    return start + frac[:, None] * (end - start)


def _phase_accels(phase, k):
    if phase.kind == "rest":
        return np.zeros((k, 3))
    if phase.kind == "swing":
        return swing_profile(k, phase.accel)
    if phase.accel.ndim == 2:
        return np.array(phase.accel)
    return np.tile(phase.accel, (k, 1))


def synth_truth(script, dt=DEFAULT_DT, origin=(0.0, 0.0, 0.0), calib=None):
    """Ground-truth attitude, acceleration, velocity and position.

    Parameters
    ----------
    script : MotionScript
    dt : float
    origin : array_like, shape (3,)
        Position before the first sample, navigation frame.
    calib : FrameCalibration, optional
        Only needed for ``frame="body"`` phases; identity by default.

    Raises
    ------
    ConfigError
        Empty script or non-positive ``dt``.
    """
    if not (math.isfinite(dt) and dt > 0):
        raise ConfigError(f"dt must be positive, got {dt}")
    if len(script) == 0:
        raise ConfigError("motion script has no phases")
    calib = FrameCalibration.identity() if calib is None else calib

    angles, accels, vs, ss, idx, spans = [], [], [], [], [], []
    v_prev = np.zeros(3)
    s_prev = np.array(origin, dtype=float)
    cursor = 0
    for p, phase in enumerate(script):
        k = phase.n_samples(dt)
        att = _phase_attitudes(phase, k)
        acc = _phase_accels(phase, k)
        if phase.frame == "body" and phase.kind != "rest":
            # body -> inertial -> navigation
            c = np.swapaxes(rotation_body_from_inertial(att), -1, -2)
            acc = np.einsum("ij,kjl,kl->ki", calib.r_nav_from_inertial, c, acc)
        if phase.kind == "rest":
            v = np.zeros((k, 3))
            s = np.tile(s_prev, (k, 1))
        else:
            v, s = integrate_segment(acc, dt, v_prev, s_prev)
            spans.append((cursor, cursor + k - 1))
        v_prev, s_prev = v[-1], s[-1]
        angles.append(att)
        accels.append(acc)
        vs.append(v)
        ss.append(s)
        idx.append(np.full(k, p))
        cursor += k

    n = cursor
    return Truth(
        dt=dt,
        t=np.arange(n) * dt,
        angles=np.concatenate(angles),
        a_nav=np.concatenate(accels),
        v=np.concatenate(vs),
        s=np.concatenate(ss),
        phase_index=np.concatenate(idx),
        motion_spans=tuple(spans),
    )


def _orientation_error(rng, noise, n, dt):
    w = rng.standard_normal((n, 3))
    sigma = noise.orientation_error_std
    tau = noise.orientation_error_corr_time
    if sigma == 0:
        return np.zeros((n, 3))
    if tau == 0:
        return sigma * w
    if math.isinf(tau):
        return np.tile(sigma * w[0], (n, 1))
    phi = math.exp(-dt / tau)
    drive = w * (sigma * math.sqrt(1.0 - phi * phi))
    drive[0] = sigma * w[0]
    return lfilter([1.0], [1.0, -phi], drive, axis=0)


def synth_imu(truth, calib=None, noise=NoiseModel(), gm=GravityModel()):
    """Sensor readings for a ground-truth sequence.

    The same seed always produces the same stream (white accelerometer
    noise is drawn first, then the orientation error).

    Returns
    -------
    ImuLog
    """
    calib = FrameCalibration.identity() if calib is None else calib
    n = len(truth)
    rng = np.random.default_rng(noise.seed)
    white = rng.standard_normal((n, 3)) * noise.accel_white_noise_std
    angle_err = _orientation_error(rng, noise, n, truth.dt)

    r_bi = rotation_body_from_inertial(truth.angles)
    a_inertial = truth.a_nav @ calib.r_nav_from_inertial  # R_ni^T a for each row
    specific = a_inertial + gm.vector
    raw = np.einsum("kij,kj->ki", r_bi, specific) + noise.accel_bias + white
    return ImuLog(t=truth.t.copy(), accel=raw, angles=truth.angles + angle_err)


@dataclass(frozen=True)
class DriftResult:
    """RMS position error of free (undetected) integration versus time.

    ``slope`` is the least-squares slope of log(error) against log(time),
    or ``None`` when the error is identically zero.
    """

    times: np.ndarray
    rms_error: np.ndarray
    slope: float | None
    trials: int

    def to_csv(self):
        lines = ["t_s,rms_error_m"]
        lines += [f"{float(t)!r},{float(e)!r}" for t, e in zip(self.times, self.rms_error)]
        return "\n".join(lines) + "\n"


def fit_loglog_slope(times, values):
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    if np.any(values <= 0) or times.size < 2:
        return None
    slope, _ = np.polyfit(np.log(times), np.log(values), 1)
    return float(slope)


def drift_experiment(noise, duration, trials, dt=DEFAULT_DT, n_points=20,
                     calib=None, gm=GravityModel()):
    """Monte-Carlo drift of naive double integration on a stationary sensor.

    Every sample is integrated (no stop detection). Trial ``k`` uses seed
    ``noise.seed + k``. Errors are reported at ``n_points`` logarithmically
    spaced elapsed times between ten samples and ``duration``.

    Raises
    ------
    ConfigError
        Fewer than 10 trials, or a duration shorter than ten samples.
    """
    if trials < 10:
        raise ConfigError(f"drift_experiment needs at least 10 trials, got {trials}")
    calib = FrameCalibration.identity() if calib is None else calib
    truth = synth_truth(MotionScript([Phase("rest", duration)]), dt, calib.origin_nav)
    n = len(truth)
    if n < 10:
        raise ConfigError(f"duration {duration} s is shorter than ten samples at dt={dt}")

    picks = np.unique(np.round(np.geomspace(10, n, n_points)).astype(int)) - 1
    sq = np.zeros(picks.size)
    for k in range(trials):
        log = synth_imu(truth, calib, noise.with_seed(noise.seed + k), gm)
        am_body = motion_accel_body(log.accel, log.angles, gm)
        am_nav = motion_accel_nav(am_body, log.angles, calib)
        _, s = integrate_segment(am_nav, dt, np.zeros(3), calib.origin_nav)
        err = s[picks] - truth.s[picks]
        sq += np.sum(err * err, axis=1)
    rms = np.sqrt(sq / trials)
    times = (picks + 1) * dt
    return DriftResult(times=times, rms_error=rms, slope=fit_loglog_slope(times, rms),
                       trials=trials)


def demonstration_script(base=EulerAngles.from_degrees(5.0, -10.0, 30.0),
                         pour_roll_deg=60.0):
    """Pick-and-place schedule: lift along z, carry along x, then y, then pour.

    Interval lengths follow ``DEMO_SAMPLE_COUNTS`` at the default 25 ms
    period. Each move is a swing whose acceleration is zero on the
    interval's first sample; the pouring rotation moves the hand over its
    first six samples while roll ramps by ``pour_roll_deg``.
    """
    c = DEMO_SAMPLE_COUNTS
    dt = DEFAULT_DT
    poured = EulerAngles(base.roll + math.radians(pour_roll_deg), base.pitch, base.yaw)
    pour_accel = swing_profile(c[7], (0.0, 3.0, -2.0), active=c[7] - 1)
    phases = [
        Phase("rest", c[0] * dt, attitude=base),
        Phase("swing", c[1] * dt, (0.0, 0.0, 20.0), attitude=base),
        Phase("rest", c[2] * dt, attitude=base),
        Phase("swing", c[3] * dt, (12.0, 0.0, 0.0), attitude=base),
        Phase("rest", c[4] * dt, attitude=base),
        Phase("swing", c[5] * dt, (1.5, 10.0, 0.0), attitude=base),
        Phase("rest", c[6] * dt, attitude=base),
        Phase("accel-pulse", c[7] * dt, pour_accel, attitude=base, attitude_end=poured),
        Phase("rest", c[8] * dt, attitude=poured),
    ]
    return MotionScript(phases)


def parse_motion_script(text):
    """Parse a motion script, one phase per line.

    Line format (SI units, angles in degrees)::

        kind duration ax ay az roll pitch yaw [roll_end pitch_end yaw_end]

    Blank lines and ``#`` comments are ignored.

    Raises
    ------
    ParseError
        Naming the offending line.
    """
    phases = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) not in (8, 11):
            raise ParseError(f"expected 8 or 11 fields, got {len(fields)}", lineno)
        kind = fields[0]
        try:
            nums = [float(f) for f in fields[1:]]
        except ValueError as exc:
            raise ParseError(str(exc), lineno) from None
        try:
            att = as_angle_array(np.radians(nums[4:7]))
            end = None
            if len(nums) == 10:
                end = EulerAngles(*as_angle_array(np.radians(nums[7:10])))
            phases.append(Phase(kind, nums[0], np.array(nums[1:4]),
                                attitude=EulerAngles(*att), attitude_end=end))
        except (ConfigError, ValueError) as exc:
            raise ParseError(str(exc), lineno) from None
    if not phases:
        raise ParseError("motion script has no phases")
    return MotionScript(phases)


def load_motion_script(path):
    with open(path, encoding="utf-8") as fh:
        return parse_motion_script(fh.read())


def format_truth(truth):
    """Truth CSV: time, navigation-frame acceleration, velocity, position."""
    lines = ["t_s,ax,ay,az,vx,vy,vz,sx,sy,sz"]
    for k in range(len(truth)):
        row = [truth.t[k], *truth.a_nav[k], *truth.v[k], *truth.s[k]]
        lines.append(",".join(repr(float(x)) for x in row))
    return "\n".join(lines) + "\n"
