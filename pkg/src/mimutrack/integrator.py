"""Double integration of navigation-frame motion acceleration.

Rectangular accumulation with the velocity updated first::

    v(k) = v(k-1) + a(k) dt
    s(k) = s(k-1) + v(k) dt

:func:`reconstruct` applies this only inside motion segments. Velocity is
reset to zero when each segment opens and held at zero outside segments,
while position is held at its last value.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mimutrack.errors import ConfigError, InvalidSegmentsError
from mimutrack.motiondetect import MotionSegment


@dataclass(frozen=True)
class TrajectoryState:
    t: float
    v: np.ndarray
    s: np.ndarray


@dataclass(frozen=True)
class TrajectoryEstimate:
    """Per-sample velocity and displacement in the navigation frame.

    Attributes
    ----------
    t : numpy.ndarray, shape (N,)
    v : numpy.ndarray, shape (N, 3)
        m/s
    s : numpy.ndarray, shape (N, 3)
        m
    segments : tuple of MotionSegment
        Segments inside which integration ran.
    """

    t: np.ndarray
    v: np.ndarray
    s: np.ndarray
    segments: tuple = ()

    def __len__(self):
        return len(self.t)

    def __getitem__(self, k):
        return TrajectoryState(float(self.t[k]), self.v[k], self.s[k])


def _check_dt(dt):
    if not (np.isfinite(dt) and dt > 0):
        raise ConfigError(f"dt must be positive, got {dt}")


def integrate_segment(accels, dt, v0=(0.0, 0.0, 0.0), s0=(0.0, 0.0, 0.0)):
    """Integrate accelerations once to velocity and again to position.

    Parameters
    ----------
    accels : array_like, shape (N, 3)
        Navigation-frame motion accelerations, m/s^2.
    dt : float
        Sample period, s.
    v0, s0 : array_like, shape (3,)
        State before the first sample.

    Returns
    -------
    v, s : numpy.ndarray, shape (N, 3)
        State after each sample has been applied.
    """
    _check_dt(dt)
    a = np.asarray(accels, dtype=float).reshape(-1, 3)
    if not np.all(np.isfinite(a)):
        raise ValueError("accelerations must be finite")
    if a.shape[0] == 0:
        return np.zeros((0, 3)), np.zeros((0, 3))

    # cumsum accumulates sequentially, so seeding the first term with the
    # initial state reproduces the recurrence operation for operation
    dv = a * dt
    dv[0] += np.asarray(v0, dtype=float)
    v = np.cumsum(dv, axis=0)
    ds = v * dt
    ds[0] += np.asarray(s0, dtype=float)
    s = np.cumsum(ds, axis=0)
    return v, s


def validate_segments(segments, n):
    prev_end = -1
    for seg in segments:
        if not isinstance(seg, MotionSegment):
            seg = MotionSegment(*seg)
        if seg.begin <= prev_end:
            raise InvalidSegmentsError(f"segment {seg} overlaps or precedes the previous one")
        if seg.end >= n:
            raise InvalidSegmentsError(f"segment {seg} exceeds sequence length {n}")
        prev_end = seg.end


def reconstruct(am_nav, segments, dt, origin=(0.0, 0.0, 0.0), times=None):
    """Trajectory from motion accelerations integrated only inside segments.

    Parameters
    ----------
    am_nav : array_like, shape (N, 3)
    segments : sequence of MotionSegment
        Disjoint, increasing, within ``[0, N)``.
    dt : float
    origin : array_like, shape (3,)
        Position before the first sample.
    times : array_like, shape (N,), optional
        Sample timestamps; defaults to ``k * dt``.

    Raises
    ------
    InvalidSegmentsError
        Segments overlapping, unordered or out of range.
    """
    _check_dt(dt)
    a = np.asarray(am_nav, dtype=float).reshape(-1, 3)
    n = a.shape[0]
    segments = tuple(seg if isinstance(seg, MotionSegment) else MotionSegment(*seg)
                     for seg in segments)
    validate_segments(segments, n)

    t = np.arange(n) * dt if times is None else np.asarray(times, dtype=float)
    if t.shape != (n,):
        raise ValueError(f"times has shape {t.shape}, expected ({n},)")

    v = np.zeros((n, 3))
    s = np.empty((n, 3))
    held = np.array(origin, dtype=float)
    cursor = 0
    for seg in segments:
        s[cursor:seg.begin] = held
        v_seg, s_seg = integrate_segment(a[seg.begin:seg.end + 1], dt, np.zeros(3), held)
        v[seg.begin:seg.end + 1] = v_seg
        s[seg.begin:seg.end + 1] = s_seg
        held = s_seg[-1]
        cursor = seg.end + 1
    s[cursor:] = held
    return TrajectoryEstimate(t=t, v=v, s=s, segments=segments)
