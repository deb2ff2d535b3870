"""Motion/stop detection from the resultant motion acceleration.

The detector computes the magnitude of navigation-frame motion acceleration,
its variance over a trailing window, thresholds that variance into a binary
mask, and finally groups the mask into motion segments, bridging short runs
of zeros.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from mimutrack.errors import ConfigError, InvalidSegmentsError


@dataclass(frozen=True)
class DetectorConfig:
    """Detector parameters.

    Attributes
    ----------
    window_n : int
        Samples per variance window (>= 2).
    lambda_v : float
        Variance threshold, (m/s^2)^2. A variance equal to the threshold
        counts as motion.
    lambda_m : int
        Lookahead length, samples: a run of zeros is bridged when a motion
        sample occurs within this many samples after the last one.
    """

    window_n: int = 2
    lambda_v: float = 0.01
    lambda_m: int = 4

    def __post_init__(self):
        if int(self.window_n) != self.window_n or self.window_n < 2:
            raise ConfigError(f"window_n must be an integer >= 2, got {self.window_n}")
        if not (np.isfinite(self.lambda_v) and self.lambda_v > 0):
            raise ConfigError(f"lambda_v must be positive, got {self.lambda_v}")
        if int(self.lambda_m) != self.lambda_m or self.lambda_m < 1:
            raise ConfigError(f"lambda_m must be an integer >= 1, got {self.lambda_m}")


@dataclass(frozen=True, order=True)
class MotionSegment:
    """Inclusive sample-index range ``[begin, end]`` of effective motion."""

    begin: int
    end: int

    def __post_init__(self):
        if self.begin < 0 or self.end < self.begin:
            raise InvalidSegmentsError(f"invalid segment [{self.begin}, {self.end}]")

    def __len__(self):
        return self.end - self.begin + 1

    def __contains__(self, index):
        return self.begin <= index <= self.end


def resultant_accel(am_nav):
    """Euclidean norm of each acceleration vector (last axis)."""
    am_nav = np.asarray(am_nav, dtype=float)
    if am_nav.shape[-1] != 3:
        raise ValueError(f"expected trailing dimension 3, got shape {am_nav.shape}")
    return np.sqrt(np.sum(am_nav * am_nav, axis=-1))


def sliding_variance(series, window_n):
    """Sample variance (divisor ``n - 1``) of each trailing window.

    Element ``i`` holds the variance of ``series[i - n + 1 : i + 1]`` about
    that window's own mean. The first ``n - 1`` elements have no full
    window and are 0.

    Raises
    ------
    ConfigError
        ``window_n < 2`` or the series is shorter than one window.
    """
    x = np.asarray(series, dtype=float).reshape(-1)
    if int(window_n) != window_n or window_n < 2:
        raise ConfigError(f"window_n must be an integer >= 2, got {window_n}")
    window_n = int(window_n)
    if x.size < window_n:
        raise ConfigError(f"series of length {x.size} is shorter than window {window_n}")

    out = np.zeros_like(x)
    if window_n == 2:
        # two-sample variance reduces to half the squared difference
        d = np.diff(x)
        out[1:] = d * d / 2
    else:
        out[window_n - 1:] = sliding_window_view(x, window_n).var(axis=-1, ddof=1)
    return out


def threshold_mask(variances, lambda_v):
    """1 where ``variance >= lambda_v``, else 0 (``uint8`` array)."""
    v = np.asarray(variances, dtype=float)
    if not np.all(np.isfinite(v)):
        raise ValueError("variances must be finite")
    return (v >= lambda_v).astype(np.uint8)


def segment_motion(mask, lambda_m):
    """Group a binary motion mask into segments.

    Scanning left to right, a segment opens at the first 1. From the current
    motion index ``i`` the next ``lambda_m`` samples (``i+1 .. i+lambda_m``)
    are inspected; if any is 1 the scan jumps to the last such 1 and repeats,
    otherwise the segment closes at ``i``. Samples past the end of the mask
    count as 0.

    Returns
    -------
    list of MotionSegment
        Disjoint, strictly increasing segments.
    """
    m = np.asarray(mask).reshape(-1)
    if lambda_m < 1:
        raise ConfigError(f"lambda_m must be >= 1, got {lambda_m}")
    n = m.size
    segments = []
    i = 0
    while i < n:
        if not m[i]:
            i += 1
            continue
        begin = updated = i
        while True:
            stop = min(i + lambda_m, n - 1)
            for j in range(i + 1, stop + 1):
                if m[j]:
                    updated = j
            if updated > i:
                i = updated
            else:
                break
        segments.append(MotionSegment(begin, updated))
        i = updated + 1
    return segments


def segments_to_mask(segments, n):
    """Boolean array of length ``n`` that is True inside any segment."""
    inside = np.zeros(n, dtype=bool)
    for seg in segments:
        inside[seg.begin:seg.end + 1] = True
    return inside
