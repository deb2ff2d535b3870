"""
Gravity separation and projection of motion acceleration.

The accelerometer reading in the body frame is modelled as motion plus a
gravity term ``R_bi @ (0, 0, g)``; at rest and level it reads ``+g`` on body
z. Sensor error is taken as zero here, it only exists in the simulator.

All functions accept single vectors/attitudes or ``(N, 3)`` batches.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from mimutrack.errors import ConfigError
from mimutrack.frames import compose_body_from_nav, rotation_body_from_inertial

STANDARD_GRAVITY = 9.80665


@dataclass(frozen=True)
class GravityModel:
    g_magnitude: float = STANDARD_GRAVITY

    def __post_init__(self):
        if not (np.isfinite(self.g_magnitude) and self.g_magnitude > 0):
            raise ConfigError(f"gravity magnitude must be positive, got {self.g_magnitude}")

    @property
    def vector(self):
        """Gravity in the inertial frame, z up."""
        return np.array([0.0, 0.0, self.g_magnitude])


def _as_vectors(a, name):
    arr = np.asarray(a, dtype=float)
    if arr.ndim == 0 or arr.shape[-1] != 3:
        raise ValueError(f"{name} must have trailing dimension 3, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} has non-finite components")
    return arr


def gravity_in_body(e, gm=GravityModel()):
    """Gravity expressed in the body frame, ``R_bi @ (0, 0, g)``.

    Only the third column of ``R_bi`` is needed.
    """
    r_bi = rotation_body_from_inertial(e)
    return r_bi[..., :, 2] * gm.g_magnitude


def motion_accel_body(raw, e, gm=GravityModel()):
    """Body-frame motion acceleration: raw reading minus body-frame gravity."""
    raw = _as_vectors(raw, "raw acceleration")
    return raw - gravity_in_body(e, gm)


def motion_accel_nav(am_body, e, calib):
    """Project body-frame motion acceleration into the navigation frame.

    Computes ``R_bn^T @ am_body`` with ``R_bn = R_bi @ R_ni^T``.

    Parameters
    ----------
    am_body : array_like, shape (..., 3)
    e : EulerAngles or array_like, shape (..., 3)
        Attitude for each vector.
    calib : FrameCalibration
    """
    am_body = _as_vectors(am_body, "motion acceleration")
    r_bn = compose_body_from_nav(rotation_body_from_inertial(e), calib)
    # R^T v for each (R, v) pair
    return np.einsum("...ji,...j->...i", r_bn, am_body)
