"""
Attitude algebra and the inertial-to-navigation calibration transform.

Frames
------
{I}  inertial: locally level, z up (away from Earth's centre)
{B}  body: fixed to the MIMU
{N}  navigation: task frame fixed to the workspace, tied to {I} by calibration

Euler convention
----------------
Intrinsic Z-Y-X (yaw, then pitch, then roll). The body-to-inertial DCM is
``Rz(yaw) @ Ry(pitch) @ Rx(roll)``; :func:`rotation_body_from_inertial`
returns its transpose, i.e. the matrix that maps inertial coordinates into
body coordinates. Angles are radians everywhere in this package.

Rotation matrices are plain ``numpy`` arrays of shape ``(3, 3)`` (or
``(N, 3, 3)`` for batches).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from mimutrack.errors import InvalidAnglesError, InvalidRotationError, ParseError

# Orthonormality tolerance for matrices produced internally.
ROTATION_TOL = 1e-12
# Looser tolerance for rotations read from calibration files.
INGEST_TOL = 1e-6


@dataclass(frozen=True)
class EulerAngles:
    """Roll, pitch and yaw in radians."""

    roll: float
    pitch: float
    yaw: float

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.roll, self.pitch, self.yaw)):
            raise InvalidAnglesError(f"non-finite Euler angles: {self!r}")

    @classmethod
    def from_degrees(cls, roll, pitch, yaw):
        return cls(math.radians(roll), math.radians(pitch), math.radians(yaw))

    def as_array(self):
        return np.array([self.roll, self.pitch, self.yaw], dtype=float)

    def normalized(self):
        """Equivalent triple with pitch in [-pi/2, pi/2] and roll, yaw in (-pi, pi].

        Both triples describe the same attitude, so the rotation matrix is
        unchanged (up to rounding).
        """
        roll, pitch, yaw = self.roll, _wrap(self.pitch), self.yaw
        if pitch > math.pi / 2:
            roll, pitch, yaw = roll + math.pi, math.pi - pitch, yaw + math.pi
        elif pitch < -math.pi / 2:
            roll, pitch, yaw = roll + math.pi, -math.pi - pitch, yaw + math.pi
        return EulerAngles(_wrap(roll), pitch, _wrap(yaw))


def _wrap(angle):
    wrapped = math.remainder(angle, 2 * math.pi)
    return math.pi if wrapped == -math.pi else wrapped


def as_angle_array(e):
    """Convert an ``EulerAngles`` or ``(..., 3)`` array of [roll, pitch, yaw] to floats.

    Raises
    ------
    InvalidAnglesError
        If the shape is wrong or any angle is non-finite.
    """
    if isinstance(e, EulerAngles):
        return e.as_array()
    arr = np.asarray(e, dtype=float)
    if arr.ndim == 0 or arr.shape[-1] != 3:
        raise InvalidAnglesError(f"expected [roll, pitch, yaw] triples, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidAnglesError("non-finite Euler angles")
    return arr


def rotation_body_from_inertial(e):
    """Rotation that maps inertial-frame vectors into the body frame.

    Parameters
    ----------
    e : EulerAngles or array_like, shape (..., 3)
        Attitude as [roll, pitch, yaw] in radians.

    Returns
    -------
    numpy.ndarray, shape (..., 3, 3)
        ``(Rz(yaw) Ry(pitch) Rx(roll))^T``.
    """
    ang = as_angle_array(e)
    cr, sr = np.cos(ang[..., 0]), np.sin(ang[..., 0])
    cp, sp = np.cos(ang[..., 1]), np.sin(ang[..., 1])
    cy, sy = np.cos(ang[..., 2]), np.sin(ang[..., 2])

    # rows of the transpose are the columns of the body-to-inertial DCM
    r = np.empty(ang.shape[:-1] + (3, 3))
    r[..., 0, 0] = cy * cp
    r[..., 0, 1] = sy * cp
    r[..., 0, 2] = -sp
    r[..., 1, 0] = cy * sp * sr - sy * cr
    r[..., 1, 1] = sy * sp * sr + cy * cr
    r[..., 1, 2] = cp * sr
    r[..., 2, 0] = cy * sp * cr + sy * sr
    r[..., 2, 1] = sy * sp * cr - cy * sr
    r[..., 2, 2] = cp * cr
    return r


def orthonormality_error(r):
    """Max-abs entry of ``R^T R - I`` (per matrix for batches)."""
    r = np.asarray(r, dtype=float)
    gram = np.swapaxes(r, -1, -2) @ r
    return np.max(np.abs(gram - np.eye(3)), axis=(-2, -1))


def check_rotation(r, tol=ROTATION_TOL):
    """Validate a proper rotation matrix (or batch) and return it as an array.

    Raises
    ------
    InvalidRotationError
        Wrong shape, non-finite entries, orthonormality or determinant off by
        more than ``tol``.
    """
    r = np.asarray(r, dtype=float)
    if r.shape[-2:] != (3, 3):
        raise InvalidRotationError(f"expected 3x3 matrix, got shape {r.shape}")
    if not np.all(np.isfinite(r)):
        raise InvalidRotationError("rotation has non-finite entries")
    if np.any(orthonormality_error(r) > tol):
        raise InvalidRotationError("matrix is not orthonormal")
    if np.any(np.abs(np.linalg.det(r) - 1.0) > tol):
        raise InvalidRotationError("matrix determinant is not +1")
    return r


def orthonormalize(r):
    """Nearest-orthonormal projection by Gram-Schmidt on the rows of ``r``."""
    r = np.asarray(r, dtype=float)
    out = np.empty((3, 3))
    for i in range(3):
        row = r[i].copy()
        for j in range(i):
            row -= np.dot(row, out[j]) * out[j]
        out[i] = row / np.linalg.norm(row)
    return out


@dataclass(frozen=True)
class FrameCalibration:
    """Pose of the inertial frame relative to the navigation frame.

    Attributes
    ----------
    r_nav_from_inertial : numpy.ndarray, shape (3, 3)
        Maps inertial-frame vectors to navigation-frame vectors.
    origin_nav : numpy.ndarray, shape (3,)
        Initial MIMU position in the navigation frame, metres.
    """

    r_nav_from_inertial: np.ndarray = field(default_factory=lambda: np.eye(3))
    origin_nav: np.ndarray = field(default_factory=lambda: np.zeros(3))

    def __post_init__(self):
        r = check_rotation(np.array(self.r_nav_from_inertial, dtype=float))
        origin = np.array(self.origin_nav, dtype=float).reshape(-1)
        if origin.shape != (3,) or not np.all(np.isfinite(origin)):
            raise InvalidRotationError("calibration origin must be a finite 3-vector")
        r.setflags(write=False)
        origin.setflags(write=False)
        object.__setattr__(self, "r_nav_from_inertial", r)
        object.__setattr__(self, "origin_nav", origin)

    @classmethod
    def identity(cls):
        return cls()

    @classmethod
    def from_entries(cls, values, tol=INGEST_TOL):
        """Build from nine row-major rotation entries followed by three origin entries.

        Rotations within ``tol`` of orthonormal are re-orthonormalized; anything
        further off is rejected.
        """
        values = np.asarray(values, dtype=float)
        if values.shape != (12,):
            raise InvalidRotationError(f"expected 12 calibration values, got {values.size}")
        r = check_rotation(values[:9].reshape(3, 3), tol=tol)
        return cls(orthonormalize(r), values[9:])

    def to_text(self):
        rows = [" ".join(repr(float(v)) for v in row) for row in self.r_nav_from_inertial]
        return "\n".join(rows + [" ".join(repr(float(v)) for v in self.origin_nav)]) + "\n"


def parse_calibration(text):
    """Parse a calibration record: 12 whitespace-separated numbers.

    Lines starting with ``#`` are ignored, so the record may be spread over
    several lines.

    Raises
    ------
    ParseError
        Non-numeric token or wrong number of values.
    InvalidRotationError
        Rotation further than 1e-6 from orthonormal.
    """
    tokens = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.split("#", 1)[0]
        for tok in line.split():
            try:
                tokens.append(float(tok))
            except ValueError:
                raise ParseError(f"not a number: {tok!r}", lineno) from None
    if len(tokens) != 12:
        raise ParseError(f"calibration needs 12 values, found {len(tokens)}")
    return FrameCalibration.from_entries(tokens)


def load_calibration(path):
    with open(path, encoding="utf-8") as fh:
        return parse_calibration(fh.read())


def compose_body_from_nav(r_bi, calib):
    """Rotation from navigation to body frame: ``R_bi @ R_ni^T``.

    Parameters
    ----------
    r_bi : array_like, shape (..., 3, 3)
        Inertial-to-body rotation(s).
    calib : FrameCalibration
    """
    r_bi = check_rotation(r_bi)
    return r_bi @ calib.r_nav_from_inertial.T
