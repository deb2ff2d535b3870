"""Dead-reckoning of hand/device trajectories from MIMU logs.

Motion acceleration is separated from gravity using the reported attitude,
projected into a navigation frame, and double integrated only inside the
motion segments found by a sliding-variance detector.
"""

from mimutrack.errors import (
    ConfigError,
    InvalidAnglesError,
    InvalidRotationError,
    InvalidSegmentsError,
    MimuError,
    ParseError,
)
from mimutrack.frames import (
    EulerAngles,
    FrameCalibration,
    compose_body_from_nav,
    rotation_body_from_inertial,
)
from mimutrack.gravity import (
    GravityModel,
    gravity_in_body,
    motion_accel_body,
    motion_accel_nav,
)
from mimutrack.motiondetect import (
    DetectorConfig,
    MotionSegment,
    resultant_accel,
    segment_motion,
    sliding_variance,
    threshold_mask,
)
from mimutrack.integrator import (
    TrajectoryEstimate,
    TrajectoryState,
    integrate_segment,
    reconstruct,
)
from mimutrack.simulator import (
    MotionScript,
    NoiseModel,
    Phase,
    drift_experiment,
    synth_imu,
    synth_truth,
)
from mimutrack.pipeline import (
    ImuLog,
    ImuSample,
    RunConfig,
    emit_reports,
    parse_imu_log,
    run_pipeline,
)

__version__ = "0.1.0"
