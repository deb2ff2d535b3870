import math
import os

import numpy as np
import pytest

from mimutrack.errors import ConfigError, IngestError, InvalidRotationError, ParseError
from mimutrack.pipeline import (
    DIAGNOSTICS_HEADER,
    LOG_HEADER,
    SEGMENTS_HEADER,
    TRAJECTORY_HEADER,
    ImuLog,
    RunConfig,
    emit_reports,
    format_imu_log,
    infer_dt,
    load_config,
    parse_config,
    parse_imu_log,
    run_pipeline,
)
from mimutrack.motiondetect import threshold_mask
from mimutrack.simulator import DEFAULT_DT, demonstration_script, synth_imu, synth_truth


def stationary_text(n, dt=0.025):
    rows = [LOG_HEADER] + [f"{k * dt!r},0.0,0.0,9.80665,0.0,0.0,0.0" for k in range(n)]
    return "\n".join(rows) + "\n"


def test_parse_single_row():
    log = parse_imu_log(LOG_HEADER + "\n0,0.0,0.0,9.80665,0.0,0.0,0.0\n")
    assert len(log) == 1
    sample = log[0]
    assert sample.t == 0.0
    np.testing.assert_array_equal(sample.accel, [0, 0, 9.80665])
    assert sample.angles.roll == 0.0


def test_parse_converts_degrees():
    log = parse_imu_log(LOG_HEADER + "\n0,0,0,9.8,90,-45,180\n")
    np.testing.assert_allclose(log.angles[0], [math.pi / 2, -math.pi / 4, math.pi])


def test_parse_short_row_names_line():
    text = LOG_HEADER + "\n0,0,0,9.8,0,0,0\n0.025,0,0,9.8,0\n"
    with pytest.raises(ParseError, match="line 3"):
        parse_imu_log(text)


@pytest.mark.parametrize("text", ["", "t,ax\n0,1\n", LOG_HEADER + "\n"])
def test_parse_rejects_empty_or_bad_header(text):
    with pytest.raises(ParseError):
        parse_imu_log(text)


def test_parse_rejects_non_monotonic():
    text = LOG_HEADER + "\n0.1,0,0,9.8,0,0,0\n0.05,0,0,9.8,0,0,0\n"
    with pytest.raises(ParseError, match="line 3"):
        parse_imu_log(text)


def test_parse_rejects_non_numeric():
    with pytest.raises(ParseError, match="line 2"):
        parse_imu_log(LOG_HEADER + "\n0,a,0,9.8,0,0,0\n")


def test_251_rows_infer_period():
    log = parse_imu_log(stationary_text(251))
    assert len(log) == 251
    assert log.t[-1] - log.t[0] == pytest.approx(6.25)
    assert infer_dt(log.t) == pytest.approx(0.025, rel=1e-12)


def test_infer_dt_jitter():
    t = np.arange(20) * 0.025
    t[10:] += 0.002  # 8% of one gap
    assert infer_dt(t) == pytest.approx(0.025)
    t[15:] += 0.003  # one gap now 12% long
    with pytest.raises(IngestError):
        infer_dt(t)


def test_log_text_roundtrip(rng):
    log = ImuLog(t=np.arange(30) * 0.025, accel=rng.standard_normal((30, 3)),
                 angles=rng.uniform(-1, 1, (30, 3)))
    back = parse_imu_log(format_imu_log(log))
    np.testing.assert_array_equal(back.t, log.t)
    np.testing.assert_array_equal(back.accel, log.accel)
    np.testing.assert_allclose(back.angles, log.angles, rtol=1e-15, atol=1e-16)


def test_imulog_from_samples():
    log = parse_imu_log(stationary_text(4))
    again = ImuLog.from_samples(log[k] for k in range(len(log)))
    np.testing.assert_array_equal(again.accel, log.accel)


def test_parse_config_defaults():
    cfg = parse_config("")
    assert (cfg.detector.window_n, cfg.detector.lambda_v, cfg.detector.lambda_m) == (2, 0.01, 4)
    assert cfg.gravity.g_magnitude == 9.80665
    np.testing.assert_array_equal(cfg.calibration.r_nav_from_inertial, np.eye(3))
    assert cfg.dt is None


def test_config_file_with_calibration(tmp_path):
    (tmp_path / "cal.txt").write_text("0 1 0\n-1 0 0\n0 0 1\n0.1 0.2 0.3\n")
    (tmp_path / "run.cfg").write_text(
        "# run\nwindow_n = 3\nlambda_v = 0.05\nlambda_m = 6\ng = 9.81\n"
        "calibration = cal.txt\ndt = 0.02\n")
    cfg = load_config(tmp_path / "run.cfg")
    assert cfg.detector == type(cfg.detector)(3, 0.05, 6)
    assert cfg.gravity.g_magnitude == 9.81
    assert cfg.dt == 0.02
    np.testing.assert_array_equal(cfg.calibration.origin_nav, [0.1, 0.2, 0.3])


@pytest.mark.parametrize("text", ["window_n 3", "speed = 2", "lambda_m = many"])
def test_parse_config_errors(text):
    with pytest.raises(ParseError):
        parse_config(text)


def test_config_value_errors():
    with pytest.raises(ConfigError):
        parse_config("window_n = 1")
    with pytest.raises(ConfigError):
        RunConfig(dt=0.0)


def test_bad_calibration_file(tmp_path):
    (tmp_path / "cal.txt").write_text("1 0 0 0 1 0 0 0 2 0 0 0\n")
    with pytest.raises(InvalidRotationError):
        parse_config("calibration = cal.txt", base_dir=str(tmp_path))


def test_stationary_log_gives_flat_trajectory():
    result = run_pipeline(parse_imu_log(stationary_text(100)))
    assert result.segments == ()
    assert not result.trajectory.s.any() and not result.trajectory.v.any()
    assert len(result.diagnostics.mask) == 100


def test_too_few_samples():
    with pytest.raises(ConfigError):
        run_pipeline(parse_imu_log(stationary_text(1)), RunConfig(dt=0.025))


@pytest.fixture(scope="module")
def demo_result():
    truth = synth_truth(demonstration_script(), DEFAULT_DT)
    return truth, run_pipeline(synth_imu(truth))


def test_demo_segments_near_script(demo_result):
    truth, result = demo_result
    assert len(result.segments) == 4
    for seg, (b, e) in zip(result.segments, truth.motion_spans):
        assert abs(seg.begin - b) <= 4 and abs(seg.end - e) <= 4


def test_demo_noiseless_displacement(demo_result):
    truth, result = demo_result
    np.testing.assert_allclose(result.trajectory.s[-1], truth.s[-1], rtol=0, atol=1e-9)


def test_diagnostic_lengths(demo_result):
    _, result = demo_result
    d = result.diagnostics
    assert d.am_nav.shape == (251, 3)
    assert len(d.a_mr) == len(d.variance) == len(d.mask) == 251


def test_reports(tmp_path, demo_result):
    _, result = demo_result
    emit_reports(result, tmp_path)
    traj = (tmp_path / "trajectory.csv").read_text().splitlines()
    assert traj[0] == TRAJECTORY_HEADER and len(traj) == 252
    segs = (tmp_path / "segments.csv").read_text().splitlines()
    assert segs[0] == SEGMENTS_HEADER and len(segs) == 5
    durations = [float(row.split(",")[4]) for row in segs[1:]]
    for got, want in zip(durations, (175, 275, 350, 125)):
        assert abs(got - want) <= 25 + 1e-9
    diag = (tmp_path / "diagnostics.csv").read_text().splitlines()
    assert diag[0] == DIAGNOSTICS_HEADER
    sigma2 = np.array([float(r.split(",")[2]) for r in diag[1:]])
    mask = np.array([int(r.split(",")[3]) for r in diag[1:]])
    np.testing.assert_array_equal(mask, threshold_mask(sigma2, 0.01))
    summary = (tmp_path / "summary.txt").read_text()
    assert "motion_segments: 4" in summary and "extent_z_m" in summary


def test_reports_without_segments(tmp_path):
    emit_reports(run_pipeline(parse_imu_log(stationary_text(20))), tmp_path)
    assert (tmp_path / "segments.csv").read_text() == SEGMENTS_HEADER + "\n"


def test_reports_are_deterministic(tmp_path, demo_result):
    _, result = demo_result
    truth = synth_truth(demonstration_script(), DEFAULT_DT)
    again = run_pipeline(synth_imu(truth))
    emit_reports(result, tmp_path / "a")
    emit_reports(again, tmp_path / "b")
    for name in os.listdir(tmp_path / "a"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_reports_unwritable(tmp_path, demo_result):
    _, result = demo_result
    blocker = tmp_path / "file"
    blocker.write_text("x")
    with pytest.raises(OSError):
        emit_reports(result, blocker / "sub")
