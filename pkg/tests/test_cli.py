import pytest

from mimutrack.cli import main

CLOSURE = """rest 2.0 0 0 0 10 -5 30
swing 0.5 1 0 0 10 -5 30
rest 2.0 0 0 0 10 -5 30
"""


@pytest.fixture
def script(tmp_path):
    path = tmp_path / "closure.txt"
    path.write_text(CLOSURE)
    return path


def test_simulate_then_run(tmp_path, script, capsys):
    assert main(["simulate", str(script), "--out", str(tmp_path / "sim")]) == 0
    log = tmp_path / "sim" / "imu_log.csv"
    assert log.read_text().startswith("t_s,ax,ay,az,roll_deg,pitch_deg,yaw_deg\n")
    assert (tmp_path / "sim" / "truth.csv").exists()
    assert main(["run", str(log), "--out", str(tmp_path / "out")]) == 0
    segs = (tmp_path / "out" / "segments.csv").read_text().splitlines()
    assert len(segs) == 2
    assert "1 motion segments" in capsys.readouterr().out


def test_roundtrip(script, capsys):
    assert main(["roundtrip", str(script)]) == 0
    out = capsys.readouterr().out
    err = float(out.split("max displacement error:")[1].split()[0])
    assert err < 1e-9


def test_simulate_seed_reproducible(tmp_path, script):
    for name in ("a", "b"):
        main(["simulate", str(script), "--out", str(tmp_path / name), "--seed", "3",
              "--accel-noise", "0.05", "--orientation-noise-deg", "0.5"])
    assert (tmp_path / "a" / "imu_log.csv").read_bytes() == (tmp_path / "b" / "imu_log.csv").read_bytes()


def test_drift(tmp_path, capsys):
    assert main(["drift", "--duration", "10", "--trials", "10", "--out", str(tmp_path)]) == 0
    assert "log-log slope:" in capsys.readouterr().out
    assert (tmp_path / "drift.csv").read_text().startswith("t_s,rms_error_m\n")


def test_drift_zero_noise_not_applicable(capsys):
    assert main(["drift", "--duration", "2", "--trials", "10", "--accel-noise", "0"]) == 0
    assert "n/a" in capsys.readouterr().out


def test_parse_error_exit_code(tmp_path, capsys):
    bad = tmp_path / "bad.csv"
    bad.write_text("t_s,ax,ay,az,roll_deg,pitch_deg,yaw_deg\n0,0,0,9.8,0,0,0\n0.025,0,0\n")
    assert main(["run", str(bad), "--out", str(tmp_path / "o")]) == 1
    assert "line 3" in capsys.readouterr().err


def test_missing_file_exit_code(tmp_path, capsys):
    assert main(["run", str(tmp_path / "missing.csv")]) == 1


def test_dt_override(tmp_path, script):
    main(["simulate", str(script), "--out", str(tmp_path), "--dt", "0.01"])
    lines = (tmp_path / "imu_log.csv").read_text().splitlines()
    assert len(lines) == 451
    assert main(["run", str(tmp_path / "imu_log.csv"), "--dt", "0.01",
                 "--out", str(tmp_path / "o")]) == 0
