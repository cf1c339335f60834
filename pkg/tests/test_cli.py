# test_cli.py
# Command-line surface, configuration, logging setup and file formats

import json
import logging
import logging.handlers

import numpy as np
import pytest
from numpy.testing import assert_array_equal

from hitdisk.core.config import Config, thread_cap
from hitdisk.core.logging_config import COMPONENTS, setup_logging
from hitdisk.core.main import coordinate_chain, main, parse_point
from hitdisk.modules.density.profile import density_profile
from hitdisk.modules.geometry.linear import CartesianPoint, EllipseGeometry, ProblemSpec
from hitdisk.utils.errors import ConfigurationError
from hitdisk.utils.io import profile_from_csv, profile_to_csv


@pytest.fixture(autouse=True)
def restore_logging():
    yield
    logging.getLogger().handlers.clear()


def run_cli(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_density_at_centre_is_uniform(capsys, tmp_path):
    out = tmp_path / "p.csv"
    code, _ = run_cli(capsys, "density", "--rho", "0", "--R", "1", "--start", "0,0", "--grid", "64",
                      "--output", str(out))
    assert code == 0
    frame = profile_from_csv(out)
    assert list(frame.columns) == ["alpha", "density"]
    assert np.allclose(frame["density"], 0.159154943, atol=1e-9)


def test_density_to_stdout(capsys):
    code, captured = run_cli(capsys, "density", "--rho", "0.3", "--grid", "32")
    assert code == 0
    lines = captured.out.strip().splitlines()
    assert lines[0] == "alpha,density"
    assert len(lines) == 33


def test_methods_give_matching_files(capsys, tmp_path):
    frames = []
    for method in ("annulus", "elliptic"):
        out = tmp_path / f"{method}.csv"
        code, _ = run_cli(capsys, "density", "--rho", "0.5", "--start", "0.2,0.1", "--method", method,
                          "--grid", "256", "--output", str(out))
        assert code == 0
        frames.append(profile_from_csv(out))
    assert np.max(np.abs(frames[0]["density"] - frames[1]["density"])) < 1e-7


def test_json_output_echoes_meta(capsys):
    code, captured = run_cli(capsys, "density", "--rho", "0.5", "--start", "0.1,0.1", "--grid", "16",
                             "--format", "json", "--max-terms", "2000", "--tol", "1e-13")
    assert code == 0
    data = json.loads(captured.out)
    assert len(data["alpha"]) == len(data["density"]) == 16
    assert data["meta"]["method"] == "annulus"
    assert data["meta"]["max_terms"] == 2000
    assert data["meta"]["tail_tol"] == 1e-13


def test_per_arc_length_scales_by_radius(capsys):
    _, plain = run_cli(capsys, "density", "--rho", "0.4", "--R", "2", "--start", "0.5,0", "--grid", "16",
                       "--format", "json")
    _, scaled = run_cli(capsys, "density", "--rho", "0.4", "--R", "2", "--start", "0.5,0", "--grid", "16",
                        "--format", "json", "--per-arc-length")
    plain, scaled = json.loads(plain.out), json.loads(scaled.out)
    assert np.allclose(np.array(scaled["density"]) * 2.0, plain["density"], rtol=1e-15)
    assert scaled["meta"]["per_arc_length"] is True


def test_malformed_start_is_a_usage_error(capsys):
    with pytest.raises(SystemExit) as excinfo:
        main(["density", "--rho", "0.5", "--start", "0.2;0.1"])
    assert excinfo.value.code == 2


@pytest.mark.parametrize("argv", [
    ["density", "--rho", "1.0"],
    ["density", "--rho", "0.5", "--grid", "8"],
    ["density", "--rho", "0.5", "--jobs", "0"],
    ["verify", "--skip-montecarlo", "--jobs", "0"],
    ["density"],
    ["verify", "--rho", "1.0", "--skip-montecarlo"],
    ["simulate", "--rho", "0.5", "--dt", "0"],
])
def test_invalid_parameters_exit_2(capsys, argv):
    code, _ = run_cli(capsys, *argv)
    assert code == 2


def test_start_outside_disk_exits_3(capsys):
    code, _ = run_cli(capsys, "density", "--rho", "0.5", "--start", "0.9,0.9")
    assert code == 3
    code, _ = run_cli(capsys, "transform", "--rho", "0.5", "--point", "2,0")
    assert code == 3


def test_parse_point():
    assert parse_point("0.25,-1e-3") == (0.25, -0.001)
    for bad in ("1", "1,2,3", "a,b", "nan,0"):
        with pytest.raises(Exception):
            parse_point(bad)


def test_transform_boundary_point_reaches_outer_circle():
    chain = coordinate_chain(CartesianPoint(1.0, 0.0), ProblemSpec(0.5))
    assert chain["r_theta"][0] == pytest.approx(1.0, abs=1e-12)
    assert chain["interior"] is False


def test_transform_origin_sits_on_the_focal_segment(capsys):
    code, captured = run_cli(capsys, "transform", "--rho", "0.5", "--point", "0,0")
    assert code == 0
    chain = json.loads(captured.out)
    q = EllipseGeometry.from_spec(ProblemSpec(0.5)).q
    assert chain["r_theta"][0] == pytest.approx(q, rel=1e-12)
    assert chain["eta_phi"][0] == pytest.approx(0.0, abs=1e-15)
    assert len(chain["theta_alternatives"]) == 2
    assert "focal segment" in chain["note"]


def test_transform_zero_rho_has_no_elliptic_coordinates():
    chain = coordinate_chain(CartesianPoint(0.3, 0.4), ProblemSpec(0.0))
    assert chain["eta_phi"] is None
    assert chain["r_theta"][0] == pytest.approx(0.5)


def test_simulate_with_comparison(capsys):
    code, captured = run_cli(capsys, "simulate", "--rho", "0.5", "--paths", "4000", "--dt", "1e-3",
                             "--seed", "3", "--bins", "36", "--compare", "--format", "json")
    assert code == 0
    data = json.loads(captured.out)
    assert len(data["density"]) == 36
    assert data["meta"]["method"] == "montecarlo"
    assert data["meta"]["n_paths"] == 4000
    assert 0.0 < data["meta"]["tv_to_analytic"] < 0.1


def test_simulate_is_reproducible(capsys):
    argv = ["simulate", "--rho", "-0.2", "--start", "0.3,0", "--paths", "2000", "--dt", "1e-3",
            "--seed", "8", "--bins", "18"]
    _, first = run_cli(capsys, *argv)
    _, second = run_cli(capsys, *argv)
    assert first.out == second.out


def test_verify_with_small_config(capsys, tmp_path):
    config = tmp_path / "small.json"
    config.write_text(json.dumps({"verification": {"n_random_starts": 1, "n_round_trip": 100}}))
    report = tmp_path / "report.json"
    code, _ = run_cli(capsys, "verify", "--skip-montecarlo", "--config", str(config), "--report", str(report))
    assert code == 0
    assert json.loads(report.read_text())["status"] == "passed"

    code, captured = run_cli(capsys, "verify", "--skip-montecarlo", "--corrupt-elliptic-kernel",
                             "--config", str(config))
    assert code == 1
    data = json.loads(captured.out)
    assert data["checks"]["elliptic vs annulus kernel"]["status"] == "failed"


def test_csv_round_trip_is_exact(tmp_path):
    profile = density_profile(CartesianPoint(0.3, -0.1), ProblemSpec(0.7), n_grid=128)
    path = tmp_path / "profile.csv"
    profile_to_csv(profile.to_frame(), path)
    frame = profile_from_csv(path)
    assert_array_equal(frame["alpha"].to_numpy(), profile.alphas)
    assert_array_equal(frame["density"].to_numpy(), profile.values)


def test_config_dotted_access_and_override(tmp_path):
    override = tmp_path / "c.json"
    override.write_text(json.dumps({"series": {"max_terms": 99}}))
    config = Config(override, load_env=False)
    assert config.get("series.max_terms") == 99
    assert config.get("series.tail_tol") == 1e-14
    assert config.get("missing.key", "fallback") == "fallback"
    assert config.series_control().max_terms == 99
    assert config.sim_config(R=2.0).dt == pytest.approx(4e-5)


def test_bad_configuration(tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    with pytest.raises(ConfigurationError):
        Config(broken, load_env=False)
    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps({"series": {"max_terms": "many"}}))
    with pytest.raises(ConfigurationError):
        Config(wrong, load_env=False).series_control()
    with pytest.raises(ConfigurationError):
        Config(tmp_path / "absent.json", load_env=False)


def test_bad_configuration_exits_2(capsys, tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text("[1, 2]")
    code, _ = run_cli(capsys, "density", "--rho", "0.5", "--config", str(broken))
    assert code == 2


def test_environment_overrides(monkeypatch, tmp_path):
    monkeypatch.setenv("HITDISK_LOG_LEVEL", "DEBUG")
    monkeypatch.setenv("HITDISK_LOG_FILE", str(tmp_path / "logs" / "hitdisk.log"))
    config = Config(load_env=False)
    assert config.get("logging.level") == "DEBUG"
    assert config.get("logging.file").endswith("hitdisk.log")

    monkeypatch.setenv("HITDISK_THREADS", "3")
    assert thread_cap() == 3
    for bad in ("zero", "0", "-2"):
        monkeypatch.setenv("HITDISK_THREADS", bad)
        assert thread_cap() is None
    monkeypatch.delenv("HITDISK_THREADS")
    assert thread_cap() is None


def test_setup_logging_with_rotating_file(tmp_path):
    log_file = tmp_path / "logs" / "hitdisk.log"
    loggers = setup_logging("debug", log_file)
    assert set(loggers) == set(COMPONENTS)
    assert loggers["kernels"].name == "hitdisk.kernels"
    loggers["cli"].info("hello")
    handlers = logging.getLogger().handlers
    assert any(isinstance(h, logging.handlers.RotatingFileHandler) for h in handlers)
    for handler in handlers:
        handler.flush()
    assert "hitdisk.cli - INFO - hello" in log_file.read_text()
