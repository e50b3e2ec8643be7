import json
import math
import os

import pytest
from click.testing import CliRunner

from isofk.cli import OUTPUT_ENV, main, parse_number

TINY_XI = ["--q", "9", "--theta", "0,pi/4", "--n-grid", "2,4", "--width", "12", "--height", "12",
           "--replicas", "2", "--measurements", "4", "--burn-in", "5"]


def invoke(args, **kw):
    res = CliRunner().invoke(main, args, catch_exceptions=False, **kw)
    return res


def run_path(res):
    return res.output.strip().splitlines()[-1]


def read(path, name):
    with open(os.path.join(path, name)) as fh:
        return fh.read()


@pytest.mark.parametrize("text,value", [
    ("pi", math.pi), ("pi/3", math.pi / 3), ("2pi/3", 2 * math.pi / 3), ("2*pi", 2 * math.pi),
    ("0.5pi", 0.5 * math.pi), ("1.25", 1.25), (3, 3.0),
])
def test_parse_number(text, value):
    assert parse_number(text) == pytest.approx(value, abs=1e-15)


def test_parse_number_rejects():
    with pytest.raises(ValueError):
        parse_number("tau")


def test_validate_exit_status():
    res = CliRunner().invoke(main, ["validate", "--quick"])
    assert res.exit_code == 0
    assert "FAIL" not in res.output and "backend:" in res.output


def test_validate_fails_on_tampered_cache(tmp_path):
    from isofk.dynamics import KernelCache

    cache = KernelCache(str(tmp_path))
    cache.get(math.pi / 3, math.pi / 2, 4.0)
    path = cache.path(math.pi / 3, math.pi / 2, 4.0)
    with open(path, "a") as fh:
        fh.write("junk\n")
    res = CliRunner().invoke(main, ["validate", "--quick", "--kernel-cache", str(tmp_path)])
    assert res.exit_code == 1
    assert "FAIL kernel cache" in res.output


def test_xi_outputs_and_hash(tmp_path):
    res = invoke(["xi", "--out", str(tmp_path), "--jobs", "1"] + TINY_XI)
    path = run_path(res)
    manifest = json.loads(read(path, "manifest.json"))
    assert manifest["command"] == "xi"
    assert manifest["config"]["theta"] == [0.0, math.pi / 4]
    text = read(path, "decay.csv")
    first = text.splitlines()[0]
    assert first.startswith("# manifest-sha256=")
    assert os.path.basename(path) == "xi-" + first.split("=")[1][:12]
    assert len(text.splitlines()) == 2 + 2 * 2


def test_jobs_do_not_change_results(tmp_path):
    a = run_path(invoke(["xi", "--out", str(tmp_path / "a"), "--jobs", "1"] + TINY_XI))
    b = run_path(invoke(["xi", "--out", str(tmp_path / "b"), "--jobs", "2"] + TINY_XI))
    assert read(a, "decay.csv") == read(b, "decay.csv")
    c = run_path(invoke(["xi", "--out", str(tmp_path / "c"), "--jobs", "1",
                         "--from-manifest", os.path.join(a, "manifest.json")]))
    assert read(a, "decay.csv") == read(c, "decay.csv")


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# tiny run\nq = 9\ntheta = 0\nn-grid = 2,4\nwidth = 12\nheight = 12\n"
                   "replicas = 2\nmeasurements = 4\nburn_in = 5\nseed = 3\n")
    path = run_path(invoke(["zeta", "--out", str(tmp_path), "--jobs", "1", "--config", str(cfg),
                            "--seed", "7"]))
    conf = json.loads(read(path, "manifest.json"))["config"]
    assert conf["seed"] == 7
    assert conf["width"] == 12 and conf["n_grid"] == [2.0, 4.0]
    bad = tmp_path / "bad.cfg"
    bad.write_text("colour = red\n")
    res = CliRunner().invoke(main, ["zeta", "--out", str(tmp_path), "--config", str(bad)])
    assert res.exit_code != 0 and "unknown configuration key" in res.output


def test_output_root_from_environment(tmp_path):
    res = invoke(["zeta", "--jobs", "1", "--half-plane", "--theta", "pi/2"] + TINY_XI[:2] + TINY_XI[4:],
                 env={OUTPUT_ENV: str(tmp_path)})
    path = run_path(res)
    assert path.startswith(str(tmp_path))
    assert json.loads(read(path, "manifest.json"))["config"]["half_plane"] is True


def test_half_plane_rejects_downward_direction(tmp_path):
    res = CliRunner().invoke(main, ["zeta", "--out", str(tmp_path), "--half-plane",
                                    "--theta", "3pi/2"] + TINY_XI[:2])
    assert res.exit_code != 0


def test_range_checks(tmp_path):
    res = CliRunner().invoke(main, ["xi", "--out", str(tmp_path), "--q", "0.5"])
    assert res.exit_code != 0 and "q must be at least 1" in res.output
    res = CliRunner().invoke(main, ["coupling", "--out", str(tmp_path), "--alpha", "pi"])
    assert res.exit_code != 0
    res = CliRunner().invoke(main, ["isotropy", "--out", str(tmp_path), "--q", "4"])
    assert res.exit_code != 0


def test_wired_warning(tmp_path):
    res = CliRunner().invoke(
        main, ["xi", "--out", str(tmp_path), "--jobs", "1", "--bc", "wired"] + TINY_XI)
    assert res.exit_code == 0
    assert "wired" in res.stderr


def test_isotropy_and_wulff(tmp_path):
    path = run_path(invoke(["isotropy", "--out", str(tmp_path), "--jobs", "1",
                            "--q", "9", "--theta", "0,pi/8,pi/4"] + TINY_XI[4:]))
    iso = read(path, "isotropy.csv").splitlines()
    assert iso[0].startswith("# manifest-sha256=")
    assert iso[1] == "q,xi_ratio,xi_ratio_se,roundness,roundness_dual"
    assert float(iso[2].split(",")[4]) >= 1
    assert os.path.exists(os.path.join(path, "wulff_q9.svg"))
    out = run_path(invoke(["wulff", "--out", str(tmp_path), "--input",
                           os.path.join(path, "decay.csv")]))
    rows = read(out, "roundness.csv").splitlines()
    assert len(rows) == 3
    assert float(rows[2].split(",")[1]) >= 1


def test_coupling_command(tmp_path):
    res = invoke(["coupling", "--out", str(tmp_path), "--jobs", "1", "--n-block", "4",
                  "--width", "12", "--replicas", "2", "--burn-in", "5"])
    path = run_path(res)
    diag = json.loads(read(path, "diagnostics.json"))
    assert diag["max_abs_delta"] <= 4 and diag["increments"] > 0
    assert read(path, "trace.csv").startswith("# manifest-sha256=")
    assert read(path, "drift.csv").splitlines()[1] == "t,bin,mean,se,count"


def test_coupling_needs_q_four(tmp_path):
    res = CliRunner().invoke(main, ["coupling", "--out", str(tmp_path), "--q", "3"])
    assert res.exit_code != 0


def test_iic_drift_command(tmp_path):
    res = invoke(["iic-drift", "--out", str(tmp_path), "--jobs", "1", "--n", "6",
                  "--window-radius", "2", "--attempts", "40", "--replicas", "1", "--burn-in", "5"])
    path = run_path(res)
    summary = json.loads(read(path, "summary.json"))
    assert summary["max_abs"] <= 4
    assert len(summary["acceptance_rates"]) == 1


def test_critical_command(tmp_path):
    res = invoke(["critical", "--out", str(tmp_path), "--jobs", "1", "--n", "4", "--big-r", "4,6",
                  "--replicas", "1", "--measurements", "3", "--burn-in", "5"])
    path = run_path(res)
    crossing = read(path, "crossing.csv").splitlines()
    assert len(crossing) == 2 + 2
    assert read(path, "arms.csv").splitlines()[1] == "r,R,hits,trials,p_hat,p_se"
