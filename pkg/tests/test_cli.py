import json
import math
import subprocess
import sys

import pytest

from selfint import cli
from selfint.bounds import GrowthBound
from selfint.census import enumerate_census, load_census, save_census
from selfint.hyperbolic import HPoint, UnitTangent
from selfint.tracer import trace


def run(capsys, *argv):
    code = cli.main(list(argv))
    return code, json.loads(capsys.readouterr().out)


@pytest.fixture(scope="module")
def files(tmp_path_factory, S):
    """A surface file carrying fixed constants, and an L = 6 census."""
    d = tmp_path_factory.mktemp("cli")
    gb = GrowthBound(C=0.95, R_hat=10.0, a_X=math.e, injectivity_radius=1.128)
    cli.write_surface(str(d / "surface.txt"), S, gb, {"note": "fixed"})
    save_census(enumerate_census(S, 6.0), d / "census.csv")
    return d, gb


def test_parse_budget():
    assert cli.parse_budget("zero")(5.0) == 0.0
    assert cli.parse_budget("linear:2")(3.0) == 6.0
    assert cli.parse_budget("quadratic:0.1")(10.0) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        cli.parse_budget("cubic:1")


def test_help_lists_commands():
    out = subprocess.run([sys.executable, "-m", "selfint.cli", "--help"], capture_output=True,
                         text=True, check=True).stdout
    for name in ("surface", "census", "trace", "close-arc", "cover", "dimension", "experiment"):
        assert name in out


def test_trace_report(S, capsys, tmp_path):
    code, rep = run(capsys, "trace", "--x", "0.1", "--y", "1.1", "--angle", "0.4", "--length", "7",
                    "--out", str(tmp_path))
    assert code == 0
    assert rep["schema_version"] == 1 and rep["command"] == "trace" and rep["violations"] == []
    arc = trace(S, UnitTangent(HPoint(0.1, 1.1), 0.4), 7.0)
    assert rep["result"]["crossing_word"] == arc.crossing_word
    assert (tmp_path / "trace.json").exists() and (tmp_path / "arc.txt").exists()


def test_config_file_and_flag_precedence(capsys, tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"length": 3.0, "angle": 1.0}))
    _, rep = run(capsys, "trace", "--config", str(cfg))
    assert rep["config"]["length"] == 3.0 and rep["result"]["length"] == pytest.approx(3.0)
    _, rep = run(capsys, "trace", "--config", str(cfg), "--length", "4")
    assert rep["config"]["length"] == 4.0 and rep["config"]["angle"] == 1.0
    cfg.write_text(json.dumps({"lenght": 3.0}))
    with pytest.raises(SystemExit):
        cli.main(["trace", "--config", str(cfg)])


def test_global_flags_after_subcommand(capsys):
    _, rep = run(capsys, "trace", "--seed", "7", "--length", "2")
    assert rep["config"]["seed"] == 7


def test_census_command(S, capsys, tmp_path):
    code, rep = run(capsys, "census", "--max-length", "5", "--out", str(tmp_path))
    assert code == 0
    sl = load_census(tmp_path / "census.csv", S)
    assert rep["result"]["classes"] == len(sl) == len(enumerate_census(S, 5.0))
    assert rep["result"]["certificate"]["ok"]
    assert sum(rep["result"]["intersection_histogram"].values()) == len(sl)


def test_close_arc_command(capsys):
    code, rep = run(capsys, "close-arc", "--x", "0.2", "--y", "0.9", "--angle", "2.0", "--length", "9")
    assert code == 0 and rep["result"]["success"]
    assert max(rep["result"]["angle_deficits"]) <= 0.1


def test_cover_needs_census(capsys):
    with pytest.raises(SystemExit):
        cli.main(["cover", "--n", "4"])


def test_cover_command_uses_surface_constants(files, capsys):
    d, gb = files
    code, rep = run(capsys, "cover", "--surface", str(d / "surface.txt"), "--census", str(d / "census.csv"),
                    "--n", "6", "--budget", "zero", "--mc-samples", "10000")
    assert code == 0
    res = rep["result"]
    assert res["growth_bound"]["c_X"] == pytest.approx(gb.c_X)
    assert res["K"] == 0 and res["members"] > 0
    assert res["lebesgue"]["lebesgue_mc"] <= res["lebesgue"]["lebesgue_bound"]
    assert res["hausdorff"]["hausdorff_h"] == pytest.approx(res["hausdorff"]["hausdorff_closed_form"], rel=1e-9)


def test_read_surface_round_trip(S, files):
    d, gb = files
    S2, gb2 = cli.read_surface(str(d / "surface.txt"))
    assert S2.hash == S.hash and gb2 == gb


def test_dimension_command(capsys, tmp_path):
    code, rep = run(capsys, "dimension", "--set", "uniform", "--points", "20000", "--out", str(tmp_path))
    assert code == 0
    assert 1.8 <= rep["result"]["dimension"] <= 2.1
    rows = (tmp_path / "box_counts.csv").read_text().splitlines()
    assert rows[0] == "set,scale,count" and len(rows) == 1 + len(rep["result"]["scales"])


def test_experiment_measure_decay_exit_code(files, capsys, tmp_path):
    d, _ = files
    code, rep = run(capsys, "experiment", "measure-decay", "--surface", str(d / "surface.txt"),
                    "--census", str(d / "census.csv"), "--ns", "4", "6", "--k", "0.01",
                    "--mc-samples", "10000", "--out", str(tmp_path))
    assert code == (1 if rep["violations"] else 0)
    assert [r["n"] for r in rep["result"]["rows"]] == [4, 6]
    assert (tmp_path / "experiment-measure-decay.json").exists()
    assert (tmp_path / "measure_decay.csv").exists()
