import csv
import json

import pytest

from helmfds import cli
from helmfds.errors import SingularProjection
from helmfds.cli import RESULT_COLUMNS, TRACE_COLUMNS, ExperimentConfig, load_config, main


def _read(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def _records(path):
    rows = _read(path)
    return [dict(zip(rows[0], r)) for r in rows[1:]]


@pytest.fixture(scope="module")
def verify_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("verify")
    code = main(["verify", "--threads", "1", "--out", str(out)])
    return code, out


def test_verify_single_circle(verify_run):
    code, out = verify_run
    assert code == 0
    results = _records(out / "results.csv")
    assert _read(out / "results.csv")[0] == list(RESULT_COLUMNS)
    assert [r["formulation"] for r in results] == ["pmchwt-omit", "bm"]
    for r in results:
        assert r["N"] == "400" and r["mode"] == "dense"
        assert float(r["rel_error_vs_oracle"]) <= 1e-9
    traces = _read(out / "traces.csv")
    assert traces[0] == list(TRACE_COLUMNS)
    assert len(traces) - 1 == 1 * 200
    report = json.loads((out / "report.json").read_text())
    assert report["command"] == "verify"
    assert report["summary"]["cross_formulation_error"] <= 1e-9


def test_floats_written_with_17_digits(verify_run):
    _, out = verify_run
    r = _records(out / "results.csv")[0]
    assert r["omega"] == "3"
    val = r["rel_error_vs_oracle"]
    assert float(val) == float(f"{float(val):.17g}")
    assert len(val.split("e")[0].replace(".", "").lstrip("0")) >= 15


def test_config_file_and_flag_override(tmp_path):
    cfg_file = tmp_path / "cfg.json"
    cfg_file.write_text(json.dumps({"omega": 2.0, "eps_minus": 7.0, "n": 64}))
    args = cli.build_parser().parse_args(["verify", "--config", str(cfg_file), "--omega", "4"])
    cfg = load_config("verify", args)
    assert cfg.omega == [4.0]
    assert cfg.eps_minus == 7.0
    assert cfg.n == 64
    assert cfg.m == [1]


def test_comma_lists(tmp_path):
    args = cli.build_parser().parse_args(["scaling", "--m", "16,64", "--qr-tol", "1e-6,1e-9",
                                          "--formulation", "bm,pmchwt-omit"])
    cfg = load_config("scaling", args)
    assert cfg.m == [16, 64]
    assert cfg.qr_tol == [1e-6, 1e-9]
    assert cfg.formulation == ["bm", "pmchwt-omit"]


@pytest.mark.parametrize("argv", [
    ["verify", "--formulation", "efie"],
    ["verify", "--m", "3"],
    ["verify", "--m", "4"],
    ["verify", "--n", "31"],
    ["verify", "--omega", "-1"],
    ["verify", "--mode", "sometimes"],
    ["scaling", "--m", "1024"],
    ["scaling", "--qr-tol", "2"],
    ["nonsense"],
])
def test_config_errors_exit_2(tmp_path, argv, capsys):
    assert main(argv + ["--out", str(tmp_path)] if argv != ["nonsense"] else argv) == 2
    assert "error" in capsys.readouterr().err


def test_unknown_config_key_exits_2(tmp_path):
    cfg_file = tmp_path / "cfg.json"
    cfg_file.write_text(json.dumps({"omgea": 2.0}))
    assert main(["verify", "--config", str(cfg_file), "--out", str(tmp_path)]) == 2
    cfg_file.write_text("{not json")
    assert main(["verify", "--config", str(cfg_file), "--out", str(tmp_path)]) == 2


def test_numerical_failure_exits_3(tmp_path, monkeypatch, capsys):
    def boom(*args, **kwargs):
        raise SingularProjection("R A^-1 L of cell (0, 3) is singular", (0, 3), 1e17)

    monkeypatch.setattr(cli, "fds_factor", boom)
    code = main(["scaling", "--m", "16", "--n", "16", "--qr-tol", "1e-6",
                 "--formulation", "bm", "--out", str(tmp_path)])
    assert code == 3
    assert "(0, 3)" in capsys.readouterr().err


def test_dense_over_cap_is_skipped(tmp_path):
    code = main(["scaling", "--m", "16", "--n", "16", "--qr-tol", "1e-6", "--mode", "both",
                 "--formulation", "pmchwt-omit", "--size-cap", "100", "--out", str(tmp_path)])
    assert code == 0
    rows = _records(tmp_path / "results.csv")
    assert [(r["mode"], r["status"]) for r in rows] == [("dense", "skipped"), ("fds", "ok")]
    assert rows[1]["rel_error_vs_dense"] == ""


def test_small_scaling_run_reports(tmp_path):
    code = main(["scaling", "--m", "16", "--n", "32", "--qr-tol", "1e-6", "--mode", "both",
                 "--formulation", "pmchwt-omit,bm", "--save-solutions", "--out", str(tmp_path)])
    assert code == 0
    rows = _records(tmp_path / "results.csv")
    fds = {r["formulation"]: r for r in rows if r["mode"] == "fds"}
    ratio = int(fds["pmchwt-omit"]["compressed_size"]) / int(fds["bm"]["compressed_size"])
    assert float(fds["pmchwt-omit"]["compression_ratio"]) == pytest.approx(ratio, rel=1e-15)
    assert float(fds["bm"]["rel_error_vs_dense"]) <= 1e-3
    report = json.loads((tmp_path / "report.json").read_text())
    for rec in report["runs"]:
        t = rec["times"]
        assert all(v >= 0 for v in t.values())
        if rec["mode"] == "fds":
            phases = t["assembly"] + t["compression"] + t["top_factor"] + t["geometry"]
            assert t["total"] >= 0.99 * phases
            assert rec["per_level"][0]["level"] == 0
    assert report["speedup"][0]["formulation"] == "bm"
    assert len(list(tmp_path.glob("*.bin"))) == 4


def test_experiment_config_defaults():
    cfg = ExperimentConfig().validate()
    assert cfg.qr_tol == [1e-12, 1e-9, 1e-6]
    assert cfg.compression(1e-9).proxy_ratio == 1.5
