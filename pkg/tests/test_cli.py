import json

import pytest

from anisolab import cli


def run(argv, out):
    return cli.main(argv + ["--out", str(out)])


def test_exponents_writes_report_and_csv(tmp_path):
    assert run(["exponents", "--N", "4", "--p", "2", "--gammas", "0,0.75"], tmp_path) == 0
    files = sorted(f.name for f in tmp_path.iterdir())
    assert len(files) == 3
    stem = files[0].rsplit(".", 1)[0]
    assert all(f.startswith(stem.split(".")[0]) for f in files)
    doc = json.loads((tmp_path / f"{stem}.json").read_text())
    assert doc["passed"] and doc["config"]["gammas"] == [0.0, 0.75]
    rows = doc["report"]["rows"]
    assert rows[1][4:6] == pytest.approx([0.5, 1.5])
    header = (tmp_path / f"{stem}.csv").read_text().splitlines()[0]
    assert header == "N,p,gamma,C_H,mu1,mu2,res1,res2"


def test_config_file_and_flag_override(tmp_path):
    ini = tmp_path / "run.ini"
    ini.write_text("[params]\nN = 5\np = 2.5\ngamma = 0.2\n[tolerances]\nresidual = 1e-9\n")
    out = tmp_path / "out"
    assert run(["exponents", "--config", str(ini), "--gamma", "0.5"], out) == 0
    doc = json.loads(next(out.glob("exponents-*[0-9a-f].json")).read_text())
    assert doc["config"]["N"] == 5 and doc["config"]["gamma"] == 0.5
    assert doc["config"]["tolerances"] == {"residual": 1e-9}


@pytest.mark.parametrize("argv", [
    ["exponents", "--N", "3", "--p", "2", "--gamma", "5"],
    ["exponents", "--p", "7"],
    ["residual", "--t-min", "10", "--t-max", "1"],
    ["liouville", "--interval", "1,0.5"],
    ["minimize", "--init", "nope"],
    ["exponents", "--tol", "oops"],
    ["exponents", "--bogus"],
])
def test_config_errors_exit_2_without_files(tmp_path, argv):
    out = tmp_path / "out"
    assert run(argv, out) == 2
    assert not out.exists()


def test_bad_config_key(tmp_path):
    ini = tmp_path / "bad.ini"
    ini.write_text("[params]\nbogus = 1\n")
    assert run(["exponents", "--config", str(ini)], tmp_path / "o") == 2


def test_out_from_environment(tmp_path, monkeypatch):
    monkeypatch.setenv("ANISOLAB_OUT", str(tmp_path / "env"))
    assert cli.main(["supersolution", "--N", "4", "--p", "2", "--gamma", "0.5"]) == 0
    assert any((tmp_path / "env").glob("supersolution-*.json"))


def test_failed_check_exits_1(tmp_path, capsys):
    # an absurd tolerance makes the residual checks fail
    assert run(["residual", "--tol", "residual=1e-30", "--points", "64"], tmp_path) == 1
    assert "FAIL residual" in capsys.readouterr().out


def test_hash_ignores_out_and_jobs(tmp_path):
    a = cli.resolve_config(cli.build_parser().parse_args(["sweep", "--out", "x", "--jobs", "1"]))
    b = cli.resolve_config(cli.build_parser().parse_args(["sweep", "--out", "y", "--jobs", "4"]))
    c = cli.resolve_config(cli.build_parser().parse_args(["sweep", "--seed", "1"]))
    assert a.digest == b.digest != c.digest


def test_reports_are_byte_identical(tmp_path):
    for d in ("a", "b"):
        assert run(["liouville", "--N", "3", "--p", "1.5", "--gamma", "0.05"], tmp_path / d) == 0
    (fa,) = (tmp_path / "a").glob("*[0-9a-f].json")
    (fb,) = (tmp_path / "b").glob("*[0-9a-f].json")
    assert fa.name == fb.name and fa.read_bytes() == fb.read_bytes()
    manifest = json.loads(fa.with_name(fa.stem + ".manifest.json").read_text())
    assert "created" in manifest and manifest["files"] == [fa.name]


def test_parallel_inequalities_match_serial(tmp_path):
    assert run(["inequalities", "--samples", "500"], tmp_path / "s") == 0
    assert run(["inequalities", "--samples", "500", "--jobs", "2"], tmp_path / "j") == 0
    (fs,) = (tmp_path / "s").glob("*[0-9a-f].json")
    (fj,) = (tmp_path / "j").glob("*[0-9a-f].json")
    assert fs.read_bytes() == fj.read_bytes()


def test_help_documents_csv_columns(capsys):
    with pytest.raises(SystemExit):
        cli.build_parser().parse_args(["sweep", "--help"])
    text = capsys.readouterr().out
    assert "gamma,S,iterations,grad_norm" in text and "Exit codes" in text
