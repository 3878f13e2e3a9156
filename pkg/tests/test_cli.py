import csv
import io
import json

import pytest

from spherical_gowers import cli, field as F, harness
from spherical_gowers.errors import MalformedDataError


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr().out
    return code, out


def csv_rows(text):
    return list(csv.DictReader(io.StringIO(text)))


def test_count_sphere_identity(capsys):
    code, out = run_cli(capsys, "count-sphere", "p=5", "d=3", "form=identity")
    (row,) = csv_rows(out)
    assert code == 0
    assert float(row["computed"]) == 25 and float(row["predicted"]) == 25
    assert float(row["margin"]) == 0 and row["passed"] == "1"


def test_gowers_norm_of_one(capsys):
    code, out = run_cli(capsys, "gowers-norm", "p=5", "d=3", "f=one")
    assert code == 0 and float(csv_rows(out)[0]["computed"]) == pytest.approx(1.0)


def test_invert_u2_planted(capsys):
    code, out = run_cli(capsys, "invert-u2", "p=5", "d=9", "f=planted", "--json")
    doc = json.loads(out)
    assert code == 0
    assert doc["artifacts"]["certificate"]["xi"] == doc["rows"][1]["params"]["planted"]


def test_failing_row_sets_exit_status(capsys):
    code, _ = run_cli(capsys, "count-box", "p=3", "d=3", "form=identity", "s=2", "tol=0.01")
    assert code == 1


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.ini"
    cfg.write_text("# shared\np = 5\nd = 4\n[count-sphere]\nform = identity\n")
    code, out = run_cli(capsys, "count-sphere", "--config", str(cfg), "d=3")
    assert code == 0 and float(csv_rows(out)[0]["computed"]) == 25


def test_config_error_names_line():
    with pytest.raises(MalformedDataError, match="line 3"):
        cli.read_config("p = 5\n[count-box]\nnot a setting\n")


def test_bad_field_is_reported(capsys):
    assert cli.main(["count-sphere", "p=five"]) == 2
    assert "'p'" in capsys.readouterr().err


def test_budget_error_reports_requirement(monkeypatch, capsys):
    monkeypatch.setenv("SPHERICAL_GOWERS_MEMORY_BUDGET", "1000")
    assert cli.main(["count-sphere", "p=5", "d=6", "form=identity"]) == 2
    assert "needs about" in capsys.readouterr().err


def test_mset_flags(capsys):
    code, out = run_cli(capsys, "mset", "p=5", "d=3", "family=box(2)", "--standardize", "--codim",
                        "--decompose", "I=0", "--fubini")
    rows = {r["operation"]: r for r in csv_rows(out)}
    assert code == 0
    assert float(rows["mset-codim"]["computed"]) == 4
    assert float(rows["mset-fubini"]["computed"]) == 0


@pytest.mark.parametrize("argv", [
    ["freiman", "map=perturbed", "expect=false"],
    ["freiman", "p=7", "d=1", "map=canonical", "expect=true"],
    ["ideal-member", "p=3", "d=3", "form=identity", "xi=[1,0,0]", "shifts=[[1,0,0]]", "expect=true"],
    ["reduce-check", "p=3", "d=3", "form=identity", "xi=[0,1,0]", "shifts=[[1,0,0]]"],
    ["string-indep", "p=3", "d=3", "form=identity", "strings=[[1,0,0]]", "shifts=[[1,0,0]]"],
    ["iso-census", "p=5", "d=3", "form=identity", "k=1"],
    ["dft", "p=3", "d=2", "f=character([1,2])"],
    ["pla", "p=5", "d=9", "f=random"],
    ["converse", "p=5", "d=4"],
])
def test_operations_pass(argv, capsys):
    code, out = run_cli(capsys, *argv)
    assert code == 0, out


def test_reports_written(tmp_path, capsys):
    prefix = str(tmp_path / "r")
    assert cli.main(["count-sphere", "p=5", "d=3", "form=identity", "--out", prefix]) == 0
    assert json.loads(open(prefix + ".json").read())["passed"] is True
    assert open(prefix + ".csv").read().startswith("criterion,")


def test_verify_is_byte_identical(tmp_path, capsys):
    a, b = str(tmp_path / "a"), str(tmp_path / "b")
    for prefix in (a, b):
        assert cli.main(["verify", "--suite", "inverse", "--seed", "7", "criteria=6", "--out", prefix]) == 0
    assert open(a + ".json").read() == open(b + ".json").read()
    assert open(a + ".csv").read() == open(b + ".csv").read()


def test_streams_are_independent_of_order():
    x = harness.stream(3, "alpha").integers(0, 10 ** 9)
    harness.stream(3, "beta").integers(0, 10 ** 9, 100)
    assert harness.stream(3, "alpha").integers(0, 10 ** 9) == x


def test_broken_rref_is_detected(monkeypatch):
    real = F.rref

    def broken(A, p):
        R, r, piv = real(A, p)
        return R, max(r - 1, 0), piv[:-1]

    monkeypatch.setattr(F, "rref", broken)
    res = harness.run_criterion(2, seed=1)
    assert not res.passed
    bad = [r for r in res.rows if not r.passed]
    assert bad and "rank" in bad[0].operation + bad[0].note
    assert "FAIL" in res.summary()


def test_margin_definition():
    row = harness.ReportRow.make(0, "x", {}, 26, 25, True)
    assert row.margin == pytest.approx(0.04)
    assert harness.ReportRow.make(0, "x", {}, 0.5, 0, True).margin == 0.5
