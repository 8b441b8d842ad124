import math

import pytest

from lowentropy import cli
from lowentropy.csvio import read_csv
from lowentropy.verify import CriterionResult, VerifyReport

CIRCLE = "kind: circle\nradius: 1.0\ncenter: [0,0]\nspacing: 0.01\n"


@pytest.fixture
def circle_spec(tmp_path):
    path = tmp_path / "circle.txt"
    path.write_text(CIRCLE)
    return str(path)


def _table(path):
    header, rows = read_csv(path)
    return header, rows


def test_entropy_command(circle_spec, tmp_path):
    out = tmp_path / "e.csv"
    assert cli.main(["entropy", "--surface", circle_spec, "--eps", "1e-6", "--csv", str(out)]) == 0
    header, rows = _table(out)
    assert header == ["quantity", "value"]
    values = dict(rows)
    assert abs(float(values["value"]) - math.sqrt(2 * math.pi / math.e)) <= 1e-3
    assert float(values["truncation_radius"]) > 1


def test_entropy_declared_lambda(circle_spec, capsys):
    assert cli.main(["entropy", "--surface", circle_spec, "--declare-lambda", "2"]) == 0
    text = capsys.readouterr().out
    assert "lambda_declared,true" in text and "lambda_bound,2" in text


def test_global_flags_before_or_after_subcommand(circle_spec, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    assert cli.main(["--threads", "1", "entropy", "--surface", circle_spec, "--csv", str(a)]) == 0
    assert cli.main(["entropy", "--surface", circle_spec, "--threads", "4", "--csv", str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_unknown_kind_is_usage_error(tmp_path, capsys):
    path = tmp_path / "b.txt"
    path.write_text("kind: banana\n")
    assert cli.main(["entropy", "--surface", str(path)]) == 2
    assert "unknown kind 'banana' at line 1" in capsys.readouterr().err


def test_missing_file_is_usage_error(tmp_path):
    assert cli.main(["entropy", "--surface", str(tmp_path / "nope.txt")]) == 2


def test_unknown_suite_exits_2():
    with pytest.raises(SystemExit) as info:
        cli.main(["verify", "--suite", "nope"])
    assert info.value.code == 2


def test_flow_command_schema(tmp_path):
    spec = tmp_path / "g.txt"
    spec.write_text("kind: gridgraph\ndomain: [[-1.5,1.5]]\nspacing: 0.05\nu: 0.2*cos(x)\n")
    out = tmp_path / "track.csv"
    assert cli.main(["flow", "--surface", str(spec), "--T", "0.05", "--record", "0.01", "--csv", str(out)]) == 0
    header, rows = _table(out)
    assert header == ["time", "sample", "x0", "x1", "weight", "abs_A"]
    assert sorted({float(r[0]) for r in rows}) == pytest.approx([0.0, 0.01, 0.02, 0.03, 0.04, 0.05])


def test_flow_rejects_plane_disk(tmp_path):
    spec = tmp_path / "p.txt"
    spec.write_text("kind: planedisk\nn: 1\nk: 1\nradius: 1\nspacing: 0.1\n")
    assert cli.main(["flow", "--surface", str(spec), "--T", "0.1", "--record", "0.01"]) == 2


def test_reifenberg_command(circle_spec, tmp_path):
    out = tmp_path / "s.csv"
    assert cli.main(["reifenberg", "--surface", circle_spec, "--rmax", "0.4", "--stride", "100", "--csv", str(out)]) == 0
    header, rows = _table(out)
    assert header[:6] == ["p_index", "p0", "p1", "R", "score", "pca_score"]
    assert header[6:] == ["frame0_0", "frame1_0"]
    n_points = len({r[0] for r in rows})
    assert len(rows) == n_points * 4
    assert all(float(r[4]) <= float(r[5]) for r in rows)


def test_expander_rate_fit(tmp_path):
    out = tmp_path / "rate.csv"
    argv = ["expander", "--slope", "1.0", "--n", "1", "--L", "20", "--h", "0.001", "--rate-fit", "--csv", str(out)]
    assert cli.main(argv) == 0
    header, rows = _table(out)
    assert header == ["t", "dist", "used", "p", "C_fit"]
    assert abs(float(rows[0][3]) - 0.5) <= 0.05


def test_expander_profile_table(capsys):
    assert cli.main(["expander", "--b", "1", "--n", "2", "--L", "2", "--h", "0.5"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "r,f,df" and len(lines) == 6


def test_expander_rate_fit_range_checked():
    assert cli.main(["expander", "--b", "1", "--L", "20", "--rate-fit", "--R", "5", "--t-min", "1e-4"]) == 2


def test_verify_exit_code_follows_report(monkeypatch, capsys):
    def fake(suite, threads, seed):
        return VerifyReport(suite, seed, (CriterionResult(1, "x", 2.0, 1.0, False),))

    monkeypatch.setattr(cli, "run_verify", fake)
    assert cli.main(["verify"]) == 1
    assert "overall: FAIL" in capsys.readouterr().out


def test_verify_entropy_suite(tmp_path):
    out = tmp_path / "v.csv"
    assert cli.main(["--seed", "7", "verify", "--suite", "entropy", "--csv", str(out)]) == 0
    header, rows = _table(out)
    assert header == ["criterion", "name", "measured", "threshold", "status", "seed", "detail"]
    assert [r[0] for r in rows] == ["1", "2", "3", "12"]
    assert all(r[4] == "pass" and r[5] == "7" for r in rows)
