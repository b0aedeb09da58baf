import json

import pytest

from glkloosterman import bounds
from glkloosterman.cli import main


def run(capsys, *argv):
    code = main(list(argv))
    return code, capsys.readouterr()


def test_sum_json(capsys):
    code, out = run(capsys, "sum", "--n", "2", "--p", "3", "--a", "1", "--units", "1,-1")
    assert code == 0
    data = json.loads(out.out)
    assert data["sum"]["coeffs"] == [[0, -3], [9, -3]]
    assert data["path"] == "generic" and data["bound"] == pytest.approx(27)


def test_sum_fast_path_and_file(capsys, tmp_path):
    out = tmp_path / "s.json"
    code, _ = run(capsys, "sum", "--n", "4", "--p", "2", "--a", "1,2,1", "--units", "1,1,1,1",
                  "--fast-gl4", "--out", str(out))
    data = json.loads(out.read_text())
    assert code == 0 and data["path"] == "gl4_fast" and data["cell_size"] == 64


def test_budget_exit(capsys):
    code, out = run(capsys, "sum", "--n", "3", "--p", "3", "--a", "2,2", "--units", "1,1,-1",
                    "--budget", "5")
    assert code == 3 and "budget" in out.err


def test_config_errors(capsys, tmp_path):
    code, _ = run(capsys, "sum", "--n", "2", "--p", "3", "--a", "1,1", "--units", "1,-1")
    assert code == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    code, _ = run(capsys, "check", "stevens", "--grid", str(bad))
    assert code == 2


def test_orbital(capsys):
    code, out = run(capsys, "orbital", "--p", "2", "--torus", "1:1,0:1,-1:1", "--oracle")
    data = json.loads(out.out)
    assert code == 0 and data["dr"] == "3" and data["bruteforce"] == 3 and data["R"] == 2


def test_germ(capsys):
    code, out = run(capsys, "germ", "--n", "2", "--p", "3", "--a", "1", "--units", "1,-1")
    data = json.loads(out.out)
    assert code == 0 and data["magnitude"] == pytest.approx(1)
    code, out = run(capsys, "germ", "--p", "3", "--a", "1;2", "--units", "1,-1,-1,1",
                    "--relevant", "2,2")
    # the a = 2 block is degenerate: |Kl| = |X| = 9, so |K_e| = 3
    assert code == 0 and json.loads(out.out)["magnitude"] == pytest.approx(3)


def test_weyl(capsys):
    code, out = run(capsys, "weyl", "--n", "3", "--relevant")
    data = json.loads(out.out)
    assert code == 0 and [d["composition"] for d in data] == [[1, 1, 1], [1, 2], [2, 1], [3]]


def test_check_pass_and_fail(capsys, tmp_path, monkeypatch):
    grid = tmp_path / "g.json"
    grid.write_text(json.dumps({"grid": {"p": [2, 3], "ell": [0, 1, 2]}}))
    csv_out = tmp_path / "w.csv"
    code, out = run(capsys, "check", "weil", "--grid", str(grid), "--out-csv", str(csv_out))
    assert code == 0 and "6 passed" in out.err
    assert len(csv_out.read_text().splitlines()) == 7

    def failing(cfg, budget):
        yield bounds.BoundReportRow(2, 1, 2, (1,), passed=False)
    monkeypatch.setitem(bounds.CHECKS, "weil", failing)
    code, _ = run(capsys, "check", "weil", "--grid", str(grid))
    assert code == 1
