import csv
import subprocess
import sys

import numpy as np
import pytest

from multitile.cli import run_subcommand


def rows(path):
    with open(path, newline="") as fh:
        return list(csv.reader(fh))


def run(tmp_path, *argv):
    return run_subcommand([argv[0], "--out", str(tmp_path), *argv[1:]])


def test_models_lists_fixtures(capsys):
    assert run_subcommand(["models"]) == 0
    out = capsys.readouterr().out.split()
    assert "key_polyomino" in out and "c4_dimers" in out


def test_enumerate_c4(tmp_path, capsys):
    assert run(tmp_path, "enumerate", "--model", "c4_dimers", "--multiplicity", "2") == 0
    assert "partition function 24" in capsys.readouterr().out
    table = rows(tmp_path / "distribution.csv")
    assert table[0] == ["K[1+2]", "K[2+3]", "K[3+4]", "K[1+4]", "weight"]
    assert sorted(int(r[-1]) for r in table[1:]) == [4, 4, 16]


def test_feasible_and_infeasible_path(tmp_path, capsys):
    assert run(tmp_path, "feasible", "--model", "path5_singletons", "--alpha", "0.25") == 0
    assert "alpha feasible" in capsys.readouterr().out
    assert run(tmp_path, "feasible", "--model", "path5_singletons", "--alpha", "0.15") == 1
    table = rows(tmp_path / "feasibility.csv")
    assert ["real_feasible", "", "False"] in table
    assert any(r[0] == "certificate" for r in table)


def test_feasible_multiplicity(tmp_path, capsys):
    assert run(tmp_path, "feasible", "--model", "bars3_n6", "--multiplicity", "2") == 0
    assert run(tmp_path, "feasible", "--model", "bars3_n6", "--multiplicity", "1,2,1,2,1,1") == 1


def test_solve_c4(tmp_path):
    assert run(tmp_path, "solve", "--model", "c4_dimers", "--alpha", "1/2") == 0
    table = {(r[0], r[1]): r[2] for r in rows(tmp_path / "solution.csv")[1:]}
    probs = [float(v) for (q, _), v in table.items() if q == "probability"]
    assert np.allclose(probs, 0.25)
    assert float(table[("residual", "")]) < 1e-9


def test_cov_rows_sum_to_zero(tmp_path):
    assert run(tmp_path, "cov", "--model", "bars3_n6", "--alpha", "1/2", "--K", "10") == 0
    table = rows(tmp_path / "covariance.csv")
    M = np.array([[float(x) for x in r[1:]] for r in table[1:]])
    assert M.shape == (6, 6)
    np.testing.assert_allclose(M, M.T, atol=1e-12)
    assert np.linalg.eigvalsh(M).min() > -1e-10


def test_coulomb(tmp_path, capsys):
    assert run(tmp_path, "coulomb", "--model", "c4_dimers", "--alpha", "1/2", "--charges", "1=1,3=-1") == 0
    table = {(r[0], r[1]): r[2] for r in rows(tmp_path / "coulomb.csv")[1:]}
    assert float(table[("energy", "")]) < 0
    assert run(tmp_path, "coulomb", "--model", "c4_dimers", "--alpha", "1/2", "--charges", "9=1") == 2


def test_spectral_key_with_heatmap(tmp_path):
    code = run(tmp_path, "spectral", "--model", "key", "--n", "128", "--eps", "1e-3", "--window", "61",
               "--offsets", "0,0;1,0;3,2")
    assert code == 0
    cov = rows(tmp_path / "covariance.csv")
    assert cov[0] == ["eps", "s", "t", "covariance", "asymptotic"]
    assert len(cov) == 4 and cov[1][4] == "" and cov[2][4] != ""
    roots = rows(tmp_path / "roots.csv")
    assert [r[0] for r in roots[1:]] == ["SIMPLE", "SIMPLE"]
    data = (tmp_path / "heatmap.pgm").read_bytes()
    header = b"P5\n61 61\n255\n"
    assert data.startswith(header) and len(data) == len(header) + 61 * 61
    assert (tmp_path / "heatmap.pgm.scale.txt").read_text().startswith("min ")
    assert len(rows(tmp_path / "heatmap.csv")) == 1 + 61 * 61


def test_spectral_prototile_one_dimensional(tmp_path):
    code = run(tmp_path, "spectral", "--prototile", "0:1 1:1 2:1", "--n", "60", "--eps", "0.01", "--eps", "0.001",
               "--offsets", "0,1,2")
    assert code == 0
    cov = rows(tmp_path / "covariance.csv")
    assert cov[0] == ["eps", "s", "covariance", "asymptotic"] and len(cov) == 7


def test_spectral_errors(tmp_path):
    # lattice roots at eps = 0 are a pole unless projected
    assert run(tmp_path, "spectral", "--model", "l_triomino", "--n", "9", "--eps", "0") == 1
    assert run(tmp_path, "spectral", "--model", "l_triomino", "--n", "9", "--eps", "0", "--zero-modes", "project") == 0
    # non-simple roots with --asymptotic
    assert run(tmp_path, "spectral", "--model", "square_polyomino", "--n", "16", "--asymptotic") == 1


def test_heatmap_deterministic(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir(), b.mkdir()
    for d in (a, b):
        assert run(d, "heatmap", "--model", "l_triomino", "--n", "30", "--window", "11") == 0
    assert (a / "heatmap.pgm").read_bytes() == (b / "heatmap.pgm").read_bytes()
    assert (a / "heatmap.csv").read_text() == (b / "heatmap.csv").read_text()


@pytest.mark.parametrize("argv", [
    ["solve", "--model", "c4_dimers", "--no-such-flag"],
    ["frobnicate"],
    ["solve", "--model", "no_such_model"],
    ["solve", "--model", "c4_dimers", "--alpha", "1,2"],
    ["heatmap", "--model", "l_triomino", "--window", "500"],
])
def test_usage_errors_exit_2(tmp_path, argv):
    assert run_subcommand(argv[:1] + ["--out", str(tmp_path)] + argv[1:] if len(argv) > 1 else argv) == 2


def test_selftest_filter(capsys):
    assert run_subcommand(["selftest", "oracle"]) == 0
    out = capsys.readouterr().out
    assert "PASS" in out and "1 oracle equivalence" in out


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "multitile", "--version"], capture_output=True, text=True)
    assert res.returncode == 0 and res.stdout.strip().startswith("multitile")
