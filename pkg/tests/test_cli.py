import csv
import json

import numpy as np
import pytest

from sqls.cli import main, parse_range, read_dense, write_dense
from sqls.hadamard import circuits_per_step_sqls, circuits_per_step_vqls
from sqls.pauli import parse_pauli_sum, to_dense
from sqls.problems import grid_matrix, LAPLACE16_DIAG, LAPLACE16_OFF


def rows(path):
    with open(path) as fh:
        return list(csv.DictReader(fh))


def test_parse_range():
    assert parse_range("4,8,16") == [4, 8, 16]
    assert parse_range("4:20:8") == [4, 12, 20]
    pts = parse_range("4..2500")
    assert pts[0] == 4 and pts[-1] == 2500 and pts == sorted(pts)


def test_solve_writes_summary(tmp_path, capsys):
    code = main(["solve", "--problem", "identity4", "--reps", "2", "--exact", "--max-iter", "3",
                 "--layers", "1", "--out", str(tmp_path)])
    assert code == 0
    summary = rows(tmp_path / "summary.csv")
    assert list(summary[0]) == ["run", "evaluations", "converged", "final_td", "final_fid"]
    assert len(summary) == 2 and all(0 <= float(r["final_td"]) <= 1 for r in summary)
    assert (tmp_path / "run_000" / "trace.csv").exists()
    assert "runs reached trace distance" in capsys.readouterr().out


def test_solve_is_seed_deterministic(tmp_path):
    args = ["solve", "--problem", "iqlsp", "--eps-shadow", "0.1", "--max-evals", "10", "--layers", "1",
            "--seed", "3"]
    assert main(args + ["--out", str(tmp_path / "a")]) == 0
    assert main(args + ["--out", str(tmp_path / "b"), "--jobs", "2"]) == 0
    assert rows(tmp_path / "a" / "summary.csv") == rows(tmp_path / "b" / "summary.csv")


def test_solve_rejects_bad_reps(tmp_path, capsys):
    assert main(["solve", "--problem", "iqlsp", "--reps", "0", "--out", str(tmp_path)]) == 2
    assert "error" in capsys.readouterr().err
    assert main(["solve", "--problem", "nope", "--out", str(tmp_path)]) == 2


def test_resources(tmp_path):
    assert main(["resources", "--L", "4,100,2500", "--k", "2", "--out", str(tmp_path)]) == 0
    table = rows(tmp_path / "resources.csv")
    assert list(table[0]) == ["L", "k", "vqls", "sqls", "vqls_pp", "sqls_pp"]
    for r in table:
        L = int(r["L"])
        assert int(r["vqls"]) == circuits_per_step_vqls(L, 50, 10_000)
        assert int(r["sqls"]) == circuits_per_step_sqls(L, 50, 2, 0.01)
        assert int(r["sqls"]) < int(r["vqls"]) or L == 4


def test_resources_preprocessed_columns(tmp_path):
    assert main(["resources", "--n", "10", "--L", "4,8", "--k", "2", "--random-systems", "2",
                 "--out", str(tmp_path)]) == 0
    table = rows(tmp_path / "resources.csv")
    assert all(float(r["vqls_pp"]) > 0 and float(r["sqls_pp"]) > 0 for r in table)


def test_shadow_bench(tmp_path):
    assert main(["shadow-bench", "--k", "0,2", "--eps-list", "0.2,0.1", "--trials", "3",
                 "--out", str(tmp_path)]) == 0
    table = rows(tmp_path / "shadow_bench.csv")
    ident = [r for r in table if r["k"] == "0"]
    assert all(float(r["empirical_err"]) < 1e-12 for r in ident)
    k2 = {float(r["eps"]): int(r["budget"]) for r in table if r["k"] == "2"}
    assert k2[0.1] == pytest.approx(4 * k2[0.2], abs=4)


def test_dense_io_round_trip(tmp_path, rng):
    m = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
    write_dense(m, tmp_path / "m.txt")
    np.testing.assert_array_equal(read_dense(tmp_path / "m.txt"), m)


def test_decompose_z(tmp_path):
    write_dense(np.diag([1.0, -1.0]).astype(complex), tmp_path / "z.txt")
    assert main(["decompose", str(tmp_path / "z.txt"), "--out", str(tmp_path / "o")]) == 0
    A = parse_pauli_sum((tmp_path / "o" / "A.pauli").read_text())
    assert A.labels() == ["Z"]


def test_decompose_laplace16(tmp_path):
    m = grid_matrix(16, LAPLACE16_DIAG, LAPLACE16_OFF).astype(complex)
    write_dense(m, tmp_path / "lap.txt")
    assert main(["decompose", str(tmp_path / "lap.txt"), "--out", str(tmp_path / "o")]) == 0
    report = json.loads((tmp_path / "o" / "report.json").read_text())
    assert report["pauli_residual"] <= 1e-9 and report["split_residual"] <= 1e-9
    assert max(report["factor_unitarity"]) <= 1e-9
    A = parse_pauli_sum((tmp_path / "o" / "A.pauli").read_text())
    np.testing.assert_allclose(to_dense(A), m, atol=1e-9)


def test_decompose_errors(tmp_path):
    (tmp_path / "bad.txt").write_text("2\n1 0 0 0\n")
    assert main(["decompose", str(tmp_path / "bad.txt"), "--out", str(tmp_path)]) == 2
    write_dense(2 * np.eye(2, dtype=complex), tmp_path / "big.txt")
    assert main(["decompose", str(tmp_path / "big.txt"), "--out", str(tmp_path)]) == 2
    write_dense(np.eye(3, dtype=complex), tmp_path / "three.txt")
    assert main(["decompose", str(tmp_path / "three.txt"), "--out", str(tmp_path)]) == 2
