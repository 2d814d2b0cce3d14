import subprocess
import sys

import numpy as np
import pytest

from gapfree.cli import main
from gapfree.dense import read_matrix, jacobi_svd


def test_gen_writes_matrix_with_spectrum(tmp_path):
    path = tmp_path / "a.txt"
    assert main(["gen", "--n", "12", "--m", "9", "--spectrum", "custom:4,2,1",
                 "--out", str(path)]) == 0
    a = read_matrix(path)
    assert a.shape == (12, 9)
    np.testing.assert_allclose(jacobi_svd(a).sigma[:4], [4, 2, 1, 0], atol=1e-12)


def test_run_then_matrix_file(tmp_path, capsys):
    path = tmp_path / "a.txt"
    main(["gen", "--n", "20", "--spectrum", "geometric:ratio=0.7", "--out", str(path)])
    capsys.readouterr()
    assert main(["run", "--matrix", str(path), "--k", "3", "--seed", "4"]) == 0
    header, row = capsys.readouterr().out.splitlines()
    assert header.startswith("n,m,k,") and row.startswith("20,20,3,")
    assert ",file," in row


def test_run_trace_columns(capsys):
    assert main(["run", "--n", "20", "--k", "3", "--trace", "--spectrum", "step"]) == 0
    row = capsys.readouterr().out.splitlines()[1].split(",")
    assert all(row[13:20])


def test_trace_report(capsys, tmp_path):
    report = tmp_path / "r.txt"
    assert main(["trace", "--n", "20", "--k", "3", "--report", str(report)]) == 0
    text = report.read_text()
    assert "tail =" in text and "min t =" in text and "residual =" in text


def test_trace_report_defaults_to_stderr(capsys):
    main(["trace", "--n", "15", "--k", "2"])
    assert "k = 2" in capsys.readouterr().err


def test_sweep_outputs(tmp_path):
    out, summ = tmp_path / "o.csv", tmp_path / "s.csv"
    assert main(["sweep", "--n", "20", "--k", "3", "--seeds", "4", "--eps", "0.25", "0.5",
                 "--spectrum", "flat", "--spectrum", "zero-gap-at-k",
                 "--out", str(out), "--summary", str(summ)]) == 0
    assert len(out.read_text().splitlines()) == 1 + 2 * 2 * 4
    assert len(summ.read_text().splitlines()) == 1 + 4


@pytest.mark.parametrize("argv", [["run", "--k", "0"], ["run", "--spectrum", "nope"],
                                  ["bogus"], ["run", "--seed", "-3"], []])
def test_usage_errors_exit_1(argv):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 1


def test_contract_error_exit_1():
    assert main(["gen", "--n", "5", "--spectrum", "custom:3,2,1,1,1,1,1"]) == 1


def test_bad_k_is_reported_in_the_row(capsys):
    assert main(["run", "--n", "5", "--k", "9"]) == 3
    assert "error:ContractError" in capsys.readouterr().out


def test_io_error_exit_2(tmp_path):
    assert main(["run", "--matrix", str(tmp_path / "missing.txt")]) == 2
    assert main(["gen", "--n", "4", "--k", "2", "--out", str(tmp_path / "no" / "x")]) == 2


def test_all_failed_exit_3():
    assert main(["run", "--n", "8", "--k", "2", "--spectrum", "flat:value=0"]) == 3
    assert main(["sweep", "--n", "8", "--k", "2", "--seeds", "2",
                 "--spectrum", "flat:value=0", "--no-block-condition"]) == 3


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "gapfree", "run", "--n", "10", "--k", "2"],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.startswith("n,m,k,")
