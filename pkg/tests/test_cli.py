import json

import pytest
from gmpy2 import mpq

from tracepoly import DenseMatrix, GaussianScalar, HermitianMatrix
from tracepoly.case3 import Case3Params, Case3PointResult, Case3Report
from tracepoly.cli import main
from tracepoly.jsonio import canonical_json_text
from tracepoly.matrices import matrix_to_obj
from tracepoly.scan import AggregateScanReport, CellRecord, ScanReport


def write_matrix(tmp_path, name, matrix):
    path = tmp_path / name
    path.write_text(json.dumps(matrix_to_obj(matrix)))
    return str(path)


@pytest.fixture
def pair_files(tmp_path):
    a = write_matrix(tmp_path, "a.json", DenseMatrix.diagonal([2, 1]))
    b = write_matrix(tmp_path, "b.json", DenseMatrix([[1, 1], [1, 1]]))
    return a, b


def test_coeff_basic(pair_files, capsys):
    a, b = pair_files
    assert main(["coeff", "--A", a, "--B", b, "--p", "1", "--q", "1"]) == 0
    out = capsys.readouterr().out
    assert out == "6/1 (approx 6)\n"


def test_coeff_engines_agree(pair_files, capsys):
    a, b = pair_files
    outputs = set()
    for engine in ("words", "recursive", "recursive_right", "toeplitz", "resolvent"):
        assert main(
            ["coeff", "--A", a, "--B", b, "--p", "3", "--q", "2", "--engine", engine]
        ) == 0
        outputs.add(capsys.readouterr().out)
    assert len(outputs) == 1


def test_coeff_complex_hermitian_input(tmp_path, capsys):
    i = GaussianScalar(0, 1)
    a = write_matrix(
        tmp_path, "za.json", HermitianMatrix([[2, i], [-i, 1]])
    )
    b = write_matrix(tmp_path, "zb.json", DenseMatrix.identity(2))
    assert main(["coeff", "--A", a, "--B", b, "--p", "1", "--q", "1"]) == 0
    assert capsys.readouterr().out == "6/1 (approx 6)\n"


def test_coeff_rational_output_format(pair_files, capsys):
    a, b = pair_files
    assert main(["coeff", "--A", a, "--B", b, "--p", "0", "--q", "0"]) == 0
    assert capsys.readouterr().out == "2/1 (approx 2)\n"


@pytest.mark.parametrize(
    "argv_patch, fragment",
    [
        (["--p", "-1", "--q", "1"], "must be >= 0"),
        (["--p", "1", "--q", "1", "--engine", "magic"], "invalid choice"),
        (["--p", "40", "--q", "40", "--engine", "words"], "oracle too large"),
    ],
)
def test_coeff_errors(pair_files, capsys, argv_patch, fragment):
    a, b = pair_files
    assert main(["coeff", "--A", a, "--B", b] + argv_patch) == 1
    err = capsys.readouterr().err
    assert "error:" in err and fragment in err


def test_missing_file(tmp_path, pair_files, capsys):
    _, b = pair_files
    missing = str(tmp_path / "nope.json")
    assert main(["coeff", "--A", missing, "--B", b, "--p", "1", "--q", "1"]) == 1
    assert "nope.json" in capsys.readouterr().err


def test_invalid_json_file(tmp_path, pair_files, capsys):
    _, b = pair_files
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert main(["coeff", "--A", str(bad), "--B", b, "--p", "1", "--q", "1"]) == 1
    assert "invalid JSON" in capsys.readouterr().err


def test_malformed_matrix_names_position(tmp_path, pair_files, capsys):
    _, b = pair_files
    bad = tmp_path / "m.json"
    bad.write_text(json.dumps({"n": 2, "entries": [["1/1", "0.5"], ["0/1", "1/1"]]}))
    assert main(["coeff", "--A", str(bad), "--B", b, "--p", "1", "--q", "1"]) == 1
    assert "entry (0,1)" in capsys.readouterr().err


def test_non_hermitian_input_rejected(tmp_path, pair_files, capsys):
    _, b = pair_files
    skew = write_matrix(tmp_path, "skew.json", DenseMatrix([[0, 1], [0, 0]]))
    assert main(["coeff", "--A", skew, "--B", b, "--p", "1", "--q", "1"]) == 1
    assert "not hermitian" in capsys.readouterr().err


def test_usage_errors_exit_one(capsys):
    assert main([]) == 1
    assert main(["coeff", "--A", "x"]) == 1
    assert main(["frobnicate"]) == 1
    err = capsys.readouterr().err
    assert "error:" in err


def test_table_json_deterministic(pair_files, capsys):
    a, b = pair_files
    argv = ["table", "--A", a, "--B", b, "--max-degree", "5"]
    assert main(argv) == 0
    first = capsys.readouterr().out
    assert main(argv) == 0
    second = capsys.readouterr().out
    assert first == second
    obj = json.loads(first)
    assert obj["violations"] == []
    assert obj["short_circuit"] is False
    assert len(obj["cells"]) == 21
    assert first == canonical_json_text(obj)


def test_table_csv_to_file(pair_files, tmp_path, capsys):
    a, b = pair_files
    out = tmp_path / "table.csv"
    assert main(
        ["table", "--A", a, "--B", b, "--max-degree", "3",
         "--format", "csv", "--output", str(out)]
    ) == 0
    assert capsys.readouterr().out == ""
    lines = out.read_text().splitlines()
    assert lines[0] == "p,q,value,sign,engine"
    assert len(lines) == 1 + 10


def test_table_rejects_non_psd(tmp_path, pair_files, capsys):
    a, _ = pair_files
    indef = write_matrix(tmp_path, "indef.json", DenseMatrix.diagonal([1, -1]))
    assert main(["table", "--A", a, "--B", indef, "--max-degree", "3"]) == 1
    assert "not PSD" in capsys.readouterr().err


def test_table_violation_exit_code(pair_files, capsys, monkeypatch):
    a, b = pair_files
    bad_cell = CellRecord(3, 3, mpq(-1))
    fake = ScanReport(
        pair_descriptor="sha256:000000000000",
        max_total_degree=6,
        engine="recursive",
        certifier="toeplitz+words-when-tractable",
        short_circuit=False,
        cells=(bad_cell,),
        violations=(bad_cell,),
        elapsed=0.0,
    )
    monkeypatch.setattr("tracepoly.cli.scan_pair", lambda *a_, **k: fake)
    assert main(["table", "--A", a, "--B", b, "--max-degree", "6"]) == 2
    captured = capsys.readouterr()
    assert "violation: p=3 q=3 value=-1/1" in captured.err
    assert json.loads(captured.out)["violations"] == [
        {"p": 3, "q": 3, "value": "-1/1", "sign": "-"}
    ]


def test_asympt_report(pair_files, capsys):
    a, b = pair_files
    assert main(
        ["asympt", "--A", a, "--B", b, "--k", "1",
         "--epsilon", "1/10", "--max-m", "6"]
    ) == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["classification"] == "positive"
    assert (obj["p"], obj["l"]) == (1, 1)
    assert obj["limit_value"] == "1/1"
    assert obj["limit_value_approx"] == "1"
    assert obj["estimated_N"] == 1
    assert obj["epsilon"] == "1/10"
    assert obj["leading_block"] == {"n": 1, "entries": [["1/1"]]}
    assert obj["ratio_sequence"][0] == [1, "3/2"]
    assert len(obj["ratio_sequence"]) == 6


def test_asympt_zero_classification(tmp_path, capsys):
    a = write_matrix(tmp_path, "a0.json", DenseMatrix.diagonal([1, 0]))
    b = write_matrix(tmp_path, "b0.json", DenseMatrix.diagonal([0, 1]))
    assert main(
        ["asympt", "--A", a, "--B", b, "--k", "2",
         "--epsilon", "1/2", "--max-m", "10"]
    ) == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["classification"] == "zero"
    assert obj["trace_ab"] == "0/1"
    assert obj["ratio_sequence"] == []
    assert "estimated_N" not in obj


def test_asympt_requires_diagonal_a(tmp_path, pair_files, capsys):
    _, b = pair_files
    full = write_matrix(tmp_path, "full.json", DenseMatrix([[2, 1], [1, 2]]))
    assert main(
        ["asympt", "--A", full, "--B", b, "--k", "1",
         "--epsilon", "1/10", "--max-m", "5"]
    ) == 1
    assert "must be diagonal" in capsys.readouterr().err


def test_asympt_float_diagonalize(tmp_path, pair_files, capsys):
    _, b = pair_files
    full = write_matrix(tmp_path, "full.json", DenseMatrix([[2, 1], [1, 2]]))
    with pytest.warns(UserWarning, match="approximate"):
        code = main(
            ["asympt", "--A", full, "--B", b, "--k", "1",
             "--epsilon", "1/10", "--max-m", "5", "--float-diagonalize"]
        )
    assert code == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["classification"] == "positive"
    assert obj["p"] == 1


@pytest.mark.parametrize("eps", ["0", "1", "3/2", "abc"])
def test_asympt_epsilon_validation(pair_files, capsys, eps):
    a, b = pair_files
    assert main(
        ["asympt", "--A", a, "--B", b, "--k", "1",
         "--epsilon", eps, "--max-m", "5"]
    ) == 1
    assert "epsilon" in capsys.readouterr().err


def test_verify_deterministic(capsys):
    argv = ["verify", "--n", "2", "--samples", "2", "--max-degree", "4",
            "--seed", "5"]
    assert main(argv) == 0
    first = capsys.readouterr().out
    assert main(argv + ["--threads", "2"]) == 0
    second = capsys.readouterr().out
    assert first == second
    obj = json.loads(first)
    assert obj["violations_total"] == 0
    assert obj["samples"] == 2
    assert obj["reports"][0]["pair"] == "sample-0-seed-5"


def test_verify_csv(capsys):
    assert main(
        ["verify", "--n", "2", "--samples", "1", "--max-degree", "2",
         "--seed", "9", "--format", "csv"]
    ) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "pair,p,q,value,sign,engine"
    assert len(lines) == 1 + 6


def test_verify_validation(capsys):
    assert main(
        ["verify", "--n", "0", "--samples", "1", "--max-degree", "2", "--seed", "1"]
    ) == 1
    assert "n must be" in capsys.readouterr().err


def test_verify_violation_exit_code(capsys, monkeypatch):
    bad_cell = CellRecord(4, 3, mpq(-2, 7))
    fake_report = ScanReport(
        pair_descriptor="sample-0-seed-1",
        max_total_degree=7,
        engine="recursive",
        certifier="toeplitz+words-when-tractable",
        short_circuit=False,
        cells=(bad_cell,),
        violations=(bad_cell,),
        elapsed=0.0,
    )
    fake = AggregateScanReport(
        n=2, samples=1, max_total_degree=7, seed=1, magnitude=3,
        reports=(fake_report,),
    )
    monkeypatch.setattr("tracepoly.cli.scan_random", lambda *a, **k: fake)
    assert main(
        ["verify", "--n", "2", "--samples", "1", "--max-degree", "7", "--seed", "1"]
    ) == 2
    captured = capsys.readouterr()
    assert "violation: pair=sample-0-seed-1 p=4 q=3 value=-2/7" in captured.err
    assert json.loads(captured.out)["violations_total"] == 1


def test_case3_point(capsys):
    assert main(
        ["case3", "--point", "1,1,1/2,1/2,1/2,1/2", "--order", "5"]
    ) == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["violations_total"] == 0
    assert obj["points"][0]["coefficients"][0] == "27/4"
    assert obj["points"][0]["params"]["z"] == "1/1"
    assert len(obj["points"][0]["coefficients"]) == 6


def test_case3_point_requires_order(capsys):
    assert main(["case3", "--point", "1,1,1/2,1/2,1/2,1/2"]) == 1
    assert "--order is required" in capsys.readouterr().err


def test_case3_point_errors(capsys):
    assert main(["case3", "--point", "1,1,1/2", "--order", "3"]) == 1
    assert "six comma-separated" in capsys.readouterr().err
    assert main(["case3", "--point", "1,1,0,1/2,1/2,1/2", "--order", "3"]) == 1
    assert "u,v,w>0" in capsys.readouterr().err


def test_case3_grid(tmp_path, capsys):
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps({
        "axes": {
            "x": ["1"], "y": ["1"], "u": ["1/2"], "v": ["1/2"], "w": ["1/2"],
            "a": ["0", "1"],
        },
        "order": 4,
    }))
    assert main(["case3", "--grid", str(grid)]) == 0
    obj = json.loads(capsys.readouterr().out)
    assert len(obj["points"]) == 2
    assert obj["order"] == 4
    # flag overrides the file's order
    assert main(["case3", "--grid", str(grid), "--order", "2"]) == 0
    obj = json.loads(capsys.readouterr().out)
    assert obj["order"] == 2
    assert len(obj["points"][0]["coefficients"]) == 3


def test_case3_grid_needs_order_somewhere(tmp_path, capsys):
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps({
        "points": [
            {"x": "1", "y": "1", "u": "1/2", "v": "1/2", "w": "1/2", "a": "0"},
        ],
    }))
    assert main(["case3", "--grid", str(grid)]) == 1
    assert "order not given" in capsys.readouterr().err
    assert main(["case3", "--grid", str(grid), "--order", "3"]) == 0
    capsys.readouterr()


def test_case3_grid_off_surface_point(tmp_path, capsys):
    grid = tmp_path / "grid.json"
    grid.write_text(json.dumps({
        "points": [
            {"x": "1", "y": "1", "z": "2", "u": "1/2", "v": "1/2", "w": "1/2",
             "a": "0"},
        ],
        "order": 3,
    }))
    assert main(["case3", "--grid", str(grid)]) == 1
    err = capsys.readouterr().err
    assert "surface equation" in err and "grid.json" in err


def test_case3_csv(tmp_path, capsys):
    assert main(
        ["case3", "--point", "1,1,1/2,1/2,1/2,1/2", "--order", "2",
         "--format", "csv"]
    ) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "point,m,value,sign"
    assert lines[1] == "0,0,27/4,+"
    assert len(lines) == 4


def test_case3_no_crosscheck(capsys):
    argv = ["case3", "--point", "1,1,1/2,1/2,1/2,1/2", "--order", "4"]
    assert main(argv) == 0
    with_check = json.loads(capsys.readouterr().out)
    assert main(argv + ["--no-crosscheck"]) == 0
    without = json.loads(capsys.readouterr().out)
    assert with_check["points"] == without["points"]
    assert without["crosscheck"] is False


def test_case3_grid_and_point_exclusive(tmp_path, capsys):
    grid = tmp_path / "g.json"
    grid.write_text("{}")
    assert main(
        ["case3", "--grid", str(grid), "--point", "1,1,1/2,1/2,1/2,1/2",
         "--order", "2"]
    ) == 1
    assert "not allowed with" in capsys.readouterr().err


def test_case3_violation_exit_code(capsys, monkeypatch):
    params = Case3Params.solve(1, 1, mpq(1, 2), mpq(1, 2), mpq(1, 2), 0)
    fake = Case3Report(
        order=1,
        crosscheck=True,
        points=(
            Case3PointResult(
                params=params,
                coefficients=(mpq(27, 4), mpq(-3)),
                violations=((1, mpq(-3)),),
            ),
        ),
    )
    monkeypatch.setattr("tracepoly.cli.case3_scan", lambda *a, **k: fake)
    assert main(
        ["case3", "--point", "1,1,1/2,1/2,1/2,1/2", "--order", "1"]
    ) == 2
    captured = capsys.readouterr()
    assert "violation: point=0 m=1 value=-3/1" in captured.err
    assert json.loads(captured.out)["violations_total"] == 1


def test_output_write_failure(pair_files, tmp_path, capsys):
    a, b = pair_files
    target = tmp_path / "no-such-dir" / "out.json"
    assert main(
        ["table", "--A", a, "--B", b, "--max-degree", "2",
         "--output", str(target)]
    ) == 1
    assert "error:" in capsys.readouterr().err
