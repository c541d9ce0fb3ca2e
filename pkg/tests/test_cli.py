import json

import pytest

from polyrep.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_poly_eval(capsys):
    code, out, _ = run_cli(capsys, "poly", "eval", "--m", "5", "--x", "3")
    assert code == 0
    assert json.loads(out)["records"] == [{"value": 12}]


def test_repr_count_with_list(capsys):
    code, out, _ = run_cli(
        capsys, "repr", "count", "--m", "5", "--alpha", "1,1,1,1", "--n", "1", "--list"
    )
    rec = json.loads(out)["records"][0]
    assert code == 0 and rec["count"] == 4
    assert [0, 0, 0, 1] in rec["solutions"]


def test_density_methods_agree(capsys):
    code, out, _ = run_cli(
        capsys,
        "density", "--m", "5", "--alpha", "1,1,1,1", "--n", "1", "--p", "5",
        "--method", "explicit",
    )
    v1 = json.loads(out)["records"][0]["value"]
    code2, out2, _ = run_cli(
        capsys,
        "density", "--m", "5", "--alpha", "1,1,1,1", "--n", "1", "--p", "5",
        "--method", "oracle", "--depth", "3",
    )
    v2 = json.loads(out2)["records"][0]["value"]
    assert code == code2 == 0
    assert v1 == v2 == "24/25"


def test_usage_error_exit_code(capsys):
    assert main(["density", "--m", "5"]) == 1
    capsys.readouterr()


def test_unknown_suite_usage_error(capsys):
    assert main(["suite", "no-such-suite"]) == 1
    capsys.readouterr()


def test_obstruction_exit_code(capsys):
    code = main(
        ["eisenstein", "--m", "5", "--alpha", "1,1,1,1", "--n", "1", "--d", "5,5,5,5"]
    )
    capsys.readouterr()
    assert code == 2


def test_budget_exit_code(capsys):
    code = main(
        ["density", "--m", "5", "--alpha", "1,1,1,1", "--n", "1", "--p", "31",
         "--method", "oracle", "--depth", "9"]
    )
    capsys.readouterr()
    assert code == 3


def test_theorem_gate_suite_boundary(capsys):
    code, out, _ = run_cli(capsys, "suite", "theorem-gate", "--theta", "1/1978")
    assert code == 0 and json.loads(out)["summary"]["ok"] is True
    code2 = main(["suite", "theorem-gate", "--theta", "1/1977"])
    capsys.readouterr()
    assert code2 == 2  # strictness: theta must lie below 1/1977


def test_witness_window(capsys):
    code, out, _ = run_cli(
        capsys,
        "witness", "--m", "5", "--alpha", "1,1,1,1", "--n-range", "500:510",
        "--omega-bound", "3",
    )
    data = json.loads(out)
    assert code == 0 and data["summary"]["coverage"] == 1.0


def test_csv_json_payload_parity(capsys, tmp_path):
    args = ["residuals", "--m", "5", "--alpha", "1,1,1,1", "--n-range", "1:6"]
    code, out, _ = run_cli(capsys, *args)
    values_json = [(r["n"], r["r"]) for r in json.loads(out)["records"]]
    code2, out2, _ = run_cli(capsys, "--format", "csv", *args)
    lines = out2.strip().splitlines()
    header = lines[0].split(",")
    idx_n, idx_r = header.index("n"), header.index("r")
    values_csv = [
        (int(row.split(",")[idx_n]), int(row.split(",")[idx_r])) for row in lines[1:]
    ]
    assert code == code2 == 0
    assert values_json == values_csv


def test_deterministic_rerun_and_roundtrip(capsys):
    args = ["suite", "sandwich", "--cases", "40", "--seed", "9"]
    _, out1, _ = run_cli(capsys, *args)
    _, out2, _ = run_cli(capsys, *args)
    d1, d2 = json.loads(out1), json.loads(out2)
    d1.pop("timing"), d2.pop("timing")
    assert d1 == d2
    # re-serialization is stable
    assert json.dumps(d1, sort_keys=True) == json.dumps(d2, sort_keys=True)


def test_out_file_and_config_file(capsys, tmp_path):
    cfg = tmp_path / "polyrep.cfg"
    cfg.write_text("digits = 30\nseed = 5\n")
    out_path = tmp_path / "out.json"
    code = main(
        ["--config", str(cfg), "--out", str(out_path),
         "poly", "eval", "--m", "7", "--x", "2"]
    )
    capsys.readouterr()
    assert code == 0
    data = json.loads(out_path.read_text())
    assert data["records"] == [{"value": 7}]
    assert data["config"]["digits"] == 30


def test_threshold_grid(capsys):
    code, out, _ = run_cli(capsys, "threshold", "--grid")
    data = json.loads(out)
    assert code == 0 and len(data["records"]) == 9


def test_sieve_sums_command(capsys):
    code, out, _ = run_cli(
        capsys,
        "sieve", "sums", "--m", "5", "--alpha", "1,1,1,1", "--n", "40",
        "--pool", "5,7", "--D", "20", "--z0", "4",
    )
    data = json.loads(out)["records"][0]
    assert code == 0
    assert data["weighted_lower"] <= data["weighted_upper"]


def test_driver_command(capsys):
    code, out, _ = run_cli(
        capsys,
        "sieve", "driver", "--m", "5", "--alpha", "1,1,1,1",
        "--n-range", "500:505", "--theta", "1/1978",
    )
    data = json.loads(out)
    assert code == 0 and data["summary"]["ok"] is True
