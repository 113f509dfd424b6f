import csv
import io
import json

import pytest

from effcharge.cli import fmt_float, main
from effcharge.refdata import load_reference


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def significant_digits(text):
    mantissa = text.lstrip("-").split("e")[0].replace(".", "").lstrip("0")
    return len(mantissa)


def test_fmt_float_keeps_ten_significant_digits():
    assert fmt_float(1 / 3) == "0.3333333333"
    assert fmt_float(-571.30530226) == "-571.3053023"
    assert fmt_float(2.0) == "2"


def test_solve_potassium_picks_4s(capsys):
    code, out, _ = run(capsys, "solve", "--Z", "19")
    row = json.loads(out)
    assert code == 0
    assert row["configuration"].endswith("4s1")
    assert row["E0"] == pytest.approx(-571.305, abs=5e-4)


def test_solve_hydrogenic_ion_is_exact(capsys):
    code, out, _ = run(capsys, "solve", "--Z", "2", "--N", "1")
    assert code == 0 and json.loads(out)["E0"] == -2.0


def test_solve_csv_has_ten_digit_numbers(capsys):
    _, out, _ = run(capsys, "solve", "--Z", "26", "--format", "csv")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert significant_digits(rows[0]["Zstar"]) == 10
    assert float(rows[0]["E0"]) == pytest.approx(-1192.25, abs=5e-3)


def test_config_override(capsys):
    _, out, _ = run(capsys, "solve", "--Z", "19", "--config", "[Ar] 3d1")
    assert json.loads(out)["E0"] == pytest.approx(-568.473, abs=5e-4)


def test_errors_are_json_with_nonzero_exit(capsys):
    code, out, err = run(capsys, "solve", "--Z", "2", "--config", "1s3")
    assert code == 2 and out == ""
    payload = json.loads(err)
    assert set(payload) == {"error", "message", "command"}
    assert payload["command"] == "solve"
    code, _, err = run(capsys, "solve", "--Z", "2", "--N", "0")
    assert code == 2 and json.loads(err)["error"] == "ValueError"


def test_missing_input_file_is_json_error(capsys, tmp_path):
    code, _, err = run(capsys, "compare", "--input", str(tmp_path / "absent.csv"))
    assert code == 2 and json.loads(err)["error"] == "FileNotFoundError"


def test_table2_zeroth_order_reproduces_reference(capsys):
    code, out, err = run(capsys, "table2", "--range", "1..100", "--compare", "--jobs", "1")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert list(rows[0]) == ["Z", "Zstar", "E0", "E2_single", "E_HF"]
    assert len(rows) == 100
    summary = json.loads(err)
    assert summary["passed"] and summary["n_compared"] == 200


def test_output_is_byte_identical_across_runs_and_jobs(capsys, tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    main(["table2", "--range", "1..30", "--jobs", "1", "-o", str(a)])
    main(["table2", "--range", "1..30", "--jobs", "3", "-o", str(b)])
    capsys.readouterr()
    assert a.read_bytes() == b.read_bytes()


def test_compare_round_trip_and_failure(capsys, tmp_path):
    good = tmp_path / "good.csv"
    main(["table2", "--range", "1..10", "-o", str(good)])
    code, out, _ = run(capsys, "compare", "--dataset", "table2", "--input", str(good))
    report = json.loads(out)
    assert code == 0 and report["passed"] and report["n_compared"] == 20
    assert len(report["uncovered"]) == 90
    bad = tmp_path / "bad.csv"
    text = good.read_text().splitlines()
    cells = text[3].split(",")
    cells[2] = str(float(cells[2]) * 1.01)
    text[3] = ",".join(cells)
    bad.write_text("\n".join(text) + "\n")
    code, out, _ = run(capsys, "compare", "--input", str(bad))
    report = json.loads(out)
    assert code == 1 and report["n_failed"] == 1
    failed = [e for e in report["entries"] if not e["passed"]]
    assert failed[0]["key"] == [3, 3, "ground"] and failed[0]["quantity"] == "E0"


def test_table1_compare_input(capsys, tmp_path):
    path = tmp_path / "t1.csv"
    rows = ["species,E2"] + [f"{r.quantities['species']},{r.quantities['E2']}" for r in load_reference("table1")]
    path.write_text("\n".join(rows) + "\n")
    code, out, _ = run(capsys, "compare", "--dataset", "table1", "--input", str(path))
    assert code == 0 and json.loads(out)["n_compared"] == 5


def test_density_curve_columns(capsys):
    code, out, _ = run(capsys, "density", "--Z", "10", "--rmax", "4", "--points", "41")
    assert code == 0
    header = [line for line in out.splitlines() if line.startswith("#")]
    assert "# atom: Ne" in header
    body = [line for line in out.splitlines() if not line.startswith("#")]
    assert body[0] == "r,zeroth,first_order,hf"
    assert len(body) == 42
    assert body[1].startswith("0,0,")


def test_density_zeroth_only_without_reference(capsys):
    _, out, _ = run(capsys, "density", "--Z", "6", "--order", "0", "--points", "11")
    body = [line for line in out.splitlines() if not line.startswith("#")]
    assert body[0] == "r,zeroth"


def test_formfactor_curve(capsys):
    code, out, _ = run(capsys, "formfactor", "--Z", "18", "--smax", "1.5", "--points", "16")
    assert code == 0
    body = [line for line in out.splitlines() if not line.startswith("#")]
    assert body[0] == "s,q,f0,gaussian_fit"
    first = body[1].split(",")
    assert float(first[2]) == pytest.approx(18.0, abs=1e-9)
    for line in body[1:]:
        for cell in line.split(","):
            if "." in cell:
                assert significant_digits(cell) <= 10


def test_formfactor_non_spherical_uses_average(capsys):
    code, out, _ = run(capsys, "formfactor", "--Z", "6", "--points", "5")
    body = [line for line in out.splitlines() if not line.startswith("#")]
    assert code == 0 and float(body[1].split(",")[2]) == pytest.approx(6.0, abs=1e-9)


def test_reports_and_errors_follow_shipped_schema(capsys, tmp_path):
    import pathlib

    import jsonschema

    schema = json.loads((pathlib.Path(__file__).parents[1] / "docs" / "report.schema.json").read_text())
    validator = jsonschema.Draft202012Validator(schema)
    good = tmp_path / "t.csv"
    main(["table2", "--range", "1..4", "-o", str(good)])
    _, out, _ = run(capsys, "compare", "--input", str(good))
    validator.validate(json.loads(out))
    _, out, _ = run(capsys, "table2", "--range", "2", "--compare", "--format", "json")
    validator.validate(json.loads(out))
    _, _, err = run(capsys, "density", "--Z", "0")
    validator.validate(json.loads(err))
    with pytest.raises(jsonschema.ValidationError):
        validator.validate({"passed": True})
