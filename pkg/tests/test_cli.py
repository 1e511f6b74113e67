import json
import math
import subprocess
import sys

import jsonschema
import pytest

from rankcorr import cli

SCHEMA = cli.load_schema()


def run_cli(capsys, *argv):
    code = cli.main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def run_json(capsys, *argv):
    code, out, err = run_cli(capsys, "--json", *argv)
    assert code == 0, err
    doc = json.loads(out)
    jsonschema.validate(doc, SCHEMA)
    assert doc["manifest"]["checksum"]["value"] == cli.checksum(doc["results"])
    return doc


@pytest.fixture
def csv_file(tmp_path):
    def make(text, name="data.csv"):
        p = tmp_path / name
        p.write_text(text)
        return str(p)
    return make


def test_estimate_hand_example(capsys, csv_file):
    doc = run_json(capsys, "estimate", csv_file("x,y\n1,10\n2,30\n3,20\n"))
    res = doc["results"]
    assert res["n"] == 3 and res["weighted_t"] == 3
    assert res["r_new"] == pytest.approx(0.2)
    assert doc["manifest"]["command"] == "estimate"


def test_estimate_text_matches_json(capsys, csv_file):
    path = csv_file("1,2\n2,4\n3,5\n4,1\n5,7\n")
    code, text, _ = run_cli(capsys, "estimate", path)
    assert code == 0
    values = dict(line.split() for line in text.strip().splitlines())
    res = run_json(capsys, "estimate", path)["results"]
    for key in ("pearson", "spearman", "kendall", "r_new", "r_tilde"):
        assert float(values[key]) == pytest.approx(res[key], abs=1e-10)


def test_estimate_perfect_increase(capsys, csv_file):
    res = run_json(capsys, "estimate", csv_file("".join(f"{i},{i**3}\n" for i in range(1, 30))))["results"]
    for key in ("pearson", "spearman", "kendall", "r_new", "r_tilde"):
        assert res[key] == pytest.approx(1.0) if key != "pearson" else res[key] > 0.9


def test_estimate_ties_policy(capsys, csv_file):
    path = csv_file("a,b\n1,5\n2,7\n3,7\n4,9\n")
    code, _, err = run_cli(capsys, "estimate", path)
    assert code == 3
    assert "lines 3 and 4" in err and "--jitter" in err
    code, _, _ = run_cli(capsys, "estimate", path, "--jitter")
    assert code == 0


def test_estimate_columns_and_header(capsys, csv_file):
    path = csv_file("id,x,y\n0,1,3\n1,2,1\n2,3,2\n")
    res = run_json(capsys, "estimate", path, "--cols", "1,2")["results"]
    assert res["weighted_t"] == 2  # concomitant ranks 3,1,2
    res = run_json(capsys, "estimate", path, "--cols", "2,1")["results"]
    assert res["n"] == 3


@pytest.mark.parametrize(
    "text, needle",
    [
        ('x,y\n"1,5",2\n2,3\n', "decimal comma"),
        ("1,2\n2,abc\n3,4\n", "line 2"),
        ("1,2\n", "at least 2 data rows"),
        ("1,2\n3\n", "line 2"),
        ("1,2\n2,nan\n", "non-finite"),
    ],
)
def test_estimate_parse_errors(capsys, csv_file, text, needle):
    code, _, err = run_cli(capsys, "estimate", csv_file(text))
    assert code == 2
    assert needle in err


def test_estimate_bad_cols_and_missing_file(capsys, csv_file, tmp_path):
    assert run_cli(capsys, "estimate", csv_file("1,2\n2,3\n"), "--cols", "0,0")[0] == 2
    assert run_cli(capsys, "estimate", str(tmp_path / "nope.csv"))[0] == 2


def test_theory_pareto(capsys):
    res = run_json(capsys, "theory", "--model", "pareto", "--t", "10")["results"]
    c = res["coefficients"]
    # printed values are truncated to 4 decimals (r = 0.035753 shows as 0.0357)
    printed = {"rho": 0.1000, "rho_s": 0.0714, "tau": 0.0476, "r": 0.0357}
    for key, value in printed.items():
        assert c[key] == pytest.approx(value, abs=1e-4)
    assert {v["estimator"] for v in res["variances"]} == {"kendall", "r_new"}


def test_theory_fgm_independence(capsys):
    res = run_json(capsys, "theory", "--model", "fgm", "--t", "0", "--n", "1000")["results"]
    assert all(res["coefficients"][k] == 0 for k in ("rho_s", "tau", "r"))
    coeffs = {v["estimator"]: v["leading_coeff"] for v in res["variances"]}
    assert coeffs == pytest.approx({"kendall": 4 / 9, "r_new": 0.25})
    assert res["expected_r_n"] == pytest.approx(0.0, abs=1e-15)


def test_theory_normal(capsys):
    res = run_json(capsys, "theory", "--model", "normal", "--t", "0.7")["results"]
    assert res["coefficients"]["tau"] == pytest.approx(2 / math.pi * math.asin(0.7), abs=1e-12)
    assert {v["estimator"] for v in res["variances"]} == {"pearson", "kendall", "r_new"}


def test_theory_bad_parameter(capsys):
    code, _, err = run_cli(capsys, "theory", "--model", "fgm", "--t", "1.5")
    assert code == 4 and "outside" in err
    assert run_cli(capsys, "theory", "--model", "pareto", "--t", "1", "--n", "1")[0] == 4


def test_table_2_3(capsys):
    res = run_json(capsys, "table", "--reproduce", "2.3")["results"]
    flagged = [(row, res["ts"][j]) for row, fl in res["flags"].items() for j, f in enumerate(fl) if f]
    # published rho_S and r at t=0.05 disagree with the quadrature; every other cell agrees
    assert sorted(flagged) == [("r", 0.05), ("rho_S", 0.05)]
    assert res["rows"]["rho"][:2] == [None, None]
    again = run_json(capsys, "table", "--reproduce", "2.3")["results"]
    assert again == res


def test_table_text_output_is_reproducible(capsys, tmp_path):
    outs = []
    for name in ("a.txt", "b.txt"):
        path = tmp_path / name
        code, _, err = run_cli(capsys, "table", "--reproduce", "2.1", "--seed", "42", "--reps", "40",
                               "--n", "200", "--out", str(path))
        assert code == 0, err
        outs.append(path.read_bytes())
        manifest = json.loads((tmp_path / (name + ".manifest.json")).read_text())
        assert manifest["seed"] == 42
    assert outs[0] == outs[1]
    assert b"(published)" in outs[0] and b"4.444e-04" in outs[0]


def test_manifest_rerun_reproduces_checksum(capsys, tmp_path):
    out = tmp_path / "r.json"
    code, _, _ = run_cli(capsys, "--seed", "7", "--json", "--out", str(out), "table", "--reproduce", "2.4",
                         "--reps", "20", "--n", "100")
    assert code == 0
    doc = json.loads(out.read_text())
    jsonschema.validate(doc, SCHEMA)
    argv = doc["manifest"]["argv"]
    argv = [a for a in argv if a not in ("--out", str(out))]
    code, text, _ = run_cli(capsys, *argv)
    assert json.loads(text)["manifest"]["checksum"] == doc["manifest"]["checksum"]


def test_table_threads_do_not_change_results(capsys, monkeypatch):
    base = ("table", "--reproduce", "2.1", "--reps", "30", "--n", "100", "--seed", "3")
    a = run_json(capsys, *base)["results"]
    monkeypatch.setenv("RANKCORR_THREADS", "4")
    b = run_json(capsys, *base, "--threads", "1")
    assert b["results"] == a


def test_table_2_2_ordering_at_high_correlation(capsys):
    res = run_json(capsys, "table", "--reproduce", "2.2", "--reps", "200")["results"]
    j = res["ts"].index(0.99)
    assert res["rows"]["S2_rho_n"][j] < res["rows"]["S2_r_n"][j]


def test_table_errors(capsys):
    assert run_cli(capsys, "table", "--reproduce", "3.1")[0] == 4
    assert run_cli(capsys, "table", "--reproduce", "2.1", "--reps", "1")[0] == 4


def test_bench(capsys):
    doc = run_json(capsys, "bench", "--n", "1000,2000", "--algo", "both", "--repeat", "1")
    rows = doc["results"]["rows"]
    assert len(rows) == 4
    by_n = {}
    for r in rows:
        assert r["checked_against_naive"]
        by_n.setdefault(r["n"], set()).add(r["weighted_t"])
    assert all(len(v) == 1 for v in by_n.values())
    assert run_cli(capsys, "bench", "--n", "1")[0] == 4
    code, text, _ = run_cli(capsys, "bench", "--n", "500", "--backend", "python", "--repeat", "1")
    assert code == 0 and "python" in text


def test_usage_error_exit_code(capsys):
    with pytest.raises(SystemExit) as exc:
        cli.main(["theory", "--model", "weibull", "--t", "1"])
    assert exc.value.code == 2


def test_module_entry_point(tmp_path):
    path = tmp_path / "d.csv"
    path.write_text("1,1\n2,3\n3,2\n")
    proc = subprocess.run([sys.executable, "-m", "rankcorr", "estimate", str(path)], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "r_new" in proc.stdout
