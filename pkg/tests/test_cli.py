"""End-to-end checks of the command-line front end: exit codes, bytes, errors."""

import json
import math
import subprocess
import sys

from heatkern import cli


def run_cli(args, capsys):
    code = cli.main(args)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def write_problem(tmp_path, name, obj):
    path = tmp_path / name
    path.write_text(json.dumps(obj))
    return str(path)


COSINE = {"a": 1.0, "N": 1, "modes": [{"n": 1, "matrix": [[[0.5, 0.0]]]}]}


# ---------------------------------------------------------------- coeffs


def test_coeffs_single_is_bare_expression(capsys):
    code, out, err = run_cli(["coeffs", "--k", "1"], capsys)
    assert (code, out, err) == (0, "Q\n", "")
    code, out, _ = run_cli(["coeffs", "--k", "2"], capsys)
    assert code == 0
    assert out == "-1/3*Q'' + Q*Q\n"


def test_coeffs_table_and_json(capsys):
    code, out, _ = run_cli(["coeffs", "--upto", "2"], capsys)
    assert code == 0
    assert out.splitlines() == ["k,expression", "0,1", "1,Q", "2,-1/3*Q'' + Q*Q"]
    code, out, _ = run_cli(["coeffs", "--upto", "1", "--format", "json"], capsys)
    assert code == 0
    assert json.loads(out) == [
        {"k": 0, "expression": "1"},
        {"k": 1, "expression": "Q"},
    ]


# ------------------------------------------------------------- invariants


def test_invariants_free_k0(capsys):
    code, out, err = run_cli(
        ["invariants", "--k", "0", "--problem", "free_a1_N1.json"], capsys)
    assert (code, err) == (0, "")
    assert out == "6.2831853071795862\n"


def test_invariants_constant_table(capsys):
    code, out, _ = run_cli(
        ["invariants", "--upto", "3", "--problem", "constant_a1_N1.json"], capsys)
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == "k,A_k,grid"
    for line in lines[1:]:
        value = float(line.split(",")[1])
        assert abs(value - 2.0 * math.pi) <= 1e-12


def test_invariants_explicit_path(tmp_path, capsys):
    path = write_problem(tmp_path, "wide.json", {
        "a": 2.0, "N": 1, "modes": [{"n": 0, "matrix": [[[0.25, 0.0]]]}],
    })
    code, out, _ = run_cli(["invariants", "--k", "0", "--problem", path], capsys)
    assert code == 0
    assert out == "12.566370614359172\n"


# ----------------------------------------------------------- error channel


def test_missing_problem_is_config_error(capsys):
    code, out, err = run_cli(["invariants", "--k", "0", "--problem", "nope.json"],
                             capsys)
    assert (code, out) == (2, "")
    assert err.endswith("\n") and err.count("\n") == 1
    payload = json.loads(err)
    assert payload["exit"] == 2 and payload["error"] == "config"


def test_malformed_json_is_config_error(tmp_path, capsys):
    path = tmp_path / "broken.json"
    path.write_text("{not json")
    code, _, err = run_cli(["invariants", "--k", "0", "--problem", str(path)],
                           capsys)
    assert code == 2
    assert json.loads(err)["error"] == "config"


def test_bad_flag_is_config_error(capsys):
    code, _, err = run_cli(["trace", "--t-grid", "0.1", "--format", "xml"], capsys)
    assert code == 2
    assert json.loads(err)["exit"] == 2
    code, _, err = run_cli(["trace", "--t-grid", "0,-1"], capsys)
    assert code == 2
    code, _, err = run_cli(["verify", "--only", "no-such-check"], capsys)
    assert code == 2


def test_threads_env_validation(monkeypatch, capsys):
    monkeypatch.setenv("HEATKERN_THREADS", "0")
    code, _, err = run_cli(["trace", "--t-grid", "0.5", "--n-max", "16"], capsys)
    assert code == 2
    assert "HEATKERN_THREADS" in json.loads(err)["reason"]
    monkeypatch.setenv("HEATKERN_THREADS", "many")
    code, _, _ = run_cli(["trace", "--t-grid", "0.5", "--n-max", "16"], capsys)
    assert code == 2


def test_help_exits_zero(capsys):
    code = cli.main(["--help"])
    out = capsys.readouterr().out
    assert code == 0
    assert "coeffs" in out and "verify" in out


# ----------------------------------------------------------------- sweeps


def test_trace_rows_and_check_tol(capsys):
    base = ["trace", "--problem", "constant_a1_N1.json",
            "--t-grid", "0.05,0.1", "--n-max", "48"]
    code, out, err = run_cli(base + ["--check-tol", "1e-6"], capsys)
    assert (code, err) == (0, "")
    lines = out.splitlines()
    assert lines[0] == "t,omega_oracle,omega_order2,omega_resummed"
    assert len(lines) == 3 and all(len(l.split(",")) == 4 for l in lines[1:])
    code, out, err = run_cli(base + ["--check-tol", "1e-15"], capsys)
    assert code == 4
    assert out.splitlines()[0] == "t,omega_oracle,omega_order2,omega_resummed"
    assert json.loads(err)["error"] == "verification"


def test_trace_bytes_reproducible_across_thread_caps(monkeypatch, capsys):
    args = ["trace", "--problem", "constant_a1_N1.json",
            "--t-grid", "0.05,0.1,0.2,0.4", "--n-max", "32"]
    monkeypatch.setenv("HEATKERN_THREADS", "1")
    code1, out1, _ = run_cli(args, capsys)
    monkeypatch.setenv("HEATKERN_THREADS", "3")
    code2, out2, _ = run_cli(args, capsys)
    assert (code1, code2) == (0, 0)
    assert out1 and out1 == out2


def test_det_rows_negative_lambda(capsys):
    code, out, err = run_cli(
        ["det", "--problem", "constant_a1_N1.json", "--lam-grid=-16",
         "--n-max", "96"], capsys)
    assert (code, err) == (0, "")
    lines = out.splitlines()
    assert lines[0] == "lam,log_det_oracle,weyl,gamma"
    lam, log_det, weyl, _gamma = (float(v) for v in lines[1].split(","))
    assert lam == -16.0
    assert abs(weyl - 8.0 * math.pi) <= 1e-12
    # exact answer for Q = 1: eigenvalues n^2 + 1 - lam over the integers
    exact = 2.0 * math.log(2.0 * math.sinh(math.pi * math.sqrt(17.0)))
    assert abs(log_det - exact) <= 1e-8 * abs(exact)


def test_det_resolution_refusal(capsys):
    code, out, err = run_cli(
        ["det", "--problem", "constant_a1_N1.json", "--lam-grid=-64",
         "--n-max", "48"], capsys)
    assert (code, out) == (3, "")
    payload = json.loads(err)
    assert payload["exit"] == 3 and payload["error"] == "resolution"
    assert payload["suggestion"]["n_max"] > 48


def test_zeta_rows_match_lattice_sum(capsys):
    code, out, _ = run_cli(
        ["zeta", "--problem", "free_a1_N1.json", "--s-grid", "2.5",
         "--lam", "-1", "--n-max", "48"], capsys)
    assert code == 0
    s, value = (float(v) for v in out.splitlines()[1].split(","))
    assert s == 2.5
    direct = sum((n * n + 1.0) ** -2.5 for n in range(-4000, 4001))
    assert abs(value - direct) <= 1e-10 * direct


def test_zeta_lambda_above_spectrum_is_config_error(capsys):
    code, _, err = run_cli(
        ["zeta", "--problem", "free_a1_N1.json", "--s-grid", "2.5",
         "--lam", "5"], capsys)
    assert code == 2
    assert json.loads(err)["error"] == "config"


# -------------------------------------------------------------------- kdv


def test_kdv_csv_static_constant(capsys):
    code, out, err = run_cli(
        ["kdv", "--problem", "constant_a1_N1.json", "--flow", "1",
         "--s-end", "0.5", "--steps", "64", "--grid", "64", "--record", "5",
         "--invariants", "A2,I1"], capsys)
    assert (code, err) == (0, "")
    lines = out.splitlines()
    assert "# flow_k = 1" in lines
    assert "# gradient_rescale = -2" in lines
    assert "# invariant_rescale = -1" in lines
    assert "s,A2,I1" in lines
    assert "# drift A2 = 0" in lines and "# drift I1 = 0" in lines
    assert "# max_drift = 0" in lines
    data = [l for l in lines if not l.startswith("#")]
    assert len(data) == 1 + 5  # header + record snapshots


def test_kdv_json_series(capsys):
    code, out, _ = run_cli(
        ["kdv", "--problem", "constant_a1_N1.json", "--flow", "1",
         "--s-end", "0.5", "--steps", "16", "--grid", "32", "--record", "3",
         "--invariants", "I1", "--format", "json"], capsys)
    assert code == 0
    obj = json.loads(out)
    assert obj["flow_k"] == "1" and obj["steps"] == "16"
    assert obj["drifts"] == {"I1": 0.0} and obj["max_drift"] == 0.0
    assert len(obj["s"]) == 3 and obj["s"][-1] == 0.5
    for value in obj["series"]["I1"]:
        assert abs(value + 2.0 * math.pi) <= 1e-12


def test_kdv_divergence_exit3_with_suggestion(tmp_path, capsys):
    path = write_problem(tmp_path, "cosine.json", COSINE)
    code, out, err = run_cli(
        ["kdv", "--problem", path, "--flow", "2", "--s-end", "1.0",
         "--steps", "100", "--grid", "128"], capsys)
    assert (code, out) == (3, "")
    payload = json.loads(err)
    assert payload["error"] == "resolution"
    assert payload["suggestion"] == {"steps": 400}


def test_kdv_aliasing_exit3_with_required(tmp_path, capsys):
    wide = {"a": 1.0, "N": 1, "modes": [{"n": 3, "matrix": [[[0.2, 0.0]]]}]}
    path = write_problem(tmp_path, "wide.json", wide)
    code, _, err = run_cli(
        ["kdv", "--problem", path, "--flow", "1", "--steps", "8",
         "--grid", "8"], capsys)
    assert code == 3
    payload = json.loads(err)
    assert payload["error"] == "resolution"
    assert payload["required"] > 8


# ----------------------------------------------------------------- verify


def test_verify_single_check_exit0(capsys):
    code, out, err = run_cli(["verify", "--only", "determinant-benchmark"], capsys)
    assert (code, err) == (0, "")
    assert out.startswith("PASS determinant-benchmark:")


def test_verify_failing_check_exit4(capsys):
    code, out, err = run_cli(["verify", "--only", "perturbative-scaling"], capsys)
    assert code == 4
    assert out.startswith("FAIL perturbative-scaling:")
    payload = json.loads(err)
    assert payload["exit"] == 4
    assert "perturbative-scaling" in payload["reason"]


# ----------------------------------------------------------- output files


def test_output_file_matches_stdout(tmp_path, capsys):
    args = ["invariants", "--upto", "2", "--problem", "constant_a1_N1.json"]
    code, out, _ = run_cli(args, capsys)
    assert code == 0
    target = tmp_path / "table.csv"
    code = cli.main(args + ["--output", str(target)])
    captured = capsys.readouterr()
    assert code == 0 and captured.out == ""
    assert target.read_text() == out


def test_module_entrypoint_subprocess():
    proc = subprocess.run(
        [sys.executable, "-m", "heatkern.cli", "invariants", "--k", "0"],
        capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout == "6.2831853071795862\n"
