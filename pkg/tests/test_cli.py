"""Command-line behaviour: exit codes, documented examples, determinism."""

import pathlib

import pytest

from berglab.cli import main


def run(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_gamma_example(capsys):
    code, out, err = run(
        capsys, ["gamma", "--k", "2", "--lambda", "0", "--profile", "r1^2", "--rmax", "5"]
    )
    assert code == 0 and err == ""
    rows = [l for l in out.splitlines() if not l.startswith("#")]
    assert rows[0] == "rho,gamma"
    values = [float(r.split(",")[1]) for r in rows[1:]]
    # (rho + 2) / (rho + 3): 2/3, 3/4, 4/5, ...
    for rho, v in enumerate(values):
        assert v == pytest.approx((rho + 2) / (rho + 3), abs=1e-10)


def test_norm_example(capsys):
    code, out, err = run(
        capsys, ["norm", "--symbol", "1-abs2(z)", "--d", "1", "--mu", "0", "--D", "8"]
    )
    assert code == 0
    value = float([l for l in out.splitlines() if not l.startswith("#")][-1])
    assert value == pytest.approx(0.5, abs=1e-10)


def test_parse_example(capsys):
    code, out, err = run(capsys, ["parse", "--symbol", "prod(a=r1^2, c=1-abs2(zc))"])
    assert code == 0
    body = [l for l in out.splitlines() if not l.startswith("#")]
    assert body[0] == "prod(a = r1^2, c = 1 - abs2(zc))"
    assert body[1] == "class: Product"


def test_parse_error_is_exit_one(capsys):
    code, out, err = run(capsys, ["parse", "--symbol", "1 + + 2"])
    assert code == 1
    assert err.startswith("error:")


def test_bad_flag_is_exit_one(capsys):
    code, out, err = run(capsys, ["norm", "--symbol", "1", "--d", "1", "--mu", "0"])
    assert code == 1
    assert "error:" in err


def test_unknown_command_is_exit_one(capsys):
    code, out, err = run(capsys, ["frobnicate"])
    assert code == 1


def test_domain_error_is_exit_one(capsys):
    # weight at the boundary of admissibility
    code, out, err = run(
        capsys, ["norm", "--symbol", "1", "--d", "1", "--mu", "-1", "--D", "4"]
    )
    assert code == 1
    assert err.startswith("error:")


def test_failing_tolerance_is_exit_two(capsys):
    code, out, err = run(
        capsys,
        [
            "decompose",
            "--a", "r1^2", "--c", "1-abs2(zc)",
            "--n", "2", "--ell", "1", "--k", "1",
            "--D", "4", "--R", "1",
            "--tol", "1e-18",
        ],
    )
    assert code == 2


def test_decompose_passes_at_documented_tolerance(capsys):
    code, out, err = run(
        capsys,
        [
            "decompose",
            "--a", "r1^2", "--c", "1-abs2(zc)",
            "--n", "2", "--ell", "1", "--k", "1",
            "--D", "4", "--R", "2",
        ],
    )
    assert code == 0
    assert "[ok]" in out


def test_dry_run_prints_plan_without_computing(capsys, tmp_path):
    out_file = tmp_path / "m.csv"
    code, out, err = run(
        capsys,
        [
            "matrix", "--symbol", "1-abs2(z)", "--d", "2", "--mu", "1",
            "--D", "6", "--out", str(out_file), "--dry-run",
        ],
    )
    assert code == 0
    assert "plan:" in out
    assert not out_file.exists()


def test_effective_settings_echoed(capsys):
    code, out, err = run(
        capsys, ["norm", "--symbol", "1", "--d", "1", "--mu", "0", "--D", "4"]
    )
    assert code == 0
    assert any(line.startswith("# symbol = ") for line in out.splitlines())


def test_matrix_csv_byte_identical(capsys, tmp_path):
    args = [
        "matrix", "--symbol", "2-abs2(z)", "--d", "2", "--mu", "1", "--D", "4"
    ]
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    assert run(capsys, args + ["--out", str(p1)])[0] == 0
    assert run(capsys, args + ["--out", str(p2)])[0] == 0
    assert p1.read_bytes() == p2.read_bytes()


def test_gamma_writes_csv(capsys, tmp_path):
    p = tmp_path / "g.csv"
    code, out, err = run(
        capsys,
        ["gamma", "--k", "1,1", "--profile", "r1^2", "--rmax", "3", "--out", str(p)],
    )
    assert code == 0
    lines = p.read_text().splitlines()
    assert lines[0] == "rho,gamma"
    assert lines[1].startswith("0 0,")


def test_fredholm_refusal_is_exit_one(capsys):
    code, out, err = run(capsys, ["fredholm", "--symbol", "zc1", "--d", "2"])
    assert code == 1
    assert err.startswith("error:")


def test_spectrum_weighted_flag(capsys):
    code, out, err = run(
        capsys,
        [
            "spectrum", "--symbol", "2-abs2(zc)", "--d", "2", "--R", "2",
            "--weight-profile", "r1^2", "--weight-k", "1",
        ],
    )
    assert code == 0
    assert "verdict: Fredholm" in out


def test_suite_runs_and_reports(capsys, tmp_path):
    out_dir = tmp_path / "runs"
    code, out, err = run(
        capsys, ["suite", "--only", "norm_identity", "--out", str(out_dir)]
    )
    assert code == 0
    assert "OVERALL PASS" in out
    assert (out_dir / "summary.txt").exists()
    assert (out_dir / "config.txt").exists()


def test_suite_dry_run(capsys, tmp_path):
    out_dir = tmp_path / "runs"
    code, out, err = run(capsys, ["suite", "--dry-run", "--out", str(out_dir)])
    assert code == 0
    assert "plan:" in out
    assert not out_dir.exists()


def test_suite_bad_config_is_exit_one(capsys, tmp_path):
    p = tmp_path / "bad.cfg"
    p.write_text("nonsense.key = 1\n")
    code, out, err = run(capsys, ["suite", "--config", str(p)])
    assert code == 1
    assert err.startswith("error:")


def test_help_exits_zero(capsys):
    assert run(capsys, ["--help"])[0] == 0
    assert run(capsys, ["matrix", "--help"])[0] == 0
