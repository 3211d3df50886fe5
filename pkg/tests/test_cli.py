"""CLI tests: subcommands, exit codes, determinism, config handling."""

import json
import math

import pytest

from curvkepler.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_export_presets(capsys):
    code, out, _ = run_cli(capsys, "export-presets")
    assert code == 0
    doc = json.loads(out)
    assert doc["schema"] == 1
    assert doc["presets"]["desitter"] == {"kappa1": -1.0, "kappa2": -1.0}
    assert len(doc["presets"]) == 6


def test_verify_full_suite_passes(capsys):
    code, out, _ = run_cli(capsys, "verify", "--suite", "all", "--preset",
                           "spherical", "--samples", "100", "--seed", "7")
    assert code == 0
    doc = json.loads(out)
    assert doc["passed"] is True
    assert doc["max_residual"] < 1e-8
    assert {r["suite"] for r in doc["reports"]} == {"sl2z", "casimirs", "so4",
                                                    "lrl"}


def test_verify_classical_limit(capsys):
    code, out, _ = run_cli(capsys, "verify", "--suite", "sl2z", "--z", "0",
                           "--samples", "30", "--seed", "3")
    assert code == 0
    assert json.loads(out)["max_residual"] < 1e-10


def test_verify_rejects_degenerate_kappa2(capsys):
    code, _, err = run_cli(capsys, "verify", "--suite", "so4", "--z", "1",
                           "--kappa2", "0", "--samples", "10")
    assert code == 2
    assert "degenerate" in err


def test_verify_missing_params(capsys):
    code, _, err = run_cli(capsys, "verify", "--suite", "so4", "--samples", "5")
    assert code == 2
    assert "--preset" in err


def test_verify_perturbation_flags(capsys):
    code, out, _ = run_cli(capsys, "verify", "--suite", "so4", "--preset",
                           "spherical", "--samples", "20", "--seed", "1",
                           "--perturb", "j02")
    assert code == 1
    assert json.loads(out)["max_residual"] > 1e-3
    # in a combined run the perturbation applies to the suites that know it
    code, out, _ = run_cli(capsys, "verify", "--suite", "all", "--preset",
                           "spherical", "--samples", "15", "--seed", "1",
                           "--perturb", "j02")
    assert code == 1
    # a name from the wrong family is rejected, as is a typo
    code, _, err = run_cli(capsys, "verify", "--suite", "sl2z", "--z", "0.3",
                           "--samples", "5", "--perturb", "j02")
    assert code == 2 and "sl2z" in err
    code, _, err = run_cli(capsys, "verify", "--suite", "so4", "--preset",
                           "spherical", "--samples", "5", "--perturb", "bogus")
    assert code == 2 and "unknown generator" in err


def test_verify_deterministic_output(capsys):
    args = ("verify", "--suite", "lrl", "--preset", "desitter",
            "--samples", "25", "--seed", "11")
    _, out1, _ = run_cli(capsys, *args)
    _, out2, _ = run_cli(capsys, *args)
    assert out1 == out2


def test_simulate_circular_benchmark(capsys, tmp_path):
    csv_path = tmp_path / "orbit.csv"
    summary_path = tmp_path / "drift.json"
    code, _, _ = run_cli(
        capsys, "simulate", "--family", "kepler-cc", "--z", "0", "--kappa2",
        "1", "--gamma", str(1.0 / (2.0 * math.sqrt(2.0))),
        "--state", f"1.0,{math.pi / 2},0.0,0.0,0.0,1.0",
        "--t-end", str(2 * math.pi), "--rel-tol", "1e-12",
        "--abs-tol", "1e-14", "--csv", str(csv_path),
        "--summary", str(summary_path))
    assert code == 0
    lines = csv_path.read_text().splitlines()
    assert lines[0].startswith("t,r,theta,phi,p_r,p_theta,p_phi,")
    summary = json.loads(summary_path.read_text())
    assert summary["terminated_early"] is False
    assert max(v["max_drift"] for v in summary["drift"].values()) < 1e-9


def test_simulate_zero_time(capsys, tmp_path):
    csv_path = tmp_path / "single.csv"
    code, _, _ = run_cli(
        capsys, "simulate", "--family", "free-cc", "--preset", "spherical",
        "--state", "1.0,1.2,0.3,0.1,0.2,0.4", "--t-end", "0",
        "--csv", str(csv_path), "--summary", str(tmp_path / "s.json"))
    assert code == 0
    assert len(csv_path.read_text().splitlines()) == 2   # header + one row


def test_simulate_collision_exits_3(capsys, tmp_path):
    csv_path = tmp_path / "plunge.csv"
    code, _, _ = run_cli(
        capsys, "simulate", "--family", "kepler-cc", "--preset", "spherical",
        "--gamma", "0.5", "--state", "0.6,1.5707963,0.0,-1.0,0.0,0.0",
        "--t-end", "5", "--csv", str(csv_path),
        "--summary", str(tmp_path / "s.json"))
    assert code == 3
    assert len(csv_path.read_text().splitlines()) > 2    # partial CSV written
    summary = json.loads((tmp_path / "s.json").read_text())
    assert summary["terminated_early"] is True
    assert "pole" in summary["termination_reason"]


def test_simulate_beltrami_input_transformed(capsys, tmp_path):
    code, _, _ = run_cli(
        capsys, "simulate", "--family", "free-cc", "--z", "0.3", "--kappa2",
        "1", "--chart", "beltrami", "--state", "0.4,0.5,0.6,0.2,-0.1,0.3",
        "--t-end", "1", "--csv", str(tmp_path / "b.csv"),
        "--summary", str(tmp_path / "b.json"))
    assert code == 0
    summary = json.loads((tmp_path / "b.json").read_text())
    assert summary["drift"]["H"]["max_drift"] < 1e-8


def test_simulate_invalid_state(capsys):
    code, _, err = run_cli(capsys, "simulate", "--family", "free-cc",
                           "--preset", "spherical", "--state", "1,2,3")
    assert code == 2
    assert "6" in err


def test_curvature_constant_grid(capsys):
    code, out, _ = run_cli(
        capsys, "curvature", "--kind", "cc", "--chart", "polar-constant",
        "--z", "0.5", "--kappa2", "1",
        "--grid", "0.4:1.2:3,0.5:1.1:3,0.2:1.0:3")
    assert code == 0
    lines = out.strip().splitlines()
    assert lines[0] == "x1,x2,x3,K12,K13,K23,K,closed_K,abs_err"
    assert lines[-1].startswith("max_abs_err")
    max_err = float(lines[-1].split(",")[-1])
    assert max_err < 1e-4
    for line in lines[1:-1]:
        k_scalar = float(line.split(",")[6])
        assert abs(k_scalar - 3.0) < 1e-4


def test_curvature_flat_grid_zero(capsys):
    code, out, _ = run_cli(
        capsys, "curvature", "--kind", "nc", "--chart", "beltrami",
        "--z", "0", "--kappa2", "1", "--grid", "0.3:0.9:2,0.3:0.9:2,0.3:0.9:2")
    assert code == 0
    for line in out.strip().splitlines()[1:-1]:
        assert abs(float(line.split(",")[6])) < 1e-8


def test_curvature_singular_grid_exits_2(capsys):
    code, _, err = run_cli(
        capsys, "curvature", "--kind", "cc", "--chart", "polar-constant",
        "--preset", "spherical", "--grid", "0.0:1.0:3,0.5:1.1:2,0.2:1.0:2")
    assert code == 2
    assert "grid point" in err


def test_rank_kepler_with_lrl(capsys):
    code, out, _ = run_cli(capsys, "rank", "--family", "kepler-cc",
                           "--preset", "spherical", "--gamma", "0.5",
                           "--samples", "50", "--seed", "9",
                           "--append-lrl", "L1")
    assert code == 0
    doc = json.loads(out)
    assert doc["expected_rank"] == 5
    assert doc["modal_rank"] == 5
    assert doc["passed"] is True


def test_rank_free_nc(capsys):
    code, out, _ = run_cli(capsys, "rank", "--family", "free-nc", "--z", "0.4",
                           "--kappa2", "1", "--samples", "50", "--seed", "9")
    assert code == 0
    assert json.loads(out)["modal_rank"] == 4


def test_rank_lrl_requires_kepler_cc(capsys):
    code, _, err = run_cli(capsys, "rank", "--family", "free-cc", "--preset",
                           "spherical", "--append-lrl", "L1", "--samples", "5")
    assert code == 2
    assert "kepler-cc" in err


def test_config_file_and_flag_override(capsys, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(
        "# verification defaults\n"
        "suite = so4\n"
        "preset = hyperbolic\n"
        "samples = 20\n"
        "seed = 5\n")
    code, out, _ = run_cli(capsys, "verify", "--config", str(cfg))
    assert code == 0
    doc = json.loads(out)
    assert doc["suite"] == "so4"
    assert doc["samples"] == 20
    # explicit flag wins over the config value
    code, out, _ = run_cli(capsys, "verify", "--config", str(cfg),
                           "--samples", "10")
    assert json.loads(out)["samples"] == 10


def test_config_file_bad_line(capsys, tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("samples 20\n")
    code, _, err = run_cli(capsys, "verify", "--config", str(cfg))
    assert code == 2
    assert "key = value" in err


def test_verify_casimirs_suite_and_out_file(capsys, tmp_path):
    out = tmp_path / "report.json"
    code, stdout, _ = run_cli(capsys, "verify", "--suite", "casimirs", "--z",
                              "0.25", "--samples", "30", "--seed", "2",
                              "--out", str(out))
    assert code == 0
    assert stdout == ""
    doc = json.loads(out.read_text())
    assert doc["passed"] is True
    groups = {r["group"] for rep in doc["reports"] for r in rep["results"]}
    assert "coproduct" in groups and "centrality" in groups


def test_simulate_implicit_midpoint(capsys, tmp_path):
    code, _, _ = run_cli(
        capsys, "simulate", "--family", "kepler-cc", "--preset", "spherical",
        "--gamma", "0.45", "--state", "1.1,1.2,0.4,0.2,0.4,0.9",
        "--t-end", "3", "--method", "implicit-midpoint", "--fixed-step",
        "0.005", "--stride", "20", "--csv", str(tmp_path / "m.csv"),
        "--summary", str(tmp_path / "m.json"))
    assert code == 0
    summary = json.loads((tmp_path / "m.json").read_text())
    assert summary["drift"]["H"]["max_drift"] < 1e-3   # second-order stepper


def test_simulate_runaway_exits_3_with_partial_csv(capsys, tmp_path):
    """z > 0 variable-curvature escape ends in step underflow; the partial
    trajectory is still exported and the exit code signals the singularity."""
    csv_path = tmp_path / "runaway.csv"
    code, _, _ = run_cli(
        capsys, "simulate", "--family", "kepler-nc", "--z", "0.4",
        "--kappa2", "1", "--gamma", "0.45",
        "--state", "1.0,1.2,0.4,0.5,0.2,0.6", "--t-end", "30",
        "--csv", str(csv_path), "--summary", str(tmp_path / "r.json"))
    assert code == 3
    assert len(csv_path.read_text().splitlines()) > 2
    summary = json.loads((tmp_path / "r.json").read_text())
    assert summary["terminated_early"] is True


def test_curvature_variable_polar_chart(capsys):
    code, out, _ = run_cli(
        capsys, "curvature", "--kind", "nc", "--chart", "polar-variable",
        "--z", "0.25", "--kappa2", "1",
        "--grid", "0.5:1.3:3,0.6:1.3:3,0.3:1.1:3")
    assert code == 0
    lines = out.strip().splitlines()
    assert float(lines[-1].split(",")[-1]) < 1e-4


def test_simulate_and_rank_deterministic(capsys, tmp_path):
    sim_args = ("simulate", "--family", "kepler-cc", "--preset", "spherical",
                "--gamma", "0.45", "--state", "1.0,1.2,0.3,0.05,0.2,0.9",
                "--t-end", "2")
    outs = []
    for i in (1, 2):
        csv_path = tmp_path / f"o{i}.csv"
        code, _, _ = run_cli(capsys, *sim_args, "--csv", str(csv_path),
                             "--summary", str(tmp_path / f"s{i}.json"))
        assert code == 0
        outs.append(csv_path.read_bytes())
    assert outs[0] == outs[1]
    rank_args = ("rank", "--family", "kepler-cc", "--preset", "spherical",
                 "--gamma", "0.5", "--samples", "20", "--seed", "4")
    _, out1, _ = run_cli(capsys, *rank_args)
    _, out2, _ = run_cli(capsys, *rank_args)
    assert out1 == out2


def test_seed_env_fallback(capsys, monkeypatch):
    monkeypatch.setenv("CURVKEPLER_SEED", "21")
    code, out, _ = run_cli(capsys, "verify", "--suite", "sl2z", "--z", "0.2",
                           "--samples", "10")
    assert code == 0
    assert json.loads(out)["seed"] == 21
