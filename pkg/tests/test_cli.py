import numpy as np
import pytest

import rspsim.verify
from rspsim.cli import ConfigError, main, parse_complex_list, parse_config
from rspsim.gates import make_gate


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_parse_complex_list():
    assert parse_complex_list("0.6,0:0.8,0", "lambda") == (0.6 + 0j, 0.8 + 0j)
    assert parse_complex_list("0.6:0,0.8", "target") == (0.6 + 0j, 0.8j)
    with pytest.raises(ConfigError):
        parse_complex_list("1,2,3", "lambda")
    with pytest.raises(ConfigError):
        parse_complex_list("abc", "lambda")


def test_parse_config_example_line():
    cfg = parse_config(
        ["run", "--protocol", "deterministic", "--d", "2",
         "--lambda", "0.6,0:0.8,0", "--target", "0.6,0:0,0.8", "--seed", "42"]
    )
    assert cfg.protocol == "deterministic"
    assert cfg.lambdas == (0.6 + 0j, 0.8 + 0j)
    assert cfg.target == (0.6 + 0j, 0.8j)
    assert cfg.seed == 42


def test_missing_target_names_field(capsys):
    code, _out, err = run_cli(capsys, "run", "--protocol", "deterministic",
                              "--lambda", "0.6,0:0.8,0")
    assert code == 1
    assert "target" in err


def test_slightly_unnormalized_list_is_renormalized():
    # norm 0.999999 is accepted and renormalized exactly
    lam = np.array([0.6, 0.8]) * 0.999999
    cfg = parse_config(
        ["run", "--protocol", "deterministic",
         "--lambda", f"{lam[0]:.17g},0:{lam[1]:.17g},0", "--target", "1,0:0,0"]
    )
    assert abs(np.linalg.norm(np.array(cfg.lambdas)) - 1.0) <= 1e-15


def test_badly_unnormalized_list_is_rejected(capsys):
    code, _out, err = run_cli(capsys, "run", "--protocol", "deterministic",
                              "--lambda", "0.5,0:0.5,0", "--target", "1:0")
    assert code == 1
    assert "lambda" in err


def test_run_deterministic_prints_transcript(capsys):
    code, out, _err = run_cli(
        capsys, "run", "--protocol", "deterministic", "--d", "2",
        "--lambda", "0.6,0:0.8,0", "--target", "0.6,0:0,0.8", "--seed", "42",
    )
    assert code == 0
    assert "fidelity: 1" in out
    assert "RESULT protocol=deterministic" in out
    assert "success=true" in out


def test_run_literal_flags_non_unitary_step(capsys):
    s = 1 / np.sqrt(2)
    code, out, _err = run_cli(
        capsys, "run", "--protocol", "deterministic", "--mode", "literal",
        "--lambda", "0.6,0:0.8,0", "--target", f"{s},0:0,{s}", "--seed", "1",
    )
    assert code == 0
    assert "NON-UNITARY STEP" in out
    assert "raw pre-measurement norm" in out


def test_run_probabilistic_branch_is_seed_stable(capsys):
    args = ("run", "--protocol", "probabilistic", "--lambda", "0.6,0:0.8,0",
            "--target", "0.6,0:0,0.8", "--seed", "7")
    code1, out1, _ = run_cli(capsys, *args)
    code2, out2, _ = run_cli(capsys, *args)
    assert code1 == code2 == 0
    assert out1 == out2
    assert ("success=true" in out1) or ("success=false" in out1)


def test_probabilistic_success_rate_over_seeds(capsys):
    # at theta = pi/6 the success probability is one half
    lam = f"{np.sin(np.pi / 6):.17g},0:{np.cos(np.pi / 6):.17g},0"
    successes = 0
    trials = 200
    for seed in range(trials):
        code, out, _ = run_cli(capsys, "run", "--protocol", "probabilistic",
                               "--lambda", lam, "--target", "0.6,0:0,0.8",
                               "--seed", str(seed))
        assert code == 0
        successes += "success=true" in out
    sigma = np.sqrt(trials * 0.25)
    assert abs(successes - trials * 0.5) <= 4 * sigma


def test_nguyen_run(capsys):
    code, out, _ = run_cli(capsys, "run", "--protocol", "nguyen",
                           "--target", "0.6,0:0,0.8", "--seed", "3")
    assert code == 0
    assert "success=true" in out


def test_unknown_flag_exits_one(capsys):
    code, _out, err = run_cli(capsys, "run", "--bogus", "1")
    assert code == 1
    assert err


def test_sweep_writes_csv(tmp_path, capsys):
    out_path = tmp_path / "fig1.csv"
    code, _out, _err = run_cli(
        capsys, "sweep", "--protocol", "probabilistic", "--target", "0.6,0:0,0.8",
        "--trials", "300", "--seed", "5", "--out", str(out_path),
    )
    assert code == 0
    text = out_path.read_text()
    assert text.startswith("theta,alpha,beta,protocol,mode,d,")
    assert len(text.strip().split("\n")) == 22


def test_sweep_is_byte_identical(tmp_path, capsys):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    for p in paths:
        code, _out, _err = run_cli(
            capsys, "sweep", "--protocol", "deterministic", "--target", "1,0:0,0",
            "--trials", "100", "--seed", "9", "--out", str(p),
        )
        assert code == 0
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_sweep_unwritable_path(capsys):
    code, _out, err = run_cli(
        capsys, "sweep", "--protocol", "probabilistic", "--target", "1,0:0,0",
        "--trials", "10", "--out", "/nonexistent-dir/x.csv",
    )
    assert code == 1
    assert "cannot write" in err


def test_sweep_rejects_non_qubit(capsys):
    code, _out, err = run_cli(
        capsys, "sweep", "--protocol", "deterministic", "--d", "3",
        "--target", "1,0:0,0:0,0",
    )
    assert code == 1
    assert "d = 2" in err


def test_config_file_merging(tmp_path, capsys):
    cfg_file = tmp_path / "run.cfg"
    cfg_file.write_text(
        "protocol = deterministic\n"
        "lambda = 0.6,0:0.8,0\n"
        "target = 1,0:0,0\n"
        "seed = 4\n"
        "# comment line\n"
    )
    cfg = parse_config(["run", "--config", str(cfg_file)])
    assert cfg.protocol == "deterministic"
    assert cfg.seed == 4
    # explicit flags win
    cfg = parse_config(["run", "--config", str(cfg_file), "--seed", "12"])
    assert cfg.seed == 12


def test_config_file_unknown_key(tmp_path, capsys):
    cfg_file = tmp_path / "bad.cfg"
    cfg_file.write_text("warp = 9\n")
    code, _out, err = run_cli(capsys, "run", "--config", str(cfg_file))
    assert code == 1
    assert "warp" in err


def test_verify_gates_passes(capsys):
    code, out, _err = run_cli(capsys, "verify", "gates")
    assert code == 0
    assert "[PASS] gates.literal_defect_closed_form" in out
    assert "FAIL" not in out


def test_verify_corrupted_gate_table_fails(capsys, monkeypatch):
    import rspsim.gates as gates_mod

    good = gates_mod.pauli_x.__wrapped__

    def corrupted(d):
        g = good(d)
        m = g.matrix.copy()
        m[0, 0] += 0.5
        return make_gate(m, g.dims, g.name)

    monkeypatch.setattr(rspsim.verify.gates, "pauli_x", corrupted)
    code, out, _err = run_cli(capsys, "verify", "gates")
    assert code == 2
    assert "[FAIL] gates.pauli_cyclic_order_d" in out


def test_verify_report_bytes_deterministic(capsys):
    code1, out1, _ = run_cli(capsys, "verify", "oracle", "--seed", "1", "--trials", "150")
    code2, out2, _ = run_cli(capsys, "verify", "oracle", "--seed", "1", "--trials", "150")
    assert code1 == code2 == 0
    assert out1 == out2
    assert "oracle.sampled_frequencies_4sigma" in out1


def test_tomo_command(capsys):
    code, out, _err = run_cli(
        capsys, "tomo", "--target", "0.6,0:0,0.8", "--lambda", "0.6,0:0.8,0",
        "--shots", "100000", "--seed", "2",
    )
    assert code == 0
    assert "fidelity_mixed" in out
    distance = float(out.split("trace distance to exact receiver state: ")[1].split()[0])
    assert distance <= 0.02


def test_run_internal_failure_exits_two(capsys, monkeypatch):
    import rspsim.cli as cli_mod
    from rspsim.errors import SimulationError

    def broken(*args, **kwargs):
        raise SimulationError("branch structure is corrupted")

    monkeypatch.setattr(cli_mod, "run_protocol", broken)
    code, _out, err = run_cli(capsys, "run", "--protocol", "nguyen", "--target", "1,0:0,0")
    assert code == 2
    assert "invariant failure" in err


def test_tomo_rejects_qutrits(capsys):
    code, _out, err = run_cli(capsys, "tomo", "--d", "3", "--target", "1,0:0,0:0,0")
    assert code == 1
    assert "d = 2" in err


def test_missing_subcommand(capsys):
    code, _out, err = run_cli(capsys)
    assert code == 1
    assert "subcommand" in err
