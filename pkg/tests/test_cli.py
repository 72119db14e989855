import pytest

from qeuclid.cli import (EXIT_CONFIG, EXIT_DIVERGENCE, EXIT_OK,
                         EXIT_PRECONDITION, main)
from qeuclid.config import (build_multiplier, build_profile, build_symbol,
                            parse_config_text)
from qeuclid.errors import ConfigurationError
from qeuclid.grids import GridSpec


MINIMAL_SWEEP = """
experiment.kind = heat_sweep
grid.half_width = 4.0
grid.n = 16
problem.t_min = 1.0
problem.t_max = 10.0
problem.t_samples = 4
problem.p = 1.5
problem.q = 3.0
"""

NONLINEAR = """
experiment.kind = nonlinear_heat
grid.half_width = 4.0
grid.n = 16
problem.T = 0.5
data.u0 = ground_projector:theta0=1,scale=0.1
picard.steps = 40
"""


def test_parse_minimal_config_defaults():
    cfg = parse_config_text(MINIMAL_SWEEP)
    assert cfg.kind == "heat_sweep"
    assert cfg["problem.alpha"] == 1.0
    assert cfg["problem.sigma"] == "power:lam=2"
    assert cfg["output.prefix"] == "heat_sweep"
    assert any(line.startswith("experiment.kind") for line in
               cfg.header_lines())


def test_parse_rejects_unknown_key():
    with pytest.raises(ConfigurationError) as err:
        parse_config_text(MINIMAL_SWEEP + "\nalpha_ = 3\n")
    assert "alpha_" in str(err.value)


def test_parse_rejects_bad_value_and_duplicates():
    with pytest.raises(ConfigurationError):
        parse_config_text(MINIMAL_SWEEP + "\ngrid.n = many\n")
    with pytest.raises(ConfigurationError):
        parse_config_text(MINIMAL_SWEEP + "\ngrid.n = 16\ngrid.n = 32\n")
    with pytest.raises(ConfigurationError):
        parse_config_text("experiment.kind = warp_drive\n")


def test_spec_string_builders():
    grid = GridSpec(2, 4.0, 16)
    sym = build_symbol("gaussian:width=2,scale=0.5", grid)
    assert sym.values[8, 8] == pytest.approx(0.5)
    mult = build_multiplier("power:lam=2")
    assert mult.growth_lam == 2.0
    prof = build_profile("power_decay:gamma=2.5")
    assert prof(0.0) == pytest.approx(1.0)
    with pytest.raises(ConfigurationError):
        build_multiplier("power")  # missing lam
    with pytest.raises(ConfigurationError):
        build_profile("sawtooth")


def test_cli_unknown_key_exit_code(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text(MINIMAL_SWEEP + "\nalpha_ = 3\n")
    code = main(["run", str(cfg)])
    assert code == EXIT_CONFIG
    assert "alpha_" in capsys.readouterr().err


def test_cli_list_experiments(capsys):
    assert main(["list-experiments"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "heat_sweep" in out and "nonlinear_wave" in out


def test_cli_sweep_deterministic_reruns(tmp_path):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text(MINIMAL_SWEEP)
    out1 = tmp_path / "run1"
    out2 = tmp_path / "run2"
    assert main(["run", str(cfg), "--out", str(out1)]) == EXIT_OK
    assert main(["run", str(cfg), "--out", str(out2)]) == EXIT_OK
    body1 = (out1 / "heat_sweep.csv").read_text()
    body2 = (out2 / "heat_sweep.csv").read_text()
    assert body1 == body2
    lines = body1.splitlines()
    comment = [ln for ln in lines if ln.startswith("#")]
    assert any("experiment.kind = heat_sweep" in ln for ln in comment)
    header = [ln for ln in lines if not ln.startswith("#")][0]
    assert header == "t,norm_q,m_t,bound_ratio,fitted_slope"
    assert (out1 / "heat_sweep_summary.txt").exists()


def test_cli_multiplier_bound_seeded(tmp_path):
    cfg = tmp_path / "mb.cfg"
    cfg.write_text("""
experiment.kind = multiplier_bound
grid.half_width = 6.0
grid.n = 16
bound.samples = 4
""")
    assert main(["run", str(cfg), "--out", str(tmp_path), "--seed", "3"]) \
        == EXIT_OK
    body = (tmp_path / "multiplier_bound.csv").read_text()
    assert body.splitlines()[-1].count(",") == 2
    # identical rerun with the same seed is byte-identical
    first = body
    assert main(["run", str(cfg), "--out", str(tmp_path), "--seed", "3"]) \
        == EXIT_OK
    assert (tmp_path / "multiplier_bound.csv").read_text() == first


def test_cli_nonlinear_run_and_certificate(tmp_path):
    cfg = tmp_path / "nl.cfg"
    cfg.write_text(NONLINEAR)
    assert main(["run", str(cfg), "--out", str(tmp_path)]) == EXIT_OK
    cert = (tmp_path / "nonlinear_heat_certificate.csv").read_text()
    assert "iterate,sup_diff,contraction_ratio,roundtrip_error" in cert
    summary = (tmp_path / "nonlinear_heat_summary.txt").read_text()
    assert "converged = True" in summary


def test_cli_nonlinear_window_violation_exit(tmp_path):
    cfg = tmp_path / "nl.cfg"
    cfg.write_text(NONLINEAR.replace("problem.T = 0.5", "problem.T = 500"))
    assert main(["run", str(cfg), "--out", str(tmp_path)]) == EXIT_PRECONDITION


def test_cli_nonlinear_divergence_exit(tmp_path):
    cfg = tmp_path / "nl.cfg"
    text = NONLINEAR.replace("problem.T = 0.5", "problem.T = 500")
    text += "run.override_window = true\n"
    cfg.write_text(text)
    assert main(["run", str(cfg), "--out", str(tmp_path)]) == EXIT_DIVERGENCE


def test_cli_validate_empty_selection(capsys):
    assert main(["validate", "--only", ""]) == EXIT_CONFIG
    assert main(["validate", "--only", "no_such_criterion"]) == EXIT_CONFIG


def test_env_output_override(tmp_path, monkeypatch):
    cfg = tmp_path / "sweep.cfg"
    cfg.write_text(MINIMAL_SWEEP)
    target = tmp_path / "envout"
    monkeypatch.setenv("QEUCLID_OUT", str(target))
    assert main(["run", str(cfg)]) == EXIT_OK
    assert (target / "heat_sweep.csv").exists()
