import math

import numpy as np
import pytest

from qeuclid.errors import AccuracyError, DomainError
from qeuclid.evolution import (EvolutionProblem, caputo_l1_oracle,
                               decay_sweep, solve, solve_heat,
                               solve_schrodinger, solve_wave,
                               volterra_residual)
from qeuclid.grids import GridSpec, SymbolGrid, ThetaForm, sample_symbol
from qeuclid.mittag import MittagParams, ml_eval
from qeuclid.multipliers import constant_multiplier, power_multiplier

THETA0 = ThetaForm(1, 0.0)


def _heat_problem(alpha=1.0, hw=1.5, n=64, T=5.0, K=2000, p=1.5, q=3.0):
    spec = GridSpec(1, hw, n)
    u0 = sample_symbol("gaussian", spec, width=1.0)
    ts = np.linspace(0.0, T, K + 1)
    return EvolutionProblem("heat", alpha, power_multiplier(2.0), u0,
                            THETA0, ts, p=p, q=q)


def test_heat_classical_exponential():
    prob = _heat_problem(alpha=1.0, K=64)
    traj = solve_heat(prob)
    sv = prob.sigma_values
    for i, t in enumerate(prob.times):
        expected = np.exp(-t * sv) * prob.u0.values
        assert np.max(np.abs(traj.states[i] - expected)) < 1e-12


def test_initial_state_exact_for_all_kinds():
    spec = GridSpec(1, 2.0, 32)
    u0 = sample_symbol("gaussian", spec, width=1.0)
    u1 = sample_symbol("gaussian", spec, width=0.8)
    ts = np.linspace(0.0, 1.0, 16)
    for kind, alpha in (("heat", 0.7), ("schrodinger", 0.5), ("wave", 1.5)):
        prob = EvolutionProblem(kind, alpha, power_multiplier(2.0), u0,
                                THETA0, ts, u1=u1 if kind == "wave" else None,
                                p=1.5, q=3.0)
        traj = solve(prob)
        assert np.array_equal(traj.states[0], u0.values)


def test_heat_fractional_volterra_residual():
    prob = _heat_problem(alpha=0.7)
    res = volterra_residual(solve_heat(prob))
    assert res <= 1e-6


def test_heat_residual_wide_band():
    # sigma = |xi|^2 up to 16 needs the finer time grid to stay under 1e-6
    spec = GridSpec(1, 4.0, 16)
    u0 = sample_symbol("gaussian", spec, width=1.0)
    ts = np.linspace(0.0, 2.0, 8001)
    prob = EvolutionProblem("heat", 0.7, power_multiplier(2.0), u0, THETA0,
                            ts, p=1.5, q=3.0)
    res = volterra_residual(solve_heat(prob), max_checks=24)
    assert res <= 1e-6


def test_heat_classical_residual_tight():
    prob = _heat_problem(alpha=1.0, hw=1.0)
    res = volterra_residual(solve_heat(prob))
    assert res <= 1e-8


def test_schrodinger_norm_conservation():
    spec = GridSpec(1, 2.0, 64)
    u0 = sample_symbol("gaussian", spec, width=1.0)
    ts = np.linspace(0.0, 5.0, 51)
    prob = EvolutionProblem("schrodinger", 1.0, power_multiplier(2.0), u0,
                            THETA0, ts, p=2.0, q=2.0)
    traj = solve_schrodinger(prob)
    n0 = u0.l2_norm()
    for i in range(len(ts)):
        n = SymbolGrid(spec, traj.states[i]).l2_norm()
        assert abs(n - n0) / n0 < 1e-10


def test_schrodinger_fractional_volterra_residual():
    spec = GridSpec(1, 1.0, 64)
    u0 = sample_symbol("gaussian", spec, width=1.0)
    ts = np.linspace(0.0, 5.0, 2001)
    prob = EvolutionProblem("schrodinger", 0.5, power_multiplier(2.0), u0,
                            THETA0, ts, p=1.5, q=3.0)
    res = volterra_residual(solve_schrodinger(prob))
    assert res <= 1e-6


def test_wave_initial_velocity_one_sided_difference():
    # alpha near 2 keeps the fractional t^(alpha-1) startup term below 1e-3
    spec = GridSpec(1, 2.0, 32)
    u0 = sample_symbol("gaussian", spec, width=1.0)
    u1 = sample_symbol("gaussian", spec, width=0.7)
    h = 1e-4
    ts = np.array([0.0, h])
    prob = EvolutionProblem("wave", 1.9, power_multiplier(2.0), u0, THETA0,
                            ts, u1=u1, p=1.5, q=3.0)
    traj = solve_wave(prob)
    dudt = (traj.states[1] - traj.states[0]) / h
    assert np.max(np.abs(dudt - u1.values)) < 1e-3


def test_wave_alpha_near_two_trigonometric_limit():
    # the distance to the alpha = 2 limit scales like |z| * 5e-4 at
    # alpha = 1.999, so the check stays in the small-|z| regime
    spec = GridSpec(1, 2.0, 16)
    u0 = sample_symbol("gaussian", spec, width=1.0)
    u1 = sample_symbol("gaussian", spec, width=0.8)
    c = 1.0
    ts = np.array([0.0, 0.1, 0.2])
    prob = EvolutionProblem("wave", 1.999, constant_multiplier(c), u0, THETA0,
                            ts, u1=u1, p=1.5, q=3.0)
    traj = solve_wave(prob)
    rc = math.sqrt(c)
    for i, t in enumerate(ts):
        expected = math.cos(rc * t) * u0.values \
            + math.sin(rc * t) / rc * u1.values
        assert np.max(np.abs(traj.states[i] - expected)) < 1e-4


def test_wave_volterra_residual():
    spec = GridSpec(1, 2.0, 64)
    u0 = sample_symbol("gaussian", spec, width=1.0)
    u1 = sample_symbol("gaussian", spec, width=1.5)
    ts = np.linspace(0.0, 5.0, 2001)
    prob = EvolutionProblem("wave", 1.5, power_multiplier(2.0), u0, THETA0,
                            ts, u1=u1, p=1.5, q=3.0)
    res = volterra_residual(solve_wave(prob))
    assert res <= 1e-6


def test_wave_constant_symbol_volterra():
    spec = GridSpec(1, 2.0, 16)
    u0 = sample_symbol("gaussian", spec, width=1.0)
    u1 = sample_symbol("gaussian", spec, width=0.8)
    ts = np.linspace(0.0, 5.0, 2001)
    prob = EvolutionProblem("wave", 1.5, constant_multiplier(1.0), u0, THETA0,
                            ts, u1=u1, p=1.5, q=3.0)
    res = volterra_residual(solve_wave(prob))
    assert res <= 1e-6


def test_wave_linearity_in_data():
    spec = GridSpec(1, 2.0, 32)
    u0 = sample_symbol("gaussian", spec, width=1.0)
    u1 = sample_symbol("gaussian", spec, width=0.8)
    zero = SymbolGrid(spec, np.zeros_like(u0.values))
    ts = np.linspace(0.0, 3.0, 16)

    def wave(a, b):
        prob = EvolutionProblem("wave", 1.5, power_multiplier(2.0), a, THETA0,
                                ts, u1=b, p=1.5, q=3.0)
        return solve_wave(prob).states

    both = wave(u0, u1)
    split = wave(u0, zero) + wave(zero, u1)
    assert np.max(np.abs(both - split)) < 1e-12


def test_heat_sup_non_increasing():
    prob = _heat_problem(alpha=0.7, K=64)
    traj = solve_heat(prob)
    sups = np.max(np.abs(traj.states), axis=1)
    assert np.all(np.diff(sups) <= 1e-14)


def test_corrupted_trajectory_detected():
    prob = _heat_problem(alpha=0.7, K=500)
    traj = solve_heat(prob)
    traj.states = traj.states * 1.01
    traj.states[0] = prob.u0.values  # keep the initial state consistent
    res = volterra_residual(traj)
    assert res > 1e-3


def test_residual_coarse_grid_accuracy_error():
    prob = _heat_problem(alpha=0.5, K=40, T=5.0)
    traj = solve_heat(prob)
    with pytest.raises(AccuracyError):
        volterra_residual(traj, target_tol=1e-10)


def test_l1_oracle_classical_limit():
    ts = np.linspace(0.0, 1.0, 501)
    v = caputo_l1_oracle(1.0, 1.0, 1.0, ts)
    exact = np.exp(-ts)
    assert np.max(np.abs(v - exact)) < 5e-3  # O(dt)


def test_l1_oracle_zero_data():
    ts = np.linspace(0.0, 1.0, 101)
    v = caputo_l1_oracle(1.0, 0.6, 0.0, ts)
    assert np.all(v == 0)


def test_l1_oracle_graded_refinement_order():
    alpha = 0.6
    r = (2.0 - alpha) / alpha
    exact = ml_eval(MittagParams(alpha), -1.0)
    errs = []
    for K in (500, 1000, 2000):
        ts = (np.arange(K + 1) / K) ** r
        v = caputo_l1_oracle(1.0, alpha, 1.0, ts)
        errs.append(abs(v[-1] - exact))
    order = math.log2(errs[-2] / errs[-1])
    assert order >= 2.0 - alpha - 0.15


def test_problem_validation():
    spec = GridSpec(1, 2.0, 16)
    u0 = sample_symbol("gaussian", spec, width=1.0)
    ts = np.linspace(0.0, 1.0, 8)
    with pytest.raises(DomainError):
        EvolutionProblem("heat", 1.5, power_multiplier(2.0), u0, THETA0, ts)
    with pytest.raises(DomainError):
        EvolutionProblem("wave", 1.5, power_multiplier(2.0), u0, THETA0, ts)
    with pytest.raises(DomainError):
        EvolutionProblem("flow", 1.0, power_multiplier(2.0), u0, THETA0, ts)
    with pytest.raises(DomainError):
        EvolutionProblem("heat", 1.0, power_multiplier(2.0), u0, THETA0,
                         ts, p=2.5, q=4.0)


def test_decay_sweep_classical_l2_conservation():
    spec = GridSpec(1, 6.0, 64)
    u0 = sample_symbol("gaussian", spec, width=1.0)
    ts = np.logspace(0, 2, 9)
    prob = EvolutionProblem("schrodinger", 1.0, power_multiplier(2.0), u0,
                            THETA0, ts, p=2.0, q=2.0)
    report = decay_sweep(prob)
    assert abs(report.fitted_slope) < 1e-6
    assert not report.assumption_violated


def test_decay_sweep_assumption_violation_flagged():
    spec = GridSpec(2, 6.0, 32)
    u0 = sample_symbol("gaussian", spec, width=1.0)
    ts = np.logspace(0, 1, 5)
    prob = EvolutionProblem("heat", 1.0, power_multiplier(0.5), u0,
                            ThetaForm(2, 0.0), ts, p=4.0 / 3.0, q=4.0)
    report = decay_sweep(prob)
    assert report.assumption_violated
    assert np.all(np.isnan(report.mt))


def test_decay_sweep_csv_schema(tmp_path):
    spec = GridSpec(1, 6.0, 32)
    u0 = sample_symbol("gaussian", spec, width=1.0)
    ts = np.logspace(0, 1, 5)
    prob = EvolutionProblem("heat", 1.0, power_multiplier(2.0), u0, THETA0,
                            ts, p=1.5, q=3.0)
    report = decay_sweep(prob)
    path = tmp_path / "sweep.csv"
    report.to_csv(path, header_lines=["a = 1"])
    lines = path.read_text().splitlines()
    assert lines[0] == "# a = 1"
    assert lines[1] == "t,norm_q,m_t,bound_ratio,fitted_slope"
    assert len(lines) == 2 + len(ts)
