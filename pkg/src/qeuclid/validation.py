"""Desk-scale verification battery: one record per acceptance criterion,
shared by the command-line ``validate`` entry point and the test suite."""

from __future__ import annotations

import math
import time
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DivergenceError
from .grids import GridSpec, SymbolGrid, ThetaForm, sample_symbol, \
    twisted_convolution
from .lebesgue import lp_norm, singular_profile
from .mittag import MittagParams, ml_bound_scan, ml_eval, ml_eval_many
from .multipliers import gaussian_multiplier, hormander_bound, \
    identity_multiplier, m_t, power_multiplier
from .evolution import EvolutionProblem, caputo_l1_oracle, decay_sweep, \
    solve, volterra_residual
from .nonlinear import PicardProblem, _nonlinearity, _time_integral, \
    constant_profile, picard_heat, picard_wave, power_decay_profile, \
    small_data_check, t_star_estimate, uniqueness_probe
from .weyl import RepSpace, calibrate_trace_constant, quantize

__all__ = ["ValidationRecord", "run_validation_suite", "CRITERIA"]


@dataclass
class ValidationRecord:
    name: str
    measured: float
    tolerance: float
    passed: bool
    detail: str = ""
    seconds: float = 0.0

    def row(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return (f"{self.name:<22} measured={self.measured:12.4e} "
                f"tol={self.tolerance:9.2e} {verdict:4} ({self.seconds:6.1f}s) "
                f"{self.detail}")


def _battery_symbols(spec: GridSpec):
    yield sample_symbol("gaussian", spec, width=1.0)
    yield sample_symbol("gaussian", spec, width=0.5)
    yield sample_symbol("gaussian", spec, width=2.0)
    yield sample_symbol("gaussian", spec, width=1.5, center=[1.0, -0.5])
    yield sample_symbol("gaussian", spec, width=2.5)
    yield sample_symbol("modulated_gaussian", spec, width=1.0,
                        wavevector=[2.0, -1.0])
    yield sample_symbol("modulated_gaussian", spec, width=0.8,
                        wavevector=[0.5, 1.5])
    yield sample_symbol("power_gaussian", spec, power=2.0, width=1.0)
    yield sample_symbol("power_gaussian", spec, power=4.0, width=1.2)
    yield sample_symbol("bump", spec, radius=6.0)


def criterion_plancherel() -> ValidationRecord:
    """Operator L2 norm vs symbol L2 norm on ten Schwartz-class symbols."""
    t0 = time.time()
    theta = ThetaForm(2, 1.0)
    spec = GridSpec(2, 12.0, 256)
    rep = RepSpace.matched(theta, spec)
    worst = 0.0
    for sym in _battery_symbols(spec):
        op = quantize(sym, theta, rep)
        nc = lp_norm(singular_profile(op), 2.0)
        ref = sym.l2_norm()
        worst = max(worst, abs(nc - ref) / ref)
    return ValidationRecord("plancherel", worst, 1e-6, worst <= 1e-6,
                            "10 symbols, grid 256, rep 256",
                            time.time() - t0)


def criterion_homomorphism() -> ValidationRecord:
    """quantize(f *_theta g) vs quantize(f) quantize(g), five Gaussian pairs."""
    t0 = time.time()
    theta = ThetaForm(2, 1.0)
    spec = GridSpec(2, 12.0, 64)
    rep = RepSpace.matched(theta, spec)
    pairs = [
        (sample_symbol("gaussian", spec, width=1.0),
         sample_symbol("gaussian", spec, width=1.3)),
        (sample_symbol("gaussian", spec, width=0.8, center=[0.5, 0.0]),
         sample_symbol("gaussian", spec, width=1.0)),
        (sample_symbol("modulated_gaussian", spec, width=1.0, wavevector=1.0),
         sample_symbol("gaussian", spec, width=1.2)),
        (sample_symbol("gaussian", spec, width=1.5),
         sample_symbol("modulated_gaussian", spec, width=0.9,
                       wavevector=[0.0, 1.0])),
        (sample_symbol("gaussian", spec, width=2.0, center=[0.0, -0.4]),
         sample_symbol("gaussian", spec, width=0.7)),
    ]
    worst = 0.0
    for f, g in pairs:
        qf = quantize(f, theta, rep)
        qg = quantize(g, theta, rep)
        prod = qf.kernel @ qg.kernel
        conv = quantize(twisted_convolution(f, g, theta), theta, rep)
        rel = np.linalg.norm(prod - conv.kernel) / np.linalg.norm(prod)
        worst = max(worst, float(rel))
    return ValidationRecord("homomorphism", worst, 1e-6, worst <= 1e-6,
                            "5 Gaussian pairs, grid 64", time.time() - t0)


def criterion_trace() -> ValidationRecord:
    """Calibrated trace returns the symbol value at zero on five symbols."""
    t0 = time.time()
    theta = ThetaForm(2, 1.0)
    spec = GridSpec(2, 12.0, 256)
    rep = RepSpace.matched(theta, spec)
    c = calibrate_trace_constant(theta, rep)
    mixture = sample_symbol("gaussian", spec, width=1.0)
    mixture.values = mixture.values \
        - 0.5 * sample_symbol("gaussian", spec, width=0.6).values
    symbols = [
        sample_symbol("gaussian", spec, width=2.0),
        sample_symbol("gaussian", spec, width=0.7, center=[0.8, 0.3]),
        sample_symbol("modulated_gaussian", spec, width=1.0, wavevector=1.5),
        sample_symbol("power_gaussian", spec, power=2.0, width=1.0),
        mixture,
    ]
    center = tuple(int(np.argmin(np.abs(spec.axis()))) for _ in range(2))
    worst = 0.0
    for sym in symbols:
        op = quantize(sym, theta, rep)
        f0 = sym.values[center]
        err = abs(c * np.trace(op.kernel) - f0)
        worst = max(worst, float(err))
    return ValidationRecord("trace_normalization", worst, 1e-6, worst <= 1e-6,
                            "5 symbols after unit-Gaussian calibration",
                            time.time() - t0)


def criterion_mittag(seam_radius: float | None = None) -> ValidationRecord:
    """Identity values, seam continuity, and bound-scan stability."""
    t0 = time.time()
    parts = []

    xs = np.linspace(-10.0, 10.0, 81)
    p11 = MittagParams(1.0, 1.0, seam_radius=seam_radius)
    vals = ml_eval_many(p11, xs.astype(complex))
    parts.append(("E11_vs_exp",
                  float(np.max(np.abs(vals - np.exp(xs)) / np.abs(np.exp(xs)))),
                  1e-12))

    p21 = MittagParams(2.0, 1.0, seam_radius=seam_radius)
    vals = ml_eval_many(p21, -(xs.astype(complex) ** 2))
    parts.append(("E21_vs_cos",
                  float(np.max(np.abs(vals - np.cos(xs)))), 1e-12))

    phalf = MittagParams(0.5, 1.0, seam_radius=seam_radius)
    ref = math.e * math.erfc(1.0)
    parts.append(("Ehalf(-1)",
                  abs(ml_eval(phalf, -1.0) - ref) / ref, 1e-10))

    seam_worst = 0.0
    for alpha in (0.6, 0.9, 1.5):
        pars = MittagParams(alpha, 1.0, seam_radius=seam_radius)
        R = pars.seam
        lo = complex(-R * (1.0 - 1e-12))
        hi = complex(-R * (1.0 + 1e-12))
        a = ml_eval(pars, lo)
        b = ml_eval(pars, hi)
        seam_worst = max(seam_worst, abs(a - b) / max(abs(b), 1e-300))
    parts.append(("seam_continuity", seam_worst, 1e-10))

    scan_worst = 0.0
    for alpha in (0.5, 0.9, 1.5):
        pars = MittagParams(alpha, 1.0, seam_radius=seam_radius)
        rays = ["negative-real"] if alpha > 1.0 else ["negative-real",
                                                      "imaginary"]
        for ray in rays:
            c1 = ml_bound_scan(pars, ray, z_max=50.0, samples=1500)
            c2 = ml_bound_scan(pars, ray, z_max=50.0, samples=3000)
            if not (math.isfinite(c1) and math.isfinite(c2)):
                scan_worst = math.inf
            else:
                scan_worst = max(scan_worst, abs(c1 - c2) / c2)
    parts.append(("bound_scan_stability", scan_worst, 1e-3))

    worst_margin = max(m / tol for _, m, tol in parts)
    passed = all(m <= tol for _, m, tol in parts)
    detail = "; ".join(f"{n}={m:.2e}" for n, m, _ in parts)
    return ValidationRecord("mittag_leffler", worst_margin, 1.0, passed,
                            detail, time.time() - t0)


def criterion_caputo() -> ValidationRecord:
    """L1 stepper refinement orders and solver Volterra residuals."""
    t0 = time.time()
    parts = []

    order_worst = 0.0  # shortfall below the required order
    details = []
    for alpha in (0.4, 0.7, 1.0):
        r = (2.0 - alpha) / alpha if alpha < 1.0 else 1.0
        errs = []
        for K in (250, 500, 1000, 2000):
            ts = 1.0 * (np.arange(K + 1) / K) ** r
            v = caputo_l1_oracle(1.0, alpha, 1.0, ts)
            exact = ml_eval(MittagParams(alpha), -1.0)
            errs.append(abs(v[-1] - exact))
        order = math.log2(errs[-2] / errs[-1])
        need = 2.0 - alpha - 0.15
        details.append(f"order(a={alpha})={order:.3f}")
        order_worst = max(order_worst, need - order)
    parts.append(("l1_order_shortfall", max(order_worst, 0.0), 1e-12))

    res_worst = 0.0
    ts = np.linspace(0.0, 5.0, 2001)
    for kind, alpha, hw in (("heat", 0.7, 1.5), ("schrodinger", 0.5, 1.0),
                            ("wave", 1.5, 2.0)):
        spec = GridSpec(1, hw, 64)
        u0 = sample_symbol("gaussian", spec, width=1.0)
        u1 = sample_symbol("gaussian", spec, width=1.5) if kind == "wave" \
            else None
        prob = EvolutionProblem(kind, alpha, power_multiplier(2.0), u0,
                                ThetaForm(1, 0.0), ts, u1=u1,
                                p=1.5, q=3.0)
        traj = solve(prob)
        res = volterra_residual(traj)
        details.append(f"residual({kind})={res:.2e}")
        res_worst = max(res_worst, res)
    parts.append(("volterra_residual", res_worst, 1e-6))

    passed = all(m <= tol for _, m, tol in parts)
    worst_margin = max(m / tol for _, m, tol in parts)
    return ValidationRecord("caputo_oracles", res_worst, 1e-6, passed,
                            "; ".join(details), time.time() - t0)


def _ratio_stability(make_problem, samples_a=17, samples_b=33):
    ra = decay_sweep(make_problem(samples_a))
    rb = decay_sweep(make_problem(samples_b))
    drift = abs(ra.measured_constant - rb.measured_constant) \
        / rb.measured_constant
    return ra, drift


def criterion_decay() -> ValidationRecord:
    """Fitted decay slopes and bound-ratio stability for the three kinds."""
    t0 = time.time()
    theta = ThetaForm(2, 1.0)
    details = []
    ok = True

    # heat: fine-centered grid resolves the narrowing propagator
    spec_h = GridSpec(2, 4.0, 256)
    u0_h = sample_symbol("gaussian", spec_h, width=1.0)

    def make_heat(samples):
        return EvolutionProblem("heat", 1.0, power_multiplier(2.0), u0_h,
                                theta, np.logspace(1, 3, samples),
                                p=4.0 / 3.0, q=4.0)

    rep_h, drift_h = _ratio_stability(make_heat)
    details.append(f"heat_slope={rep_h.fitted_slope:.3f}")
    details.append(f"heat_ratio_drift={drift_h:.3f}")
    ok &= rep_h.fitted_slope <= -0.5 + 0.05
    ok &= drift_h <= 0.10

    # schrodinger: p = q = 2 conservation
    spec_s = GridSpec(2, 12.0, 128)
    u0_s = sample_symbol("gaussian", spec_s, width=1.0)
    prob_s = EvolutionProblem("schrodinger", 1.0, power_multiplier(2.0), u0_s,
                              theta, np.logspace(1, 3, 17), p=2.0, q=2.0)
    rep_s = decay_sweep(prob_s)
    details.append(f"schrodinger_slope={rep_s.fitted_slope:.2e}")
    ok &= abs(rep_s.fitted_slope) <= 1e-3

    # wave: data vanishing at the origin keep the algebraic tail dominant
    spec_w = GridSpec(2, 12.0, 128)
    u0_w = sample_symbol("power_gaussian", spec_w, power=2.0, width=1.0)
    u1_w = sample_symbol("power_gaussian", spec_w, power=2.0, width=1.0)

    def make_wave(samples):
        return EvolutionProblem("wave", 1.5, power_multiplier(2.0), u0_w,
                                theta, np.logspace(1, 3, samples), u1=u1_w,
                                p=4.0 / 3.0, q=4.0)

    rep_w, drift_w = _ratio_stability(make_wave)
    details.append(f"wave_slope={rep_w.fitted_slope:.3f}")
    details.append(f"wave_ratio_drift={drift_w:.3f}")
    ok &= rep_w.fitted_slope <= -0.75 + 0.05
    ok &= drift_w <= 0.10

    # worst signed excess over the per-part bounds; <= 0 means all pass
    measured = max(rep_h.fitted_slope + 0.45, abs(rep_s.fitted_slope) - 1e-3,
                   rep_w.fitted_slope + 0.70, drift_h - 0.10, drift_w - 0.10)
    return ValidationRecord("decay_rates", measured, 0.0, bool(ok),
                            "; ".join(details), time.time() - t0)


def criterion_mt_closed_form() -> ValidationRecord:
    """Grid vs closed-form propagator constant at t in {1, 10, 100}."""
    t0 = time.time()
    worst = 0.0
    details = []
    for (p, q, lam, alpha) in ((4.0 / 3.0, 4.0, 2.0, 1.0),
                               (1.5, 3.0, 1.5, 0.7)):
        sigma = power_multiplier(lam)
        kappa = 1.0 / p - 1.0 / q
        btl = 2.0 * kappa / lam
        for t in (1.0, 10.0, 100.0):
            closed = m_t(sigma, alpha, t, p, q, method="closed-form", d=2)
            rho_star = 1.0 - btl
            level = t ** (-alpha) * (1.0 / rho_star - 1.0)
            radius = level ** (1.0 / lam)
            spec = GridSpec(2, 4.0 * radius, 2048)
            grid = m_t(sigma, alpha, t, p, q, method="grid", spec=spec)
            rel = abs(grid.value - closed.value) / closed.value
            worst = max(worst, rel)
        details.append(f"(p={p:.3g},q={q:.3g},lam={lam})")
    return ValidationRecord("mt_closed_form", worst, 0.02, worst <= 0.02,
                            "; ".join(details), time.time() - t0)


def _rank_one_problem(c0: float, T: float, steps: int = 400) -> PicardProblem:
    theta = ThetaForm(2, 1.0)
    spec = GridSpec(2, 10.0, 64)
    u0 = sample_symbol("ground_projector", spec, theta0=1.0)
    u0.values *= c0
    return PicardProblem("heat", 2, constant_profile(1.0),
                         identity_multiplier(), u0, theta, T,
                         n_steps=steps)


def criterion_nonlinear_heat() -> ValidationRecord:
    """Rank-one closed form, contraction, uniqueness, blow-up detection."""
    t0 = time.time()
    details = []
    ok = True
    c0 = 0.1
    probe_prob = _rank_one_problem(c0, 1.0)
    t_star = t_star_estimate(probe_prob)
    details.append(f"T*={t_star:.3f}")

    prob = _rank_one_problem(c0, 0.5 * t_star)
    result = picard_heat(prob)
    ok &= result.converged
    ok &= result.contraction_factor < 1.0
    details.append(f"contraction={result.contraction_factor:.3f}")

    # amplitude against the scalar blow-up solution x' = x^2
    ts = result.times
    cell = prob.u0.spec.cell_volume()
    tau_p = float(np.sum(prob.u0.values.real)) * cell / c0  # tau of projector
    amp = np.array([np.sum(result.states[k].real) * cell / tau_p
                    for k in range(ts.size)])
    closed = c0 / (1.0 - c0 * ts)
    amp_err = float(np.max(np.abs(amp - closed) / np.abs(closed)))
    ok &= amp_err <= 1e-5
    details.append(f"closed_form_err={amp_err:.2e}")

    probe = uniqueness_probe(_rank_one_problem(c0, 0.5 * t_star, steps=100),
                             1e-3)
    ok &= (not probe.skipped) and probe.gap <= 1e-8
    details.append(f"uniqueness_gap={probe.gap:.2e}")

    detected = False
    try:
        picard_heat(_rank_one_problem(c0, 10.0 * t_star, steps=200),
                    override_window=True)
    except DivergenceError as exc:
        detected = len(exc.ratio_history) >= 1
    ok &= detected
    details.append(f"blowup_detected={detected}")
    measured = amp_err
    return ValidationRecord("nonlinear_heat", measured, 1e-5, bool(ok),
                            "; ".join(details), time.time() - t0)


def _small_wave_problem(u0_norm: float, T: float) -> PicardProblem:
    theta = ThetaForm(2, 1.0)
    spec = GridSpec(2, 10.0, 64)
    u0 = sample_symbol("ground_projector", spec, theta0=1.0)
    scale = u0_norm / SymbolGrid(spec, u0.values).l2_norm()
    u0.values *= scale
    return PicardProblem("wave", 2, power_decay_profile(2.5),
                         identity_multiplier(), u0, theta, T,
                         n_steps=200)


def criterion_nonlinear_wave() -> ValidationRecord:
    """Mild-equation residual, small-data convergence, threshold bisection."""
    t0 = time.time()
    details = []
    ok = True
    gamma, gamma0 = 2.0, 0.25

    # coefficient-decay constant measured at the largest horizon
    probe = _small_wave_problem(1e-3, 100.0)
    c_h = probe.h.l2_norm(100.0) * 100.0 ** gamma

    worst_resid = 0.0
    for T in (10.0, 100.0):
        prob = _small_wave_problem(1e-3, T)
        check = small_data_check(prob, gamma, gamma0, c_h=c_h)
        norm0 = 0.8 * check.threshold
        prob = _small_wave_problem(norm0, T)
        result = picard_wave(prob)
        ok &= result.converged
        # mild-equation defect of the converged trajectory
        ts = result.times
        n = prob.u0.spec.n
        w = np.empty_like(result.states)
        for k in range(ts.size):
            w[k] = _nonlinearity(prob, result.states[k].reshape(n, n),
                                 False)[0].ravel()
        integ = _time_integral(prob, ts, w)
        drift = ts[:, None] * (prob.u1.values.ravel()[None]
                               if prob.u1 is not None else 0.0)
        defect = result.states - (prob.u0.values.ravel()[None] + drift + integ)
        cell = prob.u0.spec.cell_volume()
        resid = float(np.max(np.sqrt(np.sum(np.abs(defect) ** 2, axis=1)
                                     * cell)))
        worst_resid = max(worst_resid, resid)
        details.append(f"T={T:g}: resid={resid:.2e}")
    ok &= worst_resid <= 1e-6

    # threshold bisection against the closed form
    prob = _small_wave_problem(1e-3, 100.0)
    check = small_data_check(prob, gamma, gamma0, c_h=c_h)
    lo, hi = 0.0, 10.0 * check.threshold
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        r = small_data_check(_small_wave_problem(max(mid, 1e-300), 100.0),
                             gamma, gamma0, c_h=c_h)
        if r.margin >= 0:
            lo = mid
        else:
            hi = mid
    bisected = 0.5 * (lo + hi)
    bis_err = abs(bisected - check.threshold) / check.threshold
    ok &= bis_err <= 1e-8
    details.append(f"threshold_bisection_err={bis_err:.2e}")
    return ValidationRecord("nonlinear_wave", worst_resid, 1e-6, bool(ok),
                            "; ".join(details), time.time() - t0)


def criterion_hormander() -> ValidationRecord:
    """Measured multiplier ratios never exceed the computed bound times the
    recorded empirical constant (the theorem constant is implicit; 1.25 was
    frozen from the shipped batteries, whose worst measurement is 1.18)."""
    t0 = time.time()
    reported_constant = 1.25
    rng = np.random.default_rng(7)
    theta = ThetaForm(2, 1.0)
    spec = GridSpec(2, 12.0, 64)
    rep = RepSpace.matched(theta, spec)
    p, q = 4.0 / 3.0, 4.0
    details = []
    worst = 0.0
    heat_sym = power_multiplier(2.0)
    prop_vals = ml_eval_many(MittagParams(0.7),
                             -(heat_sym.sample(spec)).astype(complex))
    symbols = {
        "gaussian": SymbolGrid(spec, gaussian_multiplier(1.0).sample(spec)
                               .astype(complex)),
        "ml_propagator": SymbolGrid(spec, prop_vals),
    }
    for name, g in symbols.items():
        bound = hormander_bound(g, p, q)
        max_ratio = 0.0
        for _ in range(50):
            width = rng.uniform(0.6, 2.0)
            center = rng.uniform(-1.5, 1.5, size=2)
            wave = rng.uniform(-2.0, 2.0, size=2)
            f = sample_symbol("modulated_gaussian", spec, width=width,
                              center=list(center), wavevector=list(wave))
            f.values *= rng.uniform(0.5, 2.0)
            gx = SymbolGrid(spec, g.values * f.values)
            nq = lp_norm(singular_profile(quantize(gx, theta, rep)), q)
            npn = lp_norm(singular_profile(quantize(f, theta, rep)), p)
            max_ratio = max(max_ratio, nq / npn)
        rel = max_ratio / bound
        worst = max(worst, rel)
        details.append(f"{name}: ratio/bound={rel:.3f}")
    return ValidationRecord("hormander_bound", worst, reported_constant,
                            worst <= reported_constant,
                            "; ".join(details), time.time() - t0)


CRITERIA = {
    "plancherel": criterion_plancherel,
    "homomorphism": criterion_homomorphism,
    "trace_normalization": criterion_trace,
    "mittag_leffler": criterion_mittag,
    "caputo_oracles": criterion_caputo,
    "decay_rates": criterion_decay,
    "mt_closed_form": criterion_mt_closed_form,
    "nonlinear_heat": criterion_nonlinear_heat,
    "nonlinear_wave": criterion_nonlinear_wave,
    "hormander_bound": criterion_hormander,
}


def run_validation_suite(selection=None, ml_seam_radius=None):
    """Run the acceptance battery and return the records.

    ``selection`` restricts to the named criteria (an explicit empty
    selection is a usage error); ``ml_seam_radius`` overrides the
    Mittag-Leffler regime switch, which is how the seam check is
    fault-injected.
    """
    if selection is not None and len(selection) == 0:
        raise ConfigurationError("empty suite selection")
    names = list(CRITERIA) if selection is None else list(selection)
    unknown = [n for n in names if n not in CRITERIA]
    if unknown:
        raise ConfigurationError(f"unknown criterion '{unknown[0]}'")
    records = []
    for name in names:
        fn = CRITERIA[name]
        if name == "mittag_leffler":
            records.append(fn(seam_radius=ml_seam_radius))
        else:
            records.append(fn())
    return records
