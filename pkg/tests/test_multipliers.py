import math

import numpy as np
import pytest

from qeuclid.errors import AssumptionError, DomainError, ShapeError
from qeuclid.grids import GridSpec, SymbolGrid, ThetaForm, sample_symbol
from qeuclid.lebesgue import lp_norm, singular_profile
from qeuclid.multipliers import (MultiplierSymbol, apply_multiplier,
                                 constant_multiplier, coordinate_multiplier,
                                 gaussian_multiplier, hormander_bound,
                                 identity_multiplier, m_t, power_multiplier,
                                 unit_ball_volume, weak_symbol_quasinorm)
from qeuclid.weyl import RepSpace, quantize

SPEC = GridSpec(2, 12.0, 64)


def test_identity_multiplier_leaves_symbol():
    f = sample_symbol("gaussian", SPEC, width=1.0)
    out = apply_multiplier(identity_multiplier(), f)
    assert np.array_equal(out.values, f.values)


def test_coordinate_multiplier_is_derivative_symbol():
    # g(xi) = i xi_j acts as multiplication by i t_j on the symbol
    f = sample_symbol("gaussian", SPEC, width=1.0)
    out = apply_multiplier(coordinate_multiplier(0), f)
    x, _ = SPEC.coords()
    assert np.allclose(out.values, 1j * x * f.values)


def test_bounded_multiplier_contracts_l2():
    rng = np.random.default_rng(0)
    g = gaussian_multiplier(1.0)  # |g| <= 1
    for _ in range(5):
        vals = rng.standard_normal(SPEC.coords()[0].shape) \
            + 1j * rng.standard_normal(SPEC.coords()[0].shape)
        f = SymbolGrid(SPEC, vals)
        out = apply_multiplier(g, f)
        assert out.l2_norm() <= f.l2_norm() + 1e-12


def test_apply_multiplier_shape_mismatch():
    f = sample_symbol("gaussian", SPEC, width=1.0)
    g = sample_symbol("gaussian", GridSpec(2, 12.0, 32), width=1.0)
    with pytest.raises(ShapeError):
        apply_multiplier(g, f)


def test_weak_quasinorm_power_symbol_constant():
    # |xi|^(-d/r): the superlevel volume is omega_d t^(-r) exactly, so the
    # weighted integrand is the constant omega_d^(1/r)
    d, r = 2, 2.0
    spec = GridSpec(2, 12.0, 1024)

    def fn(*coords):
        r2 = sum((c + spec.spacing / 2) ** 2 for c in coords)  # midpoints
        return r2 ** (-d / (2.0 * r))

    g = MultiplierSymbol("inv_power", fn)
    # thresholds whose level-ball radius is grid-resolved and interior
    radii = np.geomspace(8 * spec.spacing, 6.0, 40)
    ts = radii ** (-d / r)
    wq = weak_symbol_quasinorm(g, r, spec=spec, thresholds=ts)
    assert wq.reliable
    assert wq.value == pytest.approx(unit_ball_volume(d) ** (1.0 / r),
                                     rel=0.02)


def test_weak_quasinorm_compact_symbol_interior_sup():
    wq = weak_symbol_quasinorm(gaussian_multiplier(1.0), 2.0, spec=SPEC)
    assert wq.reliable and not wq.infinite
    assert 0 < wq.value < math.inf


def test_weak_quasinorm_constant_symbol_infinite():
    wq = weak_symbol_quasinorm(constant_multiplier(3.0), 2.0, spec=SPEC)
    assert wq.infinite
    assert float(wq) == math.inf


def test_weak_quasinorm_homogeneous_and_monotone():
    r = 2.0
    g1 = gaussian_multiplier(1.0)
    g2 = gaussian_multiplier(0.5)  # pointwise >= g1
    v1 = weak_symbol_quasinorm(g1, r, spec=SPEC).value
    v3 = weak_symbol_quasinorm(
        MultiplierSymbol("3g", lambda *c: 3.0 * g1.fn(*c)), r, spec=SPEC).value
    assert v3 == pytest.approx(3.0 * v1, rel=1e-6)
    v2 = weak_symbol_quasinorm(g2, r, spec=SPEC).value
    assert v2 >= v1 - 1e-12


def test_weak_quasinorm_zero_symbol():
    assert weak_symbol_quasinorm(constant_multiplier(0.0), 2.0,
                                 spec=SPEC).value == 0.0


def test_hormander_bound_p_equals_q():
    g = gaussian_multiplier(1.0)
    bound = hormander_bound(g, 2.0, 2.0, spec=SPEC)
    assert bound == pytest.approx(1.0, rel=1e-12)  # ess sup of |g|
    # measured L2 -> L2 ratio stays below the sup (Plancherel case)
    rng = np.random.default_rng(1)
    gv = g.sample(SPEC)
    for _ in range(10):
        f = SymbolGrid(SPEC, rng.standard_normal(gv.shape)
                       + 1j * rng.standard_normal(gv.shape))
        ratio = SymbolGrid(SPEC, gv * f.values).l2_norm() / f.l2_norm()
        assert ratio <= bound * (1 + 1e-6)


def test_hormander_bound_heat_symbol_battery():
    # the multiplier theorem carries an implicit constant; the measured
    # ratios stay below the quasinorm bound times the recorded constant
    # (worst measured 1.18 over the shipped batteries)
    reported_constant = 1.25
    theta = ThetaForm(2, 1.0)
    rep = RepSpace.matched(theta, SPEC)
    g = gaussian_multiplier(1.0)
    p, q = 4.0 / 3.0, 4.0
    bound = hormander_bound(g, p, q, spec=SPEC)
    rng = np.random.default_rng(2)
    gv = g.sample(SPEC)
    for _ in range(10):
        width = rng.uniform(0.7, 1.6)
        f = sample_symbol("modulated_gaussian", SPEC, width=width,
                          wavevector=list(rng.uniform(-1.5, 1.5, 2)))
        nq = lp_norm(singular_profile(
            quantize(SymbolGrid(SPEC, gv * f.values), theta, rep)), q)
        npn = lp_norm(singular_profile(quantize(f, theta, rep)), p)
        assert nq / npn <= bound * reported_constant


def test_hormander_bound_zero_symbol():
    assert hormander_bound(constant_multiplier(0.0), 1.5, 3.0, spec=SPEC) == 0


def test_hormander_bound_domain():
    g = gaussian_multiplier(1.0)
    with pytest.raises(DomainError):
        hormander_bound(g, 1.0, 4.0, spec=SPEC)
    with pytest.raises(DomainError):
        hormander_bound(g, 1.5, math.inf, spec=SPEC)


def test_mt_p_equals_q_is_one():
    assert m_t(power_multiplier(2.0), 1.0, 5.0, 2.0, 2.0, d=2).value == 1.0


def test_mt_closed_form_example():
    # d=2, alpha=1, p=4/3, q=4, lam=2: M_t = sqrt(pi) t^(-1/2) / 2
    val = m_t(power_multiplier(2.0), 1.0, 4.0, 4.0 / 3.0, 4.0, d=2).value
    assert val == pytest.approx(math.sqrt(math.pi) * 4.0 ** -0.5 * 0.5,
                                rel=1e-12)
    # the interior maximum factor via a dense 1-d scan oracle
    rho = np.linspace(1e-6, 1 - 1e-6, 2_000_001)
    bmax = np.max(rho ** 0.5 * (1 - rho) ** 0.5)
    assert bmax == pytest.approx(0.5, abs=1e-9)


def test_mt_grid_matches_closed_form():
    sigma = power_multiplier(2.0)
    p, q = 4.0 / 3.0, 4.0
    for t in (1.0, 10.0):
        closed = m_t(sigma, 1.0, t, p, q, method="closed-form", d=2).value
        level = t ** -1.0
        spec = GridSpec(2, 4.0 * math.sqrt(level), 1024)
        grid = m_t(sigma, 1.0, t, p, q, method="grid", spec=spec)
        assert grid.reliable
        assert grid.value == pytest.approx(closed, rel=0.02)


def test_mt_scaling_law():
    sigma = power_multiplier(2.0)
    p, q, alpha, d, lam = 4.0 / 3.0, 4.0, 1.0, 2, 2.0
    kappa = 1.0 / p - 1.0 / q
    c = 7.0
    m1 = m_t(sigma, alpha, 3.0, p, q, d=d).value
    m2 = m_t(sigma, alpha, 3.0 * c, p, q, d=d).value
    assert m2 / m1 == pytest.approx(c ** (-d * alpha * kappa / lam), rel=1e-12)


def test_mt_assumption_violation():
    with pytest.raises(AssumptionError):
        m_t(power_multiplier(0.5), 1.0, 1.0, 4.0 / 3.0, 4.0, d=2)


def test_mt_domain_errors():
    with pytest.raises(DomainError):
        m_t(power_multiplier(2.0), 1.0, -1.0, 4.0 / 3.0, 4.0, d=2)
    with pytest.raises(DomainError):
        m_t(gaussian_multiplier(), 1.0, 1.0, 4.0 / 3.0, 4.0, d=2)
    with pytest.raises(DomainError):
        m_t(power_multiplier(2.0), 1.0, 1.0, 2.5, 4.0, d=2)
