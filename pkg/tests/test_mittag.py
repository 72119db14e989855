import math

import mpmath
import numpy as np
import pytest
from scipy.special import gammaln, rgamma

from qeuclid.errors import DomainError, SectorError
from qeuclid.mittag import (MittagParams, default_seam_radius, ml_bound_scan,
                            ml_eval, ml_eval_many)


def series_oracle(alpha, beta, z, maxterms=500_000):
    """Brute-force series with extended working precision."""
    az = abs(z)
    if az == 0:
        return complex(rgamma(beta))
    kpk = max(1, int((az ** (1.0 / alpha)) / alpha) + 2)
    ks = np.arange(0, max(3 * kpk, 50), dtype=float)
    log10M = float(np.max(ks * math.log(az) - gammaln(alpha * ks + beta))) \
        / math.log(10.0)

    def run(dps):
        with mpmath.workdps(dps):
            zz = mpmath.mpc(z)
            aa, bb = mpmath.mpf(alpha), mpmath.mpf(beta)
            s, p = mpmath.mpc(0), mpmath.mpc(1)
            tiny = mpmath.mpf(10) ** (-(dps - 5))
            for k in range(maxterms):
                t = p / mpmath.gamma(aa * k + bb)
                s += t
                if k > kpk and abs(t) < tiny:
                    return complex(s)
                p *= zz
            raise RuntimeError("oracle did not converge")

    dps = int(max(30, log10M + 35))
    v = run(dps)
    for _ in range(3):
        want = int(max(30, log10M - math.log10(max(abs(v), 1e-300)) + 35))
        if want <= dps:
            break
        dps = want
        v = run(dps)
    return v


def test_identity_exp():
    assert ml_eval(MittagParams(1.0), 1.0) == pytest.approx(math.e, rel=1e-14)


def test_identity_cos_zero():
    val = ml_eval(MittagParams(2.0), -((math.pi / 2.0) ** 2))
    assert abs(val) < 1e-12  # cos(pi/2)


def test_identity_erfc():
    ref = math.e * math.erfc(1.0)  # 0.427583576155807
    val = ml_eval(MittagParams(0.5), -1.0)
    assert val.real == pytest.approx(ref, rel=1e-10)
    assert abs(val.imag) < 1e-14


def test_identity_exp_beta_two():
    val = ml_eval(MittagParams(1.0, 2.0), 1.0)
    assert val == pytest.approx(math.e - 1.0, rel=1e-14)


def test_series_consistency_small_arguments():
    rng = np.random.default_rng(0)
    for alpha, beta in ((0.5, 1.0), (0.8, 2.0), (1.3, 1.0), (1.9, 2.0)):
        pars = MittagParams(alpha, beta)
        for _ in range(10):
            z = complex(rng.uniform(-2, 2), rng.uniform(-2, 2))
            if abs(z) > 2:
                continue
            direct = sum(z ** k * rgamma(alpha * k + beta) for k in range(200))
            assert abs(ml_eval(pars, z) - direct) <= 1e-12 * max(1.0, abs(direct))


def test_two_parameter_recurrence():
    # E_{a,b}(z) = z E_{a,a+b}(z) + 1/Gamma(b)
    rng = np.random.default_rng(1)
    for _ in range(25):
        alpha = rng.uniform(0.3, 1.9)
        beta = rng.choice([1.0, 2.0])
        x = rng.uniform(0.05, 30.0)
        z = complex(-x) if rng.random() < 0.5 else 1j * x
        lhs = ml_eval(MittagParams(alpha, beta), z)
        rhs = z * ml_eval(MittagParams(alpha, alpha + beta), z) \
            + rgamma(beta)
        assert abs(lhs - rhs) <= 1e-10 * max(1.0, abs(lhs))


def test_monotone_decay_on_negative_axis():
    for alpha in (0.4, 0.7, 1.0):
        pars = MittagParams(alpha)
        xs = np.linspace(0.0, 40.0, 161)
        vals = ml_eval_many(pars, -xs.astype(complex)).real
        assert np.all(vals > 0)
        assert np.all(vals <= 1.0 + 1e-15)
        assert np.all(np.diff(vals) <= 1e-15)


@pytest.mark.parametrize("alpha", [0.4, 0.7, 1.1, 1.5])
@pytest.mark.parametrize("beta", [1.0, 2.0])
def test_against_high_precision_oracle(alpha, beta):
    pars = MittagParams(alpha, beta)
    seam = default_seam_radius(alpha)
    mags = [0.3, 2.0, 9.9, 10.1, seam * 0.98, seam * 1.02, 50.0]
    rays = [-1.0] if alpha > 1.0 else [-1.0, 1.0j]
    for ray in rays:
        for x in mags:
            if x ** (1.0 / alpha) > 420:  # oracle cost cap
                continue
            z = ray * x
            got = ml_eval(pars, z)
            want = series_oracle(alpha, beta, z)
            assert abs(got - want) <= 1e-10 * max(abs(want), 1e-300), \
                f"alpha={alpha} beta={beta} z={z}"


def test_seam_continuity():
    for alpha in (0.6, 0.9, 1.5):
        pars = MittagParams(alpha)
        R = pars.seam
        a = ml_eval(pars, complex(-R * (1 - 1e-12)))
        b = ml_eval(pars, complex(-R * (1 + 1e-12)))
        assert abs(a - b) / abs(b) < 1e-10


def test_corrupted_seam_radius_detected():
    pars = MittagParams(0.6, seam_radius=0.1)
    a = ml_eval(pars, complex(-0.1 * (1 - 1e-12)))
    b = ml_eval(pars, complex(-0.1 * (1 + 1e-12)))
    assert abs(a - b) / abs(b) > 1e-6  # asymptotics are invalid at |z| = 0.1


def test_bound_scan_classical_heat():
    # sup exp(-x) (1 + x) = 1 at x = 0
    c = ml_bound_scan(MittagParams(1.0), "negative-real", z_max=50.0)
    assert c == pytest.approx(1.0, abs=1e-12)


def test_bound_scan_stability_and_zero_value():
    pars = MittagParams(0.5)
    c1 = ml_bound_scan(pars, "negative-real", samples=1000)
    c2 = ml_bound_scan(pars, "negative-real", samples=2000)
    assert abs(c1 - c2) / c2 < 1e-3
    # z = 0 contributes |E|(1+0) = 1/Gamma(beta) <= C
    assert c1 >= 1.0 - 1e-12


def test_bound_scan_sector_errors():
    with pytest.raises(SectorError):
        ml_bound_scan(MittagParams(1.5), "imaginary")
    with pytest.raises(SectorError):
        ml_bound_scan(MittagParams(2.0), "negative-real")
    # alpha = 1 imaginary ray sits on the sector boundary and is admitted
    c = ml_bound_scan(MittagParams(1.0), "imaginary", z_max=30.0, samples=500)
    assert math.isfinite(c)


def test_param_validation():
    with pytest.raises(DomainError):
        MittagParams(0.0)
    with pytest.raises(DomainError):
        MittagParams(2.5)
    with pytest.raises(DomainError):
        MittagParams(1.0, beta=0.0)
    with pytest.raises(DomainError):
        ml_bound_scan(MittagParams(1.0), "diagonal")


def test_vectorized_matches_scalar():
    pars = MittagParams(0.7)
    zs = np.array([-0.5, -5.0, -25.0, 2.0j, 0.0], dtype=complex)
    many = ml_eval_many(pars, zs)
    for z, v in zip(zs, many):
        assert v == ml_eval(pars, complex(z))


def test_huge_argument_graceful():
    pars = MittagParams(1.5)
    val = ml_eval(pars, -7.1e7)
    # algebraic tail dominates: -1/(z Gamma(beta - alpha))
    lead = -1.0 / (-7.1e7 * math.gamma(1.0 - 1.5))
    assert val.real == pytest.approx(lead, rel=1e-4)
