"""Acceptance battery: every criterion runs at its stated tolerance and
prints one pass/fail line."""

from qeuclid import validation


def _check(record):
    print(record.row())
    assert record.passed, record.row()


def test_criterion_1_plancherel():
    # |hat norm - grid norm| / grid norm <= 1e-6 on ten Schwartz symbols
    _check(validation.criterion_plancherel())


def test_criterion_2_homomorphism():
    # product of quantizations vs quantized twisted convolution, <= 1e-6
    _check(validation.criterion_homomorphism())


def test_criterion_3_trace_normalization():
    # calibrated trace returns the symbol value at zero, <= 1e-6
    _check(validation.criterion_trace())


def test_criterion_4_mittag_leffler():
    # identities at 1e-12/1e-10, seam continuity 1e-10, scan stability 1e-3
    _check(validation.criterion_mittag())


def test_criterion_4b_corrupted_seam_fails():
    # fault injection: forcing the regime switch to 0.1 must break the seam
    record = validation.criterion_mittag(seam_radius=0.1)
    print(record.row())
    assert not record.passed


def test_criterion_5_caputo_oracles():
    # L1 refinement orders >= 2 - alpha - 0.15; solver residuals <= 1e-6
    _check(validation.criterion_caputo())


def test_criterion_6_decay_rates():
    # fitted slopes within the stated bounds; ratio constants stable to 10%
    _check(validation.criterion_decay())


def test_criterion_7_mt_closed_form():
    # grid vs closed form within 2% at t in {1, 10, 100}, two triples
    _check(validation.criterion_mt_closed_form())


def test_criterion_8_nonlinear_heat():
    # rank-one closed form 1e-5, contraction < 1, uniqueness 1e-8, blow-up
    _check(validation.criterion_nonlinear_heat())


def test_criterion_9_nonlinear_wave():
    # mild residual 1e-6; small-data convergence; threshold bisection 1e-8
    _check(validation.criterion_nonlinear_wave())


def test_criterion_10_hormander_bound():
    # measured ratios below the bound times the recorded constant
    _check(validation.criterion_hormander())
