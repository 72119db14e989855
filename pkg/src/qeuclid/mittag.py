"""Two-parameter Mittag-Leffler function E_{alpha,beta}(z) for 0 < alpha < 2.

Three regimes: a float64 Taylor series where cancellation is benign, an
arbitrary-precision series fallback where it is not, and an exponentially
improved large-argument expansion (branch exponentials with Stokes
half-weights on sector boundaries, minus the optimally truncated algebraic
tail) beyond a seam radius. The seam defaults to max(10, 34^alpha) so the
large-argument side meets the 1e-10 accuracy target."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import mpmath
import numpy as np
from scipy.special import gammaln, rgamma

from .errors import AccuracyError, DomainError, NumericError, SectorError

__all__ = ["MittagParams", "ml_eval", "ml_eval_many", "ml_bound_scan",
           "default_seam_radius"]

_SERIES_KMAX = 2400
_TAIL_KMAX = 420
_MP_MAXTERMS = 400_000


@dataclass(frozen=True)
class MittagParams:
    """Evaluation parameters: order ``alpha`` in (0, 2), ``beta`` > 0, a
    relative precision target, and an optional seam-radius override."""

    alpha: float
    beta: float = 1.0
    tol: float = 1e-11
    seam_radius: float | None = None

    def __post_init__(self):
        # the boundary alpha = 2 is admitted for the trigonometric identities;
        # the sector bound itself (see ml_bound_scan) requires alpha < 2
        if not (0.0 < self.alpha <= 2.0):
            raise DomainError(f"alpha must lie in (0, 2], got {self.alpha}")
        if self.beta <= 0.0:
            raise DomainError(f"beta must be positive, got {self.beta}")
        if self.tol <= 0 or self.tol > 1e-2:
            raise DomainError(f"tol must lie in (0, 1e-2], got {self.tol}")

    @property
    def seam(self) -> float:
        return self.seam_radius if self.seam_radius is not None else \
            default_seam_radius(self.alpha, self.tol)


def default_seam_radius(alpha: float, tol: float = 1e-11) -> float:
    """Series/asymptotics switch radius: max(10, base^alpha) with
    base = 34 at the default 1e-11 tolerance.

    At radius 10 the truncated asymptotic tail cannot reach 1e-10 relative
    accuracy once alpha exceeds about 0.7, so the radius grows with alpha
    (the series side stays exact through adaptive precision); looser
    tolerances pull the base down toward its error floor.
    """
    base = 34.0 + math.log(1e-11 / tol)
    return max(10.0, max(25.0, base) ** alpha)


def _sinpi(x: float) -> float:
    n = round(x)
    s = math.sin(math.pi * (x - n))
    return -s if (n % 2) else s


def _log10_max_term(alpha: float, beta: float, az: float) -> float:
    if az <= 1.0:
        return 0.0
    kpk = max(1, int((az ** (1.0 / alpha)) / alpha) + 2)
    ks = np.arange(0, max(3 * kpk, 50), dtype=float)
    logt = ks * math.log(az) - gammaln(alpha * ks + beta)
    return float(np.max(logt)) / math.log(10.0)


#: working precision of the shared coefficient store; covers every
#: cancellation level reachable below the seam radius
_COEFF_DPS = 120


class _CoeffStore:
    """Per-(alpha, beta) series coefficients 1/Gamma(alpha k + beta),
    computed once in extended precision and mirrored as longdoubles."""

    def __init__(self, alpha, beta):
        self.alpha = alpha
        self.beta = beta
        self.mp = []
        self.ld = np.zeros(0, dtype=np.longdouble)

    def extend(self, upto):
        if upto <= len(self.mp):
            return
        with mpmath.workdps(_COEFF_DPS):
            aa = mpmath.mpf(self.alpha)
            bb = mpmath.mpf(self.beta)
            for k in range(len(self.mp), upto):
                self.mp.append(1.0 / mpmath.gamma(aa * k + bb))
            ld = np.zeros(upto, dtype=np.longdouble)
            ld[:self.ld.size] = self.ld
            for k in range(self.ld.size, upto):
                # mantissa/exponent split keeps the longdouble exponent
                # range (plain float64 would underflow near 1e-308)
                man, ex = mpmath.frexp(self.mp[k])
                hi = float(man)
                lo = float(man - hi)
                ld[k] = np.ldexp(np.longdouble(hi) + np.longdouble(lo),
                                 int(ex))
        self.ld = ld


_coeff_stores: dict = {}


def _coeffs(alpha: float, beta: float) -> _CoeffStore:
    key = (alpha, beta)
    store = _coeff_stores.get(key)
    if store is None:
        store = _CoeffStore(alpha, beta)
        _coeff_stores[key] = store
    return store


@lru_cache(maxsize=200_000)
def _series_mp_cached(alpha: float, beta: float, z: complex) -> complex:
    """Arbitrary-precision Taylor series, precision sized from the value.

    Coefficients come from the shared store while the needed precision fits
    under its working precision; harder cases (very small alpha) recompute
    the gamma factors per term at full precision.
    """
    tol = 1e-13
    az = abs(z)
    log10M = _log10_max_term(alpha, beta, az)
    kpk = max(1, int((az ** (1.0 / alpha)) / alpha) + 2)
    store = _coeffs(alpha, beta)

    def run(dps):
        use_store = dps <= _COEFF_DPS - 10
        if use_store:
            store.extend(3 * kpk + 60)
        with mpmath.workdps(dps):
            zz = mpmath.mpc(z)
            aa = mpmath.mpf(alpha)
            bb = mpmath.mpf(beta)
            s = mpmath.mpc(0)
            p = mpmath.mpc(1)
            tiny = mpmath.mpf(10) ** (-(dps - 5))
            k = 0
            while True:
                if k > _MP_MAXTERMS:
                    raise AccuracyError(
                        f"series for E_({alpha},{beta})({z}) did not "
                        f"converge in {_MP_MAXTERMS} terms", achieved=None)
                if use_store:
                    if k >= len(store.mp):
                        store.extend(len(store.mp) + 256)
                    t = p * store.mp[k]
                else:
                    t = p / mpmath.gamma(aa * k + bb)
                s += t
                if k > kpk and abs(t) < tiny:
                    return complex(s)
                p *= zz
                k += 1

    dps = int(max(25, log10M - math.log10(tol / (1.0 + az)) + 10))
    value = run(dps)
    for _ in range(3):
        want = int(max(25, log10M - math.log10(max(abs(value), 1e-300))
                       - math.log10(tol) + 10))
        if want <= dps:
            break
        dps = want
        value = run(dps)
    return value


def _series_longdouble_many(alpha, beta, z, tol):
    """Extended-precision (80-bit) vectorized series for the band where
    float64 cancellation fails but the 64-bit mantissa still suffices.
    Coefficients come from the extended-precision store, so the terms are
    accurate at the longdouble epsilon. Returns (values, needs_mp)."""
    z = np.asarray(z, dtype=complex)
    store = _coeffs(alpha, beta)
    kguess = int(max(60, 3 * (np.max(np.abs(z)) ** (1.0 / alpha)) / alpha))
    store.extend(min(kguess + 60, 6000))
    eps = float(np.finfo(np.longdouble).eps)
    zl = z.astype(np.clongdouble)
    s = np.zeros(z.shape, dtype=np.clongdouble)
    p = np.ones(z.shape, dtype=np.clongdouble)
    mx = np.zeros(z.shape, dtype=np.longdouble)
    needs_mp = np.zeros(z.shape, dtype=bool)
    active = np.ones(z.shape, dtype=bool)
    k_end = np.zeros(z.shape, dtype=float)
    nk = store.ld.size
    for k in range(nk):
        term = p * store.ld[k]
        at = np.abs(term)
        s = np.where(active, s + term, s)
        mx = np.where(active, np.maximum(mx, at), mx)
        k_end = np.where(active, float(k), k_end)
        if k > 3:
            active &= ~(at < 1e-22 * np.maximum(np.abs(s),
                                                np.longdouble(1e-300)))
        if not active.any():
            break
        p = p * zl
    needs_mp |= active  # ran out of stored coefficients
    sens = np.maximum(1.0, np.log(2.0 + alpha * k_end))
    err = mx.astype(float) * (k_end + 1.0) * sens * eps
    svals = s.astype(complex)
    needs_mp |= err > tol * np.maximum(np.abs(svals), 1e-280)
    return svals, needs_mp


def _series_float_many(alpha, beta, z, tol):
    """Vectorized float64 series. Returns (values, needs_mp mask).

    Overflowing or cancellation-spoiled elements are flagged for the
    arbitrary-precision fallback rather than fixed here.
    """
    z = np.asarray(z, dtype=complex)
    s = np.zeros_like(z)
    p = np.ones_like(z)
    mx = np.zeros(z.shape, dtype=float)
    needs_mp = np.zeros(z.shape, dtype=bool)
    active = np.ones(z.shape, dtype=bool)
    k_end = np.zeros(z.shape, dtype=float)
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(_SERIES_KMAX):
            rg = rgamma(alpha * k + beta)
            term = p * rg
            at = np.abs(term)
            s = np.where(active, s + term, s)
            mx = np.where(active, np.maximum(mx, at), mx)
            k_end = np.where(active, float(k), k_end)
            if k > 3:
                done = at < 1e-18 * np.maximum(np.abs(s), 1e-300)
                active &= ~done
            if not active.any():
                break
            p = p * z
            over = ~np.isfinite(p) | (np.abs(p) > 1e280)
            if over.any():
                needs_mp |= over & active
                active &= ~over
        else:
            needs_mp |= active
    sens = np.maximum(1.0, np.log(2.0 + alpha * k_end))
    err = mx * (k_end + 1.0) * sens * 2.2e-16
    needs_mp |= err > tol * np.maximum(np.abs(s), 1e-280)
    return s, needs_mp


def _asym_many(alpha, beta, z):
    """Vectorized exponentially improved large-argument expansion."""
    z = np.asarray(z, dtype=complex)
    r = np.abs(z)
    argz = np.angle(z)
    out = np.zeros_like(z)
    TOL = 1e-8
    with np.errstate(over="ignore", invalid="ignore"):
        for mbr in (-2, -1, 0, 1, 2):
            th = (argz + 2.0 * math.pi * mbr) / alpha
            mask = np.abs(th) <= math.pi + TOL
            if not mask.any():
                continue
            wgt = np.where(np.abs(np.abs(th) - math.pi) <= TOL, 0.5, 1.0)
            w = r ** (1.0 / alpha) * np.exp(1j * th)
            safe = mask & (w.real < 700.0)
            contrib = np.zeros_like(z)
            contrib[safe] = (wgt[safe] / alpha) * w[safe] ** (1.0 - beta) \
                * np.exp(w[safe])
            out += contrib

    # algebraic tail with per-element optimal truncation; overflow past the
    # truncation point is masked out, not propagated
    logr = np.log(r)
    acc = np.zeros_like(z)
    prev = np.full(z.shape, np.inf)
    active = np.ones(z.shape, dtype=bool)
    zinv = 1.0 / z
    zpow = np.ones_like(z)
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(1, _TAIL_KMAX + 1):
            zpow = zpow * zinv
            x = beta - alpha * k
            nearest = round(x)
            if abs(x - nearest) < 1e-12 and nearest <= 0:
                continue  # exact zero of the reciprocal gamma
            if x > 0.5:
                coeff = float(rgamma(x))
                logc = math.log(abs(coeff)) if coeff != 0 else -math.inf
            else:
                logc = gammaln(1.0 - x) + math.log(abs(_sinpi(x)) + 1e-320) \
                    - math.log(math.pi)
                coeff = math.copysign(math.exp(min(logc, 700.0)), _sinpi(x))
            term = coeff * zpow
            at = np.abs(term)
            # stop an element once its terms grow (divergence onset)
            active &= ~((at > prev) | ~np.isfinite(at)
                        | (logc - k * logr > 250.0))
            if not active.any():
                break
            acc[active] += term[active]
            prev = np.where(active, at, prev)
    return out - acc


def ml_eval_many(params: MittagParams, z) -> np.ndarray:
    """Evaluate E_{alpha,beta} on an array of complex arguments.

    Duplicate arguments are evaluated once. Elements inside the seam radius
    go through the float64 series with an arbitrary-precision fallback where
    cancellation would spoil the target precision; elements beyond the seam
    use the large-argument expansion.
    """
    z = np.asarray(z, dtype=complex)
    if not np.all(np.isfinite(z)):
        raise NumericError("non-finite Mittag-Leffler argument")
    flat = z.ravel()
    vals, inverse = np.unique(flat, return_inverse=True)
    out = np.empty(vals.shape, dtype=complex)

    alpha, beta, tol = params.alpha, params.beta, params.tol
    if alpha == 1.0 and beta in (1.0, 2.0):
        # exact identities: E_{1,1} = exp, E_{1,2}(z) = (exp(z) - 1)/z
        with np.errstate(over="ignore", invalid="ignore"):
            if beta == 1.0:
                out = np.exp(vals)
            else:
                small = np.abs(vals) < 1e-4
                safe = np.where(small, 1.0, vals)
                out = (np.exp(safe) - 1.0) / safe
                v = vals[small]
                out[small] = 1.0 + v / 2.0 + v ** 2 / 6.0 + v ** 3 / 24.0
        return out[inverse].reshape(z.shape)

    az = np.abs(vals)
    seam = params.seam
    inner = az <= seam
    zero = az == 0.0
    out[zero] = rgamma(beta)
    ser = inner & ~zero
    if ser.any():
        svals, retry = _series_float_many(alpha, beta, vals[ser], tol)
        out[ser] = svals
        if retry.any():
            idx = np.where(ser)[0][retry]
            ldvals, needs_mp = _series_longdouble_many(alpha, beta, vals[idx],
                                                       tol)
            out[idx] = ldvals
            for i in idx[needs_mp]:
                out[i] = _series_mp_cached(alpha, beta, complex(vals[i]))
    outer = ~inner
    if outer.any():
        out[outer] = _asym_many(alpha, beta, vals[outer])
    return out[inverse].reshape(z.shape)


def ml_eval(params: MittagParams, z: complex) -> complex:
    """Evaluate E_{alpha,beta}(z) at one complex argument.

    Relative accuracy is at the ``params.tol`` level (default 1e-11) on the
    negative real axis and the imaginary axis for |z| up to the seam radius
    and beyond.
    """
    return complex(ml_eval_many(params, np.array([z]))[0])


_RAYS = {"negative-real", "imaginary"}


def ml_bound_scan(params: MittagParams, ray: str, z_max: float = 50.0,
                  samples: int = 2000) -> float:
    """Measured constant sup |E_{alpha,beta}(z)| (1 + |z|) along a ray.

    Parameters
    ----------
    ray : str
      ``negative-real`` (admissible for every alpha in (0, 2)) or
      ``imaginary`` (admissible only for alpha <= 1; the alpha = 1 case sits
      on the sector boundary and is included).
    z_max : float
      Largest |z| sampled.
    samples : int
      Number of logarithmically spaced sample magnitudes.

    Returns
    -------
    float
      The measured constant; finite and stable under sample refinement for
      admissible rays.
    """
    if ray not in _RAYS:
        raise DomainError(f"unknown ray '{ray}'; choose from {sorted(_RAYS)}")
    if z_max <= 0 or samples < 8:
        raise DomainError("need z_max > 0 and samples >= 8")
    if params.alpha >= 2.0:
        raise SectorError("the sector bound requires alpha < 2")
    arg = math.pi if ray == "negative-real" else math.pi / 2.0
    # admissible iff some nu in [pi alpha/2, min(pi, pi alpha)] has nu <= arg
    if math.pi * params.alpha / 2.0 > arg + 1e-12:
        raise SectorError(
            f"ray at |arg z| = {arg:.4f} lies inside the excluded sector for "
            f"alpha = {params.alpha} (needs |arg z| >= {math.pi * params.alpha / 2:.4f})"
        )
    xs = np.concatenate([[0.0], np.logspace(math.log10(z_max) - 8,
                                            math.log10(z_max), samples)])
    direction = -1.0 if ray == "negative-real" else 1.0j
    values = ml_eval_many(params, direction * xs)
    weighted = np.abs(values) * (1.0 + xs)
    if not np.all(np.isfinite(weighted)):
        raise NumericError("bound scan produced non-finite values")
    return float(np.max(weighted))
