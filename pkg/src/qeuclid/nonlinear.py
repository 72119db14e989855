"""Picard iteration for the nonlinear heat and wave problems driven by the
spectral nonlinearity h(t) |A u|^p, with the existence-window estimate, the
small-data admissibility check, and a uniqueness probe."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import (DivergenceError, DomainError, EmptyWindowError,
                     LowConfidenceWarning, ShapeError)
from .grids import GridSpec, SymbolGrid, ThetaForm
from .lebesgue import abs_power
from .multipliers import MultiplierSymbol, apply_multiplier
from .weyl import RepSpace, dequantize, quantize

__all__ = [
    "TimeProfile",
    "constant_profile",
    "power_decay_profile",
    "exp_decay_profile",
    "PicardProblem",
    "PicardResult",
    "picard_heat",
    "picard_wave",
    "t_star_estimate",
    "SmallDataResult",
    "small_data_check",
    "ProbeResult",
    "uniqueness_probe",
]


@dataclass(frozen=True)
class TimeProfile:
    """Nonnegative scalar coefficient h(t) with an exact L2(0, T) norm."""

    name: str
    fn: callable
    l2_sq: callable   # T -> int_0^T h(s)^2 ds

    def __call__(self, t):
        return self.fn(np.asarray(t, dtype=float))

    def l2_norm(self, T: float) -> float:
        if T < 0:
            raise DomainError("T must be >= 0")
        return math.sqrt(max(self.l2_sq(T), 0.0))


def constant_profile(value: float) -> TimeProfile:
    if value < 0:
        raise DomainError("profile must be nonnegative")
    return TimeProfile(f"constant({value})",
                       lambda t: np.full_like(t, value, dtype=float),
                       lambda T: value ** 2 * T)


def power_decay_profile(gamma_exp: float, scale: float = 1.0) -> TimeProfile:
    """h(t) = scale * (1 + t)^(-gamma_exp)."""
    if scale < 0 or gamma_exp < 0:
        raise DomainError("profile parameters must be nonnegative")

    def l2_sq(T):
        if gamma_exp == 0.5:
            return scale ** 2 * math.log1p(T)
        e = 1.0 - 2.0 * gamma_exp
        return scale ** 2 * ((1.0 + T) ** e - 1.0) / e

    return TimeProfile(f"power_decay({gamma_exp},{scale})",
                       lambda t: scale * (1.0 + t) ** (-gamma_exp), l2_sq)


def exp_decay_profile(rate: float, scale: float = 1.0) -> TimeProfile:
    if scale < 0 or rate <= 0:
        raise DomainError("need scale >= 0 and rate > 0")
    return TimeProfile(
        f"exp_decay({rate},{scale})",
        lambda t: scale * np.exp(-rate * t),
        lambda T: scale ** 2 * (1.0 - math.exp(-2.0 * rate * T)) / (2.0 * rate))


@dataclass
class PicardProblem:
    """One nonlinear experiment: kind in {heat, wave}, integer power p >= 2,
    coefficient profile h, multiplier A, symbol-side data, horizon T, and the
    window constants (c > 1, delta >= 1, and c1 > 1 for the wave kind)."""

    kind: str
    p: int
    h: TimeProfile
    A: MultiplierSymbol
    u0: SymbolGrid
    theta: ThetaForm
    T: float
    u1: Optional[SymbolGrid] = None
    rep: Optional[RepSpace] = None
    c: float = math.sqrt(2.0)
    c1: float = math.sqrt(2.0)
    delta: float = 1.0
    c2: float = 1.0
    n_steps: int = 200
    tol: float = 1e-8
    max_iter: int = 60

    def __post_init__(self):
        if self.kind not in ("heat", "wave"):
            raise DomainError(f"unknown kind '{self.kind}'")
        if int(self.p) != self.p or self.p < 2:
            raise DomainError(f"p must be an integer >= 2, got {self.p}")
        self.p = int(self.p)
        if self.T <= 0:
            raise DomainError("horizon T must be positive")
        if self.kind == "wave" and self.u1 is not None \
                and self.u1.spec != self.u0.spec:
            raise ShapeError("u0 and u1 live on different grids")
        if self.c <= 1 or self.c1 <= 1:
            raise DomainError("window constants need c > 1 (and c1 > 1)")
        if self.delta < 1:
            raise DomainError("delta must be >= 1")
        if not self.theta.invertible or self.theta.d != 2:
            raise DomainError(
                "the Picard solvers run on the invertible d = 2 algebra")
        if self.rep is None:
            self.rep = RepSpace.matched(self.theta, self.u0.spec)
        if math.pi / self.rep.spacing < self.u0.spec.half_width:
            warnings.warn(
                "representation spacing is sub-Nyquist for the symbol band; "
                "the nonlinearity read-back will alias "
                f"(pi/spacing = {math.pi / self.rep.spacing:.3g} < "
                f"half_width = {self.u0.spec.half_width:.3g})",
                LowConfidenceWarning)

    def times(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.n_steps + 1)

    def data_norm(self, which: int = 0) -> float:
        """Grid L2 norm of the requested datum (Plancherel = operator L2)."""
        sym = self.u0 if which == 0 else self.u1
        return 0.0 if sym is None else sym.l2_norm()


@dataclass
class PicardResult:
    """Converged trajectory plus the contraction certificate."""

    times: np.ndarray
    states: np.ndarray = field(repr=False)
    sup_diffs: list = field(default_factory=list)
    ratios: list = field(default_factory=list)
    roundtrip_errors: list = field(default_factory=list)
    converged: bool = False
    contraction_factor: float = math.nan
    t_star: float = math.nan
    window_override: bool = False

    def certificate_rows(self):
        for i, sd in enumerate(self.sup_diffs):
            ratio = self.ratios[i] if i < len(self.ratios) else math.nan
            rt = self.roundtrip_errors[i] if i < len(self.roundtrip_errors) \
                else math.nan
            yield (i + 1, sd, ratio, rt)

    def certificate_csv(self, path, header_lines=()) -> None:
        with open(path, "w", newline="\n") as fh:
            for line in header_lines:
                fh.write(f"# {line}\n")
            fh.write("iterate,sup_diff,contraction_ratio,roundtrip_error\n")
            for row in self.certificate_rows():
                fh.write(",".join(repr(float(x)) for x in row) + "\n")

    def final_symbol(self, spec: GridSpec, index: int = -1) -> SymbolGrid:
        return SymbolGrid(spec, self.states[index].copy())


def _nonlinearity(prob: PicardProblem, state_values: np.ndarray,
                  measure_roundtrip: bool) -> tuple[np.ndarray, float]:
    """Symbol of |A u|^p via quantize -> spectral power -> read-back."""
    sym = SymbolGrid(prob.u0.spec, state_values)
    au = apply_multiplier(prob.A, sym)
    op = quantize(au, prob.theta, prob.rep)
    w_op = abs_power(op, prob.p)
    w_sym = dequantize(w_op, prob.u0.spec)
    rt = math.nan
    if measure_roundtrip:
        back = quantize(w_sym, prob.theta, prob.rep)
        scale = float(np.linalg.norm(w_op.kernel))
        if scale > 0:
            rt = float(np.linalg.norm(back.kernel - w_op.kernel)) / scale
        else:
            rt = 0.0
    return w_sym.values, rt


def _time_integral(prob: PicardProblem, ts: np.ndarray,
                   w: np.ndarray) -> np.ndarray:
    """Cumulative integral of h(s) w(s) (heat) or (t-s) h(s) w(s) (wave).

    The wave kernel uses product integration: the (t - s) weight against the
    piecewise-linear interpolant of h w, via two cumulative sums and an
    endpoint correction that makes the s-moment exact.
    """
    hv = prob.h(ts)[:, None]
    hw = hv * w
    dt = ts[1] - ts[0]
    ct1 = np.zeros_like(w)
    ct1[1:] = np.cumsum(0.5 * dt * (hw[1:] + hw[:-1]), axis=0)
    if prob.kind == "heat":
        return ct1
    shw = ts[:, None] * hw
    ct2 = np.zeros_like(w)
    ct2[1:] = np.cumsum(0.5 * dt * (shw[1:] + shw[:-1]), axis=0)
    ct2 -= (dt ** 2 / 6.0) * (hw - hw[0])
    return ts[:, None] * ct1 - ct2


def _run_picard(prob: PicardProblem, initial_states: np.ndarray,
                tol: float, t_star: float,
                window_override: bool) -> PicardResult:
    ts = prob.times()
    n = prob.u0.spec.n
    npts = n * n
    base = prob.u0.values.ravel()
    drift = np.zeros((ts.size, npts), dtype=complex)
    if prob.kind == "wave" and prob.u1 is not None:
        drift = ts[:, None] * prob.u1.values.ravel()[None]
    u = initial_states
    result = PicardResult(ts, u, t_star=t_star,
                          window_override=window_override)
    cell = prob.u0.spec.cell_volume()
    sup_prev = None
    rising = 0
    for it in range(prob.max_iter):
        w = np.empty_like(u)
        rt_max = 0.0
        for k in range(ts.size):
            measure = (k % max(1, ts.size // 8) == 0)
            wk, rt = _nonlinearity(prob, u[k].reshape(n, n), measure)
            w[k] = wk.ravel()
            if measure and math.isfinite(rt):
                rt_max = max(rt_max, rt)
        integ = _time_integral(prob, ts, w)
        unew = base[None] + drift + integ
        diffs = np.sqrt(np.sum(np.abs(unew - u) ** 2, axis=1) * cell)
        sup = float(diffs.max())
        result.sup_diffs.append(sup)
        result.roundtrip_errors.append(rt_max)
        if sup_prev is not None:
            ratio = sup / sup_prev if sup_prev > 0 else 0.0
            result.ratios.append(ratio)
            rising = rising + 1 if ratio >= 1.0 else 0
            if rising >= 3 or not math.isfinite(sup):
                result.states = unew
                raise DivergenceError(
                    f"Picard iteration diverged after {it + 1} iterates "
                    f"(last sup difference {sup:.3e})",
                    ratio_history=result.ratios)
        if not math.isfinite(sup):
            raise DivergenceError(
                f"Picard iteration produced non-finite states at iterate {it + 1}",
                ratio_history=result.ratios)
        u = unew
        result.states = u
        if sup <= tol:
            result.converged = True
            break
        sup_prev = sup
    tail = [r for r in result.ratios[1:] if math.isfinite(r)]
    result.contraction_factor = max(tail) if tail else math.nan
    if not result.converged:
        raise DivergenceError(
            f"Picard did not reach tolerance {tol:.1e} within "
            f"{prob.max_iter} iterates", ratio_history=result.ratios)
    return result


def _picard(prob: PicardProblem, override_window: bool,
            tol: Optional[float], initial_shift: Optional[np.ndarray]) -> PicardResult:
    t_star = t_star_estimate(prob)
    if prob.T > t_star and not override_window:
        raise DomainError(
            f"horizon T = {prob.T:.4g} exceeds the existence window "
            f"T* = {t_star:.4g}; pass override_window=True to force the run")
    ts = prob.times()
    npts = prob.u0.spec.n ** 2
    base = prob.u0.values.ravel()
    drift = np.zeros((ts.size, npts), dtype=complex)
    if prob.kind == "wave" and prob.u1 is not None:
        drift = ts[:, None] * prob.u1.values.ravel()[None]
    init = np.broadcast_to(base[None], (ts.size, npts)).copy() + drift
    if initial_shift is not None:
        init = init + initial_shift.ravel()[None]
    return _run_picard(prob, init, tol if tol is not None else prob.tol,
                       t_star, prob.T > t_star)


def picard_heat(prob: PicardProblem, override_window: bool = False,
                tol: Optional[float] = None,
                initial_shift: Optional[np.ndarray] = None) -> PicardResult:
    """Iterate u_{n+1}(t) = u0 + int_0^t h(s) |A u_n(s)|^p ds to the fixed
    point, on symbol-side states.

    Raises :class:`DivergenceError` with the ratio history when the sup
    differences rise for three consecutive iterates, and refuses horizons
    beyond the window estimate unless ``override_window`` is set.
    """
    if prob.kind != "heat":
        raise DomainError(f"picard_heat got kind '{prob.kind}'")
    return _picard(prob, override_window, tol, initial_shift)


def picard_wave(prob: PicardProblem, override_window: bool = False,
                tol: Optional[float] = None,
                initial_shift: Optional[np.ndarray] = None) -> PicardResult:
    """Iterate u_{n+1}(t) = u0 + t u1 + int_0^t (t-s) h(s) |A u_n(s)|^p ds."""
    if prob.kind != "wave":
        raise DomainError(f"picard_wave got kind '{prob.kind}'")
    return _picard(prob, override_window, tol, initial_shift)


def _bisect_window(formula, hint: float = 1.0) -> float:
    """Solve T = formula(T) for a decreasing formula by bisection."""
    lo, hi = 1e-12, hint
    flo = formula(lo) - lo
    if not math.isfinite(flo):
        return math.inf
    if flo < 0:
        raise EmptyWindowError("no positive existence window")
    for _ in range(200):
        if formula(hi) - hi < 0:
            break
        hi *= 2.0
        if hi > 1e15:
            return math.inf
    else:
        return math.inf
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if formula(mid) - mid >= 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def t_star_estimate(prob: PicardProblem) -> float:
    """Existence-window radius from the contraction-mapping bookkeeping.

    Heat: T* solves T = sqrt(c^2 - 1) / (||h||_{L2(0,T)} delta^p
    ||u0||^(p-1)). Wave: the minimum of the two cube-root windows built from
    ||u0|| and ||u1||. Profiles whose L2 norm depends on T are resolved by
    bisection; vanishing data or coefficient give an infinite window.
    """
    nu0 = prob.data_norm(0)
    if prob.kind == "heat":
        num = math.sqrt(prob.c ** 2 - 1.0)
        den_const = prob.delta ** prob.p * nu0 ** (prob.p - 1)
        if den_const == 0:
            return math.inf

        def formula(T):
            h2 = prob.h.l2_norm(T)
            return math.inf if h2 == 0 else num / (h2 * den_const)

        return _bisect_window(formula)

    nu1 = prob.data_norm(1)
    num = prob.c1 - 1.0

    def formula(T):
        h2sq = prob.h.l2_norm(T) ** 2
        if h2sq == 0:
            return math.inf
        best = math.inf
        for nrm in (nu0, nu1):
            if nrm > 0:
                den = h2sq * prob.delta ** (prob.p - 1) * nrm ** (2 * prob.p - 2)
                best = min(best, (num / den) ** (1.0 / 3.0))
        return best

    return _bisect_window(formula)


@dataclass(frozen=True)
class SmallDataResult:
    admissible: bool
    margin: float
    threshold: float
    gamma_tilde: float
    c_h_used: float
    hypothesis_ok: bool


def small_data_check(prob: PicardProblem, gamma: float, gamma0: float,
                     c_h: Optional[float] = None) -> SmallDataResult:
    """Small-data admissibility for the global wave solution.

    Requires gamma > 3/2 and 0 < gamma0 < (2 gamma - 3)/p, sets
    gamma_tilde = 3 - 2 gamma + gamma0 p < 0, and tests

        c_h^p ||u0||^(2p-2)  <=  c2 T^(-gamma_tilde + gamma0)

    at the problem horizon. ``c_h`` is the constant in the coefficient decay
    hypothesis ||h||_{L2(0,T)} <= c_h T^(-gamma); when omitted it is measured
    at the horizon. ``hypothesis_ok`` records whether the supplied constant
    actually dominates the measured coefficient norm at the horizon.
    """
    if prob.kind != "wave":
        raise DomainError("small-data admissibility applies to the wave kind")
    if gamma <= 1.5:
        raise DomainError(f"need gamma > 3/2, got {gamma}")
    hi = (2.0 * gamma - 3.0) / prob.p
    if not (0.0 < gamma0 < hi):
        raise DomainError(
            f"need 0 < gamma0 < (2 gamma - 3)/p = {hi:.4g}, got {gamma0}")
    if prob.u1 is not None and prob.u1.l2_norm() > 0:
        raise DomainError("small-data admissibility assumes vanishing u1")
    T = prob.T
    gamma_tilde = 3.0 - 2.0 * gamma + gamma0 * prob.p
    measured_c = prob.h.l2_norm(T) * T ** gamma
    used = c_h if c_h is not None else measured_c
    hypothesis_ok = used + 1e-12 >= measured_c
    rhs = prob.c2 * T ** (-gamma_tilde + gamma0)
    lhs = used ** prob.p * prob.data_norm(0) ** (2 * prob.p - 2)
    margin = rhs - lhs
    threshold = (rhs / used ** prob.p) ** (1.0 / (2 * prob.p - 2)) \
        if used > 0 else math.inf
    return SmallDataResult(margin >= 0.0, margin, threshold, gamma_tilde,
                           used, hypothesis_ok)


@dataclass(frozen=True)
class ProbeResult:
    gap: float
    skipped: bool
    note: str = ""


def uniqueness_probe(prob: PicardProblem, perturbation_scale: float,
                     tol: float = 1e-10) -> ProbeResult:
    """Re-run the iteration from a perturbed initial iterate (the data are
    untouched) and report the sup-norm gap between the converged solutions.

    Outside the existence window the probe is skipped with a note.
    """
    t_star = t_star_estimate(prob)
    if prob.T > t_star:
        return ProbeResult(math.nan, True,
                           f"horizon {prob.T:.4g} outside window {t_star:.4g}")
    runner = picard_heat if prob.kind == "heat" else picard_wave
    base = runner(prob, tol=tol)
    if perturbation_scale == 0:
        return ProbeResult(0.0, False, "zero perturbation")
    shift = perturbation_scale * prob.u0.values
    pert = runner(prob, tol=tol, initial_shift=shift)
    cell = prob.u0.spec.cell_volume()
    diffs = np.sqrt(np.sum(np.abs(base.states - pert.states) ** 2, axis=1) * cell)
    return ProbeResult(float(diffs.max()), False)
