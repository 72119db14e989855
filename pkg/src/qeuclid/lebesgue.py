"""Singular-value machinery behind the operator Lp spaces: the generalized
singular value function mu(t, x), Lp norms, weak-Lp quasinorms, and operator
absolute powers. The zero-deformation path treats |f| samples with the cell
volume playing the trace-weight role."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NumericError
from .grids import SymbolGrid
from .weyl import NcOperator

__all__ = [
    "SingularProfile",
    "singular_profile",
    "mu",
    "lp_norm",
    "weak_lp_norm",
    "abs_power",
]

#: singular values below this fraction of the largest are truncated to zero
SV_FLOOR = 1e-12


@dataclass
class SingularProfile:
    """Non-increasing singular values with the trace weight attached.

    ``mu`` is the step function equal to ``sigma[k]`` on
    ``[k * trace_weight, (k+1) * trace_weight)``.
    """

    sigma: np.ndarray = field(repr=False)
    trace_weight: float

    def __post_init__(self):
        self.sigma = np.asarray(self.sigma, dtype=float)
        if self.sigma.ndim != 1:
            raise DomainError("sigma must be one-dimensional")
        if self.trace_weight <= 0:
            raise DomainError("trace_weight must be positive")
        if np.any(self.sigma < 0):
            raise DomainError("singular values must be nonnegative")
        if np.any(np.diff(self.sigma) > 0):
            raise DomainError("singular values must be non-increasing")


def singular_profile(x) -> SingularProfile:
    """Singular profile of an operator, or of a symbol on the classical path.

    Parameters
    ----------
    x : NcOperator or SymbolGrid
      For an operator the kernel matrix is decomposed by SVD and the
      operator's trace weight is attached. For a symbol (the theta = 0
      classical path) the sorted |f| samples carry the grid cell volume.

    Returns
    -------
    SingularProfile
    """
    if isinstance(x, NcOperator):
        if not np.all(np.isfinite(x.kernel)):
            raise NumericError("non-finite kernel entries")
        try:
            sv = np.linalg.svd(x.kernel, compute_uv=False)
        except np.linalg.LinAlgError as exc:
            raise NumericError(f"singular value decomposition failed: {exc}")
        # keep SVD noise out of the weak-norm sups
        if sv.size and sv[0] > 0:
            sv = np.where(sv < SV_FLOOR * sv[0], 0.0, sv)
        weight = x.trace_weight
    elif isinstance(x, SymbolGrid):
        # classical path: plain |f| samples, kept exactly (same sums as the
        # grid norms)
        if not np.all(np.isfinite(x.values)):
            raise NumericError("non-finite symbol values")
        sv = np.sort(np.abs(x.values).ravel())[::-1]
        weight = x.spec.cell_volume()
    else:
        raise DomainError(f"cannot build a singular profile from {type(x)}")
    return SingularProfile(sv, weight)


def mu(t: float, prof: SingularProfile) -> float:
    """Generalized singular value mu(t) = inf{s > 0 : n(s) <= t}.

    Right-continuous step lookup: mu(t) = sigma[floor(t / weight)], zero past
    the last step.
    """
    if t < 0:
        raise DomainError(f"t must be >= 0, got {t}")
    k = int(math.floor(t / prof.trace_weight))
    if k >= prof.sigma.size:
        return 0.0
    return float(prof.sigma[k])


def lp_norm(prof: SingularProfile, p: float) -> float:
    """Lp norm (sum of weight * sigma^p)^(1/p); p = inf gives the top value."""
    if math.isinf(p):
        return float(prof.sigma[0]) if prof.sigma.size else 0.0
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    return float((prof.trace_weight * np.sum(prof.sigma ** p)) ** (1.0 / p))


def weak_lp_norm(prof: SingularProfile, p: float) -> float:
    """Weak quasinorm sup_{t>0} t^(1/p) mu(t).

    The sup is attained at a left step limit, so it equals
    max_k (k * weight)^(1/p) * sigma[k-1] over the finitely many corners.
    """
    if math.isinf(p):
        return float(prof.sigma[0]) if prof.sigma.size else 0.0
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    if prof.sigma.size == 0:
        return 0.0
    k = np.arange(1, prof.sigma.size + 1, dtype=float)
    return float(np.max((k * prof.trace_weight) ** (1.0 / p) * prof.sigma))


def abs_power(x: NcOperator, p: float) -> NcOperator:
    """Operator absolute power |x|^p = (x* x)^(p/2) by eigendecomposition.

    Negative eigenvalues of x*x produced by rounding are clipped to zero.
    """
    if p < 1:
        raise DomainError(f"p must be >= 1, got {p}")
    H = x.kernel.conj().T @ x.kernel
    try:
        w, V = np.linalg.eigh(H)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigendecomposition failed: {exc}")
    w = np.clip(w, 0.0, None)
    kernel = (V * w ** (p / 2.0)) @ V.conj().T
    return NcOperator(kernel, x.theta, x.rep, x.trace_weight, None)
