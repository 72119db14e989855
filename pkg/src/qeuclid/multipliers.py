"""Fourier multiplier calculus on the symbol side: pointwise application,
the weak-Lr symbol quasinorm behind the Lp-Lq multiplier bound, and the
propagator constant M_t with its closed form for power symbols."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import AssumptionError, DomainError, ShapeError
from .grids import GridSpec, SymbolGrid

__all__ = [
    "MultiplierSymbol",
    "power_multiplier",
    "laplacian_multiplier",
    "coordinate_multiplier",
    "constant_multiplier",
    "gaussian_multiplier",
    "identity_multiplier",
    "apply_multiplier",
    "WeakQuasinorm",
    "weak_symbol_quasinorm",
    "hormander_bound",
    "MtValue",
    "m_t",
    "unit_ball_volume",
]


@dataclass(frozen=True)
class MultiplierSymbol:
    """A multiplier symbol g: R^d -> C given by a callable on coordinate
    arrays, with an optional power-growth tag |xi|^lam used by closed forms.
    """

    name: str
    fn: Callable[..., np.ndarray]
    growth_lam: Optional[float] = None
    is_power: bool = False
    nonnegative: bool = True

    def sample(self, spec: GridSpec) -> np.ndarray:
        out = np.asarray(self.fn(*spec.coords()))
        if out.shape != (spec.n,) * spec.d:
            raise ShapeError(f"multiplier '{self.name}' returned shape {out.shape}")
        return out


def power_multiplier(lam: float) -> MultiplierSymbol:
    """sigma(xi) = |xi|^lam (positive except at the origin)."""
    if lam <= 0:
        raise DomainError(f"power exponent must be > 0, got {lam}")

    def fn(*coords):
        r2 = sum(c ** 2 for c in coords)
        return r2 ** (lam / 2.0)

    return MultiplierSymbol(f"power({lam})", fn, growth_lam=lam, is_power=True)


def laplacian_multiplier() -> MultiplierSymbol:
    """sigma(xi) = |xi|^2, the symbol of the (negative) Laplacian."""
    return power_multiplier(2.0)


def coordinate_multiplier(axis: int) -> MultiplierSymbol:
    """g(xi) = i xi_axis, the symbol of the directional derivative."""

    def fn(*coords):
        if axis < 0 or axis >= len(coords):
            raise DomainError(f"axis {axis} out of range for d={len(coords)}")
        return 1j * coords[axis]

    return MultiplierSymbol(f"coordinate({axis})", fn, nonnegative=False)


def constant_multiplier(value: float) -> MultiplierSymbol:
    def fn(*coords):
        return np.full_like(coords[0], value, dtype=float)

    return MultiplierSymbol(f"constant({value})", fn,
                            nonnegative=value >= 0)


def identity_multiplier() -> MultiplierSymbol:
    return constant_multiplier(1.0)


def gaussian_multiplier(scale: float = 1.0) -> MultiplierSymbol:
    """g(xi) = exp(-scale |xi|^2), a bounded heat-type symbol."""

    def fn(*coords):
        r2 = sum(c ** 2 for c in coords)
        return np.exp(-scale * r2)

    return MultiplierSymbol(f"gaussian({scale})", fn)


def apply_multiplier(g: MultiplierSymbol | SymbolGrid, f: SymbolGrid) -> SymbolGrid:
    """Apply a Fourier multiplier on the symbol side: pointwise g * f.

    The Fourier coefficients of a quantized symbol are the symbol itself, so
    the multiplier acts by plain multiplication on the shared grid.
    """
    if isinstance(g, SymbolGrid):
        if g.spec != f.spec:
            raise ShapeError(f"multiplier grid {g.spec} != symbol grid {f.spec}")
        gv = g.values
    else:
        gv = g.sample(f.spec)
    return SymbolGrid(f.spec, gv * f.values)


@dataclass(frozen=True)
class WeakQuasinorm:
    """Result of a superlevel-volume scan: the measured sup, whether the
    level sets stayed inside the grid, and whether the sup diverges."""

    value: float
    reliable: bool
    infinite: bool

    def __float__(self):
        return math.inf if self.infinite else self.value


def _superlevel_volumes(absg: np.ndarray, thresholds: np.ndarray,
                        spec: GridSpec):
    """Cell counts of {|g| >= t} and whether each level set touches the
    domain boundary."""
    cell = spec.cell_volume()
    vols = np.empty(thresholds.size)
    touches = np.empty(thresholds.size, dtype=bool)
    edge = np.zeros(absg.shape, dtype=bool)
    for ax in range(absg.ndim):
        sl = [slice(None)] * absg.ndim
        sl[ax] = 0
        edge[tuple(sl)] = True
        sl[ax] = -1
        edge[tuple(sl)] = True
    edge_vals = absg[edge]
    for i, t in enumerate(thresholds):
        mask = absg >= t
        vols[i] = cell * np.count_nonzero(mask)
        touches[i] = bool(np.any(edge_vals >= t))
    return vols, touches


def weak_symbol_quasinorm(g: MultiplierSymbol | SymbolGrid, r: float,
                          spec: GridSpec | None = None,
                          n_thresholds: int = 400,
                          thresholds=None) -> WeakQuasinorm:
    """Weak quasinorm sup_{t>0} t * Vol{|g| >= t}^(1/r) by grid counting.

    Parameters
    ----------
    g : MultiplierSymbol or SymbolGrid
      Symbol to scan; a grid ``spec`` is required for a bare multiplier.
    r : float
      Exponent with 1/r = 1/p - 1/q in (0, 1]; ``r = inf`` degenerates to
      the essential sup.
    n_thresholds : int
      Size of the logarithmic threshold grid.
    thresholds : array, optional
      Explicit thresholds overriding the automatic grid (used to restrict
      the scan to a window where the level sets are grid-resolved).

    Returns
    -------
    WeakQuasinorm
      ``infinite`` is set when the running sup is still attained at the
      domain boundary (truncated volume, as for a constant symbol).
    """
    if isinstance(g, SymbolGrid):
        absg = np.abs(g.values)
        spec = g.spec
    else:
        if spec is None:
            raise DomainError("a grid spec is required for a bare multiplier")
        absg = np.abs(g.sample(spec))
    if math.isinf(r):
        return WeakQuasinorm(float(absg.max()), True, False)
    if r < 1:
        raise DomainError(f"r must be >= 1, got {r}")
    top = float(absg.max())
    if top == 0.0:
        return WeakQuasinorm(0.0, True, False)
    if thresholds is not None:
        ts = np.asarray(thresholds, dtype=float)
        if ts.ndim != 1 or ts.size == 0 or np.any(ts <= 0):
            raise DomainError("thresholds must be positive and nonempty")
    else:
        positive = absg[absg > 0]
        lo = max(float(positive.min()), top * 1e-12)
        ts = np.geomspace(lo, top, n_thresholds)
    vols, touches = _superlevel_volumes(absg, ts, spec)
    weighted = ts * vols ** (1.0 / r)
    best = int(np.argmax(weighted))
    value = float(weighted[best])
    # diverging sup: still rising at the smallest threshold with a
    # boundary-touching level set
    infinite = bool(touches[best]) and best == 0
    reliable = not bool(touches[best])
    return WeakQuasinorm(value, reliable, infinite)


def hormander_bound(g: MultiplierSymbol | SymbolGrid, p: float, q: float,
                    spec: GridSpec | None = None) -> float:
    """Multiplier-theorem right side: the weak quasinorm at 1/r = 1/p - 1/q.

    Requires 1 < p <= 2 <= q < inf; the implicit theorem constant is not
    included (measured operator ratios are reported separately by tests).
    """
    if not (1.0 < p <= 2.0 <= q) or math.isinf(q):
        raise DomainError(f"need 1 < p <= 2 <= q < inf, got p={p}, q={q}")
    kappa = 1.0 / p - 1.0 / q
    if kappa == 0.0:
        if isinstance(g, SymbolGrid):
            return float(np.abs(g.values).max())
        if spec is None:
            raise DomainError("a grid spec is required for a bare multiplier")
        return float(np.abs(g.sample(spec)).max())
    wq = weak_symbol_quasinorm(g, 1.0 / kappa, spec=spec)
    return float(wq)


def unit_ball_volume(d: int) -> float:
    """Volume of the unit ball in R^d."""
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)


@dataclass(frozen=True)
class MtValue:
    """Propagator constant M_t together with a reliability flag (grid
    evaluations are flagged when the sublevel set at the maximizer touches
    the domain boundary)."""

    value: float
    reliable: bool = True

    def __float__(self):
        return self.value


def _mt_closed_form(d, lam, alpha, t, kappa):
    btl = d * kappa / lam
    if btl > 1.0 + 1e-12:
        raise AssumptionError(
            f"growth exponent too small: d*(1/p-1/q)/lam = {btl:.4f} > 1"
        )
    btl = min(btl, 1.0)
    if btl in (0.0, 1.0):
        bmax = 1.0
    else:
        bmax = (1.0 - btl) ** (1.0 - btl) * btl ** btl
    return unit_ball_volume(d) ** kappa * t ** (-d * alpha * kappa / lam) * bmax


def m_t(sigma: MultiplierSymbol, alpha: float, t: float, p: float, q: float,
        method: str = "closed-form", spec: GridSpec | None = None,
        d: int | None = None, n_rho: int = 512) -> MtValue:
    """Propagator constant
    M_t = sup_(0<rho<1) rho * Vol{sigma <= t^(-alpha) (1/rho - 1)}^(1/p - 1/q).

    Parameters
    ----------
    method : str
      ``closed-form`` needs a power symbol |xi|^lam and returns
      omega_d^kappa t^(-d alpha kappa / lam) (1-b)^(1-b) b^b with
      b = d kappa / lam; ``grid`` evaluates sublevel volumes by midpoint
      cell counting on ``spec`` with a log rho-grid plus golden-section
      refinement.

    Returns
    -------
    MtValue
    """
    if t <= 0:
        raise DomainError(f"t must be > 0, got {t}")
    if not (1.0 < p <= 2.0 <= q) or math.isinf(q):
        raise DomainError(f"need 1 < p <= 2 <= q < inf, got p={p}, q={q}")
    kappa = 1.0 / p - 1.0 / q
    if kappa == 0.0:
        return MtValue(1.0, True)

    if method == "closed-form":
        if not sigma.is_power or sigma.growth_lam is None:
            raise DomainError("closed-form M_t needs a power symbol")
        dim = spec.d if spec is not None else d
        if dim is None:
            raise DomainError("closed-form M_t needs the dimension (spec or d)")
        return MtValue(_mt_closed_form(dim, sigma.growth_lam, alpha, t, kappa), True)

    if method != "grid":
        raise DomainError(f"unknown M_t method '{method}'")
    if spec is None:
        raise DomainError("grid M_t needs a grid spec")
    # midpoint sampling for the volume quadrature
    mid = [ax + spec.spacing / 2.0 for ax in
           np.meshgrid(*([spec.axis()] * spec.d), indexing="ij")]
    sv = np.asarray(sigma.fn(*mid)).real
    if np.any(sv < 0):
        raise DomainError("M_t needs a nonnegative symbol")
    edge = np.zeros(sv.shape, dtype=bool)
    for ax in range(sv.ndim):
        sl = [slice(None)] * sv.ndim
        sl[ax] = 0
        edge[tuple(sl)] = True
        sl[ax] = -1
        edge[tuple(sl)] = True
    edge_min = float(sv[edge].min())
    cell = spec.cell_volume()
    svf = np.sort(sv.ravel())

    def objective(rho):
        level = t ** (-alpha) * (1.0 / rho - 1.0)
        count = np.searchsorted(svf, level, side="right")
        return rho * (cell * count) ** kappa, level

    rhos = np.geomspace(1e-6, 1.0 - 1e-6, n_rho)
    vals = np.array([objective(r)[0] for r in rhos])
    best = int(np.argmax(vals))
    lo = rhos[max(0, best - 1)]
    hi = rhos[min(n_rho - 1, best + 1)]
    # golden-section refinement of the single interior maximum
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    dd = a + invphi * (b - a)
    fc, _ = objective(c)
    fd, _ = objective(dd)
    for _ in range(60):
        if fc > fd:
            b, dd, fd = dd, c, fc
            c = b - invphi * (b - a)
            fc, _ = objective(c)
        else:
            a, c, fc = c, dd, fd
            dd = a + invphi * (b - a)
            fd, _ = objective(dd)
    rho_star = 0.5 * (a + b)
    val, level = objective(rho_star)
    reliable = level < edge_min
    return MtValue(float(val), bool(reliable))
