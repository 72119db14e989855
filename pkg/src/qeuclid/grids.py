"""Sampled symbols on uniform grids, the classical Fourier transform in the
no-2pi-in-the-exponent convention, and the twisted convolution that realizes
the deformed product on the symbol side."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import ConfigurationError, DomainError, NumericError, ShapeError

__all__ = [
    "ThetaForm",
    "SymbolGrid",
    "GridSpec",
    "sample_symbol",
    "classical_fourier",
    "twisted_convolution",
    "ordinary_convolution",
]


@dataclass(frozen=True)
class ThetaForm:
    """Skew-symmetric deformation matrix in canonical block form.

    Supported configurations: ``theta0 == 0`` (any dimension, the classical
    case) or ``theta0 > 0`` with even ``d``, all 2x2 blocks equal to
    ``theta0 * [[0, 1], [-1, 0]]`` (the invertible case).
    """

    d: int
    theta0: float = 0.0

    def __post_init__(self):
        if self.d < 1:
            raise DomainError(f"dimension must be positive, got {self.d}")
        if self.theta0 < 0:
            raise DomainError(f"theta0 must be >= 0, got {self.theta0}")
        if self.theta0 > 0 and self.d % 2 != 0:
            raise DomainError(
                f"invertible deformation needs even dimension, got d={self.d}"
            )

    @property
    def invertible(self) -> bool:
        return self.theta0 > 0

    @property
    def rank(self) -> int:
        return self.d if self.invertible else 0

    def block_structure(self):
        """Canonical 2x2 blocks (empty in the classical case)."""
        block = np.array([[0.0, self.theta0], [-self.theta0, 0.0]])
        return [block.copy() for _ in range(self.rank // 2)]

    def matrix(self) -> np.ndarray:
        """Assemble the full d x d skew-symmetric matrix."""
        th = np.zeros((self.d, self.d))
        if self.invertible:
            for b in range(self.d // 2):
                th[2 * b, 2 * b + 1] = self.theta0
                th[2 * b + 1, 2 * b] = -self.theta0
        return th


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid over ``[-half_width, half_width)^d``, cell-left anchored."""

    d: int
    half_width: float
    n: int

    def __post_init__(self):
        if self.half_width <= 0:
            raise DomainError(f"half_width must be > 0, got {self.half_width}")
        if self.n < 4 or (self.n & (self.n - 1)) != 0:
            raise DomainError(f"n must be a power of two >= 4, got {self.n}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.n

    def axis(self) -> np.ndarray:
        """Per-axis coordinates -L + k*spacing, k = 0..n-1 (0 is on the grid)."""
        return -self.half_width + self.spacing * np.arange(self.n)

    def coords(self) -> tuple[np.ndarray, ...]:
        """Meshgrid coordinate arrays, one per axis, 'ij' indexing."""
        return np.meshgrid(*([self.axis()] * self.d), indexing="ij")

    def cell_volume(self) -> float:
        return self.spacing ** self.d

    def dual(self) -> "GridSpec":
        """Dual grid of the discrete Fourier transform (same n, spacing 2pi/(n*spacing))."""
        return GridSpec(self.d, math.pi / self.spacing, self.n)


@dataclass
class SymbolGrid:
    """Complex-valued samples of a function on a :class:`GridSpec`."""

    spec: GridSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        expected = (self.spec.n,) * self.spec.d
        self.values = np.asarray(self.values, dtype=complex)
        if self.values.shape != expected:
            raise ShapeError(
                f"values shape {self.values.shape} does not match grid {expected}"
            )

    @property
    def d(self) -> int:
        return self.spec.d

    @property
    def spacing(self) -> float:
        return self.spec.spacing

    def l2_norm(self) -> float:
        """Grid L2 norm (sum |f|^2 * cell volume)^(1/2)."""
        return float(
            np.sqrt(np.sum(np.abs(self.values) ** 2) * self.spec.cell_volume())
        )

    def lp_norm(self, p: float) -> float:
        """Grid Lp norm of |f|; p = inf gives the max sample."""
        if math.isinf(p):
            return float(np.max(np.abs(self.values)))
        if p < 1:
            raise DomainError(f"p must be >= 1, got {p}")
        return float(
            (np.sum(np.abs(self.values) ** p) * self.spec.cell_volume()) ** (1.0 / p)
        )

    def star_symbol(self) -> "SymbolGrid":
        """Symbol of the adjoint: f*(t) = conj(f(-t)), grid-reflected."""
        idx = (-np.arange(self.spec.n)) % self.spec.n
        out = np.conj(self.values[np.ix_(*([idx] * self.d))])
        return SymbolGrid(self.spec, out)


def _gaussian(coords, center, width, wavevector=None):
    r2 = sum((c - c0) ** 2 for c, c0 in zip(coords, center))
    out = np.exp(-r2 / (2.0 * width ** 2)).astype(complex)
    if wavevector is not None:
        phase = sum(k * c for k, c in zip(wavevector, coords))
        out = out * np.exp(1j * phase)
    return out


def _as_vector(value, d, name):
    if np.isscalar(value):
        return [float(value)] * d
    vec = [float(v) for v in value]
    if len(vec) != d:
        raise ConfigurationError(f"{name} must have {d} components, got {len(vec)}")
    return vec


def sample_symbol(family: str, spec: GridSpec, **params) -> SymbolGrid:
    """Sample a named analytic symbol family on a grid.

    Parameters
    ----------
    family : str
      One of ``gaussian`` (center, width), ``power`` (lam), ``constant``
      (value), ``modulated_gaussian`` (center, width, wavevector),
      ``power_gaussian`` (power, width), ``bump`` (radius), or
      ``ground_projector`` (theta0, d = 2 only).
    spec : GridSpec
      Target grid.
    params
      Family parameters; unknown keys are rejected.

    Returns
    -------
    SymbolGrid
    """
    coords = spec.coords()
    allowed = {
        "gaussian": {"center", "width"},
        "power": {"lam"},
        "constant": {"value"},
        "modulated_gaussian": {"center", "width", "wavevector"},
        "power_gaussian": {"power", "width"},
        "bump": {"radius"},
        "ground_projector": {"theta0"},
    }
    if family not in allowed:
        raise ConfigurationError(f"unknown symbol family '{family}'")
    unknown = set(params) - allowed[family]
    if unknown:
        raise ConfigurationError(f"unknown parameters {sorted(unknown)} for '{family}'")

    if family == "gaussian":
        center = _as_vector(params.get("center", 0.0), spec.d, "center")
        width = float(params.get("width", 1.0))
        vals = _gaussian(coords, center, width)
    elif family == "power":
        lam = float(params["lam"])
        r2 = sum(c ** 2 for c in coords)
        vals = (r2 ** (lam / 2.0)).astype(complex)
    elif family == "constant":
        vals = np.full((spec.n,) * spec.d, complex(params.get("value", 1.0)))
    elif family == "modulated_gaussian":
        center = _as_vector(params.get("center", 0.0), spec.d, "center")
        width = float(params.get("width", 1.0))
        wavevector = _as_vector(params.get("wavevector", 1.0), spec.d, "wavevector")
        vals = _gaussian(coords, center, width, wavevector)
    elif family == "power_gaussian":
        power = float(params.get("power", 2.0))
        width = float(params.get("width", 1.0))
        r2 = sum(c ** 2 for c in coords)
        vals = (r2 ** (power / 2.0)) * np.exp(-r2 / (2.0 * width ** 2))
        vals = vals.astype(complex)
    elif family == "bump":
        radius = float(params.get("radius", 1.0))
        r2 = sum(c ** 2 for c in coords) / radius ** 2
        vals = np.zeros_like(r2, dtype=complex)
        inside = r2 < 1.0
        with np.errstate(divide="ignore", over="ignore"):
            vals[inside] = np.exp(1.0 - 1.0 / (1.0 - r2[inside]))
    else:  # ground_projector
        if spec.d != 2:
            raise ConfigurationError("ground_projector is a d = 2 symbol")
        th0 = float(params.get("theta0", 1.0))
        if th0 <= 0:
            raise ConfigurationError("ground_projector needs theta0 > 0")
        r2 = coords[0] ** 2 + coords[1] ** 2
        vals = (th0 / (2.0 * math.pi)) * np.exp(-th0 * r2 / 4.0).astype(complex)

    if not np.all(np.isfinite(vals)):
        raise NumericError(f"family '{family}' produced non-finite samples")
    return SymbolGrid(spec, vals)


def classical_fourier(f: SymbolGrid, sign: int = -1) -> SymbolGrid:
    """Discrete Fourier transform matching the continuum conventions
    fhat(t) = int f(s) exp(-i(t,s)) ds (``sign=-1``) and its inverse carrying
    the (2pi)^(-d) factor (``sign=+1``).

    The output lives on the dual grid (same n, half width pi/spacing); a
    forward transform followed by the inverse reproduces the input exactly up
    to rounding.
    """
    if sign not in (-1, 1):
        raise DomainError(f"sign must be -1 or +1, got {sign}")
    if not np.all(np.isfinite(f.values)):
        raise NumericError("non-finite symbol values")
    spec = f.spec
    n, d = spec.n, spec.d
    k = np.arange(n)
    par = (-1.0) ** k
    # checkerboard parity factor over all axes
    signs = par
    for _ in range(d - 1):
        signs = np.multiply.outer(signs, par)
    dual = spec.dual()
    if sign == -1:
        work = np.fft.fftn(f.values * signs)
        out = (spec.spacing ** d) * signs * work
    else:
        work = np.fft.ifftn(f.values * signs)
        out = ((spec.spacing / (2.0 * math.pi)) ** d) * (n ** d) * signs * work
    return SymbolGrid(dual, out)


def _conv_phase_1d(spec: GridSpec):
    ones = np.ones((spec.n, spec.n), dtype=complex)
    return ones, ones


def _conv_phase_2d(spec: GridSpec, theta: ThetaForm):
    xi = spec.axis()
    # exp(i/2 (t, theta r)) with (t, theta r) = theta0 (t1 r2 - t2 r1)
    ph1 = np.exp(0.5j * theta.theta0 * np.outer(xi, xi))   # [t1 index, r2 index]
    ph2 = np.exp(-0.5j * theta.theta0 * np.outer(xi, xi))  # [t2 index, r1 index]
    return ph1, ph2


def twisted_convolution(f: SymbolGrid, g: SymbolGrid, theta: ThetaForm) -> SymbolGrid:
    """Twisted convolution (f *_theta g)(r) = int f(t) g(r-t) exp(i(t,theta r)/2) dt,
    evaluated as a direct quadrature sum on the shared grid.

    For ``theta0 == 0`` the phase is identically one and the result is the
    ordinary (truncated-domain) convolution computed by the same code path.
    Supported for d in {1, 2}; the cost is O(n^(2d)).
    """
    if f.spec != g.spec:
        raise ShapeError(f"grids differ: {f.spec} vs {g.spec}")
    if theta.d != f.d:
        raise ShapeError(f"theta dimension {theta.d} != symbol dimension {f.d}")
    spec = f.spec
    n = spec.n
    dxi = spec.spacing

    if spec.d == 1:
        if theta.invertible:
            raise DomainError("invertible theta needs even dimension")
        gpad = np.zeros(2 * n, dtype=complex)
        gpad[n // 2:n // 2 + n] = g.values
        out = np.empty(n, dtype=complex)
        for i in range(n):
            out[i] = np.dot(f.values, gpad[i + n:i:-1]) * dxi
        return SymbolGrid(spec, out)

    if spec.d != 2:
        raise DomainError(
            f"twisted convolution implemented for d in (1, 2), got d={spec.d}"
        )

    ph1, ph2 = _conv_phase_2d(spec, theta)
    gpad = np.zeros((2 * n, 2 * n), dtype=complex)
    gpad[n // 2:n // 2 + n, n // 2:n // 2 + n] = g.values
    out = np.empty((n, n), dtype=complex)
    fv = f.values
    for i in range(n):
        A = gpad[i + 1:i + n + 1][::-1]             # A[k1] = gpad[i - k1 + n]
        SW = sliding_window_view(A, n, axis=1)      # SW[k1, st, j] = A[k1, st + j]
        B = SW[:, ::-1, :][:, :n, :]                # B[k1, k2, j] = A[k1, j - k2 + n]
        out[i] = np.einsum("kl,kj,l,klj->j", fv, ph1, ph2[:, i], B, optimize=True)
    return SymbolGrid(spec, out * dxi ** 2)


def ordinary_convolution(f: SymbolGrid, g: SymbolGrid) -> SymbolGrid:
    """Plain convolution: the zero-deformation case of :func:`twisted_convolution`."""
    return twisted_convolution(f, g, ThetaForm(f.d, 0.0))
