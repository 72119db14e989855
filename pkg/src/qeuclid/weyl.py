"""Concrete realization of the deformed algebra on L^2(R^(d/2)) for invertible
canonical deformations: quantization to integral-kernel matrices, the
calibrated trace, Fourier coefficients, and the grid read-back."""

from __future__ import annotations

import math
import struct
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import (
    CalibrationError,
    DomainError,
    LowConfidenceWarning,
    NumericError,
    ShapeError,
)
from .grids import GridSpec, SymbolGrid, ThetaForm, sample_symbol

__all__ = [
    "RepSpace",
    "NcOperator",
    "quantize",
    "dequantize",
    "calibrate_trace_constant",
    "fourier_coefficient",
    "weyl_unitary",
    "dump_operator",
    "load_operator",
]


@dataclass(frozen=True)
class RepSpace:
    """Uniform grid on the representation space R^(d/2).

    ``m`` samples per axis on ``[-half_width, half_width)``; the matrix side
    of an operator is ``m**half_d``.
    """

    half_d: int
    half_width: float
    m: int

    def __post_init__(self):
        if self.half_d < 1:
            raise DomainError("half_d must be >= 1")
        if self.half_width <= 0:
            raise DomainError("half_width must be > 0")
        if self.m < 4 or (self.m & (self.m - 1)) != 0:
            raise DomainError(f"m must be a power of two >= 4, got {self.m}")

    @property
    def spacing(self) -> float:
        return 2.0 * self.half_width / self.m

    def axis(self) -> np.ndarray:
        return -self.half_width + self.spacing * np.arange(self.m)

    @property
    def dim(self) -> int:
        return self.m ** self.half_d

    @staticmethod
    def matched(theta: ThetaForm, grid: GridSpec) -> "RepSpace":
        """Representation grid aligned with a symbol grid (stride one):
        spacing = theta0 * grid.spacing, m = grid.n."""
        if not theta.invertible:
            raise DomainError("matched representation needs invertible theta")
        dx = theta.theta0 * grid.spacing
        return RepSpace(grid.d // 2, grid.n * dx / 2.0, grid.n)


@dataclass
class NcOperator:
    """Kernel matrix realizing a quantized symbol, quadrature weight absorbed.

    ``trace_weight`` is the constant c with tau = c * matrix trace; it is
    shared by every operator on the same (theta, rep) pair.
    """

    kernel: np.ndarray = field(repr=False)
    theta: ThetaForm
    rep: RepSpace
    trace_weight: float
    origin: GridSpec | None = None

    def __post_init__(self):
        dim = self.rep.dim
        self.kernel = np.asarray(self.kernel, dtype=complex)
        if self.kernel.shape != (dim, dim):
            raise ShapeError(
                f"kernel shape {self.kernel.shape} != ({dim}, {dim})"
            )
        if self.trace_weight <= 0:
            raise DomainError("trace_weight must be positive")

    def adjoint(self) -> "NcOperator":
        return NcOperator(self.kernel.conj().T, self.theta, self.rep,
                          self.trace_weight, self.origin)

    def __matmul__(self, other: "NcOperator") -> "NcOperator":
        if self.rep != other.rep or self.theta != other.theta:
            raise ShapeError("operators live on different representations")
        return NcOperator(self.kernel @ other.kernel, self.theta, self.rep,
                          self.trace_weight, None)

    def trace(self) -> complex:
        """tau of the operator: trace_weight times the matrix trace."""
        return self.trace_weight * complex(np.trace(self.kernel))


def _stride(theta: ThetaForm, grid: GridSpec, rep: RepSpace) -> int:
    """Integer stride s with rep.spacing == s * theta0 * grid.spacing."""
    ratio = rep.spacing / (theta.theta0 * grid.spacing)
    s = int(round(ratio))
    if s < 1 or abs(ratio - s) > 1e-9:
        raise ShapeError(
            "representation spacing must be an integer multiple of "
            f"theta0 * grid spacing (ratio {ratio:.6g})"
        )
    return s


@lru_cache(maxsize=32)
def _kernel_transform_matrix(half_width_f: float, n: int, half_width_r: float, m: int):
    """E[k, s2] = exp(i xi_k b_s2), b_s2 = -R + s2 * dx/2, s2 = 0..2m-2."""
    xi = -half_width_f + (2.0 * half_width_f / n) * np.arange(n)
    dx = 2.0 * half_width_r / m
    b = -half_width_r + 0.5 * dx * np.arange(2 * m - 1)
    return np.exp(1j * np.outer(xi, b))


def _check_quantize_args(f: SymbolGrid, theta: ThetaForm, rep: RepSpace):
    if not theta.invertible:
        raise DomainError(
            "quantize needs invertible theta; the classical path lives in "
            "the singular-value module"
        )
    if theta.d != f.d:
        raise ShapeError(f"theta dimension {theta.d} != symbol dimension {f.d}")
    if rep.half_d != f.d // 2:
        raise ShapeError(
            f"representation half_d {rep.half_d} != d/2 = {f.d // 2}"
        )


def quantize(f: SymbolGrid, theta: ThetaForm, rep: RepSpace) -> NcOperator:
    """Quantize a symbol to its integral-kernel matrix on L^2(R^(d/2)).

    The kernel is K(x, y) = theta0^(-d/2) g((y - x)/theta0, (x + y)/2) with g
    the partial Fourier transform of the symbol along the second coordinate
    of each canonical block; the quadrature weight ``rep.spacing**(d/2)`` is
    absorbed into the stored matrix.

    Parameters
    ----------
    f : SymbolGrid
      Symbol samples; the grid must align with the representation (the
      representation spacing an integer multiple of theta0 times the symbol
      spacing).
    theta : ThetaForm
      Invertible canonical deformation.
    rep : RepSpace
      Representation grid; see :meth:`RepSpace.matched`.

    Returns
    -------
    NcOperator
    """
    _check_quantize_args(f, theta, rep)
    s = _stride(theta, f.spec, rep)
    n, m, hd = f.spec.n, rep.m, rep.half_d
    th0 = theta.theta0
    dxi, dx = f.spec.spacing, rep.spacing
    E = _kernel_transform_matrix(f.spec.half_width, n, rep.half_width, m)

    # transform the odd axis of every block: f(..., t2_b, ...) -> g(..., s2_b, ...)
    work = f.values
    for b in range(hd):
        axis = 2 * b + 1 - b  # odd axes shift left as earlier ones are consumed
        work = np.tensordot(work, E, axes=([axis], [0]))
    # axes now ordered (k1_1, .., k1_hd, s2_1, .., s2_hd)
    work = work * (dxi ** hd)

    # gather even axes at k1 = n/2 + dq*s, dq = j - i per block
    dqs = np.arange(-(m - 1), m)
    k1 = n // 2 + dqs * s
    valid = (k1 >= 0) & (k1 < n)
    gathered = np.zeros((2 * m - 1,) * hd + (2 * m - 1,) * hd, dtype=complex)
    src_idx = np.ix_(*([k1[valid]] * hd), *([np.arange(2 * m - 1)] * hd))
    dst_idx = np.ix_(*([np.where(valid)[0]] * hd), *([np.arange(2 * m - 1)] * hd))
    gathered[dst_idx] = work[src_idx]

    i_flat = np.arange(m ** hd)
    multi = np.array(np.unravel_index(i_flat, (m,) * hd))  # (hd, m^hd)
    I = multi[:, :, None]
    J = multi[:, None, :]
    idx = tuple(J[b] - I[b] + (m - 1) for b in range(hd)) + tuple(
        I[b] + J[b] for b in range(hd)
    )
    kernel = (dx / th0) ** hd * gathered[idx]
    return NcOperator(kernel, theta, rep, _trace_weight(theta, rep), f.spec)


def dequantize(x: NcOperator, grid: GridSpec) -> SymbolGrid:
    """Read the symbol back from a kernel matrix (d = 2 only).

    Exact inverse of :func:`quantize` for symbols supported in the band the
    representation can carry; symbol rows outside that band come back zero.
    """
    if x.rep.half_d != 1 or grid.d != 2:
        raise DomainError("dequantize is implemented for d = 2")
    theta = x.theta
    s = _stride(theta, grid, x.rep)
    n, m = grid.n, x.rep.m
    th0 = theta.theta0
    dx = x.rep.spacing
    xi = grid.axis()

    # D[m-1+dq, j] = M[j-dq, j] on the dq-th superdiagonal of the transpose
    D = np.zeros((2 * m - 1, m), dtype=complex)
    M = x.kernel
    for dq in range(-(m - 1), m):
        diag = np.diagonal(M.T, offset=-dq)  # entries M[j-dq, j]
        j0 = max(0, dq)
        D[m - 1 + dq, j0:j0 + diag.size] = diag

    E2 = np.exp(-1j * dx * np.outer(np.arange(m), xi))    # (m, n)
    F = D @ E2                                            # (2m-1, n)
    dqs = np.arange(-(m - 1), m)
    phases = np.exp(1j * np.outer(xi, x.rep.half_width + 0.5 * dx * dqs)).T
    F = F * phases * (th0 / (2.0 * math.pi))

    out = np.zeros((n, n), dtype=complex)
    k1 = n // 2 + dqs * s
    valid = (k1 >= 0) & (k1 < n)
    out[k1[valid], :] = F[valid, :]
    return SymbolGrid(grid, out)


_trace_cache: dict = {}


def _trace_weight(theta: ThetaForm, rep: RepSpace) -> float:
    key = (theta, rep)
    if key not in _trace_cache:
        _trace_cache[key] = _calibrate(theta, rep)
    return _trace_cache[key]


def _calibration_grid(theta: ThetaForm, rep: RepSpace) -> GridSpec:
    return GridSpec(2 * rep.half_d, rep.half_width / theta.theta0, rep.m)


def _raw_quantize_trace(f: SymbolGrid, theta: ThetaForm, rep: RepSpace) -> complex:
    """Matrix trace of the quantization, computed without the trace constant."""
    s = _stride(theta, f.spec, rep)
    n, m, hd = f.spec.n, rep.m, rep.half_d
    E = _kernel_transform_matrix(f.spec.half_width, n, rep.half_width, m)
    # trace needs only dq = 0, s2 = 2i: sum_i g[n/2 pos, 2i]
    center = f.values
    for b in range(hd):
        center = np.take(center, n // 2, axis=b)  # even axes at k1 = n/2
    work = center
    for b in range(hd):
        work = np.tensordot(work, E[:, ::2], axes=([0], [0]))
    return complex(work.sum()) * (f.spec.spacing ** hd) * (
        rep.spacing / theta.theta0
    ) ** hd


def _calibrate(theta: ThetaForm, rep: RepSpace) -> float:
    grid = _calibration_grid(theta, rep)
    g = sample_symbol("gaussian", grid, width=1.0)
    tr = _raw_quantize_trace(g, theta, rep)
    if abs(tr) < 1e-12:
        raise CalibrationError(
            f"calibration trace {tr:.3e} below the numeric floor"
        )
    c = 1.0 / tr.real
    if c <= 0:
        raise CalibrationError(f"calibration produced non-positive constant {c}")
    return c


def calibrate_trace_constant(theta: ThetaForm, rep: RepSpace) -> float:
    """Trace constant c with tau = c * matrix trace, calibrated so that the
    trace of the quantized unit Gaussian equals the symbol's value at zero.

    The value is frozen per (theta, rep) pair and agrees with the closed form
    (theta0 / 2 pi)^(d/2) to quadrature accuracy.
    """
    if not theta.invertible:
        raise DomainError("trace calibration needs invertible theta")
    return _trace_weight(theta, rep)


def weyl_unitary(theta: ThetaForm, rep: RepSpace, point) -> np.ndarray:
    """Matrix of the representation unitary U(t) at a phase-space point.

    The first block coordinate must shift the representation grid by an
    integer number of cells (theta0 * t1 a multiple of the grid spacing).
    """
    if not theta.invertible:
        raise DomainError("weyl_unitary needs invertible theta")
    point = np.atleast_1d(np.asarray(point, dtype=float))
    if point.shape != (2 * rep.half_d,):
        raise ShapeError(f"point must have {2 * rep.half_d} components")
    th0 = theta.theta0
    dx = rep.spacing
    x = rep.axis()
    m = rep.m
    out = None
    for b in range(rep.half_d):
        t1, t2 = point[2 * b], point[2 * b + 1]
        r = th0 * t1 / dx
        if abs(r - round(r)) > 1e-9:
            raise ShapeError(
                f"shift theta0*t1/spacing = {r:.6g} is not an integer"
            )
        r = int(round(r))
        U = np.zeros((m, m), dtype=complex)
        i = np.arange(m)
        j = i + r
        ok = (j >= 0) & (j < m)
        U[i[ok], j[ok]] = np.exp(0.5j * th0 * t1 * t2) * np.exp(1j * t2 * x[ok])
        out = U if out is None else np.kron(out, U)
    return out


def fourier_coefficient(x: NcOperator, point) -> complex:
    """Fourier coefficient xhat(s) = tau(x U(s)*).

    For ``x = quantize(f)`` this recovers ``f(s)`` within quadrature
    tolerance at grid-aligned points. Points whose shift exceeds the
    representation window are answered with a :class:`LowConfidenceWarning`.
    """
    point = np.atleast_1d(np.asarray(point, dtype=float))
    th0 = x.theta.theta0
    dx = x.rep.spacing
    for b in range(x.rep.half_d):
        r = th0 * point[2 * b] / dx
        if abs(round(r)) >= x.rep.m:
            warnings.warn(
                f"point {point} beyond the representation band; "
                "coefficient is unreliable",
                LowConfidenceWarning,
            )
        if abs(point[2 * b + 1]) > math.pi / dx:
            warnings.warn(
                f"second block coordinate {point[2 * b + 1]:.4g} beyond the "
                "aliasing band pi/spacing",
                LowConfidenceWarning,
            )
    U = weyl_unitary(x.theta, x.rep, point)
    return x.trace_weight * complex(np.einsum("ij,ij->", x.kernel, U.conj()))


_MAGIC = b"QENC"


def dump_operator(x: NcOperator, path) -> None:
    """Write a kernel matrix to a binary file.

    Layout: magic ``QENC``, uint32 half_d, uint32 m, float64 half_width,
    float64 theta0, float64 trace_weight, then the kernel row-major as
    float64 (re, im) pairs.
    """
    dim = x.rep.dim
    with open(path, "wb") as fh:
        fh.write(_MAGIC)
        fh.write(struct.pack("<IIddd", x.rep.half_d, x.rep.m,
                             x.rep.half_width, x.theta.theta0, x.trace_weight))
        inter = np.empty((dim, dim, 2))
        inter[:, :, 0] = x.kernel.real
        inter[:, :, 1] = x.kernel.imag
        fh.write(inter.tobytes())


def load_operator(path) -> NcOperator:
    """Read a kernel matrix written by :func:`dump_operator`."""
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != _MAGIC:
            raise NumericError(f"bad magic {magic!r} in operator file")
        half_d, m, half_width, theta0, weight = struct.unpack("<IIddd", fh.read(32))
        rep = RepSpace(half_d, half_width, m)
        dim = rep.dim
        raw = np.frombuffer(fh.read(dim * dim * 16), dtype=float).reshape(dim, dim, 2)
        kernel = raw[:, :, 0] + 1j * raw[:, :, 1]
    theta = ThetaForm(2 * half_d, theta0)
    op = NcOperator(kernel, theta, rep, weight)
    return op
