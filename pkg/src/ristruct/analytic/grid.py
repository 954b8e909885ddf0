"""Periodic-grid spectral calculus: heat semigroup, time-integrated
kernels, derivatives and mollification.

All operators act as Fourier multipliers on real fields sampled on a
regular grid over a torus.  The time integral defining the kernel
operator is evaluated once per derivative multi-index by composite
Gauss-Legendre quadrature over dyadic blocks and cached; a closed-form
per-mode expression is kept available as an independent reference.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np


class QuadratureError(RuntimeError):
    """The configured time quadrature failed its self-check."""


@dataclass(frozen=True)
class GridSpec:
    """Regular periodic grid: sizes per axis, period per axis, scaling."""

    sizes: tuple
    period: tuple
    scaling: tuple

    def __post_init__(self):
        object.__setattr__(self, "sizes", tuple(int(n) for n in self.sizes))
        object.__setattr__(self, "period",
                           tuple(float(p) for p in self.period))
        object.__setattr__(self, "scaling",
                           tuple(float(s) for s in self.scaling))
        if not (len(self.sizes) == len(self.period) == len(self.scaling)):
            raise ValueError("sizes, period and scaling lengths differ")
        for n in self.sizes:
            if n < 16 or n & (n - 1):
                raise ValueError("grid sizes must be powers of two >= 16")
        if any(p <= 0 for p in self.period):
            raise ValueError("periods must be positive")
        if any(s <= 0 for s in self.scaling):
            raise ValueError("scaling entries must be positive")

    @property
    def d(self) -> int:
        return len(self.sizes)

    @property
    def cell_volume(self) -> float:
        out = 1.0
        for n, p in zip(self.sizes, self.period):
            out *= p / n
        return out

    def axes(self):
        """Coordinate arrays, one per axis, in [0, period)."""
        return [np.arange(n) * (p / n)
                for n, p in zip(self.sizes, self.period)]

    def coords(self):
        """Full coordinate meshes (indexing='ij')."""
        return np.meshgrid(*self.axes(), indexing="ij")

    def freqs(self):
        """Angular frequency arrays, one per axis (fftfreq layout)."""
        return [2.0 * np.pi * np.fft.fftfreq(n, d=p / n)
                for n, p in zip(self.sizes, self.period)]

    def freq_mesh(self):
        return np.meshgrid(*self.freqs(), indexing="ij")


def _sym_from(entries):
    out = []
    for k, c in entries:
        out.append((tuple(int(x) for x in k), complex(c)))
    return tuple(out)


@dataclass(frozen=True)
class OperatorSpec:
    """Constant-coefficient operator P(d) = sum_k a_k d^k with its order.

    ``symbol`` lists (multi-index, coefficient) pairs of P(i*lambda);
    ``kernel_derivs`` lists (multi-index, coefficient) pairs of the
    derivative polynomial applied inside the integrated kernel;
    ``cutoff_width`` sets the low-frequency cutoff scale."""

    symbol: tuple
    ell: float
    kernel_derivs: tuple = ()
    cutoff_width: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "symbol", _sym_from(self.symbol))
        derivs = self.kernel_derivs
        if not derivs:
            d = len(self.symbol[0][0])
            derivs = (((0,) * d, 1.0),)
        object.__setattr__(self, "kernel_derivs", _sym_from(derivs))
        object.__setattr__(self, "ell", float(self.ell))
        if self.ell <= 0:
            raise ValueError("ell must be positive")


def second_order_op(d: int, cutoff_width: float = 1.0) -> OperatorSpec:
    """The Laplacian: P(i*lambda) = -|lambda|^2, order 2."""
    sym = [(tuple(2 * (i == j) for i in range(d)), 1.0) for j in range(d)]
    return OperatorSpec(symbol=tuple(sym), ell=2.0,
                        cutoff_width=cutoff_width)


def fourth_order_op(d: int, cutoff_width: float = 1.0) -> OperatorSpec:
    """Minus the bi-Laplacian: P(i*lambda) = -|lambda|^4, order 4."""
    sym = []
    for j in range(d):
        sym.append((tuple(4 * (i == j) for i in range(d)), -1.0))
    for a in range(d):
        for b in range(a + 1, d):
            sym.append((tuple(2 * (i in (a, b)) for i in range(d)), -2.0))
    return OperatorSpec(symbol=tuple(sym), ell=4.0,
                        cutoff_width=cutoff_width)


@dataclass(frozen=True)
class QuadratureSpec:
    """Composite Gauss-Legendre over dyadic time blocks."""

    nodes_per_block: int = 12
    extra_depth: int = 2
    check_nodes: int = 18
    tol: float = 1e-10


@lru_cache(maxsize=None)
def _leggauss(n: int):
    return np.polynomial.legendre.leggauss(n)


class OperatorContext:
    """Grid-bound spectral operators with cached multipliers."""

    def __init__(self, grid: GridSpec, op: OperatorSpec,
                 quad: QuadratureSpec | None = None):
        self.grid = grid
        self.op = op
        self.quad = quad or QuadratureSpec()
        if len(op.symbol[0][0]) != grid.d:
            raise ValueError("operator dimension does not match grid")
        self._lam = grid.freq_mesh()
        self._ilam_pow = {}
        self.P = self._eval_poly(op.symbol)
        if np.max(np.abs(self.P.imag)) > 1e-12 * max(
                1.0, np.max(np.abs(self.P.real))):
            raise ValueError("operator symbol is not real on the lattice")
        self.P = self.P.real
        self._check_ellipticity()
        self._chi_hat = self._make_chi_hat()
        self._S = None
        self._kernel_mult = {}

    # multiplier building blocks -----------------------------------------

    def i_lambda_pow(self, k):
        k = tuple(int(x) for x in k)
        out = self._ilam_pow.get(k)
        if out is None:
            out = np.ones(self.grid.sizes, dtype=complex)
            for lam, kj in zip(self._lam, k):
                if kj:
                    out = out * (1j * lam) ** kj
            self._ilam_pow[k] = out
        return out

    def _eval_poly(self, entries):
        out = np.zeros(self.grid.sizes, dtype=complex)
        for k, c in entries:
            out = out + c * self.i_lambda_pow(k)
        return out

    def scaled_freq_sq(self):
        """The anisotropic frequency weight sum_j |lambda_j|^(2/s_j)."""
        out = np.zeros(self.grid.sizes)
        for lam, s in zip(self._lam, self.grid.scaling):
            out = out + np.abs(lam) ** (2.0 / s)
        return out

    def _check_ellipticity(self):
        ns = self.scaled_freq_sq() ** 0.5
        nonzero = ns > 0
        ratio = self.P[nonzero] / ns[nonzero] ** self.op.ell
        worst = float(np.max(ratio))
        if worst >= 0:
            raise ValueError(
                f"ellipticity fails on the frequency lattice (max ratio "
                f"{worst:.3e} >= 0)")
        self.ellipticity_delta = -worst

    def _make_chi_hat(self):
        sigma = self.op.cutoff_width * 2.0 * np.pi / max(self.grid.period)
        return np.exp(-self.scaled_freq_sq() / (2.0 * sigma ** 2))

    @property
    def chi_hat(self):
        return self._chi_hat

    # transforms ---------------------------------------------------------

    def apply_multiplier(self, f, mult):
        return np.fft.ifftn(np.fft.fftn(f) * mult).real

    def derivative(self, f, k):
        if not any(k):
            return f
        return self.apply_multiplier(f, self.i_lambda_pow(k))

    def heat_multiplier(self, t: float, k=None):
        mult = np.exp(t * self.P)
        if k is not None and any(k):
            mult = mult * self.i_lambda_pow(k)
        return mult

    def heat_apply(self, f, t: float, k=None):
        if t <= 0:
            raise ValueError("heat time must be positive")
        return self.apply_multiplier(f, self.heat_multiplier(t, k))

    # time-integrated kernel ---------------------------------------------

    def _block_depth(self) -> int:
        pmax = float(np.max(np.abs(self.P)))
        return max(1, math.ceil(math.log2(max(pmax, 1.0)))) \
            + self.quad.extra_depth

    def _time_integral(self, nodes: int):
        """int_0^1 exp(t P) dt by Gauss-Legendre over dyadic blocks."""
        x, w = _leggauss(nodes)
        J = self._block_depth()
        total = np.zeros(self.grid.sizes)
        blocks = [(0.0, 2.0 ** -J)]
        blocks += [(2.0 ** (-j - 1), 2.0 ** -j) for j in range(J)]
        for a, b in blocks:
            half = 0.5 * (b - a)
            mid = 0.5 * (b + a)
            for xi, wi in zip(x, w):
                total = total + (half * wi) * np.exp((mid + half * xi)
                                                     * self.P)
        return total

    def time_integral(self):
        """Cached S(lambda) = int_0^1 exp(t P(i lambda)) dt."""
        if self._S is None:
            S = self._time_integral(self.quad.nodes_per_block)
            check = self._time_integral(self.quad.check_nodes)
            err = float(np.max(np.abs(S - check))
                        / max(1.0, float(np.max(np.abs(check)))))
            if err > self.quad.tol:
                raise QuadratureError(
                    f"time quadrature self-check disagrees by {err:.3e}")
            self.quad_self_check = err
            self._S = S
        return self._S

    def time_integral_reference(self):
        """Closed form (exp(P) - 1)/P per mode; independent reference."""
        P = self.P
        out = np.ones_like(P)
        nz = P != 0
        out[nz] = np.expm1(P[nz]) / P[nz]
        return out

    def kernel_multiplier(self, k):
        k = tuple(int(x) for x in k)
        mult = self._kernel_mult.get(k)
        if mult is None:
            B = self._eval_poly(self.op.kernel_derivs)
            mult = ((1.0 - self._chi_hat) * B * self.i_lambda_pow(k)
                    * self.time_integral())
            self._kernel_mult[k] = mult
        return mult

    def kernel_apply(self, f, k=None):
        """The integrated kernel: d^k int_0^1 (1-chi)(d) B(d) Q_t f dt.

        Annihilates the constant mode exactly."""
        if k is None:
            k = (0,) * self.grid.d
        return self.apply_multiplier(f, self.kernel_multiplier(k))

    # mollification ------------------------------------------------------

    def mollify_multiplier(self, n: int):
        return np.exp(-self.scaled_freq_sq() * (0.5 * 4.0 ** (-n)))

    def mollify(self, f, n: int):
        """Convolve with the scale-2^(-n) Gaussian mollifier."""
        return self.apply_multiplier(f, self.mollify_multiplier(n))
