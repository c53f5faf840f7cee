"""Truncated Fourier fields on the torus T^2 = (R/Z)^2.

Coefficients are stored on the square [-N, N]^2 (array index ``[k1 + N, k2 + N]``)
and masked to the l1 ball ``|k1| + |k2| <= N``.  Two size measures coexist and
must not be confused:

* ``|k| = |k1| + |k2|`` (l1) selects the cutoff and the dyadic annuli;
* ``||k||^2 = k1^2 + k2^2`` (Euclidean) enters the Laplacian eigenvalues
  ``mu_k = (2 pi)^2 ||k||^2``.

A physical grid of ``M x M`` points ``x_j = j / M`` is used for pointwise work.
Degree-``d`` products are alias-free after truncation to the cutoff as long as
``M >= (d + 1) N + 1``; see :func:`min_grid_size`.

Most functions come in two flavours: methods on :class:`FourierField` for a
single field, and array functions acting on batches of shape ``(..., 2N+1, 2N+1)``
which the Monte Carlo code uses.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np
import scipy.fft as sfft

from .errors import ConfigurationError, NumericError, PreconditionError

TWO_PI_SQ = (2.0 * np.pi) ** 2


@dataclass(frozen=True)
class ModeIndex:
    k1: int
    k2: int

    @property
    def l1(self) -> int:
        return abs(self.k1) + abs(self.k2)

    @property
    def norm_sq(self) -> int:
        return self.k1 * self.k1 + self.k2 * self.k2

    @property
    def mu(self) -> float:
        """Laplacian eigenvalue magnitude (2 pi)^2 ||k||^2."""
        return TWO_PI_SQ * self.norm_sq

    @property
    def annulus(self) -> int:
        return annulus_index(self.l1)

    def __neg__(self) -> "ModeIndex":
        return ModeIndex(-self.k1, -self.k2)


def annulus_index(l1: int) -> int:
    """Index q of the dyadic annulus containing a mode of l1 size ``l1``.

    A_0 = {0} and A_q = {2^(q-1) <= |k| < 2^q}, i.e. q is the bit length of |k|.
    """
    return int(l1).bit_length()


def n_annuli(N: int) -> int:
    """Number of annuli meeting the l1 ball of radius N (q = 0 .. bitlen(N))."""
    return annulus_index(N) + 1


def min_grid_size(N: int, degree: int = 1) -> int:
    return (degree + 1) * N + 1


def default_grid_size(N: int, degree: int = 1) -> int:
    return sfft.next_fast_len(min_grid_size(N, degree), real=True)


@dataclass(frozen=True, eq=False)
class SpectralLayout:
    """Index bookkeeping for a cutoff N on an M x M grid (shared, read-only)."""

    N: int
    M: int
    k1: np.ndarray
    k2: np.ndarray
    l1: np.ndarray
    norm_sq: np.ndarray
    mu: np.ndarray
    ball: np.ndarray
    annulus: np.ndarray
    half: tuple  # index arrays of a half-plane representative set (k != 0)
    neg_half: tuple

    @property
    def shape(self) -> tuple:
        return (2 * self.N + 1, 2 * self.N + 1)

    @property
    def n_annuli(self) -> int:
        return n_annuli(self.N)

    def annulus_mask(self, q: int) -> np.ndarray:
        return self.ball & (self.annulus == q)

    def index(self, k1: int, k2: int) -> tuple:
        return (k1 + self.N, k2 + self.N)


@functools.lru_cache(maxsize=64)
def layout(N: int, M: int | None = None) -> SpectralLayout:
    if N < 0:
        raise ConfigurationError(f"cutoff N must be nonnegative, got {N}")
    if M is None:
        M = default_grid_size(N)
    if M < 2 * N + 1:
        raise ConfigurationError(
            f"grid size M={M} cannot represent cutoff N={N} (need M >= {2 * N + 1})"
        )
    ks = np.arange(-N, N + 1)
    k1, k2 = np.meshgrid(ks, ks, indexing="ij")
    l1 = np.abs(k1) + np.abs(k2)
    norm_sq = k1 * k1 + k2 * k2
    _, expo = np.frexp(l1.astype(float))
    annulus = expo.astype(int)
    ball = l1 <= N
    half_mask = ball & ((k1 > 0) | ((k1 == 0) & (k2 > 0)))
    hi, hj = np.nonzero(half_mask)
    neg = (2 * N - hi, 2 * N - hj)
    for arr in (k1, k2, l1, norm_sq, annulus, ball):
        arr.setflags(write=False)
    mu = TWO_PI_SQ * norm_sq
    mu.setflags(write=False)
    return SpectralLayout(N, M, k1, k2, l1, norm_sq, mu, ball, annulus, (hi, hj), neg)


# --------------------------------------------------------------------------
# batch transforms
# --------------------------------------------------------------------------


def coeffs_to_grid(coeffs: np.ndarray, M: int) -> np.ndarray:
    """Evaluate sum_k c_k e_k(x) on the M x M grid; works on batches."""
    coeffs = np.asarray(coeffs)
    N = (coeffs.shape[-1] - 1) // 2
    if M < 2 * N + 1:
        raise ConfigurationError(f"grid size M={M} too small for cutoff N={N}")
    half = np.zeros(coeffs.shape[:-2] + (M, M // 2 + 1), dtype=complex)
    rows = np.arange(-N, N + 1) % M
    half[..., rows, : N + 1] = coeffs[..., :, N:]
    return sfft.irfft2(half, s=(M, M), axes=(-2, -1)) * (M * M)


def grid_to_coeffs(values: np.ndarray, N: int) -> np.ndarray:
    """Fourier coefficients |k| <= N of a real grid function (batch aware)."""
    values = np.asarray(values, dtype=float)
    M = values.shape[-1]
    if values.shape[-2] != M:
        raise ConfigurationError("grid must be square")
    if M < 2 * N + 1:
        raise ConfigurationError(f"grid size M={M} too small for cutoff N={N}")
    spec = sfft.rfft2(values, axes=(-2, -1)) / (M * M)
    ks = np.arange(-N, N + 1)
    out = np.empty(values.shape[:-2] + (2 * N + 1, 2 * N + 1), dtype=complex)
    out[..., :, N:] = spec[..., (ks % M)[:, None], np.arange(N + 1)[None, :]]
    # negative k2 from the conjugate of (-k1, -k2)
    out[..., :, :N] = np.conj(
        spec[..., ((-ks) % M)[:, None], np.arange(N, 0, -1)[None, :]]
    )
    out *= layout(N, max(M, 2 * N + 1)).ball
    return out


def truncate(coeffs: np.ndarray, N_new: int) -> np.ndarray:
    """Galerkin projection P_{N_new} of a coefficient array (batch aware)."""
    N = (coeffs.shape[-1] - 1) // 2
    if N_new > N:
        out = np.zeros(coeffs.shape[:-2] + (2 * N_new + 1,) * 2, dtype=complex)
        d = N_new - N
        out[..., d : d + 2 * N + 1, d : d + 2 * N + 1] = coeffs
        return out
    d = N - N_new
    out = coeffs[..., d : d + 2 * N_new + 1, d : d + 2 * N_new + 1].copy()
    return out * layout(N_new, 2 * N_new + 1).ball


def block_l2_norms(coeffs: np.ndarray, n_blocks: int | None = None) -> np.ndarray:
    """L^2 norms of all annulus projections via Parseval; shape (..., n_blocks)."""
    N = (coeffs.shape[-1] - 1) // 2
    lay = layout(N, 2 * N + 1)
    Q = lay.n_annuli if n_blocks is None else n_blocks
    power = np.abs(coeffs) ** 2
    flat = power.reshape(power.shape[:-2] + (-1,))
    idx = lay.annulus.ravel()
    out = np.zeros(power.shape[:-2] + (Q,))
    for q in range(min(Q, lay.n_annuli)):
        sel = idx == q
        out[..., q] = flat[..., sel].sum(axis=-1)
    return np.sqrt(out)


def block_sup_norms(coeffs: np.ndarray, M: int, n_blocks: int | None = None) -> np.ndarray:
    """Grid maxima of |delta_q phi| for all annuli; shape (..., n_blocks)."""
    N = (coeffs.shape[-1] - 1) // 2
    lay = layout(N, M)
    Q = lay.n_annuli if n_blocks is None else n_blocks
    out = np.zeros(coeffs.shape[:-2] + (Q,))
    for q in range(min(Q, lay.n_annuli)):
        g = coeffs_to_grid(coeffs * lay.annulus_mask(q), M)
        out[..., q] = np.abs(g).max(axis=(-2, -1))
    return out


def block_lp_norms(coeffs: np.ndarray, p: float, M: int) -> np.ndarray:
    """L^p norms of annulus blocks by grid quadrature (p = inf: grid max)."""
    if np.isinf(p):
        return block_sup_norms(coeffs, M)
    N = (coeffs.shape[-1] - 1) // 2
    lay = layout(N, M)
    out = np.zeros(coeffs.shape[:-2] + (lay.n_annuli,))
    for q in range(lay.n_annuli):
        g = coeffs_to_grid(coeffs * lay.annulus_mask(q), M)
        out[..., q] = np.mean(np.abs(g) ** p, axis=(-2, -1)) ** (1.0 / p)
    return out


def besov_from_blocks(blocks: np.ndarray, alpha: float, r: float = np.inf) -> np.ndarray:
    """Aggregate block norms ||delta_q phi|| into the B^alpha_{p,r} norm."""
    q = np.arange(blocks.shape[-1])
    weighted = blocks * 2.0 ** (alpha * q)
    if np.isinf(r):
        return weighted.max(axis=-1)
    return np.sum(weighted**r, axis=-1) ** (1.0 / r)


def _check_exponent(name, value, lo=1.0):
    if not (value >= lo):
        raise PreconditionError(f"{name} must lie in [{lo}, inf], got {value}")


# --------------------------------------------------------------------------
# FourierField
# --------------------------------------------------------------------------


class FourierField:
    """A real field given by its Fourier coefficients with |k| <= N.

    Instances are immutable: the coefficient array is copied and frozen.
    """

    __slots__ = ("_coeffs", "N", "M")

    def __init__(self, coeffs, grid_size: int | None = None, *, check: bool = True):
        c = np.array(coeffs, dtype=complex)
        if c.ndim != 2 or c.shape[0] != c.shape[1] or c.shape[0] % 2 == 0:
            raise ConfigurationError(f"coefficient array must be (2N+1, 2N+1), got {c.shape}")
        N = (c.shape[0] - 1) // 2
        M = default_grid_size(N) if grid_size is None else int(grid_size)
        lay = layout(N, M)
        if check:
            if not np.all(np.isfinite(c)):
                raise NumericError("non-finite Fourier coefficients")
            scale = max(1.0, float(np.abs(c).max(initial=0.0)))
            if np.abs(c[~lay.ball]).max(initial=0.0) > 1e-12 * scale:
                raise PreconditionError("coefficients outside the l1 ball |k| <= N")
            if np.abs(c - np.conj(c[::-1, ::-1])).max(initial=0.0) > 1e-10 * scale:
                raise PreconditionError("reality condition c(-k) = conj(c(k)) violated")
        c = c * lay.ball
        # symmetrise exactly so that grid values are real to rounding
        c = 0.5 * (c + np.conj(c[::-1, ::-1]))
        c.setflags(write=False)
        self._coeffs = c
        self.N = N
        self.M = M

    # construction ----------------------------------------------------------
    @classmethod
    def zeros(cls, N: int, M: int | None = None) -> "FourierField":
        return cls(np.zeros((2 * N + 1, 2 * N + 1)), M, check=False)

    @classmethod
    def constant(cls, value: float, N: int, M: int | None = None) -> "FourierField":
        c = np.zeros((2 * N + 1, 2 * N + 1), dtype=complex)
        c[N, N] = value
        return cls(c, M, check=False)

    @classmethod
    def from_modes(cls, modes: Mapping, N: int, M: int | None = None) -> "FourierField":
        """Build from ``{(k1, k2): c}``; conjugate partners are filled in."""
        c = np.zeros((2 * N + 1, 2 * N + 1), dtype=complex)
        for (k1, k2), val in modes.items():
            if abs(k1) + abs(k2) > N:
                raise PreconditionError(f"mode {(k1, k2)} outside cutoff N={N}")
            c[k1 + N, k2 + N] = val
            if (k1, k2) != (0, 0) and (-k1, -k2) not in modes:
                c[-k1 + N, -k2 + N] = np.conj(val)
        return cls(c, M)

    @classmethod
    def random(cls, N: int, rng: np.random.Generator, M: int | None = None,
               decay: float = 0.0) -> "FourierField":
        """Random real field with coefficient scale (1 + |k|)^(-decay)."""
        lay = layout(N, default_grid_size(N) if M is None else M)
        z = rng.standard_normal(lay.shape) + 1j * rng.standard_normal(lay.shape)
        z = z * (1.0 + lay.l1) ** (-decay) * lay.ball
        z = 0.5 * (z + np.conj(z[::-1, ::-1]))
        return cls(z, lay.M, check=False)

    @classmethod
    def from_grid(cls, values, N: int) -> "FourierField":
        values = np.asarray(values, dtype=float)
        if not np.all(np.isfinite(values)):
            raise NumericError("non-finite grid values")
        return cls(grid_to_coeffs(values, N), values.shape[-1], check=False)

    # accessors -------------------------------------------------------------
    @property
    def coeffs(self) -> np.ndarray:
        return self._coeffs

    @property
    def layout(self) -> SpectralLayout:
        return layout(self.N, self.M)

    def coeff(self, k1: int, k2: int) -> complex:
        if abs(k1) + abs(k2) > self.N:
            return 0j
        return complex(self._coeffs[k1 + self.N, k2 + self.N])

    def with_grid_size(self, M: int) -> "FourierField":
        return FourierField(self._coeffs, M, check=False)

    def __add__(self, other: "FourierField") -> "FourierField":
        N = max(self.N, other.N)
        c = truncate(self._coeffs, N) + truncate(other._coeffs, N)
        return FourierField(c, max(self.M, other.M), check=False)

    def __sub__(self, other: "FourierField") -> "FourierField":
        return self + (-1.0) * other

    def __mul__(self, scalar: float) -> "FourierField":
        return FourierField(self._coeffs * float(scalar), self.M, check=False)

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"FourierField(N={self.N}, M={self.M}, L2={self.l2_norm():.6g})"

    # transforms ------------------------------------------------------------
    def to_grid(self, M: int | None = None) -> np.ndarray:
        return coeffs_to_grid(self._coeffs, self.M if M is None else M)

    def project(self, N_new: int) -> "FourierField":
        """Galerkin projection P_{N_new} (keeps the cutoff geometry of N_new)."""
        M = max(self.M, 2 * N_new + 1)
        return FourierField(truncate(self._coeffs, N_new), M, check=False)

    def annulus_project(self, q: int) -> "FourierField":
        if q < 0:
            raise PreconditionError(f"annulus index must be >= 0, got {q}")
        return FourierField(self._coeffs * self.layout.annulus_mask(q), self.M, check=False)

    def blocks(self) -> list:
        return [self.annulus_project(q) for q in range(self.layout.n_annuli)]

    # norms -----------------------------------------------------------------
    def l2_norm(self) -> float:
        return float(np.sqrt(np.sum(np.abs(self._coeffs) ** 2)))

    def lp_norm(self, p: float) -> float:
        _check_exponent("p", p)
        g = self.to_grid()
        if np.isinf(p):
            return float(np.abs(g).max())
        return float(np.mean(np.abs(g) ** p) ** (1.0 / p))

    def besov_norm(self, alpha: float, p: float = 2.0, r: float = np.inf) -> float:
        """B^alpha_{p,r} norm: l^r aggregation over q of 2^(q alpha) ||delta_q phi||_{L^p}.

        Block L^p norms use grid quadrature (mean of |.|^p over the M x M grid)
        or the grid maximum for p = inf.  For p = 2 the quadrature is exact
        (discrete Parseval); for other finite p the error is O(M^-2).
        """
        _check_exponent("p", p)
        _check_exponent("r", r)
        if not np.all(np.isfinite(self._coeffs)):
            raise NumericError("non-finite field")
        blocks = block_lp_norms(self._coeffs, p, self.M)
        return float(besov_from_blocks(blocks, alpha, r))

    def holder_norm(self, alpha: float) -> float:
        """C^alpha = B^alpha_{inf,inf}."""
        return self.besov_norm(alpha, np.inf, np.inf)

    def sobolev_norm(self, s: float) -> float:
        """H^s = B^s_{2,2}, evaluated from coefficients."""
        lay = self.layout
        weights = 2.0 ** (2 * s * lay.annulus)
        return float(np.sqrt(np.sum(weights * np.abs(self._coeffs) ** 2)))

    def h1_norm(self) -> float:
        """(sum_k (1 + (2 pi)^2 ||k||^2) |phi_k|^2)^(1/2).

        Equivalent to the dyadic B^1_{2,2} norm: for q >= 1 the ratio of the weights
        (1 + mu_k) / 2^(2q) lies in [pi^2 / 2, 1 + 4 pi^2], hence
        ``besov_norm(1, 2, 2) <= h1_norm() <= sqrt(1 + 4 pi^2) * besov_norm(1, 2, 2)``.
        """
        return float(np.sqrt(np.sum((1.0 + self.layout.mu) * np.abs(self._coeffs) ** 2)))

    def max_imag_on_grid(self) -> float:
        """Largest imaginary part of the complex synthesis (reality diagnostic)."""
        N, M = self.N, self.M
        full = np.zeros((M, M), dtype=complex)
        ks = np.arange(-N, N + 1) % M
        full[np.ix_(ks, ks)] = self._coeffs
        g = sfft.ifft2(full) * (M * M)
        return float(np.abs(g.imag).max())


# --------------------------------------------------------------------------
# scaled test functions
# --------------------------------------------------------------------------

_BUMP_C1 = 1.0 + 16.0 / (3.0 * np.sqrt(3.0))


def unit_bump(x1: np.ndarray, x2: np.ndarray) -> np.ndarray:
    """C^1 bump (1 - 4 r^2)_+^2 supported in the disc r < 1/2, scaled to unit C^1 norm."""
    r2 = x1 * x1 + x2 * x2
    return np.where(r2 < 0.25, (1.0 - 4.0 * r2) ** 2, 0.0) / _BUMP_C1


class ScaledTestFunction:
    """Fourier coefficients of eta^(p)_rho(x) = rho^(-2(1 - 1/p)) eta(x / rho).

    ``eta`` is a callable of centred coordinates in [-1/2, 1/2)^2.  Coefficients
    are obtained by grid quadrature on a fine grid, so that pairing with a field
    equals the fine-grid quadrature of the product.
    """

    def __init__(self, eta: Callable, rho: float, p: float, N: int, quad_size: int | None = None):
        if not (0.0 < rho <= 1.0):
            raise PreconditionError(f"rho must lie in (0, 1], got {rho}")
        if not (p >= 2.0):
            raise PreconditionError(f"p must lie in [2, inf], got {p}")
        if quad_size is None:
            quad_size = max(64, 2 * N + 1, int(2 ** np.ceil(np.log2(32.0 / rho))))
        Mq = int(quad_size)
        x = (np.arange(Mq) / Mq + 0.5) % 1.0 - 0.5  # centred periodic coordinate
        X1, X2 = np.meshgrid(x, x, indexing="ij")
        base = np.asarray(eta(X1, X2), dtype=float)
        edge = (np.abs(X1) >= 0.5) | (np.abs(X2) >= 0.5)
        if np.abs(base[edge]).max(initial=0.0) > 1e-9 * max(1.0, np.abs(base).max()):
            raise PreconditionError("test function is not supported inside the unit cell")
        expo = 0.0 if np.isinf(p) else 1.0 / p
        values = rho ** (-2.0 * (1.0 - expo)) * np.asarray(eta(X1 / rho, X2 / rho), dtype=float)
        self.rho, self.p, self.N, self.quad_size = rho, p, N, Mq
        self.integral = float(values.mean())
        # eta_hat(k) = int eta e_{-k}; pairing <phi, eta> = sum_k phi_k eta_hat(-k)
        hat = grid_to_coeffs(values, N)
        self._weights = hat[::-1, ::-1]

    def pair(self, coeffs: np.ndarray) -> np.ndarray:
        N = (coeffs.shape[-1] - 1) // 2
        w = truncate(self._weights, N) if N != self.N else self._weights
        return np.real(np.sum(coeffs * w, axis=(-2, -1)))


def pair_with_scaled_test(field: FourierField, eta: Callable, rho: float, p: float) -> float:
    """<field, eta^(p)_rho> by grid quadrature."""
    return float(ScaledTestFunction(eta, rho, p, field.N).pair(field.coeffs))
