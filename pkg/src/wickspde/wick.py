"""Hermite polynomials with variance parameter, Wick powers and the renormalisation constant."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .errors import CapacityError, ConfigurationError, PreconditionError
from .field import (
    FourierField,
    TWO_PI_SQ,
    coeffs_to_grid,
    grid_to_coeffs,
    layout,
    min_grid_size,
    n_annuli,
)

# largest integer every float64 represents exactly
_EXACT_LIMIT = 2**53


def hermite(m: int, x, C: float):
    """H_m(x; C) via the three-term recursion H_{j+1} = x H_j - j C H_{j-1}."""
    if m < 0:
        raise PreconditionError(f"degree must be >= 0, got {m}")
    if C < 0:
        raise PreconditionError(f"variance must be >= 0, got {C}")
    x = np.asarray(x, dtype=float) if not np.iscomplexobj(x) else np.asarray(x)
    h_prev = np.ones_like(x)
    if m == 0:
        return h_prev if h_prev.ndim else float(h_prev)
    h = x.copy()
    for j in range(1, m):
        h, h_prev = x * h - j * C * h_prev, h
    return h if h.ndim else float(h)


def hermite_all(m_max: int, x, C) -> list:
    """[H_0(x; C), ..., H_{m_max}(x; C)]; ``C`` may broadcast against ``x``."""
    x = np.asarray(x)
    out = [np.ones_like(x, dtype=float)]
    if m_max >= 1:
        out.append(x.astype(float, copy=True))
    for j in range(1, m_max):
        out.append(x * out[j] - j * C * out[j - 1])
    return out


@dataclass(frozen=True)
class HermiteCoefficients:
    """Change of basis between H_n(.; C) and monomials.

    H_n(x; C) = sum_l a[l] C^l x^(n - 2l)   and   x^n = sum_l b[l] C^l H_(n-2l)(x; C).
    """

    n: int
    a: tuple
    b: tuple


def hermite_coeffs(n: int) -> HermiteCoefficients:
    if n < 0:
        raise PreconditionError(f"degree must be >= 0, got {n}")
    b = []
    for ell in range(n // 2 + 1):
        val = math.factorial(n) // (2**ell * math.factorial(ell) * math.factorial(n - 2 * ell))
        if val > _EXACT_LIMIT:
            raise CapacityError(
                f"Hermite coefficient of degree {n} exceeds the exact float range"
            )
        b.append(val)
    a = tuple((-1) ** ell * v for ell, v in enumerate(b))
    return HermiteCoefficients(n, a, tuple(b))


def hermite_expanded(n: int, x, C: float):
    """H_n(x; C) summed from the explicit coefficients (reference path)."""
    coeffs = hermite_coeffs(n)
    x = np.asarray(x, dtype=float)
    return sum(a * C**ell * x ** (n - 2 * ell) for ell, a in enumerate(coeffs.a))


def monomials_to_hermite(poly: Sequence, C) -> list:
    """Rewrite sum_j p[j] x^j as sum_j h[j] H_j(x; C).

    Exact when ``poly`` and ``C`` are ints or Fractions.
    """
    deg = len(poly) - 1
    out = [0] * (deg + 1)
    for j, pj in enumerate(poly):
        if pj == 0:
            continue
        for ell, b in enumerate(hermite_coeffs(j).b):
            out[j - 2 * ell] += pj * b * C**ell
    return out


def hermite_to_monomials(herm: Sequence, C) -> list:
    """Inverse of :func:`monomials_to_hermite`."""
    deg = len(herm) - 1
    out = [0] * (deg + 1)
    for j, hj in enumerate(herm):
        if hj == 0:
            continue
        for ell, a in enumerate(hermite_coeffs(j).a):
            out[j - 2 * ell] += hj * a * C**ell
    return out


# --------------------------------------------------------------------------
# renormalisation constant
# --------------------------------------------------------------------------


def mode_variances(N: int, sigma: float) -> np.ndarray:
    """Stationary variances v_k = sigma^2 / (2 (mu_k + 1)) on the (2N+1)^2 square (0 off-ball)."""
    lay = layout(N, 2 * N + 1)
    return np.where(lay.ball, sigma**2 / (2.0 * (lay.mu + 1.0)), 0.0)


def annulus_sums(table: np.ndarray) -> np.ndarray:
    """Sum a per-mode table over each annulus A_q."""
    N = (table.shape[-1] - 1) // 2
    lay = layout(N, 2 * N + 1)
    return np.bincount(lay.annulus[lay.ball], weights=table[lay.ball], minlength=lay.n_annuli)


@dataclass(frozen=True)
class RenormConstant:
    N: int
    sigma: float
    value: float
    annulus_variances: tuple  # c_q for q = 0 .. n_annuli(N) - 1

    def mode_table(self) -> np.ndarray:
        """Per-mode v_k on the (2N+1)^2 square; materialised on demand."""
        return mode_variances(self.N, self.sigma)

    def mode_rows(self):
        """Rows (k1, k2, mu_k, v_k) over the l1 ball, in row-major k order."""
        lay = layout(self.N, 2 * self.N + 1)
        v = self.mode_table()
        sel = lay.ball
        return np.column_stack([lay.k1[sel], lay.k2[sel], lay.mu[sel], v[sel]])


def renorm_constant(N: int, sigma: float) -> RenormConstant:
    """C_N = sum_{|k|_1 <= N} sigma^2 / (2 (mu_k + 1)) and its annulus split c_q.

    Summed row by row so that large cutoffs (N ~ 4096) stay within memory.
    """
    if N < 0 or sigma < 0:
        raise PreconditionError("need N >= 0 and sigma >= 0")
    Q = n_annuli(N)
    cq = np.zeros(Q)
    s2 = float(sigma) ** 2
    for k1 in range(-N, N + 1):
        r = N - abs(k1)
        k2 = np.arange(-r, r + 1)
        v = s2 / (2.0 * (TWO_PI_SQ * (k1 * k1 + k2 * k2) + 1.0))
        l1 = abs(k1) + np.abs(k2)
        _, q = np.frexp(l1.astype(float))
        cq += np.bincount(q, weights=v, minlength=Q)
    # summing the annulus totals reproduces the value exactly by construction
    return RenormConstant(N, float(sigma), float(cq.sum()), tuple(float(c) for c in cq))


# --------------------------------------------------------------------------
# Wick powers of fields
# --------------------------------------------------------------------------


def _check_grid(M: int, N: int, degree: int):
    need = min_grid_size(N, degree)
    if M < need:
        raise ConfigurationError(
            f"grid size M={M} is not alias-free for degree {degree} at cutoff N={N} (need M >= {need})"
        )


def wick_power_coeffs(coeffs: np.ndarray, m: int, C, M: int, cutoff: int | None = None) -> np.ndarray:
    """Batch version of :func:`wick_power_field`; ``C`` may be per-batch."""
    N = (coeffs.shape[-1] - 1) // 2
    out_N = N if cutoff is None else cutoff
    # need (m + 1) max(N, out_N)-ish: products up to mN must not alias onto |k| <= out_N
    need = m * N + out_N + 1
    if M < max(need, 2 * out_N + 1):
        raise ConfigurationError(
            f"grid size M={M} is not alias-free for degree {m} (need M >= {max(need, 2 * out_N + 1)})"
        )
    if m == 0:
        out = np.zeros(coeffs.shape[:-2] + (2 * out_N + 1,) * 2, dtype=complex)
        out[..., out_N, out_N] = 1.0
        return out
    g = coeffs_to_grid(coeffs, M)
    Cb = np.asarray(C, dtype=float)[..., None, None]
    return grid_to_coeffs(hermite_all(m, g, Cb)[m], out_N)


def wick_power_field(field: FourierField, m: int, C: float, cutoff: int | None = None) -> FourierField:
    """:phi^m: = H_m(phi; C) evaluated pointwise on the grid, truncated to ``cutoff`` (default N)."""
    out_N = field.N if cutoff is None else cutoff
    c = wick_power_coeffs(field.coeffs, m, C, field.M, out_N)
    return FourierField(c, max(field.M, 2 * out_N + 1), check=False)


def wick_binomial(n: int, x, y, C1: float, C2: float):
    """Right-hand side of H_n(x + y; C1 + C2) = sum_m binom(n, m) H_m(x; C1) H_(n-m)(y; C2)."""
    hx = hermite_all(n, x, C1)
    hy = hermite_all(n, y, C2)
    return sum(math.comb(n, m) * hx[m] * hy[n - m] for m in range(n + 1))


def multi_indices(m: int, Q: int) -> Iterator[tuple]:
    """All (n_0, ..., n_{Q-1}) with nonnegative entries summing to m."""
    for cut in itertools.combinations(range(m + Q - 1), Q - 1):
        prev = -1
        out = []
        for c in cut + (m + Q - 1,):
            out.append(c - prev - 1)
            prev = c
        yield tuple(out)


def multinomial_weight(hbn: Sequence[int]) -> int:
    m = sum(hbn)
    w = math.factorial(m)
    for n in hbn:
        w //= math.factorial(n)
    return w


def wick_multinomial_blocks(
    field: FourierField, m: int, variances: Sequence[float], C: float | None = None,
    cutoff: int | None = None,
) -> FourierField:
    """:phi^m: as sum over |n| = m of m!/n! prod_q H_{n_q}(delta_q phi; c_q).

    ``variances`` holds one c_q per annulus of the field.  If ``C`` is given the
    table must sum to it within 1e-12.
    """
    cq = np.asarray(variances, dtype=float)
    Q = field.layout.n_annuli
    if cq.shape != (Q,):
        raise PreconditionError(f"expected {Q} annulus variances, got {cq.shape}")
    if C is not None and abs(cq.sum() - C) > 1e-12 * max(1.0, abs(C)):
        raise PreconditionError(f"annulus variances sum to {cq.sum()!r}, not C={C!r}")
    out_N = field.N if cutoff is None else cutoff
    M = field.M
    need = m * field.N + out_N + 1
    if M < need:
        raise ConfigurationError(f"grid size M={M} is not alias-free for degree {m} (need M >= {need})")
    block_grids = [coeffs_to_grid(b.coeffs, M) for b in field.blocks()]
    powers = [hermite_all(m, g, c) for g, c in zip(block_grids, cq)]
    total = np.zeros((M, M))
    for hbn in multi_indices(m, Q):
        term = np.full((M, M), float(multinomial_weight(hbn)))
        for q, n in enumerate(hbn):
            if n:
                term = term * powers[q][n]
        total += term
    return FourierField(grid_to_coeffs(total, out_N), max(M, 2 * out_N + 1), check=False)


# --------------------------------------------------------------------------
# Monte Carlo moment checks
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class MonteCarloEstimate:
    estimate: float
    stderr: float
    samples: int

    def zscore(self, target: float) -> float:
        if self.stderr == 0.0:
            return 0.0 if self.estimate == target else math.inf
        return (self.estimate - target) / self.stderr

    @classmethod
    def from_samples(cls, values) -> "MonteCarloEstimate":
        v = np.asarray(values, dtype=float)
        n = v.size
        return cls(float(v.mean()), float(v.std(ddof=1) / np.sqrt(n)) if n > 1 else math.inf, n)


def wick_moment_mc(n: int, m: int, corr: float, C1: float, C2: float, samples: int,
                   rng: np.random.Generator) -> MonteCarloEstimate:
    """Monte Carlo estimate of E[H_n(X; C1) H_m(Y; C2)] for jointly Gaussian (X, Y).

    The exact value is n! corr^n if n == m and 0 otherwise.
    """
    if C1 < 0 or C2 < 0 or corr * corr > C1 * C2 * (1 + 1e-12):
        raise PreconditionError("invalid covariance: need |corr| <= sqrt(C1 C2)")
    if samples < 10_000:
        raise PreconditionError("at least 10^4 samples are required")
    cov = np.array([[C1, corr], [corr, C2]])
    xy = rng.multivariate_normal(np.zeros(2), cov, size=samples, method="eigh")
    vals = hermite(n, xy[:, 0], C1) * hermite(m, xy[:, 1], C2)
    return MonteCarloEstimate.from_samples(vals)


def exact_wick_moment(n: int, m: int, corr: float) -> float:
    return float(math.factorial(n) * corr**n) if n == m else 0.0


def fraction_roundtrip_identity(n: int, C=Fraction(3, 7)) -> bool:
    """Monomial -> Hermite -> monomial is the identity in exact arithmetic, for all degrees <= n."""
    for j in range(n + 1):
        poly = [0] * j + [1]
        if hermite_to_monomials(monomials_to_hermite(poly, C), C) != poly:
            return False
    return True
