"""Exact-in-law simulation of the stochastic convolution on T^2.

Each Fourier mode of

    d psi = (1/eps) [Delta psi + a(t) psi] dt + (sigma / sqrt(eps)) dW

is an Ornstein-Uhlenbeck process with rate a_k(t) = -mu_k + a(t).  Transitions
are sampled exactly: the mean factor is exp(alpha_k(t + dt, t) / eps) and the
innovation variance is the integrated variance of the Ito integral.  Complex
modes satisfy psi_{-k} = conj(psi_k) and E|psi_k|^2 = v_k; one complex draw is
made per conjugate pair and the zero mode gets a real draw.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import Chebyshev, Polynomial
from scipy import fft as sfft, integrate, optimize

from . import wick
from .errors import CapacityError, ConfigurationError, PreconditionError
from .field import (
    FourierField,
    coeffs_to_grid,
    default_grid_size,
    grid_to_coeffs,
    layout,
)

# Gauss-Legendre nodes on [0, 1] for the innovation-variance integral
_GL_X, _GL_W = np.polynomial.legendre.leggauss(16)
_GL_X = 0.5 * (_GL_X + 1.0)
_GL_W = 0.5 * _GL_W
_PANEL = 8.0  # largest |c| r per Gauss-Legendre panel
_CUT = 40.0  # e^{-40} is below double precision relative to the integral

_MAX_PARTITION = 10_000_000


class LinearisationPath:
    """A slow-time coefficient a(t) with its antiderivative.

    Built-in families (constant, affine, polynomial, Chebyshev series) integrate
    in closed form; a general callable uses adaptive quadrature with tolerance 1e-10.
    """

    def __init__(self, kind: str, series=None, func: Callable | None = None):
        if kind not in ("constant", "affine", "polynomial", "chebyshev", "callable"):
            raise ConfigurationError(f"unknown linearisation family {kind!r}")
        self.kind = kind
        self._func = func
        self._series = series
        self._anti = None if series is None else series.integ()
        if kind == "callable" and func is None:
            raise ConfigurationError("callable family needs a function")
        if kind != "callable" and series is None:
            raise ConfigurationError(f"{kind} family needs coefficients")

    @classmethod
    def constant(cls, value: float) -> "LinearisationPath":
        return cls("constant", Polynomial([float(value)]))

    @classmethod
    def affine(cls, a0: float, a1: float) -> "LinearisationPath":
        """a(t) = a0 + a1 t."""
        return cls("affine", Polynomial([float(a0), float(a1)]))

    @classmethod
    def polynomial(cls, coeffs: Sequence[float]) -> "LinearisationPath":
        """a(t) = sum_j coeffs[j] t^j."""
        return cls("polynomial", Polynomial([float(c) for c in coeffs]))

    @classmethod
    def from_callable(cls, func: Callable) -> "LinearisationPath":
        return cls("callable", func=func)

    @classmethod
    def interpolate(cls, func: Callable, t0: float, t1: float, degree: int = 24) -> "LinearisationPath":
        """Chebyshev interpolant of a smooth ``func`` on [t0, t1] (closed-form integrals)."""
        series = Chebyshev.interpolate(np.vectorize(func, otypes=[float]), degree, domain=[t0, t1])
        return cls("chebyshev", series)

    def describe(self) -> dict:
        if self._series is None:
            return {"family": "callable"}
        out = {"family": self.kind, "coefficients": [float(c) for c in self._series.coef]}
        if self.kind == "chebyshev":
            out["domain"] = [float(d) for d in self._series.domain]
        return out

    def __call__(self, t):
        if self._series is not None:
            return self._series(t)
        return np.vectorize(self._func, otypes=[float])(t) if np.ndim(t) else float(self._func(t))

    def integral(self, t, t1):
        """int_{t1}^{t} a(s) ds (vectorised over broadcastable t, t1)."""
        if self._anti is not None:
            return self._anti(t) - self._anti(t1)
        t, t1 = np.broadcast_arrays(np.asarray(t, float), np.asarray(t1, float))
        out = np.empty(t.shape)
        for idx in np.ndindex(t.shape):
            out[idx] = integrate.quad(self._func, t1[idx], t[idx], epsabs=1e-10, epsrel=1e-10)[0]
        return out if out.ndim else float(out)

    def _local_integral(self, t_end: float, r: np.ndarray) -> np.ndarray:
        """int_{t_end - r}^{t_end} a for many small r (Gauss-Legendre for callables)."""
        if self._anti is not None:
            return self.integral(t_end, t_end - r)
        s = t_end - r[..., None] * (1.0 - _GL_X)
        return r * (self(s) @ _GL_W)

    def check_stable(self, t_grid, a_minus: float, a_plus: float = np.inf) -> None:
        vals = np.asarray(self(np.asarray(t_grid, float)))
        if np.any(vals > -a_minus) or np.any(vals < -a_plus):
            raise PreconditionError(
                f"a(t) leaves (-{a_plus}, -{a_minus}) on the sampled grid "
                f"(range [{vals.min():.6g}, {vals.max():.6g}])"
            )


@dataclass(frozen=True)
class ConvolutionConfig:
    eps: float
    sigma: float
    N: int
    path: LinearisationPath = dc_field(default_factory=lambda: LinearisationPath.constant(-1.0))
    init: str = "stationary"  # or "zero"
    exclude_zero_mode: bool = False
    M: int | None = None

    def __post_init__(self):
        problems = []
        if not self.eps > 0:
            problems.append("eps must be positive")
        if not self.sigma >= 0:
            problems.append("sigma must be nonnegative")
        if self.N < 0:
            problems.append("N must be nonnegative")
        if self.init not in ("stationary", "zero"):
            problems.append(f"init must be 'stationary' or 'zero', got {self.init!r}")
        if problems:
            raise ConfigurationError("; ".join(problems), problems)

    @property
    def grid_size(self) -> int:
        return default_grid_size(self.N) if self.M is None else self.M


def mode_rates(cfg: ConvolutionConfig) -> np.ndarray:
    """mu_k on the (2N+1)^2 square."""
    return layout(cfg.N, 2 * cfg.N + 1).mu


def stationary_variances(cfg: ConvolutionConfig, t: float = 0.0) -> np.ndarray:
    """E|psi_k|^2 of the frozen-coefficient stationary law sigma^2 / (2 (mu_k - a(t)))."""
    lay = layout(cfg.N, 2 * cfg.N + 1)
    rate = lay.mu - float(cfg.path(t))
    active = lay.ball.copy()
    if cfg.exclude_zero_mode:
        active[cfg.N, cfg.N] = False
    if np.any(rate[active] <= 0):
        raise ConfigurationError("stationary initial law needs mu_k - a(0) > 0 on all active modes")
    return np.where(active, cfg.sigma**2 / (2.0 * np.where(active, rate, 1.0)), 0.0)


@dataclass(frozen=True)
class TransitionFactors:
    """Per-mode mean factor and innovation standard deviation over one step."""

    mean: np.ndarray
    std: np.ndarray


def ou_transition(path: LinearisationPath, eps: float, sigma: float, mu, t: float, dt: float):
    """Mean factor and innovation variance of d x = (1/eps)(-mu + a(t)) x dt + (sigma/sqrt(eps)) dW.

    The innovation variance (sigma^2 / eps) int_0^dt exp(2 alpha(t + dt, t + dt - r) / eps) dr
    is written as int_0^dt e^{-c r} g(r) dr with c = 2 (mu - abar) / eps, abar the
    step average of a, and g(r) = exp(2 (int a - abar r) / eps) smooth.  For constant a,
    g = 1 and the closed form is used.  Otherwise composite Gauss-Legendre panels of
    length at most 8 / |c| resolve e^{-c r}; the range is cut at c r = 40 where the
    integrand is below double precision.  Steps should satisfy |a'| dt^2 << eps so that
    g stays smooth.
    """
    if not dt > 0:
        raise PreconditionError(f"time step must be positive, got {dt}")
    mu = np.asarray(mu, dtype=float)
    A = float(path.integral(t + dt, t))
    abar = A / dt
    mean = np.exp((-mu * dt + A) / eps)
    c = 2.0 * (mu - abar) / eps
    small = np.abs(c * dt) < 1e-10
    c_safe = np.where(small, 1.0, c)
    # (1 - e^{-c dt}) / c with the c -> 0 limit dt
    weight = np.where(small, dt, -np.expm1(-c_safe * dt) / c_safe)
    if path.kind == "constant":
        integral = weight
    else:
        r_max = np.where(c * dt > _CUT, _CUT / np.where(c > 0, c, 1.0), dt)
        n_pan = max(1, int(math.ceil(float(np.max(np.abs(c) * r_max)) / _PANEL)))
        h = r_max / n_pan
        nodes = (np.arange(n_pan)[:, None] + _GL_X[None, :]).ravel()
        r = h[..., None] * nodes
        g = np.exp(2.0 * (path._local_integral(t + dt, r) - abar * r) / eps - c[..., None] * r)
        integral = h * (g @ np.tile(_GL_W, n_pan))
    return mean, sigma**2 / eps * integral


def transition_factors(cfg: ConvolutionConfig, t: float, dt: float) -> TransitionFactors:
    """Exact OU transition over [t, t + dt] for every mode (see :func:`ou_transition`)."""
    lay = layout(cfg.N, 2 * cfg.N + 1)
    mean, var = ou_transition(cfg.path, cfg.eps, cfg.sigma, lay.mu, t, dt)
    active = lay.ball.copy()
    if cfg.exclude_zero_mode:
        active[cfg.N, cfg.N] = False
    return TransitionFactors(np.where(lay.ball, mean, 0.0), np.sqrt(np.where(active, var, 0.0)))


class ConvolutionState:
    """A batch of independent paths of psi together with the exact variance table.

    ``coeffs`` has shape (batch, 2N+1, 2N+1); ``variances`` holds E|psi_k(t)|^2.
    """

    def __init__(self, cfg: ConvolutionConfig, t: float, coeffs: np.ndarray, variances: np.ndarray):
        self.cfg = cfg
        self.t = float(t)
        self.coeffs = coeffs
        self.variances = variances

    @property
    def batch(self) -> int:
        return self.coeffs.shape[0]

    @property
    def N(self) -> int:
        return self.cfg.N

    def wick_variance(self) -> float:
        """Variance parameter of the Wick powers at the current time: sum_k E|psi_k(t)|^2."""
        return float(self.variances.sum())

    def field(self, i: int = 0) -> FourierField:
        return FourierField(self.coeffs[i], self.cfg.grid_size, check=False)

    def copy(self) -> "ConvolutionState":
        return ConvolutionState(self.cfg, self.t, self.coeffs.copy(), self.variances.copy())


def _draw_pairs(N: int, batch: int, rng: np.random.Generator, std: np.ndarray,
                exclude_zero: bool) -> np.ndarray:
    """Centred complex Gaussian noise with E|z_k|^2 = std_k^2 and z_{-k} = conj(z_k)."""
    lay = layout(N, 2 * N + 1)
    hi, hj = lay.half
    ni, nj = lay.neg_half
    n_half = hi.size
    draws = rng.standard_normal((batch, 2 * n_half + 1))
    out = np.zeros((batch, 2 * N + 1, 2 * N + 1), dtype=complex)
    z = (draws[:, :n_half] + 1j * draws[:, n_half : 2 * n_half]) * (std[hi, hj] / np.sqrt(2.0))
    out[:, hi, hj] = z
    out[:, ni, nj] = np.conj(z)
    if not exclude_zero:
        out[:, N, N] = draws[:, -1] * std[N, N]
    return out


def initial_state(cfg: ConvolutionConfig, batch: int, rng: np.random.Generator,
                  t0: float = 0.0) -> ConvolutionState:
    if batch < 1:
        raise ConfigurationError("batch must be >= 1")
    if cfg.init == "zero":
        shape = (batch, 2 * cfg.N + 1, 2 * cfg.N + 1)
        return ConvolutionState(cfg, t0, np.zeros(shape, dtype=complex), np.zeros(shape[1:]))
    var = stationary_variances(cfg, t0)
    coeffs = _draw_pairs(cfg.N, batch, rng, np.sqrt(var), cfg.exclude_zero_mode)
    return ConvolutionState(cfg, t0, coeffs, var)


def stationary_sample(N: int, sigma: float, batch: int, rng: np.random.Generator) -> np.ndarray:
    """Coefficients of independent stationary psi samples (a = -1)."""
    var = wick.mode_variances(N, sigma)
    return _draw_pairs(N, batch, rng, np.sqrt(var), False)


def step_exact(state: ConvolutionState, dt: float, rng: np.random.Generator,
               factors: TransitionFactors | None = None) -> ConvolutionState:
    """Advance every path by the exact OU transition over [t, t + dt].

    ``factors`` may be supplied to reuse a precomputed transition.
    """
    cfg = state.cfg
    if factors is None:
        factors = transition_factors(cfg, state.t, dt)
    noise = _draw_pairs(cfg.N, state.batch, rng, factors.std, cfg.exclude_zero_mode)
    coeffs = state.coeffs * factors.mean + noise
    variances = factors.mean**2 * state.variances + factors.std**2
    return ConvolutionState(cfg, state.t + dt, coeffs, variances)


def exact_variances(cfg: ConvolutionConfig, t: float, v0: np.ndarray | None = None,
                    t0: float = 0.0) -> np.ndarray:
    """E|psi_k(t)|^2 from a given initial table by one exact transition (law is step-free)."""
    if v0 is None:
        v0 = stationary_variances(cfg, t0) if cfg.init == "stationary" else np.zeros((2 * cfg.N + 1,) * 2)
    if t == t0:
        return np.array(v0, dtype=float)
    f = transition_factors(cfg, t0, t - t0)
    return f.mean**2 * v0 + f.std**2


# --------------------------------------------------------------------------
# partition and martingale transform
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Partition:
    gamma0: float
    k0: tuple
    breakpoints: np.ndarray  # u_0 = 0 <= u_1 < ... < u_L = T

    @property
    def L(self) -> int:
        return len(self.breakpoints) - 1

    def interval(self, l: int) -> tuple:
        return float(self.breakpoints[l]), float(self.breakpoints[l + 1])

    def locate(self, t: float) -> int:
        """Index l with t in [u_l, u_{l+1}] (the left-most such interval)."""
        u = self.breakpoints
        if t < u[0] or t > u[-1]:
            raise PreconditionError(f"t={t} outside [{u[0]}, {u[-1]}]")
        return int(min(max(np.searchsorted(u, t, side="left") - 1, 0), self.L - 1))


def alpha_k(path: LinearisationPath, mu: np.ndarray | float, t, t1):
    """alpha_k(t, t1) = int_{t1}^t (-mu_k + a(s)) ds."""
    return -np.asarray(mu) * (np.asarray(t) - np.asarray(t1)) + path.integral(t, t1)


def build_partition(T: float, eps: float, gamma0: float, qbar: int,
                    path: LinearisationPath | None = None) -> Partition:
    """Breakpoints with alpha_{k0}(u_{l+1}, u_l) = -gamma0 eps, built backward from u_L = T.

    k0 = (2^qbar, 0).  For a = -1, L = floor(((2 pi)^2 |k0|^2 + 1) T / (gamma0 eps)).
    The first interval [0, u_1] absorbs the remainder.
    """
    if not (T > 0 and eps > 0 and gamma0 > 0):
        raise PreconditionError("T, eps and gamma0 must be positive")
    if qbar < 0:
        raise PreconditionError("qbar must be >= 0")
    path = LinearisationPath.constant(-1.0) if path is None else path
    k0 = (2**qbar, 0)
    mu0 = (2.0 * np.pi) ** 2 * k0[0] ** 2
    total = -float(alpha_k(path, mu0, T, 0.0))
    if total <= 0:
        raise PreconditionError("alpha_{k0} must decrease over [0, T]")
    L_float = total / (gamma0 * eps)
    if not np.isfinite(L_float) or L_float > _MAX_PARTITION:
        raise CapacityError(f"partition would need {L_float:.3g} intervals")
    L = int(math.floor(L_float))
    if L < 1:
        return Partition(gamma0, k0, np.array([0.0, T]))
    if path.kind == "constant":
        du = gamma0 * eps / (mu0 - float(path(0.0)))
        pts = T - du * np.arange(L)[::-1]
    else:
        pts = np.empty(L)
        u = T
        pts[-1] = T
        for j in range(L - 2, -1, -1):
            f = lambda s: float(alpha_k(path, mu0, u, s)) + gamma0 * eps
            u = optimize.brentq(f, 0.0, u, xtol=1e-14)
            pts[j] = u
    return Partition(gamma0, k0, np.concatenate([[0.0], pts]))


def martingale_transform(state: ConvolutionState, partition: Partition, l: int) -> tuple:
    """(psi_hat_k(t), v_hat_k(t)) with psi_hat = exp(alpha_k(u_{l+1}, t) / eps) psi_k(t).

    v_hat_k is E|psi_hat_k(t)|^2, i.e. the current variance table times the squared factor.
    """
    lo, hi = partition.interval(l)
    t = state.t
    if not (lo - 1e-12 <= t <= hi + 1e-12):
        raise PreconditionError(f"t={t} outside [u_{l}, u_{l + 1}] = [{lo}, {hi}]")
    mu = layout(state.N, 2 * state.N + 1).mu
    fac = np.exp(alpha_k(state.cfg.path, mu, hi, t) / state.cfg.eps)
    return state.coeffs * fac, state.variances * fac**2


# --------------------------------------------------------------------------
# Wick powers of psi
# --------------------------------------------------------------------------


def wick_powers_of_psi(state: ConvolutionState, m_max: int, index: int | None = None,
                       cutoff: int | None = None):
    """:psi^m: for m = 1..m_max with the time-correct variance parameter.

    Returns a list of FourierField for path ``index``, or a list of coefficient
    batches (batch, 2N'+1, 2N'+1) when ``index`` is None.
    """
    if m_max < 1:
        raise PreconditionError("m_max must be >= 1")
    C = state.wick_variance()
    out_N = state.N if cutoff is None else cutoff
    M = max(state.cfg.grid_size, m_max * state.N + out_N + 1)
    coeffs = state.coeffs if index is None else state.coeffs[index : index + 1]
    g = coeffs_to_grid(coeffs, M)
    powers = wick.hermite_all(m_max, g, C)
    res = [grid_to_coeffs(powers[m], out_N) for m in range(1, m_max + 1)]
    if index is None:
        return res
    return [FourierField(r[0], max(state.cfg.grid_size, 2 * out_N + 1), check=False) for r in res]


# --------------------------------------------------------------------------
# chaos-expectation oracle
# --------------------------------------------------------------------------

ORACLE_MAX_DEGREE = 3
ORACLE_MAX_CUTOFF = 8


def _annulus_modes(N: int, variances: np.ndarray):
    lay = layout(N, 2 * N + 1)
    out = []
    for q in range(lay.n_annuli):
        sel = lay.annulus_mask(q)
        out.append((lay.k1[sel].astype(np.int64), lay.k2[sel].astype(np.int64), variances[sel]))
    return out


def chaos_expectation_oracle(hbn: Sequence[int], q0: int, variances: np.ndarray) -> float:
    """E || delta_{q0} prod_q :(delta_q psi)^{n_q}: ||_{L^2}^2 by enumeration of mode tuples.

    Pairing the two Wick products mode by mode gives
    hbn! * sum over tuples (k_1..k_m), the first n_0 in A_0, the next n_1 in A_1, ...,
    with k_1 + ... + k_m in A_{q0}, of prod_i v_{k_i}.
    ``variances`` is the per-mode table E|psi_k|^2 on the (2N+1)^2 square.
    """
    variances = np.asarray(variances, dtype=float)
    N = (variances.shape[-1] - 1) // 2
    hbn = tuple(int(n) for n in hbn)
    m = sum(hbn)
    if any(n < 0 for n in hbn) or m < 1:
        raise PreconditionError("multi-index must be nonnegative with |n| >= 1")
    if m > ORACLE_MAX_DEGREE or N > ORACLE_MAX_CUTOFF:
        raise CapacityError(
            f"enumeration budget is m <= {ORACLE_MAX_DEGREE}, N <= {ORACLE_MAX_CUTOFF} (got m={m}, N={N})"
        )
    blocks = _annulus_modes(N, variances)
    if len(hbn) > len(blocks) and any(hbn[len(blocks):]):
        return 0.0
    factors = []
    for q, n in enumerate(hbn):
        factors.extend([blocks[q]] * n)
    # broadcast over the m tuple positions
    K1 = np.zeros((1,) * m, dtype=np.int64)
    K2 = np.zeros((1,) * m, dtype=np.int64)
    W = np.ones((1,) * m)
    for pos, (k1, k2, v) in enumerate(factors):
        shape = [1] * m
        shape[pos] = k1.size
        K1 = K1 + k1.reshape(shape)
        K2 = K2 + k2.reshape(shape)
        W = W * v.reshape(shape)
    l1 = np.abs(K1) + np.abs(K2)
    _, q_of_sum = np.frexp(l1.astype(float))
    total = float(np.sum(np.where(q_of_sum == q0, W, 0.0)))
    return float(math.prod(math.factorial(n) for n in hbn)) * total


def chaos_products(coeffs: np.ndarray, hbn_list: Sequence[Sequence[int]], variances_q: Sequence[float],
                   q0_max: int) -> np.ndarray:
    """Samples of || delta_{q0} prod_q :(delta_q psi)^{n_q}: ||^2 for every hbn and q0 <= q0_max.

    Each product is formed on its own grid.  Its spectrum reaches |k|_1 <= L, the sum of
    the factors' band limits, and only |k|_1 <= L_out is read, so a grid of size
    M > L + L_out keeps aliases off the modes that are read.
    Returns shape (len(hbn_list), q0_max + 1, batch).
    """
    N = (coeffs.shape[-1] - 1) // 2
    lay = layout(N, 2 * N + 1)
    Q = lay.n_annuli
    band = [min(2**q - 1, N) for q in range(Q)]
    top = 2**q0_max - 1
    herm: dict = {}
    weights: dict = {}

    def factor(q, n, M):
        if (q, M) not in herm:
            b = band[q]
            sub = (coeffs * lay.annulus_mask(q))[..., N - b:N + b + 1, N - b:N + b + 1]
            herm[q, M] = wick.hermite_all(m_max, coeffs_to_grid(sub, M), variances_q[q])
        return herm[q, M][n]

    def weight(M, L_out):
        if (M, L_out) not in weights:
            # annulus membership on the rfft half-spectrum, doubled for k2 > 0 (conjugate mode)
            k1 = np.fft.fftfreq(M, 1.0 / M).astype(int)[:, None]
            k2 = np.arange(M // 2 + 1)[None, :]
            l1 = np.abs(k1) + k2
            q_half = np.array([int(v).bit_length() for v in l1.ravel()]).reshape(l1.shape)
            mult = np.where(k2 == 0, 1.0, 2.0) * (l1 <= L_out)
            weights[M, L_out] = np.stack([mult * (q_half == q0) for q0 in range(q0_max + 1)]).reshape(q0_max + 1, -1)
        return weights[M, L_out]

    m_max = max(sum(h) for h in hbn_list)
    res = np.zeros((len(hbn_list), q0_max + 1, coeffs.shape[0]))
    for i, hbn in enumerate(hbn_list):
        used = [q for q, n in enumerate(hbn) if n]
        L = sum(hbn[q] * band[q] for q in used)
        L_out = min(L, top)
        M = sfft.next_fast_len(max(L + L_out + 1, 2 * max(band[q] for q in used) + 1), real=True)
        prod = None
        for q in used:
            f = factor(q, hbn[q], M)
            prod = f if prod is None else prod * f
        spec = sfft.rfft2(prod, axes=(-2, -1))
        spec /= M * M
        power = (spec.real**2 + spec.imag**2).reshape(coeffs.shape[0], -1)
        res[i] = weight(M, L_out) @ power.T
    return res


def chaos_expectation_mc(hbn: Sequence[int], q0: int, N: int, sigma: float, samples: int,
                         rng: np.random.Generator, chunk: int = 5000) -> wick.MonteCarloEstimate:
    """Monte Carlo counterpart of :func:`chaos_expectation_oracle` on stationary psi."""
    cq = wick.renorm_constant(N, sigma).annulus_variances
    vals = []
    done = 0
    while done < samples:
        b = min(chunk, samples - done)
        c = stationary_sample(N, sigma, b, rng)
        vals.append(chaos_products(c, [hbn], cq, q0)[0, q0])
        done += b
    return wick.MonteCarloEstimate.from_samples(np.concatenate(vals))


def all_multi_indices(m_max: int, Q: int) -> list:
    """Every hbn over Q annuli with 1 <= |hbn| <= m_max."""
    return [h for m in range(1, m_max + 1) for h in wick.multi_indices(m, Q)]
