"""Deterministic tracking, the split evolution of phi_1 and the pitchfork system.

All equations have the slow-time form d phi = (1/eps) [Delta phi + ...] dt.  The
linear part (Laplacian plus the scalar a(t) where present) is integrated with exact
mode factors; the remaining nonlinearity is explicit and evaluated on a dealiased
grid (first-order exponential Euler).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np
from numpy.polynomial import Polynomial

from . import wick
from .convolution import (
    ConvolutionConfig,
    ConvolutionState,
    LinearisationPath,
    initial_state,
    ou_transition,
    step_exact,
)
from .errors import (
    BranchTrackingError,
    ConfigurationError,
    DivergenceError,
    NumericError,
    PreconditionError,
)
from .field import (
    FourierField,
    besov_from_blocks,
    block_l2_norms,
    block_sup_norms,
    coeffs_to_grid,
    default_grid_size,
    grid_to_coeffs,
    layout,
    min_grid_size,
)

DIVERGENCE_GUARD = 1e6


def phi_function(z: np.ndarray) -> np.ndarray:
    """(e^z - 1) / z with value 1 at z = 0."""
    z = np.asarray(z, dtype=float)
    small = np.abs(z) < 1e-12
    zs = np.where(small, 1.0, z)
    return np.where(small, 1.0 + 0.5 * z, np.expm1(zs) / zs)


# --------------------------------------------------------------------------
# drift polynomial and equilibrium branches
# --------------------------------------------------------------------------


def _as_time_function(spec) -> tuple:
    """Coefficient A_j(t) from a number, a polynomial coefficient list, or a callable.

    Returns (value, derivative) callables.
    """
    if callable(spec):
        def deriv(t, f=spec, h=1e-6):
            return (f(t + h) - f(t - h)) / (2 * h)
        return spec, deriv
    coef = np.atleast_1d(np.asarray(spec, dtype=float))
    p = Polynomial(coef)
    return p, p.deriv()


class DriftPolynomial:
    """F(t, phi) = sum_j A_j(t) phi^j with odd degree n >= 3 and A_n(t) < 0.

    Each A_j is a constant, a list of polynomial coefficients in t, or a callable.
    """

    def __init__(self, coefficients: Sequence, *, a_lead: float = 0.0, check_grid=None):
        coefficients = list(coefficients)
        n = len(coefficients) - 1
        problems = []
        if n < 3 or n % 2 == 0:
            problems.append(f"degree n must be odd and >= 3 (got n={n}); the oddness constraint is required")
        self.n = n
        self._specs = coefficients
        funcs = [_as_time_function(c) for c in coefficients]
        self._A = [f for f, _ in funcs]
        self._dA = [d for _, d in funcs]
        grid = np.linspace(0.0, 1.0, 101) if check_grid is None else np.asarray(check_grid, float)
        if not problems:
            lead = np.array([float(self._A[n](t)) for t in grid])
            if np.any(lead >= -a_lead) or np.any(lead >= 0):
                problems.append("leading coefficient A_n(t) must be strictly negative")
        if problems:
            raise ConfigurationError("; ".join(problems), problems)

    @classmethod
    def pitchfork(cls, t_star: float = 0.5, slope: float = 1.0) -> "DriftPolynomial":
        """F = a(t) phi - phi^3 with a(t) = slope (t - t_star)."""
        return cls([0.0, [-slope * t_star, slope], 0.0, -1.0])

    def describe(self) -> list:
        out = []
        for c in self._specs:
            if callable(c):
                out.append("callable")
            else:
                out.append([float(x) for x in np.atleast_1d(c)])
        return out

    def coeffs_at(self, t: float) -> np.ndarray:
        return np.array([float(A(t)) for A in self._A])

    def coeff_derivs_at(self, t: float) -> np.ndarray:
        return np.array([float(d(t)) for d in self._dA])

    def is_autonomous(self) -> bool:
        return all(not callable(c) and np.atleast_1d(c).size == 1 for c in self._specs)

    def __call__(self, t: float, phi):
        return Polynomial(self.coeffs_at(t))(phi)

    def dphi(self, t: float, phi):
        return Polynomial(self.coeffs_at(t)).deriv()(phi)


@dataclass
class EquilibriumBranch:
    """A root path phi*(t) of F(t, .) with its linearisation a(t) = dF/dphi(t, phi*(t))."""

    F: DriftPolynomial
    t: np.ndarray
    phi_star: np.ndarray
    a: np.ndarray
    stable: np.ndarray

    @property
    def a_minus(self) -> float:
        """Stability margin: a(t) <= -a_minus on the grid (negative if stability is lost)."""
        return float(-self.a.max())

    @property
    def a_plus(self) -> float:
        return float(-self.a.min())

    @property
    def loses_stability(self) -> bool:
        return bool(np.any(~self.stable))

    def at(self, t: float, tol: float = 1e-13) -> float:
        """phi*(t) between grid points: Newton polish from the interpolated value."""
        x = float(np.interp(t, self.t, self.phi_star))
        for _ in range(50):
            d = self.F.dphi(t, x)
            f = self.F(t, x)
            if abs(f) <= tol or d == 0:
                break
            x -= f / d
        return x

    def linearisation_at(self, t: float) -> float:
        return float(self.F.dphi(t, self.at(t)))

    def linearisation_path(self, degree: int = 24) -> LinearisationPath:
        """a(t) as a Chebyshev series on the branch's time span (closed-form integrals)."""
        t0, t1 = float(self.t[0]), float(self.t[-1])
        return LinearisationPath.interpolate(self.linearisation_at, t0, t1, degree)


def _newton(F: DriftPolynomial, t: float, x0: float, tol: float, max_iter: int = 60) -> float | None:
    x = x0
    for _ in range(max_iter):
        f = F(t, x)
        if abs(f) <= tol:
            return x
        d = F.dphi(t, x)
        if d == 0 or not np.isfinite(d):
            return None
        step = f / d
        lam = 1.0
        # damping: accept the first step that reduces the residual
        while lam > 1e-4:
            xn = x - lam * step
            if abs(F(t, xn)) < abs(f):
                break
            lam *= 0.5
        else:
            return None
        x = xn
    return x if abs(F(t, x)) <= tol else None


def find_equilibrium_branch(F: DriftPolynomial, t_grid, seed_root: float, tol: float = 1e-12,
                            collision_tol: float = 1e-8) -> EquilibriumBranch:
    """Continue a simple root of F(t, .) along ``t_grid`` by damped Newton.

    Each root seeds the next time; on Newton failure the time step is halved.
    A vanishing derivative at the root (collision) is an error unless the previous
    root already solves the equation exactly, as happens for phi* = 0 at a pitchfork.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if t_grid.ndim != 1 or t_grid.size == 0 or np.any(np.diff(t_grid) <= 0):
        raise PreconditionError("t_grid must be a non-empty increasing sequence")
    roots = np.empty(t_grid.size)
    x = _newton(F, t_grid[0], float(seed_root), tol)
    if x is None:
        raise BranchTrackingError("Newton iteration diverged from the seed root", t_grid[0])
    roots[0] = x
    for i in range(1, t_grid.size):
        t_prev, t_next = t_grid[i - 1], t_grid[i]
        t_cur = t_prev
        while t_cur < t_next:
            h = t_next - t_cur
            while True:
                cand = _newton(F, t_cur + h, x, tol)
                if cand is not None:
                    break
                h *= 0.5
                if h < 1e-12 * max(1.0, abs(t_next)):
                    raise BranchTrackingError("Newton continuation failed", t_cur)
            t_cur = t_cur + h if h < t_next - t_cur else t_next
            x = cand
        roots[i] = x
    a = np.array([F.dphi(t, r) for t, r in zip(t_grid, roots)])
    for t, r, d in zip(t_grid, roots, a):
        if abs(d) < collision_tol and abs(F(t, r)) > tol:
            raise BranchTrackingError("root collision (dF/dphi vanishes at the root)", t)
    return EquilibriumBranch(F, t_grid, roots, a, a < 0)


# --------------------------------------------------------------------------
# pointwise drift on fields
# --------------------------------------------------------------------------


def _poly_on_grid(coeffs: np.ndarray, g: np.ndarray) -> np.ndarray:
    out = np.zeros_like(g)
    for c in coeffs[::-1]:
        out = out * g + c
    return out


def drift_on_grid(F: DriftPolynomial, t: float, g: np.ndarray) -> np.ndarray:
    return _poly_on_grid(F.coeffs_at(t), g)


# --------------------------------------------------------------------------
# deterministic tracking
# --------------------------------------------------------------------------


@dataclass
class TrackResult:
    t: np.ndarray
    fields: list  # FourierField per output time
    distance_h1: np.ndarray  # ||phibar(t) - phi*(t) e0||_H1 on the output grid
    steps: int
    rejected: int

    @property
    def sup_distance(self) -> float:
        return float(self.distance_h1.max())


def _etd_step_det(F, eps, c, t, h, mu, M, N):
    """One exponential-Euler step of d phi = (1/eps)(Delta phi + F(t, phi))."""
    g = coeffs_to_grid(c, M)
    nl = grid_to_coeffs(drift_on_grid(F, t, g), N)
    z = -mu * h / eps
    return np.exp(z) * c + (h / eps) * phi_function(z) * nl


def deterministic_track(F: DriftPolynomial, eps: float, init: FourierField, t_grid,
                        branch: EquilibriumBranch | None = None, tol: float = 1e-6,
                        h_init: float | None = None, h_min: float = 1e-12) -> TrackResult:
    """Integrate d phi = (1/eps)(Delta phi + F(t, phi)) dt with step doubling.

    Each step is compared with two half steps; the L^2 difference must stay below
    ``tol``.  Output is recorded exactly at ``t_grid``.
    """
    if not eps > 0:
        raise PreconditionError("eps must be positive")
    t_grid = np.asarray(t_grid, dtype=float)
    N = init.N
    M = max(init.M, min_grid_size(N, F.n))
    mu = layout(N, 2 * N + 1).mu
    if branch is None:
        branch = find_equilibrium_branch(F, t_grid, init.coeff(0, 0).real)
    c = np.array(init.coeffs)
    t = float(t_grid[0])
    h = 0.01 * eps if h_init is None else h_init
    fields = [FourierField(c, M, check=False)]
    steps = rejected = 0
    for t_target in t_grid[1:]:
        while t < t_target - 1e-15:
            h_try = min(h, t_target - t)
            full = _etd_step_det(F, eps, c, t, h_try, mu, M, N)
            half = _etd_step_det(F, eps, c, t, 0.5 * h_try, mu, M, N)
            half = _etd_step_det(F, eps, half, t + 0.5 * h_try, 0.5 * h_try, mu, M, N)
            err = float(np.sqrt(np.sum(np.abs(full - half) ** 2)))
            if not np.isfinite(err):
                raise NumericError(f"non-finite state at t={t:.6g}")
            if err <= tol:
                # Richardson-extrapolated value keeps the accepted step accurate
                c = 2.0 * half - full
                t += h_try
                steps += 1
                grow = 2.0 if err == 0 else min(2.0, 0.9 * math.sqrt(tol / err))
                if h_try == h:
                    h = h * grow
            else:
                rejected += 1
                h = h_try * max(0.2, 0.9 * math.sqrt(tol / err))
                if h < h_min:
                    raise NumericError(f"step size fell below {h_min} at t={t:.6g}")
        t = float(t_target)
        fields.append(FourierField(c, M, check=False))
    dist = np.empty(len(t_grid))
    for i, (tt, f) in enumerate(zip(t_grid, fields)):
        ref = FourierField.constant(branch.at(tt), N, M)
        dist[i] = (f - ref).h1_norm()
    return TrackResult(t_grid, fields, dist, steps, rejected)


# --------------------------------------------------------------------------
# shifted drift
# --------------------------------------------------------------------------


@dataclass
class ShiftedDrift:
    t: float
    a: float
    A_hat: list  # A_hat[j] for j = 0..n, FourierField; A_hat[0] is zero

    def h1_norm(self, j: int) -> float:
        return self.A_hat[j].h1_norm()


def shifted_drift_coeffs(F: DriftPolynomial, t: float, phibar: np.ndarray, phistar: float,
                         M: int) -> tuple:
    """Coefficient arrays of A_hat_j (j = 0..n) on the cutoff of ``phibar`` (batch aware)."""
    N = (phibar.shape[-1] - 1) // 2
    A = F.coeffs_at(t)
    n = F.n
    g = coeffs_to_grid(phibar, M)
    powers = [np.ones_like(g)]
    for _ in range(n):
        powers.append(powers[-1] * g)
    a = float(sum(i * A[i] * phistar ** (i - 1) for i in range(1, n + 1)))
    out = [np.zeros_like(phibar)]
    a1 = sum(i * A[i] * (powers[i - 1] - phistar ** (i - 1)) for i in range(2, n + 1))
    out.append(grid_to_coeffs(a1, N))
    for j in range(2, n + 1):
        gj = sum(math.comb(i, j) * A[i] * powers[i - j] for i in range(j, n + 1))
        out.append(grid_to_coeffs(np.broadcast_to(gj, g.shape), N))
    return a, out


def shifted_drift(F: DriftPolynomial, phibar: FourierField, phistar: float, t: float,
                  t_phibar: float | None = None) -> ShiftedDrift:
    """a(t) and the coefficients A_hat_j of the drift seen by phi_0 = phi - phibar.

    A_hat_1 = sum_{i>=2} i A_i (phibar^(i-1) - phi*^(i-1)),
    A_hat_j = sum_{i>=j} binom(i, j) A_i phibar^(i-j) for j >= 2.
    """
    if t_phibar is not None and abs(t_phibar - t) > 1e-12:
        raise PreconditionError(f"tracker time {t_phibar} does not match t={t}")
    M = max(phibar.M, min_grid_size(phibar.N, F.n))
    a, coeffs = shifted_drift_coeffs(F, t, phibar.coeffs, phistar, M)
    return ShiftedDrift(t, a, [FourierField(c, M, check=False) for c in coeffs])


def wick_drift_grid(F: DriftPolynomial, t: float, phibar_grid, phi0_grid, C: float) -> np.ndarray:
    """:F(phibar + phi0): - F(phibar) with :(phibar + phi0)^i: = sum_j binom(i, j) phibar^(i-j) :phi0^j:."""
    A = F.coeffs_at(t)
    herm = wick.hermite_all(F.n, phi0_grid, C)
    out = np.zeros(np.broadcast(phibar_grid, phi0_grid).shape)
    for i in range(1, F.n + 1):
        for j in range(1, i + 1):
            out = out + A[i] * math.comb(i, j) * phibar_grid ** (i - j) * herm[j]
    return out


# --------------------------------------------------------------------------
# split evolution of phi_1
# --------------------------------------------------------------------------


@dataclass
class SplitSetup:
    """Deterministic ingredients of the split phi = phibar + psi + phi_1 on a fixed step grid."""

    F: DriftPolynomial
    eps: float
    N: int
    M: int
    t: np.ndarray  # step times
    branch: EquilibriumBranch
    path: LinearisationPath
    phibar: list  # coefficient arrays at step times
    A_hat: list  # per step: list of coefficient arrays j = 0..n
    a: np.ndarray  # a(t) at step times


def prepare_split(F: DriftPolynomial, eps: float, N: int, T: float, dt: float, seed_root: float,
                  M: int | None = None, phibar_init: FourierField | None = None,
                  track_tol: float = 1e-6) -> SplitSetup:
    n_steps = int(round(T / dt))
    if n_steps < 1 or abs(n_steps * dt - T) > 1e-9 * max(1.0, T):
        raise ConfigurationError(f"T={T} must be a positive multiple of dt={dt}")
    t = np.linspace(0.0, T, n_steps + 1)
    M = default_grid_size(N, F.n) if M is None else M
    if M < min_grid_size(N, F.n):
        raise ConfigurationError(
            f"grid size M={M} is not alias-free for degree {F.n} (need M >= {min_grid_size(N, F.n)})"
        )
    branch = find_equilibrium_branch(F, t, seed_root)
    if phibar_init is None:
        phibar_init = FourierField.constant(branch.phi_star[0], N, M)
    track = deterministic_track(F, eps, phibar_init.with_grid_size(M), t, branch, tol=track_tol)
    phibar = [f.coeffs for f in track.fields]
    A_hat = []
    for tt, c, ps in zip(t, phibar, branch.phi_star):
        _, coeffs = shifted_drift_coeffs(F, tt, c, ps, M)
        A_hat.append(coeffs)
    path = branch.linearisation_path()
    return SplitSetup(F, eps, N, M, t, branch, path, phibar, A_hat, branch.a.copy())


@dataclass
class SplitSolution:
    """phibar, psi and phi_1 at a common time; ``full`` reconstructs phi = phibar + psi + phi_1."""

    t: float
    phibar: np.ndarray
    psi: ConvolutionState
    phi1: np.ndarray
    A_hat: list

    def full(self) -> np.ndarray:
        return self.phibar + self.psi.coeffs + self.phi1


def b_wick_grid(A_hat_grids: list, phi1_grid: np.ndarray, psi_wick: list) -> np.ndarray:
    """:b(psi + phi_1): = sum_j A_hat_j sum_l binom(j, l) phi_1^(j-l) :psi^l:.

    ``psi_wick[l]`` is the grid of :psi^l: (psi_wick[0] = 1).
    """
    n = len(A_hat_grids) - 1
    out = np.zeros(phi1_grid.shape)
    p1 = [np.ones_like(phi1_grid)]
    for _ in range(n):
        p1.append(p1[-1] * phi1_grid)
    for j in range(1, n + 1):
        inner = np.zeros(phi1_grid.shape)
        for ell in range(0, j + 1):
            inner = inner + math.comb(j, ell) * p1[j - ell] * psi_wick[ell]
        out = out + A_hat_grids[j] * inner
    return out


def phi1_step(setup: SplitSetup, i: int, phi1: np.ndarray, psi: ConvolutionState,
              dt: float) -> np.ndarray:
    """Exponential-Euler step of phi_1 from step time t_i (batch aware)."""
    t = setup.t[i]
    M, N, eps = setup.M, setup.N, setup.eps
    n = setup.F.n
    g1 = coeffs_to_grid(phi1, M)
    gpsi = coeffs_to_grid(psi.coeffs, M)
    psi_w = wick.hermite_all(n, gpsi, psi.wick_variance())
    A_grids = [None] + [coeffs_to_grid(c, M) for c in setup.A_hat[i][1:]]
    nl = grid_to_coeffs(b_wick_grid(A_grids, g1, psi_w), N)
    mu = layout(N, 2 * N + 1).mu
    A_int = float(setup.path.integral(t + dt, t))
    z = (-mu * dt + A_int) / eps
    return np.exp(z) * phi1 + (dt / eps) * phi_function(z) * nl


def evolve_phi1(setup: SplitSetup, sigma: float, batch: int, rng: np.random.Generator, *,
                psi_init: str = "stationary", stride: int = 1, gamma: float = 1.5,
                guard: float = DIVERGENCE_GUARD, raise_on_divergence: bool = True,
                record: Callable | None = None) -> dict:
    """Advance psi (exact) and phi_1 (exponential Euler) together on the setup's step grid.

    Every ``stride`` steps the norms ||phi_1||_{B^gamma_{2,inf}} and ||phi_1||_{C^(gamma-1)}
    are recorded per path.  Returns the sup-norms over time, the final split and the
    divergence mask.
    """
    cfg = ConvolutionConfig(setup.eps, sigma, setup.N, setup.path, psi_init, M=setup.M)
    psi = initial_state(cfg, batch, rng, setup.t[0])
    shape = (batch, 2 * setup.N + 1, 2 * setup.N + 1)
    phi1 = np.zeros(shape, dtype=complex)
    diverged = np.zeros(batch, dtype=bool)
    t_div = np.full(batch, np.nan)
    sup_b = np.zeros(batch)
    sup_c = np.zeros(batch)
    times = []

    def measure(i):
        bl2 = block_l2_norms(phi1)
        bsup = block_sup_norms(phi1, setup.M)
        nb = besov_from_blocks(bl2, gamma)
        nc = besov_from_blocks(bsup, gamma - 1.0)
        np.maximum(sup_b, np.where(diverged, sup_b, nb), out=sup_b)
        np.maximum(sup_c, np.where(diverged, sup_c, nc), out=sup_c)
        times.append(setup.t[i])
        if record is not None:
            record(setup.t[i], nb, nc, phi1, psi)

    measure(0)
    n_steps = setup.t.size - 1
    for i in range(n_steps):
        dt = setup.t[i + 1] - setup.t[i]
        phi1 = phi1_step(setup, i, phi1, psi, dt)
        psi = step_exact(psi, dt, rng)
        size = np.abs(phi1).max(axis=(-2, -1))
        bad = ~np.isfinite(size) | (size > guard)
        new_bad = bad & ~diverged
        if np.any(new_bad):
            if raise_on_divergence:
                raise DivergenceError("phi_1 exceeded the divergence guard", setup.t[i + 1])
            t_div[new_bad] = setup.t[i + 1]
            diverged |= new_bad
            phi1[diverged] = 0.0
        if (i + 1) % stride == 0 or i + 1 == n_steps:
            measure(i + 1)
    split = SplitSolution(setup.t[-1], setup.phibar[-1], psi, phi1, setup.A_hat[-1])
    return {
        "sup_besov": sup_b,
        "sup_holder": sup_c,
        "diverged": diverged,
        "divergence_time": t_div,
        "split": split,
        "times": np.array(times),
    }


def direct_renormalised_step(F: DriftPolynomial, eps: float, t: float, dt: float, phi: np.ndarray,
                             C: float, noise: np.ndarray, M: int) -> np.ndarray:
    """Exponential-Euler step of the un-split equation d phi = (1/eps)(Delta phi + :F(phi):) dt + noise.

    ``noise`` is the additive increment over the step (used as an integration oracle).
    """
    N = (phi.shape[-1] - 1) // 2
    mu = layout(N, 2 * N + 1).mu
    g = coeffs_to_grid(phi, M)
    herm = wick.hermite_all(F.n, g, C)
    A = F.coeffs_at(t)
    nl = grid_to_coeffs(sum(A[j] * herm[j] for j in range(F.n + 1)), N)
    z = -mu * dt / eps
    return np.exp(z) * phi + (dt / eps) * phi_function(z) * nl + noise


# --------------------------------------------------------------------------
# pitchfork system
# --------------------------------------------------------------------------


@dataclass
class PitchforkState:
    """Zero mode phi_1^0 (batch,), oscillating part phi_1^perp and the convolution psi_perp."""

    t: float
    phi0: np.ndarray
    perp: np.ndarray
    psi: ConvolutionState

    @property
    def batch(self) -> int:
        return self.phi0.shape[0]


@dataclass(frozen=True)
class PitchforkConfig:
    eps: float
    sigma: float
    N: int
    path: LinearisationPath
    M: int | None = None

    @property
    def grid_size(self) -> int:
        return default_grid_size(self.N, 3) if self.M is None else self.M


def pitchfork_initial_state(cfg: PitchforkConfig, batch: int, rng: np.random.Generator,
                            t0: float = 0.0, phi0_init=0.0) -> PitchforkState:
    ccfg = ConvolutionConfig(cfg.eps, cfg.sigma, cfg.N, cfg.path, "zero", True, cfg.grid_size)
    psi = initial_state(ccfg, batch, rng, t0)
    shape = (batch, 2 * cfg.N + 1, 2 * cfg.N + 1)
    phi0 = np.broadcast_to(np.asarray(phi0_init, dtype=float), (batch,)).copy()
    return PitchforkState(t0, phi0, np.zeros(shape, dtype=complex), psi)


def pitchfork_nonlinearity(state: PitchforkState, M: int) -> tuple:
    """(F_0, F_perp coefficients) of the cubic Wick nonlinearity.

    :F: = -:psi^3: - 3 phi_1 :psi^2: - 3 phi_1^2 psi - phi_1^3 with phi_1 = phi_1^0 + phi_1^perp.
    The zero-mode equation already carries -(phi_1^0)^3 explicitly, so
    F_0 = <e_0, :F:> + (phi_1^0)^3 and the total zero-mode drift is a phi_1^0 + <e_0, :F:>.
    """
    N = state.psi.N
    C = state.psi.wick_variance()
    gpsi = coeffs_to_grid(state.psi.coeffs, M)
    gperp = coeffs_to_grid(state.perp, M)
    phi0 = state.phi0[:, None, None]
    g1 = phi0 + gperp
    h = wick.hermite_all(3, gpsi, C)
    total = -h[3] - 3.0 * g1 * h[2] - 3.0 * g1 * g1 * gpsi - g1**3
    c = grid_to_coeffs(total, N)
    zero = c[:, N, N].real.copy()
    c[:, N, N] = 0.0
    return zero + state.phi0**3, c


def pitchfork_step(state: PitchforkState, dt: float, rng: np.random.Generator,
                   cfg: PitchforkConfig, linear_only: bool = False) -> PitchforkState:
    """One step of the coupled zero-mode SDE / oscillating PDE / psi_perp system.

    psi_perp and the zero-mode noise are exact OU transitions; the cubic terms are explicit.
    ``linear_only`` drops the cubic and F_0 (the linearised zero-mode process).
    """
    N, eps = cfg.N, cfg.eps
    M = cfg.grid_size
    t = state.t
    lay = layout(N, 2 * N + 1)
    A_int = float(cfg.path.integral(t + dt, t))
    m0, v0 = ou_transition(cfg.path, eps, cfg.sigma, 0.0, t, dt)
    z0 = A_int / eps
    noise0 = math.sqrt(float(v0)) * rng.standard_normal(state.batch)
    if linear_only:
        phi0 = float(m0) * state.phi0 + noise0
        perp = state.perp
    else:
        F0, Fperp = pitchfork_nonlinearity(state, M)
        nl0 = -state.phi0**3 + F0
        phi0 = float(m0) * state.phi0 + (dt / eps) * float(phi_function(z0)) * nl0 + noise0
        z = (-lay.mu * dt + A_int) / eps
        perp = np.exp(z) * state.perp + (dt / eps) * phi_function(z) * Fperp
        perp[:, N, N] = 0.0
    psi = step_exact(state.psi, dt, rng)
    return PitchforkState(t + dt, phi0, perp, psi)


def linear_variance_profile(path: LinearisationPath, eps: float, sigma: float, v0: float,
                            t_grid, max_substep: float | None = None) -> np.ndarray:
    """Variance of d phi = (1/eps) a(t) phi dt + (sigma/sqrt(eps)) dW started with variance v0.

    v(t) = v0 exp(2 alpha(t, t0) / eps) + (sigma^2 / eps) int_{t0}^t exp(2 alpha(t, s) / eps) ds,
    accumulated by exact transitions over substeps no longer than ``max_substep``.
    """
    t_grid = np.asarray(t_grid, dtype=float)
    if max_substep is None:
        max_substep = 0.05 * math.sqrt(eps)
    out = np.empty(t_grid.size)
    v = float(v0)
    out[0] = v
    for i in range(1, t_grid.size):
        t0, t1 = t_grid[i - 1], t_grid[i]
        n_sub = max(1, int(math.ceil((t1 - t0) / max_substep)))
        h = (t1 - t0) / n_sub
        for j in range(n_sub):
            m, var = ou_transition(path, eps, sigma, 0.0, t0 + j * h, h)
            v = float(m) ** 2 * v + float(var)
        out[i] = v
    return out


# --------------------------------------------------------------------------
# Schauder probe
# --------------------------------------------------------------------------


def heat_semigroup(coeffs: np.ndarray, t: float) -> np.ndarray:
    N = (coeffs.shape[-1] - 1) // 2
    return coeffs * np.exp(-layout(N, 2 * N + 1).mu * t)


def schauder_check(g: FourierField, alpha: float, beta: float, t_grid) -> float:
    """sup_t ||e^{t Delta} g||_{B^beta_{2,inf}} t^((beta - alpha)/2) / ||g||_{B^alpha_{2,inf}}."""
    if beta > alpha + 2:
        raise PreconditionError(f"need beta <= alpha + 2 (got alpha={alpha}, beta={beta})")
    t_grid = np.asarray(t_grid, dtype=float)
    if np.any(t_grid <= 0) or np.any(t_grid > 1):
        raise PreconditionError("t-grid must lie in (0, 1]")
    denom = float(besov_from_blocks(block_l2_norms(g.coeffs), alpha))
    if denom == 0:
        raise PreconditionError("g has zero norm")
    best = 0.0
    for t in t_grid:
        num = float(besov_from_blocks(block_l2_norms(heat_semigroup(g.coeffs, t)), beta))
        best = max(best, num * t ** ((beta - alpha) / 2) / denom)
    return best


def schauder_log_grid(n: int, t_min: float = 1e-7) -> np.ndarray:
    return np.geomspace(t_min, 1.0, n)
