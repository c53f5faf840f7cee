"""Acceptance criteria 1-11, each run at its stated tolerance.

Every test prints one ``criterion N: PASS|FAIL`` line (with the measured values and
runtime) before asserting, so the outcome of each criterion is visible in the log.
"""

import math
import time
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from wickspde import cli, wick
from wickspde import experiments as ex
from wickspde.convolution import (
    ConvolutionConfig,
    ConvolutionState,
    all_multi_indices,
    build_partition,
    chaos_expectation_oracle,
    chaos_products,
    initial_state,
    martingale_transform,
    stationary_sample,
    step_exact,
)
from wickspde.field import FourierField, layout
from wickspde.solver import (
    DriftPolynomial,
    deterministic_track,
    find_equilibrium_branch,
    schauder_check,
    schauder_log_grid,
)

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


@pytest.fixture
def verdict(capsys):
    def emit(n, ok, detail, elapsed, budget=None):
        in_time = budget is None or elapsed < budget
        status = "PASS" if ok and in_time else "FAIL"
        limit = "" if budget is None else f" (limit {budget:.0f} s)"
        with capsys.disabled():
            print(f"\ncriterion {n}: {status}  {detail}  [{elapsed:.1f} s{limit}]")
        return ok and in_time
    return emit


def test_criterion_01_wick_algebra(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(101)
    x = rng.uniform(-4, 4, 1000)
    C = rng.uniform(0.05, 3.0, 1000)
    herm_err = 0.0
    for m in range(11):
        a = np.array([wick.hermite(m, xi, ci) for xi, ci in zip(x, C)])
        b = np.array([wick.hermite_expanded(m, xi, ci) for xi, ci in zip(x, C)])
        herm_err = max(herm_err, float(np.max(np.abs(a - b) / np.abs(b))))

    def rel_l2(u, v):
        return float(np.sqrt(np.mean((u - v) ** 2)) / np.sqrt(np.mean(v**2)))

    binom_err = multi_err = 0.0
    for N in (4, 8, 16):
        M = 4 * N + 1
        for _ in range(5):
            f = FourierField.random(N, rng, M=M)
            g = FourierField.random(N, rng, M=M)
            C1, C2 = rng.uniform(0.1, 1.0, 2)
            fx, gx = f.to_grid(), g.to_grid()
            for n in range(1, 7):
                lhs = wick.hermite(n, fx + gx, C1 + C2)
                rhs = sum(math.comb(n, j) * wick.hermite(j, fx, C1) * wick.hermite(n - j, gx, C2)
                          for j in range(n + 1))
                binom_err = max(binom_err, rel_l2(rhs, lhs))
            cq = rng.uniform(0.01, 0.5, f.layout.n_annuli)
            for m in (2, 3):
                a = wick.wick_multinomial_blocks(f, m, cq, C=cq.sum())
                b = wick.wick_power_field(f, m, cq.sum())
                multi_err = max(multi_err, (a - b).l2_norm() / b.l2_norm())
    ok = herm_err <= 1e-10 and binom_err <= 1e-8 and multi_err <= 1e-8
    elapsed = time.perf_counter() - t0
    assert verdict(1, ok, f"hermite rel {herm_err:.2e}, binomial L2 {binom_err:.2e}, "
                          f"multinomial L2 {multi_err:.2e}", elapsed, 10)


def test_criterion_02_renormalisation_constant(verdict):
    t0 = time.perf_counter()
    sigma = 0.7
    c0 = wick.renorm_constant(0, sigma).value
    exact0 = c0 == sigma**2 / 2
    N = 4096
    ratio = wick.renorm_constant(N, sigma).value / (sigma**2 * math.log(N)) * 2 * math.pi
    ok = exact0 and abs(ratio - 1) <= 0.15
    elapsed = time.perf_counter() - t0
    assert verdict(2, ok, f"C_0 exact: {exact0}, 2 pi C_N / (sigma^2 log N) = {ratio:.4f}",
                   elapsed, 5)


def _chaos_worst_z(N, samples, rng, chunk=2000):
    sigma = 1.0
    cq = wick.renorm_constant(N, sigma).annulus_variances
    table = wick.mode_variances(N, sigma)
    hbns = all_multi_indices(3, len(cq))
    q0_max = (3 * N).bit_length()
    vals = np.concatenate([chaos_products(stationary_sample(N, sigma, chunk, rng), hbns, cq, q0_max)
                           for _ in range(samples // chunk)], axis=-1)
    worst, compared = 0.0, 0
    for i, hbn in enumerate(hbns):
        for q0 in range(q0_max + 1):
            exact = chaos_expectation_oracle(hbn, q0, table)
            est = wick.MonteCarloEstimate.from_samples(vals[i, q0])
            if exact == 0.0 and est.estimate <= 1e-20:
                continue  # no admissible tuples: both sides vanish identically
            compared += 1
            worst = max(worst, abs(est.zscore(exact)))
    return worst, compared


@pytest.mark.slow
def test_criterion_03_chaos_oracle(verdict):
    t0 = time.perf_counter()
    rng = np.random.default_rng(303)
    z4, n4 = _chaos_worst_z(4, 100_000, rng)
    z8, n8 = _chaos_worst_z(8, 100_000, rng)
    ok = max(z4, z8) <= 3.0
    elapsed = time.perf_counter() - t0
    assert verdict(3, ok, f"max |z| {z4:.2f} over {n4} cells at N=4, {z8:.2f} over {n8} cells at N=8",
                   elapsed, 300)


def test_criterion_04_ou_law(verdict):
    t0 = time.perf_counter()
    N, eps, sigma, n = 8, 0.1, 1.0, 100_000
    rng = np.random.default_rng(404)
    cfg = ConvolutionConfig(eps, sigma, N)
    state = initial_state(cfg, n, rng)
    for _ in range(10):
        state = step_exact(state, eps / 10, rng)
    lay = layout(N, 2 * N + 1)
    v = wick.mode_variances(N, sigma)
    sq = np.abs(state.coeffs) ** 2
    idx = [(N, N)] + list(zip(*lay.half))
    worst_z = 0.0
    worst_p = 1.0
    for i, j in idx:
        est = wick.MonteCarloEstimate.from_samples(sq[:, i, j])
        worst_z = max(worst_z, abs(est.zscore(v[i, j])))
        if (i, j) == (N, N):
            p = stats.kstest(state.coeffs[:, i, j].real / math.sqrt(v[i, j]), "norm").pvalue
        else:
            p = stats.kstest(sq[:, i, j] / v[i, j], "expon").pvalue
        worst_p = min(worst_p, p)

    # martingale check: transformed modes at the left and right ends of one partition interval
    part = build_partition(1.0, eps, 1.0, 0)
    l = 10
    lo, hi = part.interval(l)
    start = initial_state(cfg, 1, rng, t0=lo)
    coeffs = np.repeat(start.coeffs, 20_000, axis=0)
    s = ConvolutionState(cfg, lo, coeffs, start.variances.copy())
    h0, v0 = martingale_transform(s, part, l)
    s = step_exact(s, hi - lo, rng)
    h1, v1 = martingale_transform(s, part, l)
    probe_modes = [(0, 0)] + [(2 ** (q - 1), 0) for q in range(1, lay.n_annuli)]
    worst_mz = 0.0
    for k1, k2 in probe_modes:
        i, j = N + k1, N + k2
        parts = [(np.real, v0[i, j], v1[i, j])] if (k1, k2) == (0, 0) else [
            (np.real, v0[i, j] / 2, v1[i, j] / 2), (np.imag, v0[i, j] / 2, v1[i, j] / 2)]
        for take, var0, var1 in parts:
            for m in range(1, 5):
                target = wick.hermite(m, float(take(h0[0, i, j])), var0)
                vals = wick.hermite(m, take(h1[:, i, j]), var1)
                worst_mz = max(worst_mz, abs(wick.MonteCarloEstimate.from_samples(vals).zscore(target)))
    ok = worst_z <= 3 and worst_p > 1e-3 and worst_mz <= 4
    elapsed = time.perf_counter() - t0
    assert verdict(4, ok, f"variance max |z| {worst_z:.2f} over {len(idx)} modes, "
                          f"min KS p {worst_p:.2e}, martingale max |z| {worst_mz:.2f}", elapsed, 300)


@pytest.mark.slow
def test_criterion_05_tail_structure(verdict):
    t0 = time.perf_counter()
    cfg = ex.TailConfig(eps=0.1, sigma=0.05, T=1.0, N=16, m_values=(1, 2, 3), alphas=(-0.5,),
                        paths=10_000)
    rep = ex.tail_experiment(cfg, seed=505)
    fits = [rep.entry(m, -0.5)["fit"] for m in (1, 2, 3)]
    r2 = [f["r_squared"] if f else float("nan") for f in fits]
    kappa = [f["slope"] if f else float("nan") for f in fits]
    ok = all(r > 0.9 for r in r2) and rep.kappa_monotone(-0.5)
    elapsed = time.perf_counter() - t0
    assert verdict(5, ok, "R^2 " + ", ".join(f"{r:.4f}" for r in r2)
                   + "; kappa " + ", ".join(f"{k:.4f}" for k in kappa), elapsed, 1800)


def test_criterion_06_deterministic_tracking(verdict):
    t0 = time.perf_counter()
    F = DriftPolynomial(ex.CUBIC_FIXTURE)
    t = np.linspace(0.0, 1.0, 101)
    branch = find_equilibrium_branch(F, t, 1.0)
    init = FourierField.constant(branch.phi_star[0], 8)
    d = [deterministic_track(F, eps, init, t, branch).sup_distance for eps in (0.02, 0.01, 0.005)]
    ratios = [d[0] / d[1], d[1] / d[2]]
    ok = all(abs(r - 2.0) <= 0.3 for r in ratios)
    elapsed = time.perf_counter() - t0
    assert verdict(6, ok, "sup H1 distances " + ", ".join(f"{x:.3e}" for x in d)
                   + "; ratios " + ", ".join(f"{r:.3f}" for r in ratios), elapsed, 120)


SIGMA_LARGE_POINTS = [[0.01, 0.05], [0.01, 0.1], [0.01, 0.2]]


@pytest.mark.slow
def test_criterion_07_phi1_scaling(verdict):
    t0 = time.perf_counter()
    small = ex.phi1_experiment(ex.Phi1Config(points=[[0.1, 1e-4], [0.1, 2e-4], [0.1, 4e-4]],
                                             paths=1000), seed=707)
    large = ex.phi1_experiment(ex.Phi1Config(points=SIGMA_LARGE_POINTS, paths=1000), seed=708)
    r_small = small.ratios(0.1)
    r_large = large.ratios(SIGMA_LARGE_POINTS[0][0])
    diverged = sum(p["diverged"] for p in small.points + large.points)
    ok = (all(abs(r - 2) <= 0.5 for r in r_small) and all(abs(r - 4) <= 1 for r in r_large)
          and diverged == 0)
    elapsed = time.perf_counter() - t0
    assert verdict(7, ok, "sigma << eps ratios " + ", ".join(f"{r:.3f}" for r in r_small)
                   + "; sigma >> eps ratios " + ", ".join(f"{r:.3f}" for r in r_large)
                   + f"; diverged {diverged}", elapsed, 2700)


@pytest.mark.slow
def test_criterion_08_perp_cubic(verdict):
    t0 = time.perf_counter()
    rep = ex.phi1perp_experiment(ex.PerpConfig(paths=1000), seed=808)
    expo = rep.exponent
    ok = expo is not None and 2.5 <= expo <= 3.5
    cens = [p["censored"] for p in rep.points]
    elapsed = time.perf_counter() - t0
    assert verdict(8, ok, f"fitted exponent {expo}; censored paths {cens}", elapsed, 1800)


@pytest.mark.slow
def test_criterion_09_pitchfork(verdict):
    t0 = time.perf_counter()
    cfg = ex.ExitConfig(eps=0.01, sigmas=(0.0, 1e-2, 1e-3, 1e-4), paths=1000)
    rep = ex.pitchfork_exit_experiment(cfg, seed=909)
    g = rep.gates
    noisy = [p for p in rep.points if p["sigma"] > 0]
    ok = g["sd_within_factor_2"] and g["delay_constant_within_30pct"] and g["zero_noise_full_delay"]
    elapsed = time.perf_counter() - t0
    detail = ("sd ratios " + ", ".join(f"{p['sd_ratio']:.3f}" for p in noisy)
              + "; delay ratios " + ", ".join("-" if p["delay_ratio"] is None else f"{p['delay_ratio']:.3f}"
                                             for p in noisy)
              + f"; spread {g['delay_ratio_spread']}; sigma=0 exits {rep.points[0]['exits_plus']}")
    assert verdict(9, ok, detail, elapsed, 3600)


def test_criterion_10_schauder(verdict):
    t0 = time.perf_counter()
    out = ex.schauder_probe(ex.SchauderConfig(alpha=-0.5, beta=1.0))
    rng = np.random.default_rng(1010)
    g = FourierField.random(32, rng)
    a = schauder_check(g, -0.5, 1.0, schauder_log_grid(200))
    b = schauder_check(g, -0.5, 1.0, schauder_log_grid(400))
    random_ok = bool(np.isfinite(a) and abs(b - a) <= 0.05 * b)
    ok = all(out["gates"].values()) and random_ok
    elapsed = time.perf_counter() - t0
    assert verdict(10, ok, f"M_hat {out['M_hat']:.5f} -> {out['M_hat_refined']:.5f} "
                           f"(change {out['refinement_change']:.2e}); random field {a:.5f} -> {b:.5f}; "
                           f"single-mode error {out['single_mode']['abs_error']:.1e}", elapsed, 60)


DETERMINISM_FIXTURES = ["selftest.ini", "schauder.ini", "pitchfork_sigma0.ini"]

SMALL_TAILS = """
[run]
kind = tails
seed = 1111

[params]
eps = 0.1
sigma = 0.05
N = 4
T = 0.3
m_max = 3
paths = 1000

[output]
snapshots = true
"""

SMALL_PITCHFORK = """
[run]
kind = pitchfork
seed = 1112
block_size = 50

[params]
mode = exit
eps = 0.01
sigma = 1e-2, 1e-3
paths = 200
"""


def test_criterion_11_determinism(verdict, tmp_path):
    t0 = time.perf_counter()
    configs = [cli.load_config(CONFIGS / name) for name in DETERMINISM_FIXTURES]
    configs += [cli.parse_config(SMALL_TAILS), cli.parse_config(SMALL_PITCHFORK)]
    mismatched = []
    checked = 0
    for i, cfg in enumerate(configs):
        dirs = []
        for run_no, workers in enumerate((1, 2, 2)):
            d = tmp_path / f"{i}-{run_no}"
            cli.run(cfg, d, workers=workers)
            dirs.append(d)
        names = sorted(p.name for p in dirs[0].iterdir() if p.name != "manifest.json")
        for d in dirs[1:]:
            other = sorted(p.name for p in d.iterdir() if p.name != "manifest.json")
            if other != names:
                mismatched.append(f"{cfg.kind}: file lists differ")
                continue
            for name in names:
                checked += 1
                if (dirs[0] / name).read_bytes() != (d / name).read_bytes():
                    mismatched.append(f"{cfg.kind}/{name}")
    ok = not mismatched
    elapsed = time.perf_counter() - t0
    assert verdict(11, ok, f"{checked} report files compared across workers 1, 2, 2; "
                           f"mismatches: {mismatched or 'none'}", elapsed)
