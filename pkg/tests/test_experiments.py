import numpy as np
import pytest

from wickspde import experiments as ex
from wickspde.errors import ConfigurationError


class TestExceedance:
    def test_counts(self):
        t = ex.exceedance_table(np.array([0.1, 0.5, 0.5, 2.0]), np.array([0.0, 0.5, 3.0]))
        assert t["count"].tolist() == [4, 1, 0]
        assert t["p"].tolist() == [1.0, 0.25, 0.0]
        assert np.all(t["lo"] <= t["p"]) and np.all(t["p"] <= t["hi"])

    def test_exponential_rate(self):
        vals = np.random.default_rng(0).exponential(1 / 3.0, 200_000)
        x = np.linspace(0.1, 2.0, 20)
        fit, flag = ex.fit_rate(x, ex.exceedance_table(vals, x), 1e-4)
        assert flag == "ok"
        assert fit.slope == pytest.approx(3.0, rel=0.03)

    def test_flags(self):
        vals = np.zeros(1000)
        x = np.array([1.0, 2.0])
        assert ex.fit_rate(x, ex.exceedance_table(vals, x), 0.01) == (None, "no_exceedances")
        vals = np.full(1000, 10.0)
        assert ex.fit_rate(x, ex.exceedance_table(vals, x), 0.01) == (None, "all_exceed")

    def test_survival(self):
        times = np.array([0.2, np.nan, 0.6, 0.4])
        np.testing.assert_allclose(ex.survival_curve(times, np.array([0.0, 0.3, 0.5, 1.0])),
                                   [1.0, 0.75, 0.5, 0.25])

    def test_first_crossing(self):
        assert ex._first_crossing(0.0, 1.0, -1.0, 3.0) == pytest.approx(0.25)
        assert ex._first_crossing(0.0, 1.0, 0.0, 3.0) == 0.0


SMALL_TAILS = dict(eps=0.1, sigma=0.05, T=0.2, N=4, m_values=(1, 2), paths=1000, block_size=250)


class TestTails:
    def test_validation(self):
        for bad in (dict(paths=500), dict(alphas=(0.5,)), dict(dt=0.05), dict(m_values=(0, 1))):
            with pytest.raises(ConfigurationError):
                ex.TailConfig(**{**SMALL_TAILS, **bad}).validate()

    def test_small_run(self):
        rep = ex.tail_experiment(ex.TailConfig(**SMALL_TAILS), seed=3, workers=1)
        assert [e["m"] for e in rep.entries] == [1, 2]
        for e in rep.entries:
            p = np.array(e["p"])
            assert np.all(np.diff(p) <= 0)
            assert e["max_observed"] >= e["median"] > 0
        header, rows = rep.csv_rows()
        assert len(rows) == 2 * 64 and len(header) == len(rows[0])
        assert "continuum" in rep.to_dict()["note"]

    def test_worker_independence(self):
        cfg = ex.TailConfig(**SMALL_TAILS)
        a = ex.tail_experiment(cfg, seed=4, workers=1).to_dict()
        b = ex.tail_experiment(cfg, seed=4, workers=2).to_dict()
        assert a == b

    def test_affine_family(self):
        cfg = ex.TailConfig(**{**SMALL_TAILS, "a_family": {"family": "affine", "coefficients": [-2.0, 1.0]}})
        sup = ex.wick_sup_norms(cfg, 8, np.random.default_rng(0))
        assert sup.shape == (8, 2, 1) and np.all(sup > 0)
        with pytest.raises(ConfigurationError):
            ex._path_from_dict({"family": "spline"})


class TestStable:
    def test_zero_noise_point(self):
        cfg = ex.Phi1Config(N=4, T=0.3, points=[[0.1, 0.0]], paths=10)
        rep = ex.phi1_experiment(cfg)
        assert rep.points[0]["median_holder"] == 0.0
        assert rep.points[0]["diverged"] == 0

    def test_small_sweep(self):
        cfg = ex.Phi1Config(N=4, T=0.3, points=[[0.1, 0.01], [0.1, 0.02], [0.05, 0.01]],
                            paths=40, block_size=20)
        rep = ex.phi1_experiment(cfg, seed=1, workers=1)
        r = rep.ratios(0.1)
        assert len(r) == 1 and r[0] > 1
        assert rep.nu_fit() is not None
        header, rows = rep.csv_rows()
        assert len(rows) == 3

    def test_validation(self):
        with pytest.raises(ConfigurationError):
            ex.Phi1Config(gamma=1.5, nu=0.3).validate()
        with pytest.raises(ConfigurationError):
            ex.Phi1Config(steps_per_eps=5).validate()


class TestPerp:
    def test_validation(self):
        with pytest.raises(ConfigurationError):
            ex.PerpConfig(slope=100.0, T=1.0).validate()

    def test_accounting(self):
        cfg = ex.PerpConfig(N=4, T=0.3, sigmas=(0.01, 0.04), paths=40, block_size=20, H0_factor=2.0)
        rep = ex.phi1perp_experiment(cfg, seed=2, workers=1)
        for p in rep.points:
            assert 0 <= p["censored"] <= p["paths"] == 40
            assert p["exceed_censored_as_fail"] >= p["exceed_censored_as_pass"]
        assert rep.points[1]["median_sup"] > rep.points[0]["median_sup"]
        assert rep.exponent is not None


class TestExit:
    def test_time_grid_hits_t_plus(self):
        cfg = ex.ExitConfig(eps=0.01, steps_per_eps=7)
        tg = cfg.time_grid()
        assert np.any(tg == cfg.t_plus) and tg[0] == 0.0 and tg[-1] == pytest.approx(cfg.T)
        assert np.all(np.diff(tg) <= cfg.eps / 7 + 1e-15)

    def test_validation(self):
        for bad in (dict(tube="round"), dict(sigmas=(2.0,)), dict(T=0.55), dict(sigmas=())):
            with pytest.raises(ConfigurationError):
                ex.ExitConfig(**bad).validate()

    def test_accounting_and_zero_noise(self):
        cfg = ex.ExitConfig(sigmas=(0.0, 1e-2, 1e-3), paths=60, block_size=30)
        rep = ex.pitchfork_exit_experiment(cfg, seed=5, workers=1)
        for p in rep.points:
            assert p["exits_plus"] + p["censored_plus"] == p["paths"]
            assert p["survival_plus"][0] == 1.0
        zero = rep.points[0]
        assert zero["exits_plus"] == 0 and zero["censored_plus"] == 60
        assert rep.gates["zero_noise_full_delay"]
        assert "delay_constant_within_30pct" in rep.gates

    def test_literal_tube(self):
        cfg = ex.ExitConfig(sigmas=(1e-2,), paths=20, block_size=20, tube="literal")
        rep = ex.pitchfork_exit_experiment(cfg, seed=5)
        # the literal tube is sigma-times narrower, so nearly every path leaves it
        assert rep.points[0]["exits_minus"] >= 18
        assert "delay_constant_within_30pct" not in rep.gates


class TestProbe:
    def test_decreasing_rate_at_inf(self):
        cfg = ex.ProbeConfig(N=8, q0_values=(0, 2, 4), samples=4000)
        rates = ex.pairing_probe(cfg, seed=1).rates()
        assert None not in rates
        assert rates[0] > rates[1] > rates[2]

    def test_increasing_rate_at_l2(self):
        cfg = ex.ProbeConfig(N=8, q0_values=(0, 2, 4), samples=4000, p=2.0)
        rep = ex.pairing_probe(cfg, seed=1)
        rates = rep.rates()
        assert rates[0] < rates[1] < rates[2]
        assert np.isfinite(rep.pairing_constant) and rep.pairing_constant > 0

    def test_sample_floor(self):
        with pytest.raises(ConfigurationError):
            ex.pairing_probe(ex.ProbeConfig(samples=100))


def test_schauder_probe():
    out = ex.schauder_probe(ex.SchauderConfig())
    assert all(out["gates"].values())
    assert out["single_mode"]["annulus"] == 3


def test_selftest_quick():
    out = ex.selftest(quick=True, seed=0)
    assert set(out["gates"]) == {"hermite_expansion", "parseval", "chaos_oracle", "ou_variance"}
    assert all(out["gates"].values()), out["details"]
