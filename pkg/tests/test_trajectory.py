import math

import numpy as np
import pytest

from genbounds.info import Pmf, mutual_information
from genbounds.ratedistortion import DistortionSpec, rd_trajectory
from genbounds.seeding import rng
from genbounds.trajectory import (
    CouplingEstimate,
    LogisticToy,
    QuadraticToy,
    Quantizer,
    TrajectoryDivergence,
    estimate_M,
    gen_trajectory,
    lr_sweep,
    simulate_trajectory,
    thm7_bound,
    thm8_bound,
    trajectory_distribution,
)


class TestSimulate:
    def test_zero_lr_constant(self):
        model = QuadraticToy()
        s = model.sample_dataset(10, 1)
        tr = simulate_trajectory(model, s, 0.0, 40, seed=2)
        assert len(set(tr.key())) == 1

    def test_seed_determinism(self):
        model = LogisticToy()
        s = model.sample_dataset(12, 3)
        a = simulate_trajectory(model, s, 0.3, 60, seed=4)
        b = simulate_trajectory(model, s, 0.3, 60, seed=4)
        assert a.key() == b.key()
        assert np.array_equal(a.raw_states, b.raw_states)

    def test_quadratic_gd_monotone_approach(self):
        # convexity oracle: full-batch GD on a quadratic contracts toward the
        # empirical minimizer monotonically
        model = QuadraticToy()
        s = model.sample_dataset(16, 6)
        tr = simulate_trajectory(
            model, s, 0.15, 30, seed=7, stochastic=False, t1=0, t2=30, w0=0.9
        )
        target = float(np.mean(model.z_values[s]))
        dists = np.abs(tr.raw_states - target)
        assert np.all(np.diff(dists) <= 1e-12)

    def test_divergence_names_step(self):
        model = QuadraticToy()
        s = model.sample_dataset(8, 8)
        with pytest.raises(TrajectoryDivergence, match="step"):
            simulate_trajectory(model, s, 80.0, 50, seed=9, stochastic=False, w0=0.9)

    def test_window_default_last_half(self):
        model = QuadraticToy()
        s = model.sample_dataset(8, 10)
        tr = simulate_trajectory(model, s, 0.05, 40, seed=11)
        assert (tr.t1, tr.t2) == (20, 40)
        assert tr.delta_t == 20
        assert tr.state_indices.size == 20

    def test_states_on_grid(self):
        model = LogisticToy()
        s = model.sample_dataset(10, 12)
        tr = simulate_trajectory(model, s, 0.4, 50, seed=13)
        q = tr.quantizer
        for v in tr.states:
            assert abs((v - q.lo) / q.step - round((v - q.lo) / q.step)) < 1e-9


class TestGenTrajectory:
    def test_constant_trajectory_matches_single(self):
        model = QuadraticToy()
        s = model.sample_dataset(10, 14)
        tr = simulate_trajectory(model, s, 0.0, 30, seed=15, w0=0.25)
        v = tr.states[0]
        expected = model.population_risk(v) - model.empirical_risk(s, v)
        assert gen_trajectory(model, s, tr) == pytest.approx(expected, abs=1e-12)

    def test_matches_naive_loop(self):
        model = LogisticToy()
        s = model.sample_dataset(14, 16)
        tr = simulate_trajectory(model, s, 0.5, 40, seed=17)
        naive = np.mean(
            [model.population_risk(v) - model.empirical_risk(s, v) for v in tr.states]
        )
        assert gen_trajectory(model, s, tr) == pytest.approx(float(naive), abs=1e-12)

    def test_bounded_for_unit_loss(self):
        model = LogisticToy()
        gen = rng(18)
        for t in range(10):
            s = model.sample_dataset(10, 19, t)
            tr = simulate_trajectory(model, s, float(gen.uniform(0.05, 1.5)), 30, seed=t)
            assert -1.0 <= gen_trajectory(model, s, tr) <= 1.0


class TestTrajectoryBoundFormulas:
    def test_thm7_trivial(self):
        assert thm7_bound(0.0, 0.05, 100, 0.0).bound_value == pytest.approx(
            math.sqrt(math.log(20) / 200), abs=1e-12
        )
        assert thm7_bound(0.0, 1.0, 50, 0.05).bound_value == pytest.approx(0.05, abs=1e-12)

    def test_thm7_direct_value(self):
        rep = thm7_bound(1.2, 0.05, 200, 0.02)
        assert rep.bound_value == pytest.approx(
            math.sqrt((1.2 + math.log(20)) / 400) + 0.02, abs=1e-12
        )
        assert rep.bound_value == pytest.approx(0.12240, abs=1e-4)

    def test_thm8_trivial(self):
        n = 60
        rep = thm8_bound(0.0, 0.0, 1.0, 0.1, n, 0.0)
        assert rep.bound_value == pytest.approx(
            math.sqrt(math.log(math.sqrt(2 * n) / 0.1) / (2 * n - 1)), abs=1e-12
        )

    def test_thm8_lipschitz_floor(self):
        rep = thm8_bound(0.0, 0.0, 2.0, 0.9999999, 10**6, 0.5)
        assert rep.bound_value >= math.sqrt(4 * 2.0 * 0.5) - 1e-3

    def test_thm8_direct_value(self):
        rep = thm8_bound(0.8, 0.3, 1.0, 0.1, 100, 0.01)
        expected = math.sqrt((0.8 + 0.3 + math.log(math.sqrt(200) * 10)) / 199 + 0.04)
        assert rep.bound_value == pytest.approx(expected, abs=1e-12)
        assert rep.bound_value == pytest.approx(0.26498, abs=1e-3)

    def test_thm8_monotone(self):
        base = thm8_bound(0.5, 0.2, 1.0, 0.1, 50, 0.01).bound_value
        assert thm8_bound(0.9, 0.2, 1.0, 0.1, 50, 0.01).bound_value >= base
        assert thm8_bound(0.5, 0.6, 1.0, 0.1, 50, 0.01).bound_value >= base
        assert thm8_bound(0.5, 0.2, 1.0, 0.1, 50, 0.05).bound_value >= base


class TestCoupling:
    def test_data_independent_trajectory(self):
        pi = np.tile([0.25, 0.5, 0.25], (4, 1))
        est = estimate_M(pi, np.full(4, 0.25), 0.2, budget=300, seed=1)
        assert est.log_M == pytest.approx(0.0, abs=1e-9)
        assert est.plug_in == pytest.approx(0.0, abs=1e-12)

    def test_deterministic_distinct_rows(self):
        k = 4
        pi = np.eye(k)
        est = estimate_M(pi, np.full(k, 1 / k), 0.5, budget=300, seed=2)
        assert est.plug_in == pytest.approx(math.log(k), abs=1e-12)
        assert est.log_M >= est.plug_in - 1e-12

    def test_sup_dominates_plug_in(self):
        gen = rng(21)
        pi = gen.dirichlet(np.ones(3), size=5)
        ps = gen.dirichlet(np.ones(5))
        est = estimate_M(pi, ps, 0.3, budget=500, seed=3)
        assert est.log_M >= est.plug_in - 1e-12
        assert est.log_M >= 0.0

    def test_negative_log_m_rejected(self):
        with pytest.raises(ValueError):
            CouplingEstimate(log_M=-0.5, method="plug-in", plug_in=0.0)


class TestExactModeTailDomination:
    def test_thm7_dominates_exact_tail(self):
        # exact mode: enumerable dataset types, deterministic full-batch GD,
        # so the law of the windowed trajectory gen error is exact. The
        # ball-sup bound must dominate its (1 - delta) tail.
        import itertools
        import math as _math

        from genbounds.learning import enumerate_types
        from genbounds.info import gdelta_sup, in_gdelta
        from genbounds.ratedistortion import DistortionSpec, rd_curve

        model = QuadraticToy()
        n, steps, delta, eps = 6, 24, 0.25, 0.01
        types = enumerate_types(2, n)
        weights = np.array(
            [
                _math.comb(n, int(c[1]))
                * np.asarray(model.mu)[0] ** c[0]
                * np.asarray(model.mu)[1] ** c[1]
                for c in types
            ]
        )
        weights /= weights.sum()
        trajs = []
        gens = []
        for c in types:
            samples = np.repeat([0, 1], c)
            tr = simulate_trajectory(
                model, samples, 0.35, steps, seed=0, stochastic=False, w0=0.9
            )
            trajs.append(tr)
            gens.append(gen_trajectory(model, samples, tr))
        gens = np.asarray(gens)
        # exact (1 - delta) tail of the windowed gen error
        order = np.argsort(gens)
        cum = np.cumsum(weights[order])
        tail_idx = order[np.searchsorted(cum, 1 - delta, side="left")]
        tail_value = gens[tail_idx]
        # per-pair trajectory gen table for the RD of the trajectory law
        alphabet = sorted({tr.key() for tr in trajs})
        key_to_col = {k: j for j, k in enumerate(alphabet)}
        gen_hat = np.zeros((len(types), len(alphabet)))
        for i, c in enumerate(types):
            samples = np.repeat([0, 1], c)
            for k, j in key_to_col.items():
                tr_vals = [trajs[0].quantizer.value(idx) for idx in k]
                gen_hat[i, j] = float(
                    np.mean(
                        [
                            model.population_risk(v) - model.empirical_risk(samples, v)
                            for v in tr_vals
                        ]
                    )
                )
        own_col = np.array([key_to_col[tr.key()] for tr in trajs])

        def rd_of(nu):
            nu = np.clip(nu, 0, None)
            nu = nu / nu.sum()
            own = float((nu * gen_hat[np.arange(len(types)), own_col]).sum())
            return rd_curve(
                nu, DistortionSpec(-gen_hat, eps - own), eps - own
            ).rate_nats

        sup_rd, _ = gdelta_sup(weights, delta, rd_of, search_budget=400, seed=3)
        bound = thm7_bound(sup_rd, delta, n, eps).bound_value
        assert bound >= tail_value
        violated = float(weights[gens > bound].sum())
        assert violated <= delta


class TestSweep:
    def test_single_lr_correlation_undefined(self):
        model = QuadraticToy()
        res = lr_sweep(model, [0.1], trials=5, n=8, steps=20, seed=4)
        assert math.isnan(res.spearman_rho)

    def test_identical_trajectories_constant_rd(self):
        model = QuadraticToy()
        res = lr_sweep(model, [0.0, 0.0], trials=4, n=8, steps=20, seed=5)
        rds = [r.rd_nats for r in res.rows]
        assert rds[0] == pytest.approx(rds[1], abs=1e-12)
        assert rds[0] == pytest.approx(0.0, abs=1e-9)

    def test_divergent_rate_flagged(self):
        model = QuadraticToy()
        res = lr_sweep(model, [0.05, 50.0], trials=4, n=8, steps=25, seed=6, stochastic=False)
        flags = {r.lr: r.flag for r in res.rows}
        assert flags[0.05] == "ok" and flags[50.0] == "diverged"
        assert math.isnan([r for r in res.rows if r.flag == "diverged"][0].rd_nats)

    def test_pipeline_smoke(self):
        model = LogisticToy()
        res = lr_sweep(
            model, [0.05, 0.2, 0.8, 1.6], trials=12, n=12, steps=60, seed=7
        )
        assert all(r.flag == "ok" for r in res.rows)
        assert -1.0 <= res.spearman_rho <= 1.0

    def test_trajectory_distribution_and_rd_curve_shape(self):
        model = LogisticToy()
        trs = []
        for t in range(20):
            s = model.sample_dataset(10, 23, t)
            trs.append(simulate_trajectory(model, s, 0.8, 40, seed=100 + t))
        dist, rho, alphabet = trajectory_distribution(trs)
        assert np.asarray(dist).sum() == pytest.approx(1.0)
        assert rho.shape == (len(alphabet), len(alphabet))
        assert np.allclose(rho, rho.T)
        span = float(rho.max())
        if span > 0:
            eps_grid = [0.5 * span, 0.25 * span, 0.1 * span]
            rates = [rd_trajectory(dist, DistortionSpec(rho, e), e).rate_nats for e in eps_grid]
            assert all(b >= a - 1e-9 for a, b in zip(rates, rates[1:]))
