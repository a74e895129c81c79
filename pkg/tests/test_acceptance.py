"""Acceptance suite: one test per exit criterion, each printing a PASS line.

Run with `pytest tests/test_acceptance.py -v -s` to see the per-criterion
summary lines; every tolerance is pinned here, nothing is deferred.
"""

import math
import time

import numpy as np
import pytest

from genbounds.bounds import thm1_bound, thm5_expectation_bound
from genbounds.counterexample import ScoInstance, run_gd, scaling_study
from genbounds.info import (
    Pmf,
    binary_kl,
    binary_kl_inverse,
    binary_kl_inverse_cap,
    kl_divergence,
    mutual_information,
    renyi_divergence,
)
from genbounds.learning import FiniteLearningProblem, GibbsAlgorithm, gen_table, induced_joint
from genbounds.ratedistortion import DistortionSpec, rd_curve, rd_dimension, rd_trajectory
from genbounds.seeding import rng
from genbounds.trajectory import LogisticToy, lr_sweep
from genbounds.validation import (
    covering_default_instance,
    covering_failure_estimate,
    mc_tail_validate,
)


def report(name, detail):
    print(f"\nACCEPTANCE {name}: PASS ({detail})")


def h_nats(p):
    return 0.0 if p in (0.0, 1.0) else -p * math.log(p) - (1 - p) * math.log(1 - p)


def test_criterion_1_blahut_arimoto_correctness():
    t0 = time.time()
    worst = 0.0
    for d in (0.05, 0.1, 0.25):
        sol = rd_curve([0.5, 0.5], DistortionSpec(1.0 - np.eye(2), d), d)
        err = abs(sol.rate_nats - (math.log(2) - h_nats(d)))
        worst = max(worst, err)
        assert err < 1e-5
    sol3 = rd_curve(np.full(3, 1 / 3), DistortionSpec(1.0 - np.eye(3), 0.0), 0.0)
    err3 = abs(sol3.rate_nats - math.log(3))
    assert err3 < 1e-6
    elapsed = time.time() - t0
    assert elapsed < 1.0
    report("1 (BA correctness)", f"worst Bernoulli err {worst:.2e}, lossless err {err3:.2e}, {elapsed:.2f}s")


def test_criterion_2_thm1_tail_guarantee():
    t0 = time.time()
    gen = rng(301)
    loss = gen.uniform(0.0, 1.0, size=(4, 4))
    np.fill_diagonal(loss, 0.0)
    prob = FiniteLearningProblem(loss=loss, mu=Pmf(gen.dirichlet(np.ones(4))), bound=1.0)
    alg = GibbsAlgorithm(prior=Pmf.uniform(4), beta=1.0)
    prior = np.asarray(alg.prior)
    sigma = prob.sigma
    n, delta, trials = 25, 0.1, 10_000

    def bound_fn(s, w):
        post = np.asarray(alg.posterior(prob, s))
        rate = max(0.0, math.log(post[w] / prior[w]))
        return thm1_bound(rate, sigma, n, delta, 0.0).bound_value

    rep = mc_tail_validate(prob, alg, bound_fn, n, delta, trials, seed=302)
    elapsed = time.time() - t0
    assert rep.violation_rate <= delta + 3 * rep.binomial_se
    assert elapsed < 60.0
    report(
        "2 (Thm-1 tail)",
        f"violations {rep.violations}/{trials} = {rep.violation_rate:.4f} "
        f"<= {delta + 3 * rep.binomial_se:.4f}, {elapsed:.1f}s",
    )


def test_criterion_3_gd_dynamics_match_closed_form():
    t0 = time.time()
    checked = {}
    for n in (4, 6, 8):
        inst = ScoInstance(n)
        gen = rng(310, n)
        hits = 0
        attempts = 0
        worst = 0.0
        while hits < 50 and attempts < 200:
            attempts += 1
            s = (gen.random((inst.n, inst.d)) < 0.5).astype(np.uint8)
            w_it, ok = run_gd(inst, s, "iterative")
            if not ok:
                continue
            w_cf, _ = run_gd(inst, s, "closed_form")
            diff = float(np.max(np.abs(w_it - w_cf)))
            worst = max(worst, diff)
            assert diff <= 1e-9
            hits += 1
        assert hits >= 50
        checked[n] = worst
    elapsed = time.time() - t0
    assert elapsed < 120.0
    report(
        "3 (GD closed form)",
        "worst per-coordinate gaps "
        + ", ".join(f"n={n}: {v:.2e}" for n, v in checked.items())
        + f", {elapsed:.1f}s",
    )


def test_criterion_4_counterexample_scaling():
    t0 = time.time()
    res = scaling_study(range(4, 11), trials=2000, seed=42)
    assert -1.35 <= res.slope_bound <= -0.65
    floors = {}
    for row in res.rows:
        assert row.dominance_ok
        inst = ScoInstance(row.n)
        floor = 1 - 2 * math.exp(-inst.T / 36)
        se = math.sqrt(max(floor * (1 - floor), 0.25 / 4) / 2000)
        assert row.event_rate >= floor - 3 * se
        floors[row.n] = (row.event_rate, floor)
    report(
        "4 (scaling study)",
        f"bound slope {res.slope_bound:.3f} in [-1.35,-0.65], mc slope {res.slope_mc:.3f}, "
        f"dominance at every n, event rates above floors, {time.time() - t0:.1f}s",
    )


def test_criterion_5_kl_inverse_grid():
    worst = 0.0
    for a in np.linspace(0.0, 1.0, 50):
        for b in np.linspace(0.0, 2.5, 50):
            p = binary_kl_inverse(a, b)
            assert p <= binary_kl_inverse_cap(a, b) + 1e-12
            if p < 1.0 and 0.0 < a < 1.0:
                err = abs(binary_kl(p, a) - b)
                worst = max(worst, err)
                assert err <= 1e-9
    report("5 (KL inverse)", f"50x50 grid, worst inversion error {worst:.2e}, cap holds everywhere")


def test_criterion_6_renyi_kl_limit():
    gen = rng(306)
    u = np.full(4, 0.25)
    worst = 0.0
    for _ in range(100):
        p = 0.9 * gen.dirichlet(np.ones(4)) + 0.1 * u
        q = 0.9 * gen.dirichlet(np.ones(4)) + 0.1 * u
        dkl = kl_divergence(p, q)
        gap = abs(renyi_divergence(p, q, 1.001) - dkl)
        worst = max(worst, gap / (1e-3 * (1 + dkl)))
        assert gap <= 1e-3 * (1 + dkl)
        vals = [renyi_divergence(p, q, a) for a in (0.5, 1.001, 2.0, 4.0)]
        assert all(b >= a - 1e-10 for a, b in zip(vals, vals[1:]))
    report("6 (Renyi limit)", f"100 pairs, worst budget use {worst:.2f}, monotone in alpha")


def test_criterion_7_xu_raginsky_specialization():
    gen = rng(307)
    prob = FiniteLearningProblem(
        loss=gen.uniform(0, 1, size=(2, 3)), mu=Pmf(gen.dirichlet(np.ones(2))), bound=1.0
    )
    alg = GibbsAlgorithm(prior=Pmf.uniform(3), beta=1.3)
    joint, ctx = induced_joint(prob, alg, 3)
    gt = gen_table(prob, ctx)
    P = np.asarray(joint)
    i_sw = mutual_information(P)
    sigma = prob.sigma
    n = ctx.shape[1]
    lam = math.sqrt(2 * n * i_sw / sigma**2)
    rep = thm5_expectation_bound(
        "i", P, P / P.sum(axis=1, keepdims=True), P.sum(axis=0), gt, gt, lam, 0.0,
        mgf="surrogate", sigma_g=sigma / math.sqrt(n),
    )
    target = math.sqrt(2 * sigma**2 * i_sw / n)
    err = abs(rep.bound_value - target)
    truth = rep.extra["true_e_f"]
    assert err <= 1e-9
    assert rep.bound_value >= truth
    report(
        "7 (Xu-Raginsky specialization)",
        f"|bound - sqrt(2 sigma^2 I/n)| = {err:.2e}, bound {rep.bound_value:.5f} >= E[gen] {truth:.5f}",
    )


def test_criterion_8_covering_exponent_trend():
    t0 = time.time()
    inst = covering_default_instance()
    trials = 20_000
    rows = covering_failure_estimate(
        inst["prob"], inst["alg"], inst["n"], inst["rates"], inst["epsilon"],
        [4, 8, 12], trials, seed=7, q_hat=inst["q_hat"],
    )
    exps = [r.exponent for r in rows]
    target = math.log(1 / inst["delta"]) - 0.2
    assert all(not r.censored for r in rows)
    assert all(b >= a for a, b in zip(exps, exps[1:]))
    assert exps[-1] >= target
    report(
        "8 (covering exponents)",
        f"exponents {[f'{e:.3f}' for e in exps]} non-decreasing, last >= {target:.3f}, "
        f"failures {[r.failures for r in rows]}, {time.time() - t0:.1f}s",
    )


def test_criterion_9_trajectory_pipeline():
    t0 = time.time()
    model = LogisticToy()
    lrs = [0.05, 0.1, 0.2, 0.4, 0.8, 1.2, 1.6, 2.0]
    res = lr_sweep(model, lrs, trials=50, n=24, steps=120, seed=5)
    assert len(res.rows) == 8
    assert all(r.flag in ("ok", "diverged") for r in res.rows)
    assert all(math.isfinite(r.mean_gen) for r in res.rows if r.flag == "ok")
    # per-lr RD curves: non-increasing and convex in epsilon
    from genbounds.trajectory import simulate_trajectory, trajectory_distribution

    for li, lr in enumerate((0.2, 0.8)):
        trs = []
        for t in range(40):
            s = model.sample_dataset(24, 900 + li, t)
            trs.append(simulate_trajectory(model, s, lr, 120, seed=7000 + 100 * li + t))
        dist, rho, _ = trajectory_distribution(trs)
        span = float(rho.max())
        if span == 0.0:
            continue
        eps_grid = np.linspace(0.05 * span, 0.8 * span, 6)
        rates = [rd_trajectory(dist, DistortionSpec(rho, e), e).rate_nats for e in eps_grid]
        assert all(b <= a + 1e-7 for a, b in zip(rates, rates[1:]))
        for i in range(1, len(rates) - 1):
            assert rates[i] <= 0.5 * (rates[i - 1] + rates[i + 1]) + 1e-6
    # rate-distortion dimension of the 1-D uniform grid source
    k = 8
    grid = np.arange(2**k) / 2**k
    rho = np.abs(grid[:, None] - grid[None, :])
    _, dim = rd_dimension(
        np.full(2**k, 2.0**-k), DistortionSpec(rho, 0), [2.0**-j for j in range(2, 7)]
    )
    assert abs(dim - 1.0) <= 0.2
    elapsed = time.time() - t0
    assert elapsed < 300.0
    report(
        "9 (trajectory pipeline)",
        f"8-point sweep ok, RD curves monotone/convex, dim estimate {dim:.3f}, {elapsed:.1f}s",
    )


def test_criterion_10_out_of_scope_documented():
    # Full-scale experiments and the continuous-time dimension recovery are
    # explicitly out of scope; their finite signatures are covered by the
    # covering-exponent and trajectory-pipeline criteria above.
    report("10 (scope)", "full-scale replications excluded by design; property suites 8-9 stand in")
