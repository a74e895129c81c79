"""Command-line front end: bound, rd, mc-validate, covering, trajectory, counterexample, sweep.

Flags may be seeded from a JSON config file (--config); explicit flags
override file values, unknown or duplicate config keys are rejected. Every
run writes its outputs plus a manifest (config snapshot, artifact version,
wall time, output hashes) into the output directory. Exit codes: 0 pass,
2 validation failure, 1 error.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import (
    fixed_size_bound,
    log_mgf,
    pac_bayes_eq22,
    prop5_bound,
    rd_tail_bound,
    seeger_fast_rate_bound,
    thm1_bound,
    thm5_expectation_bound,
    toy_example_bound,
)
from .counterexample import scaling_study
from .info import Pmf
from .io import file_sha256, load_problem, write_csv, write_report
from .learning import GibbsAlgorithm, gen_table, induced_joint, sample_dataset
from .ratedistortion import DistortionSpec, rd_curve, rd_gen
from .seeding import rng as _rng
from .trajectory import LogisticToy, QuadraticToy, lr_sweep, thm7_bound, thm8_bound
from .validation import covering_default_instance, covering_failure_estimate, mc_tail_validate

BOUND_KINDS = ("thm1", "eq4", "eq21", "seeger", "eq22", "prop5i", "prop5ii", "toy", "thm5i", "thm5ii")


def _strict_load_config(path: str) -> dict:
    def hook(pairs):
        keys = [k for k, _ in pairs]
        dupes = {k for k in keys if keys.count(k) > 1}
        if dupes:
            raise ValueError(f"duplicate config key(s): {sorted(dupes)}")
        return dict(pairs)

    return json.loads(Path(path).read_text(encoding="utf-8"), object_pairs_hook=hook)


def _apply_config(args: argparse.Namespace, argv: list[str]) -> argparse.Namespace:
    if not getattr(args, "config", None):
        return args
    cfg = _strict_load_config(args.config)
    known = set(vars(args))
    unknown = set(cfg) - known
    if unknown:
        raise ValueError(f"unknown config key(s): {sorted(unknown)}")
    cli_tokens = {t.split("=")[0].lstrip("-").replace("-", "_") for t in argv if t.startswith("--")}
    for key, value in cfg.items():
        if key in cli_tokens:
            continue  # explicit flag wins
        setattr(args, key, value)
    return args


def _floats(text: str) -> list[float]:
    return [float(x) for x in str(text).split(",") if x != ""]


def _ints(text: str) -> list[int]:
    return [int(x) for x in str(text).split(",") if x != ""]


def _manifest(args, outputs: list[Path], t0: float) -> dict:
    cfg = {k: v for k, v in vars(args).items() if k != "func" and not k.startswith("_")}
    return {
        "config": cfg,
        "artifact_version": __version__,
        "wall_time_s": time.time() - t0,
        "outputs": [{"path": str(p), "sha256": file_sha256(p)} for p in outputs],
    }


def _out_dir(args) -> Path:
    out = Path(args.out)
    if out.suffix:  # a file path was given; use its directory for the manifest
        return out.parent
    return out


def _gibbs_setup(args):
    if not getattr(args, "problem", None):
        raise ValueError(f"--problem is required for this {args.command} invocation")
    prob = load_problem(args.problem)
    prior = Pmf.uniform(prob.w_alphabet_size)
    return prob, GibbsAlgorithm(prior=prior, beta=args.beta)


def cmd_bound(args) -> int:
    kind = args.kind
    if kind == "thm1":
        rep = thm1_bound(args.rate, args.sigma, args.n, args.delta, args.epsilon)
    elif kind == "eq4":
        rep = fixed_size_bound(args.rate, args.sigma, args.n, args.delta, args.epsilon)
    elif kind == "seeger":
        rep = seeger_fast_rate_bound(args.emp_risk, args.sup_mi, args.sigma, args.n, args.delta)
    elif kind == "toy":
        rep = toy_example_bound(args.means_sq_sum, args.lipschitz, args.d, args.sigma, args.n, args.delta)
    elif kind == "eq21":
        prob, alg = _gibbs_setup(args)
        rep = rd_tail_bound(prob, alg, args.n, args.delta, args.epsilon, seed=args.seed)
    elif kind in ("eq22", "prop5i", "prop5ii"):
        prob, alg = _gibbs_setup(args)
        joint, contexts = induced_joint(prob, alg, args.n, by_type=True)
        gtab = gen_table(prob, contexts, by_type=True)
        f = args.lam * gtab
        p_s = np.asarray(joint.marginal_s())
        s = sample_dataset(prob, args.n, args.seed)
        counts = np.bincount(s.samples, minlength=prob.z_alphabet_size)
        s_idx = int(np.flatnonzero((contexts == counts).all(axis=1))[0])
        pi = np.asarray(alg.posterior(prob, s))
        q_rows = np.tile(np.asarray(alg.prior), (len(contexts), 1))
        if kind == "eq22":
            rep = pac_bayes_eq22(pi, np.asarray(alg.prior), log_mgf(p_s, q_rows, f), args.delta)
        elif kind == "prop5i":
            eps = 0.0  # lossless quantizer: reproduction = W, g = f
            rep = prop5_bound(
                "i", P_S=p_s, q_hat=q_rows, g=f, delta=args.delta, epsilon=eps,
                s_index=s_idx, pi=pi, p_quant=pi, f=f,
            )
        else:
            k = prob.w_alphabet_size
            flip = args.kernel_flip
            kernel = (1 - flip) * np.eye(k) + flip / max(k - 1, 1) * (1 - np.eye(k))
            w_idx = int(_rng(args.seed, 1).choice(k, p=pi))
            pws = np.stack([
                np.asarray(alg.posterior_from_counts(prob, c, args.n)) for c in contexts
            ])
            achieved = float(f[s_idx, w_idx] - kernel[w_idx] @ f[s_idx])
            rep = prop5_bound(
                "ii", P_S=p_s, q_hat=q_rows, g=f, delta=args.delta,
                epsilon=max(args.epsilon, achieved, 0.0), s_index=s_idx,
                kernel=kernel, P_WgS=pws, w_index=w_idx, f=f,
            )
    elif kind in ("thm5i", "thm5ii"):
        prob, alg = _gibbs_setup(args)
        joint, contexts = induced_joint(prob, alg, args.n, by_type=True)
        gtab = gen_table(prob, contexts, by_type=True)
        q = np.asarray(joint.marginal_w())
        pws = np.asarray(joint) / np.asarray(joint).sum(axis=1, keepdims=True)
        if kind == "thm5i":
            rep = thm5_expectation_bound(
                "i", joint, pws, q, gtab, gtab, lam=args.lam if args.lam > 0 else None,
                epsilon=args.epsilon,
            )
        else:
            f = gtab**2 + args.f_floor
            rep = thm5_expectation_bound(
                "ii", joint, pws, q, f, f, lam=None, alpha=args.alpha,
            )
    else:
        raise ValueError(f"unknown bound kind {kind}")
    t0 = args._t0
    out = Path(args.out)
    path = write_report(rep, out if out.suffix else out / "report.json")
    write_report(_manifest(args, [path], t0), _out_dir(args) / "manifest.json")
    print(f"{kind}: bound = {rep.bound_value:.6g}")
    return 0


def cmd_rd(args) -> int:
    rows = []
    if args.problem:
        prob, alg = _gibbs_setup(args)
        joint, contexts = induced_joint(prob, alg, args.n, by_type=True)
        for eps in _floats(args.epsilon_grid):
            sol = rd_gen(joint, prob, contexts, eps, by_type=True)
            rows.append((eps, sol.rate_nats, sol.lagrange_lambda, sol.iterations, sol.converged))
    else:
        source = Pmf(np.asarray(_floats(args.source)))
        k = source.alphabet_size
        if args.distortion == "hamming":
            d = 1.0 - np.eye(k)
        elif args.distortion == "abs":
            grid = np.arange(k, dtype=float) / max(k - 1, 1)
            d = np.abs(grid[:, None] - grid[None, :])
        else:
            d = np.asarray(json.loads(Path(args.distortion).read_text()), dtype=float)
        for eps in _floats(args.epsilon_grid):
            sol = rd_curve(source, DistortionSpec(d, eps), eps)
            rows.append((eps, sol.rate_nats, sol.lagrange_lambda, sol.iterations, sol.converged))
    out = Path(args.out)
    path = write_csv(rows, ["epsilon", "rate_nats", "lagrange", "iterations", "converged"],
                     out if out.suffix else out / "rd_curve.csv")
    write_report(_manifest(args, [path], args._t0), _out_dir(args) / "manifest.json")
    print(f"rd: {len(rows)} points -> {path}")
    return 0


def cmd_mc_validate(args) -> int:
    prob, alg = _gibbs_setup(args)
    sigma = prob.sigma
    prior = np.asarray(alg.prior)

    def bound_fn(s, w):
        post = np.asarray(alg.posterior(prob, s))
        rate = max(0.0, math.log(post[w] / prior[w])) if post[w] > 0 else 0.0
        if args.kind == "thm1":
            return thm1_bound(rate, sigma, args.n, args.delta, args.epsilon).bound_value
        return fixed_size_bound(rate, sigma, args.n, args.delta, args.epsilon).bound_value

    report = mc_tail_validate(prob, alg, bound_fn, args.n, args.delta, args.trials, args.seed)
    out = Path(args.out)
    path = write_report(report, out if out.suffix else out / "validation.json")
    write_report(_manifest(args, [path], args._t0), _out_dir(args) / "manifest.json")
    print(
        f"mc-validate: rate {report.violation_rate:.4f} vs delta {args.delta} "
        f"(+3se {report.target_delta + 3 * report.binomial_se:.4f}) -> {'pass' if report.passed else 'FAIL'}"
    )
    return 0 if report.passed else 2


def cmd_covering(args) -> int:
    inst = covering_default_instance()
    rows = covering_failure_estimate(
        inst["prob"], inst["alg"], inst["n"], inst["rates"], inst["epsilon"],
        _ints(args.m_grid), args.trials, args.seed, q_hat=inst["q_hat"],
    )
    out = Path(args.out)
    path = write_csv(
        [(r.m, r.trials, r.failures, r.exponent, r.censored) for r in rows],
        ["m", "trials", "failures", "exponent", "censored"],
        out if out.suffix else out / "covering.csv",
    )
    write_report(_manifest(args, [path], args._t0), _out_dir(args) / "manifest.json")
    for r in rows:
        print(f"m={r.m}: failures {r.failures}/{r.trials}, exponent {r.exponent:.4f}, censored={r.censored}")
    return 0


def _load_trajectory_spec(path: str):
    data = _strict_load_config(path)
    kind = data.pop("model", "logistic")
    known = {
        "logistic": {"mu", "w_max"},
        "quadratic": {"z_values", "mu", "w_lo", "w_hi"},
    }
    if kind not in known:
        raise ValueError(f"unknown trajectory model {kind!r}")
    unknown = set(data) - known[kind]
    if unknown:
        raise ValueError(f"unknown trajectory spec key(s): {sorted(unknown)}")
    return LogisticToy(**data) if kind == "logistic" else QuadraticToy(**data)


def cmd_trajectory(args) -> int:
    if args.spec:
        model = _load_trajectory_spec(args.spec)
    else:
        model = LogisticToy() if args.model == "logistic" else QuadraticToy()
    result = lr_sweep(
        model, _floats(args.lr_grid), args.trials, n=args.n, steps=args.steps,
        epsilon=args.epsilon if args.epsilon > 0 else None, seed=args.seed, bins=args.bins,
    )
    out = Path(args.out)
    path = write_csv(result.to_csv_rows(), ["lr", "mean_gen", "rd_nats", "flag"],
                     out if out.suffix else out / "sweep.csv")
    write_report(_manifest(args, [path], args._t0), _out_dir(args) / "manifest.json")
    print(f"trajectory: spearman rho = {result.spearman_rho}")
    return 0


def cmd_counterexample(args) -> int:
    result = scaling_study(_ints(args.n_list), args.trials, seed=args.seed, delta=args.delta)
    out = Path(args.out)
    path = write_csv(
        [
            (r.n, r.mc_mean_gen, r.bound_expectation, r.bound_tail, r.event_rate, result.slope_bound)
            for r in result.rows
        ],
        ["n", "mc_mean_gen", "bound_expectation", "bound_tail", "event_rate", "slope_fit"],
        out if out.suffix else out / "scaling.csv",
    )
    write_report(_manifest(args, [path], args._t0), _out_dir(args) / "manifest.json")
    print(
        f"counterexample: bound slope {result.slope_bound:.3f}, mc slope {result.slope_mc:.3f}"
        if args.trials > 0
        else f"counterexample: bound slope {result.slope_bound:.3f} (bounds only)"
    )
    return 0


def cmd_sweep(args) -> int:
    rows = []
    for n in _ints(args.n_grid):
        if args.kind == "thm1":
            v = thm1_bound(args.rate, args.sigma, n, args.delta, args.epsilon).bound_value
        elif args.kind == "eq4":
            v = fixed_size_bound(args.rate, args.sigma, n, args.delta, args.epsilon).bound_value
        elif args.kind == "seeger":
            v = seeger_fast_rate_bound(args.emp_risk, args.sup_mi, args.sigma, n, args.delta).bound_value
        elif args.kind == "thm7":
            v = thm7_bound(args.rate, args.delta, n, args.epsilon).bound_value
        elif args.kind == "thm8":
            v = thm8_bound(args.rate, args.log_m, args.lipschitz, args.delta, n, args.epsilon).bound_value
        else:
            raise ValueError(f"sweep does not support kind {args.kind}")
        rows.append((n, v))
    out = Path(args.out)
    path = write_csv(rows, ["n", "bound_value"], out if out.suffix else out / "sweep_bounds.csv")
    write_report(_manifest(args, [path], args._t0), _out_dir(args) / "manifest.json")
    print(f"sweep: {len(rows)} rows -> {path}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="genbounds", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0, help="64-bit root seed")
        p.add_argument("--threads", type=int, default=1, help="worker threads (modules are deterministic regardless)")
        p.add_argument("--out", type=str, default="out", help="output file or directory")
        p.add_argument("--config", type=str, default=None, help="JSON config; flags override")

    p = sub.add_parser("bound", help="evaluate one bound and write report.json")
    common(p)
    p.add_argument("--kind", choices=BOUND_KINDS, required=True)
    p.add_argument("--problem", type=str, default=None, help="problem JSON file")
    p.add_argument("--n", type=int, default=10)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=0.5)
    p.add_argument("--rate", type=float, default=1.0)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--lam", type=float, default=1.0)
    p.add_argument("--alpha", type=float, default=2.0)
    p.add_argument("--emp-risk", dest="emp_risk", type=float, default=0.0)
    p.add_argument("--sup-mi", dest="sup_mi", type=float, default=0.0)
    p.add_argument("--means-sq-sum", dest="means_sq_sum", type=float, default=0.0)
    p.add_argument("--lipschitz", type=float, default=1.0)
    p.add_argument("--d", type=int, default=1)
    p.add_argument("--kernel-flip", dest="kernel_flip", type=float, default=0.0)
    p.add_argument("--f-floor", dest="f_floor", type=float, default=1e-12)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("rd", help="rate-distortion curve to CSV")
    common(p)
    p.add_argument("--problem", type=str, default=None)
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--source", type=str, default="0.5,0.5")
    p.add_argument("--distortion", type=str, default="hamming", help="hamming | abs | matrix JSON file")
    p.add_argument("--epsilon-grid", dest="epsilon_grid", type=str, default="0.05,0.1,0.25")
    p.set_defaults(func=cmd_rd)

    p = sub.add_parser("mc-validate", help="Monte Carlo tail validation of thm1/eq4")
    common(p)
    p.add_argument("--problem", type=str, required=True)
    p.add_argument("--kind", choices=("thm1", "eq4"), default="thm1")
    p.add_argument("--beta", type=float, default=1.0)
    p.add_argument("--n", type=int, default=25)
    p.add_argument("--delta", type=float, default=0.1)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--trials", type=int, default=10_000)
    p.set_defaults(func=cmd_mc_validate)

    p = sub.add_parser("covering", help="random-coding covering failure exponents")
    common(p)
    p.add_argument("--m-grid", dest="m_grid", type=str, default="4,8,12")
    p.add_argument("--trials", type=int, default=4000)
    p.set_defaults(func=cmd_covering)

    p = sub.add_parser("trajectory", help="learning-rate sweep: gen error vs trajectory RD")
    common(p)
    p.add_argument("--spec", type=str, default=None, help="toy-model spec JSON (overrides --model)")
    p.add_argument("--model", choices=("logistic", "quadratic"), default="logistic")
    p.add_argument("--lr-grid", dest="lr_grid", type=str, default="0.05,0.1,0.2,0.4,0.8,1.2,1.6,2.0")
    p.add_argument("--trials", type=int, default=50)
    p.add_argument("--n", type=int, default=24)
    p.add_argument("--steps", type=int, default=120)
    p.add_argument("--bins", type=int, default=8)
    p.add_argument("--epsilon", type=float, default=0.0, help="<=0 means 10% of the distortion range")
    p.set_defaults(func=cmd_trajectory)

    p = sub.add_parser("counterexample", help="SCO counter-example scaling study")
    common(p)
    p.add_argument("--n-list", dest="n_list", type=str, default="4,6,8,10")
    p.add_argument("--trials", type=int, default=2000)
    p.add_argument("--mode", choices=("both",), default="both")
    p.add_argument("--delta", type=float, default=0.05)
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("sweep", help="closed-form bound values over an n grid")
    common(p)
    p.add_argument("--kind", choices=("thm1", "eq4", "seeger", "thm7", "thm8"), default="thm1")
    p.add_argument("--n-grid", dest="n_grid", type=str, default="10,20,40,80")
    p.add_argument("--rate", type=float, default=1.0)
    p.add_argument("--sigma", type=float, default=0.5)
    p.add_argument("--delta", type=float, default=0.05)
    p.add_argument("--epsilon", type=float, default=0.0)
    p.add_argument("--emp-risk", dest="emp_risk", type=float, default=0.0)
    p.add_argument("--sup-mi", dest="sup_mi", type=float, default=0.0)
    p.add_argument("--log-m", dest="log_m", type=float, default=0.0)
    p.add_argument("--lipschitz", type=float, default=1.0)
    p.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        args = _apply_config(args, argv)
        args._t0 = time.time()
        return args.func(args)
    except (ValueError, FileNotFoundError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
