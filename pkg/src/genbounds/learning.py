"""Finite learning problems with exactly computable risks.

A problem is a finite data alphabet, a finite hypothesis alphabet, a loss
table and a data law mu. Everything downstream (generalization errors,
induced joints, bound inputs) is computed by exact finite sums; datasets are
enumerated exhaustively whenever the state space fits under a cap.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
import numpy as np

from .info import Joint, Pmf
from .seeding import rng as _rng

__all__ = [
    "FiniteLearningProblem",
    "Dataset",
    "Algorithm",
    "GibbsAlgorithm",
    "ConstantAlgorithm",
    "population_risk",
    "population_risks",
    "empirical_risk",
    "empirical_risks",
    "gen_error",
    "gen_errors",
    "gibbs_posterior",
    "sample_dataset",
    "enumerate_datasets",
    "enumerate_types",
    "induced_joint",
    "EnumerationCapError",
]

ENUMERATION_CAP = 2**22


class EnumerationCapError(RuntimeError):
    """Raised when exact dataset enumeration would exceed the configured cap."""


@dataclass(frozen=True)
class FiniteLearningProblem:
    """Loss table ell(z, w) (rows: data symbols), data law mu, optional bound B."""

    loss: np.ndarray
    mu: Pmf
    bound: float | None = None

    def __post_init__(self):
        loss = np.array(self.loss, dtype=float, copy=True)
        if loss.ndim != 2 or loss.size == 0:
            raise ValueError("loss must be a non-empty (z, w) matrix")
        if np.any(loss < 0):
            raise ValueError("loss entries must be non-negative")
        mu = self.mu if isinstance(self.mu, Pmf) else Pmf(np.asarray(self.mu, dtype=float))
        if mu.alphabet_size != loss.shape[0]:
            raise ValueError("mu size must match the loss row count")
        if self.bound is not None and np.any(loss > self.bound + 1e-12):
            raise ValueError("loss exceeds the declared bound B")
        loss.setflags(write=False)
        object.__setattr__(self, "loss", loss)
        object.__setattr__(self, "mu", mu)

    @property
    def z_alphabet_size(self) -> int:
        return self.loss.shape[0]

    @property
    def w_alphabet_size(self) -> int:
        return self.loss.shape[1]

    @property
    def sigma(self) -> float:
        """Subgaussianity parameter B/2 for a loss bounded in [0, B]."""
        b = self.bound if self.bound is not None else float(self.loss.max())
        return b / 2.0


@dataclass(frozen=True)
class Dataset:
    """Length-n vector of data-symbol indices."""

    samples: np.ndarray

    def __post_init__(self):
        s = np.asarray(self.samples, dtype=int)
        if s.ndim != 1 or s.size == 0:
            raise ValueError("a dataset needs at least one sample")
        if np.any(s < 0):
            raise ValueError("negative sample index")
        s = np.array(s, copy=True)
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)

    @property
    def n(self) -> int:
        return self.samples.size


def _samples(s) -> np.ndarray:
    return s.samples if isinstance(s, Dataset) else np.asarray(s, dtype=int)


def population_risks(prob: FiniteLearningProblem) -> np.ndarray:
    """Vector of population risks, one per hypothesis."""
    return np.asarray(prob.mu) @ prob.loss


def population_risk(prob: FiniteLearningProblem, w: int) -> float:
    if not 0 <= w < prob.w_alphabet_size:
        raise ValueError(f"hypothesis index {w} out of range")
    return float(np.asarray(prob.mu) @ prob.loss[:, w])


def empirical_risks(prob: FiniteLearningProblem, s) -> np.ndarray:
    """Vector of empirical risks on dataset s, one per hypothesis."""
    idx = _samples(s)
    if np.any(idx >= prob.z_alphabet_size):
        raise ValueError("sample index out of range for this problem")
    counts = np.bincount(idx, minlength=prob.z_alphabet_size).astype(float)
    return (counts @ prob.loss) / idx.size


def empirical_risk(prob: FiniteLearningProblem, s, w: int) -> float:
    if not 0 <= w < prob.w_alphabet_size:
        raise ValueError(f"hypothesis index {w} out of range")
    return float(empirical_risks(prob, s)[w])


def gen_errors(prob: FiniteLearningProblem, s) -> np.ndarray:
    """Vector of generalization errors (population minus empirical) on s."""
    return population_risks(prob) - empirical_risks(prob, s)


def gen_error(prob: FiniteLearningProblem, s, w: int) -> float:
    if not 0 <= w < prob.w_alphabet_size:
        raise ValueError(f"hypothesis index {w} out of range")
    return float(gen_errors(prob, s)[w])


def gibbs_posterior(prob: FiniteLearningProblem, prior, beta: float, s) -> Pmf:
    """Posterior(w) proportional to prior(w) * exp(-beta * n * emp_risk(s, w))."""
    if beta < 0:
        raise ValueError("beta must be non-negative")
    pr = np.asarray(prior, dtype=float)
    if pr.sum() <= 0:
        raise ValueError("prior must have positive mass")
    idx = _samples(s)
    logits = np.where(pr > 0, np.log(np.clip(pr, 1e-300, None)), -np.inf)
    logits = logits - beta * idx.size * empirical_risks(prob, idx)
    logits -= logits.max()
    weights = np.exp(logits)
    return Pmf(weights / weights.sum())


class Algorithm:
    """A (possibly stochastic) learner: maps a dataset to a pmf over hypotheses."""

    def posterior(self, prob: FiniteLearningProblem, s) -> Pmf:
        raise NotImplementedError

    def posterior_from_counts(self, prob: FiniteLearningProblem, counts: np.ndarray, n: int) -> Pmf:
        """Posterior for any dataset with the given symbol counts.

        Valid for exchangeable algorithms only (every built-in one is).
        """
        idx = np.repeat(np.arange(prob.z_alphabet_size), counts)
        return self.posterior(prob, idx)


class GibbsAlgorithm(Algorithm):
    def __init__(self, prior, beta: float):
        self.prior = prior if isinstance(prior, Pmf) else Pmf(np.asarray(prior, dtype=float))
        self.beta = float(beta)

    def posterior(self, prob, s) -> Pmf:
        return gibbs_posterior(prob, self.prior, self.beta, s)

    def posterior_from_counts(self, prob, counts, n) -> Pmf:
        logits = np.where(
            np.asarray(self.prior) > 0,
            np.log(np.clip(np.asarray(self.prior), 1e-300, None)),
            -np.inf,
        )
        logits = logits - self.beta * (np.asarray(counts, dtype=float) @ prob.loss)
        logits -= logits.max()
        w = np.exp(logits)
        return Pmf(w / w.sum())


class ConstantAlgorithm(Algorithm):
    """Ignores the data entirely; always outputs the same pmf."""

    def __init__(self, output):
        self.output = output if isinstance(output, Pmf) else Pmf(np.asarray(output, dtype=float))

    def posterior(self, prob, s) -> Pmf:
        return self.output

    def posterior_from_counts(self, prob, counts, n) -> Pmf:
        return self.output


def sample_dataset(prob: FiniteLearningProblem, n: int, seed: int, *path: int) -> Dataset:
    """n iid draws from mu; deterministic given (seed, path)."""
    if n < 1:
        raise ValueError("n must be at least 1")
    gen = _rng(seed, *path)
    idx = gen.choice(prob.z_alphabet_size, size=n, p=np.asarray(prob.mu))
    return Dataset(idx)


def enumerate_datasets(z_size: int, n: int, cap: int = ENUMERATION_CAP) -> np.ndarray:
    """All z_size^n datasets as an (N, n) index array, subject to the cap."""
    total = z_size**n
    if total > cap:
        raise EnumerationCapError(f"{z_size}^{n} = {total} datasets exceeds the cap {cap}")
    grids = np.indices((z_size,) * n).reshape(n, -1).T
    return np.ascontiguousarray(grids)


def enumerate_types(z_size: int, n: int) -> np.ndarray:
    """All empirical-type count vectors (N, z_size) with entries summing to n."""
    out = []
    for comp in itertools.combinations_with_replacement(range(z_size), n):
        counts = np.bincount(comp, minlength=z_size)
        out.append(counts)
    return np.asarray(out, dtype=int)


def _log_multinomial(counts: np.ndarray, log_mu: np.ndarray, n: int) -> float:
    coef = math.lgamma(n + 1) - sum(math.lgamma(c + 1) for c in counts)
    mass = float((counts * np.where(counts > 0, log_mu, 0.0)).sum())
    return coef + mass


def induced_joint(
    prob: FiniteLearningProblem,
    alg: Algorithm,
    n: int,
    cap: int = ENUMERATION_CAP,
    by_type: bool = False,
):
    """Exact joint P_{S,W} induced by the algorithm on n-sample datasets.

    Returns (Joint, contexts). In dataset mode contexts is the (N, n) array of
    enumerated datasets; in type mode it is the (N, z) array of count vectors
    (exact for exchangeable algorithms, with rows weighted by the multinomial
    law of the type).
    """
    if n < 1:
        raise ValueError("n must be at least 1")
    log_mu = np.where(np.asarray(prob.mu) > 0, np.log(np.clip(np.asarray(prob.mu), 1e-300, None)), -np.inf)
    if by_type:
        contexts = enumerate_types(prob.z_alphabet_size, n)
        if len(contexts) > cap:
            raise EnumerationCapError(f"{len(contexts)} types exceed the cap {cap}")
        weights = np.array([math.exp(_log_multinomial(c, log_mu, n)) for c in contexts])
        rows = np.stack(
            [np.asarray(alg.posterior_from_counts(prob, c, n)) for c in contexts]
        )
    else:
        contexts = enumerate_datasets(prob.z_alphabet_size, n, cap=cap)
        logw = np.asarray([float(log_mu[row].sum()) for row in contexts])
        weights = np.exp(logw)
        rows = np.stack([np.asarray(alg.posterior(prob, row)) for row in contexts])
    table = weights[:, None] * rows
    total = table.sum()
    if abs(total - 1.0) > 1e-9:
        raise RuntimeError(f"induced joint mass {total} drifted from 1")
    return Joint(table / total), contexts


def gen_table(prob: FiniteLearningProblem, contexts: np.ndarray, by_type: bool = False) -> np.ndarray:
    """gen(s, w) for every enumerated dataset (or type) and hypothesis."""
    pop = population_risks(prob)
    if by_type:
        counts = np.asarray(contexts, dtype=float)
        n = counts[0].sum()
        emp = (counts @ prob.loss) / n
    else:
        idx = np.asarray(contexts, dtype=int)
        z = prob.z_alphabet_size
        counts = np.stack([np.bincount(row, minlength=z) for row in idx]).astype(float)
        emp = (counts @ prob.loss) / idx.shape[1]
    return pop[None, :] - emp
