"""Generalization-bound calculators and Monte Carlo validators for finite learning problems.

The package computes, on exactly solvable finite problems, a family of
compressibility, rate-distortion, PAC-Bayes and trajectory-based
generalization bounds, and validates each bound's probabilistic guarantee
(tail violation rate, in-expectation domination, 1/n scaling) against exact
ground truth.
"""

__version__ = "0.1.0"

from .bounds import (
    BoundReport,
    check_thm3_condition,
    check_thm4_condition,
    fixed_size_bound,
    pac_bayes_eq22,
    prop5_bound,
    rd_tail_bound,
    reconstruct_bound,
    seeger_fast_rate_bound,
    t_functional,
    thm1_bound,
    thm5_expectation_bound,
    toy_example_bound,
)
from .counterexample import (
    ScoInstance,
    assemble_bound,
    bad_coord_stats,
    quantize_w,
    run_gd,
    scaling_study,
    sco_loss,
    sco_population_risk,
)
from .info import (
    Channel,
    Joint,
    Pmf,
    binary_kl,
    binary_kl_inverse,
    binary_kl_inverse_cap,
    empirical_joint,
    entropy,
    gdelta_sup,
    kl_divergence,
    mutual_information,
    renyi_divergence,
)
from .learning import (
    ConstantAlgorithm,
    Dataset,
    FiniteLearningProblem,
    GibbsAlgorithm,
    gen_error,
    gibbs_posterior,
    induced_joint,
    population_risk,
    sample_dataset,
)
from .ratedistortion import (
    DistortionSpec,
    RdSolution,
    blahut_arimoto,
    rd_curve,
    rd_dimension,
    rd_gen,
    rd_trajectory,
)
from .trajectory import (
    LogisticToy,
    QuadraticToy,
    estimate_M,
    gen_trajectory,
    lr_sweep,
    simulate_trajectory,
    thm7_bound,
    thm8_bound,
)
from .validation import (
    ValidationReport,
    build_hypothesis_book,
    covering_failure_estimate,
    mc_expectation_validate,
    mc_tail_validate,
)
