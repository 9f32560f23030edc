"""Hypo-q-norms of finite tuples of vectors, certified bounds and inequality checks."""

from .bounds import SuiteReport, InequalityRecord, run_full_suite
from .engine import HypoNormResult, OptimizerConfig, certify, gram_sigma_max, grid_oracle, hypo_norm
from .instances import Corpus, GenSpec, gen_equality_witness, gen_tuple
from .linalg import GroundSpace, TupleX, conjugate_exponent, forward_difference, tuple_pnorm

__version__ = "0.1.0"

__all__ = [
    "Corpus", "GenSpec", "GroundSpace", "HypoNormResult", "InequalityRecord", "OptimizerConfig",
    "SuiteReport", "TupleX", "certify", "conjugate_exponent", "forward_difference",
    "gen_equality_witness", "gen_tuple", "gram_sigma_max", "grid_oracle", "hypo_norm",
    "run_full_suite", "tuple_pnorm",
]
