"""Brute-force ground truth, hardness-reduction generators and random instances."""
from .enumerate import (
    CapExceededError, brute_cqa, counterexample, enumerate_repairs, find_repair,
    maximal_independent_sets, sat_is_repair,
)
from .generate import PROFILES, gen_qbf, gen_query, gen_random
from .reductions import QBF, Reduction, is_3colorable, qbf_from_text, qbf_to_text, reduce_3col, reduce_qbf

__all__ = [
    "CapExceededError", "brute_cqa", "counterexample", "enumerate_repairs", "find_repair",
    "maximal_independent_sets", "sat_is_repair", "PROFILES", "gen_qbf", "gen_query", "gen_random", "QBF", "Reduction",
    "is_3colorable", "qbf_from_text", "qbf_to_text", "reduce_3col", "reduce_qbf",
]
