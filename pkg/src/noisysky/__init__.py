"""Output-sensitive skyline computation under noisy pairwise comparisons."""
from .dominance import dominates_noisy, in_bucket, is_empty, lex_noisy, max_lex, set_dominates
from .errors import ContractViolation
from .geometry import (Bucket, Instance, Interval, Point, bucket_dominates, dominates_exact,
                       partition, skyline_exact, strictly_dominates_exact)
from .harness import SweepSpec, TrialRecord, gambler_ruin, run_sweep, run_trial
from .instances import (NullVectorsInput, decode_skyline_to_answer, gen_fixed_skyline,
                        gen_null_vectors, gen_uniform, reduce_to_skyline)
from .oracle import NoisyOracle, derive_seed
from .primitives import boost_prob, noisy_search, noisy_sort
from .skyline import (AlgoConfig, guess_skyline_high_dim, guess_skyline_low_dim, sky_gm,
                      skyline_high_dim, skyline_low_dim)

__version__ = "0.1.0"
