"""Sparse phase retrieval by stochastic alternating minimization with HTP."""
__version__ = "0.1.0"

from .experiments import (
    AggregateRow,
    ExperimentSpec,
    TrialRecord,
    aggregate,
    run_experiment,
)
from .htp import HtpConfig, HtpResult, htp_solve
from .linalg import (
    hadamard,
    hard_threshold,
    restricted_least_squares,
    sign_vector,
    top_s_support,
)
from .model import (
    Ensemble,
    GroundTruth,
    generate_ensemble,
    generate_ground_truth,
    is_success,
    measurement_snr_db,
    relative_error,
)
from .rng import SeededRng
from .solver import (
    SolveResult,
    StormSparConfig,
    Termination,
    default_gamma,
    default_sample_size,
    objective,
    refit,
    stormspar_solve,
    subsample_rows,
)
