"""Stochastic alternating minimization for sparse phase retrieval.

Starting from a random Gaussian guess, every outer iteration draws a fresh
random subset of ``floor(gamma * m)`` measurement rows, estimates the lost
signs from the current iterate, and solves the resulting sparse least-squares
problem with HTP. Resampling the rows each iteration is what lets the method
escape poor stationary points without a spectral initialization. After the
loop, the support of the last iterate is refit on all measurements.
"""
import enum
import math
from dataclasses import dataclass, field

import numpy as np

from .htp import HtpConfig, htp_solve
from .linalg import hadamard, restricted_least_squares, sign_vector, top_s_support
from .rng import SeededRng

__all__ = [
    "Termination",
    "StormSparConfig",
    "SolveResult",
    "default_gamma",
    "default_sample_size",
    "subsample_rows",
    "objective",
    "refit",
    "stormspar_solve",
]


class Termination(str, enum.Enum):
    CONVERGED = "converged"
    MAX_ITERS = "max_iters"


def default_gamma(n, s, m):
    """Row fraction ``min((s / m) * ln(n / 0.001), 0.6)``."""
    if min(n, s, m) < 1:
        raise ValueError("n, s and m must be positive")
    return min(s / m * math.log(n / 0.001), 0.6)


def default_sample_size(n, s, factor=2.5):
    """Sample count ``floor(factor * s * (ln n + ln 100))``.

    ``factor=1`` gives the phase-transition unit ``K``; ``factor=2.5`` is the
    table setting.
    """
    if not factor > 0:
        raise ValueError("factor must be positive")
    return math.floor(factor * s * (math.log(n) + math.log(100)))


@dataclass(frozen=True)
class StormSparConfig:
    """Outer-loop settings.

    ``gamma=None`` means :func:`default_gamma` of the problem at hand. ``delta``
    bounds the absolute step ``||x_l - x_{l-1}||_2`` at which the loop stops.
    """

    gamma: float = None
    delta: float = 0.01
    max_outer_iters: int = 5000
    htp: HtpConfig = field(default_factory=HtpConfig)
    seed: int = 0

    def __post_init__(self):
        if self.gamma is not None and not 0 < self.gamma <= 1:
            raise ValueError("gamma must lie in (0, 1]")
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        if self.max_outer_iters < 1:
            raise ValueError("max_outer_iters must be at least 1")


@dataclass
class SolveResult:
    estimate: np.ndarray
    outer_iters: int
    termination: Termination
    step_norm_trace: list
    objective_trace: list
    last_iterate: np.ndarray = field(repr=False, default=None)
    gamma: float = None


def subsample_rows(A, y, gamma, rng):
    """Draw ``floor(gamma * m)`` distinct rows uniformly at random.

    Returns ``(A_sub, y_sub, indices)`` with rows in sampled order.
    """
    m = A.shape[0]
    k = math.floor(gamma * m)
    if k < 1:
        raise ValueError(f"floor(gamma * m) = {k}; need at least one row")
    idx = rng.choice(m, k, replace=False)
    return A[idx], y[idx], idx


def objective(A, y, x):
    """``0.5 * ||y - |A x| ||^2``."""
    r = np.asarray(y, dtype=float) - np.abs(np.asarray(A, dtype=float) @ x)
    return 0.5 * float(r @ r)


def refit(A, y, x, s):
    """Freeze the ``s`` largest entries of ``x`` as the support and refit on
    all rows, using the signs of ``A x``."""
    A = np.asarray(A, dtype=float)
    support = top_s_support(x, s)
    signed = hadamard(sign_vector(A @ x), y)
    return restricted_least_squares(A, signed, support)


def stormspar_solve(A, y, s, config=None, rng=None, x0=None, callback=None):
    """Recover an ``s``-sparse ``x`` from ``y ~ |A x|``.

    Parameters
    ----------
    A : ndarray, shape (m, n)
        Raw sampling matrix; normalization happens inside HTP.
    y : ndarray, shape (m,)
    s : int
    config : StormSparConfig, optional
    rng : SeededRng, optional
        Stream for the initial guess and the row draws. Defaults to
        ``SeededRng(config.seed)``.
    x0 : ndarray, optional
        Initial guess. If given, ``rng`` is used for row draws only.
    callback : callable, optional
        ``callback(iteration, x, rows)`` after each outer iteration.

    Returns
    -------
    SolveResult
        ``estimate`` is the refitted output; ``last_iterate`` the final HTP
        solution before refitting.
    """
    config = config or StormSparConfig()
    A = np.asarray(A, dtype=float)
    y = np.asarray(y, dtype=float)
    if A.ndim != 2 or y.shape != (A.shape[0],):
        raise ValueError("A must be m x n and y of length m")
    if not np.all(np.isfinite(y)):
        raise ValueError("y must be finite")
    m, n = A.shape
    s = int(s)
    if not 1 <= s <= n:
        raise ValueError("sparsity exceeds dimension" if s > n else "sparsity must be >= 1")
    gamma = config.gamma if config.gamma is not None else default_gamma(n, s, m)
    rows = math.floor(gamma * m)
    if s > rows:
        raise ValueError(
            f"sparsity {s} exceeds the subsample size floor(gamma*m) = {rows}"
        )
    if rng is None:
        rng = SeededRng(config.seed)

    if x0 is None:
        x = rng.standard_normal(n)
    else:
        x = np.array(x0, dtype=float)
        if x.shape != (n,):
            raise ValueError("x0 must have length n")

    steps, objectives = [], []
    termination = Termination.MAX_ITERS
    for it in range(1, config.max_outer_iters + 1):
        A_l, y_l, idx = subsample_rows(A, y, gamma, rng)
        y_signed = hadamard(sign_vector(A_l @ x), y_l)
        x_new = htp_solve(A_l, y_signed, s, config.htp).solution
        steps.append(float(np.linalg.norm(x_new - x)))
        objectives.append(objective(A, y, x_new))
        x = x_new
        if callback is not None:
            callback(it, x, idx)
        if steps[-1] <= config.delta:
            termination = Termination.CONVERGED
            break

    estimate = refit(A, y, x, s)
    return SolveResult(estimate, it, termination, steps, objectives, x, gamma)
