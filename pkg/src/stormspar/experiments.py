"""Monte-Carlo harness: experiment grids, parallel trials, aggregation.

A trial's random streams are keyed by a 64-bit hash of the base seed, the
grid point and the trial index, so records do not depend on worker count or
execution order.
"""
import dataclasses
import math
import struct
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import groupby

import numpy as np

from .htp import HtpConfig
from .model import (
    Ensemble,
    generate_ensemble,
    generate_ground_truth,
    is_success,
    measurement_snr_db,
    relative_error,
    sigma_for_snr,
)
from .rng import SeededRng
from .solver import StormSparConfig, default_gamma, default_sample_size, stormspar_solve

__all__ = [
    "KINDS",
    "ExperimentSpec",
    "GridPoint",
    "TrialRecord",
    "AggregateRow",
    "trial_stream_id",
    "grid_points",
    "run_trial",
    "run_experiment",
    "aggregate",
    "best_support_residual",
    "htp_benchmark",
]

KINDS = ("phase_transition", "noise_sweep", "dimension_table", "sparsity_table", "single")
M_RULES = ("explicit", "factor_times_K")

_MASK64 = (1 << 64) - 1


def _splitmix64(z):
    z = (z + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def _float_bits(x):
    return struct.unpack("<Q", struct.pack("<d", float(x)))[0]


def trial_stream_id(base_seed, n, s, m, noise_level, trial_index):
    """64-bit stream id from splitmix64 folded over the trial coordinates.

    ``noise_level`` enters via its IEEE-754 bit pattern.
    """
    h = int(base_seed) & _MASK64
    for part in (n, s, m, _float_bits(noise_level), trial_index):
        h = _splitmix64(h ^ (int(part) & _MASK64))
    return h


@dataclass
class ExperimentSpec:
    """A sweep definition.

    ``m_rule="factor_times_K"`` uses ``m = floor(f * s * (ln n + ln 100))``
    for each ``f`` in ``sample_factors``; ``"explicit"`` takes ``m_values``.
    If ``snr_db_values`` is non-empty it replaces ``sigma_values``: each trial
    then sets ``sigma`` from its own clean measurements to hit the target SNR.
    """

    kind: str = "single"
    n_values: list = field(default_factory=lambda: [100])
    s_values: list = field(default_factory=lambda: [10])
    m_rule: str = "factor_times_K"
    m_values: list = field(default_factory=list)
    sample_factors: list = field(default_factory=lambda: [2.5])
    sigma_values: list = field(default_factory=lambda: [0.01])
    snr_db_values: list = field(default_factory=list)
    trials: int = 100
    base_seed: int = 0
    success_tol: float = 1e-2
    gamma: float = None
    delta: float = 0.01
    max_outer_iters: int = 5000
    htp_step_size: float = 1.0
    max_inner_iters: int = 100
    adaptive_step: bool = False

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown kind {self.kind!r}; expected one of {KINDS}")
        if self.m_rule not in M_RULES:
            raise ValueError(f"unknown m_rule {self.m_rule!r}; expected one of {M_RULES}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        grids = {"n_values": self.n_values, "s_values": self.s_values}
        if self.m_rule == "explicit":
            grids["m_values"] = self.m_values
        else:
            grids["sample_factors"] = self.sample_factors
        if not self.snr_db_values:
            grids["sigma_values"] = self.sigma_values
        for name, grid in grids.items():
            if len(grid) == 0:
                raise ValueError(f"{name} must not be empty")
        if any(sig < 0 for sig in self.sigma_values):
            raise ValueError("sigma values must be nonnegative")
        if not self.success_tol > 0:
            raise ValueError("success_tol must be positive")

    @classmethod
    def from_dict(cls, data):
        names = {f.name for f in dataclasses.fields(cls)}
        unknown = set(data) - names
        if unknown:
            raise ValueError(f"unknown ExperimentSpec fields: {sorted(unknown)}")
        return cls(**data)

    def to_dict(self):
        return dataclasses.asdict(self)

    def solver_config(self):
        return StormSparConfig(
            gamma=self.gamma,
            delta=self.delta,
            max_outer_iters=self.max_outer_iters,
            htp=HtpConfig(
                step_size=self.htp_step_size,
                max_inner_iters=self.max_inner_iters,
                adaptive_step=self.adaptive_step,
            ),
        )


@dataclass(frozen=True)
class GridPoint:
    n: int
    s: int
    m: int
    factor: float = None
    sigma: float = 0.0
    target_snr_db: float = None

    @property
    def noise_level(self):
        return self.sigma if self.target_snr_db is None else self.target_snr_db


def grid_points(spec):
    """Cartesian product of the spec's grids, in a fixed order."""
    if spec.m_rule == "explicit":
        m_choices = [(int(m), None) for m in spec.m_values]
    else:
        m_choices = None
    if spec.snr_db_values:
        noise = [(None, float(snr)) for snr in spec.snr_db_values]
    else:
        noise = [(float(sig), None) for sig in spec.sigma_values]
    points = []
    for n in spec.n_values:
        for s in spec.s_values:
            choices = m_choices or [
                (default_sample_size(n, s, f), float(f)) for f in spec.sample_factors
            ]
            for m, factor in choices:
                for sigma, snr in noise:
                    points.append(
                        GridPoint(int(n), int(s), m, factor, sigma or 0.0, snr)
                    )
    return points


@dataclass
class TrialRecord:
    n: int
    s: int
    m: int
    factor: float
    sigma: float
    target_snr_db: float
    trial_index: int
    seed: int
    stream_id: int
    success: bool
    rel_error: float
    outer_iters: int
    termination: str
    snr_db: float
    wall_time: float
    skipped: bool = False
    skip_reason: str = ""

    def to_dict(self):
        return dataclasses.asdict(self)

    def deterministic_key(self):
        """All fields except wall time."""
        d = self.to_dict()
        d.pop("wall_time")
        return tuple(sorted((k, repr(v)) for k, v in d.items()))


def _infeasibility(point, spec):
    if point.s > point.n:
        return "sparsity exceeds dimension"
    gamma = spec.gamma if spec.gamma is not None else default_gamma(point.n, point.s, point.m)
    rows = math.floor(gamma * point.m)
    if point.s > rows:
        return f"sparsity {point.s} exceeds floor(gamma*m) = {rows}"
    return ""


def run_trial(spec, point, trial_index):
    """Generate one instance at ``point``, solve it and score it."""
    stream = trial_stream_id(
        spec.base_seed, point.n, point.s, point.m, point.noise_level, trial_index
    )
    base = dict(
        n=point.n, s=point.s, m=point.m, factor=point.factor,
        target_snr_db=point.target_snr_db, trial_index=trial_index,
        seed=int(spec.base_seed), stream_id=stream,
    )
    reason = _infeasibility(point, spec)
    if reason:
        return TrialRecord(
            **base, sigma=point.sigma, success=False, rel_error=math.nan,
            outer_iters=0, termination="skipped", snr_db=math.nan,
            wall_time=0.0, skipped=True, skip_reason=reason,
        )

    truth_rng, ens_rng, solve_rng = SeededRng(spec.base_seed, stream).spawn(3)
    truth = generate_ground_truth(point.n, point.s, truth_rng)
    if point.target_snr_db is None:
        ens = generate_ensemble(truth, point.m, point.sigma, ens_rng)
    else:
        clean = generate_ensemble(truth, point.m, 0.0, ens_rng)
        sigma = sigma_for_snr(clean.clean_measurements, point.target_snr_db)
        noisy = clean.clean_measurements + sigma * ens_rng.standard_normal(point.m)
        ens = Ensemble(clean.matrix, clean.clean_measurements, noisy, sigma, truth)

    start = time.perf_counter()
    result = stormspar_solve(
        ens.matrix, ens.measurements, point.s, spec.solver_config(), rng=solve_rng
    )
    elapsed = time.perf_counter() - start
    return TrialRecord(
        **base,
        sigma=ens.noise_sigma,
        success=is_success(result.estimate, truth, spec.success_tol),
        rel_error=relative_error(result.estimate, truth),
        outer_iters=result.outer_iters,
        termination=result.termination.value,
        snr_db=measurement_snr_db(ens),
        wall_time=elapsed,
    )


def _run_task(args):
    return run_trial(*args)


def run_experiment(spec, worker_count=1, progress=None):
    """Run every grid point ``spec.trials`` times.

    Records come back in grid order, then trial order, whatever the worker
    count. ``progress``, if given, is called with each finished record.
    """
    spec.validate()
    if worker_count < 1:
        raise ValueError("worker_count must be at least 1")
    tasks = [
        (spec, point, t) for point in grid_points(spec) for t in range(spec.trials)
    ]
    records = []
    if worker_count == 1:
        for task in tasks:
            records.append(_run_task(task))
            if progress:
                progress(records[-1])
    else:
        with ProcessPoolExecutor(max_workers=worker_count) as pool:
            for rec in pool.map(_run_task, tasks, chunksize=max(1, len(tasks) // (8 * worker_count))):
                records.append(rec)
                if progress:
                    progress(rec)
    return records


@dataclass
class AggregateRow:
    n: int
    s: int
    m: int
    sigma: float
    factor: float
    target_snr_db: float
    success_rate: float
    mean_rel_error: float
    mean_outer_iters: float
    mean_snr_db: float
    trial_count: int
    skipped_count: int

    @property
    def aver_iter(self):
        """Floored mean iteration count, as shown in the result tables."""
        if math.isnan(self.mean_outer_iters):
            return None
        return math.floor(self.mean_outer_iters)

    def to_dict(self):
        d = dataclasses.asdict(self)
        d["aver_iter"] = self.aver_iter
        return d


def _group_key(rec):
    noise = rec.target_snr_db if rec.target_snr_db is not None else rec.sigma
    return (rec.n, rec.s, rec.m, rec.target_snr_db is not None, noise)


def aggregate(records):
    """Group records by ``(n, s, m, noise level)`` and average them.

    Skipped trials are counted in ``skipped_count`` but excluded from every
    mean and from the success-rate denominator. Groups keep first-seen order.
    """
    order = {}
    for rec in records:
        order.setdefault(_group_key(rec), len(order))
    rows = []
    ranked = sorted(records, key=lambda r: order[_group_key(r)])
    for _, group in groupby(ranked, key=_group_key):
        group = list(group)
        done = [r for r in group if not r.skipped]
        first = group[0]
        count = len(done)
        if count:
            rate = sum(r.success for r in done) / count
            err = float(np.mean([r.rel_error for r in done]))
            iters = float(np.mean([r.outer_iters for r in done]))
            snr = float(np.mean([r.snr_db for r in done]))
            sigma = float(np.mean([r.sigma for r in done]))
        else:
            rate = err = iters = snr = math.nan
            sigma = first.sigma
        rows.append(
            AggregateRow(
                n=first.n, s=first.s, m=first.m, sigma=sigma, factor=first.factor,
                target_snr_db=first.target_snr_db, success_rate=rate,
                mean_rel_error=err, mean_outer_iters=iters, mean_snr_db=snr,
                trial_count=count, skipped_count=len(group) - count,
            )
        )
    return rows


def best_support_residual(A, b, s):
    """Smallest least-squares residual over all ``C(n, s)`` supports."""
    from itertools import combinations

    best = math.inf
    for S in combinations(range(A.shape[1]), s):
        cols = A[:, S]
        z, *_ = np.linalg.lstsq(cols, b, rcond=None)
        best = min(best, float(np.linalg.norm(cols @ z - b)))
    return best


def htp_benchmark(n=20, s=2, m=15, trials=100, base_seed=0, config=None, rtol=1e-8):
    """Compare HTP against exhaustive support search on noise-free instances.

    Returns one dict per instance with both residuals and whether they agree
    to ``rtol`` relative to ``||b||``.
    """
    from .htp import htp_solve

    rows = []
    for t in range(trials):
        stream = trial_stream_id(base_seed, n, s, m, 0.0, t)
        truth_rng, mat_rng = SeededRng(base_seed, stream).spawn(2)
        truth = generate_ground_truth(n, s, truth_rng)
        A = mat_rng.standard_normal((m, n))
        b = A @ truth.signal
        res = htp_solve(A, b, s, config)
        got = float(np.linalg.norm(A @ res.solution - b))
        best = best_support_residual(A, b, s)
        rows.append(dict(
            trial_index=t, htp_residual=got, best_residual=best,
            inner_iters=res.inner_iters, converged=res.converged,
            match=abs(got - best) <= rtol * float(np.linalg.norm(b)),
        ))
    return rows
