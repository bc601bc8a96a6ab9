"""Synthetic sparse phase-retrieval instances and evaluation metrics.

Measurements follow ``y = |A x| + noise`` with ``A`` an ``m x n`` matrix of
i.i.d. standard normal entries, ``x`` an ``s``-sparse real vector with
Gaussian nonzeros on a uniformly random support, and i.i.d. ``N(0, sigma^2)``
noise of length ``m``.
"""
from dataclasses import dataclass, field

import numpy as np

from .linalg import top_s_support

__all__ = [
    "GroundTruth",
    "Ensemble",
    "generate_ground_truth",
    "generate_ensemble",
    "relative_error",
    "is_success",
    "measurement_snr_db",
    "sigma_for_snr",
]


def _frozen(arr):
    arr = np.array(arr, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True)
class GroundTruth:
    """The hidden ``s``-sparse signal.

    Attributes
    ----------
    signal : ndarray, shape (n,)
    support : ndarray of int
        Sorted indices of the nonzero entries of ``signal``.
    """

    signal: np.ndarray
    support: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "signal", _frozen(self.signal))
        support = np.array(sorted(int(i) for i in self.support), dtype=np.intp)
        support.flags.writeable = False
        object.__setattr__(self, "support", support)
        nz = np.flatnonzero(self.signal)
        if not np.array_equal(nz, support):
            raise ValueError("support must equal the nonzero pattern of signal")

    @property
    def n(self):
        return self.signal.shape[0]

    @property
    def s(self):
        return self.support.shape[0]


@dataclass(frozen=True)
class Ensemble:
    """Sampling matrix plus clean and noisy magnitude measurements."""

    matrix: np.ndarray
    clean_measurements: np.ndarray
    measurements: np.ndarray
    noise_sigma: float = 0.0
    truth: GroundTruth = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        for name in ("matrix", "clean_measurements", "measurements"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        if self.matrix.ndim != 2:
            raise ValueError("matrix must be 2-D")
        m = self.matrix.shape[0]
        if self.clean_measurements.shape != (m,) or self.measurements.shape != (m,):
            raise ValueError("measurement vectors must have length m")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")

    @property
    def m(self):
        return self.matrix.shape[0]

    @property
    def n(self):
        return self.matrix.shape[1]


def generate_ground_truth(n, s, rng):
    """Draw an ``s``-sparse signal of length ``n``.

    The support is a uniformly random ``s``-subset of ``range(n)`` and the
    nonzero values are i.i.d. standard normal.
    """
    n, s = int(n), int(s)
    if n < 1:
        raise ValueError("n must be positive")
    if s < 1:
        raise ValueError("sparsity must be at least 1")
    if s > n:
        raise ValueError("sparsity exceeds dimension")
    support = np.sort(rng.permutation(n)[:s])
    values = rng.standard_normal(s)
    # exact zeros would shrink the support
    while np.any(values == 0.0):
        zero = values == 0.0
        values[zero] = rng.standard_normal(int(zero.sum()))
    signal = np.zeros(n)
    signal[support] = values
    return GroundTruth(signal, support)


def generate_ensemble(truth, m, sigma, rng):
    """Draw a Gaussian sampling matrix and the measurements of ``truth``.

    Parameters
    ----------
    truth : GroundTruth
    m : int
        Number of measurements.
    sigma : float
        Standard deviation of the additive Gaussian noise (length ``m``).
    rng : SeededRng

    Returns
    -------
    Ensemble
    """
    m = int(m)
    if m < 1:
        raise ValueError("m must be positive")
    if not sigma >= 0:
        raise ValueError("sigma must be nonnegative")
    A = rng.standard_normal((m, truth.n))
    clean = np.abs(A @ truth.signal)
    if sigma > 0:
        y = clean + sigma * rng.standard_normal(m)
    else:
        y = clean.copy()
    return Ensemble(A, clean, y, float(sigma), truth)


def relative_error(estimate, truth):
    """Sign-aligned relative error ``min(|xh + x|, |xh - x|) / |x|``.

    ``truth`` may be a :class:`GroundTruth` or a plain vector.
    """
    x = truth.signal if isinstance(truth, GroundTruth) else np.asarray(truth, float)
    xh = np.asarray(estimate, dtype=float)
    if xh.shape != x.shape:
        raise ValueError("estimate and truth must have the same length")
    nx = np.linalg.norm(x)
    if nx == 0:
        raise ValueError("truth has zero norm")
    return float(min(np.linalg.norm(xh + x), np.linalg.norm(xh - x)) / nx)


def is_success(estimate, truth, tol=1e-2):
    """Recovery succeeds if the relative error is at most ``tol`` or the
    support is exactly recovered.

    Support recovery means the ``s`` largest-magnitude entries of ``estimate``
    are nonzero and sit exactly on ``truth.support``. When ``s == n`` every
    support is trivially "recovered", so only the error test is applied.
    """
    if not tol > 0:
        raise ValueError("tol must be positive")
    if relative_error(estimate, truth) <= tol:
        return True
    if truth.s == truth.n:
        return False
    xh = np.asarray(estimate, dtype=float)
    top = top_s_support(xh, truth.s)
    return bool(np.all(xh[top] != 0) and np.array_equal(top, truth.support))


def measurement_snr_db(ensemble):
    """Realized measurement SNR in dB, ``10 log10(|clean|^2 / |noise|^2)``.

    Returns ``inf`` when the realized noise is zero (e.g. ``sigma == 0``).
    """
    noise = ensemble.measurements - ensemble.clean_measurements
    noise_power = float(noise @ noise)
    if noise_power == 0.0:
        return float("inf")
    clean_power = float(ensemble.clean_measurements @ ensemble.clean_measurements)
    return 10.0 * np.log10(clean_power / noise_power)


def sigma_for_snr(clean_measurements, snr_db):
    """Noise level whose expected power sits ``snr_db`` below the clean
    measurement power: ``sigma = rms(clean) * 10**(-snr_db / 20)``."""
    clean = np.asarray(clean_measurements, dtype=float)
    rms = np.sqrt(np.mean(clean**2))
    return float(rms * 10.0 ** (-snr_db / 20.0))
