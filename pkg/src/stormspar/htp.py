"""Hard Thresholding Pursuit for ``min ||A x - b||_2  s.t. ||x||_0 <= s``."""
from dataclasses import dataclass

import numpy as np

from .linalg import restricted_least_squares, top_s_support

__all__ = ["HtpConfig", "HtpResult", "htp_solve"]

NORMALIZATIONS = ("columns", "global", None)

# supports that differ only in rounding-level entries count as a stall
_ROUNDING = 1e-12


@dataclass(frozen=True)
class HtpConfig:
    """Settings for :func:`htp_solve`.

    Attributes
    ----------
    step_size : float
        Gradient step ``mu`` on the normalized system. The residual is
        guaranteed non-increasing only for ``mu <= 1 / ||A_normalized||_2^2``;
        larger steps select supports more aggressively.
    max_inner_iters : int
        Iteration cap.
    support_stall_stop : bool
        Stop as soon as the selected support repeats.
    adaptive_step : bool
        Replace ``step_size`` by ``||g_S||^2 / ||A g_S||^2`` each iteration,
        with ``g`` the gradient and ``S`` the current support.
    normalize : {"columns", "global", None}
        Rescaling applied before iterating. ``"columns"`` divides every column
        by its norm, ``"global"`` divides ``A`` and ``b`` by ``sqrt(m)``. Either
        way the least-squares step is unchanged; only the gradient step and
        hence the support selection see the scaled matrix.
    """

    step_size: float = 1.0
    max_inner_iters: int = 100
    support_stall_stop: bool = True
    adaptive_step: bool = False
    normalize: str = "columns"

    def __post_init__(self):
        if self.normalize not in NORMALIZATIONS:
            raise ValueError(f"normalize must be one of {NORMALIZATIONS}")
        if not self.step_size > 0:
            raise ValueError("step_size must be positive")
        if self.max_inner_iters < 1:
            raise ValueError("max_inner_iters must be at least 1")


@dataclass
class HtpResult:
    solution: np.ndarray
    support: np.ndarray
    inner_iters: int
    converged: bool
    residual_trace: list


def htp_solve(A, b, s, config=None, callback=None):
    """Run HTP from ``x = 0``.

    Each iteration takes a gradient step ``g = x + mu A^T (b - A x)``, selects
    the ``s`` largest entries of ``g`` and solves least squares on that
    support. The loop ends when the support selected from the new iterate
    equals the one it was fitted on (the iterate is then a fixed point), when
    the iterate stops moving up to rounding, or after
    ``config.max_inner_iters`` least-squares solves.

    Parameters
    ----------
    A : ndarray, shape (m, n)
    b : ndarray, shape (m,)
    s : int
        Sparsity level, ``1 <= s <= min(m, n)``.
    config : HtpConfig, optional
    callback : callable, optional
        Called as ``callback(k, x)`` after every least-squares solve.

    Returns
    -------
    HtpResult
    """
    config = config or HtpConfig()
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or b.shape != (A.shape[0],):
        raise ValueError("A must be m x n and b of length m")
    m, n = A.shape
    s = int(s)
    if not 1 <= s <= min(m, n):
        raise ValueError(f"need 1 <= s <= min(m, n) = {min(m, n)}, got s={s}")

    # solve for z = col_scale * x against A / col_scale
    col_scale = None
    row_scale = 1.0
    if config.normalize == "columns":
        col_scale = np.linalg.norm(A, axis=0)
        col_scale[col_scale == 0] = 1.0
        A = A / col_scale
    elif config.normalize == "global":
        row_scale = np.sqrt(m)
        A = A / row_scale
        b = b / row_scale

    def step(x, support):
        grad = A.T @ (b - A @ x)
        mu = config.step_size
        if config.adaptive_step:
            S = support if support is not None else top_s_support(grad, s)
            gs = grad[S]
            denom = np.linalg.norm(A[:, S] @ gs) ** 2
            if denom > 0:
                mu = float(gs @ gs) / denom
        return top_s_support(x + mu * grad, s)

    x = previous = np.zeros(n)
    support = fitted = step(x, None)
    residuals = []
    converged = False
    k = 0
    while k < config.max_inner_iters:
        k += 1
        x = restricted_least_squares(A, b, support)
        fitted = support
        residuals.append(float(np.linalg.norm(A @ x - b)))
        if callback is not None:
            callback(k, x if col_scale is None else x / col_scale)
        new_support = step(x, support)
        stalled = np.linalg.norm(x - previous) <= _ROUNDING * np.linalg.norm(x)
        previous = x
        if stalled or np.array_equal(new_support, support):
            converged = True
            if config.support_stall_stop:
                break
        support = new_support
    residuals = [r * row_scale for r in residuals]
    if col_scale is not None:
        x = x / col_scale
    return HtpResult(x, fitted, k, converged, residuals)
