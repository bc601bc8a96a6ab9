"""Dense primitives shared by the solvers.

Supports are represented as sorted ``intp`` arrays of column indices.
"""
import numpy as np
import scipy.linalg

__all__ = [
    "sign_vector",
    "hadamard",
    "top_s_support",
    "hard_threshold",
    "restricted_least_squares",
]


def sign_vector(v):
    """Elementwise sign with the convention ``sign(0) = +1``."""
    v = np.asarray(v, dtype=float)
    return np.where(v < 0, -1.0, 1.0)


def hadamard(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.shape} vs {b.shape}")
    return a * b


def top_s_support(v, s):
    """Indices of the ``s`` largest-magnitude entries of ``v``, sorted.

    Ties are broken in favour of the smaller index.
    """
    v = np.asarray(v, dtype=float)
    s = int(s)
    if not 1 <= s <= v.shape[0]:
        raise ValueError(f"need 1 <= s <= {v.shape[0]}, got s={s}")
    # stable sort keeps equal magnitudes in index order
    order = np.argsort(-np.abs(v), kind="stable")
    return np.sort(order[:s])


def hard_threshold(v, s):
    """Keep the ``s`` largest-magnitude entries of ``v`` and zero the rest."""
    v = np.asarray(v, dtype=float)
    out = np.zeros_like(v)
    idx = top_s_support(v, s)
    out[idx] = v[idx]
    return out


def restricted_least_squares(A, b, support):
    """Least squares over vectors supported on ``support``.

    Solves ``min_z ||A[:, support] z - b||_2`` and scatters ``z`` into a
    length-``n`` vector that is zero off the support. The solve uses a
    complete orthogonal factorization (LAPACK ``gelsy``: QR with column
    pivoting), which returns the minimum-norm minimizer when the column
    submatrix is rank deficient.

    Parameters
    ----------
    A : ndarray, shape (m, n)
    b : ndarray, shape (m,)
    support : array_like of int

    Returns
    -------
    x : ndarray, shape (n,)
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    support = np.asarray(support, dtype=np.intp)
    if support.size == 0:
        raise ValueError("support must not be empty")
    if b.shape != (A.shape[0],):
        raise ValueError("b must have length m")
    x = np.zeros(A.shape[1])
    z, *_ = scipy.linalg.lstsq(
        A[:, support], b, lapack_driver="gelsy", check_finite=False
    )
    x[support] = z
    return x
