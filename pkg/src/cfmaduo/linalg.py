"""Batched Hermitian positive-definite solves."""

import numpy as np

from .errors import NumericalError, StatisticsError


def hermitian_part(A):
    return 0.5 * (A + np.conj(np.swapaxes(A, -1, -2)))


def hpd_solve(A, B):
    """Solve ``A X = B`` for Hermitian positive-definite ``A`` via Cholesky.

    Works on stacks: ``A`` is ``(..., M, M)`` and ``B`` is ``(..., M)`` or
    ``(..., M, P)``. Raises NumericalError if any ``A`` is not positive
    definite.
    """
    A = np.asarray(A)
    B = np.asarray(B)
    vector = B.ndim == A.ndim - 1
    if vector:
        B = B[..., None]
    try:
        chol = np.linalg.cholesky(hermitian_part(A))
    except np.linalg.LinAlgError as exc:
        raise NumericalError("matrix is not Hermitian positive definite") from exc
    Y = np.linalg.solve(chol, B)
    X = np.linalg.solve(np.conj(np.swapaxes(chol, -1, -2)), Y)
    return X[..., 0] if vector else X


def psd_sqrt(A, rel_tol=1e-10):
    """Hermitian square root of a stack of PSD matrices.

    Eigenvalues down to ``-rel_tol * trace`` are clipped to zero; anything
    more negative means the input is genuinely indefinite.
    """
    A = hermitian_part(np.asarray(A))
    w, V = np.linalg.eigh(A)
    scale = np.maximum(np.abs(np.trace(A, axis1=-2, axis2=-1)), np.finfo(float).tiny)
    if np.any(w < -rel_tol * scale[..., None]):
        raise StatisticsError("correlation matrix is indefinite")
    w = np.clip(w, 0.0, None)
    return (V * np.sqrt(w)[..., None, :]) @ np.conj(np.swapaxes(V, -1, -2))
