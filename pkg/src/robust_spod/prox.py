"""Norms, proximal operators and rank counting shared by the solvers."""
from dataclasses import dataclass

import numpy as np

from .errors import ContractError, DomainError, NumericalError

__all__ = [
    "DEFAULT_RANK_TOL",
    "SvtResult",
    "soft_threshold",
    "svd",
    "svt",
    "nuclear_norm",
    "l1_norm",
    "estimate_rank",
]

DEFAULT_RANK_TOL = 1e-7


@dataclass(frozen=True)
class SvtResult:
    """Output of :func:`svt` with the spectra before and after shrinkage."""

    matrix: np.ndarray
    spectrum_before: np.ndarray
    spectrum_after: np.ndarray
    rank_after: int


def _check_tau(tau):
    if not (np.isfinite(tau) and tau >= 0):
        raise DomainError(f"threshold must be non-negative and finite, got {tau}")


def soft_threshold(x, tau):
    """Elementwise ``sign(x) * max(|x| - tau, 0)``."""
    _check_tau(tau)
    x = np.asarray(x, dtype=np.float64)
    if tau == 0:
        return x.copy()
    return np.sign(x) * np.maximum(np.abs(x) - tau, 0.0)


def svd(x):
    """Thin SVD ``x = u @ diag(s) @ vt`` with ``min(M, N)`` singular values."""
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise NumericalError("SVD of a matrix with non-finite entries")
    try:
        return np.linalg.svd(x, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NumericalError(f"SVD did not converge: {exc}") from exc


def svt(x, tau, rank_rel_tol=DEFAULT_RANK_TOL):
    """Singular value thresholding, the proximal map of ``tau * ||.||_*``.

    Returns an :class:`SvtResult`; ``rank_after`` uses :func:`estimate_rank`
    on the shrunk spectrum.
    """
    _check_tau(tau)
    u, s, vt = svd(x)
    d = np.maximum(s - tau, 0.0)
    keep = int(np.count_nonzero(d))
    # singular values are sorted, so the nonzero ones come first
    matrix = (u[:, :keep] * d[:keep]) @ vt[:keep]
    return SvtResult(matrix, s, d, estimate_rank(d, rank_rel_tol))


def nuclear_norm(x):
    """Sum of singular values."""
    x = np.asarray(x, dtype=np.float64)
    if not np.all(np.isfinite(x)):
        raise NumericalError("nuclear norm of a matrix with non-finite entries")
    if x.size == 0:
        return 0.0
    return float(np.linalg.svd(x, compute_uv=False).sum())


def l1_norm(x):
    """Sum of absolute values of all entries."""
    return float(np.abs(np.asarray(x, dtype=np.float64)).sum())


def estimate_rank(spectrum, rel_tol=DEFAULT_RANK_TOL):
    """Number of singular values above ``rel_tol * sigma_1``.

    Parameters
    ----------
    spectrum : array_like
        Non-increasing, non-negative singular values.
    rel_tol : float
        Threshold relative to the largest singular value.
    """
    s = np.asarray(spectrum, dtype=np.float64).ravel()
    if not rel_tol > 0:
        raise DomainError(f"rel_tol must be positive, got {rel_tol}")
    if s.size == 0:
        return 0
    if np.any(s < 0) or np.any(np.diff(s) > 0):
        raise ContractError("spectrum must be non-negative and non-increasing")
    if s[0] == 0:
        return 0
    return int(np.count_nonzero(s > rel_tol * s[0]))
