"""Correlation matrices and spectral factorization.

Shared by the geometric side (realizing a Gram matrix as unit vectors) and
the Gaussian side (sampling from a covariance).
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import InvalidInput, NotPSD

TOL_PSD = 1e-9
TOL_SYM = 1e-9


def psd_threshold(eigvals: np.ndarray, tol_psd: float = TOL_PSD) -> float:
    """Most negative eigenvalue still accepted as PSD: ``-tol_psd * n * max(|eig|)``."""
    n = len(eigvals)
    scale = float(np.max(np.abs(eigvals))) if n else 0.0
    return -tol_psd * n * scale


def spectral_factor(matrix, tol_psd: float = TOL_PSD, drop_null: bool = True) -> np.ndarray:
    """Return ``F`` with ``F @ F.T == matrix``, clamping tiny negative eigenvalues.

    Parameters
    ----------
    matrix : array_like (n, n)
        Symmetric matrix.
    tol_psd : float
        Relative PSD tolerance. Eigenvalues below ``-tol_psd * n * max|eig|``
        raise :class:`NotPSD`; the rest of the negative ones are set to zero.
    drop_null : bool
        If true, columns belonging to numerically zero eigenvalues are
        removed so that ``F.shape[1]`` is the numerical rank.

    Returns
    -------
    ndarray (n, r)
    """
    a = np.asarray(matrix, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInput(f"expected a square matrix, got shape {a.shape}")
    n = a.shape[0]
    if n == 0:
        return np.zeros((0, 0))
    w, v = np.linalg.eigh((a + a.T) / 2)
    lo = psd_threshold(w, tol_psd)
    if w[0] < lo:
        raise NotPSD(f"smallest eigenvalue {w[0]:.3e} below tolerance {lo:.3e}")
    w = np.clip(w, 0.0, None)
    if drop_null:
        # numpy.linalg.matrix_rank default cutoff
        keep = w > w[-1] * n * np.finfo(float).eps
        w, v = w[keep], v[:, keep]
    f = v * np.sqrt(w)
    # fix column signs for reproducible output
    for j in range(f.shape[1]):
        k = np.argmax(np.abs(f[:, j]) > 1e-12)
        if f[k, j] < 0:
            f[:, j] = -f[:, j]
    return f[:, ::-1]


def _as_labels(labels, n):
    if labels is None:
        return tuple(str(i) for i in range(n))
    labels = tuple(labels)
    if len(labels) != n:
        raise InvalidInput(f"{len(labels)} labels for a {n}x{n} matrix")
    if len(set(labels)) != n:
        raise InvalidInput("labels must be unique")
    return labels


@dataclass(frozen=True)
class CorrelationMatrix:
    """Symmetric PSD matrix with unit diagonal and labeled rows.

    Construction validates and symmetrizes; the stored array is read-only.
    """

    labels: tuple
    entries: np.ndarray

    def __init__(self, entries, labels: Sequence | None = None, tol_psd: float = TOL_PSD,
                 check_psd: bool = True):
        a = np.array(entries, dtype=float)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InvalidInput(f"correlation matrix must be square, got shape {a.shape}")
        if not np.all(np.isfinite(a)):
            raise InvalidInput("correlation matrix has non-finite entries")
        n = a.shape[0]
        if np.max(np.abs(a - a.T), initial=0.0) > TOL_SYM:
            raise InvalidInput("correlation matrix is not symmetric")
        if np.max(np.abs(np.diag(a) - 1.0), initial=0.0) > TOL_SYM:
            raise InvalidInput("correlation matrix must have unit diagonal")
        a = (a + a.T) / 2
        np.fill_diagonal(a, 1.0)
        if np.max(np.abs(a), initial=0.0) > 1.0 + TOL_SYM:
            raise InvalidInput("correlation entries must lie in [-1, 1]")
        a = np.clip(a, -1.0, 1.0)
        if check_psd and n:
            w = np.linalg.eigvalsh(a)
            lo = psd_threshold(w, tol_psd)
            if w[0] < lo:
                raise NotPSD(f"smallest eigenvalue {w[0]:.3e} below tolerance {lo:.3e}")
        a.setflags(write=False)
        object.__setattr__(self, "labels", _as_labels(labels, n))
        object.__setattr__(self, "entries", a)

    def __len__(self):
        return len(self.labels)

    def __eq__(self, other):
        if not isinstance(other, CorrelationMatrix):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.entries, other.entries)

    def __hash__(self):
        return hash((self.labels, self.entries.tobytes()))

    def index(self, label) -> int:
        return self.labels.index(label)

    def __getitem__(self, pair):
        u, v = pair
        return float(self.entries[self.index(u), self.index(v)])

    def restrict(self, labels: Sequence) -> "CorrelationMatrix":
        idx = [self.index(u) for u in labels]
        return CorrelationMatrix(self.entries[np.ix_(idx, idx)], labels, check_psd=False)

    def sign_conjugate(self, signs) -> "CorrelationMatrix":
        """Return ``diag(a) C diag(a)`` for a label -> +-1 mapping."""
        a = np.array([signs[u] for u in self.labels], dtype=float)
        return CorrelationMatrix(self.entries * np.outer(a, a), self.labels, check_psd=False)


def standardize(cov, labels: Sequence | None = None, tol_psd: float = TOL_PSD):
    """Divide a covariance matrix by the outer product of standard deviations.

    Returns
    -------
    corr : CorrelationMatrix
        Restricted to labels with positive variance.
    zero_variance : tuple
        Labels whose variance is zero (within tolerance).
    """
    a = np.asarray(cov, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise InvalidInput(f"covariance must be square, got shape {a.shape}")
    labels = _as_labels(labels, a.shape[0])
    var = np.diag(a)
    scale = max(float(np.max(np.abs(var), initial=0.0)), np.finfo(float).tiny)
    if np.any(var < -tol_psd * scale):
        raise NotPSD("covariance has a negative variance")
    keep = var > tol_psd * scale
    zero = tuple(u for u, k in zip(labels, keep) if not k)
    idx = np.flatnonzero(keep)
    sub = a[np.ix_(idx, idx)]
    sd = np.sqrt(var[idx])
    corr = sub / np.outer(sd, sd)
    return CorrelationMatrix(corr, [labels[i] for i in idx], tol_psd=tol_psd), zero
