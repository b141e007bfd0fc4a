"""Projective-space primitives.

Points of the projective space are unit vectors up to sign. The geodesic
metric is ``arccos |<x, y>|`` and the spherical projection along ``s0`` maps
``y`` to the normalized component of ``y`` orthogonal to ``s0``.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .correlation import TOL_PSD, CorrelationMatrix, spectral_factor
from .errors import DimensionMismatch, InvalidInput, ProjectionUndefined

TOL_NORM = 1e-10
TOL_INVARIANCE = 1e-8


def _canonical_sign(v: np.ndarray, tol: float) -> np.ndarray:
    nz = np.flatnonzero(np.abs(v) > tol)
    if len(nz) and v[nz[0]] < 0:
        return -v
    return v


@dataclass(frozen=True, eq=False)
class ProjectivePoint:
    """A point ``+-x`` of the projective space.

    ``rep`` is the representative as given (so that a configuration keeps
    its signed Gram matrix); ``canonical`` is the one whose first
    non-negligible coordinate is positive.
    """

    rep: np.ndarray

    def __init__(self, coords, tol_norm: float = TOL_NORM, normalize: bool = False):
        v = np.array(coords, dtype=float).ravel()
        norm = float(np.linalg.norm(v))
        if normalize:
            if norm == 0.0:
                raise InvalidInput("cannot normalize the zero vector")
            v = v / norm
        elif abs(norm - 1.0) > tol_norm:
            raise InvalidInput(f"not a unit vector (norm {norm!r})")
        v.setflags(write=False)
        object.__setattr__(self, "rep", v)

    @property
    def dim(self) -> int:
        return self.rep.shape[0]

    @property
    def canonical(self) -> np.ndarray:
        return _canonical_sign(self.rep, TOL_NORM)

    def equals(self, other: "ProjectivePoint", tol: float = TOL_NORM) -> bool:
        if self.dim != other.dim:
            return False
        return bool(np.allclose(self.canonical, other.canonical, atol=tol, rtol=0))

    def __eq__(self, other):
        if not isinstance(other, ProjectivePoint):
            return NotImplemented
        return self.equals(other)

    __hash__ = None

    def __repr__(self):
        return f"ProjectivePoint({np.array2string(self.canonical, precision=6)})"


@dataclass(frozen=True)
class Configuration:
    """Finite labeled set of projective points in a common ambient space."""

    labels: tuple
    points: tuple

    def __post_init__(self):
        labels = tuple(self.labels)
        points = tuple(self.points)
        if len(labels) != len(points):
            raise InvalidInput("labels and points differ in length")
        if len(set(labels)) != len(labels):
            raise InvalidInput("labels must be unique")
        if len({p.dim for p in points}) > 1:
            raise DimensionMismatch("points have different ambient dimensions")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "points", points)

    @classmethod
    def from_vectors(cls, vectors, labels: Sequence | None = None, normalize: bool = False):
        """Build from the rows of a matrix."""
        vectors = np.atleast_2d(np.asarray(vectors, dtype=float))
        if labels is None:
            labels = [str(i) for i in range(vectors.shape[0])]
        return cls(tuple(labels), tuple(ProjectivePoint(v, normalize=normalize) for v in vectors))

    def __len__(self):
        return len(self.labels)

    @property
    def dim(self) -> int:
        return self.points[0].dim if self.points else 0

    @property
    def vectors(self) -> np.ndarray:
        if not self.points:
            return np.zeros((0, 0))
        return np.vstack([p.rep for p in self.points])

    def gram(self) -> np.ndarray:
        """Inner products of the chosen representatives."""
        v = self.vectors
        return v @ v.T


def geodesic_distance(p: ProjectivePoint, q: ProjectivePoint) -> float:
    """``arccos |<p, q>|``, a value in ``[0, pi/2]``."""
    if p.dim != q.dim:
        raise DimensionMismatch(f"dimensions {p.dim} and {q.dim} differ")
    c = min(abs(float(p.rep @ q.rep)), 1.0)
    return math.acos(c)


def spherical_project(s0: ProjectivePoint, y: ProjectivePoint, tol: float = TOL_NORM) -> ProjectivePoint:
    """Project ``y`` to the hyperplane orthogonal to ``s0`` and renormalize.

    Raises
    ------
    ProjectionUndefined
        If ``|<s0, y>| >= 1 - tol``, i.e. ``y`` coincides with ``+-s0``.
    """
    if s0.dim != y.dim:
        raise DimensionMismatch(f"dimensions {s0.dim} and {y.dim} differ")
    c = float(s0.rep @ y.rep)
    if abs(c) >= 1.0 - tol:
        raise ProjectionUndefined(f"|<s0, y>| = {abs(c)!r} is within {tol} of 1")
    w = y.rep - c * s0.rep
    return ProjectivePoint(w / math.sqrt(1.0 - c * c), tol_norm=1e-8, normalize=True)


@dataclass(frozen=True)
class Violation:
    s0: object
    x: object
    y: object
    discrepancy: float
    structural: bool = False


@dataclass(frozen=True)
class InvarianceReport:
    passed: bool
    max_discrepancy: float
    violations: tuple = field(default_factory=tuple)
    checked: int = 0

    def to_dict(self) -> dict:
        return {
            "version": 1,
            "passed": self.passed,
            "max_discrepancy": self.max_discrepancy,
            "checked": self.checked,
            "violations": [
                {"s0": v.s0, "x": v.x, "y": v.y,
                 "discrepancy": v.discrepancy if not v.structural else None,
                 "structural": v.structural}
                for v in self.violations
            ],
        }


def verify_projection_invariance(config: Configuration, tol: float = TOL_INVARIANCE,
                                 tol_coincide: float = TOL_NORM) -> InvarianceReport:
    """Check that spherical projections preserve all pairwise distances.

    For every ``s0`` in the configuration and every unordered pair ``{x, y}``
    of the remaining points this compares ``|<p(x), p(y)>|`` with
    ``|<x, y>|``. Pairs involving a point whose projection along ``s0`` is
    undefined are reported once per ``(s0, x)`` as structural violations.
    """
    labels = config.labels
    n = len(labels)
    if n == 0:
        return InvarianceReport(True, 0.0, (), 0)
    v = config.vectors
    g = v @ v.T
    violations = []
    worst = 0.0
    checked = 0
    for k in range(n):
        c = g[k]
        others = [i for i in range(n) if i != k]
        bad = [i for i in others if abs(c[i]) >= 1.0 - tol_coincide]
        for i in bad:
            violations.append(Violation(labels[k], labels[i], labels[i], math.inf, structural=True))
        good = np.array([i for i in others if i not in bad], dtype=int)
        if len(good) < 2:
            continue
        # rows are p_{s0}(x) for x in good
        proj = v[good] - np.outer(c[good], v[k])
        proj /= np.sqrt(1.0 - c[good] ** 2)[:, None]
        pg = np.abs(proj @ proj.T)
        og = np.abs(g[np.ix_(good, good)])
        diff = np.abs(pg - og)
        for a, b in itertools.combinations(range(len(good)), 2):
            checked += 1
            d = float(diff[a, b])
            worst = max(worst, d)
            if d > tol:
                violations.append(Violation(labels[k], labels[good[a]], labels[good[b]], d))
    return InvarianceReport(not violations, worst, tuple(violations), checked)


def embed_gram(gram, labels: Sequence | None = None, tol_psd: float = TOL_PSD) -> Configuration:
    """Realize a correlation matrix as unit vectors.

    Parameters
    ----------
    gram : CorrelationMatrix or array_like
        Symmetric, unit diagonal, PSD within ``tol_psd``.
    labels : sequence, optional
        Overrides/labels a plain array; ignored for a CorrelationMatrix.

    Returns
    -------
    Configuration
        Ambient dimension equals the numerical rank of ``gram``.
    """
    if not isinstance(gram, CorrelationMatrix):
        gram = CorrelationMatrix(gram, labels, tol_psd=tol_psd)
    f = spectral_factor(gram.entries, tol_psd=tol_psd)
    # renormalize away the clamping error so reps are exactly unit
    f = f / np.linalg.norm(f, axis=1)[:, None]
    return Configuration(gram.labels, tuple(ProjectivePoint(row) for row in f))
