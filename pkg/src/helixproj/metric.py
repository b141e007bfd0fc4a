"""Finite metric spaces with the triangle equality.

A metric space satisfies the triangle equality when in every triple of
points the largest distance is the sum of the other two. Such spaces embed
isometrically into the real line, with one family of exceptions on four
points: ``d(A,B) = d(C,D) = x``, ``d(A,D) = d(B,C) = y`` and
``d(A,C) = d(B,D) = |x - y|``.

All equality tests use a tolerance relative to the diameter of the space.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from .errors import (CoincidentPoints, DegenerateQuadruple, InvalidInput, InvalidMetric,
                     InvalidParameters, NotEmbeddable, NotTriangleEqual)

TOL_REL = 1e-9

# the three ways of splitting four points into two opposite pairs
_MATCHINGS = (((0, 1), (2, 3)), ((0, 2), (1, 3)), ((0, 3), (1, 2)))


@dataclass(frozen=True)
class FiniteMetricSpace:
    """Labeled points with a validated distance matrix."""

    labels: tuple
    dist: np.ndarray

    def __init__(self, dist, labels: Sequence | None = None, tol: float = TOL_REL):
        d = np.array(dist, dtype=float)
        if d.ndim != 2 or d.shape[0] != d.shape[1]:
            raise InvalidMetric(f"distance matrix must be square, got shape {d.shape}")
        n = d.shape[0]
        if labels is None:
            labels = [str(i) for i in range(n)]
        labels = tuple(labels)
        if len(labels) != n or len(set(labels)) != n:
            raise InvalidInput("labels must be unique and match the matrix size")
        if not np.all(np.isfinite(d)):
            raise InvalidMetric("distances must be finite")
        diam = float(np.max(np.abs(d), initial=0.0))
        eps = tol * max(diam, np.finfo(float).tiny)
        if np.max(np.abs(d - d.T), initial=0.0) > eps:
            raise InvalidMetric("distance matrix is not symmetric")
        if np.max(np.abs(np.diag(d)), initial=0.0) > eps:
            raise InvalidMetric("distance matrix has a nonzero diagonal")
        if np.min(d, initial=0.0) < -eps:
            raise InvalidMetric("negative distance")
        d = (d + d.T) / 2
        np.fill_diagonal(d, 0.0)
        off = d + np.eye(n) * (diam + 1.0)
        if n > 1 and np.min(off) <= eps:
            i, j = np.unravel_index(np.argmin(off), off.shape)
            raise CoincidentPoints(f"points {labels[i]!r} and {labels[j]!r} coincide")
        if n > 2:
            # d[i,k] <= d[i,j] + d[j,k] for all i, j, k
            excess = d[:, None, :] - d[:, :, None] - d[None, :, :]
            if np.max(excess) > eps:
                raise InvalidMetric("triangle inequality violated")
        d.setflags(write=False)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "dist", d)

    def __len__(self):
        return len(self.labels)

    def __eq__(self, other):
        if not isinstance(other, FiniteMetricSpace):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.dist, other.dist)

    def __hash__(self):
        return hash((self.labels, self.dist.tobytes()))

    @property
    def diameter(self) -> float:
        return float(np.max(self.dist, initial=0.0))

    def d(self, u, v) -> float:
        return float(self.dist[self.labels.index(u), self.labels.index(v)])

    def subspace(self, labels: Sequence) -> "FiniteMetricSpace":
        idx = [self.labels.index(u) for u in labels]
        return FiniteMetricSpace(self.dist[np.ix_(idx, idx)], labels)

    def scaled(self, factor: float) -> "FiniteMetricSpace":
        return FiniteMetricSpace(self.dist * factor, self.labels)


class TriangleCheck(NamedTuple):
    holds: bool
    witness: tuple | None = None


def check_triangle_equality(space: FiniteMetricSpace, tol: float = TOL_REL) -> TriangleCheck:
    """Test that every triangle is degenerate (largest side = sum of the others).

    Returns ``(True, None)`` or ``(False, (u, v, w))`` with the labels of the
    worst violating triple.
    """
    n = len(space)
    if n < 3:
        return TriangleCheck(True)
    d = space.dist
    i, j, k = np.array(list(itertools.combinations(range(n), 3))).T
    a, b, c = d[i, j], d[j, k], d[i, k]
    gap = 2 * np.maximum(np.maximum(a, b), c) - (a + b + c)
    eps = tol * space.diameter
    worst = int(np.argmax(np.abs(gap)))
    if abs(gap[worst]) <= eps:
        return TriangleCheck(True)
    lab = space.labels
    return TriangleCheck(False, (lab[i[worst]], lab[j[worst]], lab[k[worst]]))


@dataclass(frozen=True)
class LineEmbedding:
    coords: dict

    def __getitem__(self, label) -> float:
        return self.coords[label]

    def max_error(self, space: FiniteMetricSpace) -> float:
        x = np.array([self.coords[u] for u in space.labels])
        return float(np.max(np.abs(np.abs(x[:, None] - x[None, :]) - space.dist), initial=0.0))


def _anchor_pair(space: FiniteMetricSpace, tol: float) -> tuple[int, int]:
    d = space.dist
    n = len(space)
    diam = space.diameter
    best = None
    for i, j in itertools.combinations(range(n), 2):
        if d[i, j] >= diam * (1 - tol):
            key = tuple(sorted((str(space.labels[i]), str(space.labels[j]))))
            if best is None or key < best[0]:
                best = (key, i, j)
    _, i, j = best
    if str(space.labels[j]) < str(space.labels[i]):
        i, j = j, i
    return i, j


def _require_triangle_equality(space, tol):
    ok, witness = check_triangle_equality(space, tol)
    if not ok:
        raise NotTriangleEqual(f"triangle {witness} violates the triangle equality", witness)


def embed_line(space: FiniteMetricSpace, tol: float = TOL_REL) -> LineEmbedding:
    """Isometric embedding into the real line.

    The anchor pair ``(A, B)`` realizes the diameter (ties broken by the
    lexicographically smallest label pair); ``A`` is placed at 0 and ``B``
    at ``d(A, B)``. Every other point ``C`` lies between them, so its
    coordinate is ``d(A, C)``.

    Raises
    ------
    NotTriangleEqual
        If some triple violates the triangle equality.
    NotEmbeddable
        If the placement is not an isometry; ``exc.quadruple`` names four
        points ``A, B, u, v`` forming a non-embeddable subspace.
    """
    _require_triangle_equality(space, tol)
    n = len(space)
    lab = space.labels
    if n == 0:
        return LineEmbedding({})
    if n == 1:
        return LineEmbedding({lab[0]: 0.0})
    a, b = _anchor_pair(space, tol)
    x = space.dist[a].copy()
    eps = tol * space.diameter
    err = np.abs(np.abs(x[:, None] - x[None, :]) - space.dist)
    if np.max(err) > eps:
        u, v = np.unravel_index(np.argmax(err), err.shape)
        quad = (lab[a], lab[b], lab[min(u, v)], lab[max(u, v)])
        raise NotEmbeddable(f"points {quad} admit no isometric embedding into the line", quad)
    return LineEmbedding({u: float(c) for u, c in zip(lab, x)})


@dataclass(frozen=True)
class QuadrupleClass:
    """Classification of a four-point triangle-equality space.

    For the exceptional variant ``x > y > 0`` are the largest and middle of
    the three opposite-pair distances, ``pairing`` lists the matchings
    carrying ``x``, ``y`` and ``x - y`` in that order, and ``roles`` maps
    each label to ``A``/``B``/``C``/``D`` so that ``d(A,B) = x``,
    ``d(A,D) = y`` and ``d(A,C) = x - y``.
    """

    variant: str
    x: float | None = None
    y: float | None = None
    pairing: tuple | None = None
    roles: dict | None = None
    embedding: LineEmbedding | None = None

    @property
    def exceptional(self) -> bool:
        return self.variant == "exceptional"


def _match_exceptional(d: np.ndarray, lab: tuple, eps: float) -> QuadrupleClass | None:
    found = []
    for m, ((i, j), (k, l)) in enumerate(_MATCHINGS):
        if abs(d[i, j] - d[k, l]) > eps:
            return None
        found.append(((d[i, j] + d[k, l]) / 2, m))
    found.sort(key=lambda t: (-t[0], -t[1]))
    (big, mx), (mid, my), (small, ms) = found
    if abs(big - (mid + small)) > eps or mid <= eps or small <= eps:
        return None
    pairing = tuple(tuple((lab[p], lab[q]) for p, q in _MATCHINGS[m]) for m in (mx, my, ms))

    def partner(m, p):
        for pair in _MATCHINGS[m]:
            if p in pair:
                return pair[1] if pair[0] == p else pair[0]

    b, dd = partner(mx, 0), partner(my, 0)
    c = ({0, 1, 2, 3} - {0, b, dd}).pop()
    roles = {lab[0]: "A", lab[b]: "B", lab[c]: "C", lab[dd]: "D"}
    return QuadrupleClass("exceptional", float(big), float(mid), pairing, roles)


def classify_quadruple(space, tol: float = TOL_REL, labels: Sequence | None = None) -> QuadrupleClass:
    """Decide whether four points are classical (line-embeddable) or exceptional.

    ``space`` may be a :class:`FiniteMetricSpace` or a raw 4x4 distance matrix.
    Embedding is attempted first; only if it fails is the exceptional pattern
    matched.
    """
    if not isinstance(space, FiniteMetricSpace):
        try:
            space = FiniteMetricSpace(space, labels, tol)
        except CoincidentPoints as exc:
            raise DegenerateQuadruple(str(exc)) from exc
    if len(space) != 4:
        raise InvalidInput(f"expected 4 points, got {len(space)}")
    _require_triangle_equality(space, tol)
    try:
        return QuadrupleClass("classical", embedding=embed_line(space, tol))
    except NotEmbeddable:
        pass
    found = _match_exceptional(space.dist, space.labels, tol * space.diameter)
    if found is None:
        raise NotEmbeddable("quadruple is neither line-embeddable nor of the exceptional pattern",
                            space.labels)
    return found


def exceptional_quadruple(x: float, y: float, labels: Sequence = ("A", "B", "C", "D")) -> FiniteMetricSpace:
    """The non-embeddable four-point space with parameters ``x != y``, both positive."""
    if not (x > 0 and y > 0) or x == y:
        raise InvalidParameters(f"need x > 0, y > 0 and x != y, got ({x}, {y})")
    z = abs(x - y)
    d = np.array([[0, x, z, y],
                  [x, 0, y, z],
                  [z, y, 0, x],
                  [y, z, x, 0]], dtype=float)
    return FiniteMetricSpace(d, labels)
