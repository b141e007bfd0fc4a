"""Decomposition of correlation matrices invariant under spherical projections.

An invariant configuration splits into mutually orthogonal blocks. After a
sign change of some vectors, each block has strictly positive correlations
``c``, and ``d = arccosh(1 / c)`` is a metric with the triangle equality.
Such a metric is either a subset of the line (the block is a piece of the
sech helix, ``c = sech|psi(u) - psi(v)|``) or one of the exceptional
four-point spaces (the block is a quadruple ``Y_{x,y}``).

Pipeline::

    collapse_duplicates -> orthogonal_components -> recover_signs
        -> gram_to_metric -> check_triangle_equality
        -> embed_line (helix) | classify_quadruple + is_admissible (quadruple)
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .correlation import TOL_PSD, CorrelationMatrix, standardize
from .errors import (HelixProjError, InvalidMetric, InvalidParameters, NonPositiveEntry,
                     NotAdmissible, NotEmbeddable, NotTriangleEqual, SignInconsistency, ZeroPivot)
from .metric import (TOL_REL, FiniteMetricSpace, check_triangle_equality, classify_quadruple,
                     embed_line)

TOL_ORTH = 1e-9
TOL_DUP = 1e-9
QUADRUPLE_LABELS = ("A", "B", "C", "D")


def _key(label):
    return str(label)


@dataclass(frozen=True)
class Tolerances:
    orth: float = TOL_ORTH
    psd: float = TOL_PSD
    dup: float = TOL_DUP
    metric: float = TOL_REL


def sech(x):
    return 1.0 / np.cosh(x)


# ---------------------------------------------------------------------------
# exceptional quadruples

def quadruple_eigenvalues(x: float, y: float) -> tuple[float, float, float, float]:
    """Closed-form spectrum of the quadruple Gram matrix with parameters ``(x, y)``."""
    a, b, c = sech(y), sech(x - y), sech(x)
    return (float(1 + a + b + c), float(1 + a - b - c),
            float(1 - a + b - c), float(1 - a - b + c))


def _min_lambda(x, y):
    # evaluated on (max, min) so the result is exactly symmetric in (x, y)
    hi, lo = np.maximum(x, y), np.minimum(x, y)
    a, b, c = sech(lo), sech(hi - lo), sech(hi)
    lam1 = 1 + a + b + c
    lam = np.minimum(np.minimum(1 + a - b - c, 1 - a + b - c), 1 - a - b + c)
    return lam, lam1


def _admissible_mask(x, y, tol_psd, tol):
    lam, lam1 = _min_lambda(x, y)
    return (lam >= -tol_psd * 4 * lam1) & (np.abs(x - y) > tol)


def is_admissible(x: float, y: float, tol_psd: float = TOL_PSD, tol: float = 1e-9) -> bool:
    """True when the quadruple Gram matrix is PSD and ``x != y``."""
    if not (x > 0 and y > 0):
        raise InvalidParameters(f"admissibility needs x > 0 and y > 0, got ({x}, {y})")
    return bool(_admissible_mask(np.array([x], float), np.array([y], float), tol_psd, tol)[0])


def admissible_region(xmax: float, step: float, tol_psd: float = TOL_PSD) -> list[tuple[float, float]]:
    """Admissible grid points of ``(0, xmax]^2`` at spacing ``step``, sorted."""
    if not (xmax > 0 and 0 < step < xmax):
        raise InvalidParameters("need xmax > 0 and 0 < step < xmax")
    m = int(math.floor(xmax / step + 1e-9))
    g = np.round(np.arange(1, m + 1) * step, 12)
    xx, yy = np.meshgrid(g, g, indexing="ij")
    mask = _admissible_mask(xx, yy, tol_psd, 1e-9)
    return [(float(a), float(b)) for a, b in zip(xx[mask], yy[mask])]


def quadruple_gram(x: float, y: float, signs: Mapping | Sequence | None = None,
                   labels: Sequence = QUADRUPLE_LABELS) -> CorrelationMatrix:
    """Gram matrix of the exceptional quadruple, rows in role order A, B, C, D."""
    if not is_admissible(x, y):
        raise NotAdmissible(f"({x}, {y}) is not an admissible pair")
    sx, sy, sz = sech(x), sech(y), sech(x - y)
    g = np.array([[1, sx, sz, sy],
                  [sx, 1, sy, sz],
                  [sz, sy, 1, sx],
                  [sy, sz, sx, 1]], dtype=float)
    a = _sign_vector(signs, labels)
    return CorrelationMatrix(g * np.outer(a, a), labels)


def _sign_vector(signs, labels):
    if signs is None:
        return np.ones(len(labels))
    if isinstance(signs, Mapping):
        return np.array([signs[u] for u in labels], dtype=float)
    return np.asarray(signs, dtype=float)


def helix_gram(psi: Mapping | Sequence, signs: Mapping | Sequence | None = None) -> CorrelationMatrix:
    """Correlations ``a(u) a(v) sech(psi(u) - psi(v))`` of points on the helix."""
    if isinstance(psi, Mapping):
        labels = tuple(psi)
        t = np.array([psi[u] for u in labels], dtype=float)
    else:
        t = np.asarray(psi, dtype=float)
        labels = tuple(str(i) for i in range(len(t)))
    if not np.all(np.isfinite(t)):
        raise InvalidParameters("psi values must be finite")
    a = _sign_vector(signs, labels)
    g = sech(t[:, None] - t[None, :]) * np.outer(a, a)
    return CorrelationMatrix(g, labels, check_psd=False)


# ---------------------------------------------------------------------------
# pipeline stages

def collapse_duplicates(corr: CorrelationMatrix, tol: float = TOL_DUP):
    """Merge labels whose correlation is +-1.

    Returns
    -------
    reduced : CorrelationMatrix
        Restricted to representatives (the smallest label of each class).
    mapping : dict
        Original label -> representative.
    signs : dict
        Original label -> +-1, the sign relating it to its representative.
    """
    order = sorted(corr.labels, key=_key)
    idx = {u: corr.index(u) for u in order}
    e = corr.entries
    mapping, signs = {}, {}
    for rep in order:
        if rep in mapping:
            continue
        mapping[rep], signs[rep] = rep, 1
        for u in order:
            if u not in mapping and abs(e[idx[rep], idx[u]]) >= 1.0 - tol:
                mapping[u] = rep
                signs[u] = 1 if e[idx[rep], idx[u]] > 0 else -1
    reps = [u for u in corr.labels if mapping[u] == u]
    return corr.restrict(reps), mapping, signs


class Partition(NamedTuple):
    components: list
    violations: list


def orthogonal_components(corr: CorrelationMatrix, tol_orth: float = TOL_ORTH) -> Partition:
    """Connected components of the non-orthogonality graph.

    ``violations`` lists triples ``(u, w, v)`` with ``u ~ w ~ v`` but
    ``u`` orthogonal to ``v``: an invariant configuration has none.
    """
    labels = corr.labels
    n = len(labels)
    adj = np.abs(corr.entries) > tol_orth
    np.fill_diagonal(adj, False)
    seen = [False] * n
    components, violations = [], []
    for start in sorted(range(n), key=lambda i: _key(labels[i])):
        if seen[start]:
            continue
        comp, queue = [], deque([start])
        seen[start] = True
        while queue:
            i = queue.popleft()
            comp.append(i)
            for j in np.flatnonzero(adj[i]):
                if not seen[j]:
                    seen[j] = True
                    queue.append(j)
        comp.sort(key=lambda i: _key(labels[i]))
        components.append(tuple(labels[i] for i in comp))
        for a in range(len(comp)):
            for b in range(a + 1, len(comp)):
                if not adj[comp[a], comp[b]]:
                    violations.append(_intransitive_triple(adj, comp[a], comp[b], labels))
    return Partition(components, violations)


def _intransitive_triple(adj, u, v, labels):
    # first three vertices of a shortest u-v path; u and its second successor are orthogonal
    prev = {u: None}
    queue = deque([u])
    while queue:
        i = queue.popleft()
        if i == v:
            break
        for j in np.flatnonzero(adj[i]):
            if j not in prev:
                prev[j] = i
                queue.append(j)
    path = [v]
    while prev[path[-1]] is not None:
        path.append(prev[path[-1]])
    path.reverse()
    return labels[path[0]], labels[path[1]], labels[path[2]]


def recover_signs(corr: CorrelationMatrix, s0=None, tol_orth: float = TOL_ORTH) -> dict:
    """Signs ``a(u) = sign <u, s0>`` making the block's correlations positive.

    Raises
    ------
    ZeroPivot
        If some label is orthogonal to ``s0``.
    SignInconsistency
        If the sign-adjusted matrix still has a non-positive entry.
    """
    labels = corr.labels
    if s0 is None:
        s0 = min(labels, key=_key)
    row = corr.entries[corr.index(s0)]
    if np.any(np.abs(row) <= tol_orth):
        u = labels[int(np.argmin(np.abs(row)))]
        raise ZeroPivot(f"{u!r} is orthogonal to the reference {s0!r}")
    signs = {u: (1 if row[i] > 0 else -1) for i, u in enumerate(labels)}
    adjusted = corr.sign_conjugate(signs).entries
    if np.min(adjusted) <= tol_orth:
        i, j = np.unravel_index(np.argmin(adjusted), adjusted.shape)
        pair = (labels[i], labels[j])
        raise SignInconsistency(f"sign-adjusted correlation of {pair} is {adjusted[i, j]:.3e}", pair)
    return signs


def correlation_to_distance(c):
    """``arccosh(1 / c)`` for ``c`` in ``(0, 1]``, accurate near ``c = 1``."""
    c = np.asarray(c, dtype=float)
    s = np.sqrt((1.0 - c) * (1.0 + c))
    return np.log1p(s) - np.log(c)


def gram_to_metric(corr: CorrelationMatrix) -> FiniteMetricSpace:
    """Distances ``arccosh(1 / c)`` of a positive correlation matrix."""
    e = corr.entries
    if np.any(e <= 0):
        raise NonPositiveEntry("correlations must be strictly positive")
    d = correlation_to_distance(e)
    np.fill_diagonal(d, 0.0)
    return FiniteMetricSpace(d, corr.labels)


# ---------------------------------------------------------------------------
# reports

@dataclass(frozen=True)
class Singleton:
    label: object
    sign: int = 1
    kind = "singleton"

    @property
    def labels(self):
        return (self.label,)

    def to_dict(self):
        return {"type": "singleton", "labels": [self.label], "sign": self.sign}


@dataclass(frozen=True)
class HelixComponent:
    """Points ``a(u) X(psi(u))`` of the sech helix."""

    labels: tuple
    psi: dict
    signs: dict
    kind = "helix"

    def to_dict(self):
        return {"type": "helix", "labels": list(self.labels),
                "psi": {str(u): self.psi[u] for u in self.labels},
                "signs": {str(u): self.signs[u] for u in self.labels}}


@dataclass(frozen=True)
class QuadrupleComponent:
    """An exceptional quadruple; ``labels`` are in role order A, B, C, D."""

    labels: tuple
    x: float
    y: float
    signs: dict
    kind = "quadruple"

    @property
    def roles(self) -> dict:
        return dict(zip(self.labels, QUADRUPLE_LABELS))

    def to_dict(self):
        return {"type": "quadruple", "labels": list(self.labels), "x": self.x, "y": self.y,
                "roles": {str(u): r for u, r in self.roles.items()},
                "signs": {str(u): self.signs[u] for u in self.labels}}


@dataclass(frozen=True)
class Diagnostic:
    stage: str
    message: str
    labels: tuple = ()

    def to_dict(self):
        return {"stage": self.stage, "message": self.message, "labels": list(self.labels)}


@dataclass(frozen=True)
class ClassificationReport:
    components: tuple
    collapsed: dict
    relative_signs: dict
    diagnostics: tuple = field(default_factory=tuple)

    @property
    def status(self) -> str:
        return "not_invariant" if self.diagnostics else "classified"

    @property
    def classified(self) -> bool:
        return not self.diagnostics

    def component_of(self, label):
        rep = self.collapsed.get(label, label)
        for comp in self.components:
            if rep in comp.labels:
                return comp
        raise KeyError(label)

    def gram(self, labels: Sequence | None = None) -> np.ndarray:
        """Correlation matrix implied by the report (classified reports only)."""
        if not self.classified:
            raise HelixProjError("report is not classified")
        if labels is None:
            labels = list(self.collapsed)
        n = len(labels)
        g = np.zeros((n, n))
        for i, u in enumerate(labels):
            for j, v in enumerate(labels):
                g[i, j] = self._entry(u, v)
        return g

    def _entry(self, u, v):
        ru, rv = self.collapsed[u], self.collapsed[v]
        su, sv = self.relative_signs[u], self.relative_signs[v]
        cu, cv = self.component_of(ru), self.component_of(rv)
        if cu is not cv:
            return 0.0
        if isinstance(cu, Singleton):
            return float(su * sv * cu.sign ** 2)
        a = su * sv * cu.signs[ru] * cu.signs[rv]
        if isinstance(cu, HelixComponent):
            return float(a * sech(cu.psi[ru] - cu.psi[rv]))
        ra, rb = cu.roles[ru], cu.roles[rv]
        g = quadruple_gram(cu.x, cu.y).entries
        return float(a * g[QUADRUPLE_LABELS.index(ra), QUADRUPLE_LABELS.index(rb)])

    def to_dict(self):
        return {
            "version": 1,
            "status": self.status,
            "components": [c.to_dict() for c in self.components],
            "collapsed": {str(u): r for u, r in self.collapsed.items()},
            "relative_signs": {str(u): s for u, s in self.relative_signs.items()},
            "diagnostics": [d.to_dict() for d in self.diagnostics],
        }


def _normalize_psi(coords: dict, labels: tuple) -> dict:
    first, second = labels[0], labels[1]
    flip = -1.0 if coords[second] < coords[first] else 1.0
    x = {u: flip * c for u, c in coords.items()}
    lo = min(x.values())
    return {u: x[u] - lo for u in labels}


def _classify_block(corr: CorrelationMatrix, labels: tuple, tol: Tolerances):
    if len(labels) == 1:
        return Singleton(labels[0])
    block = corr.restrict(labels)
    signs = recover_signs(block, labels[0], tol.orth)
    space = gram_to_metric(block.sign_conjugate(signs))
    ok, witness = check_triangle_equality(space, tol.metric)
    if not ok:
        raise NotTriangleEqual(f"triangle {witness} violates the triangle equality", witness)
    if len(labels) == 4:
        q = classify_quadruple(space, tol.metric)
        if q.exceptional:
            if not is_admissible(q.x, q.y, tol.psd):
                raise NotAdmissible(f"quadruple parameters ({q.x}, {q.y}) are not admissible")
            order = tuple(sorted(q.roles, key=lambda u: q.roles[u]))
            return QuadrupleComponent(order, q.x, q.y, signs)
        coords = q.embedding.coords
    else:
        coords = embed_line(space, tol.metric).coords
    return HelixComponent(labels, _normalize_psi(coords, labels), signs)


# arccosh(1 / c) of a non-invariant block need not even be a metric
_STAGE = {ZeroPivot: "signs", SignInconsistency: "signs", InvalidMetric: "metric",
          NotTriangleEqual: "triangle_equality", NotEmbeddable: "line_embedding",
          NotAdmissible: "admissibility"}


def classify(corr: CorrelationMatrix, tol: Tolerances | None = None) -> ClassificationReport:
    """Decompose ``corr`` into helix pieces, exceptional quadruples and singletons.

    Failures at any stage are recorded as diagnostics and make the report's
    status ``not_invariant``; components that did classify are still listed.
    """
    tol = tol or Tolerances()
    reduced, mapping, rel = collapse_duplicates(corr, tol.dup)
    part = orthogonal_components(reduced, tol.orth)
    diagnostics = [Diagnostic("orthogonality", f"{u!r} ~ {w!r} ~ {v!r} but {u!r} is orthogonal to {v!r}",
                              (u, w, v)) for u, w, v in part.violations]
    bad = {u for t in part.violations for u in t}
    components = []
    for labels in part.components:
        if bad.intersection(labels):
            continue
        try:
            components.append(_classify_block(reduced, labels, tol))
        except tuple(_STAGE) as exc:
            stage = next(v for k, v in _STAGE.items() if isinstance(exc, k))
            diagnostics.append(Diagnostic(stage, str(exc), labels))
    return ClassificationReport(tuple(components), mapping, rel, tuple(diagnostics))


def classify_covariance(cov, labels: Sequence | None = None,
                        tol: Tolerances | None = None) -> ClassificationReport:
    """Standardize a covariance matrix and classify it.

    Zero-variance labels become singletons with sign 0.
    """
    tol = tol or Tolerances()
    corr, zero = standardize(cov, labels, tol.psd)
    report = classify(corr, tol)
    extra = tuple(Singleton(u, 0) for u in zero)
    comps = sorted(report.components + extra, key=lambda c: _key(min(c.labels, key=_key)))
    collapsed = dict(report.collapsed, **{u: u for u in zero})
    rel = dict(report.relative_signs, **{u: 1 for u in zero})
    return ClassificationReport(tuple(comps), collapsed, rel, report.diagnostics)
