import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from helixproj import (FiniteMetricSpace, check_triangle_equality, classify_quadruple,
                       embed_line, exceptional_quadruple)
from helixproj.errors import (CoincidentPoints, DegenerateQuadruple, InvalidMetric,
                              InvalidParameters, NotEmbeddable, NotTriangleEqual)

from oracles import brute_force_embeddable, line_metric


def test_triangle_equality_collinear():
    assert check_triangle_equality(FiniteMetricSpace(line_metric([0, 1, 3]))) == (True, None)


def test_triangle_equality_equilateral_has_witness():
    ok, witness = check_triangle_equality(FiniteMetricSpace(np.ones((3, 3)) - np.eye(3), "abc"))
    assert not ok
    assert sorted(witness) == ["a", "b", "c"]


def test_triangle_equality_example_quadruple():
    assert check_triangle_equality(exceptional_quadruple(2, 1)).holds


def test_metric_validation():
    with pytest.raises(InvalidMetric):
        FiniteMetricSpace([[0, 1], [2, 0]])
    with pytest.raises(InvalidMetric):
        FiniteMetricSpace([[0, 1, 5], [1, 0, 1], [5, 1, 0]])
    with pytest.raises(CoincidentPoints):
        FiniteMetricSpace([[0, 0], [0, 0]])


def test_exceptional_quadruple_distances():
    m = exceptional_quadruple(2, 1)
    assert (m.d("A", "B"), m.d("C", "D")) == (2, 2)
    assert (m.d("A", "D"), m.d("B", "C")) == (1, 1)
    assert (m.d("A", "C"), m.d("B", "D")) == (1, 1)


def test_exceptional_quadruple_symmetry():
    a, b = exceptional_quadruple(2, 1), exceptional_quadruple(1, 2)
    # relabel B <-> D
    perm = ["A", "D", "C", "B"]
    np.testing.assert_array_equal(a.dist, b.subspace(perm).dist)


@pytest.mark.parametrize("x, y", [(1, 1), (0, 1), (-1, 2)])
def test_exceptional_quadruple_invalid(x, y):
    with pytest.raises(InvalidParameters):
        exceptional_quadruple(x, y)


def test_classify_quadruple_classical():
    d = line_metric([0, 0.3, 0.7, 1])
    assert brute_force_embeddable(d)
    q = classify_quadruple(FiniteMetricSpace(d))
    assert q.variant == "classical"
    assert q.embedding.max_error(FiniteMetricSpace(d)) < 1e-15


def test_classify_quadruple_exceptional():
    q = classify_quadruple(exceptional_quadruple(2, 1))
    assert q.exceptional
    assert (q.x, q.y) == (2, 1)
    assert q.roles == {"A": "A", "B": "B", "C": "C", "D": "D"}


def test_classify_quadruple_coincident():
    d = line_metric([0, 0, 1, 2])
    with pytest.raises(DegenerateQuadruple):
        classify_quadruple(d)


def test_classify_quadruple_requires_triangle_equality():
    d = np.ones((4, 4)) - np.eye(4)
    with pytest.raises(NotTriangleEqual):
        classify_quadruple(FiniteMetricSpace(d))


def test_embed_line_two_points():
    emb = embed_line(FiniteMetricSpace([[0, 7], [7, 0]], ["p", "q"]))
    assert emb.coords == {"p": 0.0, "q": 7.0}


def test_embed_line_shuffled_collinear():
    pts = np.array([3, 0, 4, 1, 2], dtype=float)
    labels = ["v", "w", "x", "y", "z"]
    emb = embed_line(FiniteMetricSpace(line_metric(pts), labels))
    got = np.array([emb[u] for u in labels])
    # equal up to reflection and translation
    assert (np.allclose(got - got[1], pts - pts[1]) or np.allclose(got - got[1], pts[1] - pts))


def test_embed_line_anchor_convention():
    labels = ["c", "a", "b"]
    emb = embed_line(FiniteMetricSpace(line_metric([5, 0, 2]), labels))
    # diameter pair is (a, c); a is lexicographically first
    assert emb["a"] == 0.0 and emb["c"] == 5.0 and emb["b"] == 2.0


def test_embed_line_exceptional_not_embeddable():
    with pytest.raises(NotEmbeddable) as exc:
        embed_line(exceptional_quadruple(2, 1))
    assert sorted(exc.value.quadruple) == ["A", "B", "C", "D"]


def test_embed_line_not_triangle_equal():
    with pytest.raises(NotTriangleEqual):
        embed_line(FiniteMetricSpace(np.ones((3, 3)) - np.eye(3)))


line_points = st.lists(st.floats(-50, 50, allow_nan=False), min_size=2, max_size=9,
                       unique=True).filter(lambda p: min(np.diff(sorted(p))) > 1e-3)


@given(line_points)
def test_embed_line_is_isometry(pts):
    space = FiniteMetricSpace(line_metric(pts))
    emb = embed_line(space)
    assert emb.max_error(space) <= 1e-9 * space.diameter


@given(line_points, st.floats(0.01, 100))
def test_scaling(pts, lam):
    space = FiniteMetricSpace(line_metric(pts))
    scaled = space.scaled(lam)
    assert check_triangle_equality(scaled).holds
    a, b = embed_line(space), embed_line(scaled)
    for u in space.labels:
        assert b[u] == pytest.approx(lam * a[u], rel=1e-9, abs=1e-9 * scaled.diameter)


@given(st.floats(0.01, 10), st.floats(0.01, 10))
def test_exceptional_always_triangle_equal_never_embeddable(x, y):
    if abs(x - y) < 1e-3 * max(x, y):
        return
    m = exceptional_quadruple(x, y)
    assert check_triangle_equality(m).holds
    with pytest.raises(NotEmbeddable):
        embed_line(m)
    assert not brute_force_embeddable(m.dist)


@given(st.floats(0.1, 10), st.floats(0.1, 10), st.floats(-20, 20))
def test_padded_exceptional_never_embeds_with_triangle_equality(x, y, extra):
    # a fifth point anywhere along one of the pair distances cannot keep the triangle equality
    if abs(x - y) < 1e-2:
        return
    q = exceptional_quadruple(x, y)
    for base in itertools.permutations(range(4), 2):
        d5 = np.zeros((5, 5))
        d5[:4, :4] = q.dist
        i, j = base
        t = abs(extra)
        row = np.abs(q.dist[i] - t)
        row[i] = t
        d5[4, :4] = d5[:4, 4] = row
        try:
            space = FiniteMetricSpace(d5)
        except InvalidMetric:
            continue
        if check_triangle_equality(space).holds:
            assert embed_line(space).max_error(space) <= 1e-9 * space.diameter


def _random_quadruple(rng):
    kind = rng.integers(3)
    if kind == 0:
        return line_metric(rng.permutation(rng.uniform(-5, 5, size=4)))
    if kind == 1:
        x, y = rng.uniform(0.1, 5, size=2)
        d = exceptional_quadruple(x, y).dist
        p = rng.permutation(4)
        return d[np.ix_(p, p)]
    # integer line points: exact arithmetic, frequent ties
    return line_metric(rng.choice(np.arange(8.0), size=4, replace=False))


def test_classify_quadruple_agrees_with_brute_force():
    rng = np.random.default_rng(7)
    for _ in range(300):
        d = _random_quadruple(rng)
        q = classify_quadruple(d)
        assert q.exceptional == (not brute_force_embeddable(d))
