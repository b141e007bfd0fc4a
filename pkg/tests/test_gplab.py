import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from helixproj import CorrelationMatrix, quadruple_gram
from helixproj.classify import quadruple_eigenvalues, recover_signs
from helixproj.errors import (DegenerateConditioning, DomainError, InsufficientSamples,
                              InvalidInput, SignInconsistency)
from helixproj.gplab import (ProcessSpec, SamplePaths, check_conditioning_identity,
                             check_time_change, condition_residual, conditioning_multipliers,
                             empirical_covariance, kernel_eval, kernel_matrix, residual_covariance,
                             sample, sample_residual, standardized_kernel,
                             time_change_discrepancy)

from oracles import boundary_y, mp_sech, projected_inner, quadruple_gram_direct

# mpmath, 40 digits
SECH_1 = 0.6480542736638853995749
COND_HELIX_12 = 0.4758000033185740  # tanh(1) tanh(2) sech(1)

HELIX, TAYLOR, LAPLACE = ProcessSpec.helix(), ProcessSpec.taylor(), ProcessSpec.laplace()


def test_kernel_eval_examples():
    assert kernel_eval(HELIX, 0.3, 0.3) == 1.0
    assert kernel_eval(TAYLOR, 0.5, 0.5) == pytest.approx(4 / 3, abs=1e-15)
    assert kernel_eval(LAPLACE, 1, 1) == 0.5
    assert kernel_eval(HELIX, 0, 1) == pytest.approx(SECH_1, rel=1e-15)


def test_kernel_eval_quadruple_labels():
    q = ProcessSpec.quadruple(3, 1.5)
    assert kernel_eval(q, "A", "B") == pytest.approx(float(mp_sech(3)), abs=1e-16)
    assert kernel_eval(q, "A", "D") == pytest.approx(float(mp_sech(1.5)), abs=1e-16)
    assert kernel_eval(q, "A", "C") == pytest.approx(float(mp_sech(1.5)), abs=1e-16)
    with pytest.raises(DomainError):
        kernel_eval(q, "A", "E")


@pytest.mark.parametrize("spec,t", [(TAYLOR, 1.0), (TAYLOR, -1.5), (LAPLACE, 0.0),
                                    (LAPLACE, -1.0), (HELIX, math.inf)])
def test_kernel_domain_errors(spec, t):
    with pytest.raises(DomainError):
        kernel_eval(spec, t, t)


def test_unknown_kind_rejected():
    with pytest.raises(InvalidInput):
        ProcessSpec("brownian")


def test_quadruple_spec_not_admissible():
    with pytest.raises(InvalidInput):
        ProcessSpec.quadruple(2, 1)


def test_standardized_kernel_examples():
    for spec, t in [(HELIX, 0.4), (TAYLOR, 0.9), (LAPLACE, 7.0)]:
        assert standardized_kernel(spec, t, t) == pytest.approx(1.0, abs=1e-15)
    s, t = 0.3, -1.1
    target = float(mp_sech(s - t))
    assert standardized_kernel(TAYLOR, math.tanh(s), math.tanh(t)) == pytest.approx(target, abs=1e-13)
    assert standardized_kernel(LAPLACE, math.exp(2 * s), math.exp(2 * t)) == pytest.approx(target, abs=1e-13)


def test_check_time_change_examples():
    assert check_time_change([0.0])
    # {0, 1}: 1 / ((1 - tanh 1 tanh 0) cosh 1 cosh 0) = sech 1
    assert time_change_discrepancy([0.0, 1.0]) <= 1e-15
    assert check_time_change([0.0, 1.0], 1e-12)
    assert check_time_change([-2.0, 0.5, 3.0], 1e-12)


@given(st.lists(st.floats(-4, 4), min_size=1, max_size=6))
def test_time_change_property(times):
    assert time_change_discrepancy(times) <= 1e-12


def _valid_times(kind):
    if kind == "taylor":
        return st.floats(-0.95, 0.95)
    if kind == "laplace":
        return st.floats(0.05, 20)
    return st.floats(-8, 8)


@pytest.mark.parametrize("kind", ["helix", "taylor", "laplace"])
@given(data=st.data())
def test_kernel_matrix_psd(kind, data):
    times = data.draw(st.lists(_valid_times(kind), min_size=1, max_size=12))
    k = kernel_matrix(ProcessSpec(kind), times)
    eig = np.linalg.eigvalsh(k)
    assert eig.min() >= -1e-9 * len(times) * np.abs(eig).max()


def test_condition_residual_helix_example():
    r = condition_residual(HELIX, [1.0, 2.0], 0.0)
    assert r.labels == (1.0, 2.0)
    assert np.allclose(np.diag(r.entries), 1.0, atol=1e-15)
    # (sech 1 - sech 1 sech 2) / (tanh 1 tanh 2), which reduces to sech 1
    assert r.entries[0, 1] == pytest.approx(SECH_1, abs=1e-12)
    assert round(r.entries[0, 1], 4) == 0.6481


def test_condition_residual_orthogonal_spec():
    spec = ProcessSpec.explicit(CorrelationMatrix(np.eye(3), list("abc")))
    r = condition_residual(spec, ["a", "b"], "c")
    assert np.array_equal(r.entries, np.eye(2))


def test_condition_residual_degenerate():
    spec = ProcessSpec.explicit(CorrelationMatrix([[1, 1], [1, 1]], ["a", "b"]))
    with pytest.raises(DegenerateConditioning):
        condition_residual(spec, ["a"], "b")
    with pytest.raises(InvalidInput):
        condition_residual(HELIX, [0.0, 1.0], 0.0)


def test_conditioning_identity_helix_example():
    check = check_conditioning_identity(HELIX, 0.0, [1.0, 2.0], tol=1e-12)
    assert check.passed
    res = residual_covariance(HELIX, [1.0, 2.0], 0.0)
    assert res[0, 1] == pytest.approx(COND_HELIX_12, abs=1e-12)
    phi = check.multipliers
    assert phi[1.0] * phi[2.0] * SECH_1 == pytest.approx(COND_HELIX_12, abs=1e-12)


def test_multiplier_vanishes_at_s0():
    phi = conditioning_multipliers(HELIX, [1e-9, 0.5], 0.0)
    assert abs(phi[1e-9]) < 1e-8
    assert phi[0.5] == pytest.approx(math.tanh(0.5), abs=1e-16)


def test_multi_point_conditioning_product():
    times, s = [-1.0, 0.5, 2.0, 3.3], [0.0, 1.2]
    check = check_conditioning_identity(HELIX, s, times, tol=1e-12)
    assert check.passed
    for t in times:
        assert check.multipliers[t] == pytest.approx(math.tanh(t) * math.tanh(t - 1.2), abs=1e-15)


@given(st.lists(st.floats(-3, 3), min_size=2, max_size=6, unique=True),
       st.floats(-3, 3), st.floats(-3, 3))
def test_iterated_conditioning_order_independent(times, s1, s2):
    pts = sorted(times + [s1, s2])
    if min(np.diff(pts)) < 0.05:
        return
    a = residual_covariance(HELIX, times, [s1, s2])
    b = residual_covariance(HELIX, times, [s2, s1])
    assert np.max(np.abs(a - b)) <= 1e-12
    assert check_conditioning_identity(HELIX, [s1, s2], times, 1e-12).passed


@pytest.mark.parametrize("x,y", [(3, 1.5), (4, 1), (2.5, 1.0), (1.0, 3.0)])
def test_conditioning_quadruple_projective_identity(x, y):
    # absolute values: the projected configuration is isometric to the original
    spec = ProcessSpec.quadruple(x, y)
    for s0 in "ABCD":
        times = [u for u in "ABCD" if u != s0]
        check = check_conditioning_identity(spec, s0, times, tol=1e-12)
        assert check.projective_discrepancy <= 1e-12
        for t in times:
            expected = math.sqrt(1 - kernel_eval(spec, t, s0) ** 2)
            assert abs(check.multipliers[t]) == pytest.approx(expected, abs=1e-14)


@pytest.mark.parametrize("x,y", [(3, 1.5), (4, 1), (2.5, 1.0), (1.0, 3.0)])
def test_conditioning_quadruple_signed_identity_fails(x, y):
    # the residual triangle has the opposite sign product to the kernel
    # triangle, so no choice of signed multipliers can match it
    g = quadruple_gram_direct(x, y)
    spec = ProcessSpec.quadruple(x, y)
    for k, s0 in enumerate("ABCD"):
        o = [i for i in range(4) if i != k]
        residual = np.prod([projected_inner(g, k, i, j) for i, j in itertools.combinations(o, 2)])
        kernel = np.prod([g[i, j] for i, j in itertools.combinations(o, 2)])
        assert residual * kernel < 0
        times = ["ABCD"[i] for i in o]
        check = check_conditioning_identity(spec, s0, times, tol=1e-12)
        assert not check.passed
        with pytest.raises(SignInconsistency):
            recover_signs(condition_residual(spec, times, s0))


def test_sample_empty():
    paths = sample(HELIX, [0.0, 1.0], 0, seed=3)
    assert paths.samples.shape == (0, 2)


def test_sample_single_time_variance():
    n = 20000
    x = sample(HELIX, [0.7], n, seed=1).samples[:, 0]
    assert abs(x.var(ddof=1) - 1) <= 4 / math.sqrt(n)


def test_sample_helix_pair_correlation():
    cov, se = empirical_covariance(sample(HELIX, [0.0, 1.0], 100_000, seed=0))
    assert abs(cov[0, 1] - SECH_1) <= 4 * se[0, 1]


def test_sample_deterministic_per_seed():
    a = sample(HELIX, [0.0, 0.4, 1.5], 5000, seed=11).samples
    b = sample(HELIX, [0.0, 0.4, 1.5], 5000, seed=11).samples
    c = sample(HELIX, [0.0, 0.4, 1.5], 5000, seed=12).samples
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_sample_prefix_stable():
    # the first rows do not depend on how many samples were requested
    a = sample(HELIX, [0.0, 1.0], 5000, seed=2).samples
    b = sample(HELIX, [0.0, 1.0], 9000, seed=2).samples
    assert np.array_equal(a, b[:5000])


def test_sample_boundary_quadruple():
    # rank-deficient kernel: x, y on the boundary of the admissible region
    y = boundary_y(3.0)
    lam = quadruple_eigenvalues(3.0, y)
    assert min(lam) < 1e-9
    paths = sample(ProcessSpec.quadruple(3.0, y), list("ABCD"), 50_000, seed=5)
    cov, se = empirical_covariance(paths)
    assert np.all(np.abs(cov - quadruple_gram(3.0, y).entries) <= 4 * se + 1e-15)


def test_empirical_covariance_edges():
    zero = SamplePaths((0, 1), np.zeros((10, 2)), 0)
    cov, se = empirical_covariance(zero)
    assert np.array_equal(cov, np.zeros((2, 2)))
    with pytest.raises(InsufficientSamples):
        empirical_covariance(SamplePaths((0,), np.zeros((1, 1)), 0))


def test_empirical_covariance_identity():
    spec = ProcessSpec.explicit(CorrelationMatrix(np.eye(3), list("abc")))
    cov, se = empirical_covariance(sample(spec, list("abc"), 50_000, seed=4))
    assert np.all(np.abs(cov - np.eye(3)) <= 4 * se)


def test_empirical_covariance_quadruple():
    spec = ProcessSpec.quadruple(3, 1.5)
    cov, se = empirical_covariance(sample(spec, list("ABCD"), 100_000, seed=0))
    assert np.all(np.abs(cov - quadruple_gram(3, 1.5).entries) <= 4 * se)


def test_sample_residual_matches_identity():
    times = [1.0, 2.0, -0.5]
    paths = sample_residual(HELIX, times, 0.0, 100_000, seed=7)
    cov, se = empirical_covariance(paths)
    assert np.all(np.abs(cov - residual_covariance(HELIX, times, 0.0)) <= 4 * se + 1e-15)
