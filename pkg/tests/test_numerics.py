"""Linear algebra, matrix exponentials, RNG streams, and the normal/KS
special functions, checked against numpy/scipy oracles."""

import numpy as np
import pytest
import scipy.linalg
import scipy.special
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.testing import assert_allclose

from mmbinom.numerics import (
    DenseMatrix,
    RngStream,
    SingularMatrixError,
    kolmogorov_pvalue,
    matrix_exponential_action,
    normal_cdf,
    solve_linear,
)


# ----------------------------------------------------------- DenseMatrix --

def test_dense_matrix_round_trip():
    a = np.array([[1.0, 2.0], [3.0, 4.5]])
    m = DenseMatrix.from_array(a)
    assert m.shape == (2, 2)
    assert_allclose(m.array, a)
    with pytest.raises(ValueError):
        m.array[0, 0] = 9.0  # read-only view


def test_dense_matrix_rejects_non_finite():
    with pytest.raises(ValueError):
        DenseMatrix.from_array(np.array([[np.nan]]))
    with pytest.raises(ValueError):
        DenseMatrix.from_array(np.array([[np.inf, 0.0]]))


def test_dense_matrix_hashable():
    a = DenseMatrix.from_array(np.eye(2))
    b = DenseMatrix.from_array(np.eye(2))
    assert a == b and hash(a) == hash(b)


# ----------------------------------------------------------- solve_linear --

def test_solve_linear_matches_numpy():
    gen = np.random.default_rng(1)
    for d in (1, 2, 5, 9):
        A = gen.standard_normal((d, d)) + d * np.eye(d)
        b = gen.standard_normal(d)
        assert_allclose(solve_linear(A, b), np.linalg.solve(A, b), rtol=1e-12, atol=1e-12)


def test_solve_linear_rejects_singular():
    A = np.array([[1.0, 2.0], [2.0, 4.0]])
    with pytest.raises(SingularMatrixError):
        solve_linear(A, np.ones(2))


def test_solve_linear_shape_errors():
    with pytest.raises(ValueError):
        solve_linear(np.ones((2, 3)), np.ones(2))
    with pytest.raises(ValueError):
        solve_linear(np.eye(2), np.ones(3))


@settings(max_examples=40, deadline=None)
@given(st.integers(min_value=1, max_value=7), st.integers(min_value=0, max_value=2**32 - 1))
def test_solve_linear_residual_property(d, seed):
    gen = np.random.default_rng(seed)
    A = gen.standard_normal((d, d)) + (d + 1) * np.eye(d)
    b = gen.standard_normal(d)
    x = solve_linear(A, b)
    assert np.abs(A @ x - b).max() <= 1e-10 * (1.0 + np.abs(b).max())


# ---------------------------------------------- matrix_exponential_action --

def test_expm_action_generator_matches_scipy(ref_gen):
    Q = ref_gen.Q.array
    gen = np.random.default_rng(2)
    for t in (0.0, 0.3, 2.0, 9.0):
        v = gen.random(3)
        expected = scipy.linalg.expm(Q * t) @ v
        assert_allclose(matrix_exponential_action(Q, t, v), expected, rtol=1e-12, atol=1e-13)


def test_expm_action_preserves_total_mass(ref_gen):
    # exp(Qt) in column convention is a stochastic matrix acting on
    # distributions: mass 1 and nonnegativity survive.
    Q = ref_gen.Q.array
    v = np.array([1.0, 0.0, 0.0])
    for t in (0.1, 1.0, 50.0):
        w = matrix_exponential_action(Q, t, v)
        assert abs(w.sum() - 1.0) <= 1e-12
        assert w.min() >= -1e-14


def test_expm_action_fixes_stationary_law(ref_gen):
    from mmbinom import stationary_distribution

    pi = stationary_distribution(ref_gen)
    w = matrix_exponential_action(ref_gen.Q.array, 7.7, pi)
    assert_allclose(w, pi, rtol=0, atol=1e-13)


def test_expm_action_huge_rate_substeps(ref_gen):
    # eta*t ~ 1e9 forces many uniformization substeps; the result is the
    # stationary projection of the start vector.
    from mmbinom import stationary_distribution

    Q = ref_gen.Q.array * 1e8
    v = np.array([0.0, 0.0, 1.0])
    w = matrix_exponential_action(Q, 10.0, v)
    assert_allclose(w, stationary_distribution(ref_gen), rtol=0, atol=1e-10)


def test_expm_action_general_matrix_matches_scipy():
    gen = np.random.default_rng(3)
    A = gen.standard_normal((4, 4))
    v = gen.standard_normal(4)
    for t in (0.5, 3.0):
        assert_allclose(
            matrix_exponential_action(A, t, v),
            scipy.linalg.expm(A * t) @ v,
            rtol=1e-10, atol=1e-10,
        )


def test_expm_action_overflow_is_loud():
    with pytest.raises(OverflowError):
        matrix_exponential_action(np.array([[800.0]]), 1.0, np.array([1.0]))


# ----------------------------------------------------------------- normal --

def test_normal_cdf_reference_values():
    assert normal_cdf(0.0) == pytest.approx(0.5, abs=1e-15)
    assert normal_cdf(1.959963984540054) == pytest.approx(0.975, abs=1e-12)
    assert normal_cdf(-8.0) == pytest.approx(6.22096057427178e-16, rel=1e-9)


def test_normal_cdf_symmetry():
    for x in (0.1, 0.7, 2.2, 5.0):
        assert normal_cdf(x) + normal_cdf(-x) == pytest.approx(1.0, abs=1e-15)


# ------------------------------------------------------------- kolmogorov --

def test_kolmogorov_pvalue_matches_scipy():
    # scipy.special.kolmogorov is the same limiting survival function;
    # check both series branches and the switchover region.
    for x in (0.3, 0.5, 0.8, 1.0, 1.17, 1.18, 1.19, 1.36, 2.0, 3.0):
        mine = kolmogorov_pvalue(x, 1)  # n=1 => argument passed through
        assert mine == pytest.approx(float(scipy.special.kolmogorov(x)), rel=1e-10, abs=1e-300)


def test_kolmogorov_pvalue_scales_with_sample_size():
    # p(stat, n) = SF(sqrt(n) stat)
    assert kolmogorov_pvalue(0.04, 1156) == pytest.approx(
        float(scipy.special.kolmogorov(0.04 * 34.0)), rel=1e-10
    )
    # the classical 5%-level critical value
    assert kolmogorov_pvalue(1.36, 1) == pytest.approx(0.0495, abs=5e-4)


def test_kolmogorov_pvalue_edges():
    assert kolmogorov_pvalue(0.0, 100) == 1.0
    assert kolmogorov_pvalue(50.0, 100) == 0.0


# ------------------------------------------------------------- RngStream --

def test_rng_stream_reproducible():
    a = RngStream(12345, 7).generator.random(8)
    b = RngStream(12345, 7).generator.random(8)
    assert_allclose(a, b, rtol=0, atol=0)


def test_rng_streams_distinct():
    a = RngStream(12345, 0).generator.random(8)
    b = RngStream(12345, 1).generator.random(8)
    assert not np.allclose(a, b)


def test_rng_stream_validation():
    with pytest.raises(ValueError):
        RngStream(1, -1)
