from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from gmbeso import design_eso, kernel_sensitivity, kernel_value, kernel_values, predict_error
from gmbeso import run_eso, simulate_plant
from gmbeso.error_kernel import (
    error_bound, error_bound_limit, kernel_table, kernel_transfer_function,
)

from .oracles import kernel_exact, kernel_fd_mp, kernel_mp


def test_spot_values():
    assert kernel_value(1, 0.5, 3) == 0.75
    assert kernel_value(1, 0.5, 4) == 0.5
    for n in range(1, 6):
        assert all(kernel_value(n, 0.3, k) == 1.0 for k in range(1, n + 2))
    np.testing.assert_array_equal(kernel_values(2, 0.0, 6), [1, 1, 1, 0, 0, 0])


@pytest.mark.parametrize("n, lam, k", [(1, Fraction(1, 2), 5), (2, Fraction(3, 10), 7),
                                       (3, Fraction(9, 10), 20), (5, Fraction(1, 10), 9)])
def test_matches_exact_rational_value(n, lam, k):
    assert kernel_value(n, float(lam), k) == pytest.approx(float(kernel_exact(n, lam, k)), rel=1e-13)


@pytest.mark.parametrize("n", [1, 3, 6])
def test_large_k_stays_finite(n):
    for k in (10, 1000, 100_000):
        v = kernel_value(n, 0.99, k)
        assert np.isfinite(v) and 0.0 <= v <= 1.0
    assert kernel_value(n, 0.99, 2000) == pytest.approx(float(kernel_mp(n, 0.99, 2000)), rel=1e-10)


def test_kernel_is_a_binomial_tail():
    from scipy.stats import binom
    for n, lam, k in [(1, 0.5, 3), (4, 0.7, 30), (2, 0.95, 200)]:
        assert kernel_value(n, lam, k) == pytest.approx(binom.cdf(n, k - 1, 1 - lam), rel=1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 6), st.floats(0.01, 0.98), st.integers(1, 150))
def test_kernel_is_decreasing_in_k_and_increasing_in_lambda(n, lam, k):
    assert kernel_value(n, lam, k + 1) <= kernel_value(n, lam, k)
    assert kernel_value(n, min(lam + 0.01, 0.99), k) >= kernel_value(n, lam, k)


def test_sensitivity_matches_finite_differences():
    for n, lam, k in [(3, 0.3, 9), (1, 0.5, 3), (5, 0.9, 40)]:
        assert kernel_sensitivity(n, lam, k) == pytest.approx(float(kernel_fd_mp(n, lam, k)), rel=1e-9)
    assert kernel_sensitivity(3, 0.3, 4) == 0.0
    assert kernel_sensitivity(1, 0.5, 3) == 1.0


def test_sensitivity_is_zero_inside_the_window_and_rejects_bad_k():
    assert kernel_sensitivity(2, 0.0, 3) == 0.0
    with pytest.raises(ValueError):
        kernel_sensitivity(2, 0.5, 0)
    with pytest.raises(ValueError):
        kernel_value(2, 1.0, 5)


def test_impulse_response_of_the_error_loop(sea20):
    for lam in (0.0, 0.2, 0.6):
        d = design_eso(sea20, lam)
        e = d.augmented.E.ravel().copy()
        h = []
        for _ in range(60):
            h.append(e[-1])
            e = d.closed_loop @ e
        np.testing.assert_allclose(h, kernel_values(4, lam, 60), atol=1e-8)


def test_transfer_function_equals_partial_sums():
    for n, lam in [(1, 0.5), (3, 0.7), (2, 0.0)]:
        h = kernel_values(n, lam, 3000)
        k = np.arange(1, h.size + 1)
        for z in (1.5, 2.0 + 1.0j, -1.3, 1.1j + 0.9):
            partial = np.sum(h * z ** (-k.astype(float)))
            # the truncated tail is bounded by a geometric series
            tail = kernel_value(n, lam, h.size) * abs(z) ** (-h.size) / (1 - 1 / abs(z))
            assert abs(kernel_transfer_function(n, lam, z) - partial) <= 1e-10 + tail


def test_error_sum_and_bound():
    for n, lam in [(1, 0.5), (4, 0.8), (2, 0.0)]:
        total = kernel_values(n, lam, 5000).sum()
        assert total == pytest.approx((n + 1) / (1 - lam), rel=1e-9)
        assert error_bound_limit(n, lam, 2.0) == pytest.approx(2 * total, rel=1e-9)
    with pytest.raises(ValueError):
        error_bound(1, 0.5, -1.0, 10)


def test_error_bound_holds_for_random_disturbances():
    rng = np.random.default_rng(0)
    n, lam, K = 3, 0.6, 60
    bound = error_bound(n, lam, 0.5, K)
    worst = 0.0
    for _ in range(2000):
        df = rng.uniform(-0.5, 0.5, K - 1)
        f = np.concatenate([[0.0], np.cumsum(df)])
        worst = max(worst, np.abs(predict_error(n, lam, f)).max())
    assert worst <= bound
    # an aligned staircase meets the bound
    f = 0.5 * np.arange(K)
    assert np.abs(predict_error(n, lam, f)).max() == pytest.approx(error_bound(n, lam, 0.5, K - 1))


def test_predicted_error_matches_the_observer(sea20):
    rng = np.random.default_rng(3)
    K = 120
    f = np.cumsum(rng.normal(size=K)) * 0.1
    f[0] = 0.0
    u = rng.normal(size=K)
    _, y = simulate_plant(sea20, u, f)
    for lam in (0.0, 0.5, 0.8):
        X = run_eso(design_eso(sea20, lam), u, y)
        np.testing.assert_allclose(f - X[:, -1], predict_error(4, lam, f), atol=1e-8)


def test_deadbeat_step_plateau():
    n, K, k0 = 2, 20, 5
    f = np.where(np.arange(K) >= k0, 1.0, 0.0)
    err = predict_error(n, 0.0, f)
    np.testing.assert_array_equal(err[k0:k0 + n + 1], 1.0)
    np.testing.assert_array_equal(err[:k0], 0.0)
    np.testing.assert_array_equal(err[k0 + n + 1:], 0.0)


def test_kernel_table_rows():
    rows = kernel_table(1, 0.5, 4)
    assert rows[2] == (3, 0.75, 1.0)
    assert [r[0] for r in rows] == [1, 2, 3, 4]
