"""Closed-form disturbance-estimation error of the GMB-ESO.

With all observer eigenvalues at ``lam`` and zero initial estimation error,
``f(k) - fhat(k) = sum_{j>=1} h(j) * df(k - j)`` where
``df(k) = f(k+1) - f(k)`` and ``h`` depends only on the plant order and
``lam``.
"""
from __future__ import annotations

import math

import numpy as np

__all__ = ["kernel_value", "kernel_values", "kernel_sensitivity", "predict_error",
           "error_bound", "error_bound_limit", "kernel_transfer_function", "kernel_table"]


def _check_lambda(lam):
    if not 0.0 <= lam < 1.0:
        raise ValueError(f"eigenvalue must lie in [0, 1), got {lam}")


def _scaled_binomial(count: int, k_choose: int, a: float, pa: int, b: float, pb: int) -> float:
    """``comb(count, k_choose) * a**pa * b**pb`` without overflowing the binomial."""
    c = math.comb(count, k_choose)
    try:
        return float(c) * a ** pa * b ** pb
    except OverflowError:
        if a == 0.0 and pa > 0 or b == 0.0 and pb > 0:
            return 0.0
        log = math.log(c) + (pa * math.log(a) if pa else 0.0) + (pb * math.log(b) if pb else 0.0)
        return math.exp(log)


def kernel_value(n: int, lam: float, k: int) -> float:
    """``h(k)``: response of ``f - fhat`` to a unit pulse in ``df`` at ``k - 1``.

    ``h(k) = 1`` for ``k <= n+1``; beyond that::

        h(k) = sum_{i=1}^{n+1} C(k-1, i-1) (1-lam)^{i-1} lam^{k-i}
    """
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    _check_lambda(lam)
    if k <= n + 1:
        return 1.0
    return math.fsum(_scaled_binomial(k - 1, i - 1, 1.0 - lam, i - 1, lam, k - i)
                     for i in range(1, n + 2))


def kernel_values(n: int, lam: float, k_max: int) -> np.ndarray:
    """``h(1..k_max)``."""
    return np.array([kernel_value(n, lam, k) for k in range(1, k_max + 1)])


def kernel_sensitivity(n: int, lam: float, k: int) -> float:
    """``dh(k)/dlam = (k-1) C(k-2, n) (1-lam)^n lam^{k-n-2}`` for ``k > n+1``, else 0."""
    if k < 1:
        raise ValueError(f"k must be at least 1, got {k}")
    _check_lambda(lam)
    if k <= n + 1:
        return 0.0
    # (1/n!) (k-n-1) (k-1)(k-2)...(k-n) == (k-1) * C(k-2, n)
    return (k - 1) * _scaled_binomial(k - 2, n, 1.0 - lam, n, lam, k - n - 2)


def predict_error(n: int, lam: float, f_series) -> np.ndarray:
    """``f(k) - fhat(k)`` for ``k = 0..K-1`` from the convolution with ``h``.

    Assumes the observer starts with zero estimation error.
    """
    f = np.asarray(f_series, dtype=float).ravel()
    K = f.size
    if K == 0:
        return f.copy()
    df = np.diff(f)
    h = kernel_values(n, lam, max(K - 1, 0))
    err = np.zeros(K)
    for k in range(1, K):
        # sum_{j=1}^{k} h(j) df(k-j)
        err[k] = h[:k] @ df[k - 1::-1][:k]
    return err


def error_bound(n: int, lam: float, delta_f_bound: float, horizon: int) -> float:
    """Worst-case ``|f - fhat|`` over the first ``horizon`` samples.

    Valid for any disturbance with ``|df| <= delta_f_bound`` and zero initial
    estimation error, since ``h`` is non-negative.
    """
    if delta_f_bound < 0:
        raise ValueError("delta_f_bound must be non-negative")
    _check_lambda(lam)
    return float(kernel_values(n, lam, horizon).sum() * delta_f_bound)


def error_bound_limit(n: int, lam: float, delta_f_bound: float) -> float:
    """Infinite-horizon value of :func:`error_bound`: ``(n+1) / (1-lam) * bound``.

    ``h(k)`` is the probability that fewer than ``n+1`` successes occur in
    ``k-1`` Bernoulli(1-lam) trials, so its sum is the mean waiting time.
    """
    _check_lambda(lam)
    return (n + 1) / (1.0 - lam) * delta_f_bound


def kernel_transfer_function(n: int, lam: float, z) -> complex:
    """``sum_{i=1}^{n+1} (1-lam)^{i-1} (z-lam)^{n+1-i} / (z-lam)^{n+1}``."""
    z = np.asarray(z, dtype=complex)
    total = sum((1.0 - lam) ** (i - 1) * (z - lam) ** (n + 1 - i) for i in range(1, n + 2))
    return total / (z - lam) ** (n + 1)


def kernel_table(n: int, lam: float, k_max: int) -> list[tuple[int, float, float]]:
    return [(k, kernel_value(n, lam, k), kernel_sensitivity(n, lam, k))
            for k in range(1, k_max + 1)]
