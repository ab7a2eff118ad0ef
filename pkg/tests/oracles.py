"""Independent reference computations used to check the library."""
from fractions import Fraction

import mpmath
import numpy as np


def elimination_rank(M, rtol=1e-9):
    """Rank by Gaussian elimination with complete pivoting."""
    M = np.array(M, dtype=complex)
    scale = np.abs(M).max() if M.size else 0.0
    if scale == 0:
        return 0
    rank = 0
    rows, cols = M.shape
    for _ in range(min(rows, cols)):
        sub = np.abs(M[rank:, rank:])
        i, j = np.unravel_index(np.argmax(sub), sub.shape)
        if sub[i, j] <= rtol * scale:
            break
        i += rank
        j += rank
        M[[rank, i]] = M[[i, rank]]
        M[:, [rank, j]] = M[:, [j, rank]]
        M[rank + 1:] -= np.outer(M[rank + 1:, rank] / M[rank, rank], M[rank])
        rank += 1
    return rank


def ackermann_gain(A, C, poles):
    """Single-output observer gain ``L = phi(A) Ob^{-1} e_last``."""
    A = np.asarray(A, float)
    N = A.shape[0]
    Ob = np.vstack([C @ np.linalg.matrix_power(A, i) for i in range(N)])
    phi = np.zeros_like(A)
    for c in np.real(np.poly(poles)):
        phi = phi @ A + c * np.eye(N)
    return phi @ np.linalg.solve(Ob, np.eye(N)[:, -1:])


def naive_simulation(A0, B0, E0, C0, u, f, x0):
    """Plain-Python replay of x+ = A0 x + B0 u + E0 f."""
    A0 = [list(map(float, r)) for r in np.asarray(A0)]
    b = [float(v) for v in np.asarray(B0).ravel()]
    e = [float(v) for v in np.asarray(E0).ravel()]
    c = [float(v) for v in np.asarray(C0).ravel()]
    x = [float(v) for v in x0]
    n = len(x)
    ys = []
    for uk, fk in zip(u, f):
        ys.append(sum(c[i] * x[i] for i in range(n)))
        x = [sum(A0[i][j] * x[j] for j in range(n)) + b[i] * uk + e[i] * fk for i in range(n)]
    return np.array(ys)


def kernel_mp(n, lam, k, dps=60):
    """Kernel as the explicit falling-factorial sum, in extended precision."""
    with mpmath.workdps(dps):
        lam = mpmath.mpf(lam)
        if k <= n + 1:
            return mpmath.mpf(1)
        total = mpmath.mpf(0)
        for i in range(1, n + 2):
            prod = mpmath.mpf(1)
            for j in range(-i + 1, 0):
                prod *= k + j
            total += prod / mpmath.factorial(i - 1) * (1 - lam) ** (i - 1) * lam ** (k - i)
        return total


def kernel_fd_mp(n, lam, k, step="1e-25", dps=80):
    """Central finite difference of the extended-precision kernel."""
    with mpmath.workdps(dps):
        h = mpmath.mpf(step)
        lam = mpmath.mpf(lam)
        return (kernel_mp(n, lam + h, k, dps) - kernel_mp(n, lam - h, k, dps)) / (2 * h)


def kernel_exact(n, lam: Fraction, k):
    """Exact rational kernel value (hand-evaluation oracle)."""
    if k <= n + 1:
        return Fraction(1)
    total = Fraction(0)
    for i in range(1, n + 2):
        prod = 1
        for j in range(-i + 1, 0):
            prod *= k + j
        fact = 1
        for t in range(2, i):
            fact *= t
        total += Fraction(prod, fact) * (1 - lam) ** (i - 1) * lam ** (k - i)
    return total
