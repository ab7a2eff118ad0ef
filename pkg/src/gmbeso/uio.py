"""Delayed unknown input observer for the augmented plant.

The observer::

    Xhat(k+1) = J Xhat(k) + F Y[k:k+L] + G U[k:k+L-1]

uses ``L = n + 1`` future measurements. With ``F Psi = [E, 0, ..., 0]``,
``J = A - F Theta`` and ``G = [B, 0, ..., 0] - F Mu`` the estimation error
obeys ``e(k+1) = J e(k)`` whatever the disturbance does.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .system_model import (
    AssumptionError, AugmentedModel, RANK_RTOL, has_no_invariant_zeros,
    is_observable, matrix_rank, observability_matrix,
)

__all__ = ["StackedMaps", "UioDesign", "UioEstimate", "build_stacked_maps",
           "design_uio", "run_uio"]


@dataclass(frozen=True)
class StackedMaps:
    """``Y[k:k+L] = Theta X(k) + Mu U[k:k+L-1] + Psi dF[k:k+L-1]``."""

    Theta: np.ndarray
    Mu: np.ndarray
    Psi: np.ndarray
    L_delay: int


@dataclass(frozen=True)
class UioDesign:
    J: np.ndarray
    F: np.ndarray
    G: np.ndarray
    delay: int
    error_eigenvalue: float
    maps: StackedMaps = field(repr=False)
    augmented: AugmentedModel = field(repr=False)

    @property
    def decoupling_residual(self) -> float:
        target = np.hstack([self.augmented.E, np.zeros((self.J.shape[0], self.delay - 1))])
        return float(np.abs(self.F @ self.maps.Psi - target).max())

    def to_dict(self) -> dict:
        return {
            "kind": "uio",
            "J": self.J.tolist(),
            "F": self.F.tolist(),
            "G": self.G.tolist(),
            "delay": self.delay,
            "error_eigenvalue": float(self.error_eigenvalue),
        }


@dataclass(frozen=True)
class UioEstimate:
    """Raw UIO output.

    Row ``j`` of ``xhat`` estimates ``X(j)``; it needs measurements up to
    ``y(j + lag - 1)``, so it becomes available ``lag`` samples later than a
    one-step predictor's estimate of the same sample.
    """

    xhat: np.ndarray
    lag: int

    def aligned(self, horizon: int) -> np.ndarray:
        """Wall-clock series: row ``k`` holds the estimate usable at sample ``k``.

        That is ``Xhat(k - lag)``; rows before ``lag`` are NaN.
        """
        out = np.full((horizon, self.xhat.shape[1]), np.nan)
        count = min(horizon - self.lag, self.xhat.shape[0])
        if count > 0:
            out[self.lag: self.lag + count] = self.xhat[:count]
        return out

    def padded(self, horizon: int) -> np.ndarray:
        """Row ``k`` estimates ``X(k)``; rows past the available window are NaN."""
        out = np.full((horizon, self.xhat.shape[1]), np.nan)
        count = min(horizon, self.xhat.shape[0])
        out[:count] = self.xhat[:count]
        return out


def _markov_block(A, X, C, L):
    # (L+1) x L, entry (i, j) = C A^{i-j-1} X for i > j
    h = np.empty(L)
    v = X.ravel()
    c = C.ravel()
    for i in range(L):
        h[i] = c @ v
        v = A @ v
    col = np.concatenate([[0.0], h])
    return scipy.linalg.toeplitz(col, np.zeros(L))


def build_stacked_maps(augmented: AugmentedModel, L_delay: int) -> StackedMaps:
    if L_delay < 1:
        raise ValueError(f"delay must be at least 1, got {L_delay}")
    A, C = augmented.A, augmented.C
    Theta = [C]
    for _ in range(L_delay):
        Theta.append(Theta[-1] @ A)
    return StackedMaps(
        Theta=np.vstack(Theta),
        Mu=_markov_block(A, augmented.B, C, L_delay),
        Psi=_markov_block(A, augmented.E, C, L_delay),
        L_delay=L_delay,
    )


def design_uio(augmented: AugmentedModel, delay: int | None = None,
               error_eigenvalue: float = 0.0) -> UioDesign:
    """Decoupled UIO with every eigenvalue of ``J`` at ``error_eigenvalue``.

    ``F`` is a least-norm particular solution of the decoupling equation plus
    a left-nullspace correction chosen so that ``J = A - F Theta`` equals
    ``error_eigenvalue * I``.
    """
    n = augmented.n
    N = n + 1
    if delay is None:
        delay = N
    if delay != N:
        raise ValueError(f"delay must equal n + 1 = {N} for this plant, got {delay}")
    if not 0.0 <= error_eigenvalue < 1.0:
        raise ValueError(f"error eigenvalue must lie in [0, 1), got {error_eigenvalue}")
    plant = augmented.plant
    if not is_observable(plant):
        raise AssumptionError(1, "assumption 1 violated: (A0, C0) is not observable")
    if not has_no_invariant_zeros(plant):
        raise AssumptionError(
            2, "decoupling infeasible: invariant zeros between the disturbance and the output")

    maps = build_stacked_maps(augmented, delay)
    target = np.hstack([augmented.E, np.zeros((N, delay - 1))])
    Fp = target @ np.linalg.pinv(maps.Psi, rcond=RANK_RTOL)
    residual = np.abs(Fp @ maps.Psi - target).max()
    if residual > 1e-9 * max(1.0, np.abs(target).max()):
        raise AssumptionError(2, f"decoupling equation has no solution (residual {residual:.3g})")

    W = scipy.linalg.null_space(maps.Psi.T, rcond=RANK_RTOL).T
    Ap = augmented.A - Fp @ maps.Theta
    Cr = W @ maps.Theta
    if matrix_rank(observability_matrix(Ap, Cr)) < N or matrix_rank(Cr) < N:
        raise AssumptionError(2, "reduced pair for eigenvalue assignment is not observable")
    Jt = error_eigenvalue * np.eye(N)
    K = np.linalg.lstsq(Cr.T, (Ap - Jt).T, rcond=None)[0].T
    F = Fp + K @ W
    J = augmented.A - F @ maps.Theta
    G = np.hstack([augmented.B, np.zeros((N, delay - 1))]) - F @ maps.Mu
    return UioDesign(J=J, F=F, G=G, delay=delay, error_eigenvalue=float(error_eigenvalue),
                     maps=maps, augmented=augmented)


def run_uio(design: UioDesign, u_series, y_series, initial_xhat=None) -> UioEstimate:
    """Run the UIO over recorded data.

    With ``K`` samples the estimates ``Xhat(0..K-delay)`` are produced; the
    future window makes later samples unavailable.
    """
    u = np.asarray(u_series, dtype=float).ravel()
    y = np.asarray(y_series, dtype=float).ravel()
    if u.shape != y.shape:
        raise ValueError(f"u and y lengths differ: {u.size} != {y.size}")
    L = design.delay
    K = y.size
    if K < L + 1:
        raise ValueError(f"need at least {L + 1} samples for the delay window, got {K}")
    N = design.J.shape[0]
    xhat = np.zeros(N) if initial_xhat is None else np.asarray(initial_xhat, dtype=float).ravel()
    if xhat.shape != (N,):
        raise ValueError(f"initial estimate must have length {N}")
    Yw = np.lib.stride_tricks.sliding_window_view(y, L + 1)
    Uw = np.lib.stride_tricks.sliding_window_view(u, L)
    out = np.empty((K - L + 1, N))
    out[0] = xhat
    for k in range(K - L):
        xhat = design.J @ xhat + design.F @ Yw[k] + design.G @ Uw[k]
        out[k + 1] = xhat
    return UioEstimate(out, lag=L)
