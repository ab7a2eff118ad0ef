"""General model-based extended state observer (GMB-ESO).

The gain is obtained through an explicit chain of similarity transforms
``T = Q1 @ S2 @ S1`` that brings ``(A, C)`` of the augmented plant to an
observer companion form, where assigning all eigenvalues to ``lambda`` is a
matter of rewriting the first column.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import comb

import numpy as np
import scipy.linalg

from .system_model import (
    AssumptionError, AugmentedModel, StructuralReport, augment, matrix_rank,
    observability_matrix, structural_report,
)

__all__ = [
    "TransformChain", "EsoDesign", "EsoState", "build_transform_chain",
    "design_eso_gain", "design_eso", "eso_step", "run_eso",
    "continuous_bandwidth_to_eigenvalue", "repeated_root_coefficients",
]


@dataclass(frozen=True)
class TransformChain:
    """Similarity transforms from the augmented plant to companion form.

    ``S1 = blockdiag(S0, m)`` maps to the observability canonical form of the
    plant with the disturbance on the last state, ``S2`` is the
    observability matrix of ``(A1, C1)``, and ``Q1`` turns the resulting
    observability canonical form into the observer companion form ``A3``.
    ``Q2`` is filled in by :func:`design_eso_gain` since it depends on
    ``lambda``.
    """

    S0: np.ndarray
    S1: np.ndarray
    S2: np.ndarray
    Q1: np.ndarray
    m: float
    a: np.ndarray
    poly: np.ndarray  # monic char. poly of A: [1, c1, ..., c_{n+1}]
    Q2: np.ndarray | None = None

    @property
    def T(self) -> np.ndarray:
        return self.Q1 @ self.S2 @ self.S1

    @property
    def A3(self) -> np.ndarray:
        """Observer companion form with first column ``-c1..-c_{n+1}``."""
        return _observer_companion(self.poly[1:])


@dataclass(frozen=True)
class EsoDesign:
    gain_L: np.ndarray
    eigenvalue_lambda: float
    chain: TransformChain = field(repr=False)
    augmented: AugmentedModel = field(repr=False)
    condition_number: float = np.nan

    @property
    def n(self) -> int:
        return self.augmented.n

    @property
    def closed_loop(self) -> np.ndarray:
        """Error dynamics matrix ``A - L C``."""
        return self.augmented.A - self.gain_L @ self.augmented.C

    def to_dict(self) -> dict:
        return {
            "kind": "eso",
            "gain_L": [float(v) for v in self.gain_L.ravel()],
            "lambda": float(self.eigenvalue_lambda),
            "condition_number": float(self.condition_number),
            "m": float(self.chain.m),
            "n": self.n,
        }


@dataclass(frozen=True)
class EsoState:
    xhat: np.ndarray
    step_index: int = 0

    @property
    def f_hat(self) -> float:
        return float(self.xhat[-1])


def _observer_companion(col):
    col = np.asarray(col, dtype=float)
    N = col.size
    M = np.eye(N, k=1)
    M[:, 0] = -col
    return M


def repeated_root_coefficients(lam: float, degree: int) -> np.ndarray:
    """Coefficients ``[alpha_1..alpha_d]`` of ``(z - lam)^d``, leading 1 dropped."""
    return np.array([comb(degree, i) * (-lam) ** i for i in range(1, degree + 1)])


def continuous_bandwidth_to_eigenvalue(omega_c: float, sample_time: float) -> float:
    """Map a continuous observer bandwidth (rad/s) to the discrete eigenvalue."""
    if omega_c < 0:
        raise ValueError(f"bandwidth must be non-negative, got {omega_c}")
    if sample_time <= 0:
        raise ValueError(f"sample_time must be positive, got {sample_time}")
    return float(np.exp(-omega_c * sample_time))


def build_transform_chain(augmented: AugmentedModel,
                          report: StructuralReport | None = None) -> TransformChain:
    plant = augmented.plant
    n = augmented.n
    if report is None:
        report = structural_report(plant)
    if not report.observable:
        raise AssumptionError(1, "assumption 1 violated: (A0, C0) is not observable")
    if not report.no_invariant_zeros:
        raise AssumptionError(
            2, "assumption 2 violated: invariant zeros between the disturbance and the output "
               f"(Markov parameters {np.array2string(report.markov_params, precision=4)})")

    S0 = observability_matrix(plant.A0, plant.C0)
    m = report.m_coeff
    S1 = scipy.linalg.block_diag(S0, [[m]])
    A1 = np.linalg.solve(S1.T, (S1 @ augmented.A).T).T
    C1 = np.linalg.solve(S1.T, augmented.C.T).T
    S2 = observability_matrix(A1, C1)
    a = report.char_coeffs
    # char. poly of A is (z - 1) * (z^n - a_n z^{n-1} - ... - a_1)
    plant_poly = np.concatenate([[1.0], -a[::-1]])
    poly = np.polymul(plant_poly, [1.0, -1.0])
    Q1 = scipy.linalg.toeplitz(poly[: n + 1], np.eye(1, n + 1)[0])
    return TransformChain(S0=S0, S1=S1, S2=S2, Q1=Q1, m=m, a=a, poly=poly)


def _q2(lam, N):
    # lower-triangular Toeplitz of the leading coefficients of (z - lam)^N
    alpha = np.concatenate([[1.0], repeated_root_coefficients(lam, N)[: N - 1]])
    return scipy.linalg.toeplitz(alpha, np.eye(1, N)[0])


def design_eso_gain(augmented: AugmentedModel, chain: TransformChain, lam: float) -> EsoDesign:
    """Place every eigenvalue of ``A - L C`` at ``lam``."""
    if not 0.0 <= lam < 1.0:
        raise ValueError(f"eigenvalue must lie in [0, 1), got {lam}")
    N = augmented.n + 1
    alpha = repeated_root_coefficients(lam, N)
    L3 = alpha - chain.poly[1:]
    T = chain.T
    L = np.linalg.solve(T, L3.reshape(-1, 1))
    # The last row of T^{-1} is 1/m times all ones, so the disturbance gain is
    # ((1 - lam)^N - poly(1)) / m with poly(1) = 0. Summing L3 numerically
    # cancels O(1) coefficients down to (1 - lam)^N and loses most digits
    # when lam is close to 1; the closed form keeps them.
    L[-1, 0] = (1.0 - lam) ** N / chain.m
    chain = TransformChain(**{**chain.__dict__, "Q2": _q2(lam, N)})
    return EsoDesign(gain_L=L, eigenvalue_lambda=float(lam), chain=chain,
                     augmented=augmented, condition_number=float(np.linalg.cond(T)))


def design_eso(model, lam: float) -> EsoDesign:
    """Convenience wrapper: augment, check assumptions, build chain, place eigenvalues."""
    augmented = model if isinstance(model, AugmentedModel) else augment(model)
    chain = build_transform_chain(augmented)
    return design_eso_gain(augmented, chain, lam)


def eso_step(design: EsoDesign, state: EsoState, u: float, y: float) -> EsoState:
    aug = design.augmented
    x = state.xhat.reshape(-1, 1)
    innovation = y - (aug.C @ x).item()
    nxt = aug.A @ x + aug.B * u + design.gain_L * innovation
    return EsoState(nxt.ravel(), state.step_index + 1)


def run_eso(design: EsoDesign, u_series, y_series, initial_xhat=None) -> np.ndarray:
    """Iterate the observer; row ``k`` of the result is ``Xhat(k)``.

    ``Xhat(k)`` uses measurements up to ``y(k-1)``. The returned array has
    the same length as the input series; the last update is discarded.
    """
    u = np.asarray(u_series, dtype=float).ravel()
    y = np.asarray(y_series, dtype=float).ravel()
    if u.shape != y.shape:
        raise ValueError(f"u and y lengths differ: {u.size} != {y.size}")
    N = design.n + 1
    xhat = np.zeros(N) if initial_xhat is None else np.asarray(initial_xhat, dtype=float).ravel()
    if xhat.shape != (N,):
        raise ValueError(f"initial estimate must have length {N}")
    Acl = design.closed_loop
    B = design.augmented.B.ravel()
    L = design.gain_L.ravel()
    out = np.empty((u.size, N))
    for k in range(u.size):
        out[k] = xhat
        xhat = Acl @ xhat + B * u[k] + L * y[k]
    return out


def closed_loop_is_assigned(design: EsoDesign, tol: float = 1e-6) -> bool:
    """Check the characteristic polynomial of ``A - L C`` against ``(z - lam)^{n+1}``.

    Eigenvalues of a defective cluster are only recoverable to about
    ``eps**(1/(n+1))``, so the check works on polynomial coefficients.
    """
    Acl = design.closed_loop
    N = Acl.shape[0]
    target = repeated_root_coefficients(design.eigenvalue_lambda, N)
    coeffs = np.poly(Acl)[1:].real
    scale = np.maximum(1.0, np.abs(target))
    return bool(np.all(np.abs(coeffs - target) <= tol * scale)) and \
        matrix_rank(observability_matrix(design.augmented.A, design.augmented.C)) == N
