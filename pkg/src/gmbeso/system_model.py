"""Discrete-time SISO plants and the structural tests an ESO design relies on.

A plant is::

    x(k+1) = A0 x(k) + B0 u(k) + E0 f(k)
    y(k)   = C0 x(k)

``E0`` is normally a single column (the total-disturbance channel). The
zero-dynamics tools accept several columns (``D0``, one per physical
disturbance), so the model type allows ``E0`` to be ``n x q``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.stats

__all__ = [
    "RANK_RTOL", "MARKOV_RTOL", "N_RANDOM_PROBES",
    "ModelError", "AssumptionError",
    "StateSpaceModel", "AugmentedModel", "StructuralReport",
    "build_model", "observability_matrix", "matrix_rank", "is_observable",
    "markov_parameters", "has_no_invariant_zeros", "rosenbrock_matrix",
    "rosenbrock_probes", "rosenbrock_rank_test", "invariant_zero_candidates",
    "relative_degree", "char_coeffs", "augment", "structural_report",
]

# singular values below RANK_RTOL * sigma_max count as zero
RANK_RTOL = 1e-9
# |C A^i E| <= MARKOV_RTOL * |C| |A|^i |E| counts as zero
MARKOV_RTOL = 1e-9
N_RANDOM_PROBES = 64


class ModelError(ValueError):
    """Malformed plant data (shape, finiteness, sample time)."""


class AssumptionError(ValueError):
    """A structural assumption required by a design does not hold.

    ``assumption`` is 1 (observability of ``(A0, C0)``) or 2 (no invariant
    zeros between the disturbance and the output).
    """

    def __init__(self, assumption: int, message: str):
        super().__init__(message)
        self.assumption = assumption


def _as_matrix(name, value, shape=None):
    arr = np.array(value, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim != 2:
        raise ModelError(f"{name} must be a matrix, got an array with ndim={arr.ndim}")
    if shape is not None and arr.shape != shape:
        raise ModelError(f"{name} has shape {arr.shape}, expected {shape}")
    if not np.all(np.isfinite(arr)):
        raise ModelError(f"{name} contains non-finite entries")
    return arr


def _column(name, value, n):
    arr = np.array(value, dtype=float)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2 or arr.shape[0] != n:
        raise ModelError(f"{name} has shape {np.shape(value)}, expected {n} rows")
    return _as_matrix(name, arr)


@dataclass(frozen=True)
class StateSpaceModel:
    """Validated discrete-time plant. Use :func:`build_model` to construct."""

    A0: np.ndarray
    B0: np.ndarray
    E0: np.ndarray
    C0: np.ndarray
    sample_time: float

    @property
    def n(self) -> int:
        return self.A0.shape[0]

    @property
    def q(self) -> int:
        """Number of disturbance channels (columns of ``E0``)."""
        return self.E0.shape[1]

    def with_disturbance_map(self, E0) -> "StateSpaceModel":
        return build_model(self.A0, self.B0, E0, self.C0, self.sample_time)


@dataclass(frozen=True)
class AugmentedModel:
    """Plant extended with the total disturbance as the last state.

    ``X = [x; f]`` evolves as ``X(k+1) = A X(k) + B u(k) + E (f(k+1) - f(k))``.
    """

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    E: np.ndarray
    n: int
    plant: StateSpaceModel = field(repr=False)


@dataclass(frozen=True)
class StructuralReport:
    observable: bool
    markov_params: np.ndarray
    no_invariant_zeros: bool
    relative_degree_u: int | None
    m_coeff: float
    char_coeffs: np.ndarray | None

    @property
    def relative_degree_label(self) -> str:
        return "undefined" if self.relative_degree_u is None else str(self.relative_degree_u)

    def to_dict(self) -> dict:
        return {
            "observable": self.observable,
            "markov_params": [float(v) for v in self.markov_params],
            "no_invariant_zeros": self.no_invariant_zeros,
            "relative_degree_u": self.relative_degree_label,
            "m_coeff": float(self.m_coeff),
            "char_coeffs": None if self.char_coeffs is None
            else [float(v) for v in self.char_coeffs],
        }


def build_model(A0, B0, E0, C0, sample_time=1.0) -> StateSpaceModel:
    """Validate plant matrices and return a :class:`StateSpaceModel`.

    ``B0`` and ``E0`` may be given as flat vectors, ``C0`` as a flat row.
    ``E0`` may have several columns.
    """
    A0 = _as_matrix("A0", A0)
    n = A0.shape[0]
    if n < 1 or A0.shape != (n, n):
        raise ModelError(f"A0 must be square and non-empty, got shape {A0.shape}")
    B0 = _column("B0", B0, n)
    if B0.shape[1] != 1:
        raise ModelError(f"B0 must be a single column, got shape {B0.shape}")
    E0 = _column("E0", E0, n)
    C0 = _as_matrix("C0", np.atleast_2d(np.asarray(C0, dtype=float)), (1, n))
    try:
        ts = float(sample_time)
    except (TypeError, ValueError):
        raise ModelError(f"sample_time must be a number, got {sample_time!r}") from None
    if not np.isfinite(ts) or ts <= 0:
        raise ModelError(f"sample_time must be positive and finite, got {sample_time!r}")
    for arr in (A0, B0, E0, C0):
        arr.setflags(write=False)
    return StateSpaceModel(A0, B0, E0, C0, ts)


def observability_matrix(A, C) -> np.ndarray:
    """Stack ``C, CA, ..., CA^{n-1}`` (one block row per power)."""
    A = np.asarray(A, dtype=float)
    C = np.atleast_2d(np.asarray(C, dtype=float))
    n = A.shape[0]
    rows = [C]
    for _ in range(n - 1):
        rows.append(rows[-1] @ A)
    return np.vstack(rows)


def matrix_rank(M, rtol=RANK_RTOL) -> int:
    s = np.linalg.svd(np.atleast_2d(M), compute_uv=False)
    if s.size == 0 or s[0] == 0:
        return 0
    return int(np.sum(s > rtol * s[0]))


def is_observable(model: StateSpaceModel) -> bool:
    return matrix_rank(observability_matrix(model.A0, model.C0)) == model.n


def _markov(A, X, C, count):
    out = np.empty(count)
    v = np.asarray(X, dtype=float).reshape(-1)
    C = np.asarray(C, dtype=float).reshape(-1)
    for i in range(count):
        out[i] = C @ v
        v = A @ v
    return out


def _markov_is_zero(values, A, X, C):
    scale_A = np.linalg.norm(A, 2)
    base = np.linalg.norm(C) * np.linalg.norm(X)
    thresholds = MARKOV_RTOL * base * scale_A ** np.arange(len(values))
    return np.abs(values) <= thresholds


def markov_parameters(model: StateSpaceModel, count: int) -> np.ndarray:
    """``C0 A0^i E0`` for ``i = 0..count-1`` (single disturbance column)."""
    if count < 1:
        raise ValueError("count must be at least 1")
    _require_single_channel(model)
    return _markov(model.A0, model.E0, model.C0, count)


def _require_single_channel(model):
    if model.q != 1:
        raise ModelError(f"operation needs a single disturbance column, E0 has {model.q}")


def has_no_invariant_zeros(model: StateSpaceModel) -> bool:
    """Markov-parameter test for the absence of invariant zeros from f to y.

    Valid for observable plants only: the first ``n-1`` parameters
    ``C0 A0^i E0`` must vanish and the ``n``-th must not.
    """
    _require_single_channel(model)
    if not is_observable(model):
        raise AssumptionError(1, "(A0, C0) is not observable")
    n = model.n
    p = markov_parameters(model, n)
    zero = _markov_is_zero(p, model.A0, model.E0, model.C0)
    return bool(np.all(zero[: n - 1]) and not zero[n - 1])


def rosenbrock_matrix(model: StateSpaceModel, z) -> np.ndarray:
    n = model.n
    top = np.hstack([model.A0 - z * np.eye(n), model.E0])
    bottom = np.hstack([model.C0, np.zeros((1, model.q))])
    return np.vstack([top, bottom]).astype(complex)


def invariant_zero_candidates(model: StateSpaceModel) -> np.ndarray:
    """Finite generalized eigenvalues of the Rosenbrock pencil.

    These are the only points where a regular pencil can lose rank. The
    pencil always has infinite eigenvalues, and roundoff scatters a
    ``k``-fold infinite eigenvalue onto a ring of radius about
    ``eps**(-1/k)``, which for ``n >= 5`` is no larger than genuine zeros
    can be. Genuine zeros do not depend on the state coordinates, so a
    candidate is kept only if it reappears (to ``1e-6`` relative) after a
    seeded random orthogonal change of coordinates; ring points do not.
    """
    def pencil_eigs(A0, E0, C0):
        n, q = A0.shape[0], E0.shape[1]
        M = np.vstack([np.hstack([A0, E0]), np.hstack([C0, np.zeros((1, q))])])
        N = np.zeros_like(M)
        N[:n, :n] = np.eye(n)
        with np.errstate(all="ignore"):
            w = scipy.linalg.eigvals(M, N)
        return w[np.isfinite(w)]

    w = pencil_eigs(model.A0, model.E0, model.C0)
    if w.size == 0:
        return w
    Q = scipy.stats.ortho_group.rvs(model.n, random_state=0) if model.n > 1 else np.eye(1)
    w2 = pencil_eigs(Q.T @ model.A0 @ Q, Q.T @ model.E0, model.C0 @ Q)
    if w2.size == 0:
        return w2
    gap = np.abs(w[:, None] - w2[None, :]).min(axis=1)
    return w[gap <= 1e-6 * np.maximum(1.0, np.abs(w))]


def rosenbrock_probes(model: StateSpaceModel, seed: int = 0,
                      count: int = N_RANDOM_PROBES) -> np.ndarray:
    """Default probe set: eigenvalues of A0, zero candidates, random annulus points."""
    rng = np.random.default_rng(seed)
    radius = rng.uniform(0.1, 2.0, count)
    angle = rng.uniform(0.0, 2 * np.pi, count)
    random_points = radius * np.exp(1j * angle)
    return np.concatenate([np.linalg.eigvals(model.A0),
                           invariant_zero_candidates(model),
                           random_points])


def rosenbrock_rank_test(model: StateSpaceModel, z_samples=None) -> bool:
    """True iff ``[[A0 - zI, E0], [C0, 0]]`` has full rank at every probe ``z``."""
    if z_samples is None:
        z_samples = rosenbrock_probes(model)
    full = model.n + model.q
    # Scaling the E0 columns and the C0 row leaves the rank unchanged but
    # keeps a large E0 from swamping the relative singular-value threshold.
    n = model.n
    scale = np.ones(full)
    scale[n:] = 1.0 / np.maximum(np.linalg.norm(model.E0, axis=0), np.finfo(float).tiny)
    c_scale = 1.0 / max(np.linalg.norm(model.C0), np.finfo(float).tiny)

    def balanced(z):
        R = rosenbrock_matrix(model, z) * scale
        R[n:] *= c_scale
        return R

    return all(matrix_rank(balanced(z)) == full for z in np.atleast_1d(z_samples))


def relative_degree(A, B, C) -> int | None:
    """Smallest ``r`` with ``C A^{r-1} B != 0``; ``None`` when undefined."""
    A = np.asarray(A, dtype=float)
    n = A.shape[0]
    p = _markov(A, B, C, n)
    zero = _markov_is_zero(p, A, B, C)
    nonzero = np.flatnonzero(~zero)
    return int(nonzero[0]) + 1 if nonzero.size else None


def char_coeffs(model: StateSpaceModel) -> np.ndarray:
    """Bottom row ``[a1..an] = C0 A0^n S0^{-1}`` of the observability canonical form."""
    S0 = observability_matrix(model.A0, model.C0)
    if matrix_rank(S0) < model.n:
        raise AssumptionError(1, "(A0, C0) is not observable")
    CAn = model.C0 @ np.linalg.matrix_power(model.A0, model.n)
    return np.linalg.solve(S0.T, CAn.T).ravel()


def augment(model: StateSpaceModel) -> AugmentedModel:
    _require_single_channel(model)
    n = model.n
    A = np.block([[model.A0, model.E0], [np.zeros((1, n)), np.ones((1, 1))]])
    B = np.vstack([model.B0, [[0.0]]])
    C = np.hstack([model.C0, [[0.0]]])
    E = np.zeros((n + 1, 1))
    E[-1, 0] = 1.0
    return AugmentedModel(A, B, C, E, n, model)


def structural_report(model: StateSpaceModel) -> StructuralReport:
    _require_single_channel(model)
    n = model.n
    observable = is_observable(model)
    markov = markov_parameters(model, n)
    return StructuralReport(
        observable=observable,
        markov_params=markov,
        no_invariant_zeros=has_no_invariant_zeros(model) if observable else False,
        relative_degree_u=relative_degree(model.A0, model.B0, model.C0),
        m_coeff=float(markov[n - 1]),
        char_coeffs=char_coeffs(model) if observable else None,
    )
