"""Zero dynamics and the two total-disturbance definitions.

For a plant ``x+ = A0 x + B0 u + D0 d, y = C0 x`` with relative degree ``r``:

* the normal form splits the state into the output chain ``zeta`` (length
  ``r``) and the zero dynamics ``eta`` (length ``n - r``). A conventional ESO
  on the chain has to estimate ``f_a = Fhat eta + f1``, which carries the
  zero dynamics along;
* the observability canonical form instead lumps only ``d`` into
  ``f_b``; the zero dynamics stay inside the model, and an ESO on the
  original ``(A0, B0, C0)`` with disturbance column ``T2^{-1} e_n`` estimates
  ``f_b``.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .eso import EsoDesign, design_eso
from .system_model import (
    AssumptionError, ModelError, StateSpaceModel, build_model, is_observable,
    matrix_rank, observability_matrix, relative_degree,
)

__all__ = [
    "NormalForm", "CanonicalWithFb", "build_normal_form", "build_canonical_fb",
    "total_disturbance_fa", "total_disturbance_fb", "design_zd_eso",
    "stack_future", "feedthrough_block", "chain_model", "simulate_normal_form",
    "simulate_canonical",
]


def _d_matrix(d_series, q):
    d = np.asarray(d_series, dtype=float)
    if d.ndim == 1:
        d = d.reshape(-1, 1)
    if d.shape[1] != q:
        raise ValueError(f"disturbance series has {d.shape[1]} channels, plant has {q}")
    return d


def stack_future(d_series, k: int, depth: int) -> np.ndarray:
    """``[d(k); d(k+1); ...; d(k+depth-1)]`` as one flat vector."""
    d = np.asarray(d_series, dtype=float)
    if d.ndim == 1:
        d = d.reshape(-1, 1)
    if k + depth > d.shape[0]:
        raise ValueError(f"need d up to index {k + depth - 1}, series has {d.shape[0]} samples")
    return d[k:k + depth].reshape(-1)


def feedthrough_block(A0, C0, D0, rows: int) -> np.ndarray:
    """Block lower-triangular Toeplitz map from stacked future ``d`` to the output chain.

    Shape ``rows x (rows-1) q``; row ``i`` holds ``C0 A0^{i-1-j} D0`` in block
    column ``j < i`` and the first row is zero.
    """
    D0 = np.atleast_2d(D0)
    q = D0.shape[1]
    width = max(rows - 1, 0)
    out = np.zeros((rows, width * q))
    blocks = []
    v = D0
    for _ in range(width):
        blocks.append((C0 @ v).ravel())
        v = A0 @ v
    for i in range(1, rows):
        for j in range(i):
            out[i, j * q:(j + 1) * q] = blocks[i - 1 - j]
    return out


@dataclass(frozen=True)
class NormalForm:
    T1: np.ndarray
    Phi: np.ndarray
    r: int
    m_dim: int
    Ahat: np.ndarray
    Bhat: np.ndarray
    Ehat: np.ndarray
    Chat: np.ndarray
    Fhat: np.ndarray
    Shat: np.ndarray
    Ghat: np.ndarray
    M: np.ndarray
    alpha: np.ndarray
    b0: float
    T1a: np.ndarray
    T1b: np.ndarray
    plant: StateSpaceModel = field(repr=False)

    def disturbance_terms(self, d_series, k: int) -> tuple[float, np.ndarray]:
        """``(f1(k), d_eta(k))``; needs ``d`` up to ``k + r - 1``."""
        p = self.plant
        A0, C0, D0 = p.A0, p.C0, p.E0
        r = self.r
        dk = stack_future(d_series, k, r)
        f1 = 0.0
        for i in range(1, r + 1):
            f1 += (C0 @ np.linalg.matrix_power(A0, r - i) @ D0 @ dk[(i - 1) * p.q:i * p.q]).item()
        dbold = dk[: (r - 1) * p.q]
        CAr = C0 @ np.linalg.matrix_power(A0, r)
        f1 -= (CAr @ self.T1a @ self.M @ dbold).item() if dbold.size else 0.0
        d_eta = self.Phi @ D0 @ dk[: p.q]
        if dbold.size:
            d_eta = d_eta - self.Phi @ A0 @ self.T1a @ self.M @ dbold
        return f1, d_eta


@dataclass(frozen=True)
class CanonicalWithFb:
    T2: np.ndarray
    P: np.ndarray
    model_fb: StateSpaceModel
    plant: StateSpaceModel = field(repr=False)

    def lift_state(self, x0, d_series) -> np.ndarray:
        """Initial state of the f_b model matching plant state ``x0``."""
        n, q = self.plant.n, self.plant.q
        dbar = stack_future(_d_matrix(d_series, q), 0, n - 1)
        xbar = self.T2 @ np.asarray(x0, dtype=float).ravel() + self.P @ dbar
        return np.linalg.solve(self.T2, xbar)


def _require_observable(model):
    if not is_observable(model):
        raise AssumptionError(1, "(A0, C0) is not observable")


def build_normal_form(model: StateSpaceModel) -> NormalForm:
    """Normal form of a plant whose ``E0`` holds the disturbance map ``D0``.

    ``Phi`` spans the directions orthogonal to both ``B0`` and the first
    ``r-1`` output-chain rows, as an orthonormal basis.
    """
    _require_observable(model)
    A0, B0, C0, D0 = model.A0, model.B0, model.C0, model.E0
    n = model.n
    r = relative_degree(A0, B0, C0)
    if r is None:
        raise ModelError("relative degree with respect to u is undefined (C0 A0^i B0 = 0 for all i < n)")
    H = observability_matrix(A0, C0)[:r]
    Phi = scipy.linalg.null_space(np.vstack([B0.T, H[: r - 1]])).T
    m_dim = n - r
    if Phi.shape[0] != m_dim:
        raise ModelError(f"could not complete the output chain: found {Phi.shape[0]} of {m_dim} rows")
    T1 = np.vstack([H, Phi])
    if matrix_rank(T1) < n:
        raise ModelError("normal-form transform is singular")
    T1inv = np.linalg.inv(T1)
    T1a, T1b = T1inv[:, :r], T1inv[:, r:]
    CAr = C0 @ np.linalg.matrix_power(A0, r)
    alpha = (CAr @ T1a).ravel()
    Ahat = np.eye(r, k=1)
    Ahat[-1] = alpha
    b0 = (C0 @ np.linalg.matrix_power(A0, r - 1) @ B0).item()
    Bhat = np.zeros((r, 1))
    Bhat[-1, 0] = b0
    Ehat = np.zeros((r, 1))
    Ehat[-1, 0] = 1.0
    Chat = np.eye(1, r)
    return NormalForm(
        T1=T1, Phi=Phi, r=r, m_dim=m_dim, Ahat=Ahat, Bhat=Bhat, Ehat=Ehat, Chat=Chat,
        Fhat=CAr @ T1b, Shat=Phi @ A0 @ T1b, Ghat=Phi @ A0 @ T1a,
        M=feedthrough_block(A0, C0, D0, r), alpha=alpha, b0=b0, T1a=T1a, T1b=T1b,
        plant=model,
    )


def chain_model(nf: NormalForm) -> StateSpaceModel:
    """The output-chain model a conventional ESO is built on (disturbance ``f_a``)."""
    return build_model(nf.Ahat, nf.Bhat, nf.Ehat, nf.Chat, nf.plant.sample_time)


def simulate_normal_form(nf: NormalForm, u_series, d_series, x0):
    """Propagate the normal form; returns ``(zeta, eta, y)`` for the samples where ``d`` lookahead exists."""
    p = nf.plant
    d = _d_matrix(d_series, p.q)
    u = np.asarray(u_series, dtype=float).ravel()
    K = min(u.size, d.shape[0] - nf.r + 1)
    r, q = nf.r, p.q
    z0 = nf.T1 @ np.asarray(x0, dtype=float).ravel()
    z0[:r] += nf.M @ stack_future(d, 0, r - 1) if r > 1 else 0.0
    zeta, eta = z0[:r].copy(), z0[r:].copy()
    Z = np.empty((K, r))
    H = np.empty((K, nf.m_dim))
    for k in range(K):
        Z[k], H[k] = zeta, eta
        f1, d_eta = nf.disturbance_terms(d, k)
        fa = (nf.Fhat @ eta).item() + f1 if nf.m_dim else f1
        zeta_next = nf.Ahat @ zeta + nf.Bhat.ravel() * u[k] + nf.Ehat.ravel() * fa
        eta = nf.Shat @ eta + nf.Ghat @ zeta + d_eta
        zeta = zeta_next
    return Z, H, Z[:, 0].copy()


def total_disturbance_fa(nf: NormalForm, eta_series, d_series) -> np.ndarray:
    """``f_a(k) = Fhat eta(k) + f1(k)`` wherever both inputs are available."""
    d = _d_matrix(d_series, nf.plant.q)
    eta = np.asarray(eta_series, dtype=float).reshape(-1, nf.m_dim) if nf.m_dim \
        else np.zeros((d.shape[0], 0))
    K = min(eta.shape[0], d.shape[0] - nf.r + 1)
    if K <= 0:
        raise ValueError(f"disturbance series too short for the {nf.r - 1}-step lookahead")
    out = np.empty(K)
    for k in range(K):
        f1, _ = nf.disturbance_terms(d, k)
        out[k] = (nf.Fhat @ eta[k]).item() + f1 if nf.m_dim else f1
    return out


def build_canonical_fb(model: StateSpaceModel) -> CanonicalWithFb:
    _require_observable(model)
    n = model.n
    T2 = observability_matrix(model.A0, model.C0)
    if matrix_rank(T2) < n:
        raise AssumptionError(1, "observability matrix is singular")
    P = feedthrough_block(model.A0, model.C0, model.E0, n)
    E_fb = np.linalg.solve(T2, np.eye(n)[:, -1:])
    model_fb = build_model(model.A0, model.B0, E_fb, model.C0, model.sample_time)
    return CanonicalWithFb(T2=T2, P=P, model_fb=model_fb, plant=model)


def total_disturbance_fb(canonical: CanonicalWithFb, d_series) -> np.ndarray:
    """``f_b(k) = sum_i C0 A0^{n-i} D0 d(k+i-1) - C0 A0^n T2^{-1} P dbar(k)``."""
    p = canonical.plant
    n, q = p.n, p.q
    d = _d_matrix(d_series, q)
    K = d.shape[0] - n + 1
    if K <= 0:
        raise ValueError(f"disturbance series too short for the {n - 1}-step lookahead")
    # f_b(k) = w . [d(k); ...; d(k+n-1)] for one fixed weight row w
    w = np.zeros(n * q)
    for i in range(1, n + 1):
        w[(i - 1) * q:i * q] += (p.C0 @ np.linalg.matrix_power(p.A0, n - i) @ p.E0).ravel()
    corr = (p.C0 @ np.linalg.matrix_power(p.A0, n) @ np.linalg.solve(canonical.T2, canonical.P)).ravel()
    w[: (n - 1) * q] -= corr
    windows = np.lib.stride_tricks.sliding_window_view(d, n, axis=0)  # (K, q, n)
    stacked = windows.transpose(0, 2, 1).reshape(K, n * q)
    return stacked @ w


def simulate_canonical(canonical: CanonicalWithFb, u_series, d_series, x0):
    """Simulate the f_b model from the lifted initial state; returns ``(states, y, f_b)``."""
    from .simulation import simulate_plant

    fb = total_disturbance_fb(canonical, d_series)
    u = np.asarray(u_series, dtype=float).ravel()[: fb.size]
    xt0 = canonical.lift_state(x0, d_series)
    states, y = simulate_plant(canonical.model_fb, u, fb, xt0)
    return states, y, fb


def design_zd_eso(canonical: CanonicalWithFb, lam: float) -> EsoDesign:
    """GMB-ESO for the f_b model, which keeps the plant's zero dynamics built in."""
    return design_eso(canonical.model_fb, lam)
