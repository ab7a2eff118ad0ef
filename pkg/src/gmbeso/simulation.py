"""Deterministic simulation of plants and observers, plus the SEA benchmarks."""
from __future__ import annotations

import csv
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from .eso import EsoDesign, run_eso
from .error_kernel import kernel_value
from .system_model import StateSpaceModel, build_model
from .uio import UioDesign, run_uio

__all__ = [
    "SIGNAL_KINDS", "SignalSpec", "Scenario", "RunResult", "generate_signal",
    "simulate_plant", "run_scenario", "sea_preset", "signal_edges", "settling_steps",
]

SIGNAL_KINDS = ("step", "sine", "pulse", "random_walk", "band_limited_white_noise")


@dataclass(frozen=True)
class SignalSpec:
    """One input, disturbance or noise signal.

    ``noise_power`` is the height of the noise power spectral density; a
    band-limited white noise sample has variance ``noise_power / Ts``. For
    a random walk it is the per-step increment variance.
    """

    kind: str
    amplitude: float = 0.0
    start_time: float = 0.0
    frequency: float = 0.0
    noise_power: float = 0.0
    seed: int = 0
    width: float = 0.0

    def __post_init__(self):
        if self.kind not in SIGNAL_KINDS:
            raise ValueError(f"unknown signal kind {self.kind!r}; expected one of {SIGNAL_KINDS}")

    @classmethod
    def from_dict(cls, data: dict) -> "SignalSpec":
        known = {k: data[k] for k in cls.__dataclass_fields__ if k in data}
        extra = set(data) - set(known)
        if extra:
            raise ValueError(f"unknown signal fields: {sorted(extra)}")
        return cls(**known)

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in self.__dataclass_fields__}


def _first_index(time: float, ts: float) -> int:
    # 0.5 / 0.02 is 24.999999999999996 in floating point
    return int(np.ceil(time / ts - 1e-9))


def generate_signal(spec: SignalSpec, horizon: int, sample_time: float) -> np.ndarray:
    k = np.arange(horizon)
    t = k * sample_time
    k0 = _first_index(spec.start_time, sample_time)
    on = k >= k0
    if spec.kind == "step":
        return np.where(on, spec.amplitude, 0.0)
    if spec.kind == "sine":
        return np.where(on, spec.amplitude * np.sin(spec.frequency * t), 0.0)
    if spec.kind == "pulse":
        k1 = _first_index(spec.start_time + spec.width, sample_time)
        return np.where(on & (k < k1), spec.amplitude, 0.0)
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "random_walk":
        steps = rng.normal(0.0, np.sqrt(spec.noise_power), horizon)
        return np.where(on, np.cumsum(np.where(on, steps, 0.0)), 0.0)
    # band-limited white noise, noise sample time equal to the plant's
    return rng.normal(0.0, np.sqrt(spec.noise_power / sample_time), horizon)


def signal_edges(spec: SignalSpec | None, sample_time: float) -> list[int]:
    if spec is None or spec.kind in ("random_walk", "band_limited_white_noise"):
        return []
    k0 = _first_index(spec.start_time, sample_time)
    if spec.kind == "pulse":
        return [k0, _first_index(spec.start_time + spec.width, sample_time)]
    return [k0]


def simulate_plant(model: StateSpaceModel, u_series, f_or_d_series, x0=None):
    """Iterate ``x(k+1) = A0 x + B0 u + E0 f``; returns ``(x, y)`` for ``k = 0..K-1``."""
    u = np.asarray(u_series, dtype=float).ravel()
    d = np.asarray(f_or_d_series, dtype=float)
    if d.ndim == 1:
        d = d.reshape(-1, 1)
    if d.shape[0] != u.size:
        raise ValueError(f"u and disturbance lengths differ: {u.size} != {d.shape[0]}")
    if d.shape[1] != model.q:
        raise ValueError(f"disturbance has {d.shape[1]} channels, model has {model.q}")
    n = model.n
    x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float).ravel().copy()
    A0, B0, E0, C0 = model.A0, model.B0.ravel(), model.E0, model.C0.ravel()
    states = np.empty((u.size, n))
    for k in range(u.size):
        states[k] = x
        x = A0 @ x + B0 * u[k] + E0 @ d[k]
    return states, states @ C0


# Printed SEA matrices, 20 ms and 1 ms sampling.
_SEA = {
    "ms20": dict(
        A0=[[0, 1, 0, 0],
            [-0.6587, 1.6494, 3.4847e-4, 0],
            [0, 0, 0, 1],
            [1.7991, 0, -0.9829, 1.8929]],
        B0=[0, 0, 0, 74.96], sample_time=0.02),
    "ms1": dict(
        A0=[[0, 1, 0, 0],
            [-0.9793, 1.9793, 1.056e-6, 0],
            [0, 0, 0, 1],
            [0.0046, 0, -0.9991, 1.9989]],
        B0=[0, 0, 0, 0.1904], sample_time=0.001),
}


def sea_preset(variant: str = "ms20") -> StateSpaceModel:
    """Series elastic actuator model; ``variant`` is ``"ms20"`` or ``"ms1"``."""
    try:
        p = _SEA[variant]
    except KeyError:
        raise ValueError(f"unknown SEA variant {variant!r}; expected 'ms20' or 'ms1'") from None
    return build_model(p["A0"], p["B0"], [0, 0, 0, 1], [1, 0, 0, 0], p["sample_time"])


@dataclass
class Scenario:
    plant: StateSpaceModel
    observers: dict[str, EsoDesign | UioDesign]
    u_spec: SignalSpec | None = None
    f_spec: SignalSpec | None = None
    noise_spec: SignalSpec | None = None
    horizon: int = 100
    initial_state: np.ndarray | None = None
    settle_steps: int | str | None = None  # None: fixed default, "auto": per-observer settling
    name: str = "scenario"

    def __post_init__(self):
        for key, design in self.observers.items():
            if design.augmented.plant is not self.plant and not _same_plant(design.augmented.plant, self.plant):
                raise ValueError(f"observer {key!r} was designed for a different plant")
            if isinstance(design, UioDesign) and self.horizon < design.delay + 1:
                raise ValueError(f"horizon {self.horizon} too short for UIO {key!r} (delay {design.delay})")


def _same_plant(a, b):
    return all(np.array_equal(getattr(a, k), getattr(b, k)) for k in ("A0", "B0", "C0")) \
        and a.sample_time == b.sample_time


@dataclass
class RunResult:
    time: np.ndarray
    columns: dict[str, np.ndarray]
    states: np.ndarray
    estimates: dict[str, np.ndarray]
    metrics: dict
    metadata: dict = field(default_factory=dict)

    def f_hat(self, name: str) -> np.ndarray:
        return self.columns[f"{name}_f_hat"]

    def write_csv(self, path) -> None:
        keys = list(self.columns)
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(keys)
            for row in zip(*(self.columns[k] for k in keys)):
                w.writerow([repr(float(v)) if not isinstance(v, (int, np.integer)) else int(v)
                            for v in row])


def settling_steps(design: EsoDesign | UioDesign, tol: float = 1e-6, cap: int = 100_000) -> int:
    """Samples until the observer's response to a disturbance edge has died out to ``tol``."""
    if isinstance(design, EsoDesign):
        n, lam = design.n, design.eigenvalue_lambda
        k = n + 2
        while k < cap and kernel_value(n, lam, k) > tol:
            k += 1
        return k
    lam = design.error_eigenvalue
    extra = 0 if lam == 0 else int(np.ceil(np.log(tol) / np.log(lam)))
    return design.delay + design.J.shape[0] + extra


def run_scenario(scenario: Scenario) -> RunResult:
    """Simulate the plant once and feed every observer the same noisy output."""
    plant = scenario.plant
    ts, K = plant.sample_time, scenario.horizon
    zeros = np.zeros(K)
    u = generate_signal(scenario.u_spec, K, ts) if scenario.u_spec else zeros.copy()
    f = generate_signal(scenario.f_spec, K, ts) if scenario.f_spec else zeros.copy()
    noise = generate_signal(scenario.noise_spec, K, ts) if scenario.noise_spec else zeros.copy()
    x, y = simulate_plant(plant, u, f, scenario.initial_state)
    y_noisy = y + noise

    columns = {"k": np.arange(K), "t": np.arange(K) * ts, "u": u, "f_true": f,
               "y": y, "y_noisy": y_noisy}
    estimates, traces, lags = {}, {}, {}
    for name, design in scenario.observers.items():
        if isinstance(design, EsoDesign):
            X = run_eso(design, u, y_noisy)
            estimates[name] = X
            traces[name] = X[:, -1]
            lags[name] = 0
            columns[f"{name}_f_hat"] = X[:, -1]
        else:
            est = run_uio(design, u, y_noisy)
            estimates[name] = est.padded(K)
            aligned = est.aligned(K)
            traces[name] = aligned[:, -1]
            lags[name] = est.lag
            columns[f"{name}_f_hat"] = aligned[:, -1]
            columns[f"{name}_f_hat_sample"] = est.padded(K)[:, -1]
    for a, b in combinations(scenario.observers, 2):
        columns[f"diff_{a}_{b}"] = traces[a] - traces[b]

    n = plant.n
    delays = [d.delay for d in scenario.observers.values() if isinstance(d, UioDesign)]
    default_window = max([2 * (n + 1)] + [dl + n + 1 for dl in delays])
    if scenario.settle_steps == "auto":
        window = max([default_window] + [settling_steps(d) for d in scenario.observers.values()])
    elif scenario.settle_steps is not None:
        window = int(scenario.settle_steps)
    else:
        window = default_window
    edges = signal_edges(scenario.u_spec, ts) + signal_edges(scenario.f_spec, ts)
    start = min((max(edges) if edges else 0) + window, K)

    metrics = {"window_start": int(start), "window_length": int(K - start), "observers": {},
               "pairs": {}}
    for name, tr in traces.items():
        seg = tr[start:]
        ok = np.isfinite(seg)
        # compare each trace with the truth it is meant to reproduce after n+1 samples
        ref = np.concatenate([np.full(n + 1, np.nan), f[:-(n + 1)]])[start:]
        both = ok & np.isfinite(ref)
        metrics["observers"][name] = {
            "kind": "eso" if isinstance(scenario.observers[name], EsoDesign) else "uio",
            "lag": lags[name],
            "steady_state_std": float(np.std(seg[ok])) if ok.any() else float("nan"),
            "rmse_vs_delayed_truth": float(np.sqrt(np.mean((seg[both] - ref[both]) ** 2)))
            if both.any() else float("nan"),
        }
    for a, b in combinations(scenario.observers, 2):
        diff = columns[f"diff_{a}_{b}"][start:]
        diff = diff[np.isfinite(diff)]
        metrics["pairs"][f"{a}|{b}"] = {
            "max_abs_diff": float(np.abs(diff).max()) if diff.size else float("nan")}

    metadata = {
        "scenario": scenario.name,
        "noise_convention": "variance = noise_power / sample_time",
        "noise_sample_time": ts,
        "transient_window": int(window),
    }
    return RunResult(time=columns["t"], columns=columns, states=x, estimates=estimates,
                     metrics=metrics, metadata=metadata)
