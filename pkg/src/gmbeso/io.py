"""JSON file formats for plants, designs and scenarios."""
from __future__ import annotations

import json
from importlib import resources
from pathlib import Path

import numpy as np

from .eso import EsoDesign, continuous_bandwidth_to_eigenvalue, design_eso
from .simulation import Scenario, SignalSpec, sea_preset
from .system_model import ModelError, StateSpaceModel, augment, build_model
from .uio import UioDesign, design_uio
from .zero_dynamics import build_canonical_fb, design_zd_eso

__all__ = ["ParseError", "parse_plant", "load_plant", "plant_to_dict", "design_to_dict",
           "parse_scenario", "load_scenario", "bundled_scenario_path", "design_from_spec",
           "resolve_lambda"]

BUNDLED_SCENARIOS = ("fig1", "fig1_noise_free", "fig2")


class ParseError(ValueError):
    """Malformed input file; ``line`` is 1-based when known."""

    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        where = ""
        if source:
            where += f"{source}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)
        self.line = line


def _line_of(text: str, key: str) -> int | None:
    idx = text.find(f'"{key}"')
    return text.count("\n", 0, idx) + 1 if idx >= 0 else None


def _loads(text: str, source=None):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, source) from None


def _matrix(data, key, text, source, vector=False):
    if key not in data:
        raise ParseError(f"missing key {key!r}", None, source)
    value = data[key]
    line = _line_of(text, key)
    if vector and isinstance(value, list) and all(isinstance(v, (int, float)) for v in value):
        return np.array(value, dtype=float)
    if not isinstance(value, list) or not value or not all(isinstance(r, list) for r in value):
        raise ParseError(f"{key} must be a non-empty array of arrays", line, source)
    widths = {len(r) for r in value}
    if len(widths) != 1:
        raise ParseError(f"{key} has ragged rows (lengths {sorted(widths)})", line, source)
    for row in value:
        for v in row:
            if not isinstance(v, (int, float)) or isinstance(v, bool):
                raise ParseError(f"{key} has a non-numeric entry {v!r}", line, source)
    return np.array(value, dtype=float)


def parse_plant(text: str, source: str | None = None) -> StateSpaceModel:
    """Parse a plant definition.

    Keys: ``A0`` (array of rows), ``B0``, ``C0``, ``sample_time`` and one of
    ``E0`` / ``D0``. ``D0`` may have several columns.
    """
    data = _loads(text, source)
    if not isinstance(data, dict):
        raise ParseError("plant file must hold a JSON object", 1, source)
    dist_key = "D0" if "D0" in data else "E0"
    parts = {k: _matrix(data, k, text, source, vector=k != "A0") for k in ("A0", "B0", "C0")}
    dist = _matrix(data, dist_key, text, source, vector=True)
    if "sample_time" not in data:
        raise ParseError("missing key 'sample_time'", None, source)
    try:
        return build_model(parts["A0"], parts["B0"], dist, parts["C0"], data["sample_time"])
    except ModelError as exc:
        raise ParseError(str(exc), None, source) from None


def load_plant(path) -> StateSpaceModel:
    path = Path(path)
    return parse_plant(path.read_text(), str(path))


def plant_to_dict(model: StateSpaceModel) -> dict:
    dist = model.E0.ravel().tolist() if model.q == 1 else model.E0.tolist()
    return {"A0": model.A0.tolist(), "B0": model.B0.ravel().tolist(),
            ("E0" if model.q == 1 else "D0"): dist,
            "C0": model.C0.ravel().tolist(), "sample_time": model.sample_time}


def design_to_dict(design, plant: StateSpaceModel | None = None) -> dict:
    out = design.to_dict()
    if isinstance(design, EsoDesign):
        out["closed_loop_eigenvalues"] = [
            [float(v.real), float(v.imag)] for v in np.linalg.eigvals(design.closed_loop)]
    elif isinstance(design, UioDesign):
        out["lambda"] = design.error_eigenvalue
        out["decoupling_residual"] = design.decoupling_residual
        out["condition_number"] = float(np.linalg.cond(design.maps.Theta))
        out["J_eigenvalues"] = [[float(v.real), float(v.imag)] for v in np.linalg.eigvals(design.J)]
    if plant is not None:
        out["plant"] = plant_to_dict(plant)
    return out


def resolve_lambda(spec: dict, sample_time: float) -> float:
    has_w, has_l = "omega_c" in spec, "lambda" in spec
    if has_w == has_l:
        raise ParseError("observer needs exactly one of 'omega_c' and 'lambda'")
    if has_w:
        return continuous_bandwidth_to_eigenvalue(float(spec["omega_c"]), sample_time)
    return float(spec["lambda"])


def design_from_spec(plant: StateSpaceModel, kind: str, lam: float):
    if kind == "eso":
        return design_eso(plant, lam)
    if kind == "uio":
        return design_uio(augment(plant), None, lam)
    if kind == "zd-eso":
        return design_zd_eso(build_canonical_fb(plant), lam)
    raise ParseError(f"unknown observer kind {kind!r}")


def bundled_scenario_path(name: str) -> Path:
    return Path(str(resources.files("gmbeso") / "data" / f"{name}.scenario"))


def _resolve_plant(spec, base: Path | None, source):
    if isinstance(spec, str):
        spec = {"preset": spec} if spec in ("ms20", "ms1") else {"file": spec}
    if "preset" in spec:
        try:
            return sea_preset(spec["preset"])
        except ValueError as exc:
            raise ParseError(str(exc), None, source) from None
    if "file" in spec:
        path = Path(spec["file"])
        if base is not None and not path.is_absolute():
            path = base / path
        return load_plant(path)
    return parse_plant(json.dumps(spec), source)


def parse_scenario(text: str, source: str | None = None, base: Path | None = None,
                   seed: int | None = None) -> Scenario:
    data = _loads(text, source)
    if not isinstance(data, dict):
        raise ParseError("scenario file must hold a JSON object", 1, source)
    if "plant" not in data:
        raise ParseError("missing key 'plant'", None, source)
    plant = _resolve_plant(data["plant"], base, source)
    observers = {}
    for i, spec in enumerate(data.get("observers", [])):
        name = spec.get("name", f"obs{i}")
        kind = spec.get("kind", "eso")
        observers[name] = design_from_spec(plant, kind, resolve_lambda(spec, plant.sample_time))
    if seed is None:
        seed = data.get("seed")

    def signal(key):
        raw = data.get(key)
        if raw is None:
            return None
        raw = dict(raw)
        if seed is not None and raw.get("kind") in ("band_limited_white_noise", "random_walk"):
            raw["seed"] = int(seed)
        try:
            return SignalSpec.from_dict(raw)
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{key}: {exc}", _line_of(text, key), source) from None

    x0 = data.get("initial_state")
    return Scenario(
        plant=plant, observers=observers, u_spec=signal("u"), f_spec=signal("f"),
        noise_spec=signal("noise"), horizon=int(data.get("horizon", 100)),
        initial_state=None if x0 is None else np.asarray(x0, dtype=float),
        settle_steps=data.get("settle_steps"), name=data.get("name", source or "scenario"),
    )


def load_scenario(path_or_name, seed: int | None = None) -> Scenario:
    path = Path(path_or_name)
    if not path.exists() and str(path_or_name) in BUNDLED_SCENARIOS:
        path = bundled_scenario_path(str(path_or_name))
    return parse_scenario(path.read_text(), str(path), path.parent, seed)
