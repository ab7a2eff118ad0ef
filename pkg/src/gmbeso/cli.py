"""Command-line front end: ``gmbeso {check,design,simulate,kernel}``.

Exit codes: 0 success, 2 parse/usage error, 3 a structural assumption
fails, 4 numerical failure, 5 I/O error.
"""
from __future__ import annotations

import argparse
import csv
import json
import os
import platform
import sys
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from .error_kernel import kernel_table
from .eso import EsoDesign, continuous_bandwidth_to_eigenvalue
from .io import ParseError, design_from_spec, design_to_dict, load_plant, load_scenario
from .simulation import run_scenario
from .svgplot import write_svg
from .system_model import AssumptionError, ModelError, structural_report

EXIT_OK = 0
EXIT_PARSE = 2
EXIT_ASSUMPTION = 3
EXIT_NUMERICAL = 4
EXIT_IO = 5

OUTPUT_ENV = "GMBESO_OUTPUT_DIR"


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARSE, f"{self.prog}: error: {message}\n")


def _output_dir(args) -> Path:
    out = Path(args.out or os.environ.get(OUTPUT_ENV) or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_manifest(out: Path, argv, outputs, seed=None, inputs=()):
    manifest = {
        "argv": list(argv),
        "inputs": [str(p) for p in inputs],
        "outputs": sorted(str(p.name) for p in outputs),
        "seed": seed,
        "versions": {"gmbeso": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                     "python": platform.python_version()},
    }
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")


def _json_dump(path: Path, data) -> None:
    path.write_text(json.dumps(data, indent=2, allow_nan=True) + "\n")


def cmd_check(args, argv) -> int:
    plant = load_plant(args.plant)
    if plant.q != 1:
        print("plant has several disturbance columns; checking the first", file=sys.stderr)
        plant = plant.with_disturbance_map(plant.E0[:, :1])
    rep = structural_report(plant)
    zeros = "none" if rep.no_invariant_zeros else "present"
    print(f"observable: {'yes' if rep.observable else 'no'}; invariant zeros: {zeros}; "
          f"r = {rep.relative_degree_label}")
    print("markov parameters C0 A0^i E0: " + ", ".join(f"{v:.6g}" for v in rep.markov_params))
    out = _output_dir(args)
    path = out / "check.json"
    _json_dump(path, rep.to_dict())
    _write_manifest(out, argv, [path], inputs=[args.plant])
    return EXIT_OK if rep.observable and rep.no_invariant_zeros else EXIT_ASSUMPTION


def cmd_design(args, argv) -> int:
    plant = load_plant(args.plant)
    if args.omega_c is not None:
        lam = continuous_bandwidth_to_eigenvalue(args.omega_c, plant.sample_time)
    else:
        lam = args.lam
    if not 0.0 <= lam < 1.0:
        print(f"error: eigenvalue {lam} outside [0, 1)", file=sys.stderr)
        return EXIT_PARSE
    design = design_from_spec(plant, args.kind, lam)
    data = design_to_dict(design, plant)
    print(f"kind: {args.kind}; lambda: {lam:.5g}")
    if isinstance(design, EsoDesign):
        print("gain L: " + ", ".join(f"{v:.6g}" for v in design.gain_L.ravel()))
    else:
        print(f"delay: {design.delay}")
    print(f"condition number: {data['condition_number']:.4g}")
    out = _output_dir(args)
    path = out / f"design_{args.kind}.json"
    _json_dump(path, data)
    _write_manifest(out, argv, [path], inputs=[args.plant])
    return EXIT_OK


def cmd_simulate(args, argv) -> int:
    scenario = load_scenario(args.scenario, seed=args.seed)
    result = run_scenario(scenario)
    out = _output_dir(args)
    stem = Path(str(scenario.name)).stem
    csv_path = out / f"{stem}.csv"
    result.write_csv(csv_path)
    metrics_path = out / f"{stem}_metrics.json"
    _json_dump(metrics_path, {"metrics": result.metrics, "metadata": result.metadata})
    outputs = [csv_path, metrics_path]
    if not args.no_plot:
        names = list(scenario.observers)
        series = {"f_true": result.columns["f_true"]}
        series.update({f"{n} f_hat": result.f_hat(n) for n in names})
        diff = None
        if len(names) == 2:
            key = f"diff_{names[0]}_{names[1]}"
            diff = {key: result.columns[key]}
        svg_path = out / f"{stem}.svg"
        write_svg(svg_path, result.time, series, title=f"{stem}: total disturbance", diff=diff)
        outputs.append(svg_path)
    for name, m in result.metrics["observers"].items():
        print(f"{name}: steady-state std {m['steady_state_std']:.4g}")
    for pair, m in result.metrics["pairs"].items():
        print(f"{pair}: max |diff| after transient {m['max_abs_diff']:.4g}")
    _write_manifest(out, argv, outputs, seed=args.seed, inputs=[args.scenario])
    return EXIT_OK


def cmd_kernel(args, argv) -> int:
    if not 0.0 <= args.lam < 1.0:
        print(f"error: eigenvalue {args.lam} outside [0, 1)", file=sys.stderr)
        return EXIT_PARSE
    rows = kernel_table(args.n, args.lam, args.k_max)
    out = _output_dir(args)
    path = out / "kernel.csv"
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["k", "h", "dh_dlambda"])
        for k, h, dh in rows:
            w.writerow([k, repr(h), repr(dh)])
    if not all(np.isfinite(h) and np.isfinite(dh) for _, h, dh in rows):
        return EXIT_NUMERICAL
    _write_manifest(out, argv, [path])
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gmbeso", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    c = sub.add_parser("check", help="structural assumptions of a plant file")
    c.add_argument("plant")
    c.add_argument("--out", help=f"output directory (default ${OUTPUT_ENV} or .)")
    c.set_defaults(func=cmd_check)

    d = sub.add_parser("design", help="design an observer and write it as JSON")
    d.add_argument("plant")
    d.add_argument("--kind", choices=("eso", "uio", "zd-eso"), default="eso")
    g = d.add_mutually_exclusive_group(required=True)
    g.add_argument("--omega-c", type=float, help="continuous bandwidth in rad/s")
    g.add_argument("--lambda", dest="lam", type=float, help="discrete eigenvalue in [0, 1)")
    d.add_argument("--out")
    d.set_defaults(func=cmd_design)

    s = sub.add_parser("simulate", help="run a scenario file (or bundled fig1/fig2)")
    s.add_argument("scenario")
    s.add_argument("--seed", type=int)
    s.add_argument("--no-plot", action="store_true")
    s.add_argument("--out")
    s.set_defaults(func=cmd_simulate)

    k = sub.add_parser("kernel", help="tabulate the error kernel h(k) and dh/dlambda")
    k.add_argument("--n", type=int, required=True)
    k.add_argument("--lambda", dest="lam", type=float, required=True)
    k.add_argument("--k-max", type=int, default=50)
    k.add_argument("--out")
    k.set_defaults(func=cmd_kernel)
    return p


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, argv)
    except ParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except AssumptionError as exc:
        print(f"assumption {exc.assumption} failed: {exc}", file=sys.stderr)
        return EXIT_ASSUMPTION
    except (np.linalg.LinAlgError, FloatingPointError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (ModelError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
