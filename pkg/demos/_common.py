"""Shared helpers for the demo scripts: an output folder and an optional pyplot."""
import os
from pathlib import Path

OUT = Path(os.environ.get("GMBESO_OUTPUT_DIR", Path(__file__).parent / "output"))
OUT.mkdir(parents=True, exist_ok=True)

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:  # the demos still print their numbers without matplotlib
    plt = None


def save(fig, name):
    path = OUT / name
    fig.savefig(path, dpi=120, bbox_inches="tight")
    plt.close(fig)
    print(f"saved {path}")
