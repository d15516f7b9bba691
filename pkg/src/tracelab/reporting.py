"""Artifact writers: CSV tables, JSON summaries, and rendered figures.

Every artifact embeds the configuration hash so a result file can always be
traced back to the exact inputs that produced it.
"""

from __future__ import annotations

import csv
import json
import platform
import time
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import scipy  # noqa: E402

__all__ = ["Reporter"]


class Reporter:
    """Writes an experiment's artifact set into one output directory."""

    def __init__(self, out_dir: str | Path, config_hash: str, config: dict | None = None):
        self.out = Path(out_dir)
        self.out.mkdir(parents=True, exist_ok=True)
        self.config_hash = config_hash
        self.config = config or {}
        self.t0 = time.time()

    def path(self, name: str) -> Path:
        return self.out / name

    def write_csv(self, name: str, header: list[str], rows) -> Path:
        p = self.path(name)
        with open(p, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["# config_hash", self.config_hash])
            writer.writerow(header)
            for row in rows:
                writer.writerow(
                    [repr(float(v)) if isinstance(v, (float, np.floating)) else v
                     for v in row]
                )
        return p

    def write_json(self, name: str, payload: dict) -> Path:
        p = self.path(name)
        body = {
            "config_hash": self.config_hash,
            "config": self.config,
            "versions": {
                "python": platform.python_version(),
                "numpy": np.__version__,
                "scipy": scipy.__version__,
            },
            "elapsed_seconds": round(time.time() - self.t0, 3),
        }
        body.update(payload)
        with open(p, "w") as fh:
            json.dump(body, fh, indent=2, default=_jsonable)
        return p

    def figure(self, name: str, plot_fn) -> Path:
        """Render a figure: ``plot_fn(ax)`` draws onto a fresh axis."""
        fig, ax = plt.subplots(figsize=(6.4, 4.8), dpi=130)
        plot_fn(ax)
        ax.set_title(f"{ax.get_title()} [{self.config_hash}]".strip())
        fig.tight_layout()
        p = self.path(name)
        fig.savefig(p)
        plt.close(fig)
        return p


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if hasattr(obj, "__dict__"):
        return obj.__dict__
    return str(obj)
