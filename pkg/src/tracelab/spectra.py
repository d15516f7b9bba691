"""Spectrum container shared by the eigensolver and trace modules."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field, replace

import numpy as np


@dataclass(frozen=True)
class Spectrum:
    """Lowest eigenvalues of a discretized operator, ascending, with metadata.

    ``convergence`` holds a per-eigenvalue relative-change estimate from the
    last grid refinement (zeros when no refinement was run).
    ``reliability_cutoff`` is the energy above which box truncation is no
    longer trusted.
    """

    eigenvalues: np.ndarray
    convergence: np.ndarray = field(default=None)
    reliability_cutoff: float = math.inf
    grid_info: dict = field(default_factory=dict)

    def __post_init__(self):
        ev = np.asarray(self.eigenvalues, dtype=float)
        if ev.ndim != 1 or ev.size == 0:
            raise ValueError("eigenvalues must be a nonempty 1D array")
        if np.any(ev <= 0):
            raise ValueError("eigenvalues must be positive")
        if np.any(np.diff(ev) < -1e-9 * max(1.0, abs(ev[-1]))):
            raise ValueError("eigenvalues must be ascending")
        object.__setattr__(self, "eigenvalues", ev)
        conv = self.convergence
        if conv is None:
            conv = np.zeros_like(ev)
        conv = np.asarray(conv, dtype=float)
        if conv.shape != ev.shape or not np.all(np.isfinite(conv)):
            raise ValueError("convergence estimates must be finite, one per eigenvalue")
        object.__setattr__(self, "convergence", conv)

    @property
    def k(self) -> int:
        return self.eigenvalues.size

    def with_eigenvalues(self, eigenvalues) -> "Spectrum":
        ev = np.asarray(eigenvalues, dtype=float)
        conv = self.convergence
        if conv.shape != ev.shape:
            conv = np.zeros_like(ev)
        return replace(self, eigenvalues=ev, convergence=conv)

    def truncated(self, cutoff: float) -> "Spectrum":
        """Keep only eigenvalues at or below ``cutoff``."""
        mask = self.eigenvalues <= cutoff
        if not mask.any():
            raise ValueError("no eigenvalues below cutoff")
        return replace(
            self,
            eigenvalues=self.eigenvalues[mask],
            convergence=self.convergence[mask],
        )

    def counting(self, energies) -> np.ndarray:
        """N(E) = #{eigenvalues <= E} evaluated at an array of energies."""
        return np.searchsorted(self.eigenvalues, np.asarray(energies, dtype=float), side="right").astype(float)

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["index", "eigenvalue", "convergence_estimate"])
            for i, (ev, c) in enumerate(zip(self.eigenvalues, self.convergence)):
                writer.writerow([i, repr(float(ev)), repr(float(c))])

    def summary(self) -> dict:
        return {
            "k": self.k,
            "reliability_cutoff": self.reliability_cutoff,
            "grid": self.grid_info,
            "lowest": float(self.eigenvalues[0]),
            "highest": float(self.eigenvalues[-1]),
        }

    def write_summary(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.summary(), fh, indent=2)
