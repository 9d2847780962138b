"""Weighted atomic measures on H^n.

Atoms are stored as a dense coordinate array plus a weight vector so that
ten-million-atom measures stay practical; ``atoms()`` offers the tuple view
for small measures.  CSV files use the header ``x1,...,x{2n+1},weight``;
the JSON variant additionally carries ``n``, the label and the resolution
scale.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .core import HPoint, ambient_dim, dist, group_index, _coords

__all__ = ["AtomCapExceeded", "DEFAULT_ATOM_CAP", "DiscreteMeasure"]

# Default ceiling on atom counts; a level-6 cylinder measure of the
# sixteen-map system (16^6 atoms) must fit below it.
DEFAULT_ATOM_CAP = 20_000_000

# Chunk length for streaming passes over the atom array, chosen to keep
# per-pass temporaries in the low hundreds of megabytes.
CHUNK = 4_000_000


class AtomCapExceeded(RuntimeError):
    """Raised when a construction would exceed the configured atom cap."""


def chunk_slices(total: int, chunk: int = CHUNK):
    """Yield slices covering range(total) in fixed order."""
    for start in range(0, total, chunk):
        yield slice(start, min(start + chunk, total))


@dataclass
class DiscreteMeasure:
    """A finite positive atomic measure on H^n.

    Parameters
    ----------
    n : int
        Group index; coordinates have length 2n+1.
    points : ndarray, shape (N, 2n+1)
        Atom positions.
    weights : ndarray, shape (N,)
        Strictly positive atom masses.
    label : str
        Free-form provenance string carried through serialisation.
    spacing : float or None
        Metric scale of the discretisation (finest atom spacing).  Ball
        statistics are unreliable below four times this value; consumers
        use it as a resolution floor.
    """

    n: int
    points: np.ndarray
    weights: np.ndarray
    label: str = ""
    spacing: float | None = None

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError(f"group index must be >= 1, got {self.n}")
        pts = np.ascontiguousarray(self.points, dtype=float)
        wts = np.ascontiguousarray(self.weights, dtype=float)
        if pts.ndim != 2 or pts.shape[1] != ambient_dim(self.n):
            raise ValueError(
                f"points must have shape (N, {ambient_dim(self.n)}), got {pts.shape}"
            )
        if wts.shape != (pts.shape[0],):
            raise ValueError("weights must be a vector matching the atom count")
        if not np.all(np.isfinite(pts)):
            raise ValueError("atom coordinates must be finite")
        if wts.size and (not np.all(np.isfinite(wts)) or np.any(wts <= 0.0)):
            raise ValueError("weights must be finite and strictly positive")
        if self.spacing is not None and not self.spacing > 0.0:
            raise ValueError("spacing must be positive when given")
        self.points = pts
        self.weights = wts

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def total_mass(self) -> float:
        return float(self.weights.sum())

    def atoms(self):
        """Iterate (HPoint, weight) pairs; intended for small measures."""
        for row, w in zip(self.points, self.weights):
            yield HPoint(self.n, row), float(w)

    def ball_mass(self, center, radius):
        """Mass of the closed gauge ball(s) B(center, radius).

        ``radius`` may be a scalar or a sequence; the return type follows.
        """
        radii = np.atleast_1d(np.asarray(radius, dtype=float))
        if np.any(radii < 0.0):
            raise ValueError("radii must be nonnegative")
        c, _, _ = _coords(center, self.n)
        totals = np.zeros(radii.shape)
        for sl in chunk_slices(len(self)):
            d = dist(c, self.points[sl])
            w = self.weights[sl]
            for i, rad in enumerate(radii):
                totals[i] += w[d <= rad].sum()
        if np.isscalar(radius) or np.asarray(radius).ndim == 0:
            return float(totals[0])
        return totals

    def diameter_bound(self) -> float:
        """Upper bound for the support diameter via the triangle inequality."""
        if len(self) == 0:
            return 0.0
        top = 0.0
        ref = self.points[0]
        for sl in chunk_slices(len(self)):
            d = dist(ref, self.points[sl])
            top = max(top, float(d.max()))
        return 2.0 * top

    # ------------------------------------------------------------------
    # serialisation
    # ------------------------------------------------------------------

    def to_csv(self, path) -> None:
        cols = [f"x{i + 1}" for i in range(ambient_dim(self.n))] + ["weight"]
        data = np.column_stack([self.points, self.weights])
        np.savetxt(path, data, delimiter=",", header=",".join(cols),
                   comments="", fmt="%.17g")

    @classmethod
    def from_csv(cls, path, label: str = "", spacing: float | None = None):
        with open(path, "r", encoding="utf-8") as fh:
            header = fh.readline().strip()
        cols = header.split(",")
        if len(cols) < 4 or cols[-1] != "weight":
            raise ValueError(f"unrecognised measure header: {header!r}")
        n = group_index(len(cols) - 1)
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        if data.shape[1] != len(cols):
            raise ValueError("row width does not match the header")
        return cls(n, data[:, :-1], data[:, -1], label=label, spacing=spacing)

    def to_json(self, path) -> None:
        payload = {
            "n": self.n,
            "label": self.label,
            "spacing": self.spacing,
            "points": self.points.tolist(),
            "weights": self.weights.tolist(),
        }
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, sort_keys=True)

    @classmethod
    def from_json(cls, path):
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        return cls(payload["n"], np.asarray(payload["points"], dtype=float),
                   np.asarray(payload["weights"], dtype=float),
                   label=payload.get("label", ""),
                   spacing=payload.get("spacing"))
