"""Built-in shape corpus: symmetric inputs and seeded counterexamples.

Symmetric entries carry their analytic symmetry plane.  Counterexamples
are a unit disk with one or two bulges on its upper half; they are
vertically lopsided, so the ordered-curvature hypothesis fails.  All
coordinates are multiples of 1/64 so rasterization at dyadic ``h`` is
exact.  The shipped JSON files are the output of :func:`write_corpus` and
tests check that they match regeneration.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

import numpy as np

from .shapes import Ball, Ellipsoid, Shape, Union, from_dict

__all__ = ["CorpusEntry", "symmetric_corpus", "counterexample_blob", "counterexample_corpus",
           "load_corpus", "write_corpus", "BLOB_SEEDS", "DEFAULT_R"]

BLOB_SEEDS = (1, 2, 3, 4, 5, 6)
DEFAULT_R = 0.4
_Q = 64.0


@dataclass(frozen=True)
class CorpusEntry:
    name: str
    shape: Shape
    kind: str  # "symmetric" or "counterexample"
    plane: float | None = None
    seed: int | None = None

    def to_dict(self) -> dict:
        d = {"name": self.name, "kind": self.kind, "shape": self.shape.to_dict()}
        if self.plane is not None:
            d["symmetry_plane"] = self.plane
        if self.seed is not None:
            d["seed"] = self.seed
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CorpusEntry":
        return cls(d["name"], from_dict(d["shape"]), d["kind"], d.get("symmetry_plane"), d.get("seed"))


def symmetric_corpus() -> list[CorpusEntry]:
    disk = Ball((0.0, 0.5), 1.0)
    return [
        CorpusEntry("disk", disk, "symmetric", 0.5),
        CorpusEntry("annulus", disk - Ball((0.0, 0.5), 0.5), "symmetric", 0.5),
        CorpusEntry("ellipse", Ellipsoid((0.0, 0.5), (1.0, 0.625)), "symmetric", 0.5),
        CorpusEntry("stacked_balls", Union((Ball((0.0, 0.0), 0.5), Ball((0.0, 1.5), 0.5))), "symmetric", 0.75),
        CorpusEntry("disk_pair", Union((Ball((-1.0, 0.5), 0.5), Ball((1.0, 0.5), 0.5))), "symmetric", 0.5),
    ]


def _q(v):
    return float(np.round(np.asarray(v) * _Q) / _Q)


def counterexample_blob(seed: int) -> Shape:
    """Unit disk plus one or two bulges centered on its upper half."""
    rng = np.random.default_rng(seed)
    parts = [Ball((0.0, 0.0), 1.0)]
    for _ in range(int(rng.integers(1, 3))):
        theta = rng.uniform(np.pi / 3, 2 * np.pi / 3)
        dist = rng.uniform(0.95, 1.15)
        rad = rng.uniform(0.4, 0.6)
        parts.append(Ball((_q(dist * np.cos(theta)), _q(dist * np.sin(theta))), _q(rad)))
    return Union(tuple(parts))


def counterexample_corpus(seeds=BLOB_SEEDS) -> list[CorpusEntry]:
    return [CorpusEntry(f"blob_{s}", counterexample_blob(s), "counterexample", None, s) for s in seeds]


def write_corpus(directory) -> list[Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    out = []
    for e in symmetric_corpus() + counterexample_corpus():
        p = directory / f"{e.name}.json"
        p.write_text(json.dumps(e.to_dict(), indent=2) + "\n")
        out.append(p)
    return out


def load_corpus(kind: str | None = None) -> list[CorpusEntry]:
    """Entries shipped with the package, sorted by name."""
    root = resources.files("nlcurv") / "data" / "corpus"
    entries = [CorpusEntry.from_dict(json.loads(f.read_text())) for f in root.iterdir() if f.name.endswith(".json")]
    entries.sort(key=lambda e: e.name)
    return [e for e in entries if kind is None or e.kind == kind]
