"""Analytic shape expressions usable as exact membership oracles.

Shapes form a small expression tree.  Leaves are :class:`Ball`,
:class:`Ellipsoid` and :class:`Box`; inner nodes are set operations and
rigid motions along coordinate axes.  Every node answers ``contains`` on an
``(..., n)`` array of points and reports an axis-aligned bounding box.

Shapes round-trip through plain JSON dictionaries::

    {"op": "union", "args": [
        {"op": "ball", "center": [0, 0], "radius": 1},
        {"op": "translate", "offset": [0, 1.5], "arg": {"op": "ball", "center": [0, 0], "radius": 0.5}}
    ]}
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "Shape", "Ball", "Ellipsoid", "Box", "Union", "Intersection", "Difference",
    "Translate", "Reflect", "Empty", "from_dict", "load", "dump",
]


class Shape:
    dim: int

    def contains(self, pts) -> np.ndarray:
        raise NotImplementedError

    def bounds(self) -> tuple[np.ndarray, np.ndarray] | None:
        """``(lo, hi)`` corners of a bounding box, or None for the empty set."""
        raise NotImplementedError

    def to_dict(self) -> dict:
        raise NotImplementedError

    def __or__(self, other):
        return Union((self, other))

    def __and__(self, other):
        return Intersection((self, other))

    def __sub__(self, other):
        return Difference(self, other)


def _vec(v):
    return tuple(float(x) for x in v)


@dataclass(frozen=True)
class Empty(Shape):
    dim: int = 2

    def contains(self, pts):
        return np.zeros(np.shape(pts)[:-1], dtype=bool)

    def bounds(self):
        return None

    def to_dict(self):
        return {"op": "empty", "dim": self.dim}


@dataclass(frozen=True)
class Ball(Shape):
    center: tuple
    radius: float

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center))
        if not self.radius > 0:
            raise ValueError("ball radius must be positive")

    @property
    def dim(self):
        return len(self.center)

    def contains(self, pts):
        d = np.asarray(pts, dtype=float) - np.asarray(self.center)
        return np.einsum("...i,...i->...", d, d) < self.radius**2

    def bounds(self):
        c = np.asarray(self.center)
        return c - self.radius, c + self.radius

    def to_dict(self):
        return {"op": "ball", "center": list(self.center), "radius": self.radius}


@dataclass(frozen=True)
class Ellipsoid(Shape):
    center: tuple
    semi_axes: tuple

    def __post_init__(self):
        object.__setattr__(self, "center", _vec(self.center))
        object.__setattr__(self, "semi_axes", _vec(self.semi_axes))
        if len(self.center) != len(self.semi_axes) or min(self.semi_axes) <= 0:
            raise ValueError("ellipsoid needs one positive semi-axis per coordinate")

    @property
    def dim(self):
        return len(self.center)

    def contains(self, pts):
        u = (np.asarray(pts, dtype=float) - np.asarray(self.center)) / np.asarray(self.semi_axes)
        return np.einsum("...i,...i->...", u, u) < 1.0

    def bounds(self):
        c, a = np.asarray(self.center), np.asarray(self.semi_axes)
        return c - a, c + a

    def to_dict(self):
        return {"op": "ellipsoid", "center": list(self.center), "semi_axes": list(self.semi_axes)}


@dataclass(frozen=True)
class Box(Shape):
    lo: tuple
    hi: tuple

    def __post_init__(self):
        object.__setattr__(self, "lo", _vec(self.lo))
        object.__setattr__(self, "hi", _vec(self.hi))
        if len(self.lo) != len(self.hi) or any(a >= b for a, b in zip(self.lo, self.hi)):
            raise ValueError("box needs lo < hi in every coordinate")

    @property
    def dim(self):
        return len(self.lo)

    def contains(self, pts):
        p = np.asarray(pts, dtype=float)
        return np.all((p > np.asarray(self.lo)) & (p < np.asarray(self.hi)), axis=-1)

    def bounds(self):
        return np.asarray(self.lo), np.asarray(self.hi)

    def to_dict(self):
        return {"op": "box", "lo": list(self.lo), "hi": list(self.hi)}


@dataclass(frozen=True)
class Union(Shape):
    args: tuple

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        if not self.args:
            raise ValueError("union of nothing; use Empty")

    @property
    def dim(self):
        return self.args[0].dim

    def contains(self, pts):
        out = self.args[0].contains(pts)
        for a in self.args[1:]:
            out = out | a.contains(pts)
        return out

    def bounds(self):
        bs = [b for b in (a.bounds() for a in self.args) if b is not None]
        if not bs:
            return None
        return np.min([b[0] for b in bs], axis=0), np.max([b[1] for b in bs], axis=0)

    def to_dict(self):
        return {"op": "union", "args": [a.to_dict() for a in self.args]}


@dataclass(frozen=True)
class Intersection(Shape):
    args: tuple

    def __post_init__(self):
        object.__setattr__(self, "args", tuple(self.args))
        if not self.args:
            raise ValueError("intersection of nothing is unbounded")

    @property
    def dim(self):
        return self.args[0].dim

    def contains(self, pts):
        out = self.args[0].contains(pts)
        for a in self.args[1:]:
            out = out & a.contains(pts)
        return out

    def bounds(self):
        bs = [a.bounds() for a in self.args]
        if any(b is None for b in bs):
            return None
        lo = np.max([b[0] for b in bs], axis=0)
        hi = np.min([b[1] for b in bs], axis=0)
        if np.any(lo >= hi):
            return None
        return lo, hi

    def to_dict(self):
        return {"op": "intersection", "args": [a.to_dict() for a in self.args]}


@dataclass(frozen=True)
class Difference(Shape):
    base: Shape
    cut: Shape

    @property
    def dim(self):
        return self.base.dim

    def contains(self, pts):
        return self.base.contains(pts) & ~self.cut.contains(pts)

    def bounds(self):
        return self.base.bounds()

    def to_dict(self):
        return {"op": "difference", "args": [self.base.to_dict(), self.cut.to_dict()]}


@dataclass(frozen=True)
class Translate(Shape):
    arg: Shape
    offset: tuple

    def __post_init__(self):
        object.__setattr__(self, "offset", _vec(self.offset))

    @property
    def dim(self):
        return self.arg.dim

    def contains(self, pts):
        return self.arg.contains(np.asarray(pts, dtype=float) - np.asarray(self.offset))

    def bounds(self):
        b = self.arg.bounds()
        if b is None:
            return None
        return b[0] + np.asarray(self.offset), b[1] + np.asarray(self.offset)

    def to_dict(self):
        return {"op": "translate", "offset": list(self.offset), "arg": self.arg.to_dict()}


@dataclass(frozen=True)
class Reflect(Shape):
    """Mirror image of ``arg`` across the hyperplane ``x[axis] = level``."""

    arg: Shape
    level: float
    axis: int = -1

    @property
    def dim(self):
        return self.arg.dim

    def _mirror(self, p):
        p = np.array(p, dtype=float, copy=True)
        p[..., self.axis] = 2.0 * self.level - p[..., self.axis]
        return p

    def contains(self, pts):
        return self.arg.contains(self._mirror(pts))

    def bounds(self):
        b = self.arg.bounds()
        if b is None:
            return None
        lo, hi = b[0].copy(), b[1].copy()
        lo[self.axis], hi[self.axis] = 2 * self.level - b[1][self.axis], 2 * self.level - b[0][self.axis]
        return lo, hi

    def to_dict(self):
        return {"op": "reflect", "level": self.level, "axis": self.axis, "arg": self.arg.to_dict()}


def from_dict(d: dict) -> Shape:
    op = d.get("op")
    if op == "ball":
        return Ball(d["center"], float(d["radius"]))
    if op == "ellipsoid":
        return Ellipsoid(d["center"], d["semi_axes"])
    if op == "box":
        return Box(d["lo"], d["hi"])
    if op == "empty":
        return Empty(int(d.get("dim", 2)))
    if op == "union":
        return Union(tuple(from_dict(a) for a in d["args"]))
    if op == "intersection":
        return Intersection(tuple(from_dict(a) for a in d["args"]))
    if op == "difference":
        base, cut = d["args"]
        return Difference(from_dict(base), from_dict(cut))
    if op == "translate":
        return Translate(from_dict(d["arg"]), d["offset"])
    if op == "reflect":
        return Reflect(from_dict(d["arg"]), float(d["level"]), int(d.get("axis", -1)))
    raise ValueError(f"unknown shape op {op!r}")


def load(path) -> Shape:
    """Read a shape; a top-level ``{"shape": ...}`` wrapper is accepted."""
    d = json.loads(Path(path).read_text())
    if "op" not in d and "shape" in d:
        d = d["shape"]
    return from_dict(d)


def dump(shape: Shape, path, **meta) -> None:
    doc = {"shape": shape.to_dict(), **meta} if meta else shape.to_dict()
    Path(path).write_text(json.dumps(doc, indent=2) + "\n")
