"""Radial, compactly supported interaction kernels.

A kernel is ``J(z) = mu(|z|)`` with ``mu`` non-increasing on ``(0, r]`` and
identically zero for ``|z| >= r``.  Four profile families are provided:

``charball``
    the indicator of the open ball ``B_r``;
``tent``
    ``mu(rho) = 1 - rho/r``;
``bump``
    ``mu(rho) = (1 - (rho/r)**2)**2``;
``table``
    piecewise-linear interpolation of a sampled ``(rho, mu)`` profile.

Radial integrals (total mass, mass of ``B_rho``) are closed form where
possible and adaptive 1D quadrature otherwise.
"""
from __future__ import annotations

import csv
import enum
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import integrate
from scipy.special import gamma

__all__ = [
    "Family",
    "RadialKernel",
    "unit_ball_volume",
    "load_profile_table",
]


class Family(str, enum.Enum):
    CHARBALL = "charball"
    TENT = "tent"
    BUMP = "bump"
    TABLE = "table"

    @classmethod
    def parse(cls, name: str) -> "Family":
        aliases = {
            "characteristicball": cls.CHARBALL,
            "characteristic_ball": cls.CHARBALL,
            "smoothbump": cls.BUMP,
            "smooth_bump": cls.BUMP,
            "customprofiletable": cls.TABLE,
            "custom": cls.TABLE,
        }
        key = name.strip().lower()
        if key in aliases:
            return aliases[key]
        return cls(key)


def unit_ball_volume(n: int) -> float:
    """Lebesgue measure of the unit ball in ``R^n``."""
    return math.pi ** (n / 2) / gamma(n / 2 + 1)


@dataclass(frozen=True)
class RadialKernel:
    """Immutable radial kernel ``J(z) = scale * mu(|z|)``.

    Attributes:
        family: profile family.
        r: horizon; the kernel vanishes for ``|z| >= r``.
        dim: ambient dimension ``n``.
        scale: constant factor on the profile (1 for the raw kernel).
        table: ``(rho, mu)`` knots for the ``table`` family.
    """

    family: Family
    r: float
    dim: int = 2
    scale: float = 1.0
    table: tuple[tuple[float, ...], tuple[float, ...]] | None = field(default=None, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(str(getattr(self.family, "value", self.family))))
        if not (math.isfinite(self.r) and self.r > 0):
            raise ValueError(f"horizon r must be finite and positive, got {self.r!r}")
        if int(self.dim) != self.dim or self.dim < 1:
            raise ValueError(f"dim must be a positive integer, got {self.dim!r}")
        if not (math.isfinite(self.scale) and self.scale > 0):
            raise ValueError("scale must be finite and positive")
        if self.family is Family.TABLE:
            if self.table is None:
                raise ValueError("table family needs (rho, mu) knots")
            rho, mu = _validate_table(*self.table)
            if not math.isclose(rho[-1], self.r, rel_tol=1e-12):
                raise ValueError(f"table ends at rho={rho[-1]} but r={self.r}")
            object.__setattr__(self, "table", (tuple(rho), tuple(mu)))
        elif self.table is not None:
            raise ValueError("table knots only apply to the table family")

    # construction helpers

    @classmethod
    def charball(cls, r: float, dim: int = 2) -> "RadialKernel":
        return cls(Family.CHARBALL, r, dim)

    @classmethod
    def tent(cls, r: float, dim: int = 2) -> "RadialKernel":
        return cls(Family.TENT, r, dim)

    @classmethod
    def bump(cls, r: float, dim: int = 2) -> "RadialKernel":
        return cls(Family.BUMP, r, dim)

    @classmethod
    def from_table(cls, rho, mu, dim: int = 2) -> "RadialKernel":
        rho, mu = _validate_table(rho, mu)
        return cls(Family.TABLE, float(rho[-1]), dim, table=(tuple(rho), tuple(mu)))

    @classmethod
    def from_csv(cls, path, dim: int = 2) -> "RadialKernel":
        rho, mu = load_profile_table(path)
        return cls.from_table(rho, mu, dim)

    def normalized(self) -> "RadialKernel":
        """Copy of the kernel rescaled to unit total mass."""
        raw = RadialKernel(self.family, self.r, self.dim, 1.0, self.table)
        return RadialKernel(self.family, self.r, self.dim, 1.0 / raw.total_mass(), self.table)

    @property
    def regularity(self) -> str | None:
        """``"indicator"`` for the ball indicator, ``"strictly_decreasing"`` when ``mu' < 0`` on ``(0, r)``.

        None for tables, whose profile may have flat stretches.
        """
        if self.family is Family.CHARBALL:
            return "indicator"
        if self.family in (Family.TENT, Family.BUMP):
            return "strictly_decreasing"
        return None

    # evaluation

    def profile(self, rho) -> np.ndarray:
        """Vectorised ``scale * mu(rho)`` for ``rho >= 0``."""
        rho = np.asarray(rho, dtype=float)
        r = self.r
        inside = rho < r
        if self.family is Family.CHARBALL:
            out = inside.astype(float)
        elif self.family is Family.TENT:
            out = np.where(inside, 1.0 - rho / r, 0.0)
        elif self.family is Family.BUMP:
            u = rho / r
            out = np.where(inside, (1.0 - u * u) ** 2, 0.0)
        else:
            knots, vals = self.table
            out = np.where(inside, np.interp(rho, knots, vals), 0.0)
        return self.scale * out

    def derivative(self, rho) -> np.ndarray:
        """Analytic ``d mu / d rho`` on ``(0, r)``; zero outside the support."""
        rho = np.asarray(rho, dtype=float)
        inside = (rho > 0) & (rho < self.r)
        r = self.r
        if self.family is Family.CHARBALL:
            out = np.zeros_like(rho)
        elif self.family is Family.TENT:
            out = np.where(inside, -1.0 / r, 0.0)
        elif self.family is Family.BUMP:
            u = rho / r
            out = np.where(inside, -4.0 * u * (1.0 - u * u) / r, 0.0)
        else:
            knots, vals = (np.asarray(a) for a in self.table)
            slopes = np.diff(vals) / np.diff(knots)
            idx = np.clip(np.searchsorted(knots, rho, side="right") - 1, 0, len(slopes) - 1)
            out = np.where(inside, slopes[idx], 0.0)
        return self.scale * out

    def __call__(self, z) -> float:
        return self.eval(z)

    def eval(self, z) -> float:
        z = np.asarray(z, dtype=float)
        if z.shape != (self.dim,):
            raise ValueError(f"expected a vector of length {self.dim}, got shape {z.shape}")
        if not np.all(np.isfinite(z)):
            raise ValueError("kernel argument must be finite")
        return float(self.profile(math.sqrt(float(np.dot(z, z)))))

    # radial integrals

    def total_mass(self) -> float:
        """``int_{R^n} J``."""
        return self.ball_mass(self.r)

    def ball_mass(self, rho: float) -> float:
        """``int_{B_rho} J``, non-decreasing in ``rho`` and constant past ``r``."""
        if not rho >= 0:
            raise ValueError(f"rho must be non-negative, got {rho!r}")
        n, r = self.dim, self.r
        s = min(float(rho), r)
        if s == 0.0:
            return 0.0
        wn = unit_ball_volume(n)
        if self.family is Family.CHARBALL:
            m = wn * s**n
        elif self.family is Family.TENT:
            m = wn * (s**n - n * s ** (n + 1) / ((n + 1) * r))
        elif self.family is Family.BUMP:
            m = n * wn * (s**n / n - 2 * s ** (n + 2) / ((n + 2) * r**2) + s ** (n + 4) / ((n + 4) * r**4))
        else:
            knots = [k for k in self.table[0] if 0 < k < s]
            val, _ = integrate.quad(
                lambda p: float(self.profile(p)) / self.scale * p ** (n - 1),
                0.0, s, points=knots or None, epsabs=0.0, epsrel=1e-10, limit=200,
            )
            m = n * wn * val
        return self.scale * m

    def gradient_sup(self) -> float:
        """``sup |grad J|``; ``math.inf`` for the discontinuous ball indicator."""
        if self.family is Family.CHARBALL:
            return math.inf
        if self.family is Family.TENT:
            return self.scale / self.r
        if self.family is Family.BUMP:
            return self.scale * 8.0 / (3.0 * math.sqrt(3.0) * self.r)
        knots, vals = (np.asarray(a) for a in self.table)
        return self.scale * float(np.max(np.abs(np.diff(vals) / np.diff(knots))))

    def lipschitz_bound(self, volume: float) -> float:
        """Analytic Lipschitz constant of ``x -> H^J_Omega(x)`` for a set of given volume.

        ``2 sup|grad J| |Omega|`` for differentiable profiles and
        ``4 w_n r^(n-1)`` for the ball indicator.
        """
        if self.family is Family.CHARBALL:
            return 4.0 * unit_ball_volume(self.dim) * self.r ** (self.dim - 1) * self.scale
        return 2.0 * self.gradient_sup() * volume

    def to_dict(self) -> dict:
        d = {"family": self.family.value, "r": self.r, "dim": self.dim}
        if self.scale != 1.0:
            d["scale"] = self.scale
        return d


def _validate_table(rho, mu):
    rho = np.asarray(rho, dtype=float)
    mu = np.asarray(mu, dtype=float)
    if rho.ndim != 1 or rho.shape != mu.shape or len(rho) < 2:
        raise ValueError("profile table needs at least two (rho, mu) rows")
    if not (np.all(np.isfinite(rho)) and np.all(np.isfinite(mu))):
        raise ValueError("profile table contains non-finite entries")
    if rho[0] < 0 or np.any(np.diff(rho) <= 0):
        raise ValueError("profile table rho must be non-negative and strictly increasing")
    if np.any(mu < 0):
        raise ValueError("profile table mu must be non-negative")
    if np.any(np.diff(mu) > 0):
        raise ValueError("profile table mu must be non-increasing (radially monotone kernel)")
    if mu[-1] != 0.0:
        raise ValueError("profile table must end with mu = 0 at the horizon")
    if mu[0] <= 0:
        raise ValueError("profile table has zero mass")
    if rho[0] > 0:
        rho = np.concatenate([[0.0], rho])
        mu = np.concatenate([[mu[0]], mu])
    return rho, mu


def load_profile_table(path) -> tuple[np.ndarray, np.ndarray]:
    """Read a ``rho,mu`` CSV (optional header row)."""
    rows = []
    with Path(path).open(newline="") as fh:
        for row in csv.reader(fh):
            if not row or row[0].lstrip().startswith("#"):
                continue
            try:
                rows.append((float(row[0]), float(row[1])))
            except ValueError:
                if rows:
                    raise
                continue  # header
    if not rows:
        raise ValueError(f"no profile rows in {path}")
    rho, mu = zip(*rows)
    return _validate_table(rho, mu)
