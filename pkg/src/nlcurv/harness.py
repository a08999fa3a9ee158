"""Executable checks for the ordered-curvature results.

Three suites are provided:

* pairwise equal curvature at the two endpoints of every fiber interval,
* the five-term split of the perimeter change under a small vertical
  translation, with the cross terms shrinking faster than ``t``,
* the end-to-end symmetry conclusion: hypothesis checks, moving-plane sweep
  and symmetry defect over a sequence of grid sizes.

Every check produces :class:`CheckRecord` rows collected into a
:class:`VerificationReport`.  Records whose preconditions are not met are
marked ``n/a`` and never count as failures.
"""
from __future__ import annotations

import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .fibers import (
    PointClass,
    check_domain_hypotheses,
    check_ordered_curvature,
    classify_boundary,
)
from .kernel import RadialKernel
from .measure import CurvatureEvaluator, curvature_modulus, perimeter_decomposition
from .moving_plane import analyze_symmetry
from .setrep import VoxelSet, rasterize
from .shapes import Shape

__all__ = [
    "CheckRecord",
    "VerificationReport",
    "PairwiseResult",
    "endpoint_gaps",
    "verify_pairwise_equal_curvature",
    "verify_translation_derivative",
    "verify_main_theorem",
    "run_matrix",
]

PASS, FAIL, NA = "pass", "fail", "n/a"
IDENTITY_RTOL = 1e-10


def _clean(v):
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, (np.floating, float)):
        return float(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, np.bool_):
        return bool(v)
    return v


@dataclass
class CheckRecord:
    name: str
    measured: float
    bound: float
    status: str
    inputs: dict = field(default_factory=dict)
    detail: dict = field(default_factory=dict)

    @classmethod
    def le(cls, name, measured, bound, inputs=None, detail=None):
        """Record that passes iff ``measured <= bound``."""
        status = PASS if measured <= bound else FAIL
        return cls(name, float(measured), float(bound), status, inputs or {}, detail or {})

    @classmethod
    def na(cls, name, reason, inputs=None, detail=None):
        d = {"reason": reason, **(detail or {})}
        return cls(name, math.nan, math.nan, NA, inputs or {}, d)

    @property
    def passed(self) -> bool:
        return self.status != FAIL

    def to_dict(self):
        return _clean({
            "name": self.name,
            "measured": None if math.isnan(self.measured) else self.measured,
            "bound": None if math.isnan(self.bound) else self.bound,
            "status": self.status, "inputs": self.inputs, "detail": self.detail,
        })


@dataclass
class VerificationReport:
    title: str
    records: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    @property
    def applicable(self) -> bool:
        return any(r.status != NA for r in self.records)

    def add(self, rec: CheckRecord) -> CheckRecord:
        self.records.append(rec)
        return rec

    def extend(self, other: "VerificationReport") -> "VerificationReport":
        self.records.extend(other.records)
        return self

    def record(self, name: str) -> CheckRecord:
        for r in self.records:
            if r.name == name:
                return r
        raise KeyError(name)

    def to_dict(self):
        return {
            "title": self.title,
            "verdict": PASS if self.passed else FAIL,
            "records": [r.to_dict() for r in self.records],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, allow_nan=False) + "\n"

    def to_table(self) -> str:
        rows = [("check", "measured", "bound", "status")]
        for r in self.records:
            m = "-" if math.isnan(r.measured) else f"{r.measured:.6g}"
            b = "-" if math.isnan(r.bound) else f"{r.bound:.6g}"
            rows.append((r.name, m, b, r.status))
        w = [max(len(row[i]) for row in rows) for i in range(4)]
        lines = [f"# {self.title}"]
        for k, row in enumerate(rows):
            lines.append("  ".join(c.ljust(w[i]) for i, c in enumerate(row)).rstrip())
            if k == 0:
                lines.append("  ".join("-" * x for x in w))
        lines.append(f"verdict: {PASS if self.passed else FAIL}")
        return "\n".join(lines) + "\n"


def _grid_inputs(A: VoxelSet, kernel: RadialKernel) -> dict:
    return {"h": A.h, "dims": list(A.shape), "kernel": kernel.family.value, "r": kernel.r}


@dataclass
class PairwiseResult:
    bottoms: np.ndarray
    tops: np.ndarray
    gaps: np.ndarray
    signed_integral: float
    abs_integral: float

    @property
    def max_gap(self) -> float:
        return float(self.gaps.max()) if len(self.gaps) else 0.0

    @property
    def worst_pair(self):
        if not len(self.gaps):
            return None
        i = int(np.argmax(self.gaps))
        return self.bottoms[i].tolist(), self.tops[i].tolist()


def endpoint_gaps(A: VoxelSet, kernel: RadialKernel, evaluator: CurvatureEvaluator | None = None) -> PairwiseResult:
    """``H(top) - H(bottom)`` over every fiber interval with distinct endpoints.

    The integral statistic weights each column by its cross-section
    ``h^(n-1)``.
    """
    recs = [r for r in classify_boundary(A) if r.kind is PointClass.BOTTOM]
    n = A.dim
    if not recs:
        z = np.zeros((0, n))
        return PairwiseResult(z, z, np.zeros(0), 0.0, 0.0)
    bot = np.array([r.position for r in recs])
    top = np.array([r.partner for r in recs])
    ev = evaluator or CurvatureEvaluator(A, kernel)
    H = ev.at(np.concatenate([bot, top]))
    d = H[len(recs):] - H[:len(recs)]
    w = A.h ** (n - 1)
    return PairwiseResult(bot, top, np.abs(d), float(d.sum() * w), float(np.abs(d).sum() * w))


def verify_pairwise_equal_curvature(A: VoxelSet, kernel: RadialKernel, c_lip: float | None = None,
                                    threads: int = 1, label: str = "") -> VerificationReport:
    """Max endpoint gap against ``C_lip * h``, with ``C_lip`` measured on ``A`` unless given."""
    rep = VerificationReport(f"pairwise endpoint curvature{': ' + label if label else ''}")
    ev = CurvatureEvaluator(A, kernel, threads=threads)
    if c_lip is None:
        c_lip = curvature_modulus(A, kernel)
    res = endpoint_gaps(A, kernel, ev)
    inputs = {**_grid_inputs(A, kernel), "label": label, "c_lip": c_lip}
    rep.add(CheckRecord.le(
        "max endpoint gap", res.max_gap, c_lip * A.h, inputs,
        {"pairs": len(res.gaps), "worst_pair": res.worst_pair,
         "signed_integral": res.signed_integral, "abs_integral": res.abs_integral,
         "gap_over_c_h": res.max_gap / (c_lip * A.h) if c_lip > 0 else None},
    ))
    return rep


def _check_steps(A: VoxelSet, kernel: RadialKernel, t_list) -> list[float]:
    out = []
    for t in t_list:
        k = t / A.h
        if not (t > 0 and abs(k - round(k)) < 1e-9):
            raise ValueError(f"translation t={t} must be a positive multiple of h={A.h}")
        if t > kernel.r / 4 + 1e-12:
            raise ValueError(f"translation t={t} exceeds r/4={kernel.r / 4}")
        out.append(float(t))
    return out


def verify_translation_derivative(A: VoxelSet, kernel: RadialKernel, t_list=None,
                                  c_lip: float | None = None, label: str = "") -> VerificationReport:
    """Exact five-term identity per ``t`` and the shrinking of the cross terms.

    Default steps are ``8h, 4h, 2h``.  Also compares the curvature
    difference quotient with the endpoint integral statistic; both estimate
    the same derivative of the perimeter.
    """
    if t_list is None:
        t_list = [8 * A.h, 4 * A.h, 2 * A.h]
    t_list = _check_steps(A, kernel, t_list)
    rep = VerificationReport(f"translation derivative{': ' + label if label else ''}")
    inputs = {**_grid_inputs(A, kernel), "label": label}
    decs = [perimeter_decomposition(A, kernel, t) for t in t_list]
    for d in decs:
        rep.add(CheckRecord.le(
            f"five-term identity t={d.t:.6g}", abs(d.residual) / d.scale, IDENTITY_RTOL,
            {**inputs, "t": d.t},
            {"terms": list(d.terms), "perimeter_change": d.perimeter_change,
             "curvature_quotient": (d.curv_E - d.curv_F) / d.t, "cross_quotient": d.cross_terms / d.t},
        ))
    order = sorted(decs, key=lambda d: -d.t)
    seq = [abs(d.cross_terms) / d.t for d in order]
    worst = max((b - a for a, b in zip(seq, seq[1:])), default=0.0)
    rep.add(CheckRecord.le(
        "cross terms / t decreasing as t decreases", worst, 0.0, inputs,
        {"t": [d.t for d in order], "cross_over_t": seq},
    ))
    if c_lip is None:
        c_lip = curvature_modulus(A, kernel)
    res = endpoint_gaps(A, kernel)
    finest = order[-1]
    quotient = (finest.curv_E - finest.curv_F) / finest.t
    # columns carry cross-section h^(n-1); each value moves by at most c_lip*t over the step
    sections = len(res.gaps) * A.h ** (A.dim - 1)
    rep.add(CheckRecord.le(
        "curvature quotient vs endpoint statistic", abs(quotient - res.signed_integral),
        c_lip * (finest.t + A.h) * sections, {**inputs, "t": finest.t},
        {"quotient": quotient, "endpoint_statistic": res.signed_integral, "c_lip": c_lip},
    ))
    return rep


def verify_main_theorem(shape: Shape, kernel: RadialKernel, h_list, expected_plane: float | None = None,
                        padding: float | None = None, label: str = "") -> VerificationReport:
    """Hypothesis checks, sweep and symmetry defect for each grid size.

    When the hypotheses fail at some ``h`` the symmetry records for that
    ``h`` are ``n/a``.  ``expected_plane`` adds the distance of ``lam0`` to
    the known symmetry plane.
    """
    rep = VerificationReport(f"symmetry end to end{': ' + label if label else ''}")
    if shape.bounds() is None:
        raise ValueError("shape must be nonempty and bounded")
    pad = kernel.r if padding is None else padding
    if pad < kernel.r:
        raise ValueError(f"padding {pad} is below the kernel horizon {kernel.r}")
    planes = []
    for h in sorted(h_list, reverse=True):
        A = rasterize(shape, h, padding=pad + h)
        inputs = {**_grid_inputs(A, kernel), "label": label}
        dom = check_domain_hypotheses(A, kernel)
        ordered = check_ordered_curvature(A, kernel)
        hyp = {"domain": dom.to_dict(), "ordered": ordered.to_dict(), "connected": dom.connected}
        failed = [k for k, ok in (("domain", dom.passed), ("ordered curvature", ordered.passed),
                                  ("connected", dom.connected)) if not ok]
        tag = f"h={h:.6g}"
        if failed:
            reason = "hypotheses unmet: " + ", ".join(failed)
            rep.add(CheckRecord.na(f"symmetry defect {tag}", reason, inputs, {"hypotheses": hyp}))
            continue
        sym = analyze_symmetry(A)
        planes.append((h, sym.lam0))
        rep.add(CheckRecord.le(
            f"symmetry defect {tag}", sym.defect, sym.tolerance, inputs,
            {"lambda0": sym.lam0, "event": sym.event.value, "verdict": sym.verdict, "hypotheses": hyp},
        ))
        if expected_plane is not None:
            rep.add(CheckRecord.le(f"plane offset {tag}", abs(sym.lam0 - expected_plane), h, inputs,
                                   {"lambda0": sym.lam0, "expected": expected_plane}))
    for (h1, l1), (h2, l2) in zip(planes, planes[1:]):
        rep.add(CheckRecord.le(f"plane stability h={h1:.6g}->{h2:.6g}", abs(l1 - l2), 2 * h2,
                               {"label": label}, {"lambda0": [l1, l2]}))
    return rep


def run_matrix(jobs, threads: int = 1) -> list:
    """Run independent zero-argument jobs; results come back in job order."""
    jobs = list(jobs)
    if threads <= 1:
        return [j() for j in jobs]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(lambda j: j(), jobs))
