"""Command-line front end.

Usage: ``nlcurv <command> [options]`` with commands ``curvature``,
``perimeter``, ``classify``, ``check``, ``symmetry`` and ``verify``.

Every command also reads an optional INI config (``--config``).  Keys, all
optional, with command-line flags taking precedence::

    [input]
    shape = ball.json        ; or image = set.pgm / volume = set.raw
    threshold = 128
    origin = 0, 0

    [kernel]
    family = charball        ; charball | tent | bump | table
    r = 0.4
    table = profile.csv      ; required for family = table

    [grid]
    h = 0.0078125
    padding = 0.4
    supersample = false

    [tolerances]
    ordered = 0.01           ; absolute tolerance for the ordered-curvature check
    symmetry = 0.05          ; relative symmetric-difference tolerance

    [output]
    out = values.csv
    report = report.json
    heatmap = field.pgm

    [run]
    threads = 1

Relative paths in the config resolve against the config file's directory.
Exit codes: 0 success, 1 verification failure, 2 usage or input error.
"""
from __future__ import annotations

import argparse
import configparser
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import fileio, shapes
from .corpus import DEFAULT_R, load_corpus
from .fibers import (
    check_domain_hypotheses,
    check_ordered_curvature,
    classify_boundary,
    nondegeneracy_quotient,
    record_curvature,
)
from .harness import (
    CheckRecord,
    VerificationReport,
    run_matrix,
    verify_main_theorem,
    verify_pairwise_equal_curvature,
    verify_translation_derivative,
)
from .kernel import Family, RadialKernel
from .measure import CurvatureEvaluator, curvature_modulus, perimeter
from .moving_plane import analyze_symmetry
from .setrep import VoxelSet, rasterize

EXIT_OK, EXIT_FAIL, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    shape: Path | None = None
    image: Path | None = None
    volume: Path | None = None
    threshold: int = 128
    origin: tuple | None = None
    family: str = "charball"
    r: float = DEFAULT_R
    table: Path | None = None
    h: float | None = None
    padding: float | None = None
    supersample: bool = False
    ordered_tol: float | None = None
    symmetry_tol: float | None = None
    out: Path | None = None
    report: Path | None = None
    heatmap: Path | None = None
    threads: int = 1


_KEYS = {
    ("input", "shape"): ("shape", Path), ("input", "image"): ("image", Path),
    ("input", "volume"): ("volume", Path), ("input", "threshold"): ("threshold", int),
    ("input", "origin"): ("origin", "vec"),
    ("kernel", "family"): ("family", str), ("kernel", "r"): ("r", float), ("kernel", "table"): ("table", Path),
    ("grid", "h"): ("h", float), ("grid", "padding"): ("padding", float), ("grid", "supersample"): ("supersample", bool),
    ("tolerances", "ordered"): ("ordered_tol", float), ("tolerances", "symmetry"): ("symmetry_tol", float),
    ("output", "out"): ("out", Path), ("output", "report"): ("report", Path), ("output", "heatmap"): ("heatmap", Path),
    ("run", "threads"): ("threads", int),
}


def _parse_vec(text: str) -> tuple:
    return tuple(float(v) for v in text.replace(",", " ").split())


def load_config(path) -> dict:
    """Values from an INI config, keyed by :class:`RunConfig` field name."""
    path = Path(path)
    if not path.is_file():
        raise UsageError(f"config file not found: {path}")
    cp = configparser.ConfigParser(inline_comment_prefixes=(";", "#"))
    cp.read(path)
    out = {}
    for sec in cp.sections():
        for key, raw in cp.items(sec):
            if (sec, key) not in _KEYS:
                raise UsageError(f"{path}: unknown config key [{sec}] {key}")
            name, kind = _KEYS[(sec, key)]
            try:
                if kind is bool:
                    val = cp.getboolean(sec, key)
                elif kind is Path:
                    p = Path(raw)
                    val = p if p.is_absolute() else (path.parent / p)
                elif kind == "vec":
                    val = _parse_vec(raw)
                else:
                    val = kind(raw)
            except ValueError as exc:
                raise UsageError(f"{path}: bad value for [{sec}] {key}: {raw!r}") from exc
            out[name] = val
    return out


def _add_common(p: argparse.ArgumentParser):
    g = p.add_argument_group("input")
    g.add_argument("--config", type=Path, help="INI run config; flags override it")
    g.add_argument("--shape", type=Path, help="shape expression JSON")
    g.add_argument("--image", type=Path, help="binary PBM/PGM image (2D)")
    g.add_argument("--volume", type=Path, help="raw uint8 volume with a .json sidecar")
    g.add_argument("--threshold", type=int, help="image occupancy threshold (default 128)")
    g.add_argument("--origin", type=_parse_vec, help="image origin, e.g. '0,0'")
    k = p.add_argument_group("kernel")
    k.add_argument("--kernel", dest="family", help="charball | tent | bump | table")
    k.add_argument("--r", type=float, help=f"kernel horizon (default {DEFAULT_R})")
    k.add_argument("--table", type=Path, help="CSV profile table (rho, mu) for --kernel table")
    gr = p.add_argument_group("grid")
    gr.add_argument("--h", type=float, help="cell size")
    gr.add_argument("--padding", type=float, help="empty margin around the set; at least r (default r)")
    gr.add_argument("--supersample", action="store_true", default=None, help="2^n-point majority rasterization")
    p.add_argument("--threads", type=int, help="worker threads (results do not depend on it)")
    p.add_argument("--report", type=Path, help="write the JSON report here")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nlcurv", description="Nonlocal curvature, perimeter and symmetry tools.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("curvature", help="curvature at boundary cells or listed points")
    _add_common(p)
    p.add_argument("--points", type=Path, help="CSV of points (one per row) instead of boundary cells")
    p.add_argument("--out", type=Path, help="CSV output (default stdout)")
    p.add_argument("--heatmap", type=Path, help="PGM of curvature at every cell center (2D)")

    p = sub.add_parser("perimeter", help="nonlocal perimeter")
    _add_common(p)

    p = sub.add_parser("classify", help="boundary classification CSV")
    _add_common(p)
    p.add_argument("--out", type=Path, help="CSV output (default stdout)")
    p.add_argument("--with-curvature", action="store_true", help="fill the H column")

    p = sub.add_parser("check", help="ordered-curvature and domain hypothesis checks")
    _add_common(p)
    p.add_argument("--ordered-tol", dest="ordered_tol", type=float, help="absolute tolerance (default 4*C*h)")
    p.add_argument("--nondegeneracy", action="store_true", help="also estimate the nondegeneracy quotient")

    p = sub.add_parser("symmetry", help="moving-plane sweep and symmetry report")
    _add_common(p)
    p.add_argument("--symmetry-tol", dest="symmetry_tol", type=float,
                   help="defect tolerance (default 2*boundary layer volume/|set|)")

    p = sub.add_parser("verify", help="run the verification suites")
    _add_common(p)
    p.add_argument("--suite", choices=["pairwise", "translation", "symmetry", "all"], default="all")
    p.add_argument("--corpus", action="store_true", help="run the built-in corpus matrix (default without input)")
    p.add_argument("--format", choices=["table", "json"], default="table", help="stdout format")
    return ap


def resolve(args: argparse.Namespace) -> RunConfig:
    vals = load_config(args.config) if getattr(args, "config", None) else {}
    for name in RunConfig.__dataclass_fields__:
        v = getattr(args, name, None)
        if v is not None:
            vals[name] = v
    cfg = RunConfig(**vals)
    if cfg.r is None or not (math.isfinite(cfg.r) and cfg.r > 0):
        raise UsageError("kernel horizon r must be positive")
    if cfg.h is not None and not (math.isfinite(cfg.h) and cfg.h > 0):
        raise UsageError("cell size h must be positive")
    if cfg.padding is None:
        cfg.padding = cfg.r
    if cfg.padding < cfg.r:
        raise UsageError(f"padding {cfg.padding} is below the kernel horizon r={cfg.r}; horizons would be truncated")
    if cfg.threads < 1:
        raise UsageError("--threads must be at least 1")
    for name in ("shape", "image", "volume", "table"):
        p = getattr(cfg, name)
        if p is not None and not Path(p).is_file():
            raise UsageError(f"{name} file not found: {p}")
    if sum(x is not None for x in (cfg.shape, cfg.image, cfg.volume)) > 1:
        raise UsageError("give only one of --shape, --image, --volume")
    return cfg


def make_kernel(cfg: RunConfig, dim: int) -> RadialKernel:
    try:
        fam = Family.parse(cfg.family)
    except ValueError as exc:
        raise UsageError(f"unknown kernel family {cfg.family!r}") from exc
    if fam is Family.TABLE:
        if cfg.table is None:
            raise UsageError("--kernel table needs --table")
        return RadialKernel.from_csv(cfg.table, dim)
    return RadialKernel(fam, cfg.r, dim)


def _margin_ok(A: VoxelSet, r: float) -> bool:
    if A.is_empty():
        return True
    need = int(math.ceil(r / A.h - 1e-9))
    for a in range(A.dim):
        hit = np.nonzero(A.occ.any(axis=tuple(b for b in range(A.dim) if b != a)))[0]
        if hit[0] < need or A.shape[a] - 1 - hit[-1] < need:
            return False
    return True


def load_set(cfg: RunConfig) -> VoxelSet:
    if cfg.shape is not None:
        if cfg.h is None:
            raise UsageError("--h is required with --shape")
        try:
            shp = shapes.load(cfg.shape)
        except (ValueError, KeyError, TypeError) as exc:
            raise UsageError(f"{cfg.shape}: bad shape file: {exc}") from exc
        return rasterize(shp, cfg.h, padding=cfg.padding, supersample=bool(cfg.supersample))
    if cfg.image is not None:
        if cfg.h is None:
            raise UsageError("--h is required with --image")
        A = fileio.load_image_set(cfg.image, cfg.h, cfg.threshold, cfg.origin or (0.0, 0.0))
    elif cfg.volume is not None:
        A = fileio.read_volume(cfg.volume)
        if cfg.h is not None and not math.isclose(cfg.h, A.h):
            raise UsageError(f"--h {cfg.h} disagrees with the volume sidecar h={A.h}")
    else:
        raise UsageError("no input: give --shape, --image or --volume")
    # images and volumes end at their borders; demand the margin rather than guess
    if not _margin_ok(A, cfg.padding):
        raise UsageError(f"the set comes within padding={cfg.padding} of the image border; "
                         "curvature horizons would be truncated")
    return A


def _write_text(path: Path | None, text: str):
    if path is None:
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _read_points(path: Path, dim: int) -> np.ndarray:
    rows = []
    with open(path) as fh:
        for line in fh:
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = [s for s in line.replace(",", " ").split()]
            try:
                rows.append([float(v) for v in parts])
            except ValueError:
                if rows:
                    raise UsageError(f"{path}: non-numeric row {line!r}")
                continue  # header
    pts = np.array(rows, dtype=float).reshape(-1, dim) if rows else np.zeros((0, dim))
    if any(len(r) != dim for r in rows):
        raise UsageError(f"{path}: expected {dim} coordinates per row")
    if not np.all(np.isfinite(pts)):
        raise UsageError(f"{path}: points must be finite")
    return pts


def cmd_curvature(cfg: RunConfig, args) -> int:
    A = load_set(cfg)
    k = make_kernel(cfg, A.dim)
    ev = CurvatureEvaluator(A, k, threads=cfg.threads)
    if args.points is not None:
        if not args.points.is_file():
            raise UsageError(f"points file not found: {args.points}")
        pts = _read_points(args.points, A.dim)
    else:
        pts = A.centers(np.argwhere(A.boundary_mask()))
    vals = ev.at(pts) if len(pts) else np.zeros(0)
    fileio.write_curvature_csv(args.out or cfg.out or sys.stdout, pts, vals)
    hm = args.heatmap or cfg.heatmap
    if hm is not None:
        if A.dim != 2:
            raise UsageError("heatmaps are 2D only")
        grid, H = ev.center_values()
        fileio.write_heatmap(hm, grid, H)
    if cfg.report is not None:
        Path(cfg.report).write_text(_dump({
            "points": len(pts), "min": float(vals.min()) if len(vals) else None,
            "max": float(vals.max()) if len(vals) else None, "kernel": k.to_dict(),
            "grid": {"h": A.h, "dims": list(A.shape)},
        }))
    return EXIT_OK


def cmd_perimeter(cfg: RunConfig, args) -> int:
    A = load_set(cfg)
    k = make_kernel(cfg, A.dim)
    P = perimeter(A, k)
    doc = {"perimeter": P, "volume": A.volume(), "kernel": k.to_dict(), "grid": {"h": A.h, "dims": list(A.shape)}}
    sys.stdout.write(f"{P!r}\n")
    if cfg.report is not None:
        Path(cfg.report).write_text(_dump(doc))
    return EXIT_OK


def cmd_classify(cfg: RunConfig, args) -> int:
    A = load_set(cfg)
    recs = classify_boundary(A)
    vals = None
    if args.with_curvature and recs:
        k = make_kernel(cfg, A.dim)
        vals = record_curvature(A, k, recs, CurvatureEvaluator(A, k, threads=cfg.threads))
    fileio.write_classification_csv(args.out or cfg.out or sys.stdout, recs, vals, dim=A.dim)
    if cfg.report is not None:
        counts = {c: sum(1 for r in recs if r.kind.value == c) for c in ("P1", "P2", "P3", "P4")}
        Path(cfg.report).write_text(_dump({"counts": counts, "grid": {"h": A.h, "dims": list(A.shape)}}))
    return EXIT_OK


def _hypotheses(A: VoxelSet, k: RadialKernel, cfg: RunConfig) -> tuple[dict, bool]:
    dom = check_domain_hypotheses(A, k)
    ordered = check_ordered_curvature(A, k, tol=cfg.ordered_tol)
    doc = {"domain": dom.to_dict(), "ordered": ordered.to_dict(), "connected": dom.connected}
    return doc, dom.passed and ordered.passed and dom.connected


def cmd_check(cfg: RunConfig, args) -> int:
    A = load_set(cfg)
    if A.is_empty():
        raise UsageError("the set is empty")
    k = make_kernel(cfg, A.dim)
    doc, ok = _hypotheses(A, k, cfg)
    if args.nondegeneracy:
        nd = nondegeneracy_quotient(A, k)
        doc["nondegeneracy"] = {"value": nd.value, "pairs": nd.pairs_evaluated}
    doc["passed"] = ok
    _write_text(cfg.report, _dump(doc))
    return EXIT_OK if ok else EXIT_FAIL


def cmd_symmetry(cfg: RunConfig, args) -> int:
    A = load_set(cfg)
    if A.is_empty():
        raise UsageError("the set is empty")
    k = make_kernel(cfg, A.dim)
    rep = analyze_symmetry(A, cfg.symmetry_tol)
    rep.hypothesis_checks, _ = _hypotheses(A, k, cfg)
    _write_text(cfg.report, rep.to_json() + "\n")
    return EXIT_OK


def _translation_suite(A: VoxelSet, k: RadialKernel, c_lip: float, label: str = "") -> VerificationReport:
    steps = [8 * A.h, 4 * A.h, 2 * A.h]
    if steps[0] > k.r / 4:
        rep = VerificationReport("translation derivative")
        rep.add(CheckRecord.na("translation derivative", f"8h={steps[0]:g} exceeds r/4={k.r / 4:g}"))
        return rep
    return verify_translation_derivative(A, k, steps, c_lip=c_lip, label=label)


def _input_suites(A: VoxelSet, k: RadialKernel, cfg: RunConfig, suite: str, shp) -> VerificationReport:
    rep = VerificationReport("verification")
    c_lip = curvature_modulus(A, k)
    if suite in ("pairwise", "all"):
        rep.extend(verify_pairwise_equal_curvature(A, k, c_lip=c_lip, threads=cfg.threads))
    if suite in ("translation", "all"):
        rep.extend(_translation_suite(A, k, c_lip))
    if suite in ("symmetry", "all"):
        if shp is None:
            doc, ok = _hypotheses(A, k, cfg)
            if not ok:
                rep.add(CheckRecord.na("symmetry defect", "hypotheses unmet", detail={"hypotheses": doc}))
            else:
                sym = analyze_symmetry(A, cfg.symmetry_tol)
                rep.add(CheckRecord.le("symmetry defect", sym.defect, sym.tolerance, detail={"lambda0": sym.lam0}))
        else:
            rep.extend(verify_main_theorem(shp, k, [A.h, A.h / 2], padding=cfg.padding))
    return rep


def corpus_jobs(h: float, r: float, family: str = "charball", suite: str = "all"):
    """Zero-argument jobs, one per (entry, suite), over the shipped corpus."""
    k = RadialKernel(Family.parse(family), r, 2)
    jobs = []
    for e in load_corpus():
        def run(e=e, part=None):
            A = rasterize(e.shape, h, padding=r + h)
            rep = VerificationReport(e.name)
            c_lip = curvature_modulus(A, k)
            if e.kind == "counterexample":
                pw = verify_pairwise_equal_curvature(A, k, c_lip=c_lip, label=e.name).records[0]
                rep.add(CheckRecord.le(
                    "counterexample detected (10 C h below gap)", 10 * c_lip * h, pw.measured, pw.inputs,
                    {"gap": pw.measured, "gap_over_c_h": pw.detail["gap_over_c_h"]},
                ))
                if suite in ("symmetry", "all"):
                    sym = analyze_symmetry(A)
                    # passes when the defect exceeds the symmetric tolerance
                    rep.add(CheckRecord("symmetric tolerance below defect", sym.tolerance, sym.defect,
                                        "fail" if sym.symmetric else "pass", pw.inputs,
                                        {"lambda0": sym.lam0, "verdict": sym.verdict}))
                return rep
            if suite in ("pairwise", "all"):
                rep.extend(verify_pairwise_equal_curvature(A, k, c_lip=c_lip, label=e.name))
            if suite in ("translation", "all"):
                rep.extend(_translation_suite(A, k, c_lip, e.name))
            if suite in ("symmetry", "all"):
                rep.extend(verify_main_theorem(e.shape, k, [h, h / 2], expected_plane=e.plane, padding=r, label=e.name))
            return rep
        jobs.append(run)
    return jobs


def cmd_verify(cfg: RunConfig, args) -> int:
    has_input = any(x is not None for x in (cfg.shape, cfg.image, cfg.volume))
    if args.corpus or not has_input:
        h = cfg.h or 1 / 128
        jobs = corpus_jobs(h, cfg.r, cfg.family, args.suite)
        parts = run_matrix(jobs, cfg.threads)
        rep = VerificationReport(f"corpus matrix h={h:.6g} r={cfg.r:g} kernel={cfg.family}")
        for p in parts:
            for rec in p.records:
                rec.name = f"{p.title}: {rec.name}"
            rep.extend(p)
    else:
        A = load_set(cfg)
        k = make_kernel(cfg, A.dim)
        shp = shapes.load(cfg.shape) if cfg.shape is not None else None
        rep = _input_suites(A, k, cfg, args.suite, shp)
    if cfg.report is not None:
        Path(cfg.report).write_text(rep.to_json())
    sys.stdout.write(rep.to_json() if args.format == "json" else rep.to_table())
    return EXIT_OK if rep.passed else EXIT_FAIL


COMMANDS = {
    "curvature": cmd_curvature, "perimeter": cmd_perimeter, "classify": cmd_classify,
    "check": cmd_check, "symmetry": cmd_symmetry, "verify": cmd_verify,
}


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        cfg = resolve(args)
        return COMMANDS[args.command](cfg, args)
    except UsageError as exc:
        print(f"nlcurv {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, ValueError) as exc:
        print(f"nlcurv {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
