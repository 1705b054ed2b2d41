"""Command-line pipeline: transform -> detect -> describe -> eval -> report.

Every stage reads a dataset manifest. Shapes are identified as ``null`` or
``<class>-<strength>``; outputs are ``<shape>.<detector>.feat`` (points),
``<shape>.<detector>.reg`` (regions) and ``<shape>.<descriptor>.desc``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace
from pathlib import Path

import numpy as np

from .config import RunConfig
from .descriptors import DESCRIPTORS, is_dense, load_descriptors, save_descriptors
from .detectors import DETECTORS, load_features, load_regions, needs_basis, save_features, save_regions
from .eval import (
    EmptyEvaluableSet,
    NoMatches,
    DegeneratePopulation,
    aggregate,
    dense_quality,
    descriptor_quality,
    point_repeatability,
    region_repeatability,
    repeatability_vs_overlap,
    repeatability_vs_rho,
    roc,
)
from .mesh import load_mesh, save_off
from .spectral import SpectralCache
from .transforms import (
    SYNTHETIC_CLASSES,
    CorrespondenceMap,
    DatasetManifest,
    ManifestEntry,
    TransformSpec,
    apply_transform,
    load_correspondence,
    load_manifest,
    save_correspondence,
)
from .transforms.manifest import TABLE_CLASSES

logger = logging.getLogger("meshbench")

RHO_CURVE_PERCENT = tuple(np.round(np.arange(0.25, 5.01, 0.25), 2))
OVERLAP_CURVE = tuple(np.round(np.arange(0.05, 1.0001, 0.05), 2))
SELF_CLASS = "null"


class MissingInputs(RuntimeError):
    pass


# -- helpers ------------------------------------------------------------------


def _shapes(manifest: DatasetManifest) -> list[tuple[str, Path]]:
    return [("null", manifest.null)] + [(e.shape_id, e.mesh) for e in manifest.entries]


def _entry_seed(seed: int, cls: str, strength: int) -> int:
    ss = np.random.SeedSequence([seed, SYNTHETIC_CLASSES.index(cls), strength])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def _prepare(path: Path, normalize: bool):
    """Load a mesh, optionally scaled to unit diameter; returns (mesh, unit)."""
    mesh = load_mesh(path)
    if not normalize:
        return mesh, 1.0
    return mesh.normalized(), mesh.diam


def _write_csv(path: Path, header, rows) -> None:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    path.write_text(buf.getvalue())


def _fmt(x: float) -> str:
    return f"{x:.6f}"


def _run_tasks(fn, tasks, jobs: int):
    if jobs == 1 or len(tasks) <= 1:
        return [fn(*t) for t in tasks]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, *zip(*tasks)))


# -- transform ------------------------------------------------------------------


def cmd_transform(null_path, out_dir, classes=SYNTHETIC_CLASSES, strengths=(1, 2, 3, 4, 5), seed: int = 0, name: str | None = None) -> DatasetManifest:
    """Synthesize transformed shapes plus groundtruth and write a manifest."""
    for c in classes:
        if c not in SYNTHETIC_CLASSES:
            raise ValueError(f"unknown or non-synthesizable class {c!r}")
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    null = load_mesh(null_path)
    null_out = out / "null.off"
    save_off(null, null_out)
    entries = []
    for c in classes:
        for s in strengths:
            sd = _entry_seed(seed, c, s)
            mesh, corr = apply_transform(null, TransformSpec(c, int(s), sd))
            mp, cp = out / f"{c}-{s}.off", out / f"{c}-{s}.corr"
            save_off(mesh, mp)
            save_correspondence(corr, cp)
            entries.append(ManifestEntry(c, int(s), mp, cp, sd))
    manifest = DatasetManifest(name or null.name or "dataset", null_out, entries, out)
    manifest.save(out / "manifest.json")
    logger.info("transform: wrote %d shapes to %s", len(entries), out)
    return manifest


# -- detect ---------------------------------------------------------------------


def _detect_shape(shape_id: str, mesh_path: str, cfg: RunConfig, out_dir: str):
    cache = SpectralCache(cfg.cache_dir)
    try:
        mesh, unit = _prepare(Path(mesh_path), cfg.eval.normalize)
        basis = None
        for name, params in cfg.detectors.items():
            kind, factory = DETECTORS[name]
            if needs_basis(name) and basis is None:
                basis = cache.get(mesh, min(cfg.basis_size, mesh.n_vertices - 1))
            res = factory(params)(mesh, basis)
            if kind == "points":
                save_features(res.scaled(unit), Path(out_dir) / f"{shape_id}.{name}.feat")
            else:
                save_regions(res, Path(out_dir) / f"{shape_id}.{name}.reg")
        return shape_id, None, cache.hits, cache.misses
    except Exception as err:  # isolate per-shape failures
        return shape_id, f"{type(err).__name__}: {err}", cache.hits, cache.misses


def _report_failures(stage: str, results) -> tuple[int, int, list]:
    failed = [(s, msg) for s, msg, *_ in results if msg]
    for s, msg in failed:
        logger.error("%s: shape %s failed: %s", stage, s, msg)
    hits = sum(r[2] for r in results)
    misses = sum(r[3] for r in results)
    logger.info("%s: spectral cache hits=%d misses=%d", stage, hits, misses)
    return hits, misses, failed


def cmd_detect(cfg: RunConfig, out_dir=None) -> dict:
    manifest = load_manifest(cfg.manifest)
    out = Path(out_dir or cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    tasks = [(sid, str(p), cfg, str(out)) for sid, p in _shapes(manifest)]
    results = _run_tasks(_detect_shape, tasks, cfg.jobs)
    hits, misses, failed = _report_failures("detect", results)
    return {"shapes": len(tasks), "failed": failed, "cache_hits": hits, "cache_misses": misses}


# -- describe -------------------------------------------------------------------


def _describe_shape(shape_id: str, mesh_path: str, cfg: RunConfig, feat_dir: str, out_dir: str):
    cache = SpectralCache(cfg.cache_dir)
    try:
        mesh, unit = _prepare(Path(mesh_path), cfg.eval.normalize)
        feats = None
        basis = None
        for name, params in cfg.descriptors.items():
            p = dict(params)
            if is_dense(name):
                if basis is None:
                    basis = cache.get(mesh, min(cfg.basis_size, mesh.n_vertices - 1))
            else:
                if feats is None:
                    feats = load_features(Path(feat_dir) / f"{shape_id}.{cfg.describe_on}.feat").scaled(1.0 / unit)
                if name in ("spin-image", "ld-sift"):
                    p.setdefault("fallback_scale", cfg.fallback_scale)
            save_descriptors(DESCRIPTORS[name](p)(mesh, feats, basis), Path(out_dir) / f"{shape_id}.{name}.desc")
        return shape_id, None, cache.hits, cache.misses
    except Exception as err:
        return shape_id, f"{type(err).__name__}: {err}", cache.hits, cache.misses


def cmd_describe(cfg: RunConfig, feat_dir=None, out_dir=None) -> dict:
    manifest = load_manifest(cfg.manifest)
    out = Path(out_dir or cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    tasks = [(sid, str(p), cfg, str(feat_dir or out), str(out)) for sid, p in _shapes(manifest)]
    results = _run_tasks(_describe_shape, tasks, cfg.jobs)
    hits, misses, failed = _report_failures("describe", results)
    return {"shapes": len(tasks), "failed": failed, "cache_hits": hits, "cache_misses": misses}


# -- eval -----------------------------------------------------------------------


def _class_order(manifest: DatasetManifest) -> list[str]:
    present = list(dict.fromkeys(e.cls for e in manifest.entries))
    return [c for c in TABLE_CLASSES if c in present] + [c for c in present if c not in TABLE_CLASSES]


def _required_inputs(cfg: RunConfig, manifest: DatasetManifest, in_dir: Path) -> list[Path]:
    need = []
    for sid, _ in _shapes(manifest):
        for name in cfg.detectors:
            ext = "feat" if DETECTORS[name][0] == "points" else "reg"
            need.append(in_dir / f"{sid}.{name}.{ext}")
        for name in cfg.descriptors:
            need.append(in_dir / f"{sid}.{name}.desc")
    return [p for p in need if not p.exists()]


def _mean_curves(per_class: dict) -> list:
    rows = []
    for cls, curves in per_class.items():
        mean = np.mean(curves, axis=0)
        rows.append((cls, mean))
    return rows


def cmd_eval(cfg: RunConfig, in_dir=None, out_dir=None) -> dict:
    """Score every detector and descriptor; writes CSV tables and report.json."""
    manifest = load_manifest(cfg.manifest)
    src = Path(in_dir or cfg.out)
    out = Path(out_dir or cfg.out)
    out.mkdir(parents=True, exist_ok=True)
    missing = _required_inputs(cfg, manifest, src)
    if missing:
        raise MissingInputs("missing inputs:\n" + "\n".join(f"  {p}" for p in missing))

    null = load_mesh(manifest.null)
    rho = cfg.eval.radius(null.diam)
    rho_grid = np.array(RHO_CURVE_PERCENT) / 100.0 * null.diam
    self_corr = CorrespondenceMap.identity(null.n_vertices)
    pairs = [(e, load_mesh(e.mesh)) for e in manifest.entries]
    corrs = [load_correspondence(e.corr, null, m) for e, m in pairs]
    order = _class_order(manifest) or [SELF_CLASS]
    bundle = {"rho": rho, "overlap": cfg.eval.overlap, "detectors": {}, "descriptors": {}, "failures": []}

    def targets():
        if pairs:
            return [(e.cls, e.strength, e.shape_id, c) for (e, _), c in zip(pairs, corrs)]
        return [(SELF_CLASS, 1, "null", self_corr)]

    for name in cfg.detectors:
        kind = DETECTORS[name][0]
        values, curves = {}, {}
        if kind == "points":
            fx = load_features(src / f"null.{name}.feat")
        else:
            rx = load_regions(src / f"null.{name}.reg")
        for cls, s, sid, corr in targets():
            try:
                if kind == "points":
                    fy = load_features(src / f"{sid}.{name}.feat")
                    values[(cls, s)] = point_repeatability(fx, fy, corr, null, rho)
                    curve = repeatability_vs_rho(fx, fy, corr, null, rho_grid)
                else:
                    ry = load_regions(src / f"{sid}.{name}.reg")
                    values[(cls, s)] = region_repeatability(rx, ry, corr, null, cfg.eval.overlap)
                    curve = repeatability_vs_overlap(rx, ry, corr, null, OVERLAP_CURVE)
                curves.setdefault(cls, []).append(curve)
            except EmptyEvaluableSet as err:
                bundle["failures"].append({"stage": "eval", "item": f"{sid}.{name}", "error": str(err)})
        table_classes = [c for c in order if any(k[0] == c for k in values)]
        if not values:
            continue
        report = aggregate(values, table_classes)
        (out / f"repeatability.{name}.csv").write_text(report.to_csv())
        xs = rho_grid if kind == "points" else np.array(OVERLAP_CURVE)
        xname = "rho" if kind == "points" else "overlap"
        rows = [(cls, _fmt(x), _fmt(y)) for cls, mean in _mean_curves(curves) for x, y in zip(xs, mean)]
        _write_csv(out / f"curve.{name}.csv", ("class", xname, "repeatability"), rows)
        bundle["detectors"][name] = report.to_dict() | {"kind": kind}

    for name in cfg.descriptors:
        dx = load_descriptors(src / f"null.{name}.desc")
        q_rows, roc_rows, qual = [], [], {}
        for cls, s, sid, corr in targets():
            dy = load_descriptors(src / f"{sid}.{name}.desc")
            if dx.dim != dy.dim:
                # a configuration error rather than a per-shape failure
                raise ValueError(f"{name} descriptor dimension mismatch: null has {dx.dim}, {sid} has {dy.dim}")
            try:
                if is_dense(name):
                    val = dense_quality(dx, dy, corr, null, pairs=cfg.eval.dense_pairs, exact_limit=cfg.eval.dense_exact_limit, seed=cfg.eval.seed)
                else:
                    val = descriptor_quality(dx, dy, corr, null, rho, names=("null", sid)).mean
                    curve = roc(dx, dy, corr, null, rho, tau=cfg.eval.tau, tau_points=cfg.eval.tau_points, names=("null", sid))
                    roc_rows += [(sid, _fmt(t), _fmt(f), _fmt(p)) for t, f, p in zip(curve.tau, curve.fpr, curve.tpr)]
            except (EmptyEvaluableSet, NoMatches, DegeneratePopulation) as err:
                bundle["failures"].append({"stage": "eval", "item": f"{sid}.{name}", "error": str(err)})
                continue
            qual[sid] = val
            q_rows.append((cls, s, _fmt(val)))
        _write_csv(out / f"quality.{name}.csv", ("class", "strength", "mean_distance"), q_rows)
        if roc_rows:
            _write_csv(out / f"roc.{name}.csv", ("shape", "tau", "fpr", "tpr"), roc_rows)
        bundle["descriptors"][name] = qual
    (out / "report.json").write_text(json.dumps(bundle, indent=2, sort_keys=True, default=float) + "\n")
    return bundle


# -- report ---------------------------------------------------------------------


def cmd_report(eval_dir) -> str:
    """Render the repeatability tables of an eval directory as aligned text."""
    parts = []
    for path in sorted(Path(eval_dir).glob("repeatability.*.csv")):
        rows = list(csv.reader(path.read_text().splitlines()))
        widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
        name = path.name[len("repeatability.") : -len(".csv")]
        lines = [name] + ["  ".join(c.rjust(w) if i else c.ljust(w) for i, (c, w) in enumerate(zip(r, widths))) for r in rows]
        parts.append("\n".join(lines))
    return "\n\n".join(parts) + ("\n" if parts else "")


# -- argument parsing -------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="meshbench", description="Feature detection and description benchmark on triangle meshes.")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, manifest=True):
        sp.add_argument("--config", help="RunConfig JSON file")
        if manifest:
            sp.add_argument("--manifest")
        sp.add_argument("--out")
        sp.add_argument("--cache")
        sp.add_argument("--jobs", type=int)
        sp.add_argument("--seed", type=int)

    t = sub.add_parser("transform", help="synthesize transformed shapes and a manifest")
    t.add_argument("null", help="null shape (.off or .ply)")
    t.add_argument("--out", required=True)
    t.add_argument("--classes", nargs="+", default=list(SYNTHETIC_CLASSES))
    t.add_argument("--strengths", nargs="+", type=int, default=[1, 2, 3, 4, 5])
    t.add_argument("--seed", type=int, default=0)

    d = sub.add_parser("detect", help="run detectors on every shape")
    common(d)
    d.add_argument("--detectors", nargs="+", help=f"any of: {', '.join(DETECTORS)}")
    d.add_argument("--no-normalize", action="store_true", help="skip unit-diameter normalization")

    s = sub.add_parser("describe", help="compute descriptors on every shape")
    common(s)
    s.add_argument("--descriptors", nargs="+", help=f"any of: {', '.join(DESCRIPTORS)}")
    s.add_argument("--describe-on", help="detector whose features are described")
    s.add_argument("--features", help="directory holding feature files (default: --out)")
    s.add_argument("--no-normalize", action="store_true")

    e = sub.add_parser("eval", help="score detectors and descriptors")
    common(e)
    e.add_argument("--detectors", nargs="+")
    e.add_argument("--descriptors", nargs="+")
    e.add_argument("--inputs", help="directory with feature/descriptor files (default: --out)")
    g = e.add_mutually_exclusive_group()
    g.add_argument("--rho", type=float, help="geodesic radius in shape units")
    g.add_argument("--rho-percent-diam", type=float, help="geodesic radius in percent of the null diameter")
    e.add_argument("--overlap", type=float)

    r = sub.add_parser("report", help="print repeatability tables of an eval directory")
    r.add_argument("eval_dir")
    return p


def _config_from_args(args) -> RunConfig:
    cfg = RunConfig.load(args.config) if getattr(args, "config", None) else RunConfig()
    upd = {}
    for key in ("manifest", "out", "cache", "jobs", "seed", "describe_on"):
        val = getattr(args, key, None)
        if val is not None:
            upd[key] = val
    if getattr(args, "detectors", None):
        upd["detectors"] = {d: cfg.detectors.get(d, {}) for d in args.detectors}
    if getattr(args, "descriptors", None):
        upd["descriptors"] = {d: cfg.descriptors.get(d, {}) for d in args.descriptors}
    ev = {}
    if getattr(args, "rho", None) is not None:
        ev.update(rho=args.rho)
    if getattr(args, "rho_percent_diam", None) is not None:
        ev.update(rho=None, rho_percent_diam=args.rho_percent_diam)
    if getattr(args, "overlap", None) is not None:
        ev["overlap"] = args.overlap
    if getattr(args, "no_normalize", False):
        ev["normalize"] = False
    if getattr(args, "seed", None) is not None:
        ev["seed"] = args.seed
    if ev:
        upd["eval"] = replace(cfg.eval, **ev)
    cfg = replace(cfg, **upd)
    if cfg.manifest is None:
        raise ValueError("a manifest is required (--manifest or config)")
    return cfg


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "transform":
            m = cmd_transform(args.null, args.out, args.classes, args.strengths, args.seed)
            print(f"wrote {len(m.entries)} shapes and {Path(args.out) / 'manifest.json'}")
            return 0
        if args.command == "report":
            sys.stdout.write(cmd_report(args.eval_dir))
            return 0
        cfg = _config_from_args(args)
        if args.command == "detect":
            res = cmd_detect(cfg)
        elif args.command == "describe":
            res = cmd_describe(cfg, feat_dir=args.features)
        else:
            res = cmd_eval(cfg, in_dir=args.inputs)
            print(f"rho={res['rho']:.6g}; tables written to {cfg.out}")
            for f in res["failures"]:
                print(f"warning: {f['item']}: {f['error']}", file=sys.stderr)
            return 0
        print(f"{args.command}: {res['shapes']} shapes, {len(res['failed'])} failed, cache hits {res['cache_hits']}, misses {res['cache_misses']}")
        for sid, msg in res["failed"]:
            print(f"failed: {sid}: {msg}", file=sys.stderr)
        return 1 if res["failed"] else 0
    except MissingInputs as err:
        print(str(err), file=sys.stderr)
        return 2
    except (ValueError, OSError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
