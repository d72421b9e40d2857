"""Command-line surface: reproducible ingest, map building, evaluation,
analysis, and generation runs.

Reports are machine-readable first (JSON and CSV); PNG renderings are
derived artifacts. Every command is deterministic given its flags, inputs
and seed. Exit codes: 0 success, 2 input error, 3 internal error.
"""

from __future__ import annotations

import argparse
import csv
import json
import re
import sys
import traceback
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import bias as bias_mod
from . import ingest as ingest_mod
from . import salmap as salmap_mod
from . import salmap_metrics as sm
from . import scanpath_metrics as spm
from .core import ImageMeta, Scanpath, UI_TYPES
from .errors import GazeToolkitError, NoData, NoRecurrences
from .generate import IorSpec, wta_ior_scanpath
from .ittikoch import itti_koch_saliency
from .stats import chi_square_gof

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_INTERNAL = 3

IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


@dataclass(frozen=True)
class RunConfig:
    """Every tolerance, seed, and kernel width of a run in one place.

    Loadable from a JSON file via --config; explicit flags override file
    values. The effective config is echoed into each run's report so runs
    are citable.
    """

    seed: int = 0
    workers: int = 1
    sigma_frac: float = salmap_mod.DEFAULT_SIGMA_FRAC
    horizons: tuple[float, ...] = (1.0, 3.0, 7.0)
    rec_threshold_frac: float = spm.DEFAULT_REC_THRESHOLD_FRAC
    tde_k: int = spm.DEFAULT_TDE_K
    det_min_line: int = spm.DEFAULT_DET_MIN_LINE
    eps: float = sm.DEFAULT_EPS
    n_fix: int = 15
    ui_type: str | None = None

    @classmethod
    def load(cls, path) -> "RunConfig":
        with open(path) as fh:
            raw = json.load(fh)
        known = {f.name for f in fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise GazeToolkitError(f"unknown config keys: {sorted(unknown)}")
        if "horizons" in raw:
            raw["horizons"] = tuple(float(h) for h in raw["horizons"])
        return cls(**raw)

    def override(self, args: argparse.Namespace) -> "RunConfig":
        updates = {}
        for f in fields(self):
            value = getattr(args, f.name, None)
            if value is not None:
                updates[f.name] = value
        return replace(self, **updates)


def _write_json(path, payload):
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)


def _safe_name(identifier: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]", "_", identifier)


def _parallel_map(fn, items, workers: int):
    if workers <= 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def _mean_sd(values):
    arr = np.asarray(values, dtype=np.float64)
    if arr.size == 0:
        return None, None
    return float(arr.mean()), float(arr.std())


def _stat_dict(result):
    if result is None:
        return None
    return {
        "statistic": result.statistic,
        "df": result.df,
        "p_value": result.p_value,
        "effect_size": result.effect_size,
    }


# --- store layout -----------------------------------------------------------


def write_store(out_dir, scanpaths, metas=None, extra=None):
    """Write a canonical dataset store: one scanpath file per
    (viewer, image) plus a manifest with counts."""
    out = Path(out_dir)
    (out / "scanpaths").mkdir(parents=True, exist_ok=True)
    entries = []
    used = set()
    for sp in sorted(scanpaths, key=lambda s: (s.image_id, s.viewer_id)):
        base = f"{_safe_name(sp.image_id)}__{_safe_name(sp.viewer_id)}"
        name = base
        counter = 1
        while name in used:
            counter += 1
            name = f"{base}__{counter}"
        used.add(name)
        rel = f"scanpaths/{name}.csv"
        ingest_mod.write_canonical(sp, out / rel)
        entries.append(
            {
                "file": rel,
                "image_id": sp.image_id,
                "viewer_id": sp.viewer_id,
                "n_fixations": len(sp),
            }
        )
    manifest = {
        "n_scanpaths": len(entries),
        "n_fixations": sum(e["n_fixations"] for e in entries),
        "scanpaths": entries,
    }
    if metas is not None:
        manifest["images"] = [asdict(m) for m in sorted(metas, key=lambda m: m.image_id)]
    if extra:
        manifest.update(extra)
    _write_json(out / "manifest.json", manifest)
    return manifest


def load_store(store_dir):
    """Load a store written by write_store: (scanpaths, metas-by-image)."""
    store = Path(store_dir)
    manifest_path = store / "manifest.json"
    if not manifest_path.exists():
        raise NoData(f"{store}: not a dataset store (missing manifest.json)")
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    scanpaths = [
        ingest_mod.read_canonical(
            store / entry["file"], entry["image_id"], entry["viewer_id"]
        )
        for entry in manifest["scanpaths"]
    ]
    metas = {}
    for raw in manifest.get("images", []):
        meta = ImageMeta(**raw)
        metas[meta.image_id] = meta
    return scanpaths, metas


def _load_images(images_dir):
    from PIL import Image

    images = {}
    for path in sorted(Path(images_dir).iterdir()):
        if path.suffix.lower() in IMAGE_SUFFIXES:
            with Image.open(path) as img:
                images[path.stem] = np.asarray(img.convert("RGB"))
    if not images:
        raise NoData(f"no images found in {images_dir}")
    return images


def _group_by_image(scanpaths):
    grouped: dict[str, list[Scanpath]] = {}
    for sp in scanpaths:
        grouped.setdefault(sp.image_id, []).append(sp)
    return grouped


def _filter_ui_type(scanpaths, metas, ui_type):
    """Restrict scanpaths to images of one UI type (no-op when unset)."""
    if ui_type is None:
        return list(scanpaths)
    kept = [
        sp
        for sp in scanpaths
        if sp.image_id in metas and metas[sp.image_id].ui_type == ui_type
    ]
    if not kept:
        raise NoData(f"no scanpaths for ui_type {ui_type!r}")
    return kept


# --- commands ----------------------------------------------------------------


def cmd_ingest(args, config: RunConfig) -> int:
    log_dir = Path(args.log_dir)
    logs = sorted(p for p in log_dir.glob("*.csv"))
    if not logs:
        raise NoData(f"no logs found in {log_dir}")
    metas = {m.image_id: m for m in ingest_mod.parse_image_manifest(args.manifest)}
    screen = (args.screen_width, args.screen_height)

    mapping = ingest_mod.ColumnMapping()
    if args.column_map:
        with open(args.column_map) as fh:
            mapping = ingest_mod.ColumnMapping(**json.load(fh))

    kept = []
    n_raw = 0
    n_dropped = 0
    skipped_images = set()
    for log in logs:
        for sp in ingest_mod.parse_fixation_log(
            log, mapping=mapping, delimiter=args.delimiter
        ):
            meta = metas.get(sp.image_id)
            if meta is None:
                skipped_images.add(sp.image_id)
                continue
            if not args.no_letterbox:
                sp = ingest_mod.apply_letterbox(sp, meta, screen)
            n_raw += len(sp)
            sp, dropped = ingest_mod.filter_in_bounds(sp)
            n_dropped += dropped
            if len(sp):
                kept.append(sp)
    if not kept:
        raise NoData("no in-bounds fixations after filtering")
    for image_id in sorted(skipped_images):
        print(f"warning: no manifest entry for {image_id}; skipped", file=sys.stderr)
    extra = {
        "n_logs": len(logs),
        "n_fixations_raw": n_raw,
        "n_dropped_out_of_bounds": n_dropped,
        "dropped_fraction": n_dropped / n_raw if n_raw else 0.0,
        "config": asdict(config),
    }
    manifest = write_store(args.out, kept, metas=metas.values(), extra=extra)
    print(
        f"ingested {manifest['n_scanpaths']} scanpaths, "
        f"{manifest['n_fixations']} fixations "
        f"(dropped {n_dropped}/{n_raw} out of bounds)"
    )
    return EXIT_OK


def cmd_salmap(args, config: RunConfig) -> int:
    scanpaths, metas = load_store(args.store)
    if not metas:
        raise NoData("store has no image metadata; run ingest with a manifest")
    scanpaths = _filter_ui_type(scanpaths, metas, config.ui_type)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    grouped = _group_by_image(scanpaths)

    def build(item):
        image_id, paths = item
        meta = metas.get(image_id)
        if meta is None:
            return image_id, None
        kernel = salmap_mod.GaussianKernelSpec(
            sigma_px=salmap_mod.default_sigma_px(meta.width, meta.height, config.sigma_frac)
        )
        results = []
        for horizon in config.horizons:
            m = salmap_mod.fixation_map(paths, meta, kernel=kernel, horizon_s=horizon)
            stem = f"{_safe_name(image_id)}__{horizon:g}s"
            salmap_mod.write_grid(out / f"{stem}.smap", m)
            salmap_mod.write_png16(out / f"{stem}.png", m)
            results.append({"image_id": image_id, "horizon_s": horizon, "file": f"{stem}.smap"})
        return image_id, results

    built = _parallel_map(build, sorted(grouped.items()), config.workers)
    index = []
    for image_id, results in built:
        if results is None:
            print(f"warning: no metadata for {image_id}; skipped", file=sys.stderr)
            continue
        index.extend(results)
    _write_json(out / "index.json", {"maps": index, "config": asdict(config)})
    print(f"wrote {len(index)} maps to {out}")
    return EXIT_OK


_SCANPATH_METRICS = ("dtw", "tde", "eyenalysis", "rec", "det", "corm")


def _scanpath_pair_metrics(pred: Scanpath, gt: Scanpath, config: RunConfig):
    row = {
        "dtw": spm.dtw(pred, gt),
        "eyenalysis": spm.eyenalysis(pred, gt),
    }
    if min(len(pred), len(gt)) >= config.tde_k:
        row["tde"] = spm.tde(gt, pred, k=config.tde_k)
    matrix = spm.recurrence_matrix(pred, gt, threshold_frac=config.rec_threshold_frac)
    row["rec"] = spm.rec(matrix)
    row["det"] = spm.det(matrix, min_line=config.det_min_line)
    try:
        row["corm"] = spm.corm(matrix)
    except NoRecurrences:
        pass
    return row


def _aggregate_metric_rows(rows, metric_names):
    summary = {}
    for name in metric_names:
        values = [r[name] for r in rows if name in r]
        mean, sd = _mean_sd(values)
        summary[name] = {"mean": mean, "sd": sd, "n": len(values)}
    return summary


def cmd_eval_scanpath(args, config: RunConfig) -> int:
    preds, _ = load_store(args.pred_store)
    gts, metas = load_store(args.gt_store)
    gts = _filter_ui_type(gts, metas, config.ui_type)
    pred_by_image = _group_by_image(preds)
    gt_by_image = _group_by_image(gts)
    shared = sorted(set(pred_by_image) & set(gt_by_image))
    if not shared:
        raise NoData("prediction and ground-truth stores share no images")

    rows = []
    for image_id in shared:
        gt_paths = gt_by_image[image_id]
        gt_viewers = {gt.viewer_id for gt in gt_paths}
        for pred in pred_by_image[image_id]:
            if args.truncate_pred and len(pred) > args.truncate_pred:
                pred = Scanpath(
                    pred.image_id, pred.viewer_id, pred.fixations[: args.truncate_pred]
                )
            # a prediction with a matching viewer id scores against that
            # viewer only; model output scores against every viewer
            targets = (
                [gt for gt in gt_paths if gt.viewer_id == pred.viewer_id]
                if pred.viewer_id in gt_viewers
                else gt_paths
            )
            for gt in targets:
                if len(pred) == 0 or len(gt) == 0:
                    continue
                row = {"image_id": image_id, "viewer_id": gt.viewer_id}
                row.update(_scanpath_pair_metrics(pred, gt, config))
                rows.append(row)
    if not rows:
        raise NoData("no comparable scanpath pairs")

    report = {
        "config": asdict(config),
        "n_pairs": len(rows),
        "overall": _aggregate_metric_rows(rows, _SCANPATH_METRICS),
        "per_ui_type": {},
    }
    for ui_type in UI_TYPES:
        type_rows = [
            r for r in rows
            if r["image_id"] in metas and metas[r["image_id"]].ui_type == ui_type
        ]
        if type_rows:
            report["per_ui_type"][ui_type] = _aggregate_metric_rows(
                type_rows, _SCANPATH_METRICS
            )

    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "scanpath_metrics.json", report)
    header = ["image_id", "viewer_id", *_SCANPATH_METRICS]
    _write_csv(
        out / "scanpath_metrics.csv",
        header,
        [[r.get(k, "") for k in header] for r in rows],
    )
    for name in _SCANPATH_METRICS:
        agg = report["overall"][name]
        if agg["mean"] is not None:
            print(f"{name}: {agg['mean']:.4f} +/- {agg['sd']:.4f} (n={agg['n']})")
    return EXIT_OK


def _resize_map(values: np.ndarray, shape) -> np.ndarray:
    if values.shape == shape:
        return values
    import cv2

    resized = cv2.resize(values, (shape[1], shape[0]), interpolation=cv2.INTER_LINEAR)
    return np.clip(resized, 0.0, None)


def _load_pred_map(pred_dir: Path, image_id: str):
    stem = _safe_name(image_id)
    for candidate in (f"{stem}.smap", f"{image_id}.smap"):
        path = pred_dir / candidate
        if path.exists():
            return salmap_mod.read_grid(path)
    for suffix in IMAGE_SUFFIXES:
        for candidate in (f"{stem}{suffix}", f"{image_id}{suffix}"):
            path = pred_dir / candidate
            if path.exists():
                return salmap_mod.read_png_map(path)
    return None


_SALMAP_METRICS = ("auc_judd", "nss", "ig", "sim", "cc", "kl")


def cmd_eval_salmap(args, config: RunConfig) -> int:
    gts, metas = load_store(args.gt_store)
    if not metas:
        raise NoData("ground-truth store has no image metadata")
    gts = _filter_ui_type(gts, metas, config.ui_type)
    pred_dir = Path(args.pred_dir)
    grouped = _group_by_image(gts)
    horizon = args.horizon

    # ground-truth maps and fixation point sets per image
    gt_maps = {}
    gt_points = {}
    for image_id, paths in sorted(grouped.items()):
        meta = metas.get(image_id)
        if meta is None:
            continue
        kernel = salmap_mod.GaussianKernelSpec(
            sigma_px=salmap_mod.default_sigma_px(meta.width, meta.height, config.sigma_frac)
        )
        gt_maps[image_id] = salmap_mod.fixation_map(
            paths, meta, kernel=kernel, horizon_s=horizon
        )
        gt_points[image_id] = salmap_mod.binary_fixation_points(paths, meta, horizon)

    # information-gain baseline: per-UI-type mean map on a common grid,
    # or a uniform map
    baselines = {}
    if args.baseline == "typemean":
        common = (256, 256)
        by_type: dict[str, list[np.ndarray]] = {}
        for image_id, gt_map in gt_maps.items():
            ui = metas[image_id].ui_type
            by_type.setdefault(ui, []).append(_resize_map(gt_map.values, common))
        for ui, stack in by_type.items():
            baselines[ui] = sm.mean_map(stack)

    def baseline_for(image_id):
        meta = metas[image_id]
        if args.baseline == "uniform":
            return sm.uniform_map(meta.width, meta.height)
        base = baselines[meta.ui_type]
        values = _resize_map(base.values, (meta.height, meta.width))
        total = values.sum()
        return values / total if total > 0 else values

    rows = []
    missing = []
    for image_id in sorted(gt_maps):
        pred = _load_pred_map(pred_dir, image_id)
        if pred is None:
            missing.append(image_id)
            continue
        gt_map = gt_maps[image_id]
        points = gt_points[image_id]
        values = _resize_map(pred.values, gt_map.values.shape)
        row = {"image_id": image_id}
        if points:
            row["auc_judd"] = sm.auc_judd(values, points)
            if values.std() > 0:
                row["nss"] = sm.nss(values, points)
            row["ig"] = sm.info_gain(values, baseline_for(image_id), points, eps=config.eps)
        if not gt_map.is_all_zero:
            row["sim"] = sm.sim(values, gt_map.values)
            if values.std() > 0 and gt_map.values.std() > 0:
                row["cc"] = sm.cc(values, gt_map.values)
            row["kl"] = sm.kl_div(values, gt_map.values, eps=config.eps)
        rows.append(row)
    for image_id in missing:
        print(f"warning: no prediction for {image_id}; skipped", file=sys.stderr)
    if not rows:
        raise NoData("no predictions matched the ground-truth store")

    report = {
        "config": asdict(config),
        "horizon_s": horizon,
        "baseline": args.baseline,
        "n_images": len(rows),
        "overall": _aggregate_metric_rows(rows, _SALMAP_METRICS),
        "per_ui_type": {},
    }
    for ui_type in UI_TYPES:
        type_rows = [r for r in rows if metas[r["image_id"]].ui_type == ui_type]
        if type_rows:
            report["per_ui_type"][ui_type] = _aggregate_metric_rows(
                type_rows, _SALMAP_METRICS
            )
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    _write_json(out / "salmap_metrics.json", report)
    header = ["image_id", *_SALMAP_METRICS]
    _write_csv(
        out / "salmap_metrics.csv",
        header,
        [[r.get(k, "") for k in header] for r in rows],
    )
    for name in _SALMAP_METRICS:
        agg = report["overall"][name]
        if agg["mean"] is not None:
            print(f"{name}: {agg['mean']:.4f} +/- {agg['sd']:.4f} (n={agg['n']})")
    return EXIT_OK


def _plot_heat(heat, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(4, 4))
    ax.imshow(heat, cmap="hot", extent=(0, 1, 1, 0))
    ax.axhline(0.5, color="white", linestyle="--", linewidth=1)
    ax.axvline(0.5, color="white", linestyle="--", linewidth=1)
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def _plot_polar(hist, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    edges = np.deg2rad(np.asarray(hist.bin_edges_deg))
    counts = [len(a) for a in hist.bin_amplitudes]
    fig = plt.figure(figsize=(4, 4))
    ax = fig.add_subplot(projection="polar")
    ax.set_theta_direction(-1)  # y grows downward on screens
    ax.bar(
        (edges[:-1] + edges[1:]) / 2,
        counts,
        width=np.diff(edges),
        edgecolor="black",
        linewidth=0.3,
    )
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def _plot_bars(labels, values, path, ylabel=""):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 3))
    ax.bar(range(len(values)), values)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=30, ha="right", fontsize=8)
    ax.set_ylabel(ylabel)
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def _plot_palette(palette, horizons, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    n = len(palette.clusters)
    rows = 1 + len(horizons)
    fig, axes = plt.subplots(rows, 1, figsize=(6, 0.6 * rows))
    axes = np.atleast_1d(axes)
    orderings = [("pixel share", palette.clusters)]
    for h in horizons:
        ordered = sorted(
            palette.clusters, key=lambda c: -c.fixation_count(h)
        )
        orderings.append((f"fixated up to {h:g}s", ordered))
    for ax, (label, clusters) in zip(axes, orderings):
        strip = np.array([c.centroid for c in clusters], dtype=np.float64) / 255.0
        ax.imshow(strip[None, :, :], aspect="auto")
        ax.set_yticks([])
        ax.set_xticks([])
        ax.set_title(label, fontsize=7, loc="left")
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def _plot_boxes(result, path):
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, ax = plt.subplots(figsize=(5, 3))
    ax.boxplot([np.asarray(s) for s in result.samples], showfliers=False)
    ax.set_xticks(range(1, len(result.group_labels) + 1))
    ax.set_xticklabels(list(result.group_labels))
    ax.set_ylabel("brightness")
    plt.setp(ax.get_xticklabels(), rotation=20, ha="right", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=100)
    plt.close(fig)


def _analysis_location(scanpaths, metas, config, out):
    report = {}
    for label, ui_type in [("overall", None)] + [(u, u) for u in UI_TYPES]:
        for horizon in config.horizons:
            try:
                result = bias_mod.location_bias(
                    scanpaths, metas, horizon_s=horizon, ui_type=ui_type
                )
            except NoData:
                continue
            key = f"{label}_{horizon:g}s"
            report[key] = {
                "quadrants_avg_per_user": result.quadrants_per_user.as_list(),
                "quadrants_avg_per_user_image": result.quadrants_per_user_image.as_list(),
                "totals": result.totals.as_list(),
                "n_viewers": result.n_viewers,
                "n_fixations": result.n_fixations,
                "omnibus": _stat_dict(result.omnibus),
                "pairwise": [
                    {
                        "pair": f"Q{a} vs Q{b}",
                        "chi_square": _stat_dict(t.chi_square),
                        "chi_p_holm": t.chi_p_holm,
                        "rank_sum": _stat_dict(t.rank_sum),
                        "rank_p_holm": t.rank_p_holm,
                    }
                    for t in result.pairwise
                    for a, b in [t.pair]
                ],
            }
            if label == "overall":
                _plot_heat(result.heat, out / f"location_heat_{horizon:g}s.png")
    if not report:
        raise NoData("location analysis found no usable fixations")
    rows = [
        [key, *entry["quadrants_avg_per_user"]]
        for key, entry in sorted(report.items())
    ]
    _write_csv(out / "location_quadrants.csv", ["slice", "q1", "q2", "q3", "q4"], rows)
    return report


def _analysis_color(scanpaths, images, config, out):
    color_with_votes = bias_mod.color_palette(images.values(), k=16, seed=config.seed)
    for horizon in config.horizons:
        color_with_votes = bias_mod.fixated_color_ranking(
            color_with_votes, images, scanpaths, horizon
        )
    _plot_palette(color_with_votes, config.horizons, out / "color_palette.png")
    brightness = bias_mod.brightness_bias(
        images, scanpaths, horizons=config.horizons, seed=config.seed
    )
    _plot_boxes(brightness, out / "color_brightness.png")
    report = {
        "palette": [
            {
                "centroid": list(c.centroid),
                "pixel_share": c.pixel_share,
                "fixation_counts": {f"{h:g}": c.fixation_count(h) for h in config.horizons},
            }
            for c in color_with_votes.clusters
        ],
        "brightness_groups": {
            label: asdict(summary)
            for label, summary in zip(brightness.group_labels, brightness.summaries)
        },
        "bartlett": _stat_dict(brightness.bartlett),
    }
    _write_csv(
        out / "color_palette.csv",
        ["r", "g", "b", "pixel_share", *[f"fixations_{h:g}s" for h in config.horizons]],
        [
            [*c.centroid, c.pixel_share, *[c.fixation_count(h) for h in config.horizons]]
            for c in color_with_votes.clusters
        ],
    )
    return report


def _analysis_saccade(scanpaths, metas, config, out):
    report = {}
    grouped: dict[str, list[Scanpath]] = {"overall": list(scanpaths)}
    for sp in scanpaths:
        meta = metas.get(sp.image_id)
        if meta is not None:
            grouped.setdefault(meta.ui_type, []).append(sp)
    for label, paths in grouped.items():
        hist = bias_mod.saccade_distribution(paths)
        if hist.n_saccades == 0:
            continue
        report[label] = {
            "direction_counts": dict(hist.direction_counts),
            "kruskal": _stat_dict(hist.kruskal),
            "amplitude_mean_by_direction": {
                d: (float(np.mean(a)) if a else None)
                for d, a in hist.direction_amplitudes
            },
        }
        _plot_polar(hist, out / f"saccade_polar_{label}.png")
    if not report:
        raise NoData("saccade analysis needs scanpaths with at least two fixations")
    return report


def _analysis_visits(scanpaths, metas, seg_dir, config, out):
    seg = Path(seg_dir)
    grouped = _group_by_image(scanpaths)
    totals: dict[str, dict[str, float]] = {}
    for image_id, paths in sorted(grouped.items()):
        meta = metas.get(image_id)
        seg_path = seg / f"{image_id}.json"
        if meta is None or not seg_path.exists():
            continue
        boxes = ingest_mod.parse_segmentation(seg_path)
        stats = bias_mod.visit_revisit(paths, boxes, meta)
        for cat, s in stats.per_category:
            agg = totals.setdefault(
                cat, {"element_count": 0, "visited_count": 0, "revisited_count": 0}
            )
            agg["element_count"] += s.element_count
            agg["visited_count"] += s.visited_count
            agg["revisited_count"] += s.revisited_count
    if not totals:
        raise NoData("visit analysis found no images with segmentation")
    report = {}
    for cat, agg in totals.items():
        n = agg["element_count"]
        report[cat] = {
            **agg,
            "visit_ratio": agg["visited_count"] / n if n else 0.0,
            "revisit_ratio": agg["revisited_count"] / n if n else 0.0,
        }
    visited = [report[c]["visited_count"] for c in sorted(report)]
    if sum(visited) > 0 and all(v >= 0 for v in visited):
        try:
            report["visited_chi_square"] = _stat_dict(chi_square_gof(visited))
        except GazeToolkitError:
            pass
    labels = sorted(totals)
    _plot_bars(
        [f"{c} visit" for c in labels] + [f"{c} revisit" for c in labels],
        [report[c]["visit_ratio"] for c in labels]
        + [report[c]["revisit_ratio"] for c in labels],
        out / "visit_revisit.png",
        ylabel="ratio",
    )
    _write_csv(
        out / "visit_revisit.csv",
        ["category", "elements", "visited", "revisited", "visit_ratio", "revisit_ratio"],
        [
            [
                c,
                report[c]["element_count"],
                report[c]["visited_count"],
                report[c]["revisited_count"],
                report[c]["visit_ratio"],
                report[c]["revisit_ratio"],
            ]
            for c in labels
        ],
    )
    return report


def cmd_analyze(args, config: RunConfig) -> int:
    scanpaths, metas = load_store(args.store)
    scanpaths = _filter_ui_type(scanpaths, metas, config.ui_type)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    which = args.which
    wanted = ["location", "color", "saccade", "visits"] if which == "all" else [which]
    report = {"config": asdict(config)}
    for analysis in wanted:
        if analysis == "location":
            report["location"] = _analysis_location(scanpaths, metas, config, out)
        elif analysis == "saccade":
            report["saccade"] = _analysis_saccade(scanpaths, metas, config, out)
        elif analysis == "color":
            if not args.images_dir:
                if which == "all":
                    print("warning: no --images-dir; skipping color", file=sys.stderr)
                    continue
                raise NoData("color analysis needs --images-dir")
            images = _load_images(args.images_dir)
            report["color"] = _analysis_color(scanpaths, images, config, out)
        elif analysis == "visits":
            if not args.seg_dir:
                if which == "all":
                    print("warning: no --seg-dir; skipping visits", file=sys.stderr)
                    continue
                raise NoData("visit analysis needs --seg-dir")
            report["visits"] = _analysis_visits(scanpaths, metas, args.seg_dir, config, out)
    _write_json(out / "analysis.json", report)
    print(f"wrote {out / 'analysis.json'}")
    return EXIT_OK


def cmd_generate(args, config: RunConfig) -> int:
    images = _load_images(args.images_dir)

    def generate(item):
        image_id, image = item
        salmap = itti_koch_saliency(image)
        h, w = image.shape[:2]
        sigma = salmap_mod.default_sigma_px(w, h, config.sigma_frac)
        if args.model == "decaying-ior":
            ior = IorSpec.decaying(sigma_px=sigma)
        else:
            ior = IorSpec.plain(sigma_px=sigma)
        return wta_ior_scanpath(
            salmap,
            n_fix=config.n_fix,
            ior=ior,
            image_id=image_id,
            viewer_id=args.model,
        )

    scanpaths = _parallel_map(generate, sorted(images.items()), config.workers)
    write_store(
        args.out,
        scanpaths,
        extra={"model": args.model, "config": asdict(config)},
    )
    print(f"generated {len(scanpaths)} scanpaths with {args.model}")
    return EXIT_OK


# --- argument parsing ----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="uigaze",
        description="Gaze analytics over UI screenshots: ingest, maps, metrics, "
        "bias analyses, and baseline scanpath generation.",
    )
    parser.add_argument("--config", help="JSON run-config file (flags override it)")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--workers", type=int, default=None)
    common.add_argument("--sigma-frac", type=float, default=None, dest="sigma_frac")
    common.add_argument(
        "--horizons",
        type=lambda s: tuple(float(v) for v in s.split(",")),
        default=None,
    )
    common.add_argument(
        "--rec-threshold-frac", type=float, default=None, dest="rec_threshold_frac"
    )
    common.add_argument("--tde-k", type=int, default=None, dest="tde_k")
    common.add_argument("--det-min-line", type=int, default=None, dest="det_min_line")
    common.add_argument("--eps", type=float, default=None)
    common.add_argument("--n-fix", type=int, default=None, dest="n_fix")
    common.add_argument("--ui-type", choices=UI_TYPES, default=None, dest="ui_type")

    sub = parser.add_subparsers(dest="command", required=True)

    p_ingest = sub.add_parser("ingest", parents=[common], help="parse logs into a store")
    p_ingest.add_argument("--log-dir", required=True)
    p_ingest.add_argument("--manifest", required=True)
    p_ingest.add_argument("--out", required=True)
    p_ingest.add_argument("--column-map", help="JSON file overriding log column names")
    p_ingest.add_argument("--delimiter", default=",", help="log field delimiter")
    p_ingest.add_argument("--screen-width", type=int, default=1920)
    p_ingest.add_argument("--screen-height", type=int, default=1200)
    p_ingest.add_argument("--no-letterbox", action="store_true")
    p_ingest.set_defaults(func=cmd_ingest)

    p_salmap = sub.add_parser("salmap", parents=[common], help="build fixation maps")
    p_salmap.add_argument("--store", required=True)
    p_salmap.add_argument("--out", required=True)
    p_salmap.set_defaults(func=cmd_salmap)

    p_es = sub.add_parser(
        "eval-scanpath", parents=[common], help="score predicted scanpaths"
    )
    p_es.add_argument("--pred-store", required=True)
    p_es.add_argument("--gt-store", required=True)
    p_es.add_argument("--out", required=True)
    p_es.add_argument(
        "--truncate-pred",
        type=int,
        default=0,
        help="truncate predictions to this many fixations (0 = no truncation)",
    )
    p_es.set_defaults(func=cmd_eval_scanpath)

    p_em = sub.add_parser(
        "eval-salmap", parents=[common], help="score predicted saliency maps"
    )
    p_em.add_argument("--pred-dir", required=True)
    p_em.add_argument("--gt-store", required=True)
    p_em.add_argument("--out", required=True)
    p_em.add_argument("--baseline", choices=("uniform", "typemean"), default="typemean")
    p_em.add_argument("--horizon", type=float, default=7.0)
    p_em.set_defaults(func=cmd_eval_salmap)

    p_an = sub.add_parser("analyze", parents=[common], help="run bias analyses")
    p_an.add_argument("--store", required=True)
    p_an.add_argument("--out", required=True)
    p_an.add_argument("--images-dir")
    p_an.add_argument("--seg-dir")
    p_an.add_argument(
        "--which",
        choices=("location", "color", "saccade", "visits", "all"),
        default="all",
    )
    p_an.set_defaults(func=cmd_analyze)

    p_gen = sub.add_parser(
        "generate", parents=[common], help="generate baseline scanpaths"
    )
    p_gen.add_argument("--images-dir", required=True)
    p_gen.add_argument("--out", required=True)
    p_gen.add_argument(
        "--model", choices=("ittikoch-ior", "decaying-ior"), default="ittikoch-ior"
    )
    p_gen.set_defaults(func=cmd_generate)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        config = RunConfig.load(args.config) if args.config else RunConfig()
        config = config.override(args)
        return args.func(args, config)
    except GazeToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except Exception:
        traceback.print_exc()
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
