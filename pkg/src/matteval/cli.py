"""Command-line entry point.

Eight manifest-driven subcommands: evaluate, pseudo-gt, fuse, nonref,
loss, augment, curate-masks, analyze. Every tunable constant is a flag
with its package default visible in --help, and the fully merged
configuration is echoed into each run report.

Option precedence, lowest to highest: package defaults, the manifest's
`defaults` section, a --config JSON file, flags given explicitly on the
command line.

Exit codes: 0 success, 2 partial (some frames skipped; see the report's
`skipped` list), 1 fatal error, 64 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict
from pathlib import Path

import numpy as np

from . import __version__, defaults
from .analysis import bin_and_correlate, collect_pairs, write_plot_csv
from .core import binarize_prob
from .curation import (
    DualBranchConfig,
    MaskEntry,
    MaskSet,
    group_to_instances,
    load_instance_boxes,
    remove_redundant,
    run_dual_branch,
)
from .errors import ConfigError, MattevalError
from .evalmap import (
    make_evaluator,
    make_patch_grid,
    normalize_minmax,
    nonref_metrics,
    oracle_prob_map,
    patch_discrepancy,
    pseudo_gt_map,
)
from .imgio import (
    load_alpha,
    load_evalmap,
    load_prob,
    load_rgb,
    load_segmask,
    save_alpha,
    save_evalmap,
    save_prob,
    save_rgb,
    save_segmask,
)
from .losses import LossFrame, masked_l1, masked_laplacian_loss, matting_total_loss, mqe_total_loss
from .manifest import load_manifest
from .metrics import conn_metric, dtssd, grad_metric, mad, mse
from .report import build_report, write_report
from .sampler import DropoutSpec, boundary_from_alpha, dropout_augment

EXIT_OK = 0
EXIT_FATAL = 1
EXIT_PARTIAL = 2
EXIT_USAGE = 64

log = logging.getLogger("matteval.cli")


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on usage problems; this CLI reserves 2 for partial
    success, so usage errors are remapped to 64."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def builtin_config() -> dict:
    return {
        "delta": defaults.DELTA,
        "grid_rows": defaults.GRID_ROWS,
        "grid_cols": defaults.GRID_COLS,
        "w_mad": defaults.D_WEIGHT_MAD,
        "w_grad": defaults.D_WEIGHT_GRAD,
        "blur_kernel": defaults.BLUR_KERNEL,
        "blur_sigma": defaults.BLUR_SIGMA,
        "band_width": defaults.BAND_WIDTH,
        "binarize_threshold": defaults.BINARIZE_THRESHOLD,
        "lambda_eval": defaults.LAMBDA_EVAL,
        "focal_gamma": defaults.FOCAL_GAMMA,
        "focal_alpha": defaults.FOCAL_ALPHA,
        "levels": defaults.PYRAMID_LEVELS,
        "epsilon": defaults.LOSS_EPSILON,
        "coverage_threshold": defaults.COVERAGE_THRESHOLD,
        "assign_threshold": defaults.ASSIGN_THRESHOLD,
        "min_area_fraction": defaults.MIN_AREA_FRACTION,
        "bins": defaults.CORRELATION_BINS,
        "window": defaults.WINDOW_SIZE,
        "n_refs": 1,
        "max_boundary_patches": defaults.MAX_BOUNDARY_PATCHES,
        "max_nonboundary_patches": defaults.MAX_NONBOUNDARY_PATCHES,
        "side_min": defaults.PATCH_SIDE_MIN,
        "side_max": defaults.PATCH_SIDE_MAX,
        "seed": 0,
    }


def _parse_grid(text: str):
    try:
        rows, cols = text.lower().split("x")
        rows, cols = int(rows), int(cols)
    except ValueError:
        raise argparse.ArgumentTypeError(f"grid must look like 7x7, got {text!r}")
    if rows < 1 or cols < 1:
        raise argparse.ArgumentTypeError("grid sides must be >= 1")
    return rows, cols


def _common_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False, allow_abbrev=False)
    common.add_argument("manifest", type=Path, help="sequence manifest JSON")

    g = common.add_argument_group("run options")
    g.add_argument("--out", type=Path, default=Path("."), help="output directory (default: %(default)s)")
    g.add_argument("--seed", type=int, default=0, help="base RNG seed (default: %(default)s)")
    g.add_argument("--threads", type=int, default=1, help="worker threads for per-frame work (default: %(default)s)")
    g.add_argument("--config", type=Path, default=None, help="JSON file of option overrides (between manifest defaults and explicit flags)")
    g.add_argument("--no-figures", action="store_true", help="skip rendering figures next to the report")
    g.add_argument("--no-timestamps", action="store_true", help="omit generated_at so reports are byte-reproducible")
    g.add_argument(
        "--alpha-field",
        choices=("v", "i"),
        default="v",
        help="which manifest alpha a single-branch command reads (default: %(default)s)",
    )
    g.add_argument(
        "--evaluator",
        default="auto",
        help="error-probability source: auto | oracle | manifest | dir:PATH (default: %(default)s)",
    )

    t = common.add_argument_group("tunables (every constant, with its package default)")
    t.add_argument("--delta", type=float, default=defaults.DELTA, help="reliability threshold on normalized patch discrepancy (default: %(default)s)")
    t.add_argument("--grid", type=_parse_grid, default=(defaults.GRID_ROWS, defaults.GRID_COLS), metavar="RxC", help="patch grid rows x cols (default: 7x7)")
    t.add_argument("--w-mad", dest="w_mad", type=float, default=defaults.D_WEIGHT_MAD, help="MAD weight in patch discrepancy (default: %(default)s)")
    t.add_argument("--w-grad", dest="w_grad", type=float, default=defaults.D_WEIGHT_GRAD, help="Grad weight in patch discrepancy (default: %(default)s)")
    t.add_argument("--blur-kernel", type=int, default=defaults.BLUR_KERNEL, help="fusion mask blur kernel size, 9 means 9x9 (default: %(default)s)")
    t.add_argument("--blur-sigma", type=float, default=defaults.BLUR_SIGMA, help="fusion mask blur sigma (default: %(default)s)")
    t.add_argument("--band-width", type=int, default=defaults.BAND_WIDTH, help="boundary band half-width in pixels (default: %(default)s)")
    t.add_argument("--binarize-threshold", type=float, default=defaults.BINARIZE_THRESHOLD, help="error probability below this counts as reliable (default: %(default)s)")
    t.add_argument("--lambda-eval", dest="lambda_eval", type=float, default=defaults.LAMBDA_EVAL, help="weight of the guidance term in the total loss (default: %(default)s)")
    t.add_argument("--focal-gamma", type=float, default=defaults.FOCAL_GAMMA, help="focal loss focusing exponent (default: %(default)s)")
    t.add_argument("--focal-alpha", type=float, default=defaults.FOCAL_ALPHA, help="focal loss class-1 weight (default: %(default)s)")
    t.add_argument("--levels", type=int, default=defaults.PYRAMID_LEVELS, help="pyramid levels; level s weighs 2^(s-1)/levels (default: %(default)s)")
    t.add_argument("--epsilon", type=float, default=defaults.LOSS_EPSILON, help="denominator guard in masked losses (default: %(default)s)")
    t.add_argument("--coverage-threshold", type=float, default=defaults.COVERAGE_THRESHOLD, help="mask removed when covered beyond this fraction (default: %(default)s)")
    t.add_argument("--assign-threshold", type=float, default=defaults.ASSIGN_THRESHOLD, help="min area fraction inside a box to join an instance (default: %(default)s)")
    t.add_argument("--min-area-fraction", type=float, default=defaults.MIN_AREA_FRACTION, help="instances below this fraction of box area are dropped (default: %(default)s)")
    t.add_argument("--bins", type=int, default=defaults.CORRELATION_BINS, help="correlation bins over [0, 1] (default: %(default)s)")
    t.add_argument("--window", type=int, default=defaults.WINDOW_SIZE, help="training window length in frames (default: %(default)s)")
    t.add_argument("--n-refs", dest="n_refs", type=int, default=1, help="reference frames sampled outside the window (default: %(default)s)")
    t.add_argument("--max-boundary-patches", type=int, default=defaults.MAX_BOUNDARY_PATCHES, help="dropout draws 0..this many boundary patches (default: %(default)s)")
    t.add_argument("--max-nonboundary-patches", type=int, default=defaults.MAX_NONBOUNDARY_PATCHES, help="dropout draws 0..this many non-boundary patches (default: %(default)s)")
    t.add_argument("--side-min", type=int, default=defaults.PATCH_SIDE_MIN, help="smallest dropout patch side in pixels (default: %(default)s)")
    t.add_argument("--side-max", type=int, default=defaults.PATCH_SIDE_MAX, help="largest dropout patch side in pixels (default: %(default)s)")
    return common


def build_parser():
    common = _common_parser()
    parser = _Parser(prog="matteval", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter, allow_abbrev=False)
    parser.add_argument("--version", action="version", version=f"matteval {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    def add(name, help_text, func):
        p = sub.add_parser(name, parents=[common], help=help_text, description=help_text, allow_abbrev=False)
        p.set_defaults(func=func)
        return p

    add("evaluate", "reference metrics (MAD/MSE/Grad/Conn/dtSSD) of a matte against ground truth", cmd_evaluate)
    add("pseudo-gt", "patch-level pseudo ground truth evaluation maps from matte + reference", cmd_pseudo_gt)
    add("fuse", "dual-branch fusion of video and image mattes guided by evaluation maps", cmd_fuse)
    add("nonref", "non-reference ERR/MER/BER rates from evaluation maps and segmentation", cmd_nonref)
    add("loss", "training loss values (and components) over a manifest window", cmd_loss)
    add("augment", "seeded reference-frame patch dropout; writes frames plus a replayable patch log", cmd_augment)
    add("curate-masks", "mask redundancy removal and instance grouping with detector boxes", cmd_curate)
    add("analyze", "binned correlation between predicted error probabilities and true discrepancies", cmd_analyze)
    return parser, common


def _explicit_dests(common: argparse.ArgumentParser, argv) -> set:
    """Which option dests were given literally on the command line.

    Sound because abbreviations are disabled; an option is explicit iff its
    exact string (or string=value) appears in argv.
    """
    found = set()
    for action in common._actions:  # noqa: SLF001 - argparse has no public action listing
        for opt in action.option_strings:
            if any(tok == opt or tok.startswith(opt + "=") for tok in argv):
                found.add(action.dest)
    return found


_CLI_ONLY = {"manifest", "out", "config", "no_figures", "no_timestamps", "alpha_field", "evaluator", "threads", "help"}


def merge_config(args, manifest, common, argv) -> dict:
    cfg = builtin_config()

    for key, value in manifest.defaults.items():
        cfg[key] = value

    if args.config is not None:
        try:
            overrides = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"--config {args.config}: {exc}") from exc
        if not isinstance(overrides, dict):
            raise ConfigError(f"--config {args.config}: expected a JSON object")
        for key, value in overrides.items():
            if key not in cfg:
                raise ConfigError(f"--config {args.config}: unknown option {key!r}")
            cfg[key] = value

    explicit = _explicit_dests(common, argv)
    for dest in explicit - _CLI_ONLY:
        if dest == "grid":
            cfg["grid_rows"], cfg["grid_cols"] = args.grid
        elif dest in cfg:
            cfg[dest] = getattr(args, dest)
    return cfg


def _config_echo(cfg: dict, args) -> dict:
    echo = dict(cfg)
    echo["threads"] = args.threads
    echo["alpha_field"] = args.alpha_field
    echo["evaluator"] = args.evaluator
    return echo


def _frame_map(fn, items, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _alpha_path(frame, field: str):
    return frame.alpha_v_path if field == "v" else frame.alpha_i_path


def _prob_path(frame, field: str):
    return frame.prob_v_path if field == "v" else frame.prob_i_path


def _eval_path(frame, field: str):
    return frame.eval_v_path if field == "v" else frame.eval_i_path


def _pick_evaluator(spec: str, manifest, need_branches=("v", "i")):
    """Resolve --evaluator auto against what the manifest provides."""
    if spec != "auto":
        return make_evaluator(spec)
    frames = manifest.frames
    if frames and all(all(_prob_path(f, b) for b in need_branches) for f in frames):
        return make_evaluator("manifest")
    if frames and all(f.gt_path for f in frames):
        return make_evaluator("oracle")
    if not frames:
        return make_evaluator("oracle")
    raise ConfigError(
        "--evaluator auto needs either prob paths for all frames or gt paths for all frames"
    )


def _finish(args, tool: str, cfg: dict, records, skipped, warnings=(), extra=None) -> int:
    report = build_report(
        tool=tool,
        config=_config_echo(cfg, args),
        frames=records,
        skipped=skipped,
        warnings=warnings,
        extra=extra,
        timestamps=not args.no_timestamps,
    )
    args.out.mkdir(parents=True, exist_ok=True)
    write_report(args.out / f"{tool.replace('-', '_')}_report.json", report)
    return EXIT_PARTIAL if skipped else EXIT_OK


# --- subcommands --------------------------------------------------------


def cmd_evaluate(args, argv) -> int:
    manifest = load_manifest(args.manifest)
    common_parser = args._common
    cfg = merge_config(args, manifest, common_parser, argv)

    def one(frame):
        pred_path = _alpha_path(frame, args.alpha_field)
        if pred_path is None or frame.gt_path is None:
            return ("skip", {"frame_id": frame.frame_id, "reason": "needs alpha and gt paths"})
        try:
            pred = load_alpha(pred_path)
            gt = load_alpha(frame.gt_path)
            record = {
                "frame_id": frame.frame_id,
                "mad": mad(pred, gt),
                "mse": mse(pred, gt),
                "grad": grad_metric(pred, gt),
                "conn": conn_metric(pred, gt),
            }
            return ("ok", record, pred, gt)
        except Exception as exc:  # noqa: BLE001 - frame isolation
            return ("skip", {"frame_id": frame.frame_id, "reason": str(exc)})

    results = _frame_map(one, manifest.frames, args.threads)
    records, skipped, alphas = [], [], {}
    for i, res in enumerate(results):
        if res[0] == "ok":
            records.append(res[1])
            alphas[i] = (res[2], res[3])
        else:
            skipped.append(res[1])

    steps = []
    for i in sorted(alphas):
        if i - 1 in alphas and alphas[i][0].shape == alphas[i - 1][0].shape:
            steps.append(
                dtssd([alphas[i - 1][0], alphas[i][0]], [alphas[i - 1][1], alphas[i][1]])
            )
    extra = {"dtssd": float(np.mean(steps)) if steps else None, "dtssd_steps": len(steps)}

    figures = []
    if not args.no_figures and records:
        from .figures import save_series_figure

        args.out.mkdir(parents=True, exist_ok=True)
        figures.append(save_series_figure(records, ["mad", "mse", "grad", "conn"], "reference metrics per frame", "score (x1000)", args.out / "evaluate_metrics.png").name)
    extra["figures"] = figures
    return _finish(args, "evaluate", cfg, records, skipped, manifest.load_warnings, extra)


def cmd_pseudo_gt(args, argv) -> int:
    manifest = load_manifest(args.manifest)
    cfg = merge_config(args, manifest, args._common, argv)
    args.out.mkdir(parents=True, exist_ok=True)

    def one(frame):
        pred_path = _alpha_path(frame, args.alpha_field)
        if pred_path is None or frame.gt_path is None:
            return ("skip", {"frame_id": frame.frame_id, "reason": "needs alpha and gt paths"})
        try:
            pred = load_alpha(pred_path)
            gt = load_alpha(frame.gt_path)
            grid = make_patch_grid(pred.shape[0], pred.shape[1], cfg["grid_rows"], cfg["grid_cols"])
            scores = patch_discrepancy(pred, gt, grid, cfg["w_mad"], cfg["w_grad"])
            norm = normalize_minmax(scores)
            pseudo = pseudo_gt_map(pred, gt, cfg["delta"], grid)
            prob = oracle_prob_map(pred, gt, grid)
            save_evalmap(args.out / f"{frame.frame_id}_pseudo.png", pseudo)
            save_prob(args.out / f"{frame.frame_id}_prob.pfm", prob)
            record = {
                "frame_id": frame.frame_id,
                "reliable_fraction": float(np.count_nonzero(pseudo)) / pseudo.size,
                "unreliable_cells": int(np.count_nonzero(norm >= cfg["delta"])),
                "outputs": {
                    "pseudo": f"{frame.frame_id}_pseudo.png",
                    "prob": f"{frame.frame_id}_prob.pfm",
                },
            }
            return ("ok", record)
        except Exception as exc:  # noqa: BLE001
            return ("skip", {"frame_id": frame.frame_id, "reason": str(exc)})

    results = _frame_map(one, manifest.frames, args.threads)
    records = [r[1] for r in results if r[0] == "ok"]
    skipped = [r[1] for r in results if r[0] == "skip"]
    return _finish(args, "pseudo-gt", cfg, records, skipped, manifest.load_warnings)


def cmd_fuse(args, argv) -> int:
    manifest = load_manifest(args.manifest)
    cfg = merge_config(args, manifest, args._common, argv)
    evaluator = _pick_evaluator(args.evaluator, manifest)
    config = DualBranchConfig(
        binarize_threshold=cfg["binarize_threshold"],
        blur_kernel=cfg["blur_kernel"],
        blur_sigma=cfg["blur_sigma"],
        band_width=cfg["band_width"],
        out_dir=args.out,
    )
    summary = run_dual_branch(manifest, evaluator, config)
    extra = {k: v for k, v in summary.items() if k not in ("frames", "skipped")}
    extra["evaluator"] = evaluator.name
    return _finish(args, "fuse", cfg, summary["frames"], summary["skipped"], manifest.load_warnings, extra)


def cmd_nonref(args, argv) -> int:
    manifest = load_manifest(args.manifest)
    cfg = merge_config(args, manifest, args._common, argv)
    evaluator = None

    def one(frame):
        try:
            if frame.seg_path is None:
                return ("skip", {"frame_id": frame.frame_id, "reason": "needs seg_path"})
            seg = load_segmask(frame.seg_path)
            ev_path = _eval_path(frame, args.alpha_field)
            if ev_path is not None:
                eval_map = load_evalmap(ev_path)
            else:
                prob_path = _prob_path(frame, args.alpha_field)
                if prob_path is not None:
                    prob = load_prob(prob_path)
                else:
                    pred_path = _alpha_path(frame, args.alpha_field)
                    if pred_path is None or frame.gt_path is None:
                        return ("skip", {"frame_id": frame.frame_id, "reason": "needs eval/prob paths or alpha+gt for the oracle"})
                    pred = load_alpha(pred_path)
                    gt = load_alpha(frame.gt_path)
                    grid = make_patch_grid(pred.shape[0], pred.shape[1], cfg["grid_rows"], cfg["grid_cols"])
                    prob = oracle_prob_map(pred, gt, grid)
                eval_map = binarize_prob(prob, cfg["binarize_threshold"])
            nr = nonref_metrics(eval_map, seg, cfg["band_width"])
            record = {"frame_id": frame.frame_id, "err": nr.err, "mer": nr.mer, "ber": nr.ber}
            if nr.warnings:
                record["notes"] = list(nr.warnings)
            return ("ok", record)
        except Exception as exc:  # noqa: BLE001
            return ("skip", {"frame_id": frame.frame_id, "reason": str(exc)})

    results = _frame_map(one, manifest.frames, args.threads)
    records = [r[1] for r in results if r[0] == "ok"]
    skipped = [r[1] for r in results if r[0] == "skip"]

    figures = []
    if not args.no_figures and records:
        from .figures import save_series_figure

        args.out.mkdir(parents=True, exist_ok=True)
        figures.append(save_series_figure(records, ["err", "mer", "ber"], "non-reference rates per frame", "percent", args.out / "nonref_rates.png").name)
    return _finish(args, "nonref", cfg, records, skipped, manifest.load_warnings, {"figures": figures})


def cmd_loss(args, argv) -> int:
    manifest = load_manifest(args.manifest)
    cfg = merge_config(args, manifest, args._common, argv)

    loss_frames, records, skipped = [], [], []
    for frame in manifest.frames:
        fid = frame.frame_id
        try:
            pred_path = _alpha_path(frame, args.alpha_field)
            if pred_path is None or frame.gt_path is None:
                raise FileNotFoundError("needs alpha and gt paths")
            pred = load_alpha(pred_path)
            gt = load_alpha(frame.gt_path)

            ev_path = _eval_path(frame, args.alpha_field)
            prob_path = _prob_path(frame, args.alpha_field)
            p0 = load_prob(prob_path) if prob_path is not None else None
            if ev_path is not None:
                region = load_evalmap(ev_path)
            elif p0 is not None:
                region = binarize_prob(p0, cfg["binarize_threshold"])
            else:
                grid = make_patch_grid(pred.shape[0], pred.shape[1], cfg["grid_rows"], cfg["grid_cols"])
                region = pseudo_gt_map(pred, gt, cfg["delta"], grid)

            loss_frames.append(LossFrame(pred=pred, gt=gt, region=region, p0=p0))
            record = {
                "frame_id": fid,
                "l1": masked_l1(pred, gt, region, cfg["epsilon"]).value,
                "laplacian": masked_laplacian_loss(pred, gt, region, cfg["epsilon"], cfg["levels"]).value,
                "reliable_fraction": float(np.count_nonzero(region)) / region.size,
            }
            if p0 is not None:
                mqe = mqe_total_loss(1.0 - p0, region, cfg["focal_gamma"], cfg["focal_alpha"])
                record["mqe"] = mqe.value
                record["focal"] = mqe.components["focal"]
                record["dice"] = mqe.components["dice"]
            records.append(record)
        except Exception as exc:  # noqa: BLE001
            skipped.append({"frame_id": fid, "reason": str(exc)})

    extra = {}
    if loss_frames:
        total = matting_total_loss(loss_frames, cfg["lambda_eval"], cfg["epsilon"], cfg["levels"])
        extra = {"matting_total": total.value, "components": total.components}

    figures = []
    if not args.no_figures and extra.get("components"):
        from .figures import save_components_figure

        args.out.mkdir(parents=True, exist_ok=True)
        figures.append(save_components_figure(extra["components"], "matting loss components", args.out / "loss_components.png").name)
    extra["figures"] = figures
    return _finish(args, "loss", cfg, records, skipped, manifest.load_warnings, extra)


def cmd_augment(args, argv) -> int:
    manifest = load_manifest(args.manifest)
    cfg = merge_config(args, manifest, args._common, argv)
    args.out.mkdir(parents=True, exist_ok=True)

    def one(indexed):
        index, frame = indexed
        fid = frame.frame_id
        try:
            pred_path = _alpha_path(frame, args.alpha_field)
            if frame.rgb_path is None or pred_path is None:
                raise FileNotFoundError("needs rgb and alpha paths")
            rgb = load_rgb(frame.rgb_path)
            alpha = load_alpha(pred_path)
            band = boundary_from_alpha(alpha, cfg["binarize_threshold"], cfg["band_width"])
            spec = DropoutSpec(
                max_boundary_patches=cfg["max_boundary_patches"],
                max_nonboundary_patches=cfg["max_nonboundary_patches"],
                side_min=cfg["side_min"],
                side_max=cfg["side_max"],
                seed=cfg["seed"],
                stream=index,
            )
            out_rgb, out_alpha, patches = dropout_augment(rgb, alpha, band, spec)
            save_rgb(args.out / f"{fid}_rgb.png", out_rgb)
            save_alpha(args.out / f"{fid}_alpha.pfm", out_alpha)
            record = {
                "frame_id": fid,
                "stream": index,
                "patch_count": len(patches),
                "patches": [asdict(p) for p in patches],
                "outputs": {"rgb": f"{fid}_rgb.png", "alpha": f"{fid}_alpha.pfm"},
            }
            return ("ok", record)
        except Exception as exc:  # noqa: BLE001
            return ("skip", {"frame_id": fid, "reason": str(exc)})

    results = _frame_map(one, list(enumerate(manifest.frames)), args.threads)
    records = [r[1] for r in results if r[0] == "ok"]
    skipped = [r[1] for r in results if r[0] == "skip"]
    return _finish(args, "augment", cfg, records, skipped, manifest.load_warnings)


def cmd_curate(args, argv) -> int:
    manifest = load_manifest(args.manifest)
    cfg = merge_config(args, manifest, args._common, argv)
    boxes_by_frame = load_instance_boxes(manifest.boxes_path) if manifest.boxes_path else {}
    args.out.mkdir(parents=True, exist_ok=True)

    records, skipped = [], []
    for frame in manifest.frames:
        fid = frame.frame_id
        if not frame.mask_paths:
            skipped.append({"frame_id": fid, "reason": "no mask_paths in manifest"})
            continue
        try:
            entries = tuple(
                MaskEntry(mask_id=Path(p).stem, mask=load_segmask(p)) for p in frame.mask_paths
            )
            mask_set = MaskSet(entries=entries)
            kept = remove_redundant(mask_set, cfg["coverage_threshold"])
            removed = sorted(set(mask_set.ids()) - set(kept.ids()))
            record = {
                "frame_id": fid,
                "input_masks": len(mask_set),
                "kept_masks": len(kept),
                "removed_ids": removed,
            }
            if fid in boxes_by_frame:
                instances, discarded = group_to_instances(
                    kept, boxes_by_frame[fid], cfg["assign_threshold"], cfg["min_area_fraction"]
                )
                outputs = {}
                for box_id in sorted(instances):
                    name = f"{fid}_inst_{box_id}.png"
                    save_segmask(args.out / name, instances[box_id])
                    outputs[box_id] = name
                record["instances"] = len(instances)
                record["discarded_ids"] = sorted(discarded)
                record["outputs"] = outputs
            else:
                outputs = {}
                for entry in kept.entries:
                    name = f"{fid}_mask_{entry.mask_id}.png"
                    save_segmask(args.out / name, entry.mask)
                    outputs[entry.mask_id] = name
                record["outputs"] = outputs
            records.append(record)
        except Exception as exc:  # noqa: BLE001
            skipped.append({"frame_id": fid, "reason": str(exc)})
    return _finish(args, "curate-masks", cfg, records, skipped, manifest.load_warnings)


def cmd_analyze(args, argv) -> int:
    manifest = load_manifest(args.manifest)
    cfg = merge_config(args, manifest, args._common, argv)

    pairs, records, skipped = [], [], []
    for frame in manifest.frames:
        fid = frame.frame_id
        try:
            pred_path = _alpha_path(frame, args.alpha_field)
            if pred_path is None or frame.gt_path is None:
                raise FileNotFoundError("needs alpha and gt paths")
            pred = load_alpha(pred_path)
            gt = load_alpha(frame.gt_path)
            grid = make_patch_grid(pred.shape[0], pred.shape[1], cfg["grid_rows"], cfg["grid_cols"])
            scores = normalize_minmax(patch_discrepancy(pred, gt, grid, cfg["w_mad"], cfg["w_grad"]))
            prob_path = _prob_path(frame, args.alpha_field)
            if prob_path is not None:
                prob = load_prob(prob_path)
            else:
                prob = oracle_prob_map(pred, gt, grid)
            frame_pairs = collect_pairs([prob], [scores], grid)
            pairs.extend(frame_pairs)
            records.append({"frame_id": fid, "pairs": len(frame_pairs)})
        except Exception as exc:  # noqa: BLE001
            skipped.append({"frame_id": fid, "reason": str(exc)})

    extra = {}
    figures = []
    if pairs:
        binned = bin_and_correlate(pairs, cfg["bins"])
        args.out.mkdir(parents=True, exist_ok=True)
        write_plot_csv(binned, args.out / "analyze_bins.csv")
        extra = binned.to_dict()
        extra.pop("bins")
        extra["csv"] = "analyze_bins.csv"
        if not args.no_figures:
            from .figures import save_correlation_figure

            figures.append(save_correlation_figure(binned, args.out / "analyze_correlation.png").name)
    extra["figures"] = figures
    return _finish(args, "analyze", cfg, records, skipped, manifest.load_warnings, extra)


def main(argv=None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    argv = list(sys.argv[1:]) if argv is None else list(argv)
    parser, common = build_parser()
    args = parser.parse_args(argv)
    args._common = common
    try:
        return args.func(args, argv)
    except (MattevalError, FileNotFoundError, ValueError, OSError) as exc:
        print(f"matteval {args.subcommand}: error: {exc}", file=sys.stderr)
        return EXIT_FATAL


if __name__ == "__main__":
    sys.exit(main())
