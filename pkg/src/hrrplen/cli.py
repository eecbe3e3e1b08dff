"""Command-line entry point.

Subcommands: simulate, encode, train, eval, compare, gradcheck.  Every
command is driven by one YAML config (see config.RunConfig for the schema
and defaults); --seed/--out/--snr override the corresponding fields.

Exit codes: 0 success, 2 configuration error, 3 data or runtime error,
4 verification failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bench import MreReport, export_artifacts, mean_relative_error, run_comparison
from .config import RunConfig
from .errors import ConfigError, DegenerateSequenceError, HrrplenError
from .estimators import Cnn1dRegressor, GafResNetRegressor, encode_profiles, scale_profiles
from .gaf import encode
from .nn import (
    build_cnn1d,
    build_gaf_resnet_toy,
    build_model,
    grad_check,
    load_checkpoint,
    predict as nn_predict,
    save_checkpoint,
)
from .simulate import load_dataset, save_dataset
from .threshold import best_k_estimate, DEFAULT_K_GRID

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3
EXIT_VERIFY = 4

GRADCHECK_TOLERANCE = 1e-4


def _load_config(args) -> RunConfig:
    cfg = RunConfig.from_yaml(args.config) if args.config else RunConfig()
    if getattr(args, "out", None):
        cfg.out_dir = args.out
    if getattr(args, "seed", None) is not None:
        cfg.seeds.base = args.seed
    if getattr(args, "snr", None) is not None:
        cfg.snr_db = list(args.snr)
    return cfg


def cmd_simulate(args) -> int:
    cfg = _load_config(args)
    radar = cfg.radar_config()
    geometries = cfg.geometry_list()
    out_root = Path(cfg.out_dir)
    for snr_db in cfg.snr_db:
        target = out_root if len(cfg.snr_db) == 1 else out_root / f"snr_{snr_db:g}"
        meta = save_dataset(
            target,
            geometries,
            cfg.theta_grid(),
            cfg.phi_grid(),
            radar,
            snr_db,
            split_seed=cfg.seeds.base,
        )
        labels = [
            float(row[1])
            for row in list(csv.reader((target / "labels.csv").open()))[1:]
        ]
        print(
            f"simulate: wrote {len(labels)} samples to {target} "
            f"(labels {min(labels):.2f}..{max(labels):.2f} m, snr={snr_db:g} dB, "
            f"sha256={meta['sha256'][:16]})"
        )
    return EXIT_OK


def cmd_encode(args) -> int:
    split, meta = load_dataset(args.dataset)
    samples = split.all_samples()
    side = args.image_side
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)

    profile_len = len(samples[0])
    if side > profile_len:
        print(f"error: config: image_side {side} exceeds profile length {profile_len}")
        return EXIT_CONFIG

    degenerate = []
    index_rows = []
    order = meta["split_indices"]
    canonical = [None] * len(samples)
    for split_name in ("train", "val", "test"):
        for j, seq in zip(order[split_name], getattr(split, split_name)):
            canonical[j] = (j, split_name, seq)
    for j, split_name, seq in canonical:
        try:
            image = encode(seq, side)
        except DegenerateSequenceError:
            degenerate.append(j)
            continue
        name = f"gaf_{j:06d}.npy"
        np.save(out / name, image)
        index_rows.append((f"{j:06d}", name, split_name))
    if degenerate:
        print(f"error: degenerate profiles (constant amplitude): {degenerate}")
        return EXIT_RUNTIME
    with open(out / "index.csv", "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["sample_id", "file", "split"])
        writer.writerows(index_rows)
    print(f"encode: wrote {len(index_rows)} images of side {side} to {out}")
    return EXIT_OK


def _fit_estimator(cfg: RunConfig, method: str, split):
    x_train, y_train = split.train_arrays()
    x_val, y_val = split.val_arrays()
    x_test, y_test = split.test_arrays()
    common = dict(
        learning_rate=cfg.train.learning_rate,
        epochs=cfg.train.epochs,
        batch_size=cfg.train.batch_size,
        optimizer=cfg.train.optimizer,
        seed=cfg.seeds.runs[0],
        dtype=cfg.train.dtype,
    )
    if method == "cnn1d":
        est = Cnn1dRegressor(**common)
    elif method == "gaf_resnet":
        est = GafResNetRegressor(image_side=cfg.model.image_side, **common)
    else:
        raise ConfigError(f"unknown trainable method {method!r}")
    est.fit(x_train, y_train, x_val, y_val, x_test, y_test)
    return est


def cmd_train(args) -> int:
    cfg = _load_config(args)
    split, meta = load_dataset(args.dataset)
    est = _fit_estimator(cfg, args.method, split)
    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)

    ckpt_path = out / f"{args.method}.ckpt.npz"
    extra = {"method": args.method, "dataset_sha256": meta["sha256"]}
    if args.method == "gaf_resnet":
        extra["image_side"] = cfg.model.image_side
    save_checkpoint(est.model_, ckpt_path, extra=extra)
    report_path = out / f"{args.method}.train_report.json"
    report_path.write_text(json.dumps(est.report_.to_dict(), indent=2) + "\n")
    final = est.report_.train_losses[-1]
    print(
        f"train: {args.method} for {cfg.train.epochs} epochs, "
        f"final train MSE {final:.4g}; wrote {ckpt_path} and {report_path}"
    )
    return EXIT_OK


def _eval_checkpoint(args, split) -> MreReport:
    model, extra = load_checkpoint(args.checkpoint)
    x_test, y_test = split.test_arrays()
    if extra.get("method") == "gaf_resnet":
        inputs = encode_profiles(x_test, int(extra["image_side"]))
    else:
        inputs = scale_profiles(x_test)[:, :, None]
    preds = nn_predict(model, inputs.astype(model.dtype))
    mre = mean_relative_error(preds, y_test)
    snr = split.test[0].snr_db
    return MreReport(
        method=extra.get("method", "checkpoint"),
        snr_db=float("nan") if snr is None else snr,
        seed=-1,
        mre_percent=mre,
        pairs=[(float(p), float(t)) for p, t in zip(preds, y_test)],
    )


def cmd_eval(args) -> int:
    cfg = _load_config(args)
    split, _ = load_dataset(args.dataset)
    if args.method == "threshold":
        x_test, y_test = split.test_arrays()
        best = best_k_estimate(
            x_test,
            y_test,
            split.test[0].range_resolution,
            k_grid=cfg.threshold.k_grid or DEFAULT_K_GRID,
            noise_window=cfg.threshold.noise_window,
        )
        snr = split.test[0].snr_db
        report = MreReport(
            method="threshold",
            snr_db=float("nan") if snr is None else snr,
            seed=-1,
            mre_percent=best["mre_percent"],
            pairs=[(float(p), float(t)) for p, t in zip(best["predictions"], y_test)],
        )
        print(f"eval: threshold best K={best['k']:g}")
    elif args.checkpoint:
        report = _eval_checkpoint(args, split)
    else:
        raise ConfigError("eval needs --checkpoint or --method threshold")

    out = Path(cfg.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / f"mre_{report.method}.json"
    path.write_text(
        json.dumps(
            {
                "method": report.method,
                "snr_db": report.snr_db,
                "mre_percent": report.mre_percent,
                "pairs": report.pairs,
            },
            indent=2,
        )
        + "\n"
    )
    print(f"eval: {report.method} MRE {report.mre_percent:.2f}% ({len(report.pairs)} samples); wrote {path}")
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _load_config(args)
    result = run_comparison(cfg)
    files = export_artifacts(result, cfg.out_dir)
    print(f"compare: wrote {', '.join(files)} to {cfg.out_dir}")
    for row in result.table.rows:
        if row.seed == "median":
            print(f"  {row.method:<11} snr={row.snr_db:g} dB  median MRE {row.mre_percent:.2f}%")
    if result.meta["failures"]:
        print(f"compare: {len(result.meta['failures'])} cell(s) failed; see run_meta.json")
        return EXIT_RUNTIME
    return EXIT_OK


def cmd_gradcheck(args) -> int:
    checks = [
        ("cnn1d(1x32)", build_model(build_cnn1d(32, init_seed=0))),
        ("gaf_resnet_toy(1x16x16)", build_model(build_gaf_resnet_toy(16, init_seed=0))),
    ]
    worst = 0.0
    for name, model in checks:
        err = grad_check(model, eps=1e-4, samples=args.samples, seed=0)
        worst = max(worst, err)
        print(f"gradcheck: {name} max relative error {err:.3e}")
    print(f"gradcheck: overall max relative error {worst:.3e} (tolerance {GRADCHECK_TOLERANCE:g})")
    if worst >= GRADCHECK_TOLERANCE:
        print("gradcheck: FAILED")
        return EXIT_VERIFY
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="hrrplen",
        description="Radial-length estimation benchmark on synthetic HRRP data",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, config=True):
        if config:
            p.add_argument("--config", help="YAML run configuration")
        p.add_argument("--out", help="override the output directory")
        p.add_argument("--seed", type=int, help="override seeds.base")
        p.add_argument("--snr", type=float, nargs="+", help="override the SNR list (dB)")

    p = sub.add_parser("simulate", help="synthesize and write a labeled dataset")
    add_common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("encode", help="encode a dataset's profiles as GAF images")
    p.add_argument("--dataset", required=True, help="dataset directory from 'simulate'")
    p.add_argument("--image-side", type=int, default=64, dest="image_side")
    p.add_argument("--out", required=True, help="output image directory")
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("train", help="train one network on a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--method", choices=["cnn1d", "gaf_resnet"], required=True)
    add_common(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint or the threshold method")
    p.add_argument("--dataset", required=True)
    p.add_argument("--checkpoint", help="checkpoint .npz from 'train'")
    p.add_argument("--method", choices=["threshold"], help="evaluate the threshold baseline")
    add_common(p)
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compare", help="run the full three-method comparison")
    add_common(p)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("gradcheck", help="verify analytic gradients against finite differences")
    p.add_argument("--samples", type=int, default=60, help="parameters sampled per model")
    p.set_defaults(func=cmd_gradcheck)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: config: {exc}")
        return EXIT_CONFIG
    except (TypeError, ValueError) as exc:
        # bad field types in an otherwise well-formed config
        print(f"error: config: {exc}")
        return EXIT_CONFIG
    except FileNotFoundError as exc:
        print(f"error: missing file: {exc}")
        return EXIT_RUNTIME
    except (HrrplenError, OSError) as exc:
        print(f"error: {type(exc).__name__}: {exc}")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
