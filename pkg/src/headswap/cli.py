"""Command-line surface: gen / swap / mask / ablate / eval.

Exit codes: 0 on success, 1 for usage errors (bad flags, malformed
attribute tuples, bad config content), 2 for runtime errors (missing
files, failed IO).
"""

from __future__ import annotations

import argparse
import sys
import time
from dataclasses import replace
from pathlib import Path

from .diffusion import EmpiricalNoisePredictor, invert_trajectory, make_schedule
from .experiment import (
    METRICS_FILENAME,
    RunConfig,
    evaluate_swap,
    format_summary,
    read_metrics,
    run_experiment,
    summarize,
    write_metrics,
)
from .hid import body_condition, compose_head_condition, run_headswap
from .imaging import minmax_normalize, overlay_heatmap, write_gray, write_image, write_mask
from .iomask import VARIANTS, build_iomask, io_map
from .synthgen import AttributeSpec, enumerate_dataset, oracle_swap, render_avatar

CONFIG_KEYS = ("T", "w", "tau", "sigma", "edit_fraction", "variant", "seed")
_CONFIG_PARSERS = {
    "T": int,
    "w": float,
    "tau": float,
    "sigma": float,
    "edit_fraction": float,
    "variant": str,
    "seed": int,
}


class UsageError(Exception):
    """Bad invocation: maps to exit code 1."""


def parse_attrs(text: str, flag: str) -> AttributeSpec:
    parts = text.split(",")
    if len(parts) != 5:
        raise UsageError(
            f"{flag}: expected 5 comma-separated integers "
            "(skin_tone,hair_style,hair_color,clothing_color,head_tilt), "
            f"got {text!r}"
        )
    try:
        values = [int(p) for p in parts]
    except ValueError:
        raise UsageError(f"{flag}: non-integer attribute in {text!r}") from None
    try:
        return AttributeSpec.from_ints(values)
    except ValueError as exc:
        raise UsageError(f"{flag}: {exc}") from None


def read_config_file(path: str) -> dict:
    """Parse flat 'key = value' lines; unknown keys or bad values are usage errors."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise RuntimeError(f"cannot read config file {path}: {exc.strerror or exc}") from exc
    values = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if key not in CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown config key {key!r}")
        try:
            values[key] = _CONFIG_PARSERS[key](value)
        except ValueError:
            raise UsageError(f"{path}:{lineno}: bad value for {key!r}: {value!r}") from None
    if "variant" in values and values["variant"] not in VARIANTS:
        raise UsageError(f"{path}: variant must be one of {VARIANTS}")
    return values


def _merge_run_config(args) -> RunConfig:
    """defaults <- config file <- explicit CLI flags."""
    values = {}
    if getattr(args, "config", None):
        values.update(read_config_file(args.config))
    for key in CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    if "variant" in values and values["variant"] not in VARIANTS:
        raise UsageError(f"--variant must be one of {VARIANTS}")
    try:
        cfg = RunConfig(out_dir=Path(args.out), **values)
    except (ValueError, TypeError) as exc:
        raise UsageError(str(exc)) from None
    if getattr(args, "pairs", None) is not None:
        cfg = replace(cfg, pairs=args.pairs)
    return cfg


def _add_run_options(sub: argparse.ArgumentParser) -> None:
    sub.add_argument("--config", help="flat 'key = value' settings file")
    sub.add_argument("--T", type=int, default=None, help="diffusion steps")
    sub.add_argument("--w", type=float, default=None, help="guidance scale")
    sub.add_argument("--tau", type=float, default=None, help="mask threshold in [0,1]")
    sub.add_argument("--sigma", type=float, default=None, help="mask blur width, pixels")
    sub.add_argument(
        "--edit-fraction", dest="edit_fraction", type=float, default=None,
        help="fraction of the schedule at which editing begins",
    )
    sub.add_argument("--variant", choices=VARIANTS, default=None, help="edit-map variant")
    sub.add_argument("--seed", type=int, default=None, help="sampling seed")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="headswap",
        description="Head swapping on a procedural avatar corpus with exact evaluation.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    gen = subs.add_parser("gen", help="render the avatar corpus to PPM files")
    gen.add_argument("--out", required=True, help="output directory")

    swap = subs.add_parser("swap", help="run one head swap and write its artifacts")
    swap.add_argument("--body", required=True, help="body attributes a,b,c,d,e")
    swap.add_argument("--head", required=True, help="head attributes a,b,c,d,e")
    swap.add_argument("--out", required=True, help="output directory")
    _add_run_options(swap)

    mask = subs.add_parser("mask", help="emit only the edit map, mask, and overlay")
    mask.add_argument("--body", required=True, help="body attributes a,b,c,d,e")
    mask.add_argument("--head", required=True, help="head attributes a,b,c,d,e")
    mask.add_argument("--out", required=True, help="output directory")
    _add_run_options(mask)

    ablate = subs.add_parser("ablate", help="run all mask variants over sampled pairs")
    ablate.add_argument("--pairs", type=int, default=None, help="number of sampled pairs")
    ablate.add_argument("--out", required=True, help="output directory")
    _add_run_options(ablate)

    ev = subs.add_parser("eval", help="recompute summary means from metrics.jsonl")
    ev.add_argument("--out", required=True, help="directory containing metrics.jsonl")

    return parser


def _cmd_gen(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    lines = []
    for index, render in enumerate(enumerate_dataset()):
        name = f"avatar_{index:03d}.ppm"
        write_image(render.image, out_dir / name)
        fields = "\t".join(str(v) for v in render.attrs.to_ints())
        lines.append(f"{name}\t{fields}\n")
    (out_dir / "dataset.tsv").write_text("".join(lines), encoding="ascii")
    print(f"wrote {len(lines)} avatars and dataset.tsv to {out_dir}")
    return 0


def _swap_setup(args):
    body = parse_attrs(args.body, "--body")
    head = parse_attrs(args.head, "--head")
    cfg = _merge_run_config(args)
    sched = make_schedule(cfg.T)
    pred = EmpiricalNoisePredictor.from_renders(enumerate_dataset(), sched)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    return body, head, cfg, sched, pred, out_dir


def _cmd_swap(args) -> int:
    body, head, cfg, sched, pred, out_dir = _swap_setup(args)
    started = time.perf_counter()
    result = run_headswap(body, head, cfg.swap_config(), sched, pred)
    elapsed_ms = (time.perf_counter() - started) * 1e3

    write_image(render_avatar(body).image, out_dir / "body.ppm")
    write_image(render_avatar(head).image, out_dir / "head.ppm")
    write_image(oracle_swap(body, head).image, out_dir / "oracle.ppm")
    write_image(result.output, out_dir / "output.ppm")
    write_mask(result.mask, out_dir / "mask.pgm")
    normalized = minmax_normalize(result.io_map)
    write_gray(normalized, out_dir / "iomap.pgm")
    write_image(overlay_heatmap(result.trajectory[0], normalized), out_dir / "overlay.ppm")

    record = evaluate_swap("pair000", body, head, cfg.variant, result, elapsed_ms)
    write_metrics([record], out_dir / METRICS_FILENAME)
    if result.degenerate_mask:
        print("warning: edit mask is empty; output equals the body image")
    print(format_summary(summarize([record])))
    return 0


def _cmd_mask(args) -> int:
    body, head, cfg, sched, pred, out_dir = _swap_setup(args)
    swap_cfg = cfg.swap_config()
    body_image = render_avatar(body).image
    traj = invert_trajectory(body_image, body_condition(body), sched, pred)
    t_edit = swap_cfg.edit_start
    edit_map = io_map(
        traj, t_edit, compose_head_condition(head, body), body_condition(body),
        swap_cfg.mask, sched, pred,
    )
    mask = build_iomask(edit_map, swap_cfg.mask)
    normalized = minmax_normalize(edit_map)
    write_gray(normalized, out_dir / "iomap.pgm")
    write_mask(mask, out_dir / "mask.pgm")
    write_image(overlay_heatmap(body_image, normalized), out_dir / "overlay.ppm")
    print(f"mask covers {int(mask.sum())} pixels at t={t_edit}")
    return 0


def _cmd_ablate(args) -> int:
    cfg = _merge_run_config(args)
    run_experiment(cfg, variants=VARIANTS)
    print(f"wrote records to {Path(args.out) / METRICS_FILENAME}")
    return 0


def _cmd_eval(args) -> int:
    path = Path(args.out) / METRICS_FILENAME
    if not path.exists():
        raise RuntimeError(f"no metrics file at {path}")
    rows = read_metrics(path)
    print(format_summary(summarize(rows)))
    return 0


_COMMANDS = {
    "gen": _cmd_gen,
    "swap": _cmd_swap,
    "mask": _cmd_mask,
    "ablate": _cmd_ablate,
    "eval": _cmd_eval,
}


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse uses exit code 2 for usage problems; remap per our contract
        return 0 if exc.code == 0 else 1
    try:
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (RuntimeError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def main() -> None:
    raise SystemExit(cli_main())


if __name__ == "__main__":
    main()
