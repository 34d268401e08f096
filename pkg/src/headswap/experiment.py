"""Batch swap runner: seeded pair sampling, per-pair metrics, JSONL records.

One JSON object per line in metrics.jsonl keeps records independently
parseable and append-safe.  Wall-clock runtimes are kept on the in-memory
records and in the printed summary but never written to metrics.jsonl,
so repeated runs with the same seed produce byte-identical files.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .diffusion import EmpiricalNoisePredictor, NoiseSchedule, make_schedule
from .hid import SwapConfig, SwapResult, run_headswap
from .imaging import minmax_normalize, overlay_heatmap, write_image, write_mask
from .iomask import IOMaskConfig, VARIANTS
from .metrics import attribute_probe, mask_iou, region_mse
from .synthgen import (
    AttributeSpec,
    all_attribute_specs,
    enumerate_dataset,
    ground_truth_edit_mask,
    oracle_swap,
    render_avatar,
)

METRICS_FILENAME = "metrics.jsonl"

# metrics.jsonl carries exactly these keys, in this order
RECORD_FIELDS = (
    "pair_id",
    "body_attrs",
    "head_attrs",
    "variant",
    "iou",
    "mse_head",
    "mse_outside",
    "attr_probe",
)


@dataclass
class PairRecord:
    """Metrics for one (body, head, variant) swap."""

    pair_id: str
    body_attrs: AttributeSpec
    head_attrs: AttributeSpec
    variant: str
    iou: float
    mse_head: float
    mse_outside: float
    attr_probe: tuple[int, int]
    runtime_ms: float

    def to_json_dict(self) -> dict:
        matched, total = self.attr_probe
        return {
            "pair_id": self.pair_id,
            "body_attrs": list(self.body_attrs.to_ints()),
            "head_attrs": list(self.head_attrs.to_ints()),
            "variant": self.variant,
            "iou": self.iou,
            "mse_head": self.mse_head,
            "mse_outside": self.mse_outside,
            "attr_probe": {"matched": matched, "total": total},
        }


@dataclass(frozen=True)
class RunConfig:
    """One experiment: swap settings plus sampling seed, pair count, output dir."""

    T: int = 50
    w: float = 3.0
    tau: float = 0.6
    sigma: float = 2.0
    edit_fraction: float = 0.8
    variant: str = "full"
    seed: int = 0
    pairs: int = 5
    out_dir: Path | None = None

    def __post_init__(self):
        if self.pairs < 1:
            raise ValueError(f"pairs must be >= 1, got {self.pairs}")

    def swap_config(self, variant: str | None = None) -> SwapConfig:
        # the single CLI guidance knob drives both denoising and mask extraction
        mask = IOMaskConfig(
            tau=self.tau,
            sigma=self.sigma,
            variant=self.variant if variant is None else variant,
            w=self.w,
        )
        return SwapConfig(T=self.T, w=self.w, edit_fraction=self.edit_fraction, mask=mask)


def sample_pairs(seed: int, count: int) -> list[tuple[AttributeSpec, AttributeSpec]]:
    """Seeded (body, head) pairs, rejecting body == head."""
    specs = all_attribute_specs()
    rng = np.random.default_rng(seed)
    pairs: list[tuple[AttributeSpec, AttributeSpec]] = []
    while len(pairs) < count:
        i, j = rng.integers(0, len(specs), size=2)
        if i != j:
            pairs.append((specs[i], specs[j]))
    return pairs


def evaluate_swap(
    pair_id: str,
    body: AttributeSpec,
    head: AttributeSpec,
    variant: str,
    result: SwapResult,
    runtime_ms: float,
) -> PairRecord:
    """Reduce a finished swap to its metric record."""
    oracle = oracle_swap(body, head)
    head_region = oracle.head_mask.astype(bool) | oracle.hair_mask.astype(bool)
    body_image = render_avatar(body).image
    outside = 1 - result.mask
    return PairRecord(
        pair_id=pair_id,
        body_attrs=body,
        head_attrs=head,
        variant=variant,
        iou=mask_iou(result.mask, ground_truth_edit_mask(body, head)),
        mse_head=region_mse(result.output, oracle.image, head_region.astype(np.uint8)),
        mse_outside=region_mse(result.output, body_image, outside),
        attr_probe=attribute_probe(result.output, body, head),
        runtime_ms=runtime_ms,
    )


def write_metrics(records: Sequence[PairRecord], path) -> None:
    """Append-style serialization through a single writer, one object per line."""
    with open(path, "w", encoding="ascii") as fh:
        for record in records:
            fh.write(json.dumps(record.to_json_dict(), sort_keys=False) + "\n")


def read_metrics(path) -> list[dict]:
    with open(path, "r", encoding="ascii") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def summarize(rows: Sequence) -> dict[str, dict[str, float]]:
    """Per-variant arithmetic means of the metric columns.

    Accepts PairRecord objects or dicts parsed back from metrics.jsonl.
    """
    grouped: dict[str, list] = {}
    for row in rows:
        variant = row.variant if isinstance(row, PairRecord) else row["variant"]
        grouped.setdefault(variant, []).append(row)

    def _value(row, name):
        if isinstance(row, PairRecord):
            if name == "attr_probe":
                matched, total = row.attr_probe
                return matched / total
            return getattr(row, name)
        if name == "attr_probe":
            probe = row["attr_probe"]
            return probe["matched"] / probe["total"]
        return row[name]

    summary: dict[str, dict[str, float]] = {}
    for variant, members in grouped.items():
        entry = {"count": float(len(members))}
        for name in ("iou", "mse_head", "mse_outside", "attr_probe"):
            key = "probe_fraction" if name == "attr_probe" else name
            entry[key] = float(np.mean([_value(m, name) for m in members]))
        runtimes = [m.runtime_ms for m in members if isinstance(m, PairRecord)]
        if runtimes:
            entry["runtime_ms"] = float(np.mean(runtimes))
        summary[variant] = entry
    return summary


def format_summary(summary: dict[str, dict[str, float]]) -> str:
    lines = []
    for variant in sorted(summary):
        entry = summary[variant]
        parts = [f"{variant:8s} n={int(entry['count'])}"]
        for key in ("iou", "mse_head", "mse_outside", "probe_fraction", "runtime_ms"):
            if key in entry:
                parts.append(f"{key}={entry[key]:.6g}")
        lines.append("  ".join(parts))
    return "\n".join(lines)


def _write_pair_images(out_dir: Path, pair_id: str, body, head) -> None:
    write_image(render_avatar(body).image, out_dir / f"{pair_id}_body.ppm")
    write_image(render_avatar(head).image, out_dir / f"{pair_id}_head.ppm")
    write_image(oracle_swap(body, head).image, out_dir / f"{pair_id}_oracle.ppm")


def _write_variant_images(out_dir: Path, pair_id: str, variant: str, result: SwapResult):
    stem = f"{pair_id}_{variant}"
    write_image(result.output, out_dir / f"{stem}_output.ppm")
    write_mask(result.mask, out_dir / f"{stem}_mask.pgm")
    normalized = minmax_normalize(result.io_map)
    body_image = result.trajectory[0]
    write_image(overlay_heatmap(body_image, normalized), out_dir / f"{stem}_overlay.ppm")


def run_experiment(
    cfg: RunConfig,
    variants: Sequence[str] | None = None,
    sched: NoiseSchedule | None = None,
    pred: EmpiricalNoisePredictor | None = None,
    verbose: bool = True,
) -> list[PairRecord]:
    """Run seeded swap pairs for each requested variant and collect metrics.

    Writes per-pair images plus metrics.jsonl when cfg.out_dir is set, and
    prints per-variant summary means at the end.  A shared schedule and
    predictor may be injected to amortize dataset setup across calls.
    """
    if variants is None:
        variants = (cfg.variant,)
    unknown = [v for v in variants if v not in VARIANTS]
    if unknown:
        raise ValueError(f"unknown variants {unknown}; expected subset of {VARIANTS}")
    if sched is None:
        sched = make_schedule(cfg.T)
    if pred is None:
        pred = EmpiricalNoisePredictor.from_renders(enumerate_dataset(), sched)

    out_dir = None
    if cfg.out_dir is not None:
        out_dir = Path(cfg.out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)

    records: list[PairRecord] = []
    for index, (body, head) in enumerate(sample_pairs(cfg.seed, cfg.pairs)):
        pair_id = f"pair{index:03d}"
        if out_dir is not None:
            _write_pair_images(out_dir, pair_id, body, head)
        for variant in variants:
            started = time.perf_counter()
            result = run_headswap(body, head, cfg.swap_config(variant), sched, pred)
            elapsed_ms = (time.perf_counter() - started) * 1e3
            records.append(evaluate_swap(pair_id, body, head, variant, result, elapsed_ms))
            if out_dir is not None:
                _write_variant_images(out_dir, pair_id, variant, result)

    if out_dir is not None:
        write_metrics(records, out_dir / METRICS_FILENAME)
    if verbose:
        print(format_summary(summarize(records)))
    return records
