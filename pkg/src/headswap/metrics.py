"""Exact evaluation against the rendered ground truth."""

from __future__ import annotations

import numpy as np

from .synthgen import (
    AttributeSpec,
    HAIR_PALETTE,
    HEAD_CY,
    HEAD_RADIUS,
    LONG,
    SKIN_PALETTE,
    composite_spec,
    oracle_swap,
    render_avatar,
)
from dataclasses import replace

HAIR_DETECT_DISTANCE = 0.15
HAIR_DETECT_FRACTION = 0.25


def mask_iou(a, b) -> float:
    """Intersection over union of two binary masks; 1.0 when both are empty."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        raise ValueError(f"mask shapes differ: {a.shape} vs {b.shape}")
    a = a.astype(bool)
    b = b.astype(bool)
    union = (a | b).sum()
    if union == 0:
        return 1.0
    return float((a & b).sum() / union)


def region_mse(x, y, region) -> float:
    """Mean squared difference over a masked region (0.0 for an empty region)."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    region = np.asarray(region)
    if x.shape != y.shape or region.shape != x.shape[:2]:
        raise ValueError(
            f"shape mismatch: x {x.shape}, y {y.shape}, region {region.shape}"
        )
    selected = region.astype(bool)
    if not selected.any():
        return 0.0
    diff = x[selected] - y[selected]
    return float(np.mean(diff**2))


def _nearest_palette(color: np.ndarray, palette: np.ndarray) -> int:
    return int(np.argmin(np.linalg.norm(palette - color, axis=1)))


def attribute_probe(image, body: AttributeSpec, head: AttributeSpec) -> tuple[int, int]:
    """Score how many of {skin tone, hair color, hair style} a swap carried over.

    The probe samples the oracle swap's head-disc and hair-region pixel
    coordinates in the candidate image and classifies each region's mean
    color against the palettes.  Hair style is judged as long/not-long:
    the candidate is "long" when at least 25% of the pixels where the
    long-haired variant would place below-disc hair lie within 0.15 RGB
    distance of some hair palette entry.  A bald oracle has no hair region
    to classify, so hair color counts as matched there.
    """
    image = np.asarray(image, dtype=np.float64)
    oracle = oracle_swap(body, head)

    disc = oracle.head_mask.astype(bool)
    skin_ok = (
        _nearest_palette(image[disc].mean(axis=0), SKIN_PALETTE) == head.skin_tone
    )

    hair_region = oracle.hair_mask.astype(bool)
    if hair_region.any():
        hair_ok = (
            _nearest_palette(image[hair_region].mean(axis=0), HAIR_PALETTE)
            == head.hair_color
        )
    else:
        hair_ok = True

    long_variant = render_avatar(replace(composite_spec(body, head), hair_style=LONG))
    rows = np.arange(image.shape[0])[:, None]
    below_disc = long_variant.hair_mask.astype(bool) & (rows > HEAD_CY + HEAD_RADIUS)
    samples = image[below_disc]
    distances = np.linalg.norm(samples[:, None, :] - HAIR_PALETTE[None, :, :], axis=2)
    hairlike = (distances.min(axis=1) <= HAIR_DETECT_DISTANCE).mean()
    detected_long = hairlike >= HAIR_DETECT_FRACTION
    style_ok = detected_long == (head.hair_style == LONG)

    return int(skin_ok) + int(hair_ok) + int(style_ok), 3
