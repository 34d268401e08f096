"""Edit-region extraction from disagreeing noise predictions.

The edit map compares the head-conditioned guided prediction against the
body-conditioned prediction at a stored inversion latent.  The full
variant keeps only the component of the guided prediction orthogonal to
the body prediction (one global projection over the flattened grids);
the ablation variants use plain differences.  The binary mask is then
normalize -> Gaussian filter -> threshold.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .diffusion import EmpiricalNoisePredictor, NoiseSchedule, cfg_combine, _check_step
from .imaging import gaussian_filter, minmax_normalize, threshold
from .synthgen import Condition, NULL_CONDITION

VARIANTS = ("naive", "no_orth", "full")

DEFAULT_TAU = 0.6
DEFAULT_SIGMA = 2.0
DEFAULT_MASK_GUIDANCE = 3.0


class DegenerateReferenceError(ValueError):
    """Raised when the projection reference prediction is identically zero."""


@dataclass(frozen=True)
class IOMaskConfig:
    """Mask-extraction settings: threshold, blur width, variant, guidance."""

    tau: float = DEFAULT_TAU
    sigma: float = DEFAULT_SIGMA
    variant: str = "full"
    w: float = DEFAULT_MASK_GUIDANCE
    per_pixel: bool = False  # experimental per-pixel projection, off by default

    def __post_init__(self):
        if not 0.0 <= self.tau <= 1.0:
            raise ValueError(f"tau must lie in [0, 1], got {self.tau}")
        if not self.sigma > 0:
            raise ValueError(f"sigma must be positive, got {self.sigma}")
        if self.variant not in VARIANTS:
            raise ValueError(f"variant must be one of {VARIANTS}, got {self.variant!r}")
        if self.w < 0:
            raise ValueError(f"guidance scale must be non-negative, got {self.w}")


def orthogonal_component(
    eps_h: np.ndarray, eps_b: np.ndarray, per_pixel: bool = False
) -> np.ndarray:
    """Remove from eps_h its projection onto the reference eps_b.

    By default the projection coefficient <eps_b, eps_h> / |eps_b|^2 is a
    single scalar over the fully flattened grids.  With per_pixel=True the
    projection is taken per pixel over the channel vectors instead
    (pixels where the reference vanishes are passed through unchanged).
    """
    eps_h = np.asarray(eps_h, dtype=np.float64)
    eps_b = np.asarray(eps_b, dtype=np.float64)
    if eps_h.shape != eps_b.shape:
        raise ValueError(f"prediction shapes differ: {eps_h.shape} vs {eps_b.shape}")
    if per_pixel:
        denom = (eps_b * eps_b).sum(axis=-1, keepdims=True)
        if not denom.any():
            raise DegenerateReferenceError("reference prediction is identically zero")
        num = (eps_b * eps_h).sum(axis=-1, keepdims=True)
        coef = np.divide(num, denom, out=np.zeros_like(num), where=denom > 0)
        return eps_h - coef * eps_b
    ref = eps_b.ravel()
    denom = ref @ ref
    if denom == 0.0:
        raise DegenerateReferenceError("reference prediction is identically zero")
    coef = (ref @ eps_h.ravel()) / denom
    return eps_h - coef * eps_b


def io_map(
    traj: np.ndarray,
    t,
    cond_head: Condition,
    cond_body: Condition,
    cfg: IOMaskConfig,
    sched: NoiseSchedule,
    pred: EmpiricalNoisePredictor,
) -> np.ndarray:
    """Per-pixel edit evidence at inversion step t, one of three variants.

    Evaluates the body-conditioned prediction and the CFG-guided
    head-conditioned prediction at the stored latent traj[t], forms the
    variant's difference field, and returns the channel-mean of its
    absolute value as an (H, W) map.
    """
    step = _check_step(t, 1, sched.T, sched)
    z_t = traj[step]
    eps_body = pred.evaluate(z_t, step, cond_body)
    eps_null = pred.evaluate(z_t, step, NULL_CONDITION)
    eps_head = cfg_combine(eps_null, pred.evaluate(z_t, step, cond_head), cfg.w)
    if cfg.variant == "full":
        diff = orthogonal_component(eps_head, eps_body, per_pixel=cfg.per_pixel)
    elif cfg.variant == "no_orth":
        diff = eps_head - eps_body
    else:  # naive: difference of two guided predictions
        diff = eps_head - cfg_combine(eps_null, eps_body, cfg.w)
    return np.abs(diff).mean(axis=2)


def build_iomask(edit_map: np.ndarray, cfg: IOMaskConfig) -> np.ndarray:
    """Normalize, blur, and threshold an edit map into a binary mask."""
    return threshold(gaussian_filter(minmax_normalize(edit_map), cfg.sigma), cfg.tau)
