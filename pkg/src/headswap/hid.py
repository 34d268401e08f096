"""End-to-end head swapping: invert, extract the edit mask, blend-denoise.

The pipeline inverts the body image under its own fully constrained
condition, computes the edit mask once at the edit-window start, then
denoises under the head condition while re-imposing the stored inversion
latent outside the mask at every step.  Because the final blend mixes
with the stored clean image itself, unmasked pixels of the output equal
the body image exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .diffusion import (
    EmpiricalNoisePredictor,
    NoiseSchedule,
    cfg_combine,
    ddim_sample_step,
    invert_trajectory,
)
from .iomask import IOMaskConfig, build_iomask, io_map
from .synthgen import AttributeSpec, Condition, NULL_CONDITION, render_avatar

DEFAULT_GUIDANCE = 3.0
DEFAULT_EDIT_FRACTION = 0.8


@dataclass(frozen=True)
class SwapConfig:
    """Pipeline settings: steps, denoising guidance, edit window, mask config."""

    T: int = 50
    w: float = DEFAULT_GUIDANCE
    edit_fraction: float = DEFAULT_EDIT_FRACTION
    mask: IOMaskConfig = field(default_factory=IOMaskConfig)
    record_steps: bool = False

    def __post_init__(self):
        if self.T < 2:
            raise ValueError(f"T must be at least 2, got {self.T}")
        if not 0.0 < self.edit_fraction <= 1.0:
            raise ValueError(f"edit_fraction must lie in (0, 1], got {self.edit_fraction}")
        if self.w < 0:
            raise ValueError(f"guidance scale must be non-negative, got {self.w}")

    @property
    def edit_start(self) -> int:
        t_edit = round(self.edit_fraction * self.T)
        if t_edit < 1:
            raise ValueError(
                f"edit window rounds to step {t_edit}; edit_fraction too small for T={self.T}"
            )
        return t_edit


@dataclass(eq=False)
class SwapResult:
    """Everything a swap produces: output image, mask, map, trajectory."""

    output: np.ndarray
    mask: np.ndarray
    io_map: np.ndarray
    trajectory: np.ndarray
    per_step_latents: list[np.ndarray] | None
    degenerate_mask: bool


def body_condition(body: AttributeSpec) -> Condition:
    """Fully constrained condition matching exactly the body's attributes."""
    return Condition.from_mapping(
        {
            "skin_tone": body.skin_tone,
            "hair_style": body.hair_style,
            "hair_color": body.hair_color,
            "clothing_color": body.clothing_color,
            "head_tilt": body.head_tilt,
        }
    )


def compose_head_condition(head: AttributeSpec, body: AttributeSpec) -> Condition:
    """Head identity attributes plus the body's pose; clothing left free.

    The swapped head must carry the head's skin tone, hair style, and hair
    color while adopting the body's tilt; nothing about clothing is known
    to the head condition.
    """
    return Condition.from_mapping(
        {
            "skin_tone": head.skin_tone,
            "hair_style": head.hair_style,
            "hair_color": head.hair_color,
            "head_tilt": body.head_tilt,
        }
    )


def run_headswap(
    body: AttributeSpec,
    head: AttributeSpec,
    cfg: SwapConfig,
    sched: NoiseSchedule,
    pred: EmpiricalNoisePredictor,
) -> SwapResult:
    """Swap the head of the body avatar for the head avatar's.

    Steps: render the body image; invert it under the body condition
    (guidance 1, i.e. the conditional prediction directly); compute the
    edit map and mask at t_edit = round(edit_fraction * T); then denoise
    from the stored latent at t_edit down to 0 under the head condition,
    blending every step's result with the stored inversion latent outside
    the mask.  An all-empty mask is reported via ``degenerate_mask``, not
    an error: the output then equals the body image bit-exactly.
    """
    if cfg.T != sched.T:
        raise ValueError(f"config T={cfg.T} does not match schedule T={sched.T}")
    body_image = render_avatar(body).image
    cond_body = body_condition(body)
    cond_head = compose_head_condition(head, body)

    traj = invert_trajectory(body_image, cond_body, sched, pred)
    t_edit = cfg.edit_start
    edit_map = io_map(traj, t_edit, cond_head, cond_body, cfg.mask, sched, pred)
    mask = build_iomask(edit_map, cfg.mask)
    mask3 = mask.astype(bool)[..., None]

    z = traj[t_edit].copy()
    steps: list[np.ndarray] | None = [] if cfg.record_steps else None
    for t in range(t_edit, 0, -1):
        guided = cfg_combine(
            pred.evaluate(z, t, NULL_CONDITION),
            pred.evaluate(z, t, cond_head),
            cfg.w,
        )
        denoised = ddim_sample_step(z, guided, t, sched)
        z = np.where(mask3, denoised, traj[t - 1])
        if steps is not None:
            steps.append(z.copy())

    return SwapResult(
        output=z,
        mask=mask,
        io_map=edit_map,
        trajectory=traj,
        per_step_latents=steps,
        degenerate_mask=not mask.any(),
    )
