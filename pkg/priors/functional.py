"""Duration upsampling, the pitch prior and the Gaussian log-likelihood."""

import math

import torch

from config.exceptions import ShapeMismatch
from features.models import NormalizedPitch
from priors.exceptions import EmptyInput, NonPositiveDuration
from priors.models import PriorStats

LOG_2PI = math.log(2.0 * math.pi)


def upsample_by_duration(per_phoneme: torch.Tensor, durations: torch.Tensor) -> torch.Tensor:
    """
    Repeat row ``i`` of an L x D matrix ``durations[i]`` times.

    Raises:
        EmptyInput: L == 0
        NonPositiveDuration: Any duration below 1
    """
    if per_phoneme.size(0) == 0:
        raise EmptyInput('cannot upsample an empty phoneme sequence')
    if durations.numel() != per_phoneme.size(0):
        raise ShapeMismatch(f'{per_phoneme.size(0)} rows but {durations.numel()} durations')
    if torch.any(durations < 1):
        raise NonPositiveDuration('every phoneme must last at least one frame')
    return torch.repeat_interleave(per_phoneme, durations.long(), dim=0)


def alignment_path(durations: torch.Tensor, max_frames: int) -> torch.Tensor:
    """
    Hard monotonic alignment [B, T, L] from padded durations [B, L].

    ``path[b, t, l]`` is 1 when frame ``t`` belongs to phoneme ``l``; padded
    phonemes carry duration 0 and own no frame.
    """
    durations = durations.long()
    ends = torch.cumsum(durations, dim=1)
    starts = ends - durations
    frames = torch.arange(max_frames, device=durations.device).view(1, -1, 1)
    return ((frames >= starts.unsqueeze(1)) & (frames < ends.unsqueeze(1))).float()


def batch_upsample(x: torch.Tensor, durations: torch.Tensor, max_frames: int) -> torch.Tensor:
    """Upsample per-phoneme features [B, L, D] to frames [B, T, D]."""
    path = alignment_path(durations, max_frames).to(x.dtype)
    return torch.bmm(path, x)


def pitch_prior(pitch: NormalizedPitch | torch.Tensor) -> PriorStats:
    """
    Pitch block prior: the mean is the normalized pitch itself.

    Args:
        pitch: A single ``NormalizedPitch`` or a batch [B, T]

    Returns:
        PriorStats with mu of shape [B, 1, T]
    """
    if isinstance(pitch, NormalizedPitch):
        values = torch.from_numpy(pitch.values).float().unsqueeze(0)
    else:
        values = pitch
    return PriorStats(mu=values.unsqueeze(1))


def gaussian_loglik(z_block: torch.Tensor, stats: PriorStats, mask: torch.Tensor | None = None) -> torch.Tensor:
    """
    Sum of unit-variance Gaussian log-densities over every valid cell.

    Args:
        z_block: Latent block [B, D, T]
        stats: Prior of the block
        mask: Optional frame mask [B, 1, T]

    Returns:
        float64 tensor [B]
    """
    if z_block.shape != stats.mu.shape:
        raise ShapeMismatch(
            f'latent block {tuple(z_block.shape)} vs prior {tuple(stats.mu.shape)}'
        )
    z = z_block.double()
    mu = stats.mu.double()
    cell = -0.5 * LOG_2PI - 0.5 * (z - mu) ** 2
    if mask is not None:
        cell = cell * mask.double()
    return torch.sum(cell, [1, 2])
