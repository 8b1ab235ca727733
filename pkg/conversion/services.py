"""
Text-free voice conversion.

Only the flow decoder and the speaker side of the model are used: neither
function accepts content, durations or pitch.
"""

import logging

import numpy as np
import torch

from config.exceptions import ShapeMismatch, WrongVariant
from features.models import MelSpectrogram
from modeling.glow_vc import GlowVCModel
from modeling.partition import CONDITIONAL, EXPLICIT, merge_blocks, partition_latent
from priors.models import SpeakerEmbedding

logger = logging.getLogger(__name__)


def _frames(model: GlowVCModel, mel: MelSpectrogram) -> tuple[torch.Tensor, torch.Tensor]:
    if mel.n_channels != model.n_channels:
        raise ShapeMismatch(f'mel has {mel.n_channels} channels, model expects {model.n_channels}')
    dtype = next(model.parameters()).dtype
    x = torch.from_numpy(mel.frames.T.copy()).unsqueeze(0).to(dtype)
    return x, torch.ones(1, 1, x.size(2), dtype=dtype)


def _speaker(model: GlowVCModel, embedding: SpeakerEmbedding) -> torch.Tensor:
    if embedding.dim != model.config.speaker_dim:
        raise ShapeMismatch(f'speaker embedding has {embedding.dim} values, model expects {model.config.speaker_dim}')
    return embedding.as_tensor().to(next(model.parameters()).dtype)


def _to_mel(x: torch.Tensor, like: MelSpectrogram) -> MelSpectrogram:
    return MelSpectrogram(
        frames=x[0].T.float().cpu().numpy(),
        frame_shift_ms=like.frame_shift_ms,
        frame_len_ms=like.frame_len_ms,
    )


@torch.no_grad()
def convert_conditional(
    model: GlowVCModel, x_src: MelSpectrogram, s_src: SpeakerEmbedding, s_tgt: SpeakerEmbedding
) -> MelSpectrogram:
    """
    Encode with the source speaker's flow and decode with the target's.

    Raises:
        WrongVariant: The model is explicit
        ModelNotFrozen: The model is in training mode
    """
    if model.variant != CONDITIONAL:
        raise WrongVariant('conditional conversion needs a conditional model')
    model.require_frozen()
    x, mask = _frames(model, x_src)
    z, _ = model.encode(x, mask, _speaker(model, s_src))
    return _to_mel(model.decode(z, mask, _speaker(model, s_tgt)), x_src)


@torch.no_grad()
def convert_explicit(
    model: GlowVCModel,
    x_src: MelSpectrogram,
    s_tgt: SpeakerEmbedding,
    temperature: float = 0.0,
    generator: torch.Generator | None = None,
) -> MelSpectrogram:
    """
    Swap the speaker block of the latent for the target's prior mean.

    With ``temperature > 0`` the new speaker block is sampled around the
    mean instead. Content and pitch blocks pass through untouched.

    Raises:
        WrongVariant: The model is conditional
        ModelNotFrozen: The model is in training mode
    """
    if model.variant != EXPLICIT:
        raise WrongVariant('explicit conversion needs an explicit model')
    if temperature < 0:
        raise ValueError('temperature must be non-negative')
    model.require_frozen()
    x, mask = _frames(model, x_src)
    z, _ = model.encode(x, mask)
    blocks = partition_latent(z, model.partition)
    speaker = model.speaker_prior(_speaker(model, s_tgt), x.size(2)).mu
    if temperature > 0:
        noise = torch.randn(speaker.shape, generator=generator, dtype=speaker.dtype)
        speaker = speaker + temperature * noise
    blocks['speaker'] = speaker
    return _to_mel(model.decode(merge_blocks(blocks, model.partition), mask), x_src)


def convert(
    model: GlowVCModel,
    x_src: MelSpectrogram,
    s_tgt: SpeakerEmbedding,
    s_src: SpeakerEmbedding | None = None,
    temperature: float = 0.0,
) -> MelSpectrogram:
    """
    Dispatch on the model variant.

    Raises:
        WrongVariant: A source speaker is missing for a conditional model or
            given for an explicit one
    """
    if model.variant == CONDITIONAL:
        if s_src is None:
            raise WrongVariant('conditional conversion needs the source speaker')
        return convert_conditional(model, x_src, s_src, s_tgt)
    if s_src is not None:
        raise WrongVariant('explicit conversion does not take a source speaker')
    return convert_explicit(model, x_src, s_tgt, temperature)


def latent_blocks(model: GlowVCModel, mel: MelSpectrogram, speaker: SpeakerEmbedding | None = None) -> dict[str, np.ndarray]:
    """Named latent blocks of a mel, each C_block x T."""
    x, mask = _frames(model, mel)
    with torch.no_grad():
        z, _ = model.encode(x, mask, None if speaker is None else _speaker(model, speaker))
    return {name: block[0].cpu().numpy() for name, block in partition_latent(z, model.partition).items()}
