"""Per-utterance conditioning and its padded batch form."""

from dataclasses import dataclass, replace

import numpy as np
import torch

from config.exceptions import ShapeMismatch
from features.models import MelSpectrogram, NormalizedPitch
from flows.commons import sequence_mask
from priors.models import ContentInput, SpeakerEmbedding


@dataclass(frozen=True)
class ConditioningBundle:
    """
    Content, pitch and speaker of one utterance.

    The speaker is given either as an embedding vector or as an index into
    the model's learned speaker table.
    """

    content: ContentInput
    pitch: NormalizedPitch
    speaker: SpeakerEmbedding | None = None
    speaker_id: int = -1

    def __post_init__(self):
        if len(self.pitch) != self.content.n_frames:
            raise ShapeMismatch(
                f'pitch has {len(self.pitch)} frames, durations sum to {self.content.n_frames}'
            )
        if self.speaker is None and self.speaker_id < 0:
            raise ShapeMismatch('a bundle needs a speaker embedding or a speaker id')

    @property
    def n_frames(self) -> int:
        return self.content.n_frames

    def check_mel(self, mel: MelSpectrogram) -> None:
        if mel.n_frames != self.n_frames:
            raise ShapeMismatch(f'mel has {mel.n_frames} frames, bundle has {self.n_frames}')


@dataclass(frozen=True)
class Batch:
    """
    Padded tensors for a batch of utterances.

    Attributes:
        phonemes: [B, L] ids, 0 on padding
        phoneme_lengths: [B]
        languages: [B]
        durations: [B, L], 0 on padding
        f0_norm: [B, T] normalized pitch, 0 on padding
        frame_lengths: [B]
        speaker_ids: [B], -1 where only a vector is known
        speaker_vectors: [B, S] or None to use the speaker table
        mel: [B, C, T] frames, or None for generation
    """

    phonemes: torch.Tensor
    phoneme_lengths: torch.Tensor
    languages: torch.Tensor
    durations: torch.Tensor
    f0_norm: torch.Tensor
    frame_lengths: torch.Tensor
    speaker_ids: torch.Tensor
    speaker_vectors: torch.Tensor | None = None
    mel: torch.Tensor | None = None

    @property
    def size(self) -> int:
        return self.phonemes.size(0)

    @property
    def max_frames(self) -> int:
        return self.f0_norm.size(1)

    @property
    def mask(self) -> torch.Tensor:
        """Frame mask [B, 1, T]."""
        dtype = self.mel.dtype if self.mel is not None else torch.float32
        return sequence_mask(self.frame_lengths, self.max_frames).unsqueeze(1).to(dtype)

    def to(self, dtype: torch.dtype) -> 'Batch':
        """Cast the floating tensors."""
        return replace(
            self,
            f0_norm=self.f0_norm.to(dtype),
            speaker_vectors=None if self.speaker_vectors is None else self.speaker_vectors.to(dtype),
            mel=None if self.mel is None else self.mel.to(dtype),
        )

    def repeat(self, times: int) -> 'Batch':
        """Every item repeated ``times`` times in sequence."""
        def tile(t):
            return None if t is None else t.repeat(times, *([1] * (t.dim() - 1)))

        return Batch(**{name: tile(getattr(self, name)) for name in self.__dataclass_fields__})


def collate_bundles(
    bundles: list[ConditioningBundle], mels: list[MelSpectrogram] | None = None
) -> Batch:
    """
    Pad a list of bundles (and their mels) into a ``Batch``.

    Raises:
        ShapeMismatch: A mel disagrees with its bundle, or speakers are given
            as vectors for some items and as ids only for others
    """
    if not bundles:
        raise ShapeMismatch('cannot collate an empty batch')
    if mels is not None:
        if len(mels) != len(bundles):
            raise ShapeMismatch(f'{len(mels)} mels for {len(bundles)} bundles')
        for bundle, mel in zip(bundles, mels):
            bundle.check_mel(mel)

    b = len(bundles)
    max_phonemes = max(len(bundle.content.phoneme_ids) for bundle in bundles)
    max_frames = max(bundle.n_frames for bundle in bundles)

    phonemes = np.zeros((b, max_phonemes), dtype=np.int64)
    durations = np.zeros((b, max_phonemes), dtype=np.int64)
    f0_norm = np.zeros((b, max_frames), dtype=np.float32)
    for i, bundle in enumerate(bundles):
        n = len(bundle.content.phoneme_ids)
        phonemes[i, :n] = bundle.content.phoneme_ids
        durations[i, :n] = bundle.content.durations
        f0_norm[i, : bundle.n_frames] = bundle.pitch.values

    with_vectors = [bundle.speaker is not None for bundle in bundles]
    if any(with_vectors) and not all(with_vectors):
        raise ShapeMismatch('mixing speaker vectors and speaker ids in one batch')
    speaker_vectors = None
    if all(with_vectors):
        speaker_vectors = torch.from_numpy(np.stack([bundle.speaker.vector for bundle in bundles]))

    mel = None
    if mels is not None:
        n_channels = mels[0].n_channels
        padded = np.zeros((b, n_channels, max_frames), dtype=np.float32)
        for i, item in enumerate(mels):
            padded[i, :, : item.n_frames] = item.frames.T
        mel = torch.from_numpy(padded)

    return Batch(
        phonemes=torch.from_numpy(phonemes),
        phoneme_lengths=torch.tensor([len(bundle.content.phoneme_ids) for bundle in bundles]),
        languages=torch.tensor([bundle.content.language_id for bundle in bundles]),
        durations=torch.from_numpy(durations),
        f0_norm=torch.from_numpy(f0_norm),
        frame_lengths=torch.tensor([bundle.n_frames for bundle in bundles]),
        speaker_ids=torch.tensor([bundle.speaker_id for bundle in bundles]),
        speaker_vectors=speaker_vectors,
        mel=mel,
    )
