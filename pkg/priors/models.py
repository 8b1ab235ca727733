"""Conditioning value types consumed by the prior encoders."""

from dataclasses import dataclass

import numpy as np
import torch

from config.exceptions import ShapeMismatch
from priors.exceptions import EmptyInput, NonPositiveDuration, VocabularyOverflow

SPEAKER_EMBEDDING_DIM = 192


@dataclass(frozen=True)
class ContentInput:
    """
    Content information of one utterance.

    Attributes:
        phoneme_ids: Length-L phoneme indices
        language_id: Language index
        durations: Length-L frame counts, each at least 1
    """

    phoneme_ids: np.ndarray
    language_id: int
    durations: np.ndarray

    def __post_init__(self):
        phonemes = np.asarray(self.phoneme_ids, dtype=np.int64)
        durations = np.asarray(self.durations, dtype=np.int64)
        if phonemes.ndim != 1 or phonemes.size == 0:
            raise EmptyInput('an utterance needs at least one phoneme')
        if durations.shape != phonemes.shape:
            raise ShapeMismatch(
                f'{phonemes.size} phonemes but {durations.size} durations'
            )
        if np.any(durations < 1):
            raise NonPositiveDuration('every phoneme must last at least one frame')
        object.__setattr__(self, 'phoneme_ids', phonemes)
        object.__setattr__(self, 'durations', durations)

    @property
    def n_frames(self) -> int:
        return int(self.durations.sum())

    def check_vocabulary(self, n_phonemes: int, n_languages: int) -> None:
        if self.phoneme_ids.min() < 0 or self.phoneme_ids.max() >= n_phonemes:
            raise VocabularyOverflow(f'phoneme ids must lie in [0, {n_phonemes})')
        if not 0 <= self.language_id < n_languages:
            raise VocabularyOverflow(f'language id {self.language_id} outside [0, {n_languages})')


@dataclass(frozen=True)
class SpeakerEmbedding:
    """Fixed-size speaker vector (192 values at full scale)."""

    vector: np.ndarray

    def __post_init__(self):
        vector = np.asarray(self.vector, dtype=np.float32)
        if vector.ndim != 1 or vector.size == 0:
            raise ShapeMismatch('speaker embedding must be a non-empty vector')
        if not np.all(np.isfinite(vector)):
            raise ShapeMismatch('speaker embedding contains non-finite values')
        object.__setattr__(self, 'vector', vector)

    @property
    def dim(self) -> int:
        return self.vector.size

    def as_tensor(self) -> torch.Tensor:
        """Batched view [1, dim]."""
        return torch.from_numpy(self.vector.copy()).unsqueeze(0)


@dataclass(frozen=True)
class PriorStats:
    """
    Gaussian prior of one latent block.

    Attributes:
        mu: Means [B, D, T]
        sigma: Standard deviation, fixed to 1 for every prior
    """

    mu: torch.Tensor
    sigma: float = 1.0

    def __post_init__(self):
        if self.sigma != 1.0:
            raise ShapeMismatch('all priors use sigma == 1')
        if self.mu.dim() != 3:
            raise ShapeMismatch(f'prior means must be [B, D, T], got {tuple(self.mu.shape)}')

    @property
    def width(self) -> int:
        return self.mu.size(1)
