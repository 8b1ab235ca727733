"""Configuration and records of the synthetic factorized corpus."""

from dataclasses import dataclass, field

import numpy as np

from features.models import MelSpectrogram, NormalizedPitch, PitchTrack
from priors.models import ContentInput
from synthlab.exceptions import BadConfig

MIXINGS = ('orthogonal', 'identity')


@dataclass(frozen=True)
class SynthConfig:
    """
    Generator settings.

    Attributes:
        n_speakers: Number of speakers, at least 2
        n_languages: Languages; speaker ``k`` speaks language ``k % n_languages``
        utterances_per_speaker: Utterances generated per speaker
        phoneme_vocab_size: Phoneme inventory size, at least 2
        min_phonemes: Shortest utterance in phonemes
        max_phonemes: Longest utterance in phonemes
        min_duration: Shortest phoneme in frames
        max_duration: Longest phoneme in frames
        seed: Root seed of every random draw
        n_channels: Feature width
        factor_widths: Planted (content, speaker, pitch) latent widths
        noise_std: Additive noise on the mixed features
        content_noise: Frame-level jitter on the content vectors
        pitch_noise: Noise on the pitch sinusoid before standardization
        mixing: ``orthogonal`` random map or ``identity``
        min_speaker_distance: Minimum pairwise distance of speaker vectors
        heldout_per_speaker: Utterances per speaker reserved for evaluation
    """

    n_speakers: int = 3
    n_languages: int = 2
    utterances_per_speaker: int = 100
    phoneme_vocab_size: int = 40
    min_phonemes: int = 4
    max_phonemes: int = 12
    min_duration: int = 1
    max_duration: int = 6
    seed: int = 42
    n_channels: int = 80
    factor_widths: tuple[int, int, int] = (40, 39, 1)
    noise_std: float = 0.05
    content_noise: float = 0.1
    pitch_noise: float = 0.1
    mixing: str = 'orthogonal'
    min_speaker_distance: float = 1.0
    heldout_per_speaker: int = 10

    def __post_init__(self):
        object.__setattr__(self, 'factor_widths', tuple(int(w) for w in self.factor_widths))
        positives = (
            'n_speakers', 'n_languages', 'utterances_per_speaker', 'phoneme_vocab_size',
            'min_phonemes', 'max_phonemes', 'min_duration', 'max_duration', 'n_channels',
        )
        for name in positives:
            if getattr(self, name) < 1:
                raise BadConfig(f'{name} must be positive')
        if self.n_speakers < 2:
            raise BadConfig('at least two speakers are needed')
        if self.phoneme_vocab_size < 2:
            raise BadConfig('the phoneme vocabulary needs at least two symbols')
        if self.min_phonemes > self.max_phonemes or self.min_duration > self.max_duration:
            raise BadConfig('minimum lengths must not exceed maximum lengths')
        if len(self.factor_widths) != 3 or any(w < 1 for w in self.factor_widths):
            raise BadConfig('factor_widths needs three positive widths')
        if self.factor_widths[2] != 1:
            raise BadConfig('the planted pitch factor is one channel wide')
        if sum(self.factor_widths) != self.n_channels:
            raise BadConfig(f'factor widths {self.factor_widths} do not sum to {self.n_channels}')
        if self.mixing not in MIXINGS:
            raise BadConfig(f'mixing must be one of {MIXINGS}')
        if min(self.noise_std, self.content_noise, self.pitch_noise, self.min_speaker_distance) < 0:
            raise BadConfig('noise levels and distances must be non-negative')
        if not 0 <= self.heldout_per_speaker < self.utterances_per_speaker:
            raise BadConfig('heldout_per_speaker must leave training utterances')

    @property
    def n_utterances(self) -> int:
        return self.n_speakers * self.utterances_per_speaker

    def language_of(self, speaker_id: int) -> int:
        return speaker_id % self.n_languages


@dataclass(frozen=True)
class Utterance:
    """One generated utterance with its ground-truth conditioning."""

    utterance_id: str
    speaker_id: int
    language_id: int
    content: ContentInput
    mel: MelSpectrogram
    f0_norm: NormalizedPitch
    split: str = 'train'
    pitch: PitchTrack | None = None

    @property
    def n_frames(self) -> int:
        return self.mel.n_frames


@dataclass
class SyntheticCorpus:
    """
    Generated utterances plus the factors that produced them.

    Features are ``x = M @ latent + bias + noise`` per frame, where the latent
    stacks content, speaker and pitch coordinates in that order.
    """

    config: SynthConfig
    utterances: list[Utterance]
    speaker_vectors: np.ndarray
    phoneme_vectors: np.ndarray
    mixing: np.ndarray
    bias: np.ndarray
    phoneme_symbols: list[str] = field(default_factory=list)
    language_symbols: list[str] = field(default_factory=list)

    @property
    def n_speakers(self) -> int:
        return self.speaker_vectors.shape[0]

    @property
    def content_slice(self) -> slice:
        return slice(0, self.config.factor_widths[0])

    def split(self, name: str) -> list[Utterance]:
        return [u for u in self.utterances if u.split == name]

    def by_id(self, utterance_id: str) -> Utterance:
        for utterance in self.utterances:
            if utterance.utterance_id == utterance_id:
                return utterance
        raise KeyError(utterance_id)

    def project_latent(self, frames: np.ndarray) -> np.ndarray:
        """Recover planted latent coordinates ``M^-1 (x - b)`` for T x C frames."""
        return np.linalg.solve(self.mixing, (np.asarray(frames, dtype=np.float64) - self.bias).T).T

    def model_overrides(self) -> dict:
        """Model-config values a model trained on this corpus must use."""
        return {
            'n_channels': self.config.n_channels,
            'n_phonemes': self.config.phoneme_vocab_size,
            'n_languages': self.config.n_languages,
            'n_speakers': self.config.n_speakers,
        }
