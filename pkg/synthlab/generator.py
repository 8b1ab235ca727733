"""
Synthetic factorized corpus.

Every frame stacks a content vector (the phoneme's vector repeated over its
duration plus jitter), the speaker's vector and a standardized pitch scalar,
then mixes them into feature space through a fixed invertible linear map:
``x = M @ latent + b + noise``.
"""

import logging

import numpy as np

from features.models import MelSpectrogram, PitchTrack
from features.utils.pitch import normalize_f0
from priors.models import ContentInput
from synthlab.exceptions import BadConfig
from synthlab.models import SynthConfig, SyntheticCorpus, Utterance

logger = logging.getLogger(__name__)

MAX_SPEAKER_DRAWS = 1000
BASE_F0_HZ = 100.0
F0_STEP_HZ = 20.0
PITCH_DEPTH = 0.1


def draw_speaker_vectors(rng: np.random.Generator, cfg: SynthConfig) -> np.ndarray:
    """
    Draw speaker vectors until every pair is at least ``min_speaker_distance`` apart.

    Raises:
        BadConfig: No admissible draw was found
    """
    width = cfg.factor_widths[1]
    for _ in range(MAX_SPEAKER_DRAWS):
        vectors = rng.normal(0.0, 1.0, size=(cfg.n_speakers, width))
        gaps = np.linalg.norm(vectors[:, None, :] - vectors[None, :, :], axis=-1)
        gaps[np.diag_indices(cfg.n_speakers)] = np.inf
        if gaps.min() >= cfg.min_speaker_distance:
            return vectors
    raise BadConfig(
        f'could not place {cfg.n_speakers} speakers {cfg.min_speaker_distance} apart '
        f'in {width} dimensions'
    )


def draw_mixing(rng: np.random.Generator, cfg: SynthConfig) -> tuple[np.ndarray, np.ndarray]:
    """Mixing map and bias, rounded to float32 so stored factors are exact."""
    if cfg.mixing == 'identity':
        return np.eye(cfg.n_channels), np.zeros(cfg.n_channels)
    q, r = np.linalg.qr(rng.normal(size=(cfg.n_channels, cfg.n_channels)))
    mixing = q * np.sign(np.diag(r))
    bias = rng.normal(0.0, 0.5, size=cfg.n_channels)
    return (
        mixing.astype(np.float32).astype(np.float64),
        bias.astype(np.float32).astype(np.float64),
    )


def standardize(values: np.ndarray) -> np.ndarray:
    std = values.std()
    if std < 1e-8:
        return np.zeros_like(values)
    return (values - values.mean()) / std


def generate_utterance(
    cfg: SynthConfig,
    speaker_id: int,
    index: int,
    phoneme_vectors: np.ndarray,
    speaker_vectors: np.ndarray,
    mixing: np.ndarray,
    bias: np.ndarray,
) -> Utterance:
    """One utterance drawn from its own ``(seed, speaker, index)`` stream."""
    rng = np.random.default_rng([cfg.seed, speaker_id, index])
    n_phonemes = int(rng.integers(cfg.min_phonemes, cfg.max_phonemes + 1))
    phoneme_ids = rng.integers(0, cfg.phoneme_vocab_size, size=n_phonemes)
    durations = rng.integers(cfg.min_duration, cfg.max_duration + 1, size=n_phonemes)
    n_frames = int(durations.sum())
    content_width = cfg.factor_widths[0]

    content = np.repeat(phoneme_vectors[phoneme_ids], durations, axis=0)
    content = content + cfg.content_noise * rng.normal(size=(n_frames, content_width))

    frequency = rng.uniform(0.05, 0.2)
    phase = rng.uniform(0.0, 2.0 * np.pi)
    steps = np.arange(n_frames)
    raw_pitch = np.sin(2.0 * np.pi * frequency * steps + phase)
    pitch = standardize(raw_pitch + cfg.pitch_noise * rng.normal(size=n_frames))

    speaker = np.broadcast_to(speaker_vectors[speaker_id], (n_frames, speaker_vectors.shape[1]))
    latent = np.concatenate([content, speaker, pitch[:, None]], axis=1)
    frames = latent @ mixing.T + bias + cfg.noise_std * rng.normal(size=(n_frames, cfg.n_channels))

    f0_hz = (BASE_F0_HZ + F0_STEP_HZ * speaker_id) * np.exp(PITCH_DEPTH * pitch)
    track = PitchTrack(f0_hz=f0_hz)
    language_id = cfg.language_of(speaker_id)
    split = 'heldout' if index >= cfg.utterances_per_speaker - cfg.heldout_per_speaker else 'train'

    return Utterance(
        utterance_id=f'spk{speaker_id:02d}_utt{index:03d}',
        speaker_id=speaker_id,
        language_id=language_id,
        content=ContentInput(phoneme_ids=phoneme_ids, language_id=language_id, durations=durations),
        mel=MelSpectrogram(frames=frames.astype(np.float32)),
        f0_norm=normalize_f0(track),
        split=split,
        pitch=track,
    )


def generate_corpus(cfg: SynthConfig) -> SyntheticCorpus:
    """
    Generate the whole corpus deterministically from ``cfg.seed``.

    The last ``heldout_per_speaker`` utterances of each speaker form the
    held-out split.
    """
    rng = np.random.default_rng(cfg.seed)
    phoneme_vectors = rng.normal(0.0, 1.0, size=(cfg.phoneme_vocab_size, cfg.factor_widths[0]))
    speaker_vectors = draw_speaker_vectors(rng, cfg)
    mixing, bias = draw_mixing(rng, cfg)

    utterances = [
        generate_utterance(cfg, speaker_id, index, phoneme_vectors, speaker_vectors, mixing, bias)
        for speaker_id in range(cfg.n_speakers)
        for index in range(cfg.utterances_per_speaker)
    ]
    logger.info(
        'Generated %d utterances (%d speakers, %d languages)',
        len(utterances), cfg.n_speakers, cfg.n_languages,
    )
    return SyntheticCorpus(
        config=cfg,
        utterances=utterances,
        speaker_vectors=speaker_vectors.astype(np.float32).astype(np.float64),
        phoneme_vectors=phoneme_vectors.astype(np.float32).astype(np.float64),
        mixing=mixing,
        bias=bias,
        phoneme_symbols=[f'p{k:02d}' for k in range(cfg.phoneme_vocab_size)],
        language_symbols=[f'lang{k}' for k in range(cfg.n_languages)],
    )
