"""Disentanglement and density metrics on the synthetic corpus."""

import math

import numpy as np

from synthlab.exceptions import InsufficientData, LengthMismatch
from synthlab.models import SyntheticCorpus

LN2 = math.log(2.0)


def speaker_centroids(corpus: SyntheticCorpus, split: str = 'heldout') -> dict[int, np.ndarray]:
    """Mean of the time-averaged feature vectors of each speaker's utterances."""
    averages: dict[int, list[np.ndarray]] = {}
    for utterance in corpus.split(split):
        averages.setdefault(utterance.speaker_id, []).append(utterance.mel.frames.mean(axis=0))
    return {speaker: np.mean(vectors, axis=0) for speaker, vectors in averages.items()}


def speaker_transfer_accuracy(
    converted: list[tuple[np.ndarray, int]], corpus: SyntheticCorpus, split: str = 'heldout'
) -> float:
    """
    Fraction of converted utterances classified as their intended target.

    Each item is classified by the nearest speaker centroid of its
    time-averaged features.

    Args:
        converted: Pairs of (T x C frames, intended target speaker)
        corpus: Corpus providing the real utterances for the centroids
        split: Split the centroids are computed from

    Raises:
        InsufficientData: Fewer than two speakers or nothing to classify
    """
    centroids = speaker_centroids(corpus, split)
    if len(centroids) < 2:
        raise InsufficientData(f'need at least two speakers in split {split!r}, found {len(centroids)}')
    if not converted:
        raise InsufficientData('no converted utterances to classify')
    speakers = np.array(sorted(centroids))
    table = np.stack([centroids[speaker] for speaker in speakers])

    hits = 0
    for frames, target in converted:
        distances = np.linalg.norm(table - np.asarray(frames).mean(axis=0), axis=1)
        hits += int(speakers[np.argmin(distances)] == target)
    return hits / len(converted)


def trajectory_correlation(a: np.ndarray, b: np.ndarray) -> float:
    """Pearson correlation of two equally shaped trajectories, flattened."""
    a = a.ravel() - a.mean()
    b = b.ravel() - b.mean()
    denom = math.sqrt(float(np.dot(a, a)) * float(np.dot(b, b)))
    if denom == 0.0:
        return 1.0 if np.allclose(a, b) else 0.0
    return float(np.dot(a, b) / denom)


def content_preservation_score(
    sources: list[np.ndarray], converted: list[np.ndarray], corpus: SyntheticCorpus
) -> float:
    """
    Mean per-utterance correlation of the planted content coordinates.

    Frames are projected back through the generator's mixing map and only the
    content coordinates are compared.

    Raises:
        LengthMismatch: Unequal list lengths or frame counts within a pair
        InsufficientData: No pairs
    """
    if len(sources) != len(converted):
        raise LengthMismatch(f'{len(sources)} sources but {len(converted)} converted utterances')
    if not sources:
        raise InsufficientData('no utterance pairs to score')
    content = corpus.content_slice
    scores = []
    for source, output in zip(sources, converted):
        if np.shape(source) != np.shape(output):
            raise LengthMismatch(f'pair shapes differ: {np.shape(source)} vs {np.shape(output)}')
        scores.append(
            trajectory_correlation(
                corpus.project_latent(source)[:, content],
                corpus.project_latent(output)[:, content],
            )
        )
    return float(np.mean(scores))


def bits_per_dim(nll: float, n_frames: int, n_channels: int = 80) -> float:
    """Convert a negative log-likelihood in nats to bits per feature cell."""
    if n_frames < 1:
        raise ValueError('n_frames must be at least 1')
    return nll / (n_frames * n_channels * LN2)


def diagonal_gaussian_bits_per_dim(train: list[np.ndarray], heldout: list[np.ndarray]) -> float:
    """
    Bits per dim of held-out frames under a per-channel Gaussian fit to the
    training frames.

    Raises:
        InsufficientData: Either set is empty
    """
    if not train or not heldout:
        raise InsufficientData('need training and held-out frames for the baseline')
    fit = np.concatenate([np.asarray(frames, dtype=np.float64) for frames in train])
    test = np.concatenate([np.asarray(frames, dtype=np.float64) for frames in heldout])
    mean = fit.mean(axis=0)
    variance = np.maximum(fit.var(axis=0), 1e-12)
    nll = 0.5 * np.log(2.0 * np.pi * variance) + 0.5 * (test - mean) ** 2 / variance
    return float(nll.sum()) / (test.size * LN2)
