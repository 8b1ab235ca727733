"""
Unit tests for the disentanglement and density metrics.
"""
import dataclasses
import math

import numpy as np
import pytest

from synthlab.exceptions import InsufficientData, LengthMismatch
from synthlab.generator import generate_corpus
from synthlab.metrics import (
    bits_per_dim,
    content_preservation_score,
    diagonal_gaussian_bits_per_dim,
    speaker_centroids,
    speaker_transfer_accuracy,
    trajectory_correlation,
)


@pytest.mark.unit
class TestSpeakerTransferAccuracy:
    """Test suite for speaker_transfer_accuracy."""

    def test_genuine_target_utterances(self, small_corpus):
        """Real utterances of the intended speaker are all classified correctly."""
        converted = [(u.mel.frames, u.speaker_id) for u in small_corpus.split('heldout')]
        assert speaker_transfer_accuracy(converted, small_corpus) == 1.0

    def test_unmodified_sources(self, small_corpus):
        """Unconverted sources labelled with other targets score zero."""
        converted = [(u.mel.frames, (u.speaker_id + 1) % 3) for u in small_corpus.split('heldout')]
        assert speaker_transfer_accuracy(converted, small_corpus) == 0.0

    def test_random_features_score_chance(self, small_corpus, rng):
        """Random frames with random targets land near one in three for three speakers."""
        converted = [(rng.normal(size=(5, 80)), int(rng.integers(0, 3))) for _ in range(600)]
        assert speaker_transfer_accuracy(converted, small_corpus) == pytest.approx(1 / 3, abs=0.08)

    def test_centroids_per_speaker(self, small_corpus):
        centroids = speaker_centroids(small_corpus)
        assert sorted(centroids) == [0, 1, 2]
        assert centroids[0].shape == (80,)

    def test_nothing_to_classify(self, small_corpus):
        with pytest.raises(InsufficientData):
            speaker_transfer_accuracy([], small_corpus)

    def test_single_speaker_split(self, small_corpus):
        corpus = dataclasses.replace(
            small_corpus, utterances=[u for u in small_corpus.utterances if u.speaker_id == 0]
        )
        with pytest.raises(InsufficientData):
            speaker_transfer_accuracy([(np.zeros((2, 80)), 0)], corpus)


@pytest.mark.unit
class TestContentPreservation:
    """Test suite for content_preservation_score."""

    @pytest.fixture
    def identity_corpus(self, small_synth_config):
        return generate_corpus(dataclasses.replace(small_synth_config, mixing='identity'))

    def test_identical(self, small_corpus):
        frames = [u.mel.frames for u in small_corpus.split('heldout')]
        assert content_preservation_score(frames, frames, small_corpus) == pytest.approx(1.0)

    def test_content_replaced_by_noise(self, identity_corpus):
        rng = np.random.default_rng(0)
        sources = [u.mel.frames for u in identity_corpus.utterances]
        converted = []
        for frames in sources:
            scrambled = frames.copy()
            scrambled[:, :40] = rng.normal(size=(len(frames), 40))
            converted.append(scrambled)
        assert abs(content_preservation_score(sources, converted, identity_corpus)) < 0.15

    def test_small_noise(self, small_corpus):
        rng = np.random.default_rng(0)
        sources = [u.mel.frames for u in small_corpus.utterances]
        converted = [f + 0.01 * f.std() * rng.normal(size=f.shape) for f in sources]
        assert content_preservation_score(sources, converted, small_corpus) > 0.99

    def test_list_length_mismatch(self, small_corpus):
        frames = [u.mel.frames for u in small_corpus.utterances]
        with pytest.raises(LengthMismatch):
            content_preservation_score(frames, frames[1:], small_corpus)

    def test_pair_length_mismatch(self, small_corpus):
        frames = small_corpus.utterances[0].mel.frames
        with pytest.raises(LengthMismatch):
            content_preservation_score([frames], [frames[:-1]], small_corpus)

    def test_empty(self, small_corpus):
        with pytest.raises(InsufficientData):
            content_preservation_score([], [], small_corpus)

    def test_constant_trajectories(self):
        assert trajectory_correlation(np.ones(4), np.ones(4)) == 1.0
        assert trajectory_correlation(np.ones(4), np.arange(4.0)) == 0.0


@pytest.mark.unit
class TestBitsPerDim:
    """Test suite for the density conversions."""

    def test_one_bit(self):
        assert bits_per_dim(7 * 80 * math.log(2), 7) == pytest.approx(1.0)

    def test_zero(self):
        assert bits_per_dim(0.0, 3) == 0.0

    def test_peak_gaussian(self):
        assert bits_per_dim(80 * 0.918939, 1) == pytest.approx(1.32576, abs=1e-5)

    def test_needs_frames(self):
        with pytest.raises(ValueError):
            bits_per_dim(1.0, 0)

    def test_gaussian_baseline(self):
        """Standard normal data costs 0.5 log2(2 pi e) bits per cell under its own fit."""
        rng = np.random.default_rng(0)
        train = [rng.normal(size=(5000, 4))]
        heldout = [rng.normal(size=(5000, 4))]
        expected = 0.5 * math.log2(2 * math.pi * math.e)
        assert diagonal_gaussian_bits_per_dim(train, heldout) == pytest.approx(expected, abs=0.03)

    def test_baseline_needs_data(self):
        with pytest.raises(InsufficientData):
            diagonal_gaussian_bits_per_dim([], [np.zeros((1, 2))])
