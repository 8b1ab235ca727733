"""
Unit tests for conditioning bundles and batch collation.
"""
import numpy as np
import pytest
import torch

from config.exceptions import ShapeMismatch
from features.models import MelSpectrogram, NormalizedPitch
from modeling.bundles import ConditioningBundle, collate_bundles
from priors.models import ContentInput, SpeakerEmbedding


def bundle(durations, speaker_id=0, speaker=None):
    content = ContentInput(phoneme_ids=np.arange(len(durations)), language_id=1, durations=durations)
    pitch = NormalizedPitch(values=np.linspace(-1, 1, int(np.sum(durations))))
    return ConditioningBundle(content=content, pitch=pitch, speaker=speaker, speaker_id=speaker_id)


@pytest.mark.unit
class TestConditioningBundle:
    """Test suite for ConditioningBundle."""

    def test_pitch_length_must_match(self):
        """Pitch frames must equal the summed durations."""
        content = ContentInput(phoneme_ids=[1, 2], language_id=0, durations=[2, 2])
        with pytest.raises(ShapeMismatch):
            ConditioningBundle(content=content, pitch=NormalizedPitch(values=np.zeros(3)), speaker_id=0)

    def test_speaker_required(self):
        content = ContentInput(phoneme_ids=[1], language_id=0, durations=[2])
        with pytest.raises(ShapeMismatch):
            ConditioningBundle(content=content, pitch=NormalizedPitch(values=np.zeros(2)))

    def test_mel_length_checked(self):
        with pytest.raises(ShapeMismatch):
            bundle([1, 2]).check_mel(MelSpectrogram(frames=np.zeros((4, 80))))


@pytest.mark.unit
class TestCollateBundles:
    """Test suite for collate_bundles."""

    def test_padding(self):
        """Shorter utterances are zero-padded and masked."""
        mels = [MelSpectrogram(frames=np.ones((3, 80))), MelSpectrogram(frames=np.ones((5, 80)))]
        batch = collate_bundles([bundle([1, 2], 0), bundle([2, 1, 2], 2)], mels)

        assert batch.size == 2
        assert batch.max_frames == 5
        assert batch.phonemes.shape == (2, 3)
        assert batch.durations[0].tolist() == [1, 2, 0]
        assert batch.frame_lengths.tolist() == [3, 5]
        assert batch.speaker_ids.tolist() == [0, 2]
        assert batch.speaker_vectors is None
        assert batch.mel.shape == (2, 80, 5)
        assert torch.all(batch.mel[0, :, 3:] == 0)
        assert batch.mask[0, 0].tolist() == [1, 1, 1, 0, 0]
        assert torch.all(batch.f0_norm[0, 3:] == 0)

    def test_speaker_vectors(self):
        speaker = SpeakerEmbedding(vector=np.ones(6))
        batch = collate_bundles([bundle([1], speaker=speaker), bundle([2], speaker=speaker)])
        assert batch.speaker_vectors.shape == (2, 6)
        assert batch.mel is None

    def test_mixed_speakers_rejected(self):
        speaker = SpeakerEmbedding(vector=np.ones(6))
        with pytest.raises(ShapeMismatch):
            collate_bundles([bundle([1], speaker=speaker), bundle([2], speaker_id=1)])

    def test_mel_mismatch_rejected(self):
        with pytest.raises(ShapeMismatch):
            collate_bundles([bundle([1, 1])], [MelSpectrogram(frames=np.zeros((3, 80)))])

    def test_empty(self):
        with pytest.raises(ShapeMismatch):
            collate_bundles([])

    def test_repeat_and_cast(self):
        """repeat tiles every item; to casts the floating tensors only."""
        mels = [MelSpectrogram(frames=np.ones((3, 80)))]
        batch = collate_bundles([bundle([1, 2])], mels).repeat(3).to(torch.float64)
        assert batch.size == 3
        assert batch.mel.dtype == torch.float64
        assert batch.phonemes.dtype == torch.int64
        assert batch.frame_lengths.tolist() == [3, 3, 3]
