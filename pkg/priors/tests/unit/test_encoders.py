"""
Unit tests for the content and speaker encoders.
"""
import pytest
import torch

from priors.encoders import ContentEncoder, SpeakerEncoder
from priors.exceptions import EmptyInput, NonPositiveDuration, VocabularyOverflow


def encoder(**overrides):
    params = dict(
        n_phonemes=10,
        n_languages=2,
        out_channels=40,
        phoneme_embedding_dim=8,
        language_embedding_dim=2,
        conv_channels=8,
        n_conv_layers=2,
    )
    return ContentEncoder(**{**params, **overrides})


def single(phonemes, durations, language=0):
    return (
        torch.tensor([phonemes]),
        torch.tensor([len(phonemes)]),
        torch.tensor([language]),
        torch.tensor([durations]),
    )


@pytest.mark.unit
class TestContentEncoder:
    """Test suite for ContentEncoder."""

    def test_output_shape(self):
        """Three phonemes lasting (1, 2, 1) frames give a 40 x 4 mean."""
        mu = encoder().eval()(*single([1, 2, 3], [1, 2, 1]))
        assert mu.shape == (1, 40, 4)

    def test_eval_is_deterministic(self):
        """Dropout is off in evaluation: two passes agree exactly."""
        model = encoder().eval()
        inputs = single([4, 5, 6, 7], [2, 1, 3, 1])
        assert torch.equal(model(*inputs), model(*inputs))

    def test_padding_does_not_leak(self):
        """An utterance padded inside a batch matches the same utterance alone."""
        model = encoder().eval()
        alone = model(*single([1, 2], [2, 1]))
        batch = model(
            torch.tensor([[1, 2, 0, 0], [3, 4, 5, 6]]),
            torch.tensor([2, 4]),
            torch.tensor([0, 1]),
            torch.tensor([[2, 1, 0, 0], [1, 1, 2, 2]]),
        )
        assert batch.shape == (2, 40, 6)
        torch.testing.assert_close(batch[:1, :, :3], alone, rtol=1e-5, atol=1e-6)
        assert torch.all(batch[0, :, 3:] == 0)

    def test_permutation_plumbing(self):
        """With per-position layers, swapping two phonemes swaps their frame segments."""
        model = encoder(kernel_size=1).eval()
        with torch.no_grad():
            for lstm in (model.lstm_phoneme, model.lstm_frame):
                hidden = lstm.hidden_size
                for suffix in ('', '_reverse'):
                    getattr(lstm, f'weight_hh_l0{suffix}').zero_()
                    getattr(lstm, f'bias_ih_l0{suffix}')[hidden : 2 * hidden].fill_(-100.0)
        mu = model(*single([1, 2, 3], [1, 2, 3]))
        swapped = model(*single([3, 2, 1], [3, 2, 1]))
        torch.testing.assert_close(swapped[:, :, 0:3], mu[:, :, 3:6])
        torch.testing.assert_close(swapped[:, :, 3:5], mu[:, :, 1:3])
        torch.testing.assert_close(swapped[:, :, 5:6], mu[:, :, 0:1])

    def test_language_changes_output(self):
        model = encoder().eval()
        assert not torch.allclose(model(*single([1, 2], [1, 1], 0)), model(*single([1, 2], [1, 1], 1)))

    def test_max_frames_pads(self):
        mu = encoder().eval()(*single([1, 2], [1, 1]), max_frames=5)
        assert mu.shape == (1, 40, 5)
        assert torch.all(mu[:, :, 2:] == 0)

    def test_empty_input(self):
        with pytest.raises(EmptyInput):
            encoder()(torch.zeros(1, 0, dtype=torch.long), torch.tensor([0]), torch.tensor([0]),
                      torch.zeros(1, 0, dtype=torch.long))

    def test_vocabulary_overflow(self):
        with pytest.raises(VocabularyOverflow):
            encoder()(*single([1, 10], [1, 1]))

    def test_language_overflow(self):
        with pytest.raises(VocabularyOverflow):
            encoder()(*single([1, 2], [1, 1], language=2))

    def test_zero_duration(self):
        with pytest.raises(NonPositiveDuration):
            encoder()(*single([1, 2], [1, 0]))


@pytest.mark.unit
class TestSpeakerEncoder:
    """Test suite for SpeakerEncoder."""

    def test_zero_map(self):
        """A zero affine map gives a zero 39 x T mean."""
        model = SpeakerEncoder(speaker_dim=192, out_channels=39)
        with torch.no_grad():
            model.proj.weight.zero_()
            model.proj.bias.zero_()
        mu = model(torch.randn(1, 192), n_frames=5)
        assert mu.shape == (1, 39, 5)
        assert torch.all(mu == 0)

    def test_basis_response(self):
        """With an identity-padded weight, e_1 selects the first weight column."""
        model = SpeakerEncoder(speaker_dim=3, out_channels=5)
        with torch.no_grad():
            model.proj.weight.copy_(torch.eye(5, 3))
            model.proj.bias.zero_()
        mu = model(torch.tensor([[1.0, 0.0, 0.0]]), n_frames=2)
        assert mu[0, :, 0].tolist() == [1.0, 0.0, 0.0, 0.0, 0.0]

    def test_broadcast_over_time(self):
        """All seven frames carry the same mean."""
        mu = SpeakerEncoder(speaker_dim=4, out_channels=3)(torch.randn(2, 4), n_frames=7)
        assert torch.equal(mu, mu[:, :, :1].expand(-1, -1, 7))
