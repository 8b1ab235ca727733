"""Content and speaker encoders producing prior means."""

import logging

import torch
from torch import nn
from torch.nn.utils.rnn import pack_padded_sequence, pad_packed_sequence

from flows.commons import sequence_mask
from priors.exceptions import EmptyInput, NonPositiveDuration, VocabularyOverflow
from priors.functional import batch_upsample

logger = logging.getLogger(__name__)


def run_bilstm(lstm: nn.LSTM, x: torch.Tensor, lengths: torch.Tensor) -> torch.Tensor:
    """Run a batch-first LSTM over padded sequences [B, T, C], padding left at zero."""
    packed = pack_padded_sequence(x, lengths.cpu(), batch_first=True, enforce_sorted=False)
    out, _ = lstm(packed)
    out, _ = pad_packed_sequence(out, batch_first=True, total_length=x.size(1))
    return out


class ContentEncoder(nn.Module):
    """
    Text, language and durations to the content prior mean.

    Phoneme and language embeddings are concatenated, passed through a
    stack of conv / batch-norm / ReLU / dropout layers and a BiLSTM, then
    upsampled to frames by the durations and smoothed by a second BiLSTM
    whose two directions are summed so that the output width equals
    ``out_channels``.
    """

    def __init__(
        self,
        n_phonemes: int,
        n_languages: int,
        out_channels: int,
        phoneme_embedding_dim: int = 64,
        language_embedding_dim: int = 8,
        conv_channels: int = 128,
        n_conv_layers: int = 4,
        kernel_size: int = 5,
        p_dropout: float = 0.2,
    ):
        super().__init__()
        self.n_phonemes = n_phonemes
        self.n_languages = n_languages
        self.out_channels = out_channels

        self.emb_phoneme = nn.Embedding(n_phonemes, phoneme_embedding_dim)
        self.emb_language = nn.Embedding(n_languages, language_embedding_dim)

        self.convs = nn.ModuleList()
        self.norms = nn.ModuleList()
        in_channels = phoneme_embedding_dim + language_embedding_dim
        for _ in range(n_conv_layers):
            self.convs.append(
                nn.Conv1d(in_channels, conv_channels, kernel_size, padding=kernel_size // 2)
            )
            self.norms.append(nn.BatchNorm1d(conv_channels))
            in_channels = conv_channels
        self.drop = nn.Dropout(p_dropout)

        self.lstm_phoneme = nn.LSTM(
            in_channels, out_channels, batch_first=True, bidirectional=True
        )
        self.lstm_frame = nn.LSTM(
            2 * out_channels, out_channels, batch_first=True, bidirectional=True
        )

    def check_inputs(
        self, phonemes: torch.Tensor, phoneme_lengths: torch.Tensor, languages: torch.Tensor, durations: torch.Tensor
    ) -> None:
        if phonemes.size(1) == 0 or torch.any(phoneme_lengths < 1):
            raise EmptyInput('an utterance needs at least one phoneme')
        valid = sequence_mask(phoneme_lengths, phonemes.size(1))
        ids = phonemes[valid]
        if ids.min() < 0 or ids.max() >= self.n_phonemes:
            raise VocabularyOverflow(f'phoneme ids must lie in [0, {self.n_phonemes})')
        if languages.min() < 0 or languages.max() >= self.n_languages:
            raise VocabularyOverflow(f'language ids must lie in [0, {self.n_languages})')
        if torch.any(durations[valid] < 1):
            raise NonPositiveDuration('every phoneme must last at least one frame')

    def forward(
        self,
        phonemes: torch.Tensor,
        phoneme_lengths: torch.Tensor,
        languages: torch.Tensor,
        durations: torch.Tensor,
        max_frames: int | None = None,
    ) -> torch.Tensor:
        """
        Args:
            phonemes: Padded phoneme ids [B, L]
            phoneme_lengths: Valid phonemes per utterance [B]
            languages: Language ids [B]
            durations: Padded frame counts [B, L], zero on padding
            max_frames: Output length, defaults to the longest utterance

        Returns:
            Content prior means [B, out_channels, T], zero beyond each utterance
        """
        self.check_inputs(phonemes, phoneme_lengths, languages, durations)
        phone_mask = sequence_mask(phoneme_lengths, phonemes.size(1))
        durations = durations * phone_mask.long()
        frame_lengths = durations.sum(dim=1)
        if max_frames is None:
            max_frames = int(frame_lengths.max())

        x_mask = phone_mask.unsqueeze(1).float()
        language = self.emb_language(languages).unsqueeze(1).expand(-1, phonemes.size(1), -1)
        x = torch.cat([self.emb_phoneme(phonemes), language], dim=-1).transpose(1, 2)
        for conv, norm in zip(self.convs, self.norms):
            x = self.drop(torch.relu(norm(conv(x * x_mask))))
        x = x * x_mask

        h = run_bilstm(self.lstm_phoneme, x.transpose(1, 2), phoneme_lengths)
        h = batch_upsample(h, durations, max_frames)
        h = run_bilstm(self.lstm_frame, h, frame_lengths)
        mu = h[..., : self.out_channels] + h[..., self.out_channels :]

        frame_mask = sequence_mask(frame_lengths, max_frames).unsqueeze(1).to(mu.dtype)
        return mu.transpose(1, 2) * frame_mask


class SpeakerEncoder(nn.Module):
    """Single affine map from a speaker embedding to the speaker prior mean."""

    def __init__(self, speaker_dim: int, out_channels: int):
        super().__init__()
        self.proj = nn.Linear(speaker_dim, out_channels)

    def forward(self, speaker: torch.Tensor, n_frames: int) -> torch.Tensor:
        """Project [B, speaker_dim] and broadcast over time to [B, out_channels, n_frames]."""
        return self.proj(speaker).unsqueeze(-1).expand(-1, -1, n_frames)
