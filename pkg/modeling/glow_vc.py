"""
GlowVC: a flow decoder over mel frames with factorized Gaussian priors.

The conditional variant feeds the speaker vector to every coupling layer and
factorizes the latent into (content, pitch). The explicit variant leaves the
flow unconditioned and adds a speaker block whose prior mean is an affine
projection of the speaker vector.
"""

import logging

import torch
from torch import nn

from config.exceptions import ModelNotFrozen, ShapeMismatch, WrongVariant
from config.run_config import ModelConfig
from features.models import MelSpectrogram
from flows.decoder import FlowDecoder
from modeling.bundles import Batch, ConditioningBundle, collate_bundles
from modeling.partition import CONDITIONAL, EXPLICIT, merge_blocks, partition_latent
from priors.encoders import ContentEncoder, SpeakerEncoder
from priors.exceptions import VocabularyOverflow
from priors.functional import gaussian_loglik
from priors.models import PriorStats, SpeakerEmbedding

logger = logging.getLogger(__name__)


class GlowVCModel(nn.Module):
    """
    Both GlowVC variants behind one interface.

    Attributes:
        config: Hyperparameters the model was built from
        partition: Latent layout
        encoder: Content prior network
        speaker_table: Learned per-speaker embeddings
        speaker_encoder: Speaker prior projection (explicit variant only)
        decoder: Invertible flow from mel frames to latents
    """

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        self.partition = config.latent_partition
        self.variant = config.variant

        self.encoder = ContentEncoder(
            n_phonemes=config.n_phonemes,
            n_languages=config.n_languages,
            out_channels=self.partition.content_width,
            phoneme_embedding_dim=config.phoneme_embedding_dim,
            language_embedding_dim=config.language_embedding_dim,
            conv_channels=config.encoder_conv_channels,
            n_conv_layers=config.encoder_conv_layers,
            kernel_size=config.encoder_kernel_size,
            p_dropout=config.p_dropout,
        )
        self.speaker_table = nn.Embedding(config.n_speakers, config.speaker_dim)
        self.speaker_encoder = (
            SpeakerEncoder(config.speaker_dim, self.partition.speaker_width)
            if self.variant == EXPLICIT
            else None
        )
        self.decoder = FlowDecoder(
            in_channels=config.n_channels,
            hidden_channels=config.hidden_channels,
            n_blocks=config.n_blocks,
            n_sqz=config.n_sqz,
            kernel_size=config.kernel_size,
            gin_channels=config.speaker_dim if self.variant == CONDITIONAL else 0,
            init=config.flow_init,
        )

    @property
    def n_channels(self) -> int:
        return self.config.n_channels

    def n_parameters(self) -> int:
        return sum(p.numel() for p in self.parameters() if p.requires_grad)

    # Speakers

    def speaker_vectors(self, batch: Batch) -> torch.Tensor:
        """Speaker vectors [B, S] from the batch or the speaker table."""
        if batch.speaker_vectors is not None:
            if batch.speaker_vectors.size(1) != self.config.speaker_dim:
                raise ShapeMismatch(
                    f'speaker vectors have {batch.speaker_vectors.size(1)} values, '
                    f'model expects {self.config.speaker_dim}'
                )
            return batch.speaker_vectors
        ids = batch.speaker_ids
        if ids.min() < 0 or ids.max() >= self.config.n_speakers:
            raise VocabularyOverflow(f'speaker ids must lie in [0, {self.config.n_speakers})')
        return self.speaker_table(ids)

    @torch.no_grad()
    def embedding_for(self, speaker_id: int) -> SpeakerEmbedding:
        """The learned embedding of a training speaker."""
        if not 0 <= speaker_id < self.config.n_speakers:
            raise VocabularyOverflow(f'speaker id {speaker_id} outside [0, {self.config.n_speakers})')
        vector = self.speaker_table.weight[speaker_id].detach().float().cpu().numpy()
        return SpeakerEmbedding(vector=vector)

    def speaker_condition(self, speaker: torch.Tensor) -> torch.Tensor | None:
        """Flow condition: the speaker vector for the conditional variant, else None."""
        return speaker if self.variant == CONDITIONAL else None

    def speaker_prior(self, speaker: torch.Tensor, n_frames: int) -> PriorStats:
        """
        Speaker block prior, the projection broadcast over time.

        Raises:
            WrongVariant: The model is conditional
        """
        if self.speaker_encoder is None:
            raise WrongVariant('only the explicit variant has a speaker prior')
        return PriorStats(mu=self.speaker_encoder(speaker, n_frames))

    # Priors

    def prior_means(self, batch: Batch, speaker: torch.Tensor | None = None) -> dict[str, PriorStats]:
        """Per-block prior statistics, zero beyond each utterance."""
        if speaker is None:
            speaker = self.speaker_vectors(batch)
        mask = batch.mask.to(speaker.dtype)
        content = self.encoder(
            batch.phonemes, batch.phoneme_lengths, batch.languages, batch.durations, batch.max_frames
        )
        stats = {
            'content': PriorStats(mu=content.to(speaker.dtype)),
            'pitch': PriorStats(mu=batch.f0_norm.to(speaker.dtype).unsqueeze(1) * mask),
        }
        if self.variant == EXPLICIT:
            stats['speaker'] = PriorStats(mu=self.speaker_prior(speaker, batch.max_frames).mu * mask)
        return stats

    def log_prior(self, z: torch.Tensor, batch: Batch, stats: dict[str, PriorStats] | None = None) -> torch.Tensor:
        """
        Sum of block log-likelihoods of the latent over valid frames.

        Returns:
            float64 tensor [B]
        """
        if stats is None:
            stats = self.prior_means(batch)
        blocks = partition_latent(z, self.partition)
        mask = batch.mask
        total = torch.zeros(z.size(0), dtype=torch.float64, device=z.device)
        for name in self.partition.names:
            total = total + gaussian_loglik(blocks[name], stats[name], mask)
        return total

    def require_frozen(self) -> None:
        """
        Inference runs on a model in evaluation mode and never switches it.

        Raises:
            ModelNotFrozen: The model is in training mode
        """
        if self.training:
            raise ModelNotFrozen('call eval() on the model before inference')

    # Flow

    def encode(self, mel: torch.Tensor, mask: torch.Tensor, speaker: torch.Tensor | None = None):
        """Frames to latents; returns (z, logdet)."""
        return self.decoder(mel, mask, g=self.speaker_condition(speaker))

    def decode(self, z: torch.Tensor, mask: torch.Tensor, speaker: torch.Tensor | None = None) -> torch.Tensor:
        """Latents to frames."""
        return self.decoder.inverse(z, mask, g=self.speaker_condition(speaker))

    # Objective

    def nll(self, batch: Batch) -> torch.Tensor:
        """
        Negative log-likelihood of each utterance's mel frames.

        Returns:
            float64 tensor [B]
        """
        if batch.mel is None:
            raise ShapeMismatch('the batch carries no mel frames')
        if batch.mel.size(1) != self.n_channels:
            raise ShapeMismatch(f'mel has {batch.mel.size(1)} channels, model expects {self.n_channels}')
        speaker = self.speaker_vectors(batch)
        z, logdet = self.encode(batch.mel, batch.mask, speaker)
        log_prior = self.log_prior(z, batch, self.prior_means(batch, speaker))
        return -(log_prior + logdet)

    def loss(self, batch: Batch) -> torch.Tensor:
        """Batch-mean nll, a float64 scalar."""
        return self.nll(batch).mean()

    # Generation

    @torch.no_grad()
    def tts_infer(self, batch: Batch, temperature: float = 1.0, generator: torch.Generator | None = None) -> torch.Tensor:
        """
        Sample every latent block around its prior mean and decode.

        Returns:
            Frames [B, C, T], zero beyond each utterance
        """
        if temperature < 0:
            raise ValueError('temperature must be non-negative')
        speaker = self.speaker_vectors(batch)
        stats = self.prior_means(batch, speaker)
        mask = batch.mask.to(speaker.dtype)
        mu = merge_blocks({name: s.mu for name, s in stats.items()}, self.partition)
        z = mu
        if temperature > 0:
            noise = torch.randn(mu.shape, generator=generator, dtype=mu.dtype, device=mu.device)
            z = mu + temperature * noise
        return self.decode(z * mask, mask, speaker)


def bundle_batch(bundles: list[ConditioningBundle], mels: list[MelSpectrogram] | None, model: GlowVCModel) -> Batch:
    for bundle in bundles:
        bundle.content.check_vocabulary(model.config.n_phonemes, model.config.n_languages)
    dtype = next(model.parameters()).dtype
    return collate_bundles(bundles, mels).to(dtype)


def log_prior(z: torch.Tensor, bundle: ConditioningBundle, model: GlowVCModel) -> float:
    """Log-prior of a single latent [C, T] or [1, C, T] under ``bundle``."""
    if z.dim() == 2:
        z = z.unsqueeze(0)
    return float(model.log_prior(z, bundle_batch([bundle], None, model))[0])


def nll(mel: MelSpectrogram, bundle: ConditioningBundle, model: GlowVCModel) -> float:
    """Negative log-likelihood of one utterance."""
    return float(model.nll(bundle_batch([bundle], [mel], model))[0])


def tts_infer(
    bundle: ConditioningBundle, model: GlowVCModel, temperature: float = 1.0, generator: torch.Generator | None = None
) -> MelSpectrogram:
    """Generate mel frames for one utterance from its conditioning."""
    frames = model.tts_infer(bundle_batch([bundle], None, model), temperature, generator)
    return MelSpectrogram(frames=frames[0].T.float().cpu().numpy())
