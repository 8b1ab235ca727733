"""
Run configuration: model, training, feature and synthetic-corpus
sections, the named presets, and the loader that merges JSON overrides onto
a preset.
"""

import json
import logging
from dataclasses import asdict, dataclass, field
from pathlib import Path

from django.conf import settings

from config.exceptions import ConfigurationError
from features.models import F0Settings, StftSettings
from modeling.partition import EXPLICIT, LatentPartition, default_widths
from synthlab.models import SynthConfig

logger = logging.getLogger(__name__)

HIDDEN_BY_VARIANT = {'conditional': 192, 'explicit': 384}


@dataclass(frozen=True)
class ModelConfig:
    """
    Model hyperparameters, stored verbatim in every checkpoint header.

    ``partition`` and ``hidden_channels`` may be left empty and are resolved
    from the variant: (79, 1) / (40, 39, 1) at 80 channels and 192 / 384
    coupling channels.
    """

    variant: str = EXPLICIT
    n_channels: int = 80
    partition: tuple[int, ...] | None = None
    n_blocks: int = 4
    hidden_channels: int | None = None
    kernel_size: int = 3
    n_sqz: int = 2
    flow_init: str = 'orthogonal'
    n_phonemes: int = 40
    n_languages: int = 2
    n_speakers: int = 3
    phoneme_embedding_dim: int = 64
    language_embedding_dim: int = 8
    encoder_conv_channels: int = 128
    encoder_conv_layers: int = 4
    encoder_kernel_size: int = 5
    p_dropout: float = 0.2
    speaker_dim: int = 192

    def __post_init__(self):
        widths = self.partition or default_widths(self.variant, self.n_channels)
        # Raises BadLayout for an unusable layout.
        LatentPartition(self.variant, tuple(widths), self.n_channels)
        object.__setattr__(self, 'partition', tuple(int(w) for w in widths))
        if self.hidden_channels is None:
            object.__setattr__(self, 'hidden_channels', HIDDEN_BY_VARIANT[self.variant])
        if self.flow_init not in ('orthogonal', 'identity'):
            raise ConfigurationError(f'unknown flow_init {self.flow_init!r}')

    @property
    def latent_partition(self) -> LatentPartition:
        return LatentPartition(self.variant, self.partition, self.n_channels)

    def to_dict(self) -> dict:
        data = asdict(self)
        data['partition'] = list(self.partition)
        return data

    @classmethod
    def from_dict(cls, data: dict) -> 'ModelConfig':
        data = dict(data)
        if data.get('partition') is not None:
            data['partition'] = tuple(data['partition'])
        return cls(**data)


@dataclass(frozen=True)
class TrainConfig:
    """
    Optimization settings.

    ``clip_grad_norm`` of 0 disables clipping. ``log_interval`` and
    ``checkpoint_interval`` of ``None`` fall back to ``GLOWVC_LOG_INTERVAL``
    and ``GLOWVC_CHECKPOINT_INTERVAL``.
    """

    batch_size: int = 32
    learning_rate: float = 1e-4
    warmup_epochs: int = 5
    max_steps: int = 2000
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    clip_grad_norm: float = 5.0
    precision: str = 'float32'
    log_interval: int | None = None
    checkpoint_interval: int | None = None
    smoothing_window: int = 50

    def __post_init__(self):
        for name in ('batch_size', 'warmup_epochs', 'max_steps', 'log_interval', 'smoothing_window'):
            if getattr(self, name) is not None and getattr(self, name) < 1:
                raise ConfigurationError(f'{name} must be positive')
        if self.learning_rate < 0 or self.clip_grad_norm < 0:
            raise ConfigurationError('learning_rate and clip_grad_norm must be non-negative')
        if self.precision not in ('float32', 'float64'):
            raise ConfigurationError(f'unknown precision {self.precision!r}')

    @property
    def resolved_log_interval(self) -> int:
        return self.log_interval or settings.GLOWVC_LOG_INTERVAL

    @property
    def resolved_checkpoint_interval(self) -> int:
        return self.checkpoint_interval or settings.GLOWVC_CHECKPOINT_INTERVAL


@dataclass(frozen=True)
class FeatureSection:
    stft: StftSettings = field(default_factory=StftSettings)
    f0: F0Settings = field(default_factory=F0Settings)


@dataclass(frozen=True)
class RunConfig:
    preset: str
    synth: SynthConfig
    model: ModelConfig
    train: TrainConfig
    features: FeatureSection


TINY_SYNTH = {
    'n_speakers': 3,
    'n_languages': 2,
    'utterances_per_speaker': 4,
    'phoneme_vocab_size': 4,
    'min_phonemes': 2,
    'max_phonemes': 3,
    'min_duration': 1,
    'max_duration': 2,
    'n_channels': 4,
    'factor_widths': [2, 1, 1],
    'heldout_per_speaker': 1,
}

PRESETS: dict[str, dict] = {
    'tiny': {
        'synth': TINY_SYNTH,
        'model': {
            'n_channels': 4,
            'n_sqz': 1,
            'n_blocks': 1,
            'hidden_channels': 3,
            'n_phonemes': 4,
            'phoneme_embedding_dim': 2,
            'language_embedding_dim': 1,
            'encoder_conv_channels': 2,
            'encoder_conv_layers': 2,
            'encoder_kernel_size': 3,
            'speaker_dim': 3,
        },
        'train': {'batch_size': 4, 'learning_rate': 1e-3, 'warmup_epochs': 1, 'max_steps': 10},
    },
    'desk': {
        'synth': {'n_speakers': 3, 'utterances_per_speaker': 100},
        'model': {'n_blocks': 4, 'encoder_conv_channels': 128},
        'train': {'batch_size': 32, 'learning_rate': 1e-3, 'warmup_epochs': 5, 'max_steps': 2000},
    },
    'paper': {
        'model': {'n_blocks': 12, 'encoder_conv_channels': 512},
        'train': {'batch_size': 32, 'learning_rate': 1e-4, 'warmup_epochs': 5, 'max_steps': 350000},
    },
}

SECTIONS = ('synth', 'model', 'train', 'features')


def merged_document(document: dict) -> dict:
    """Preset values with the document's per-section overrides applied."""
    preset = document.get('preset', settings.GLOWVC_DEFAULT_PRESET)
    if preset not in PRESETS:
        raise ConfigurationError(f'unknown preset {preset!r}; choose from {sorted(PRESETS)}')
    merged = {'preset': preset}
    for section in SECTIONS:
        values = dict(PRESETS[preset].get(section, {}))
        override = document.get(section, {})
        if section == 'features' and isinstance(override, dict):
            values = {key: dict(value) for key, value in override.items()}
        elif isinstance(override, dict):
            values.update(override)
        else:
            values = override
        merged[section] = values
    for key in document:
        if key not in SECTIONS and key != 'preset':
            merged[key] = document[key]
    return merged


def build_run_config(validated: dict) -> RunConfig:
    synth = dict(validated['synth'])
    if 'factor_widths' in synth:
        synth['factor_widths'] = tuple(synth['factor_widths'])
    model = dict(validated['model'])
    features = validated.get('features', {})
    return RunConfig(
        preset=validated['preset'],
        synth=SynthConfig(**synth),
        model=ModelConfig.from_dict(model),
        train=TrainConfig(**validated['train']),
        features=FeatureSection(
            stft=StftSettings(**features.get('stft', {})),
            f0=F0Settings(**features.get('f0', {})),
        ),
    )


def load_run_config(source: str | Path | dict | None = None, **section_overrides) -> RunConfig:
    """
    Load and validate a run configuration.

    Args:
        source: Path to a JSON document, an already parsed document, or
            ``None`` for the default preset
        section_overrides: Extra per-section values applied last, e.g.
            ``model={'variant': 'conditional'}``

    Raises:
        ConfigurationError: Unreadable JSON, unknown keys or invalid values
    """
    from config.serializers import RunConfigSerializer

    if source is None:
        document = {}
    elif isinstance(source, dict):
        document = dict(source)
    else:
        try:
            document = json.loads(Path(source).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigurationError(f'cannot read config {source}: {exc}') from exc
    if not isinstance(document, dict):
        raise ConfigurationError('a run config must be a JSON object')

    for section, values in section_overrides.items():
        document.setdefault(section, {})
        document[section] = {**document[section], **values}

    serializer = RunConfigSerializer(data=merged_document(document))
    if not serializer.is_valid():
        raise ConfigurationError(f'invalid run config: {json.dumps(serializer.errors, default=str)}')
    config = build_run_config(serializer.validated_data)
    logger.debug('Loaded run config with preset %s', config.preset)
    return config

