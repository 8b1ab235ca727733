"""
Serializers validating run-config documents.

Every section rejects keys it does not know. Values left out are filled from
the section dataclass defaults afterwards, so fields are optional here.
"""

from rest_framework import serializers

from modeling.partition import CONDITIONAL, EXPLICIT, VARIANTS
from synthlab.models import MIXINGS


class StrictSerializer(serializers.Serializer):
    """Serializer that fails on keys outside its declared fields."""

    def to_internal_value(self, data):
        if not isinstance(data, dict):
            raise serializers.ValidationError('expected a JSON object')
        unknown = sorted(set(data) - set(self.fields))
        if unknown:
            raise serializers.ValidationError({key: ['Unknown field.'] for key in unknown})
        return super().to_internal_value(data)


def positive_int(**kwargs):
    return serializers.IntegerField(min_value=1, required=False, **kwargs)


class SynthSerializer(StrictSerializer):
    n_speakers = serializers.IntegerField(min_value=2, required=False)
    n_languages = positive_int()
    utterances_per_speaker = positive_int()
    phoneme_vocab_size = serializers.IntegerField(min_value=2, required=False)
    min_phonemes = positive_int()
    max_phonemes = positive_int()
    min_duration = positive_int()
    max_duration = positive_int()
    seed = serializers.IntegerField(min_value=0, required=False)
    n_channels = positive_int()
    factor_widths = serializers.ListField(child=serializers.IntegerField(min_value=1), min_length=3, max_length=3, required=False)
    noise_std = serializers.FloatField(min_value=0.0, required=False)
    content_noise = serializers.FloatField(min_value=0.0, required=False)
    pitch_noise = serializers.FloatField(min_value=0.0, required=False)
    mixing = serializers.ChoiceField(choices=MIXINGS, required=False)
    min_speaker_distance = serializers.FloatField(min_value=0.0, required=False)
    heldout_per_speaker = serializers.IntegerField(min_value=0, required=False)

    def validate(self, data):
        """Planted factors must cover the feature width."""
        n_channels = data.get('n_channels', 80)
        widths = data.get('factor_widths', [40, 39, 1])
        if sum(widths) != n_channels:
            raise serializers.ValidationError(
                f'factor_widths {widths} must sum to n_channels ({n_channels})'
            )
        return data


class ModelSerializer(StrictSerializer):
    variant = serializers.ChoiceField(choices=VARIANTS, required=False)
    n_channels = serializers.IntegerField(min_value=2, required=False)
    partition = serializers.ListField(child=serializers.IntegerField(), allow_null=True, required=False)
    n_blocks = positive_int()
    hidden_channels = positive_int(allow_null=True)
    kernel_size = positive_int()
    n_sqz = positive_int()
    flow_init = serializers.ChoiceField(choices=['orthogonal', 'identity'], required=False)
    n_phonemes = positive_int()
    n_languages = positive_int()
    n_speakers = positive_int()
    phoneme_embedding_dim = positive_int()
    language_embedding_dim = positive_int()
    encoder_conv_channels = positive_int()
    encoder_conv_layers = positive_int()
    encoder_kernel_size = positive_int()
    p_dropout = serializers.FloatField(min_value=0.0, max_value=1.0, required=False)
    speaker_dim = positive_int()

    def validate(self, data):
        """Check the latent partition against the variant and channel count."""
        variant = data.get('variant', EXPLICIT)
        n_channels = data.get('n_channels', 80)
        partition = data.get('partition')
        if partition is None:
            return data
        expected = 2 if variant == CONDITIONAL else 3
        if len(partition) != expected:
            raise serializers.ValidationError(
                {'partition': f'{variant} layout needs {expected} blocks, got {len(partition)}'}
            )
        if any(width < 1 for width in partition):
            raise serializers.ValidationError({'partition': 'block widths must be positive'})
        if sum(partition) != n_channels:
            raise serializers.ValidationError(
                {'partition': f'widths sum to {sum(partition)}, expected {n_channels}'}
            )
        return data


class TrainSerializer(StrictSerializer):
    batch_size = positive_int()
    learning_rate = serializers.FloatField(min_value=0.0, required=False)
    warmup_epochs = positive_int()
    max_steps = positive_int()
    seed = serializers.IntegerField(min_value=0, required=False)
    beta1 = serializers.FloatField(min_value=0.0, max_value=1.0, required=False)
    beta2 = serializers.FloatField(min_value=0.0, max_value=1.0, required=False)
    eps = serializers.FloatField(min_value=0.0, required=False)
    clip_grad_norm = serializers.FloatField(min_value=0.0, required=False)
    precision = serializers.ChoiceField(choices=['float32', 'float64'], required=False)
    log_interval = positive_int(allow_null=True)
    checkpoint_interval = positive_int(allow_null=True)
    smoothing_window = positive_int()


class StftSerializer(StrictSerializer):
    sample_rate = serializers.ChoiceField(choices=[16000], required=False)
    win_length = positive_int()
    hop_length = positive_int()
    n_fft = positive_int()
    n_mels = serializers.ChoiceField(choices=[80], required=False)
    fmin = serializers.FloatField(min_value=0.0, required=False)
    fmax = serializers.FloatField(min_value=0.0, required=False)
    amplitude_floor = serializers.FloatField(min_value=0.0, required=False)


class F0Serializer(StrictSerializer):
    sample_rate = serializers.ChoiceField(choices=[16000], required=False)
    win_length = positive_int()
    hop_length = positive_int()
    f0_min = serializers.FloatField(min_value=1.0, required=False)
    f0_max = serializers.FloatField(min_value=1.0, required=False)
    voicing_threshold = serializers.FloatField(min_value=0.0, max_value=1.0, required=False)
    rms_threshold = serializers.FloatField(min_value=0.0, required=False)

    def validate(self, data):
        if data.get('f0_min', 40.0) >= data.get('f0_max', 600.0):
            raise serializers.ValidationError('f0_min must be below f0_max')
        return data


class FeatureSerializer(StrictSerializer):
    stft = StftSerializer(required=False)
    f0 = F0Serializer(required=False)


class RunConfigSerializer(StrictSerializer):
    """Whole run-config document after preset merging."""

    preset = serializers.CharField()
    synth = SynthSerializer()
    model = ModelSerializer()
    train = TrainSerializer()
    features = FeatureSerializer()
