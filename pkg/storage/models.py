"""Records exchanged with the storage repositories."""

from dataclasses import dataclass

from config.exceptions import ShapeMismatch
from features.models import MelSpectrogram, NormalizedPitch


@dataclass(frozen=True)
class FeatureRecord:
    """
    One utterance worth of model inputs as stored in a feature file.

    Attributes:
        utterance_id: Unique utterance name
        speaker_id: Speaker index, -1 when unknown
        language_id: Language index, -1 when unknown
        mel: Log-mel spectrogram (T x 80)
        f0_norm: Normalized pitch (length T)
    """

    utterance_id: str
    speaker_id: int
    language_id: int
    mel: MelSpectrogram
    f0_norm: NormalizedPitch

    def __post_init__(self):
        if len(self.f0_norm) != self.mel.n_frames:
            raise ShapeMismatch(
                f'{self.utterance_id}: f0_norm has {len(self.f0_norm)} frames, '
                f'mel has {self.mel.n_frames}'
            )
