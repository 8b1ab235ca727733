"""
Repository for per-utterance feature files.

A feature file is a GVCK container with tensors ``mel`` (T x 80) and
``f0_norm`` (T) and a header carrying the utterance, speaker and language ids.
"""

from pathlib import Path

import numpy as np

from config.exceptions import ShapeMismatch
from features.models import MelSpectrogram, NormalizedPitch
from storage.container import TensorContainer
from storage.exceptions import CorruptIndex
from storage.models import FeatureRecord

FEATURE_KIND = 'features'
SUFFIX = '.gvck'


class FeatureRepository:
    """Read and write feature files."""

    @staticmethod
    def path_for(directory: str | Path, utterance_id: str) -> Path:
        return Path(directory) / f'{utterance_id}{SUFFIX}'

    @staticmethod
    def to_container(record: FeatureRecord) -> TensorContainer:
        return TensorContainer(
            meta={
                'kind': FEATURE_KIND,
                'utterance_id': record.utterance_id,
                'speaker_id': int(record.speaker_id),
                'language_id': int(record.language_id),
            },
            tensors={
                'mel': record.mel.frames,
                'f0_norm': record.f0_norm.values.astype(np.float32),
            },
        )

    @staticmethod
    def from_container(container: TensorContainer) -> FeatureRecord:
        """
        Build a record from a parsed container.

        Raises:
            CorruptIndex: Required tensors or header fields are missing
            ShapeMismatch: mel and f0_norm disagree in length
        """
        meta = container.meta
        if meta.get('kind') != FEATURE_KIND:
            raise CorruptIndex(f'container kind {meta.get("kind")!r} is not a feature file')
        missing = {'mel', 'f0_norm'} - set(container.tensors)
        if missing:
            raise CorruptIndex(f'feature file lacks tensors {sorted(missing)}')
        mel = container.tensors['mel']
        if mel.ndim != 2:
            raise ShapeMismatch(f'mel must be two-dimensional, got shape {mel.shape}')
        return FeatureRecord(
            utterance_id=str(meta['utterance_id']),
            speaker_id=int(meta.get('speaker_id', -1)),
            language_id=int(meta.get('language_id', -1)),
            mel=MelSpectrogram(frames=mel),
            f0_norm=NormalizedPitch(values=container.tensors['f0_norm']),
        )

    @classmethod
    def save(cls, record: FeatureRecord, path: str | Path) -> Path:
        """
        Write a feature file.

        Args:
            record: Features and ids of one utterance
            path: Destination file

        Returns:
            The written path
        """
        return cls.to_container(record).write(path)

    @classmethod
    def load(cls, path: str | Path) -> FeatureRecord:
        """Read a feature file written by ``save``."""
        return cls.from_container(TensorContainer.read(path))
