"""
Repository for corpus directories.

Layout::

    DIR/manifest.json      one record per utterance (pandas, orient='records')
    DIR/phonemes.json      phoneme symbol -> id
    DIR/languages.json     language symbol -> id
    DIR/features/<id>.gvck feature file per utterance
    DIR/generator.gvck     planted factors of a synthetic corpus (optional)
"""

import json
import logging
from dataclasses import asdict
from pathlib import Path

import numpy as np
import pandas as pd

from config.exceptions import ShapeMismatch
from storage.container import TensorContainer
from storage.exceptions import ContainerError, CorruptIndex
from storage.models import FeatureRecord
from storage.repositories.feature_repository import FeatureRepository

logger = logging.getLogger(__name__)

MANIFEST = 'manifest.json'
PHONEMES = 'phonemes.json'
LANGUAGES = 'languages.json'
FEATURES_DIR = 'features'
GENERATOR = 'generator.gvck'
GENERATOR_KIND = 'generator'
MANIFEST_COLUMNS = ['utterance_id', 'speaker_id', 'language_id', 'phoneme_ids', 'durations', 'n_frames', 'split']


class CorpusRepository:
    """Read and write corpus directories."""

    def __init__(self, root: str | Path):
        self.root = Path(root)

    @property
    def features_dir(self) -> Path:
        return self.root / FEATURES_DIR

    def feature_path(self, utterance_id: str) -> Path:
        return FeatureRepository.path_for(self.features_dir, utterance_id)

    # Manifest

    def save_manifest(self, manifest: pd.DataFrame) -> Path:
        self.root.mkdir(parents=True, exist_ok=True)
        path = self.root / MANIFEST
        manifest = manifest.reindex(columns=MANIFEST_COLUMNS)
        path.write_text(manifest.to_json(orient='records', indent=1))
        return path

    def load_manifest(self) -> pd.DataFrame:
        """
        Read the manifest.

        Raises:
            ContainerError: The manifest is missing or unreadable
        """
        path = self.root / MANIFEST
        if not path.exists():
            raise ContainerError(f'no manifest in {self.root}')
        try:
            manifest = pd.read_json(path, orient='records', dtype={'utterance_id': str})
        except ValueError as exc:
            raise ContainerError(f'unreadable manifest {path}: {exc}') from exc
        return manifest.reindex(columns=MANIFEST_COLUMNS)

    def entry(self, utterance_id: str) -> pd.Series:
        manifest = self.load_manifest()
        rows = manifest[manifest['utterance_id'] == utterance_id]
        if rows.empty:
            raise KeyError(utterance_id)
        return rows.iloc[0]

    # Vocabularies

    def save_vocab(self, phonemes: list[str], languages: list[str]) -> None:
        self.root.mkdir(parents=True, exist_ok=True)
        for name, symbols in ((PHONEMES, phonemes), (LANGUAGES, languages)):
            mapping = {symbol: index for index, symbol in enumerate(symbols)}
            (self.root / name).write_text(json.dumps(mapping, indent=1, sort_keys=True))

    def load_vocab(self) -> tuple[dict[str, int], dict[str, int]]:
        phonemes = json.loads((self.root / PHONEMES).read_text())
        languages = json.loads((self.root / LANGUAGES).read_text())
        return phonemes, languages

    # Features

    def save_features(self, record: FeatureRecord) -> Path:
        return FeatureRepository.save(record, self.feature_path(record.utterance_id))

    def load_features(self, utterance_id: str) -> FeatureRecord:
        return FeatureRepository.load(self.feature_path(utterance_id))

    # Generator factors

    def save_generator(self, config: dict, factors: dict[str, np.ndarray]) -> Path:
        tensors = {name: np.asarray(value, dtype=np.float32) for name, value in factors.items()}
        container = TensorContainer(meta={'kind': GENERATOR_KIND, 'config': config}, tensors=tensors)
        return container.write(self.root / GENERATOR)

    def load_generator(self) -> tuple[dict, dict[str, np.ndarray]]:
        container = TensorContainer.read(self.root / GENERATOR)
        if container.meta.get('kind') != GENERATOR_KIND:
            raise CorruptIndex('container is not a generator file')
        return container.meta['config'], container.tensors

    # Whole synthetic corpora

    def save_corpus(self, corpus) -> Path:
        """
        Write a ``SyntheticCorpus`` in the directory layout.

        Returns:
            The manifest path
        """
        for utterance in corpus.utterances:
            self.save_features(
                FeatureRecord(
                    utterance_id=utterance.utterance_id,
                    speaker_id=utterance.speaker_id,
                    language_id=utterance.language_id,
                    mel=utterance.mel,
                    f0_norm=utterance.f0_norm,
                )
            )
        manifest = pd.DataFrame(
            [
                {
                    'utterance_id': u.utterance_id,
                    'speaker_id': u.speaker_id,
                    'language_id': u.language_id,
                    'phoneme_ids': u.content.phoneme_ids.tolist(),
                    'durations': u.content.durations.tolist(),
                    'n_frames': u.n_frames,
                    'split': u.split,
                }
                for u in corpus.utterances
            ]
        )
        self.save_vocab(corpus.phoneme_symbols, corpus.language_symbols)
        config = asdict(corpus.config)
        config['factor_widths'] = list(corpus.config.factor_widths)
        self.save_generator(
            config,
            {
                'mixing': corpus.mixing,
                'bias': corpus.bias,
                'speaker_vectors': corpus.speaker_vectors,
                'phoneme_vectors': corpus.phoneme_vectors,
            },
        )
        path = self.save_manifest(manifest)
        logger.info('Wrote %d utterances to %s', len(corpus.utterances), self.root)
        return path

    def load_corpus(self):
        """
        Rebuild a ``SyntheticCorpus`` from the directory.

        Raises:
            ShapeMismatch: A feature file disagrees with its manifest entry
        """
        from features.models import MelSpectrogram
        from priors.models import ContentInput
        from synthlab.models import SynthConfig, SyntheticCorpus, Utterance

        config, factors = self.load_generator()
        config['factor_widths'] = tuple(config['factor_widths'])
        phonemes, languages = self.load_vocab()
        utterances = []
        for row in self.load_manifest().itertuples(index=False):
            record = self.load_features(row.utterance_id)
            if record.mel.n_frames != int(row.n_frames):
                raise ShapeMismatch(f'{row.utterance_id}: manifest says {row.n_frames} frames')
            utterances.append(
                Utterance(
                    utterance_id=row.utterance_id,
                    speaker_id=int(row.speaker_id),
                    language_id=int(row.language_id),
                    content=ContentInput(
                        phoneme_ids=np.asarray(row.phoneme_ids),
                        language_id=int(row.language_id),
                        durations=np.asarray(row.durations),
                    ),
                    mel=MelSpectrogram(frames=record.mel.frames),
                    f0_norm=record.f0_norm,
                    split=row.split,
                )
            )
        return SyntheticCorpus(
            config=SynthConfig(**config),
            utterances=utterances,
            speaker_vectors=factors['speaker_vectors'].astype(np.float64),
            phoneme_vectors=factors['phoneme_vectors'].astype(np.float64),
            mixing=factors['mixing'].astype(np.float64),
            bias=factors['bias'].astype(np.float64),
            phoneme_symbols=sorted(phonemes, key=phonemes.get),
            language_symbols=sorted(languages, key=languages.get),
        )
