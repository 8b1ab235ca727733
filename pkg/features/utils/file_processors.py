"""
Batch feature extraction from a directory of WAV files.

An optional ``metadata.csv`` next to the WAVs assigns ids::

    utterance_id,speaker_id,language_id
    hello_01,0,1

Utterances missing from it get speaker and language id -1.
"""

import logging
from pathlib import Path

import pandas as pd

from config.exceptions import GlowVCError
from features.models import F0Settings, MelSpectrogram, NormalizedPitch, StftSettings, WaveForm
from features.utils.pitch import estimate_f0, normalize_f0
from features.utils.spectrogram import mel_spectrogram
from features.utils.wav_reader import load_wav
from storage.models import FeatureRecord
from storage.repositories import CorpusRepository

logger = logging.getLogger(__name__)

METADATA_FILE = 'metadata.csv'
METADATA_COLUMNS = ['utterance_id', 'speaker_id', 'language_id']


def extract_features(
    wave: WaveForm, stft: StftSettings | None = None, f0: F0Settings | None = None
) -> tuple[MelSpectrogram, NormalizedPitch]:
    """Log-mel spectrogram and normalized pitch of one waveform, frame-aligned."""
    mel = mel_spectrogram(wave, stft)
    pitch = normalize_f0(estimate_f0(wave, f0))
    return mel, pitch


class WavFileProcessor:
    """
    Turns WAV files into feature files.

    Processing continues past bad files; each failure is reported in the
    result's ``errors`` list.
    """

    def __init__(self, stft: StftSettings | None = None, f0: F0Settings | None = None):
        self.stft = stft or StftSettings()
        self.f0 = f0 or F0Settings()

    @staticmethod
    def read_metadata(wav_dir: str | Path) -> pd.DataFrame:
        """
        Read ``metadata.csv`` if present.

        Returns:
            DataFrame indexed by utterance id; empty when there is no file
        """
        path = Path(wav_dir) / METADATA_FILE
        if not path.exists():
            return pd.DataFrame(columns=METADATA_COLUMNS).set_index('utterance_id')
        metadata = pd.read_csv(path, dtype={'utterance_id': str})
        metadata.columns = metadata.columns.str.lower().str.strip()
        missing = set(METADATA_COLUMNS) - set(metadata.columns)
        if missing:
            raise GlowVCError(f'{path}: missing columns {", ".join(sorted(missing))}')
        return metadata[METADATA_COLUMNS].set_index('utterance_id')

    def process_file(self, path: str | Path, speaker_id: int = -1, language_id: int = -1) -> FeatureRecord:
        """Extract the features of one WAV file."""
        path = Path(path)
        mel, pitch = extract_features(load_wav(path), self.stft, self.f0)
        return FeatureRecord(
            utterance_id=path.stem,
            speaker_id=speaker_id,
            language_id=language_id,
            mel=mel,
            f0_norm=pitch,
        )

    def process_directory(self, wav_dir: str | Path, out_dir: str | Path) -> dict:
        """
        Extract every ``*.wav`` in ``wav_dir`` into a corpus directory.

        Args:
            wav_dir: Directory with WAV files and an optional metadata.csv
            out_dir: Corpus directory receiving features and a manifest

        Returns:
            dict with 'success', 'created', 'errors' keys
        """
        wav_dir = Path(wav_dir)
        paths = sorted(wav_dir.glob('*.wav'))
        if not paths:
            return {'success': False, 'created': 0, 'errors': [f'No WAV files in {wav_dir}']}

        try:
            metadata = self.read_metadata(wav_dir)
        except (GlowVCError, ValueError) as e:
            return {'success': False, 'created': 0, 'errors': [str(e)]}

        repository = CorpusRepository(out_dir)
        rows = []
        errors = []
        for path in paths:
            ids = metadata.loc[path.stem] if path.stem in metadata.index else None
            speaker_id = int(ids['speaker_id']) if ids is not None and pd.notna(ids['speaker_id']) else -1
            language_id = int(ids['language_id']) if ids is not None and pd.notna(ids['language_id']) else -1
            try:
                record = self.process_file(path, speaker_id, language_id)
            except GlowVCError as e:
                errors.append(f'{path.name}: {e!s}')
                continue
            repository.save_features(record)
            rows.append(
                {
                    'utterance_id': record.utterance_id,
                    'speaker_id': speaker_id,
                    'language_id': language_id,
                    'phoneme_ids': None,
                    'durations': None,
                    'n_frames': record.mel.n_frames,
                    'split': 'train',
                }
            )

        if rows:
            repository.save_manifest(pd.DataFrame(rows))
        logger.info('Extracted %d of %d files from %s', len(rows), len(paths), wav_dir)
        return {'success': len(rows) > 0, 'created': len(rows), 'errors': errors}
