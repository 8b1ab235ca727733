"""Feature extraction utilities."""

from .file_processors import WavFileProcessor, extract_features
from .pitch import estimate_f0, normalize_f0
from .spectrogram import mel_spectrogram
from .wav_reader import load_wav

__all__ = [
    'WavFileProcessor',
    'estimate_f0',
    'extract_features',
    'load_wav',
    'mel_spectrogram',
    'normalize_f0',
]
