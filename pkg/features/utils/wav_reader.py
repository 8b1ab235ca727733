"""Reading RIFF/WAVE files into ``WaveForm`` values."""

import logging
from pathlib import Path

import numpy as np
import soundfile as sf

from features.exceptions import MalformedRiff, UnsupportedFormat
from features.models import SAMPLE_RATE, WaveForm

logger = logging.getLogger(__name__)

PCM_SCALE = 32768.0


def load_wav(path: str | Path) -> WaveForm:
    """
    Load a 16-bit PCM mono 16 kHz WAV file.

    Args:
        path: Path of the WAV file

    Returns:
        WaveForm with samples divided by 32768

    Raises:
        MalformedRiff: The file cannot be parsed as a RIFF/WAVE container
        UnsupportedFormat: The container holds anything but 16-bit PCM mono at 16 kHz
    """
    path = Path(path)
    if not path.is_file():
        raise MalformedRiff(f'{path}: no such file')

    try:
        info = sf.info(str(path))
    except (sf.SoundFileError, RuntimeError) as exc:
        raise MalformedRiff(f'{path}: {exc}') from exc

    if info.format != 'WAV':
        raise MalformedRiff(f'{path}: container is {info.format}, not RIFF/WAVE')
    if info.subtype != 'PCM_16':
        raise UnsupportedFormat(f'{path}: sample format {info.subtype} is not 16-bit PCM')
    if info.channels != 1:
        raise UnsupportedFormat(f'{path}: {info.channels} channels, expected mono')
    if info.samplerate != SAMPLE_RATE:
        raise UnsupportedFormat(f'{path}: sample rate {info.samplerate} Hz, expected {SAMPLE_RATE}')

    try:
        pcm, sample_rate = sf.read(str(path), dtype='int16', always_2d=False)
    except (sf.SoundFileError, RuntimeError) as exc:
        raise MalformedRiff(f'{path}: {exc}') from exc

    logger.debug('loaded %s (%d samples)', path, pcm.size)
    return WaveForm(samples=pcm.astype(np.float64) / PCM_SCALE, sample_rate=sample_rate)
