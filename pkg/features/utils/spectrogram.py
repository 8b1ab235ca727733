"""Log-mel spectrogram front-end (no edge padding, natural log with a floor)."""

from functools import lru_cache

import librosa
import numpy as np

from features.exceptions import TooShort
from features.models import MelSpectrogram, StftSettings, WaveForm


def frame_signal(samples: np.ndarray, win_length: int, hop_length: int) -> np.ndarray:
    """
    Slice a signal into overlapping frames without padding.

    Returns:
        Array of shape (1 + (N - win_length) // hop_length, win_length)
    """
    if samples.size < win_length:
        raise TooShort(f'{samples.size} samples is shorter than one {win_length}-sample window')
    return librosa.util.frame(samples, frame_length=win_length, hop_length=hop_length, axis=0)


@lru_cache(maxsize=8)
def mel_basis(settings: StftSettings) -> np.ndarray:
    """Triangular HTK-scale filterbank of shape (n_mels, n_fft // 2 + 1), peak 1."""
    return librosa.filters.mel(
        sr=settings.sample_rate,
        n_fft=settings.n_fft,
        n_mels=settings.n_mels,
        fmin=settings.fmin,
        fmax=settings.fmax,
        htk=True,
        norm=None,
        dtype=np.float64,
    )


def mel_center_frequencies(settings: StftSettings) -> np.ndarray:
    """Center frequency in Hz of every mel filter."""
    edges = librosa.mel_frequencies(
        n_mels=settings.n_mels + 2, fmin=settings.fmin, fmax=settings.fmax, htk=True
    )
    return edges[1:-1]


def power_spectrum(samples: np.ndarray, settings: StftSettings) -> np.ndarray:
    """Hann-windowed power spectrum, one row per frame."""
    frames = frame_signal(samples, settings.win_length, settings.hop_length)
    window = librosa.filters.get_window('hann', settings.win_length, fftbins=True)
    spectrum = np.fft.rfft(frames * window, n=settings.n_fft, axis=1)
    return np.abs(spectrum) ** 2


def mel_spectrogram(wave: WaveForm, settings: StftSettings | None = None) -> MelSpectrogram:
    """
    Compute the T x 80 log-mel spectrogram of a waveform.

    Each frame is windowed, transformed, reduced to power, projected on the
    mel filterbank and compressed with ``log(max(value, amplitude_floor))``.

    Raises:
        TooShort: The waveform is shorter than the analysis window
    """
    settings = settings or StftSettings()
    power = power_spectrum(wave.samples, settings)
    mel = power @ mel_basis(settings).T
    log_mel = np.log(np.maximum(mel, settings.amplitude_floor))
    return MelSpectrogram(
        frames=log_mel.astype(np.float32),
        frame_shift_ms=1000.0 * settings.hop_length / settings.sample_rate,
        frame_len_ms=1000.0 * settings.win_length / settings.sample_rate,
    )
