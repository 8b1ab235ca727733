"""
Value types of the feature pipeline.

These are plain frozen dataclasses, not ORM models: audio and features are
persisted through GVCK containers (see ``storage``), never through a database.
"""

from dataclasses import dataclass, field

import numpy as np

from config.exceptions import ShapeMismatch
from features.exceptions import UnsupportedFormat

SAMPLE_RATE = 16000
N_MELS = 80


@dataclass(frozen=True)
class StftSettings:
    """
    Framing and filterbank settings of the log-mel front-end.

    Attributes:
        sample_rate: Expected sample rate in Hz
        win_length: Analysis window in samples (50 ms)
        hop_length: Frame shift in samples (12.5 ms)
        n_fft: FFT size
        n_mels: Number of triangular mel filters
        fmin: Lowest filter edge in Hz
        fmax: Highest filter edge in Hz
        amplitude_floor: Floor applied before the natural log
    """

    sample_rate: int = SAMPLE_RATE
    win_length: int = 800
    hop_length: int = 200
    n_fft: int = 1024
    n_mels: int = N_MELS
    fmin: float = 0.0
    fmax: float = 8000.0
    amplitude_floor: float = 1e-10

    def n_frames(self, n_samples: int) -> int:
        """Frame count without edge padding."""
        return 1 + (n_samples - self.win_length) // self.hop_length


@dataclass(frozen=True)
class F0Settings:
    """
    Settings of the autocorrelation pitch estimator.

    Framing mirrors ``StftSettings`` so that both tracks have the same length.
    """

    sample_rate: int = SAMPLE_RATE
    win_length: int = 800
    hop_length: int = 200
    f0_min: float = 40.0
    f0_max: float = 600.0
    voicing_threshold: float = 0.5
    rms_threshold: float = 1e-4


@dataclass(frozen=True)
class WaveForm:
    """
    Mono PCM audio scaled to [-1, 1].

    Attributes:
        samples: float64 amplitude values
        sample_rate: Sample rate in Hz, always 16000
    """

    samples: np.ndarray
    sample_rate: int = SAMPLE_RATE

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size == 0:
            raise UnsupportedFormat('waveform must be a non-empty mono signal')
        if not np.all(np.isfinite(samples)):
            raise UnsupportedFormat('waveform contains non-finite samples')
        if self.sample_rate != SAMPLE_RATE:
            raise UnsupportedFormat(
                f'sample rate {self.sample_rate} Hz is not supported, expected {SAMPLE_RATE}'
            )
        object.__setattr__(self, 'samples', samples)

    def __len__(self):
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


@dataclass(frozen=True)
class MelSpectrogram:
    """
    Log-mel energies, one row per frame.

    Attributes:
        frames: T x 80 float32 matrix
        frame_shift_ms: Frame shift in milliseconds
        frame_len_ms: Frame length in milliseconds
    """

    frames: np.ndarray
    frame_shift_ms: float = 12.5
    frame_len_ms: float = 50.0

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.float32)
        if frames.ndim != 2 or frames.shape[0] < 1:
            raise ShapeMismatch(f'mel spectrogram must be T x C with T >= 1, got {frames.shape}')
        if not np.all(np.isfinite(frames)):
            raise ShapeMismatch('mel spectrogram contains non-finite values')
        object.__setattr__(self, 'frames', frames)

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def n_channels(self) -> int:
        return self.frames.shape[1]


@dataclass(frozen=True)
class PitchTrack:
    """
    Raw F0 track in Hz; 0 marks an unvoiced frame.

    Attributes:
        f0_hz: Length-T float64 values
        voiced_mask: Length-T booleans, True where f0_hz > 0
    """

    f0_hz: np.ndarray
    voiced_mask: np.ndarray = field(default=None)

    def __post_init__(self):
        f0 = np.asarray(self.f0_hz, dtype=np.float64)
        if f0.ndim != 1:
            raise ShapeMismatch('pitch track must be one-dimensional')
        voiced = f0 > 0 if self.voiced_mask is None else np.asarray(self.voiced_mask, dtype=bool)
        if voiced.shape != f0.shape or np.any(voiced != (f0 > 0)):
            raise ShapeMismatch('voiced_mask must be True exactly where f0_hz > 0')
        object.__setattr__(self, 'f0_hz', f0)
        object.__setattr__(self, 'voiced_mask', voiced)

    def __len__(self):
        return self.f0_hz.size

    @property
    def n_voiced(self) -> int:
        return int(self.voiced_mask.sum())


@dataclass(frozen=True)
class NormalizedPitch:
    """Interpolated, log-transformed, utterance-standardized F0 (length T)."""

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size < 1:
            raise ShapeMismatch('normalized pitch must be a non-empty vector')
        object.__setattr__(self, 'values', values)

    def __len__(self):
        return self.values.size
