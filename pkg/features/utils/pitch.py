"""
F0 estimation by normalized autocorrelation and utterance-level normalization.

A frame is voiced when its normalized autocorrelation peak inside the
40-600 Hz lag range exceeds the voicing threshold and its RMS exceeds the
silence gate. Unvoiced gaps are interpolated linearly in the log domain
before standardization.
"""

import numpy as np

from features.models import F0Settings, NormalizedPitch, PitchTrack, WaveForm
from features.utils.spectrogram import frame_signal

# Among peaks at least this close to the best one, the shortest lag wins
# (keeps period multiples from being reported as the fundamental).
OCTAVE_TOLERANCE = 0.9

DEGENERATE_STD = 1e-8


def normalized_autocorrelation(frame: np.ndarray, max_lag: int) -> np.ndarray:
    """
    Normalized cross-correlation of a frame with its lagged self.

    Value at lag k is sum(x[:n-k] * x[k:]) / sqrt(sum(x[:n-k]**2) * sum(x[k:]**2)).
    """
    n = frame.size
    acf = np.correlate(frame, frame, mode='full')[n - 1 : n + max_lag]
    energy = np.concatenate([[0.0], np.cumsum(frame**2)])
    lags = np.arange(max_lag + 1)
    head = energy[n - lags]
    tail = energy[n] - energy[lags]
    return acf / np.sqrt(np.maximum(head * tail, np.finfo(np.float64).tiny))


def _pick_period(nccf: np.ndarray, min_lag: int, max_lag: int, threshold: float) -> float | None:
    lags = np.arange(min_lag, max_lag + 1)
    values = nccf[lags]
    is_peak = (values >= nccf[lags - 1]) & (values > nccf[lags + 1])
    if not np.any(is_peak):
        return None
    peak_lags = lags[is_peak]
    peak_values = values[is_peak]
    best = peak_values.max()
    if best <= threshold:
        return None

    lag = int(peak_lags[np.argmax(peak_values >= OCTAVE_TOLERANCE * best)])
    a, b, c = nccf[lag - 1], nccf[lag], nccf[lag + 1]
    curvature = a - 2.0 * b + c
    offset = 0.5 * (a - c) / curvature if curvature < 0 else 0.0
    return lag + float(np.clip(offset, -0.5, 0.5))


def estimate_f0(wave: WaveForm, settings: F0Settings | None = None) -> PitchTrack:
    """
    Frame-wise F0 in Hz, framed exactly like the mel front-end.

    Raises:
        TooShort: The waveform is shorter than the analysis window
    """
    settings = settings or F0Settings()
    frames = frame_signal(wave.samples, settings.win_length, settings.hop_length)
    min_lag = max(2, int(np.floor(settings.sample_rate / settings.f0_max)))
    max_lag = min(settings.win_length - 2, int(np.ceil(settings.sample_rate / settings.f0_min)))

    f0 = np.zeros(frames.shape[0])
    for index, frame in enumerate(frames):
        rms = np.sqrt(np.mean(frame**2))
        if rms <= settings.rms_threshold:
            continue
        nccf = normalized_autocorrelation(frame, max_lag + 1)
        period = _pick_period(nccf, min_lag, max_lag, settings.voicing_threshold)
        if period is None:
            continue
        f0[index] = np.clip(settings.sample_rate / period, settings.f0_min, settings.f0_max)
    return PitchTrack(f0_hz=f0)


def interpolate_log_f0(track: PitchTrack) -> np.ndarray:
    """
    Log-F0 with unvoiced gaps filled linearly between voiced neighbours.

    Edges take the value of the nearest voiced frame. A fully unvoiced track
    yields zeros.
    """
    if track.n_voiced == 0:
        return np.zeros(len(track))
    frames = np.arange(len(track))
    voiced = track.voiced_mask
    return np.interp(frames, frames[voiced], np.log(track.f0_hz[voiced]))


def normalize_f0(track: PitchTrack) -> NormalizedPitch:
    """Interpolate in the log domain and standardize over the utterance."""
    log_f0 = interpolate_log_f0(track)
    std = log_f0.std()
    if track.n_voiced == 0 or std < DEGENERATE_STD:
        return NormalizedPitch(values=np.zeros(len(track)))
    return NormalizedPitch(values=(log_f0 - log_f0.mean()) / std)
