"""Time/frequency conversion: framing, windowed STFT, overlap-add inverse,
log-magnitude spectra and magnitude/phase recombination.

The analysis and synthesis windows are both sqrt-Hann (periodic form) at a
hop of one quarter frame, so analysis times synthesis overlap-adds to an
exactly constant 2.0 and the interior round trip is lossless up to float
error.  The input is zero-padded by ``frame_length - hop`` on both ends so
every original sample receives full window coverage.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.io import wavfile
from scipy.signal import get_window

# Magnitude floor applied before taking logs, keeping log-spectra finite.
MAGNITUDE_FLOOR = 1e-10


@dataclass(frozen=True)
class Waveform:
    """Mono audio: float samples (nominally in [-1, 1]) plus a sample rate."""

    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        object.__setattr__(self, "samples", samples)
        if samples.ndim != 1:
            raise ValueError("waveform must be single-channel (1-D samples)")
        if not np.all(np.isfinite(samples)):
            raise ValueError("waveform contains non-finite samples")
        if int(self.sample_rate) <= 0:
            raise ValueError("sample_rate must be positive")
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    def __len__(self):
        return len(self.samples)

    @property
    def duration(self) -> float:
        return len(self.samples) / self.sample_rate


@dataclass(frozen=True)
class ComplexSpectrogram:
    """One-sided STFT frames: shape (n_frames, frame_length // 2 + 1)."""

    frames: np.ndarray
    frame_length: int
    hop: int

    def __post_init__(self):
        frames = np.asarray(self.frames, dtype=np.complex128)
        object.__setattr__(self, "frames", frames)
        if self.frame_length % 2 != 0:
            raise ValueError("frame_length must be even")
        if self.hop != self.frame_length // 4:
            raise ValueError("hop must be frame_length / 4")
        if frames.ndim != 2 or frames.shape[1] != self.frame_length // 2 + 1:
            raise ValueError("frames must have frame_length/2 + 1 bins each")

    @property
    def n_frames(self) -> int:
        return self.frames.shape[0]

    @property
    def n_bins(self) -> int:
        return self.frames.shape[1]


def analysis_window(frame_length: int) -> np.ndarray:
    """sqrt of the periodic Hann window; also used for synthesis."""
    return np.sqrt(get_window("hann", frame_length, fftbins=True))


def edge_padding(frame_length: int) -> int:
    """Zeros prepended (and appended) so edge samples get full coverage."""
    return frame_length - frame_length // 4


def num_frames(n_samples: int, frame_length: int) -> int:
    """Number of STFT frames produced for an input of ``n_samples``."""
    hop = frame_length // 4
    padded = n_samples + 2 * edge_padding(frame_length)
    return (padded - frame_length) // hop + 1 + (1 if (padded - frame_length) % hop else 0)


def stft(w: Waveform, frame_length: int = 512) -> ComplexSpectrogram:
    """Windowed one-sided STFT at 75% overlap.

    Raises ValueError if the input is shorter than one frame.
    """
    if frame_length % 2 != 0:
        raise ValueError("frame_length must be even")
    x = w.samples
    if len(x) < frame_length:
        raise ValueError("utterance too short: need at least one full frame")

    hop = frame_length // 4
    pad = edge_padding(frame_length)
    # Round the tail up to the hop grid so trailing samples are fully covered.
    tail = pad + (-(len(x) + 2 * pad - frame_length)) % hop
    xp = np.concatenate([np.zeros(pad), x, np.zeros(tail)])

    n = (len(xp) - frame_length) // hop + 1
    win = analysis_window(frame_length)
    idx = np.arange(frame_length)[None, :] + hop * np.arange(n)[:, None]
    frames = np.fft.rfft(xp[idx] * win, axis=1)
    return ComplexSpectrogram(frames=frames, frame_length=frame_length, hop=hop)


def istft(s: ComplexSpectrogram) -> np.ndarray:
    """Weighted overlap-add inverse.

    Returns ``(n_frames - 1) * hop + frame_length`` samples in the padded
    coordinate system of :func:`stft`; slice with :func:`edge_padding` to
    recover original-signal alignment.
    """
    if s.n_frames == 0:
        raise ValueError("empty spectrogram")
    L, hop = s.frame_length, s.hop
    win = analysis_window(L)
    out = np.zeros((s.n_frames - 1) * hop + L)
    wsum = np.zeros_like(out)
    segs = np.fft.irfft(s.frames, n=L, axis=1) * win
    for i in range(s.n_frames):
        out[i * hop : i * hop + L] += segs[i]
        wsum[i * hop : i * hop + L] += win * win
    good = wsum > 1e-10
    out[good] /= wsum[good]
    return out


def log_magnitude(frame: np.ndarray) -> np.ndarray:
    """Natural-log magnitude of one complex frame, floored to stay finite."""
    return np.log(np.maximum(np.abs(frame), MAGNITUDE_FLOOR))


def log_spectra(s: ComplexSpectrogram) -> np.ndarray:
    """Log-magnitude of every frame, shape (n_frames, n_bins)."""
    return np.log(np.maximum(np.abs(s.frames), MAGNITUDE_FLOOR))


def reconstruct_frame(xhat: np.ndarray, noisy_frame: np.ndarray) -> np.ndarray:
    """Combine an estimated log-magnitude with the noisy frame's phase.

    Bins whose noisy magnitude is exactly zero have no defined phase and
    come out zero.
    """
    if xhat.shape != noisy_frame.shape:
        raise ValueError("log-magnitude and frame lengths differ")
    mag = np.abs(noisy_frame)
    out = np.zeros_like(noisy_frame)
    nz = mag > 0
    out[nz] = np.exp(xhat[nz]) * noisy_frame[nz] / mag[nz]
    return out


def read_wav(path, expected_rate: int | None = None) -> Waveform:
    """Read a 16-bit PCM mono WAV file and scale it to [-1, 1].

    Rejects other encodings and channel counts; if ``expected_rate`` is
    given, rejects files at any other sample rate (no resampler here).
    """
    rate, data = wavfile.read(path)
    if data.dtype != np.int16:
        raise ValueError(f"{path}: only 16-bit PCM WAV is supported, got {data.dtype}")
    if data.ndim != 1:
        raise ValueError(f"{path}: only mono WAV is supported, got {data.ndim} channels")
    if expected_rate is not None and rate != expected_rate:
        raise ValueError(
            f"{path}: sample rate {rate} Hz does not match required {expected_rate} Hz"
        )
    return Waveform(samples=data.astype(np.float64) / 32768.0, sample_rate=rate)


def write_wav(path, w: Waveform) -> None:
    """Write a waveform as 16-bit PCM mono, clipping to [-1, 1]."""
    pcm = np.clip(w.samples, -1.0, 1.0)
    wavfile.write(path, w.sample_rate, np.round(pcm * 32767.0).astype(np.int16))
