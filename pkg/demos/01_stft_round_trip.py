"""Analysis/synthesis sanity check.

The enhancer edits log-magnitude spectra frame by frame, so everything
downstream depends on the STFT being invertible.  This script runs a random
signal and a synthetic utterance through analysis and weighted overlap-add
synthesis and prints the reconstruction error, which should sit at float64
rounding level.
"""

import numpy as np

from nnmm import (
    SyntheticCorpusSpec,
    Waveform,
    default_envelopes,
    edge_padding,
    istft,
    stft,
    synthesize_corpus,
)


def round_trip_rms(w: Waveform, frame_length: int = 512) -> float:
    spec = stft(w, frame_length)
    y = istft(spec)
    pad = edge_padding(frame_length)
    back = y[pad:pad + len(w)]
    return float(np.sqrt(np.mean((back - w.samples) ** 2)))


def main():
    rng = np.random.default_rng(0)
    noise = Waveform(samples=rng.standard_normal(16000), sample_rate=16000)
    print(f"white noise, 1 s      : round-trip RMS {round_trip_rms(noise):.3e}")

    spec = SyntheticCorpusSpec(envelopes=default_envelopes(4),
                               utterance_seconds=(1.5, 1.6), seed=1)
    utt = synthesize_corpus(spec, 1)[0].waveform
    print(f"synthetic utterance   : round-trip RMS {round_trip_rms(utt):.3e}")

    analysis = stft(utt, 512)
    print(f"frames: {analysis.n_frames}, bins per frame: {analysis.n_bins}, "
          f"hop: {analysis.hop} samples")


if __name__ == "__main__":
    main()
