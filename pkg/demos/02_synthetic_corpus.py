"""Build a small labeled corpus and look at what the classes are made of.

Each class is stationary noise shaped by a formant-like spectral envelope;
an utterance is a random concatenation of hop-aligned segments with
per-segment amplitude jitter.  The frame labels line up with STFT frames,
which is what lets the same corpus train both the per-class Gaussians and
the frame classifier.
"""

import numpy as np

from nnmm import (
    SyntheticCorpusSpec,
    assemble_frames,
    default_envelopes,
    synthesize_corpus,
)


def main():
    spec = SyntheticCorpusSpec(
        envelopes=default_envelopes(5),
        utterance_seconds=(1.2, 2.0),
        seed=42,
    )
    utts = synthesize_corpus(spec, 8)

    print(f"{len(utts)} utterances at {utts[0].waveform.sample_rate} Hz")
    for i, u in enumerate(utts[:3]):
        runs = 1 + int(np.sum(np.diff(u.frame_labels) != 0))
        print(f"  utt {i}: {len(u.waveform) / 16000:.2f} s, "
              f"{len(u.frame_labels)} frames, {runs} segments")

    logs, feats, labels = assemble_frames(utts, 512)
    print(f"\npooled: {logs.shape[0]} frames, "
          f"{logs.shape[1]} log-spectrum bins, {feats.shape[1]}-dim features")
    freq = np.bincount(labels, minlength=5) / len(labels)
    print("class frequencies:", np.round(freq, 3))

    # per-class average log spectrum at a few frequencies
    print("\nmean log magnitude by class (rows) at 312/1250/2500/5000 Hz:")
    for c in range(5):
        mu = logs[labels == c].mean(axis=0)
        picks = [int(round(f / 31.25)) for f in (312, 1250, 2500, 5000)]
        print(f"  class {c}: " + "  ".join(f"{mu[b]:6.2f}" for b in picks))


if __name__ == "__main__":
    main()
