"""Hybrid generative/discriminative single-microphone speech enhancement.

A mixture-of-Gaussians clean-speech model and a neural phoneme classifier
combine, through a max-model of noisy log-spectra, into per-bin speech
presence probabilities that drive soft spectral subtraction with online
noise adaptation.  The classic fixed-noise MMSE estimator is included as a
reference mode.
"""

from .corpus import (
    ClassEnvelope,
    LabeledUtterance,
    SyntheticCorpusSpec,
    assemble_frames,
    default_envelopes,
    load_corpus,
    mix_at_snr,
    save_corpus,
    step_white_noise,
    synthesize_corpus,
    white_noise,
)
from .dsp import (
    ComplexSpectrogram,
    Waveform,
    edge_padding,
    istft,
    log_spectra,
    read_wav,
    stft,
    write_wav,
)
from .enhancer import (
    EnhancementReport,
    EnhancerConfig,
    enhance_mixmax_original,
    enhance_utterance,
)
from .errors import BundleFormatError, NumericError
from .features import feature_matrix
from .metrics import log_spectral_distance, segmental_snr
from .mixmax import (
    MixmaxDiagnostics,
    conditional_mean_below,
    generative_posterior,
    hybrid_spp,
    mmse_estimate,
    soft_subtract,
    speech_dominance,
)
from .mog import PhonemeMog, classify_frames, train_em, train_supervised
from .nn import NnClassifier, classify_accuracy, forward, init_classifier, train
from .noise import NoiseModel, adapt, init_from_prefix
from .serialize import ModelBundle, load_bundle, save_bundle

__version__ = "0.1.0"

__all__ = [
    "BundleFormatError",
    "ClassEnvelope",
    "ComplexSpectrogram",
    "EnhancementReport",
    "EnhancerConfig",
    "LabeledUtterance",
    "MixmaxDiagnostics",
    "ModelBundle",
    "NnClassifier",
    "NoiseModel",
    "NumericError",
    "PhonemeMog",
    "SyntheticCorpusSpec",
    "Waveform",
    "adapt",
    "assemble_frames",
    "classify_accuracy",
    "classify_frames",
    "conditional_mean_below",
    "default_envelopes",
    "edge_padding",
    "enhance_mixmax_original",
    "enhance_utterance",
    "feature_matrix",
    "forward",
    "generative_posterior",
    "hybrid_spp",
    "init_classifier",
    "init_from_prefix",
    "istft",
    "load_bundle",
    "load_corpus",
    "log_spectra",
    "log_spectral_distance",
    "mix_at_snr",
    "mmse_estimate",
    "read_wav",
    "save_bundle",
    "save_corpus",
    "segmental_snr",
    "soft_subtract",
    "speech_dominance",
    "step_white_noise",
    "stft",
    "synthesize_corpus",
    "train",
    "train_em",
    "train_supervised",
    "white_noise",
    "write_wav",
]
