"""Command-line workflow: corpus -> models -> enhancement -> evaluation."""

import csv

import numpy as np
import pytest

from nnmm.cli import main, parse_config_file
from nnmm.dsp import read_wav
from nnmm.serialize import load_bundle


@pytest.fixture(scope="module")
def workspace(tmp_path_factory, capsys=None):
    """A small corpus plus trained bundles, built once through the CLI."""
    root = tmp_path_factory.mktemp("cli")
    corpus = root / "corpus"
    assert main(["synth-corpus", "--out", str(corpus), "--classes", "3",
                 "--utterances", "6", "--seed", "11"]) == 0
    bundle = root / "model.nnmm"
    assert main(["train-mog", "--corpus", str(corpus), "--out", str(bundle)]) == 0
    full = root / "full.nnmm"
    assert main(["train-nn", "--corpus", str(corpus), "--bundle", str(bundle),
                 "--out", str(full), "--hidden", "16", "--epochs", "6",
                 "--seed", "0"]) == 0
    return root, corpus, bundle, full


# ---------------------------------------------------------------------------
# Happy paths
# ---------------------------------------------------------------------------


class TestWorkflow:
    def test_corpus_files_exist(self, workspace):
        _, corpus, _, _ = workspace
        wavs = sorted(corpus.glob("*.wav"))
        assert len(wavs) == 6
        assert (corpus / "corpus.meta").exists()

    def test_mog_bundle_loads(self, workspace):
        _, _, bundle, _ = workspace
        b = load_bundle(bundle)
        assert b.net is None
        assert b.mog.n_components == 3

    def test_nn_bundle_has_classifier(self, workspace):
        _, _, _, full = workspace
        b = load_bundle(full)
        assert b.net is not None
        assert b.net.n_hidden == 16

    def test_enhance_writes_wav(self, workspace, capsys):
        root, corpus, _, full = workspace
        noisy = sorted(corpus.glob("*.wav"))[0]
        out = root / "enhanced.wav"
        assert main(["enhance", "--bundle", str(full), "--in", str(noisy),
                     "--out", str(out)]) == 0
        w = read_wav(out)
        assert len(w) == len(read_wav(noisy))
        assert "mean SPP" in capsys.readouterr().out

    def test_enhance_fixed_noise_mode(self, workspace):
        root, corpus, _, full = workspace
        noisy = sorted(corpus.glob("*.wav"))[0]
        out = root / "enhanced_fixed.wav"
        assert main(["enhance", "--bundle", str(full), "--in", str(noisy),
                     "--out", str(out), "--fixed-noise"]) == 0
        assert out.exists()

    def test_classify_reports_accuracy(self, workspace, capsys):
        _, corpus, _, full = workspace
        wav = sorted(corpus.glob("*.wav"))[0]
        labels = wav.with_suffix(".labels")
        assert main(["classify", "--bundle", str(full), "--in", str(wav),
                     "--labels", str(labels)]) == 0
        out = capsys.readouterr().out
        assert "accuracy" in out

    def test_evaluate_csv_columns(self, workspace):
        root, corpus, _, full = workspace
        csv_path = root / "results.csv"
        assert main(["evaluate", "--bundle", str(full), "--corpus", str(corpus),
                     "--out", str(csv_path), "--snr", "5", "--noise", "white",
                     "--seed", "1"]) == 0
        with open(csv_path, newline="") as fh:
            rows = list(csv.DictReader(fh))
        assert len(rows) == 6
        assert set(rows[0]) == {"utterance", "noise", "snr_db", "segsnr_in",
                                "segsnr_out", "lsd", "mean_spp", "accuracy"}
        gains = [float(r["segsnr_out"]) - float(r["segsnr_in"]) for r in rows]
        assert np.mean(gains) > 0.0

    def test_train_mog_em_runs(self, workspace):
        root, corpus, _, _ = workspace
        out = root / "em.nnmm"
        assert main(["train-mog-em", "--corpus", str(corpus), "--out", str(out),
                     "--components", "3", "--iterations", "5"]) == 0
        assert load_bundle(out).mog.n_components == 3


# ---------------------------------------------------------------------------
# Config files and flag precedence
# ---------------------------------------------------------------------------


class TestConfig:
    def test_parse_config_file(self, tmp_path):
        """Values stay as strings; typing happens when the config is built."""
        p = tmp_path / "enh.cfg"
        p.write_text("# comment\nbeta = 3.0\nalpha=0.2\n\nestimator = mixmax-mmse\n")
        cfg = parse_config_file(p)
        assert cfg == {"beta": "3.0", "alpha": "0.2", "estimator": "mixmax-mmse"}

    def test_unknown_key_rejected(self, tmp_path):
        from nnmm.cli import UsageError

        p = tmp_path / "enh.cfg"
        p.write_text("gamma = 1\n")
        with pytest.raises(UsageError, match="gamma"):
            parse_config_file(p)

    def test_flag_overrides_config_file(self, workspace, tmp_path, capsys):
        """--beta on the command line beats the config file's value."""
        root, corpus, _, full = workspace
        noisy = sorted(corpus.glob("*.wav"))[0]
        cfg = tmp_path / "enh.cfg"
        cfg.write_text("beta = 0.0\n")

        out_a = tmp_path / "a.wav"
        assert main(["enhance", "--bundle", str(full), "--in", str(noisy),
                     "--out", str(out_a), "--config", str(cfg)]) == 0
        out_b = tmp_path / "b.wav"
        assert main(["enhance", "--bundle", str(full), "--in", str(noisy),
                     "--out", str(out_b), "--config", str(cfg), "--beta", "2.5"]) == 0

        a = read_wav(out_a)
        b = read_wav(out_b)
        # beta=0 passes the signal through; beta=2.5 attenuates noise
        np.testing.assert_allclose(a.samples, read_wav(noisy).samples, atol=2e-4)
        assert np.mean(b.samples**2) < np.mean(a.samples**2)


# ---------------------------------------------------------------------------
# Exit codes
# ---------------------------------------------------------------------------


class TestExitCodes:
    def test_unknown_subcommand_is_usage_error(self, capsys):
        assert main(["frobnicate"]) == 1
        capsys.readouterr()

    def test_missing_required_flag_is_usage_error(self, capsys):
        assert main(["train-mog", "--corpus", "somewhere"]) == 1
        capsys.readouterr()

    def test_missing_input_file_is_data_error(self, workspace, capsys):
        root, _, _, full = workspace
        code = main(["enhance", "--bundle", str(full),
                     "--in", str(root / "nope.wav"), "--out", str(root / "x.wav")])
        assert code == 2
        capsys.readouterr()

    def test_corrupt_bundle_is_data_error(self, workspace, tmp_path, capsys):
        root, corpus, _, _ = workspace
        bad = tmp_path / "bad.nnmm"
        bad.write_bytes(b"JUNKJUNKJUNK")
        noisy = sorted(corpus.glob("*.wav"))[0]
        code = main(["enhance", "--bundle", str(bad), "--in", str(noisy),
                     "--out", str(tmp_path / "x.wav")])
        assert code == 2
        capsys.readouterr()

    def test_nn_posterior_without_net_is_data_error(self, workspace, tmp_path, capsys):
        """A mixture-only bundle cannot drive the classifier posterior."""
        _, corpus, bundle, _ = workspace
        noisy = sorted(corpus.glob("*.wav"))[0]
        code = main(["enhance", "--bundle", str(bundle), "--in", str(noisy),
                     "--out", str(tmp_path / "x.wav")])
        assert code == 2
        assert "train-nn" in capsys.readouterr().err

    def test_frame_length_conflict_is_usage_error(self, workspace, tmp_path, capsys):
        _, corpus, _, full = workspace
        noisy = sorted(corpus.glob("*.wav"))[0]
        code = main(["enhance", "--bundle", str(full), "--in", str(noisy),
                     "--out", str(tmp_path / "x.wav"), "--frame-length", "256"])
        assert code == 1
        capsys.readouterr()
