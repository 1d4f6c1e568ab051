"""Export semantics and the trainer command line."""

import numpy as np
import pytest
import torch

from gtvtrainer import (
    TrainConfig,
    load_checkpoint,
    read_feature_file,
    read_mu_file,
    to_input,
    train_on_patches,
)
from gtvtrainer.cli import main
from gtvtrainer.export import export_features, export_mu


def write_pgm(path, array):
    h, w = array.shape
    path.write_bytes(b"P5\n%d %d\n255\n" % (w, h) + array.tobytes())


@pytest.fixture(scope="module")
def checkpoint(tmp_path_factory):
    """A real (briefly trained) checkpoint shared across this module."""
    torch.manual_seed(0)
    path = tmp_path_factory.mktemp("ckpt") / "model.pt"
    clean = torch.rand(8, 10, 10, dtype=torch.float64)
    config = TrainConfig(epochs=1, batch_size=8, patch_size=10, blocks=1, lr=0.1)
    train_on_patches(clean, config, checkpoint_path=path)
    return path


@pytest.fixture()
def noisy_image(tmp_path):
    rng = np.random.default_rng(5)
    path = tmp_path / "noisy.pgm"
    write_pgm(path, rng.integers(0, 256, (20, 20), dtype=np.uint8))
    return path


class TestExportFeatures:
    def test_shape_and_payload_match_network(self, checkpoint, noisy_image, tmp_path):
        out = tmp_path / "feat.bin"
        shape = export_features(checkpoint, noisy_image, out)
        assert shape == (20, 20, 3)
        values = read_feature_file(out)
        assert values.shape == (20, 20, 3)

        feature_net, _, _ = load_checkpoint(checkpoint)
        from gtvtrainer import read_gray_image

        with torch.no_grad():
            expected = feature_net(to_input(torch.from_numpy(read_gray_image(noisy_image))))
        expected = expected[0].permute(1, 2, 0).numpy().astype(np.float32)
        np.testing.assert_array_equal(values, expected)

    def test_missing_image(self, checkpoint, tmp_path):
        with pytest.raises(OSError):
            export_features(checkpoint, tmp_path / "nope.pgm", tmp_path / "f.bin")


class TestExportMu:
    def test_count_matches_clamped_tiling(self, checkpoint, noisy_image, tmp_path):
        out = tmp_path / "mu.bin"
        # 20x20 at size 8 stride 8: origins 0, 8, 12 per axis -> 9 patches
        count = export_mu(checkpoint, noisy_image, out, patch_size=8, stride=8)
        assert count == 9
        values = read_mu_file(out)
        assert values.shape == (9,)
        assert np.all(values > 0)

    def test_defaults_come_from_checkpoint(self, checkpoint, noisy_image, tmp_path):
        out = tmp_path / "mu.bin"
        # checkpoint was trained at patch_size 10 -> 20x20 tiles into 4
        count = export_mu(checkpoint, noisy_image, out)
        assert count == 4

    def test_oversized_patch_rejected(self, checkpoint, noisy_image, tmp_path):
        with pytest.raises(ValueError, match="exceeds"):
            export_mu(checkpoint, noisy_image, tmp_path / "mu.bin", patch_size=64)

    def test_patch_below_pooling_floor_rejected(self, checkpoint, noisy_image, tmp_path):
        with pytest.raises(ValueError, match=">= 8"):
            export_mu(checkpoint, noisy_image, tmp_path / "mu.bin", patch_size=4)


class TestCli:
    def test_train_then_export(self, tmp_path, capsys):
        rng = np.random.default_rng(0)
        data_dir = tmp_path / "data"
        data_dir.mkdir()
        write_pgm(data_dir / "img.pgm", rng.integers(0, 256, (20, 20), dtype=np.uint8))
        ckpt = tmp_path / "model.pt"
        log = tmp_path / "loss.csv"
        code = main([
            "train", "--data", str(data_dir), "--checkpoint", str(ckpt),
            "--log", str(log), "--epochs", "1", "--batch", "4",
            "--patch-size", "10", "--blocks", "1", "--quiet",
        ])
        assert code == 0
        assert "final_loss=" in capsys.readouterr().out
        assert ckpt.exists()
        assert log.read_text().startswith("epoch,mean_loss")

        feat = tmp_path / "feat.bin"
        code = main([
            "export-features", "--checkpoint", str(ckpt),
            "--input", str(data_dir / "img.pgm"), "--output", str(feat),
        ])
        assert code == 0
        assert read_feature_file(feat).shape == (20, 20, 3)

        mu = tmp_path / "mu.bin"
        code = main([
            "export-mu", "--checkpoint", str(ckpt),
            "--input", str(data_dir / "img.pgm"), "--output", str(mu),
        ])
        assert code == 0
        assert read_mu_file(mu).shape == (4,)

    def test_train_empty_dir_exits_one(self, tmp_path, capsys):
        empty = tmp_path / "empty"
        empty.mkdir()
        code = main([
            "train", "--data", str(empty), "--checkpoint", str(tmp_path / "m.pt"),
            "--epochs", "1", "--quiet",
        ])
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_bad_flag_value_exits_two(self, tmp_path, capsys):
        code = main([
            "train", "--data", str(tmp_path), "--checkpoint", str(tmp_path / "m.pt"),
            "--epochs", "0", "--quiet",
        ])
        assert code == 2
        assert "error:" in capsys.readouterr().err

    def test_export_missing_checkpoint_exits_one(self, tmp_path, noisy_image, capsys):
        code = main([
            "export-features", "--checkpoint", str(tmp_path / "nope.pt"),
            "--input", str(noisy_image), "--output", str(tmp_path / "f.bin"),
        ])
        assert code == 1
        assert "error:" in capsys.readouterr().err

    def test_missing_subcommand_exits_two(self):
        with pytest.raises(SystemExit) as err:
            main([])
        assert err.value.code == 2
