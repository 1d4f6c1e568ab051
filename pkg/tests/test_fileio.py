import struct

import numpy as np
import pytest

from gtvdenoise import load_feature_file, load_mu, save_feature_file, save_mu
from gtvdenoise.fileio import FEATURE_MAGIC, FORMAT_VERSION, MU_MAGIC
from gtvdenoise.graphs import FeatureMap


def make_features(rng, h, w, k):
    values = rng.standard_normal((h * w, k)).astype(np.float32)
    return FeatureMap(height=h, width=w, values=values)


class TestFeatureFiles:
    def test_round_trip_bit_identical(self, rng, tmp_path):
        feats = make_features(rng, 6, 9, 3)
        p = tmp_path / "f.bin"
        save_feature_file(p, feats)
        back = load_feature_file(p)
        assert (back.height, back.width, back.k) == (6, 9, 3)
        assert np.array_equal(back.values, feats.values)
        save_feature_file(tmp_path / "g.bin", back)
        assert p.read_bytes() == (tmp_path / "g.bin").read_bytes()

    def test_exact_layout(self, tmp_path):
        values = np.array([[0.5], [1.5]], dtype=np.float32)
        feats = FeatureMap(height=1, width=2, values=values)
        p = tmp_path / "f.bin"
        save_feature_file(p, feats)
        want = (
            FEATURE_MAGIC
            + struct.pack("<IIII", FORMAT_VERSION, 1, 2, 1)
            + values.astype("<f4").tobytes()
        )
        assert p.read_bytes() == want

    def test_bad_magic_rejected(self, tmp_path):
        p = tmp_path / "f.bin"
        p.write_bytes(b"DGTVFEAX" + struct.pack("<IIII", 1, 1, 1, 1) + b"\x00" * 4)
        with pytest.raises(ValueError):
            load_feature_file(p)

    def test_bad_version_rejected(self, tmp_path):
        p = tmp_path / "f.bin"
        p.write_bytes(FEATURE_MAGIC + struct.pack("<IIII", 2, 1, 1, 1) + b"\x00" * 4)
        with pytest.raises(ValueError):
            load_feature_file(p)

    def test_short_file_rejected(self, tmp_path):
        p = tmp_path / "f.bin"
        p.write_bytes(FEATURE_MAGIC[:4])
        with pytest.raises(ValueError):
            load_feature_file(p)

    def test_truncated_dimensions_rejected(self, tmp_path):
        p = tmp_path / "f.bin"
        p.write_bytes(FEATURE_MAGIC + struct.pack("<II", FORMAT_VERSION, 3))
        with pytest.raises(ValueError):
            load_feature_file(p)

    def test_payload_length_must_match_header(self, rng, tmp_path):
        feats = make_features(rng, 2, 2, 2)
        p = tmp_path / "f.bin"
        save_feature_file(p, feats)
        data = p.read_bytes()
        (tmp_path / "short.bin").write_bytes(data[:-4])
        (tmp_path / "long.bin").write_bytes(data + b"\x00")
        with pytest.raises(ValueError):
            load_feature_file(tmp_path / "short.bin")
        with pytest.raises(ValueError):
            load_feature_file(tmp_path / "long.bin")

    def test_zero_dimension_rejected(self, tmp_path):
        p = tmp_path / "f.bin"
        p.write_bytes(FEATURE_MAGIC + struct.pack("<IIII", FORMAT_VERSION, 0, 2, 1))
        with pytest.raises(ValueError):
            load_feature_file(p)

    def test_missing_file_raises_oserror(self, tmp_path):
        with pytest.raises(OSError):
            load_feature_file(tmp_path / "absent.bin")


class TestMuFiles:
    def test_scalar_round_trip(self, tmp_path):
        p = tmp_path / "m.bin"
        save_mu(p, 0.5)
        values = load_mu(p)
        assert values.dtype == np.float64
        assert values.shape == (1,)
        assert values[0] == 0.5

    def test_vector_round_trip(self, rng, tmp_path):
        mus = (rng.random(12) + 0.1).astype(np.float32).astype(np.float64)
        p = tmp_path / "m.bin"
        save_mu(p, mus)
        assert np.array_equal(load_mu(p), mus)

    def test_exact_layout(self, tmp_path):
        p = tmp_path / "m.bin"
        save_mu(p, [0.5])
        want = MU_MAGIC + struct.pack("<II", FORMAT_VERSION, 1) + struct.pack("<f", 0.5)
        assert p.read_bytes() == want

    def test_bad_magic_rejected(self, tmp_path):
        p = tmp_path / "m.bin"
        p.write_bytes(FEATURE_MAGIC + struct.pack("<II", FORMAT_VERSION, 1) + struct.pack("<f", 0.5))
        with pytest.raises(ValueError):
            load_mu(p)

    def test_bad_version_rejected(self, tmp_path):
        p = tmp_path / "m.bin"
        p.write_bytes(MU_MAGIC + struct.pack("<II", 9, 1) + struct.pack("<f", 0.5))
        with pytest.raises(ValueError):
            load_mu(p)

    def test_zero_count_rejected(self, tmp_path):
        p = tmp_path / "m.bin"
        p.write_bytes(MU_MAGIC + struct.pack("<II", FORMAT_VERSION, 0))
        with pytest.raises(ValueError):
            load_mu(p)

    def test_count_payload_mismatch_rejected(self, tmp_path):
        p = tmp_path / "m.bin"
        p.write_bytes(MU_MAGIC + struct.pack("<II", FORMAT_VERSION, 3) + struct.pack("<f", 0.5))
        with pytest.raises(ValueError):
            load_mu(p)

    def test_nonpositive_values_rejected(self, tmp_path):
        for bad in (0.0, -1.0):
            p = tmp_path / "m.bin"
            p.write_bytes(MU_MAGIC + struct.pack("<II", FORMAT_VERSION, 1) + struct.pack("<f", bad))
            with pytest.raises(ValueError):
                load_mu(p)

    def test_nonfinite_values_rejected(self, tmp_path):
        for bad in (float("nan"), float("inf")):
            p = tmp_path / "m.bin"
            p.write_bytes(MU_MAGIC + struct.pack("<II", FORMAT_VERSION, 1) + struct.pack("<f", bad))
            with pytest.raises(ValueError):
                load_mu(p)

    def test_save_rejects_bad_values(self, tmp_path):
        p = tmp_path / "m.bin"
        with pytest.raises(ValueError):
            save_mu(p, [])
        with pytest.raises(ValueError):
            save_mu(p, [[0.5, 0.5]])
        with pytest.raises(ValueError):
            save_mu(p, [0.5, 0.0])
