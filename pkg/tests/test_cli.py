import numpy as np
import pytest

from gtvdenoise import ImageBuffer, load_image, save_image
from gtvdenoise.cli import _parse_orders, main
from gtvdenoise.fileio import MU_MAGIC, save_feature_file, save_mu
from gtvdenoise.graphs import handcrafted_features


@pytest.fixture
def scene_pgm(tmp_path):
    scene = np.full((40, 40), 0.25)
    scene[:, 20:] = 0.75
    path = tmp_path / "scene.pgm"
    save_image(ImageBuffer(scene), path)
    return path


@pytest.fixture
def small_pgm(tmp_path):
    rng = np.random.default_rng(99)
    path = tmp_path / "small.pgm"
    save_image(ImageBuffer(rng.random((36, 36))), path)
    return path


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out


def metrics_of(out):
    values = {}
    for line in out.strip().splitlines():
        key, _, val = line.partition("=")
        values[key] = float(val)
    return values


class TestParseOrders:
    def test_forms(self):
        assert _parse_orders("1..20") == tuple(range(1, 21))
        assert _parse_orders("1,5,9") == (1, 5, 9)
        assert _parse_orders("1,3..5, 8") == (1, 3, 4, 5, 8)
        assert _parse_orders("") == ()


class TestDenoiseCommand:
    def test_basic_run(self, capsys, scene_pgm, tmp_path):
        out_path = tmp_path / "out.pgm"
        code, out = run_cli(
            capsys, "denoise", "--input", str(scene_pgm), "--output", str(out_path),
            "--mu", "0.1",
        )
        assert code == 0
        m = metrics_of(out)
        assert set(m) == {"psnr_in", "psnr_out", "ssim_in", "ssim_out"}
        assert load_image(out_path).plane.shape == (40, 40)
        assert m["psnr_out"] > m["psnr_in"]

    def test_noiseless_tiny_mu_is_near_identity(self, capsys, scene_pgm, tmp_path):
        code, out = run_cli(
            capsys, "denoise", "--input", str(scene_pgm),
            "--output", str(tmp_path / "o.pgm"), "--sigma", "0", "--mu", "1e-15",
        )
        assert code == 0
        m = metrics_of(out)
        assert m["psnr_in"] == float("inf")
        assert m["psnr_out"] >= 90.0

    def test_determinism_and_seed_sensitivity(self, capsys, scene_pgm, tmp_path):
        def run(name, *extra):
            return run_cli(
                capsys, "denoise", "--input", str(scene_pgm),
                "--output", str(tmp_path / name), "--mu", "0.1", *extra,
            )

        code_a, out_a = run("a.pgm")
        code_b, out_b = run("b.pgm")
        assert (code_a, out_a) == (code_b, out_b)
        assert (tmp_path / "a.pgm").read_bytes() == (tmp_path / "b.pgm").read_bytes()
        code_c, out_c = run("c.pgm", "--seed", "1")
        assert code_c == 0 and out_c != out_a

    def test_threads_do_not_change_results(self, capsys, scene_pgm, tmp_path):
        argv = [
            "denoise", "--input", str(scene_pgm), "--mu", "0.1",
            "--patch-size", "20", "--stride", "16",
        ]
        code_a, out_a = run_cli(capsys, *argv, "--output", str(tmp_path / "t1.pgm"), "--threads", "1")
        code_b, out_b = run_cli(capsys, *argv, "--output", str(tmp_path / "t4.pgm"), "--threads", "4")
        assert code_a == code_b == 0
        assert out_a == out_b
        assert (tmp_path / "t1.pgm").read_bytes() == (tmp_path / "t4.pgm").read_bytes()

    def test_solvers_agree(self, capsys, small_pgm, tmp_path):
        scores = {}
        for solver in ("exact", "cg", "lanczos", "chebyshev"):
            code, out = run_cli(
                capsys, "denoise", "--input", str(small_pgm),
                "--output", str(tmp_path / f"{solver}.pgm"), "--mu", "0.1",
                "--solver", solver,
            )
            assert code == 0
            scores[solver] = metrics_of(out)["psnr_out"]
        # cg and the Krylov method track the dense reference tightly; the
        # 20-term polynomial is looser because reweighting stretches the
        # spectral interval it must cover
        assert abs(scores["cg"] - scores["exact"]) <= 1e-6
        assert abs(scores["lanczos"] - scores["exact"]) <= 0.01
        assert abs(scores["chebyshev"] - scores["exact"]) <= 0.5

    def test_chebyshev_order_matters(self, capsys, small_pgm, tmp_path):
        argv = [
            "denoise", "--input", str(small_pgm), "--mu", "0.1",
            "--solver", "chebyshev",
        ]
        _, low = run_cli(capsys, *argv, "--output", str(tmp_path / "l.pgm"), "--order", "3")
        _, high = run_cli(capsys, *argv, "--output", str(tmp_path / "h.pgm"), "--order", "20")
        assert low != high

    def test_mu_file_broadcast_matches_scalar(self, capsys, scene_pgm, tmp_path):
        mu_path = tmp_path / "mu.bin"
        save_mu(mu_path, [0.125])  # exactly representable in float32
        argv = ["denoise", "--input", str(scene_pgm)]
        code_a, out_a = run_cli(capsys, *argv, "--output", str(tmp_path / "s.pgm"), "--mu", "0.125")
        code_b, out_b = run_cli(capsys, *argv, "--output", str(tmp_path / "f.pgm"), "--mu", str(mu_path))
        assert code_a == code_b == 0
        assert out_a == out_b
        assert (tmp_path / "s.pgm").read_bytes() == (tmp_path / "f.pgm").read_bytes()

    def test_mu_file_per_patch(self, capsys, scene_pgm, tmp_path):
        mu_path = tmp_path / "mu.bin"
        save_mu(mu_path, [0.125] * 4)  # 4 patches x 1 layer on a 40x40 image
        code, out = run_cli(
            capsys, "denoise", "--input", str(scene_pgm),
            "--output", str(tmp_path / "p.pgm"), "--mu", str(mu_path),
        )
        assert code == 0
        _, scalar_out = run_cli(
            capsys, "denoise", "--input", str(scene_pgm),
            "--output", str(tmp_path / "q.pgm"), "--mu", "0.125",
        )
        assert out == scalar_out

    def test_mu_file_count_mismatch_fails(self, capsys, scene_pgm, tmp_path):
        mu_path = tmp_path / "mu.bin"
        save_mu(mu_path, [0.125] * 3)
        code, _ = run_cli(
            capsys, "denoise", "--input", str(scene_pgm),
            "--output", str(tmp_path / "x.pgm"), "--mu", str(mu_path),
        )
        assert code == 1

    def test_corrupt_mu_file_fails(self, capsys, scene_pgm, tmp_path):
        mu_path = tmp_path / "mu.bin"
        save_mu(mu_path, [0.125])
        data = bytearray(mu_path.read_bytes())
        data[:8] = b"NOTMAGIC"
        mu_path.write_bytes(bytes(data))
        code, _ = run_cli(
            capsys, "denoise", "--input", str(scene_pgm),
            "--output", str(tmp_path / "x.pgm"), "--mu", str(mu_path),
        )
        assert code == 1

    def test_feature_file_matches_handcrafted_on_single_patch(self, capsys, small_pgm, tmp_path):
        # sigma 0 so the handcrafted path sees the same pixels the
        # exported map was built from
        img = load_image(small_pgm)
        feats_path = tmp_path / "f.bin"
        save_feature_file(feats_path, handcrafted_features(img.plane))
        argv = ["denoise", "--input", str(small_pgm), "--mu", "0.125", "--sigma", "0"]
        code_a, out_a = run_cli(capsys, *argv, "--output", str(tmp_path / "h.pgm"))
        code_b, out_b = run_cli(
            capsys, *argv, "--output", str(tmp_path / "g.pgm"), "--features", str(feats_path)
        )
        assert code_a == code_b == 0
        assert out_a == out_b
        assert (tmp_path / "h.pgm").read_bytes() == (tmp_path / "g.pgm").read_bytes()

    def test_single_feature_file_broadcasts_over_layers(self, capsys, small_pgm, tmp_path):
        img = load_image(small_pgm)
        feats_path = tmp_path / "f.bin"
        save_feature_file(feats_path, handcrafted_features(img.plane))
        code, _ = run_cli(
            capsys, "denoise", "--input", str(small_pgm),
            "--output", str(tmp_path / "o.pgm"), "--mu", "0.125",
            "--layers", "2", "--blocks", "2", "--features", str(feats_path),
        )
        assert code == 0

    def test_corrupt_feature_file_fails(self, capsys, scene_pgm, tmp_path):
        feats_path = tmp_path / "f.bin"
        feats_path.write_bytes(MU_MAGIC + b"\x00" * 16)
        code, _ = run_cli(
            capsys, "denoise", "--input", str(scene_pgm),
            "--output", str(tmp_path / "x.pgm"), "--features", str(feats_path),
        )
        assert code == 1

    def test_color_image_support(self, capsys, tmp_path):
        rng = np.random.default_rng(4)
        ppm = tmp_path / "c.ppm"
        save_image(ImageBuffer(rng.random((36, 36, 3))), ppm)
        out_path = tmp_path / "out.ppm"
        code, out = run_cli(
            capsys, "denoise", "--input", str(ppm), "--output", str(out_path),
            "--mu", "0.1",
        )
        assert code == 0
        assert load_image(out_path).channels == 3

    def test_missing_input_exits_one(self, capsys, tmp_path):
        code, _ = run_cli(
            capsys, "denoise", "--input", str(tmp_path / "nope.pgm"),
            "--output", str(tmp_path / "o.pgm"),
        )
        assert code == 1

    def test_invalid_flag_values_exit_two(self, capsys, scene_pgm, tmp_path):
        out_path = str(tmp_path / "o.pgm")
        base = ["denoise", "--input", str(scene_pgm), "--output", out_path]
        for extra in (
            ["--sigma", "-5"],
            ["--patch-size", "0"],
            ["--stride", "0"],
            ["--threads", "0"],
            ["--layers", "0"],
            ["--blocks", "0"],
            ["--epsilon", "0"],
            ["--rho", "0"],
        ):
            code, _ = run_cli(capsys, *base, *extra)
            assert code == 2, extra

    def test_unknown_flag_exits_two(self, capsys, scene_pgm):
        with pytest.raises(SystemExit) as excinfo:
            main(["denoise", "--input", str(scene_pgm), "--frobnicate"])
        assert excinfo.value.code == 2

    def test_missing_subcommand_exits_two(self, capsys):
        with pytest.raises(SystemExit) as excinfo:
            main([])
        assert excinfo.value.code == 2


class TestBenchCommand:
    def test_csv_to_file(self, capsys, tmp_path):
        out = tmp_path / "acc.csv"
        code, _ = run_cli(
            capsys, "bench-approx", "--trials", "2", "--orders", "1,3..5",
            "--nodes", "12", "--output", str(out),
        )
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "method,order,mean_mse,mean_rel_mse"
        assert len(lines) == 1 + 2 * 4
        orders = [int(line.split(",")[1]) for line in lines[1:5]]
        assert orders == [1, 3, 4, 5]

    def test_csv_to_stdout(self, capsys):
        code, out = run_cli(
            capsys, "bench-approx", "--trials", "1", "--orders", "2", "--nodes", "9"
        )
        assert code == 0
        assert out.startswith("method,order,mean_mse,mean_rel_mse\n")

    def test_determinism(self, capsys, tmp_path):
        argv = [
            "bench-approx", "--trials", "3", "--orders", "1..4", "--nodes", "16",
            "--seed", "5",
        ]
        run_cli(capsys, *argv, "--output", str(tmp_path / "a.csv"))
        run_cli(capsys, *argv, "--output", str(tmp_path / "b.csv"))
        assert (tmp_path / "a.csv").read_text() == (tmp_path / "b.csv").read_text()

    def test_timing_output(self, capsys, tmp_path):
        t = tmp_path / "time.csv"
        code, _ = run_cli(
            capsys, "bench-approx", "--trials", "1", "--orders", "1,2", "--nodes", "9",
            "--output", str(tmp_path / "acc.csv"), "--time-output", str(t),
        )
        assert code == 0
        lines = t.read_text().strip().split("\n")
        assert lines[0] == "method,order,seconds_per_apply"
        assert len(lines) == 1 + 1 + 2 * 2

    def test_oversized_nodes_exit_two(self, capsys):
        code, _ = run_cli(capsys, "bench-approx", "--nodes", "2000", "--trials", "1")
        assert code == 2


class TestSweepCommand:
    def test_sweep_table(self, capsys, small_pgm, tmp_path):
        out = tmp_path / "sweep.csv"
        code, _ = run_cli(
            capsys, "sweep-mu", "--input", str(small_pgm),
            "--mu-grid", "1e-15,0.1", "--output", str(out),
        )
        assert code == 0
        lines = out.read_text().strip().split("\n")
        assert lines[0] == "mu,psnr_in,psnr_out,ssim_in,ssim_out"
        assert len(lines) == 3
        tiny = [float(v) for v in lines[1].split(",")]
        assert tiny[0] == 1e-15
        # vanishing strength leaves the noisy image untouched
        assert tiny[2] == pytest.approx(tiny[1], abs=0.05)

    def test_sweep_to_stdout(self, capsys, small_pgm):
        code, out = run_cli(
            capsys, "sweep-mu", "--input", str(small_pgm), "--mu-grid", "0.1"
        )
        assert code == 0
        assert out.startswith("mu,psnr_in,psnr_out,ssim_in,ssim_out\n")

    def test_bad_grid_exits_two(self, capsys, small_pgm):
        for grid in ("0", "-1", "", "0.1,0"):
            code, _ = run_cli(
                capsys, "sweep-mu", "--input", str(small_pgm), "--mu-grid", grid
            )
            assert code == 2, grid

    def test_missing_input_exits_one(self, capsys, tmp_path):
        code, _ = run_cli(
            capsys, "sweep-mu", "--input", str(tmp_path / "nope.pgm"), "--mu-grid", "0.1"
        )
        assert code == 1
