import pathlib

import numpy as np

from cafbp.cli import main
from cafbp.codec import decode_sequence
from cafbp.frames import parse_y4m, serialize_raw_yuv, VideoSequence

DATA_DIR = pathlib.Path(__file__).parent / "data"
RD_FIXTURE = str(DATA_DIR / "fixture_rd.y4m")
NOISY_FIXTURE = str(DATA_DIR / "fixture_noisy.y4m")


class TestExitCodes:
    def test_psnr_identical_prints_inf(self, capsys):
        assert main(["psnr", RD_FIXTURE, RD_FIXTURE]) == 0
        assert capsys.readouterr().out.strip() == "inf"

    def test_missing_argument_is_usage_error(self, capsys):
        assert main(["encode"]) == 1
        assert "usage error" in capsys.readouterr().err

    def test_unknown_flag_is_usage_error(self, capsys):
        assert main(["psnr", "--wat", RD_FIXTURE, RD_FIXTURE]) == 1

    def test_unknown_command_is_usage_error(self):
        assert main(["transcode", "a", "b"]) == 1

    def test_qp_out_of_range_is_usage_error(self, tmp_path):
        out = str(tmp_path / "x.cfbp")
        assert main(["encode", "--qp", "77", RD_FIXTURE, out]) == 1

    def test_missing_file_is_data_error(self, tmp_path, capsys):
        assert main(["psnr", str(tmp_path / "nope.y4m"), RD_FIXTURE]) == 2
        assert "error" in capsys.readouterr().err

    def test_garbage_input_is_data_error(self, tmp_path):
        bad = tmp_path / "bad.y4m"
        bad.write_bytes(b"this is not video")
        assert main(["psnr", str(bad), RD_FIXTURE]) == 2

    def test_decode_garbage_is_data_error(self, tmp_path):
        bad = tmp_path / "bad.cfbp"
        bad.write_bytes(b"CFBPSEQ1" + bytes(20))
        assert main(["decode", str(bad), str(tmp_path / "out.y4m")]) == 2


class TestEncodeDecode:
    def test_round_trip_matches_library(self, tmp_path, capsys):
        out = tmp_path / "seq.cfbp"
        recon = tmp_path / "recon.y4m"
        assert main(["encode", "--qp", "30", "--sigma", "0",
                     RD_FIXTURE, str(out)]) == 0
        capsys.readouterr()
        assert main(["decode", str(out), str(recon)]) == 0
        lib_seq = decode_sequence(out.read_bytes())
        cli_seq = parse_y4m(recon.read_bytes())
        for a, b in zip(lib_seq.frames, cli_seq.frames):
            np.testing.assert_array_equal(a, b)
        for (ua, va), (ub, vb) in zip(lib_seq.chroma, cli_seq.chroma):
            np.testing.assert_array_equal(ua, ub)
            np.testing.assert_array_equal(va, vb)

    def test_report_file(self, tmp_path, capsys):
        out = tmp_path / "seq.cfbp"
        report = tmp_path / "report.txt"
        assert main(["encode", "--qp", "30", "--sigma", "0", "--report",
                     str(report), RD_FIXTURE, str(out)]) == 0
        assert report.read_text().startswith("encode report")
        assert capsys.readouterr().out == ""

    def test_threads_flag_does_not_change_output(self, tmp_path, capsys):
        outs = []
        for threads in ("1", "4"):
            out = tmp_path / f"seq{threads}.cfbp"
            assert main(["encode", "--qp", "30", "--sigma", "0",
                         "--threads", threads, RD_FIXTURE, str(out)]) == 0
            outs.append(out.read_bytes())
        capsys.readouterr()
        assert outs[0] == outs[1]

    def test_deterministic_across_runs(self, tmp_path, capsys):
        blobs = []
        reports = []
        for run in range(2):
            out = tmp_path / f"run{run}.cfbp"
            report = tmp_path / f"run{run}.txt"
            assert main(["encode", "--qp", "34", "--sigma", "0", "--seed", "9",
                         "--report", str(report), RD_FIXTURE, str(out)]) == 0
            blobs.append(out.read_bytes())
            reports.append(report.read_bytes())
        capsys.readouterr()
        assert blobs[0] == blobs[1]
        assert reports[0] == reports[1]


class TestDenoiseCommand:
    def test_zero_sigma_is_identity(self, tmp_path):
        out = tmp_path / "out.y4m"
        assert main(["denoise", "--sigma", "0", RD_FIXTURE, str(out)]) == 0
        original = parse_y4m(pathlib.Path(RD_FIXTURE).read_bytes())
        filtered = parse_y4m(out.read_bytes())
        for a, b in zip(original.frames, filtered.frames):
            np.testing.assert_array_equal(a, b)
        # chroma passes through untouched
        np.testing.assert_array_equal(original.chroma[0][0],
                                      filtered.chroma[0][0])


class TestRdCommand:
    def test_five_row_csv(self, tmp_path):
        out = tmp_path / "rd.csv"
        assert main(["rd", "--qps", "22,26,30,34,38", "--sigma", "0",
                     RD_FIXTURE, str(out)]) == 0
        lines = out.read_text().splitlines()
        assert len(lines) == 6
        assert lines[0] == "qp,bits,kbps,psnr_y,psnr_u,psnr_v"
        golden = (DATA_DIR / "golden_rd.csv").read_bytes()
        assert out.read_bytes() == golden

    def test_bad_qps_usage_error(self, tmp_path):
        assert main(["rd", "--qps", "22,abc", RD_FIXTURE,
                     str(tmp_path / "rd.csv")]) == 1


class TestTrainAndGate:
    def test_train_then_encode_saves_bits(self, tmp_path, capsys):
        model = tmp_path / "gate.json"
        args = ["--sigma", "25", "--qp", "38", "--threshold-psnr", "20.0",
                "--seed", "7"]
        assert main(["train", *args, NOISY_FIXTURE, str(model)]) == 0
        assert model.exists()
        open_out = tmp_path / "open.cfbp"
        gated_out = tmp_path / "gated.cfbp"
        assert main(["encode", *args, NOISY_FIXTURE, str(open_out)]) == 0
        assert main(["encode", *args, "--gate-model", str(model),
                     NOISY_FIXTURE, str(gated_out)]) == 0
        capsys.readouterr()
        assert gated_out.stat().st_size < open_out.stat().st_size


class TestRawInput:
    def test_psnr_on_raw_yuv(self, tmp_path, capsys):
        rng = np.random.default_rng(0)
        frames = [rng.integers(0, 256, (16, 16), dtype=np.uint8)]
        raw = tmp_path / "clip.yuv"
        raw.write_bytes(serialize_raw_yuv(VideoSequence(frames=frames)))
        assert main(["psnr", "--width", "16", "--height", "16",
                     "--chroma", "mono", str(raw), str(raw)]) == 0
        assert capsys.readouterr().out.strip() == "inf"

    def test_raw_needs_both_dims(self, tmp_path):
        raw = tmp_path / "clip.yuv"
        raw.write_bytes(bytes(256))
        assert main(["psnr", "--width", "16", str(raw), str(raw)]) == 1


class TestSeedEnvFallback:
    def test_cafbp_seed_env(self, tmp_path, capsys, monkeypatch):
        out_a = tmp_path / "a.cfbp"
        out_b = tmp_path / "b.cfbp"
        monkeypatch.setenv("CAFBP_SEED", "21")
        assert main(["encode", "--qp", "30", "--sigma", "0",
                     RD_FIXTURE, str(out_a)]) == 0
        assert main(["encode", "--qp", "30", "--sigma", "0", "--seed", "21",
                     RD_FIXTURE, str(out_b)]) == 0
        capsys.readouterr()
        assert out_a.read_bytes() == out_b.read_bytes()

    def test_bad_env_seed_is_usage_error(self, tmp_path, monkeypatch, capsys):
        monkeypatch.setenv("CAFBP_SEED", "not-a-number")
        assert main(["encode", "--qp", "30", "--sigma", "0", RD_FIXTURE,
                     str(tmp_path / "x.cfbp")]) == 1
