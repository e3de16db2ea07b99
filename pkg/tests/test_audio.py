import numpy as np
import pytest
from scipy.io import wavfile

from duovad.audio import (
    FrameParams,
    StereoWaveform,
    Waveform,
    frame_signal,
    load_wav,
    next_pow2,
    save_wav,
    windowed_spectrum,
)
from oracles import naive_dft


class TestWavIO:
    def test_zero_sample_maps_to_zero(self, tmp_path):
        wavfile.write(tmp_path / "a.wav", 8000, np.array([0, 100, -100], dtype=np.int16))
        w = load_wav(tmp_path / "a.wav")
        assert w.samples[0] == 0.0

    def test_full_scale_negative_maps_to_minus_one(self, tmp_path):
        wavfile.write(tmp_path / "a.wav", 8000, np.array([-32768, 0], dtype=np.int16))
        w = load_wav(tmp_path / "a.wav")
        assert w.samples[0] == -1.0

    def test_roundtrip_bit_exact_mono(self, tmp_path):
        rng = np.random.default_rng(0)
        pcm = rng.integers(-32768, 32768, size=4096, dtype=np.int16)
        wavfile.write(tmp_path / "in.wav", 8000, pcm)
        w = load_wav(tmp_path / "in.wav")
        save_wav(w, tmp_path / "out.wav")
        _, back = wavfile.read(tmp_path / "out.wav")
        assert np.array_equal(pcm, back)

    def test_roundtrip_bit_exact_stereo(self, tmp_path):
        rng = np.random.default_rng(1)
        pcm = rng.integers(-32768, 32768, size=(2048, 2), dtype=np.int16)
        wavfile.write(tmp_path / "in.wav", 16000, pcm)
        s = load_wav(tmp_path / "in.wav")
        assert isinstance(s, StereoWaveform)
        save_wav(s, tmp_path / "out.wav")
        _, back = wavfile.read(tmp_path / "out.wav")
        assert np.array_equal(pcm, back)

    def test_save_quantization_and_clipping(self, tmp_path):
        w = Waveform(np.array([0.0, 2.0, 0.5, -1.5]), 8000)
        save_wav(w, tmp_path / "a.wav")
        _, pcm = wavfile.read(tmp_path / "a.wav")
        assert list(pcm) == [0, 32767, 16384, -32768]

    def test_load_rejects_float_wav(self, tmp_path):
        wavfile.write(tmp_path / "f.wav", 8000, np.zeros(16, dtype=np.float32))
        with pytest.raises(ValueError, match="16-bit"):
            load_wav(tmp_path / "f.wav")

    def test_load_rejects_zero_length(self, tmp_path):
        wavfile.write(tmp_path / "z.wav", 8000, np.zeros(0, dtype=np.int16))
        with pytest.raises(ValueError, match="zero-length"):
            load_wav(tmp_path / "z.wav")

    def test_load_missing_file(self, tmp_path):
        with pytest.raises(FileNotFoundError):
            load_wav(tmp_path / "nope.wav")


class TestContainers:
    def test_waveform_rejects_nonfinite(self):
        with pytest.raises(ValueError, match="finite"):
            Waveform(np.array([0.0, np.nan]), 8000)

    def test_waveform_rejects_bad_rate(self):
        with pytest.raises(ValueError, match="positive"):
            Waveform(np.zeros(4), 0)

    def test_stereo_rejects_length_mismatch(self):
        with pytest.raises(ValueError, match="equal length"):
            StereoWaveform(Waveform(np.zeros(4), 8000), Waveform(np.zeros(5), 8000))

    def test_stereo_rejects_rate_mismatch(self):
        with pytest.raises(ValueError, match="sample rate"):
            StereoWaveform(Waveform(np.zeros(4), 8000), Waveform(np.zeros(4), 16000))

    def test_frame_params_validation(self):
        with pytest.raises(ValueError):
            FrameParams(frame_len=100, frame_shift=0)
        with pytest.raises(ValueError):
            FrameParams(frame_len=100, frame_shift=120)
        with pytest.raises(ValueError):
            FrameParams(frame_len=100, frame_shift=50, window="blackman")


class TestFraming:
    def test_frame_count_400_200_80(self):
        # floor((400 - 200) / 80) + 1 = 3
        w = Waveform(np.arange(400, dtype=float), 8000)
        frames = frame_signal(w, FrameParams(200, 80, "rectangular"))
        assert len(frames) == 3

    def test_exact_fit_single_frame(self):
        w = Waveform(np.arange(200, dtype=float), 8000)
        assert len(frame_signal(w, FrameParams(200, 80, "rectangular"))) == 1

    def test_too_short_rejected(self):
        w = Waveform(np.arange(199, dtype=float), 8000)
        with pytest.raises(ValueError, match="shorter than one frame"):
            frame_signal(w, FrameParams(200, 80, "rectangular"))

    def test_frames_are_unwindowed_slices(self):
        rng = np.random.default_rng(2)
        x = rng.standard_normal(1000)
        frames = frame_signal(Waveform(x, 8000), FrameParams(200, 80, "hamming"))
        for t in range(len(frames)):
            start = t * 80
            assert np.array_equal(frames.frames[t], x[start : start + 200])

    def test_frame_starts_reconstruct_indices(self):
        w = Waveform(np.zeros(1000), 8000)
        frames = frame_signal(w, FrameParams(200, 80))
        assert np.array_equal(frames.starts, 80 * np.arange(len(frames)))


class TestWindowedSpectrum:
    def test_zero_frame_gives_zero_spectrum(self):
        spec = windowed_spectrum(np.zeros(64), "hamming", 64)
        assert np.all(spec == 0)

    def test_impulse_rectangular_gives_flat_spectrum(self):
        frame = np.zeros(64)
        frame[0] = 1.0
        spec = windowed_spectrum(frame, "rectangular", 64)
        assert np.allclose(spec, np.ones(64), atol=1e-12)

    def test_matches_naive_dft(self):
        rng = np.random.default_rng(3)
        frame = rng.standard_normal(48)
        got = windowed_spectrum(frame, "rectangular", 64)
        want = naive_dft(frame, 64)
        assert np.max(np.abs(got - want)) / np.max(np.abs(want)) < 1e-9

    def test_rejects_non_power_of_two(self):
        with pytest.raises(ValueError, match="power of two"):
            windowed_spectrum(np.zeros(50), "hamming", 100)

    def test_rejects_fft_shorter_than_frame(self):
        with pytest.raises(ValueError, match=">= frame length"):
            windowed_spectrum(np.zeros(100), "hamming", 64)

    def test_parseval_rectangular(self):
        rng = np.random.default_rng(4)
        frame = rng.standard_normal(256)
        spec = windowed_spectrum(frame, "rectangular", 256)
        time_energy = np.sum(frame**2)
        freq_energy = np.sum(np.abs(spec) ** 2) / 256
        assert abs(time_energy - freq_energy) / time_energy < 1e-9

    def test_next_pow2(self):
        assert [next_pow2(n) for n in (1, 2, 3, 200, 256, 257)] == [1, 2, 4, 256, 256, 512]
