import math
import warnings

import numpy as np
import pytest

from prosign.corpus import Phone, WordAlignment
from prosign.errors import ValidationError
from prosign.prominence import (
    FrameTrack,
    ProminenceConfig,
    combine_signals,
    duration_signal,
    extract_energy,
    extract_f0,
    interpolate_f0,
    normalized_tracks,
    read_wav_mono,
    write_wav_mono,
    znorm,
)

SR = 22050
CFG = ProminenceConfig()


def tone(freq, seconds=1.0, amp=0.5, sr=SR):
    t = np.arange(int(sr * seconds)) / sr
    return amp * np.sin(2 * np.pi * freq * t)


def fft_peak_hz(signal, sr=SR):
    """Independent oracle: frequency of the DFT magnitude peak (parabolic)."""
    n = len(signal)
    windowed = signal * np.hanning(n)
    spec = np.abs(np.fft.rfft(windowed, n=4 * n))
    k = int(np.argmax(spec))
    if 0 < k < len(spec) - 1:
        a, b, c = spec[k - 1], spec[k], spec[k + 1]
        k = k + 0.5 * (a - c) / (a - 2 * b + c)
    return k * sr / (4 * n)


class TestExtractF0:
    @pytest.mark.parametrize("freq", [120.0, 200.0, 350.0])
    def test_pure_tone_within_2hz(self, freq):
        track = extract_f0(tone(freq), SR, CFG)
        voiced = track.values[track.voiced_mask]
        assert track.voiced_mask.mean() > 0.5
        assert np.mean(np.abs(voiced - freq) <= 2.0) >= 0.95

    def test_silence_all_unvoiced(self):
        track = extract_f0(np.zeros(SR), SR, CFG)
        assert not track.voiced_mask.any()
        assert (track.values == 0).all()

    def test_noisy_tone_median_within_4hz_of_fft_oracle(self):
        rng = np.random.default_rng(7)
        sig = tone(200.0)
        noise = rng.standard_normal(len(sig))
        noise *= math.sqrt(np.mean(sig**2) / np.mean(noise**2)) * 10 ** (-20 / 20)
        noisy = sig + noise
        oracle = fft_peak_hz(noisy)
        assert abs(oracle - 200.0) < 1.0  # oracle sanity
        track = extract_f0(noisy, SR, CFG)
        median = float(np.median(track.values[track.voiced_mask]))
        assert abs(median - oracle) <= 4.0

    def test_too_short_audio_warns_and_returns_empty(self):
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            track = extract_f0(np.zeros(100), SR, CFG)
        assert len(track) == 0
        assert any("shorter" in str(w.message) for w in caught)

    def test_empty_audio_rejected(self):
        with pytest.raises(ValidationError):
            extract_f0(np.zeros(0), SR, CFG)

    def test_low_sample_rate_rejected(self):
        with pytest.raises(ValidationError):
            extract_f0(np.zeros(8000), 8000, CFG)

    def test_framing_metadata(self):
        track = extract_f0(tone(200.0), SR, CFG)
        assert track.frame_shift_s == pytest.approx(110 / SR)
        assert track.start_s == pytest.approx(551 / (2 * SR))


class TestExtractEnergy:
    def test_constant_tone_constant_energy(self):
        track = extract_energy(tone(220.0, seconds=0.5), SR, CFG)
        inner = track.values[2:-2]
        assert inner.max() - inner.min() < 0.1

    def test_doubling_adds_6dB(self):
        e1 = extract_energy(tone(220.0, amp=0.25), SR, CFG)
        e2 = extract_energy(tone(220.0, amp=0.5), SR, CFG)
        np.testing.assert_allclose(e2.values - e1.values, 20 * math.log10(2), atol=1e-9)

    def test_silence_gets_floor(self):
        sig = np.concatenate([tone(220.0, seconds=0.2), np.zeros(SR // 5)])
        track = extract_energy(sig, SR, CFG)
        peak_db = track.values.max()
        assert track.values.min() == pytest.approx(peak_db - CFG.energy_floor_db, abs=1e-6)

    def test_all_silence(self):
        track = extract_energy(np.zeros(SR // 4), SR, CFG)
        assert (track.values == 0).all()


def frames_track(n, shift=0.005, start=0.0125):
    return FrameTrack(values=np.zeros(n), frame_shift_s=shift, start_s=start)


class TestDurationSignal:
    def test_equal_phones_constant_between_centers(self):
        alignment = [
            WordAlignment(
                "w", 0.0, 0.4,
                phones=(Phone("a", 0.0, 0.2), Phone("b", 0.2, 0.4)),
            )
        ]
        framing = frames_track(80)
        track = duration_signal(alignment, framing)
        times = track.times()
        inside = (times >= 0.1) & (times <= 0.3)
        np.testing.assert_allclose(track.values[inside], 0.2, atol=1e-12)

    def test_long_phone_creates_local_peak(self):
        alignment = [
            WordAlignment(
                "w", 0.0, 0.8,
                phones=(Phone("a", 0.0, 0.2), Phone("b", 0.2, 0.6), Phone("c", 0.6, 0.8)),
            )
        ]
        track = duration_signal(alignment, frames_track(160))
        center_idx = int(round((0.4 - track.start_s) / track.frame_shift_s))
        assert track.values[center_idx] == track.values.max()

    def test_hand_computed_piecewise_linear(self):
        # 4 phones: centers 0.05/0.175/0.45/0.75, durations 0.1/0.15/0.4/0.2
        alignment = [
            WordAlignment(
                "w1", 0.0, 0.25,
                phones=(Phone("a", 0.0, 0.1), Phone("b", 0.1, 0.25)),
            ),
            WordAlignment(
                "w2", 0.25, 0.85,
                phones=(Phone("c", 0.25, 0.65), Phone("d", 0.65, 0.85)),
            ),
        ]
        framing = frames_track(200, shift=0.005, start=0.0)
        track = duration_signal(alignment, framing)

        def expected(t):
            centers = [0.05, 0.175, 0.45, 0.75]
            durs = [0.1, 0.15, 0.4, 0.2]
            if t <= centers[0]:
                return durs[0]
            if t >= centers[-1]:
                return durs[-1]
            for i in range(len(centers) - 1):
                if centers[i] <= t <= centers[i + 1]:
                    frac = (t - centers[i]) / (centers[i + 1] - centers[i])
                    return durs[i] + frac * (durs[i + 1] - durs[i])

        for idx in (0, 10, 35, 60, 90, 120, 150, 199):
            t = framing.times()[idx]
            assert track.values[idx] == pytest.approx(expected(t), abs=1e-12)

    def test_empty_alignment_rejected(self):
        with pytest.raises(ValidationError):
            duration_signal([], frames_track(10))

    def test_silent_phones_excluded(self):
        alignment = [
            WordAlignment(
                "w", 0.0, 0.4,
                phones=(Phone("a", 0.0, 0.2), Phone("sil", 0.2, 0.4)),
            )
        ]
        track = duration_signal(alignment, frames_track(80))
        np.testing.assert_allclose(track.values, 0.2, atol=1e-12)


class TestCombineSignals:
    def make_tracks(self, f0_vals, en_vals, dur_vals, voiced=None):
        n = len(f0_vals)
        mask = np.ones(n, dtype=bool) if voiced is None else np.asarray(voiced, dtype=bool)
        f0 = FrameTrack(np.asarray(f0_vals, float), 0.005, 0.0125, voiced_mask=mask)
        en = FrameTrack(np.asarray(en_vals, float), 0.005, 0.0125)
        dur = FrameTrack(np.asarray(dur_vals, float), 0.005, 0.0125)
        return f0, en, dur

    def test_projection_weights(self):
        rng = np.random.default_rng(3)
        f0, en, dur = self.make_tracks(
            rng.uniform(100, 300, 50), rng.normal(size=50), rng.uniform(0.05, 0.2, 50)
        )
        composite = combine_signals(f0, en, dur, weights=(1.0, 0.0, 0.0))
        expected, _ = normalized_tracks(f0, en)
        np.testing.assert_allclose(composite.values, expected, atol=1e-12)

    def test_all_constant_gives_zeros(self):
        f0, en, dur = self.make_tracks([200.0] * 20, [5.0] * 20, [0.1] * 20)
        composite = combine_signals(f0, en, dur)
        np.testing.assert_allclose(composite.values, 0.0, atol=1e-12)

    def test_hand_computed_ten_frames(self):
        f0_vals = [100.0, 200.0] * 5
        en_vals = [0.0, 1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0, 9.0]
        dur_vals = [0.1] * 10
        f0, en, dur = self.make_tracks(f0_vals, en_vals, dur_vals)

        st_vals = 12 * np.log2(np.asarray(f0_vals))
        f0_z = (st_vals - st_vals.mean()) / st_vals.std()
        en_arr = np.asarray(en_vals)
        en_z = (en_arr - en_arr.mean()) / en_arr.std()
        expected = f0_z + en_z  # duration constant -> zeros

        composite = combine_signals(f0, en, dur)
        np.testing.assert_allclose(composite.values, expected, atol=1e-12)

    def test_unvoiced_gaps_interpolated_before_combination(self):
        f0, en, dur = self.make_tracks(
            [100.0, 0.0, 300.0, 300.0], [1.0, 2.0, 3.0, 4.0], [0.1, 0.2, 0.3, 0.4],
            voiced=[True, False, True, True],
        )
        filled = interpolate_f0(f0)
        np.testing.assert_allclose(filled, [100.0, 200.0, 300.0, 300.0])

    def test_mismatched_framing_rejected(self):
        f0, en, _ = self.make_tracks([100.0] * 10, [0.0] * 10, [0.1] * 10)
        other = FrameTrack(np.zeros(5), 0.005, 0.0125)
        with pytest.raises(ValidationError):
            combine_signals(f0, other, other)

    def test_duration_resampled_when_framing_differs(self):
        f0, en, _ = self.make_tracks(np.linspace(100, 200, 10), np.linspace(0, 1, 10), [0.1] * 10)
        dur_coarse = FrameTrack(np.linspace(0.1, 0.2, 5), 0.01, 0.0125)
        composite = combine_signals(f0, en, dur_coarse)
        assert len(composite) == 10
        assert np.isfinite(composite.values).all()


def test_znorm_properties():
    rng = np.random.default_rng(0)
    x = rng.normal(3.0, 2.0, 100)
    z = znorm(x)
    assert abs(z.mean()) < 1e-12
    assert abs(z.std() - 1.0) < 1e-12
    np.testing.assert_allclose(znorm(np.full(10, 2.5)), 0.0)


def test_wav_round_trip(tmp_path):
    sig = tone(220.0, seconds=0.1)
    path = tmp_path / "t.wav"
    write_wav_mono(path, sig, SR)
    loaded, sr = read_wav_mono(path)
    assert sr == SR
    np.testing.assert_allclose(loaded, sig, atol=1.0 / 32767)
