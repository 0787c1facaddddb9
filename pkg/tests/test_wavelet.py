import numpy as np
import pytest

from prosign.corpus import WordAlignment
from prosign.errors import ValidationError
from prosign.prominence import (
    FrameTrack,
    Scalogram,
    band_salience,
    cwt,
    mirror_pad,
    ricker_kernel,
    word_prominence,
)

SHIFT = 0.005


def track(values, start=0.0):
    return FrameTrack(values=np.asarray(values, float), frame_shift_s=SHIFT, start_s=start)


def direct_conv_oracle(values, n_scales=12, base=0.02):
    """Independent CWT oracle: explicit double-loop correlation per scale."""
    values = np.asarray(values, float)
    rows = []
    for k in range(n_scales):
        scale = base * 2 ** (k / 2)
        kernel = ricker_kernel(scale / SHIFT)
        pad = (len(kernel) - 1) // 2
        padded = mirror_pad(values, pad)
        out = np.zeros(len(values))
        for i in range(len(values)):
            acc = 0.0
            for j in range(len(kernel)):
                acc += padded[i + j] * kernel[j]
            out[i] = acc
        rows.append(out * scale**-0.5)
    return np.vstack(rows)


class TestCwt:
    def test_zero_signal_zero_scalogram(self):
        scal = cwt(track(np.zeros(100)))
        np.testing.assert_allclose(scal.coefficients, 0.0)

    def test_linearity(self):
        rng = np.random.default_rng(5)
        x = rng.normal(size=200)
        s1 = cwt(track(x)).coefficients
        s2 = cwt(track(3.5 * x)).coefficients
        np.testing.assert_allclose(s2, 3.5 * s1, rtol=1e-12, atol=1e-12)

    def test_additivity(self):
        rng = np.random.default_rng(6)
        x, y = rng.normal(size=150), rng.normal(size=150)
        sx = cwt(track(x)).coefficients
        sy = cwt(track(y)).coefficients
        sxy = cwt(track(x + y)).coefficients
        np.testing.assert_allclose(sxy, sx + sy, atol=1e-9)

    def test_impulse_matches_direct_convolution_oracle(self):
        n = 257
        x = np.zeros(n)
        x[n // 2] = 1.0
        got = cwt(track(x), n_scales=6).coefficients
        want = direct_conv_oracle(x, n_scales=6)
        np.testing.assert_allclose(got, want, rtol=1e-6, atol=1e-12)

    def test_impulse_response_is_scaled_kernel(self):
        # interior response to a centered unit impulse equals the (reversed)
        # sampled kernel times scale^(-1/2); Ricker is symmetric so no flip
        n = 801
        x = np.zeros(n)
        x[n // 2] = 1.0
        scal = cwt(track(x), n_scales=4)
        for row, scale in zip(scal.coefficients, scal.scales_s):
            kernel = ricker_kernel(scale / SHIFT) * scale**-0.5
            half = (len(kernel) - 1) // 2
            segment = row[n // 2 - half : n // 2 + half + 1]
            np.testing.assert_allclose(segment, kernel, rtol=1e-6, atol=1e-12)

    def test_shift_equivariance_interior(self):
        rng = np.random.default_rng(11)
        n = 2200
        x = rng.normal(size=n)
        m = 25
        shifted = np.roll(x, m)
        a = cwt(track(x)).coefficients
        b = cwt(track(shifted)).coefficients
        margin = 1000  # beyond the largest kernel half-width (906 frames)
        lhs = b[:, margin + m : n - margin]
        rhs = a[:, margin : n - margin - m]
        assert lhs.size > 0
        np.testing.assert_allclose(lhs, rhs, atol=1e-9)

    def test_dyadic_scales(self):
        scal = cwt(track(np.zeros(64)), n_scales=5, base_scale_s=0.02)
        np.testing.assert_allclose(
            scal.scales_s, [0.02 * 2 ** (k / 2) for k in range(5)], rtol=1e-12
        )

    def test_too_short_signal_rejected(self):
        with pytest.raises(ValidationError):
            cwt(track(np.zeros(7)))

    def test_constant_offset_invariance(self):
        rng = np.random.default_rng(12)
        x = rng.normal(size=300)
        a = cwt(track(x)).coefficients
        b = cwt(track(x + 100.0)).coefficients
        np.testing.assert_allclose(a, b, atol=1e-9)


def words_at(spans):
    return [WordAlignment(f"w{i}", s, e) for i, (s, e) in enumerate(spans)]


def gaussian_bump(times, center, amp, width=0.05):
    return amp * np.exp(-0.5 * ((times - center) / width) ** 2)


class TestWordProminence:
    def composite(self, n=400):
        return track(np.zeros(n))

    def test_single_bump_wins(self):
        base = self.composite()
        times = base.times()
        spans = [(0.1, 0.5), (0.6, 1.0), (1.1, 1.5)]
        signal = gaussian_bump(times, 0.8, 2.0)
        scal = cwt(track(signal))
        prom = dict(word_prominence(scal, words_at(spans)))
        assert prom[1] > prom[0] and prom[1] > prom[2]

    def test_flat_composite_equal_prominence(self):
        scal = cwt(track(np.full(400, 1.23)))
        prom = [p for _, p in word_prominence(scal, words_at([(0.1, 0.5), (0.6, 1.0), (1.2, 1.6)]))]
        assert max(prom) - min(prom) < 1e-9

    def test_three_bump_ordering(self):
        base = self.composite()
        times = base.times()
        spans = [(0.1, 0.5), (0.7, 1.1), (1.3, 1.7)]
        amps = [1.0, 2.0, 0.5]
        signal = sum(gaussian_bump(times, (s + e) / 2, a) for (s, e), a in zip(spans, amps))
        scal = cwt(track(signal))
        prom = dict(word_prominence(scal, words_at(spans)))
        # independent check: salience maxima ordering == planted amplitude order
        assert prom[1] > prom[0] > prom[2]

    def test_offset_invariance_of_prominence(self):
        times = self.composite().times()
        spans = [(0.1, 0.5), (0.7, 1.1)]
        signal = gaussian_bump(times, 0.3, 1.0) + gaussian_bump(times, 0.9, 2.0)
        p1 = dict(word_prominence(cwt(track(signal)), words_at(spans)))
        p2 = dict(word_prominence(cwt(track(signal + 7.5)), words_at(spans)))
        for k in p1:
            assert p1[k] == pytest.approx(p2[k], abs=1e-9)

    def test_positive_scaling_preserves_order(self):
        times = self.composite().times()
        spans = [(0.1, 0.5), (0.7, 1.1), (1.3, 1.7)]
        signal = sum(
            gaussian_bump(times, (s + e) / 2, a) for (s, e), a in zip(spans, [1.0, 3.0, 2.0])
        )
        p1 = word_prominence(cwt(track(signal)), words_at(spans))
        p2 = word_prominence(cwt(track(4.0 * signal)), words_at(spans))
        order1 = sorted(range(3), key=lambda i: p1[i][1])
        order2 = sorted(range(3), key=lambda i: p2[i][1])
        assert order1 == order2

    def test_word_outside_extent_rejected(self):
        scal = cwt(self.composite(100))
        with pytest.raises(ValidationError, match="outside"):
            word_prominence(scal, [WordAlignment("w", 10.0, 11.0)])

    def test_empty_scale_band_rejected(self):
        scal = cwt(self.composite(100))
        with pytest.raises(ValidationError):
            band_salience(scal, (10.0, 20.0))

    def test_band_selection(self):
        scal = cwt(self.composite(100), n_scales=12, base_scale_s=0.02)
        in_band = [s for s in scal.scales_s if 0.08 - 1e-12 <= s <= 0.6 + 1e-12]
        assert len(in_band) == 6  # 0.08, 0.113, 0.16, 0.226, 0.32, 0.453


def test_scalogram_validation():
    with pytest.raises(ValidationError):
        Scalogram(
            coefficients=np.zeros((2, 4)), scales_s=(0.2, 0.1), frame_shift_s=SHIFT, start_s=0.0
        )
    with pytest.raises(ValidationError):
        Scalogram(
            coefficients=np.full((1, 4), np.nan), scales_s=(0.1,), frame_shift_s=SHIFT, start_s=0.0
        )
