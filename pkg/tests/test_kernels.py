import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from prosign import kernels
from prosign.kernels import reference

try:
    from prosign import _accel
except ImportError:
    _accel = None

needs_accel = pytest.mark.skipif(_accel is None, reason="compiled extension not built")


def test_selected_backend_exposed():
    assert kernels.IMPL_NAME in ("cython", "numpy-reference")


class TestReferenceSemantics:
    def test_autocorr_matches_direct_sum(self):
        rng = np.random.default_rng(0)
        frames = rng.normal(size=(3, 32))
        r = reference.autocorr_frames(frames, 10)
        for i in range(3):
            for lag in range(11):
                direct = float(np.sum(frames[i, : 32 - lag] * frames[i, lag:]))
                assert r[i, lag] == pytest.approx(direct, rel=1e-12, abs=1e-12)

    def test_correlate_valid_matches_direct(self):
        rng = np.random.default_rng(1)
        x = rng.normal(size=40)
        k = rng.normal(size=7)
        got = reference.correlate_valid(x, k)
        for i in range(len(got)):
            assert got[i] == pytest.approx(float(np.dot(x[i : i + 7], k)), rel=1e-12)

    def test_viterbi_prefers_continuity(self):
        # candidate 1 is a stable 200 Hz; candidate 2 flickers to the octave
        n = 20
        freqs = np.zeros((n, 3))
        strengths = np.full((n, 3), -1e9)
        freqs[:, 0] = 0.0
        strengths[:, 0] = 0.45
        freqs[:, 1] = 200.0
        strengths[:, 1] = 0.9
        freqs[:, 2] = 100.0
        strengths[:, 2] = 0.91  # marginally stronger but costs an octave jump
        freqs[10, 2] = 400.0
        path = reference.viterbi_pitch(freqs, strengths, octave_cost=1.0, vu_cost=0.14)
        assert (path == 1).all() or (path == 2).sum() <= 1

    def test_viterbi_empty(self):
        assert len(reference.viterbi_pitch(np.zeros((0, 2)), np.zeros((0, 2)), 0.3, 0.1)) == 0


@needs_accel
class TestParity:
    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=1, max_value=8), st.integers(min_value=8, max_value=64))
    def test_autocorr_parity(self, n, w):
        rng = np.random.default_rng(n * 100 + w)
        frames = rng.normal(size=(n, w))
        max_lag = w // 2
        a = _accel.autocorr_frames(frames, max_lag)
        b = reference.autocorr_frames(frames, max_lag)
        np.testing.assert_allclose(a, b, rtol=1e-9, atol=1e-9)

    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=1, max_value=30), st.integers(min_value=30, max_value=200))
    def test_correlate_parity(self, h, m):
        rng = np.random.default_rng(h * 1000 + m)
        x = rng.normal(size=m)
        k = rng.normal(size=h)
        np.testing.assert_allclose(
            _accel.correlate_valid(x, k), reference.correlate_valid(x, k), rtol=1e-10, atol=1e-12
        )

    @settings(max_examples=25, deadline=None)
    @given(st.integers(min_value=1, max_value=40), st.integers(min_value=2, max_value=5))
    def test_viterbi_parity(self, n, k):
        rng = np.random.default_rng(n * 7 + k)
        freqs = rng.uniform(80, 400, size=(n, k))
        freqs[:, 0] = 0.0
        unvoiced_extra = rng.random(size=(n, k)) < 0.2
        freqs[unvoiced_extra] = 0.0
        strengths = rng.uniform(0, 1, size=(n, k))
        a = _accel.viterbi_pitch(freqs, strengths, 0.35, 0.14)
        b = reference.viterbi_pitch(freqs, strengths, 0.35, 0.14)
        np.testing.assert_array_equal(a, b)

    def test_error_paths_match(self):
        frames = np.zeros((2, 8))
        with pytest.raises(ValueError):
            _accel.autocorr_frames(frames, 8)
        with pytest.raises(ValueError):
            reference.autocorr_frames(frames, 8)
        with pytest.raises(ValueError):
            _accel.correlate_valid(np.zeros(3), np.zeros(5))
        with pytest.raises(ValueError):
            reference.correlate_valid(np.zeros(3), np.zeros(5))
