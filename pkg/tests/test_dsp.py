"""Signal container, convolution/correlation contracts, chirp synthesis."""

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import complex_gaussian, direct_convolve, direct_xcorr, max_rel_error, random_signal
from trlink.dsp import NUMERIC_RTOL, ComplexBasebandSignal, convolve, make_chirp, xcorr
from trlink.errors import ConfigurationError, DomainError


def sig(values, rate=1.0):
    return ComplexBasebandSignal(np.asarray(values, dtype=complex), rate)


class TestComplexBasebandSignal:
    def test_empty_signal_is_legal(self):
        empty = sig([])
        assert len(empty) == 0
        assert empty.energy == 0.0

    def test_rejects_nan_samples(self):
        with pytest.raises(DomainError):
            sig([1.0, np.nan])

    def test_rejects_nonpositive_rate(self):
        with pytest.raises(ConfigurationError):
            sig([1.0], rate=0.0)

    def test_samples_are_frozen(self):
        s = sig([1.0, 2.0])
        with pytest.raises(ValueError):
            s.samples[0] = 5.0


class TestConvolve:
    def test_delta_identity(self):
        rng = np.random.default_rng(1)
        b = random_signal(rng, 17)
        out = convolve(sig([1.0]), b)
        np.testing.assert_allclose(out.samples, b.samples, rtol=1e-12, atol=1e-14)

    def test_two_tap_hand_case(self):
        out = convolve(sig([1.0, 1.0]), sig([1.0, -1.0]))
        np.testing.assert_allclose(out.samples, [1.0, 0.0, -1.0], atol=1e-12)

    def test_matches_double_loop_oracle_257_511(self):
        rng = np.random.default_rng(2)
        a = random_signal(rng, 257)
        b = random_signal(rng, 511)
        expected = direct_convolve(a.samples, b.samples)
        out = convolve(a, b).samples
        assert out.size == 257 + 511 - 1
        assert max_rel_error(out, expected) <= NUMERIC_RTOL

    def test_rejects_mismatched_rates(self):
        with pytest.raises(ConfigurationError):
            convolve(sig([1.0], rate=1.0), sig([1.0], rate=2.0))

    def test_rejects_empty_input(self):
        with pytest.raises(DomainError):
            convolve(sig([]), sig([1.0]))


class TestXcorr:
    def test_scalar_autocorrelation(self):
        out = xcorr(sig([1.0]), sig([1.0]))
        np.testing.assert_allclose(out.samples, [1.0])

    def test_unit_norm_parseval_at_zero_lag(self):
        rng = np.random.default_rng(3)
        v = complex_gaussian(rng, 32)
        v /= np.linalg.norm(v)
        out = xcorr(sig(v), sig(v)).samples
        assert abs(out[31] - 1.0) <= 1e-12

    def test_lag_convention_shifted_delta(self):
        # b is a copy of a delayed by 2 samples: correlation peaks at lag +2,
        # i.e. output index len(a) - 1 + 2.
        a = sig([1.0, 0.0, 0.0, 0.0])
        b = sig([0.0, 0.0, 1.0, 0.0, 0.0])
        out = xcorr(a, b).samples
        assert np.argmax(np.abs(out)) == len(a.samples) - 1 + 2

    def test_matches_double_loop_oracle(self):
        rng = np.random.default_rng(4)
        for n, m in [(5, 9), (31, 17), (64, 64)]:
            a = random_signal(rng, n)
            b = random_signal(rng, m)
            expected = direct_xcorr(a.samples, b.samples)
            assert max_rel_error(xcorr(a, b).samples, expected) <= NUMERIC_RTOL

    def test_rejects_empty(self):
        with pytest.raises(DomainError):
            xcorr(sig([1.0]), sig([]))


class TestMakeChirp:
    def test_zero_bandwidth_is_unit_tone(self):
        tone = make_chirp(1e9, 0.0, 1e-6, 1e8)
        np.testing.assert_allclose(tone.samples, np.ones(100), atol=1e-12)

    def test_full_band_length_and_amplitude(self):
        chirp = make_chirp(273.6e9, 4e9, 1e-6, 4e9)
        assert len(chirp) == 4000
        np.testing.assert_allclose(np.abs(chirp.samples), 1.0, atol=1e-12)

    def test_compressed_main_lobe_width(self):
        # -3 dB width of the autocorrelation of an oversampled chirp is about
        # sample_rate / bandwidth samples (time-bandwidth compression).
        rate, bandwidth = 1e9, 1.25e8
        chirp = make_chirp(0.0, bandwidth, 2e-6, rate)
        ac = np.abs(xcorr(chirp, chirp).samples)
        peak_idx = int(np.argmax(ac))
        level = ac[peak_idx] / np.sqrt(2.0)
        above = ac >= level
        left = peak_idx
        while left > 0 and above[left - 1]:
            left -= 1
        right = peak_idx
        while right < ac.size - 1 and above[right + 1]:
            right += 1
        width = right - left + 1
        expected = rate / bandwidth
        assert 0.5 * expected <= width <= 1.5 * expected

    def test_rejects_aliasing_bandwidth(self):
        with pytest.raises(ConfigurationError):
            make_chirp(1e9, 2e9, 1e-6, 1e9)

    def test_rejects_too_short(self):
        with pytest.raises(ConfigurationError):
            make_chirp(1e9, 1e6, 1e-9, 1e8)


length = st.integers(min_value=1, max_value=200)
seed = st.integers(min_value=0, max_value=2**31 - 1)


class TestAlgebraicProperties:
    @given(length, length, seed)
    def test_convolution_commutative(self, n, m, s):
        rng = np.random.default_rng(s)
        a, b = random_signal(rng, n), random_signal(rng, m)
        left = convolve(a, b).samples
        right = convolve(b, a).samples
        assert max_rel_error(left, right) <= NUMERIC_RTOL

    @given(length, length, seed)
    def test_convolution_linear(self, n, m, s):
        rng = np.random.default_rng(s)
        a, c = random_signal(rng, n), random_signal(rng, n)
        b = random_signal(rng, m)
        alpha, beta = complex(*rng.standard_normal(2)), complex(*rng.standard_normal(2))
        mixed = ComplexBasebandSignal(alpha * a.samples + beta * c.samples, 1.0)
        left = convolve(mixed, b).samples
        right = alpha * convolve(a, b).samples + beta * convolve(c, b).samples
        assert max_rel_error(left, right) <= NUMERIC_RTOL

    @given(length, length, seed)
    def test_xcorr_hermitian_symmetry(self, n, m, s):
        rng = np.random.default_rng(s)
        a, b = random_signal(rng, n), random_signal(rng, m)
        forward = xcorr(a, b).samples
        backward = np.conj(xcorr(b, a).samples[::-1])
        assert max_rel_error(forward, backward) <= NUMERIC_RTOL

    @given(length, seed)
    def test_autocorrelation_peaks_at_zero_lag(self, n, s):
        rng = np.random.default_rng(s)
        a = random_signal(rng, n)
        ac = np.abs(xcorr(a, a).samples)
        assert ac.max() <= ac[n - 1] * (1.0 + 1e-12)

    @given(length, length, seed)
    def test_fast_convolution_matches_direct(self, n, m, s):
        rng = np.random.default_rng(s)
        a, b = random_signal(rng, n), random_signal(rng, m)
        expected = np.convolve(a.samples, b.samples)
        assert max_rel_error(convolve(a, b).samples, expected) <= NUMERIC_RTOL

    @given(length, length, seed)
    def test_fast_correlation_matches_direct(self, n, m, s):
        rng = np.random.default_rng(s)
        a, b = random_signal(rng, n), random_signal(rng, m)
        expected = np.correlate(b.samples, a.samples, mode="full")
        assert max_rel_error(xcorr(a, b).samples, expected) <= NUMERIC_RTOL
