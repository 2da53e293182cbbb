"""Tests for the generative signal model and its validation rules."""
import io
import math

import numpy as np
import pytest

from syncphase.errors import (
    EmptyInput,
    NonPositiveAmplitude,
    NonSynchronous,
    NyquistViolation,
    OutOfRange,
)
from syncphase.signal_model import (
    generate,
    make_params,
    read_samples_csv,
    sigma_x_for_snr,
    snr_db,
    snr_linear,
    tone_phases,
    write_samples_csv,
)
from syncphase import rng


def quarter_period():
    return make_params(amplitude=1.0, f0=1.0, fs=4.0, n_samples=4)


class TestMakeParams:
    def test_quarter_period_grid(self):
        p = quarter_period()
        assert p.bin_index == 1
        assert p.omega == pytest.approx(math.pi / 2.0, abs=0.0)

    def test_non_synchronous_rejected(self):
        # 7 * 3 / 10 = 21/10 is not an integer
        with pytest.raises(NonSynchronous):
            make_params(amplitude=1.0, f0=3.0, fs=10.0, n_samples=7)

    def test_nyquist_violation(self):
        with pytest.raises(NyquistViolation):
            make_params(amplitude=1.0, f0=5.0, fs=9.0, n_samples=18)

    def test_nyquist_boundary_is_rejected(self):
        # fs exactly equal to 2*f0 must also fail (strict inequality)
        with pytest.raises(NyquistViolation):
            make_params(amplitude=1.0, f0=5.0, fs=10.0, n_samples=4)

    def test_decimal_literals_are_synchronous(self):
        # 0.1 and 1.0 are exact as decimals even though 0.1 is not an exact
        # binary float; N * f0 / fs = 10 * 0.1 / 1.0 must reduce to k = 1.
        p = make_params(amplitude=1.0, f0=0.1, fs=1.0, n_samples=10)
        assert p.bin_index == 1

    def test_bin_must_be_at_least_one(self):
        # N * f0 / fs = 0.4 for N=4 would give k < 1
        with pytest.raises(NonSynchronous):
            make_params(amplitude=1.0, f0=1.0, fs=10.0, n_samples=4)

    def test_amplitude_must_be_positive(self):
        for bad in (0.0, -1.0, math.nan):
            with pytest.raises(NonPositiveAmplitude):
                make_params(amplitude=bad, f0=1.0, fs=4.0, n_samples=4)

    def test_sigma_and_n_validation(self):
        with pytest.raises(OutOfRange):
            make_params(amplitude=1.0, f0=1.0, fs=4.0, n_samples=0)
        with pytest.raises(OutOfRange):
            make_params(amplitude=1.0, f0=1.0, fs=4.0, n_samples=4,
                        sigma_additive=-0.1)
        with pytest.raises(OutOfRange):
            make_params(amplitude=1.0, f0=1.0, fs=4.0, n_samples=4,
                        sigma_phase=-0.5)

    def test_phase_normalized_to_principal_interval(self):
        p = make_params(amplitude=1.0, f0=1.0, fs=4.0, n_samples=4,
                        phase=-math.pi / 2.0)
        assert 0.0 <= p.phase < 2.0 * math.pi
        assert p.phase == pytest.approx(1.5 * math.pi)


class TestToneAndGenerate:
    def test_noiseless_quarter_period_samples(self):
        p = quarter_period()
        r = generate(p, seed=0)
        assert np.allclose(r.samples, [1.0, 0.0, -1.0, 0.0], atol=1e-15)

    def test_tone_phase_reduction_matches_direct_formula(self):
        # the stored phases are reduced mod 2*pi, so compare on the circle
        p = make_params(amplitude=2.0, f0=3.0, fs=15.0, phase=0.7,
                        n_samples=45)
        direct = 2.0 * math.pi * p.bin_index * np.arange(45) / 45 + 0.7
        assert np.allclose(np.exp(1j * tone_phases(p)), np.exp(1j * direct),
                           rtol=0.0, atol=1e-12)

    def test_generation_is_reproducible(self):
        p = make_params(amplitude=1.0, f0=1.0, fs=10.0, phase=0.3,
                        sigma_additive=0.5, sigma_phase=0.02, n_samples=50)
        a = generate(p, seed=123, draw_index=7)
        b = generate(p, seed=123, draw_index=7)
        assert np.array_equal(a.samples, b.samples)
        c = generate(p, seed=123, draw_index=8)
        assert not np.array_equal(a.samples, c.samples)

    def test_noise_channels_are_independent_streams(self):
        # silencing one channel must not change what the other one draws
        base = dict(amplitude=1.0, f0=1.0, fs=10.0, n_samples=40)
        both = generate(make_params(sigma_additive=1.0, sigma_phase=0.1,
                                    **base), seed=5)
        phase_only = generate(make_params(sigma_phase=0.1, **base), seed=5)
        additive = both.samples - np.cos(
            tone_phases(both.params)
            + 0.1 * rng.standard_normals(5, 0, rng.CH_PHASE, 40))
        assert np.allclose(
            phase_only.samples + additive, both.samples, atol=1e-12)

    def test_samples_are_read_only(self):
        r = generate(quarter_period(), seed=1)
        with pytest.raises((ValueError, RuntimeError)):
            r.samples[0] = 5.0

    def test_additive_noise_variance(self):
        p = make_params(amplitude=1.0, f0=1.0, fs=10.0, sigma_additive=1.0,
                        n_samples=10**6)
        r = generate(p, seed=3)
        noise = r.samples - np.cos(tone_phases(p))
        assert 0.997 <= float(np.var(noise)) <= 1.003

    def test_phase_noise_sample_variance_matches_closed_form(self):
        # Var(cos(t + p)) with p ~ N(0, sp^2) at a fixed tone phase t:
        # (1 + exp(-2 sp^2) cos 2t) / 2 - exp(-sp^2) cos^2 t
        sp = 0.1
        p = make_params(amplitude=1.0, f0=1.0, fs=10.0, sigma_phase=sp,
                        n_samples=20)
        t = float(tone_phases(p)[3])
        z = rng.standard_normals(99, 0, rng.CH_PHASE, 10**6)
        sample = np.cos(t + sp * z)
        expected = (1.0 + math.exp(-2 * sp**2) * math.cos(2 * t)) / 2.0 \
            - math.exp(-sp**2) * math.cos(t) ** 2
        assert float(np.var(sample)) == pytest.approx(expected, rel=0.01)


class TestSnrHelpers:
    def test_snr_of_unit_noise(self):
        p = make_params(amplitude=1.0, f0=1.0, fs=4.0, sigma_additive=1.0,
                        n_samples=4)
        assert snr_linear(p) == pytest.approx(0.5)
        assert snr_db(p) == pytest.approx(-3.0103, abs=1e-4)

    def test_snr_db_of_100(self):
        p = make_params(amplitude=1.0, f0=1.0, fs=4.0,
                        sigma_additive=sigma_x_for_snr(1.0, 100.0),
                        n_samples=4)
        assert snr_linear(p) == pytest.approx(100.0)
        assert snr_db(p) == pytest.approx(20.0)

    def test_sigma_for_snr_inverts(self):
        assert sigma_x_for_snr(1.0, 0.5) == pytest.approx(1.0)

    def test_noiseless_snr_is_infinite(self):
        p = quarter_period()
        assert snr_linear(p) == math.inf
        assert snr_db(p) == math.inf

    def test_infinite_snr_means_zero_sigma(self):
        assert sigma_x_for_snr(2.0, math.inf) == 0.0


class TestSampleCsv:
    def test_round_trip(self):
        r = generate(make_params(amplitude=1.0, f0=1.0, fs=10.0,
                                 sigma_additive=0.3, n_samples=30), seed=11)
        buf = io.StringIO()
        write_samples_csv(buf, r.samples)
        buf.seek(0)
        back = read_samples_csv(buf)
        assert np.array_equal(back, r.samples)

    def test_empty_file_rejected(self):
        with pytest.raises(EmptyInput):
            read_samples_csv(io.StringIO("n,sample\n"))

    def test_malformed_rows_rejected(self):
        with pytest.raises(OutOfRange):
            read_samples_csv(io.StringIO("n,sample\n0,1.0\n2,0.5\n"))
        with pytest.raises(OutOfRange):
            read_samples_csv(io.StringIO("n,sample\n0,not-a-number\n"))
