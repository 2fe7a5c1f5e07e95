"""Asymptotic bound formulas, gains, and the shared band quadrature."""

import numpy as np
import pytest

from aftn_noma import (
    BoundPair,
    FtnConfig,
    PulseParams,
    Scenario,
    UserLink,
    anoma_bounds,
    band_integral,
    dof_gain,
    folded_spectrum,
    high_snr_ratio,
    merged_rate,
    rate_bound_pair,
    rate_lower_bound,
    rate_upper_bound,
    rrc_spectrum,
    sinr_gain,
    synchronous_rate,
)

P03 = PulseParams(beta=0.3)
Z1 = FtnConfig(1.0)


def scen(gains, p_over_n0, zeta=1.0, beta=0.3):
    gains = np.atleast_1d(np.asarray(gains, dtype=float))
    es = p_over_n0 * zeta  # T = 1, N0 = 1
    users = tuple(UserLink(h=complex(np.sqrt(g)), symbol_energy=es) for g in gains)
    return Scenario(
        users=users,
        n_symbols=1,
        noise_psd=1.0,
        ftn=FtnConfig(zeta),
        pulse=PulseParams(beta=beta),
    )


class TestLowerBound:
    def test_nyquist_reduces_to_closed_form(self):
        s = scen([0.5, 0.4, 0.1], 100.0)
        for k in range(3):
            assert rate_lower_bound(s, k) == pytest.approx(synchronous_rate(s, k), abs=1e-12)

    def test_single_user_frozen_value(self):
        s = scen(1.0, 10.0)
        assert rate_lower_bound(s, 0) == pytest.approx(np.log2(11.0) / 1.3, abs=1e-12)

    def test_merged_regime_equals_upper(self):
        s = scen([0.6, 0.4], 50.0, zeta=1.0 / 1.3)
        for k in range(2):
            assert rate_lower_bound(s, k) == pytest.approx(rate_upper_bound(s, k), abs=1e-12)


class TestUpperBound:
    def test_single_user_equals_lower(self):
        s = scen(1.0, 25.0, zeta=0.9)
        assert rate_upper_bound(s, 0) == pytest.approx(rate_lower_bound(s, 0), abs=1e-12)

    def test_brick_wall_equals_lower(self):
        for zeta in (1.0, 0.8, 0.6):
            s = scen([0.5, 0.5], 30.0, zeta=zeta, beta=0.0)
            for k in range(2):
                assert rate_upper_bound(s, k) == pytest.approx(
                    rate_lower_bound(s, k), abs=1e-12
                )

    def test_strictly_above_lower_with_aliasing(self):
        s = scen([0.5, 0.4, 0.1], 100.0, zeta=0.95)
        assert rate_upper_bound(s, 0) > rate_lower_bound(s, 0)

    def test_sandwich_on_grid(self):
        # coarser quadrature keeps the 10x10x10 sweep fast; ordering is
        # pointwise in the integrand, so panel count cannot break it
        for beta in np.linspace(0.0, 1.0, 10):
            for zeta in np.linspace(0.55, 1.0, 10):
                for snr_db in np.linspace(0.0, 30.0, 10):
                    s = scen([0.5, 0.4, 0.1], 10 ** (snr_db / 10), zeta=zeta, beta=beta)
                    for k in range(3):
                        lo = rate_lower_bound(s, k, quad_points=1024)
                        up = rate_upper_bound(s, k, quad_points=1024)
                        assert lo <= up + 1e-12

    def test_bound_pair_merged_flag(self):
        assert rate_bound_pair(scen(1.0, 5.0, zeta=0.7), 0).merged
        assert not rate_bound_pair(scen(1.0, 5.0, zeta=0.95), 0).merged
        assert rate_bound_pair(scen(1.0, 5.0, zeta=1.0, beta=0.0), 0).merged

    def test_invalid_pair_rejected(self):
        with pytest.raises(ValueError):
            BoundPair(lower=2.0, upper=1.0, merged=False)


class TestAnomaBounds:
    def test_single_user_both_equal(self):
        s = scen(1.0, 10.0)
        bp = anoma_bounds(s, 0)
        want = np.log2(11.0) / 1.3
        assert bp.lower == pytest.approx(want, abs=1e-12)
        assert bp.upper == pytest.approx(want, abs=1e-9)

    def test_brick_wall_merges(self):
        s = scen([0.5, 0.5], 20.0, beta=0.0)
        for k in range(2):
            bp = anoma_bounds(s, k)
            assert bp.merged
            assert bp.upper == pytest.approx(bp.lower, abs=1e-12)

    def test_lower_is_synchronous_benchmark(self):
        s = scen([0.5, 0.4, 0.1], 100.0)
        for k in range(3):
            assert anoma_bounds(s, k).lower == pytest.approx(
                synchronous_rate(s, k), abs=1e-15
            )

    def test_requires_nyquist_rate(self):
        with pytest.raises(ValueError, match="zeta"):
            anoma_bounds(scen(1.0, 1.0, zeta=0.9), 0)

    def test_upper_exceeds_lower_with_interference(self):
        s = scen([0.5, 0.4, 0.1], 100.0)
        bp = anoma_bounds(s, 0)
        assert bp.upper > bp.lower


class TestMergedRate:
    def test_brick_wall_single_user(self):
        s = scen(1.0, 10.0, zeta=1.0, beta=0.0)
        assert merged_rate(s, 0) == pytest.approx(np.log2(11.0), abs=1e-12)

    def test_equals_bounds_at_threshold(self):
        s = scen([0.6, 0.4], 40.0, zeta=1.0 / 1.3)
        for k in range(2):
            m = merged_rate(s, k)
            assert m == pytest.approx(rate_lower_bound(s, k), abs=1e-12)
            assert m == pytest.approx(rate_upper_bound(s, k), abs=1e-12)

    def test_precondition_enforced(self):
        with pytest.raises(ValueError, match="merged"):
            merged_rate(scen(1.0, 1.0, zeta=0.9), 0)

    def test_zeta_independent(self):
        vals = [
            merged_rate(scen([0.7, 0.3], 30.0, zeta=z), 0)
            for z in (1.0 / 1.3, 0.6, 0.4)
        ]
        assert np.ptp(vals) < 1e-12


class TestHighSnrRatio:
    def test_approaches_excess_bandwidth_factor(self):
        for beta in (0.3, 0.5, 1.0):
            s = scen([0.5, 0.4, 0.1], 1.0, zeta=1.0 / (1.0 + beta), beta=beta)
            ratio = high_snr_ratio(s, [60.0], k=0)[0]
            assert ratio == pytest.approx(1.0 + beta, rel=0.02)

    def test_brick_wall_unity_everywhere(self):
        s = scen([0.5, 0.5], 1.0, zeta=1.0, beta=0.0)
        ratios = high_snr_ratio(s, [0.0, 20.0, 40.0, 60.0], k=0)
        assert np.abs(ratios - 1.0).max() < 1e-9

    def test_monotone_approach(self):
        s = scen([0.5, 0.4, 0.1], 1.0, zeta=1.0 / 1.3, beta=0.3)
        ratios = high_snr_ratio(s, np.arange(10.0, 61.0, 10.0), k=0)
        assert np.all(np.diff(ratios) > 0.0)
        assert np.all(ratios < 1.3 + 1e-9)


class TestSinrGain:
    def test_unity_without_aliasing(self):
        s = scen([0.5, 0.4, 0.1], 100.0, zeta=0.7)
        assert sinr_gain(s, 0) == pytest.approx(1.0, abs=1e-12)

    def test_unity_brick_wall(self):
        s = scen([0.5, 0.4, 0.1], 100.0, zeta=1.0, beta=0.0)
        assert sinr_gain(s, 0) == pytest.approx(1.0, abs=1e-12)

    def test_gain_with_aliasing(self):
        s = scen([0.5, 0.4, 0.1], 100.0, zeta=1.0, beta=0.5)
        assert sinr_gain(s, 0) > 1.0

    def test_ratio_form_also_unity_without_aliasing(self):
        s = scen([0.5, 0.4, 0.1], 100.0, zeta=0.7)
        assert sinr_gain(s, 0, form="ratio") == pytest.approx(1.0, abs=1e-12)
        with pytest.raises(ValueError):
            sinr_gain(s, 0, form="bogus")

    def test_no_interference_no_gain(self):
        s = scen(1.0, 100.0, zeta=1.0, beta=0.5)
        assert sinr_gain(s, 0) == pytest.approx(1.0, abs=1e-12)


class TestDofGain:
    def test_nyquist_unity(self):
        assert dof_gain(Z1, P03) == 1.0

    def test_saturated(self):
        assert dof_gain(FtnConfig(2.0 / 3.0), PulseParams(0.5)) == pytest.approx(1.5)

    def test_partial(self):
        assert dof_gain(FtnConfig(0.8), PulseParams(0.5)) == pytest.approx(1.25)

    def test_never_exceeds_excess_bandwidth(self):
        for beta in (0.0, 0.3, 1.0):
            for zeta in (1.0, 0.7, 0.4):
                g = dof_gain(FtnConfig(zeta), PulseParams(beta))
                assert 1.0 <= g <= 1.0 + beta + 1e-12


class TestBandIntegral:
    def test_constant_over_nyquist_band(self):
        assert band_integral(lambda f: np.ones_like(f), Z1, P03) == pytest.approx(1.0, abs=1e-12)

    def test_folded_mass(self):
        val = band_integral(
            lambda f: folded_spectrum(f, Z1, P03), Z1, P03, even=True
        )
        assert val == pytest.approx(1.0, abs=1e-9)

    def test_rolloff_branch_vs_antiderivative(self):
        # pulse spectrum over its support: flat part (1-beta) plus two
        # quarter-period cosine-squared lobes of mass beta/2 each
        z = FtnConfig(0.5)  # band wider than the support; clip to it
        val = band_integral(
            lambda f: rrc_spectrum(f, P03), z, P03, clip_to_pulse=True
        )
        assert val == pytest.approx(1.0, abs=1e-10)

    def test_even_flag_matches_full(self):
        fn = lambda f: rrc_spectrum(f, P03) ** 2
        full = band_integral(fn, Z1, P03)
        half = band_integral(fn, Z1, P03, even=True)
        assert half == pytest.approx(full, abs=1e-9)

    def test_nan_rejected_with_frequency(self):
        def bad(f):
            out = np.ones_like(f)
            out[np.abs(f - 0.25) < 1e-3] = np.nan
            return out

        with pytest.raises(ValueError, match="NaN"):
            band_integral(bad, Z1, P03)


class TestDelayIndependence:
    def test_bounds_take_no_delay_inputs(self):
        # identical bounds regardless of the delays stored on the users
        g = [0.5, 0.4, 0.1]
        es = 10.0
        users_a = tuple(UserLink(h=complex(np.sqrt(x)), symbol_energy=es) for x in g)
        users_b = tuple(
            UserLink(h=complex(np.sqrt(x)), delay=d, symbol_energy=es)
            for x, d in zip(g, (0.3, 1.7, 0.9))
        )
        for users in ((users_a, users_b),):
            sa = Scenario(users=users[0], n_symbols=1, noise_psd=1.0, ftn=FtnConfig(0.95), pulse=P03)
            sb = Scenario(users=users[1], n_symbols=1, noise_psd=1.0, ftn=FtnConfig(0.95), pulse=P03)
            for k in range(3):
                assert rate_lower_bound(sa, k) == rate_lower_bound(sb, k)
                assert rate_upper_bound(sa, k) == rate_upper_bound(sb, k)
