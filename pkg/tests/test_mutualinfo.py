import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate

from relaylab.channel import (D_BOTH, D_NONE, D_R1, D_R2, FadingRealization,
                              RatePoint)
from relaylab.errors import ConfigError
from relaylab.mutualinfo import (DelayConfig, SchemeId, closed_log_integral,
                                 i_af_pair, i_astc, i_emaca_spectral, i_esd,
                                 i_esd_bounds, i_ltda, i_rtda, i_stc, i_tda,
                                 rtda_integer_period_value, scheme_mi,
                                 tda_integer_period_value)
from relaylab.outage import mixing_protocol_mi
from relaylab.waveform import correlations, rectangular, spectral_entries, srrc

UNIT = FadingRealization(1 + 0j, 1 + 0j, 1 + 0j, 1 + 0j, 1 + 0j)

gain = st.floats(min_value=1e-4, max_value=50.0)
phase = st.floats(min_value=-math.pi, max_value=math.pi)
rho = st.floats(min_value=1e-2, max_value=1e3)


def random_fading(rng):
    z = (rng.standard_normal(5) + 1j * rng.standard_normal(5)) / math.sqrt(2)
    return FadingRealization(*map(complex, z))


# ---------------------------------------------------------------------------
# synchronous evaluator and the circle-log integral


def test_i_stc_reference_point():
    # 0.5*log2(2) + 0.5*log2(3) at unit gains, rho0 = 1
    v = i_stc(UNIT, D_BOTH, 1.0)
    np.testing.assert_allclose(v, 1.2924812503605778, rtol=1e-15)
    np.testing.assert_allclose(i_stc(UNIT, D_NONE, 1.0), 0.5, rtol=1e-15)
    np.testing.assert_allclose(i_stc(UNIT, D_R1, 1.0), 1.0, rtol=1e-15)


def test_i_stc_set_monotone():
    f = FadingRealization(0.3 + 0.4j, 0j, 0j, 1.2 - 0.1j, 0.2 + 0.9j)
    vals = [i_stc(f, d, 5.0) for d in (D_NONE, D_R1, D_R2, D_BOTH)]
    assert vals[0] <= vals[1] <= vals[3]
    assert vals[0] <= vals[2] <= vals[3]


def test_closed_log_integral_values():
    np.testing.assert_allclose(closed_log_integral(0.0, 0.0), 0.0, atol=0)
    np.testing.assert_allclose(closed_log_integral(0.6, 0.0),
                               math.log2(0.9), rtol=1e-15)
    np.testing.assert_allclose(closed_log_integral(0.6, 0.0),
                               -0.15200309344504995, rtol=1e-15)
    with pytest.raises(ConfigError):
        closed_log_integral(0.8, 0.7)


def test_closed_log_integral_vs_quadrature():
    for a, b in ((0.3, 0.2), (-0.5, 0.4), (0.0, 0.95), (0.7, -0.6)):
        ref, _ = integrate.quad(
            lambda x: math.log2(1.0 + a * math.sin(x) + b * math.cos(x)),
            0.0, 2.0 * math.pi, limit=300)
        np.testing.assert_allclose(closed_log_integral(a, b), ref / (2 * math.pi),
                                   rtol=0, atol=1e-11)


# ---------------------------------------------------------------------------
# delay configurations


def test_delay_config_delta1():
    assert DelayConfig.from_t0bw(3.0).delta1 == 1.0
    assert DelayConfig.from_t0bw(2.5).delta1 == pytest.approx(2.0 / 3.0, rel=1e-15)
    assert DelayConfig.from_t0bw(0.5).delta1 == 0.0
    # near-integer snap keeps the closed-form branch reachable
    assert DelayConfig.from_t0bw(3.0 - 1e-12).delta1 == 1.0


def test_delay_config_validation():
    with pytest.raises(ConfigError):
        DelayConfig.from_t0bw(-1.0)


# ---------------------------------------------------------------------------
# independent-codebook delay diversity


def test_tda_integer_period_matches_quadrature():
    delays = DelayConfig.from_t0bw(3.0)
    f = FadingRealization(0.5 + 0.2j, 0j, 0j, 1.1 + 0.3j, 0.4 - 0.8j)
    closed = tda_integer_period_value(f, delays, 4.0)
    quad = i_tda(f, D_BOTH, delays, 4.0).value
    np.testing.assert_allclose(closed, quad, rtol=0, atol=1e-12)


def test_tda_integer_period_guard():
    with pytest.raises(ConfigError):
        tda_integer_period_value(UNIT, DelayConfig.from_t0bw(2.5), 1.0)


def test_tda_reduces_to_sync_for_small_sets():
    delays = DelayConfig.from_t0bw(2.0)
    for d in (D_NONE, D_R1, D_R2):
        b = i_tda(UNIT, d, delays, 3.0)
        assert b.value == b.lower == b.upper == i_stc(UNIT, d, 3.0)


def test_tda_zero_delay_collapses():
    delays = DelayConfig(0.0, 0.0, 2.0)
    f = FadingRealization(1 + 0j, 0j, 0j, 1 + 0j, -1 + 0j)  # opposite phases cancel
    b = i_tda(f, D_BOTH, delays, 1.0)
    np.testing.assert_allclose(b.value, 0.5, rtol=1e-12)  # direct term only
    assert b.warnings


def test_tda_subunit_bandwidth_warns():
    b = i_tda(UNIT, D_BOTH, DelayConfig.from_t0bw(0.5), 1.0)
    assert b.warnings
    assert b.lower == 0.0


# ---------------------------------------------------------------------------
# repetition delay diversity


def test_rtda_cases():
    delays = DelayConfig.from_t0bw(2.0)
    rho0 = 3.0
    b0 = i_rtda(UNIT, D_NONE, delays, rho0)
    np.testing.assert_allclose(b0.value, 0.5 * math.log2(1 + rho0), rtol=1e-14)
    b1 = i_rtda(UNIT, D_R2, delays, rho0)
    np.testing.assert_allclose(b1.value, 0.5 * math.log2(1 + 2 * rho0), rtol=1e-14)
    closed = rtda_integer_period_value(UNIT, delays, rho0)
    quad = i_rtda(UNIT, D_BOTH, delays, rho0).value
    np.testing.assert_allclose(closed, quad, rtol=0, atol=1e-12)


def test_rtda_below_tda():
    # repeating the codeword can never beat independent codebooks
    rng = np.random.default_rng(7)
    delays = DelayConfig.from_t0bw(2.0)
    for _ in range(50):
        f = random_fading(rng)
        vt = i_tda(f, D_BOTH, delays, 5.0).value
        vr = i_rtda(f, D_BOTH, delays, 5.0).value
        assert vr <= vt + 1e-12


# ---------------------------------------------------------------------------
# linearly modulated overlap evaluator


def test_ltda_disjoint_support_reference():
    # duty 0.4 pulse with tau 0.5: zero cross-overlap, so b = 0 and
    # i2 = log2(1 + a + (1+a)) - 1 with a = rho0 (r1^2 + r2^2)
    corr = correlations(rectangular(1, 64, duty=0.4), 0.5)
    assert corr.rho12 == 0.0 and corr.rho21 == 0.0
    f = FadingRealization(1 + 0j, 0j, 0j, complex(math.sqrt(2)), 1 + 0j)
    b = i_ltda(f, D_BOTH, corr, 1.0)
    # a = 3: i2 = log2(8) - 1 = 2, plus the direct half-bit
    np.testing.assert_allclose(b.value, 0.5 * math.log2(2.0) + 0.5 * 2.0, rtol=1e-12)


def test_ltda_span_guard():
    corr = correlations(srrc(0.5, 2, 64), 0.3)
    with pytest.raises(ConfigError):
        i_ltda(UNIT, D_BOTH, corr, 1.0)


def test_ltda_small_sets():
    corr = correlations(rectangular(1, 64), 0.5)
    for d in (D_NONE, D_R1):
        assert i_ltda(UNIT, d, corr, 2.0).value == i_stc(UNIT, d, 2.0)


# ---------------------------------------------------------------------------
# single-stream and two-stream spectral evaluators


def test_i_esd_zero_isi():
    for g in (0.1, 1.0, 7.5):
        a = complex(math.sqrt(g))
        np.testing.assert_allclose(i_esd(a, 0.0, 1.0), math.log2(1 + g), rtol=1e-14)


def test_i_esd_matches_quadrature():
    a1, g, rho0 = 0.25, 1.7, 3.0
    ref, _ = integrate.quad(
        lambda w: math.log2(1.0 + rho0 * g * (1.0 + 2.0 * a1 * math.cos(w))),
        -math.pi, math.pi, limit=200)
    ref /= 2 * math.pi
    np.testing.assert_allclose(i_esd(complex(math.sqrt(g)), a1, rho0), ref,
                               rtol=0, atol=1e-11)


def test_i_esd_domain():
    with pytest.raises(ConfigError):
        i_esd(1 + 0j, 0.5, 1.0)


def test_i_esd_bounds_sandwich():
    for g, a1 in ((0.5, 0.1), (2.0, -0.45), (10.0, 0.3)):
        a = complex(math.sqrt(g))
        lo, hi = i_esd_bounds(a, 2.0)
        v = i_esd(a, a1, 2.0)
        assert lo < v <= hi + 1e-15


def test_i_emaca_matches_brute_quadrature():
    corr = correlations(srrc(0.5, 2, 64), 0.3)
    rho0, g1, g2 = 5.0, 1.3, 0.6

    def integrand(w):
        t11, t12 = spectral_entries(corr, np.array([w]))
        t11 = float(t11[0])
        det = (1.0 + rho0 * (g1 + g2) * t11
               + rho0 * rho0 * g1 * g2 * (t11 * t11 - abs(t12[0]) ** 2))
        return math.log2(det)

    ref, _ = integrate.quad(integrand, -math.pi, math.pi, limit=400)
    ref /= 2 * math.pi
    f = FadingRealization(0j, 0j, 0j, complex(math.sqrt(g1)), complex(math.sqrt(g2)))
    got = i_emaca_spectral(f, corr, rho0, quad_points=2048).value
    np.testing.assert_allclose(got, ref, rtol=0, atol=1e-10)


def test_i_emaca_phase_invariant():
    corr = correlations(srrc(0.5, 1, 64), 0.5)
    f1 = FadingRealization(0j, 0j, 0j, 1.2 + 0j, 0.7 + 0j)
    f2 = FadingRealization(0j, 0j, 0j, 1.2 * cmath.exp(0.9j), 0.7 * cmath.exp(-2.1j))
    a = i_emaca_spectral(f1, corr, 4.0).value
    b = i_emaca_spectral(f2, corr, 4.0).value
    np.testing.assert_allclose(a, b, rtol=1e-13)


def test_i_emaca_non_pd_warns():
    corr = correlations(rectangular(1, 64), 0.5)
    b = i_emaca_spectral(UNIT, corr, 1.0)
    assert b.warnings
    assert b.lower <= b.value <= b.upper + 1e-12


# ---------------------------------------------------------------------------
# asynchronous space-time coding and the mixing protocol


def test_i_astc_case_structure():
    corr = correlations(srrc(0.5, 1, 64), 0.5)
    rho0 = 4.0
    f = FadingRealization(0.9 + 0.1j, 0j, 0j, 1.1 - 0.4j, 0.3 + 0.6j)
    own = i_esd(f.sd, corr.a1, rho0)
    np.testing.assert_allclose(i_astc(f, D_NONE, corr, rho0), 0.5 * own, rtol=1e-14)
    np.testing.assert_allclose(
        i_astc(f, D_R2, corr, rho0),
        0.5 * (own + i_esd(f.r2d, corr.a1, rho0)), rtol=1e-14)
    both = i_astc(f, D_BOTH, corr, rho0)
    pair = i_emaca_spectral(f, corr, rho0).value
    np.testing.assert_allclose(both, 0.5 * (own + pair), rtol=1e-14)


def test_scheme_mi_requirements():
    with pytest.raises(ConfigError):
        scheme_mi(SchemeId.TDA_INDEP, UNIT, D_BOTH, 1.0)
    with pytest.raises(ConfigError):
        scheme_mi(SchemeId.ASTC, UNIT, D_BOTH, 1.0)
    with pytest.raises(ConfigError):
        scheme_mi(SchemeId.MIX_AF, UNIT, D_BOTH, 1.0)


def test_mix_af_branches():
    corr = correlations(srrc(0.5, 1, 64), 0.5)
    rho0 = 2.0
    f = FadingRealization(1.0 + 0j, 0j, 0j, 0.8 + 0.1j, 1.4 - 0.2j)
    gsd, g1, g2 = f.gain2("sd"), f.gain2("r1d"), f.gain2("r2d")
    v0 = scheme_mi(SchemeId.MIX_AF, f, D_NONE, rho0, corr=corr)
    np.testing.assert_allclose(v0, 0.5 * i_af_pair(gsd, g1, rho0), rtol=1e-14)
    # one decoding relay: amplified pair plus the decoded stream, index-bound
    v1 = scheme_mi(SchemeId.MIX_AF, f, D_R2, rho0, corr=corr)
    np.testing.assert_allclose(
        v1, 0.5 * (i_af_pair(gsd, g1, rho0) + math.log2(1 + rho0 * g2)), rtol=1e-14)
    v2 = scheme_mi(SchemeId.MIX_AF, f, D_BOTH, rho0, corr=corr)
    np.testing.assert_allclose(v2, i_astc(f, D_BOTH, corr, rho0), rtol=1e-14)


def test_mixing_protocol_labels():
    corr = correlations(srrc(0.5, 1, 64), 0.5)
    pt = RatePoint(15.0, 0.25, 1.0)
    g_star = (4.0 ** pt.rate - 1.0) / pt.rho0
    hi = complex(math.sqrt(4 * g_star))
    lo = complex(math.sqrt(g_star / 4))
    cases = [
        (FadingRealization(1 + 0j, lo, lo, 1 + 0j, 1 + 0j), "d0-af-fallback"),
        (FadingRealization(1 + 0j, hi, lo, 1 + 0j, 1 + 0j), "d1-mixed"),
        (FadingRealization(1 + 0j, hi, hi, 1 + 0j, 1 + 0j), "d2-astc"),
    ]
    for f, want in cases:
        label, value = mixing_protocol_mi(f, pt, corr)
        assert label == want
        assert value > 0.0


# ---------------------------------------------------------------------------
# property checks on the bound sandwiches


@settings(max_examples=80, derandomize=True, deadline=None)
@given(g1=gain, g2=gain, gsd=gain, p1=phase, p2=phase, rho0=rho,
       t0bw=st.floats(min_value=1.0, max_value=6.0))
def test_tda_bounds_sandwich(g1, g2, gsd, p1, p2, rho0, t0bw):
    f = FadingRealization(complex(math.sqrt(gsd)), 0j, 0j,
                          cmath.rect(math.sqrt(g1), p1),
                          cmath.rect(math.sqrt(g2), p2))
    delays = DelayConfig.from_t0bw(t0bw)
    for fn in (i_tda, i_rtda):
        b = fn(f, D_BOTH, delays, rho0)
        assert b.lower <= b.value + 1e-9
        assert b.value <= b.upper + 1e-9


@settings(max_examples=80, derandomize=True, deadline=None)
@given(g1=gain, g2=gain, gsd=gain, p1=phase, p2=phase, rho0=rho)
def test_ltda_bounds_sandwich(g1, g2, gsd, p1, p2, rho0):
    corr = correlations(rectangular(1, 64), 0.5)
    f = FadingRealization(complex(math.sqrt(gsd)), 0j, 0j,
                          cmath.rect(math.sqrt(g1), p1),
                          cmath.rect(math.sqrt(g2), p2))
    b = i_ltda(f, D_BOTH, corr, rho0)
    assert b.lower <= b.value + 1e-9
    assert b.value <= b.upper + 1e-9
