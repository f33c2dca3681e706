"""Conditional mutual information of the relaying schemes, in bits/s/Hz.

Every evaluator conditions on the decoding set d (which relays got the
source message in phase one) and on one fading realization.  rho0 is the
normalized per-node snr.  All logarithms are base 2.

Evaluators that average over a frequency or delay-phase variable return an
MiBounds carrying per-realization analytic envelopes along with the value;
closed-form evaluators return plain floats.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass

import numpy as np

from ._quad import gl_panels
from .channel import DecodingSet, FadingRealization
from .errors import ConfigError
from .waveform import CorrelationSet, EigenBounds, certify_pd, spectral_entries

_LN2 = math.log(2.0)
_CHUNK = 2048  # rows per slice when batching (keeps node matrices ~10 MB)


def _log2_1p(x: float) -> float:
    return math.log1p(x) / _LN2


class SchemeId(str, enum.Enum):
    """Two-phase relaying schemes the lab can evaluate or simulate."""

    STC_SYNC = "STC_SYNC"            # symbol-synchronous space-time code
    TDA_INDEP = "TDA_INDEP"          # delayed relays, independent codebooks
    TDA_REPETITION = "TDA_REPETITION"  # delayed relays repeating the source codeword
    TDA_LINMOD = "TDA_LINMOD"        # delayed overlapping pulses, matched-filter front end
    ASTC = "ASTC"                    # space-time code under symbol-level asynchrony
    MIX_AF = "MIX_AF"                # decode-forward with amplify-forward fallback


@dataclass(frozen=True)
class MiBounds:
    """Mutual information value with its per-realization analytic envelope."""

    value: float
    lower: float
    upper: float
    warnings: tuple[str, ...] = ()


@dataclass(frozen=True)
class DelayConfig:
    """Relay arrival offsets at the destination plus the receiver bandwidth.

    Only the relative delay t0 = |tau2 - tau1| enters the rate expressions;
    the product t0 * bandwidth controls how much of a frequency period the
    receiver averages over (and is all the delay evaluators look at).
    """

    tau1: float
    tau2: float
    bandwidth: float

    def __post_init__(self):
        for name in ("tau1", "tau2"):
            v = getattr(self, name)
            if not (isinstance(v, (int, float)) and math.isfinite(v) and v >= 0):
                raise ConfigError(f"{name} must be a finite nonnegative number, got {v!r}")
        if not (isinstance(self.bandwidth, (int, float)) and self.bandwidth > 0
                and math.isfinite(self.bandwidth)):
            raise ConfigError(f"bandwidth must be positive and finite, got {self.bandwidth!r}")

    @classmethod
    def from_t0bw(cls, t0bw: float) -> "DelayConfig":
        """Convenience constructor pinning the delay-bandwidth product."""
        if t0bw < 0:
            raise ConfigError("t0 * bandwidth cannot be negative")
        return cls(0.0, float(t0bw), 1.0)

    @property
    def t0(self) -> float:
        return abs(self.tau2 - self.tau1)

    @property
    def t0bw(self) -> float:
        return self.t0 * self.bandwidth

    @property
    def delta1(self) -> float:
        """floor(t0*bw)/ceil(t0*bw), the whole-period fraction of the average."""
        w = self.t0bw
        n = round(w)
        if abs(w - n) < 1e-9:  # snap near-integers so floor/ceil agree
            return 0.0 if n == 0 else 1.0
        return math.floor(w) / math.ceil(w)


def i_stc(f: FadingRealization, d: DecodingSet, rho0: float) -> float:
    """Synchronous scheme: direct term plus the summed decoding-relay gains.

    I = 0.5*log2(1 + rho0 |a_sd|^2) + 0.5*log2(1 + rho0 * sum_{k in d} |a_rkd|^2)
    """
    relay = 0.0
    if d.r1:
        relay += f.gain2("r1d")
    if d.r2:
        relay += f.gain2("r2d")
    return 0.5 * _log2_1p(rho0 * f.gain2("sd")) + 0.5 * _log2_1p(rho0 * relay)


def closed_log_integral(a: float, b: float) -> float:
    """Full-period average of log2(1 + a sin x + b cos x).

    Equals log2((1 + sqrt(1 - a^2 - b^2)) / 2) whenever a^2 + b^2 < 1.
    """
    s2 = a * a + b * b
    if not s2 < 1.0:
        raise ConfigError(f"closed form needs a^2 + b^2 < 1, got {s2}")
    return math.log2(0.5 * (1.0 + math.sqrt(1.0 - s2)))


def _mean_log2_cos(A, B, psi, half_width: float, quad_points: int):
    """Mean of log2(A + B cos(u + psi)) over u in [-half_width, half_width].

    A, B, psi may be scalars or equal-length arrays; requires A > |B|.
    Composite Gauss-Legendre with panels no wider than one half-period.
    """
    u, wts = gl_panels(-half_width, half_width, max(int(quad_points), 64),
                       max_panel=math.pi)
    A = np.atleast_1d(np.asarray(A, dtype=float))
    B = np.atleast_1d(np.asarray(B, dtype=float))
    psi = np.atleast_1d(np.asarray(psi, dtype=float))
    n = max(A.size, B.size, psi.size)
    A, B, psi = np.broadcast_to(A, (n,)), np.broadcast_to(B, (n,)), np.broadcast_to(psi, (n,))
    out = np.empty(n)
    for i in range(0, n, _CHUNK):
        sl = slice(i, min(i + _CHUNK, n))
        vals = np.log2(A[sl, None] + B[sl, None] * np.cos(u[None, :] + psi[sl, None]))
        out[sl] = vals @ wts
    return out / (2.0 * half_width)


def _relay_pair(f: FadingRealization):
    g1 = f.gain2("r1d")
    g2 = f.gain2("r2d")
    psi = cmath.phase(f.r2d) - cmath.phase(f.r1d)
    return g1, g2, psi


def i_tda(f: FadingRealization, d: DecodingSet, delays: DelayConfig, rho0: float,
          quad_points: int = 512) -> MiBounds:
    """Delay diversity with an independent codebook per relay.

    With both relays on, the destination resolves the pair over frequency:

        I = 0.5*log2(1 + rho0 |a_sd|^2)
          + (1 / (4 pi W)) * integral_{-pi W}^{pi W} log2(1 + rho0 |a1 + a2 e^{ju}|^2) du

    with W = t0 * bandwidth.  Bounds: coherent-combining upper
    0.5*log2(1 + 2 rho0 (g1+g2)); whole-period lower scaled by
    delta1 = floor(W)/ceil(W) (degenerate at W < 1).  With zero or one relay
    the scheme reduces to the synchronous evaluator exactly.
    """
    direct = 0.5 * _log2_1p(rho0 * f.gain2("sd"))
    if d.size <= 1:
        v = i_stc(f, d, rho0)
        return MiBounds(v, v, v)
    g1, g2, psi = _relay_pair(f)
    nu = g1 + g2
    if delays.t0bw == 0.0 or delays.t0 == 0.0:
        v = direct + 0.5 * _log2_1p(rho0 * abs(f.r1d + f.r2d) ** 2)
        return MiBounds(v, min(0.0, v), 0.5 * _log2_1p(2.0 * rho0 * nu) + direct,
                        warnings=("zero relative delay: relays collapse to one effective gain",))
    w = delays.t0bw
    warns = ()
    if w < 1.0:
        warns = ("t0*bandwidth < 1: whole-period lower bound degenerates to 0",)
    mean = _mean_log2_cos(1.0 + rho0 * nu, 2.0 * rho0 * math.sqrt(g1 * g2), psi,
                          math.pi * w, quad_points)
    value = direct + 0.5 * float(mean[0])
    upper = direct + 0.5 * _log2_1p(2.0 * rho0 * nu)
    lower = 0.5 * delays.delta1 * (math.log2(0.5 * (1.0 + rho0 * nu))
                                   + _log2_1p(rho0 * f.gain2("sd")))
    return MiBounds(value, lower, upper, warns)


def tda_integer_period_value(f: FadingRealization, delays: DelayConfig,
                             rho0: float) -> float:
    """Closed form of the both-relays delay-diversity rate at integer t0*bw.

    Whole-period averaging admits log2((A + sqrt(A^2 - B^2))/2) with
    A = 1 + rho0 (g1+g2), B = 2 rho0 sqrt(g1 g2).
    """
    w = delays.t0bw
    if abs(w - round(w)) > 1e-9 or round(w) == 0:
        raise ConfigError("closed form requires a positive integer t0*bandwidth")
    g1, g2, _ = _relay_pair(f)
    A = 1.0 + rho0 * (g1 + g2)
    B = 2.0 * rho0 * math.sqrt(g1 * g2)
    relay = math.log2(0.5 * (A + math.sqrt(max(A * A - B * B, 0.0))))
    return 0.5 * _log2_1p(rho0 * f.gain2("sd")) + 0.5 * relay


def i_rtda(f: FadingRealization, d: DecodingSet, delays: DelayConfig, rho0: float,
           quad_points: int = 512) -> MiBounds:
    """Delay diversity where relays repeat the source codeword.

    Repetition makes the direct and relayed observations one joint codeword:

        |d| = 0: 0.5*log2(1 + rho0 |a_sd|^2)
        |d| = 1: 0.5*log2(1 + rho0 (|a_sd|^2 + |a_rjd|^2))
        |d| = 2: (1/(4 pi W)) integral log2(1 + rho0 |a_sd|^2
                                              + rho0 |a1 + a2 e^{ju}|^2) du
    """
    gd = f.gain2("sd")
    if d.size == 0:
        v = 0.5 * _log2_1p(rho0 * gd)
        return MiBounds(v, v, v)
    if d.size == 1:
        lone = f.gain2("r1d") if d.r1 else f.gain2("r2d")
        v = 0.5 * _log2_1p(rho0 * (gd + lone))
        return MiBounds(v, v, v)
    g1, g2, psi = _relay_pair(f)
    nu = g1 + g2
    if delays.t0bw == 0.0 or delays.t0 == 0.0:
        v = 0.5 * _log2_1p(rho0 * (gd + abs(f.r1d + f.r2d) ** 2))
        return MiBounds(v, min(0.0, v), 0.5 * _log2_1p(rho0 * (gd + 2.0 * nu)),
                        warnings=("zero relative delay: relays collapse to one effective gain",))
    w = delays.t0bw
    warns = ()
    if w < 1.0:
        warns = ("t0*bandwidth < 1: whole-period lower bound degenerates to 0",)
    mean = _mean_log2_cos(1.0 + rho0 * (gd + nu), 2.0 * rho0 * math.sqrt(g1 * g2), psi,
                          math.pi * w, quad_points)
    value = 0.5 * float(mean[0])
    upper = 0.5 * _log2_1p(rho0 * (gd + 2.0 * nu))
    lower = 0.5 * delays.delta1 * math.log2(0.5 * (1.0 + rho0 * (gd + nu)))
    return MiBounds(value, lower, upper, warns)


def rtda_integer_period_value(f: FadingRealization, delays: DelayConfig,
                              rho0: float) -> float:
    """Closed form of the both-relays repetition rate at integer t0*bw."""
    w = delays.t0bw
    if abs(w - round(w)) > 1e-9 or round(w) == 0:
        raise ConfigError("closed form requires a positive integer t0*bandwidth")
    g1, g2, _ = _relay_pair(f)
    A = 1.0 + rho0 * (f.gain2("sd") + g1 + g2)
    B = 2.0 * rho0 * math.sqrt(g1 * g2)
    return 0.5 * math.log2(0.5 * (A + math.sqrt(max(A * A - B * B, 0.0))))


def i_ltda(f: FadingRealization, d: DecodingSet, corr: CorrelationSet,
           rho0: float) -> MiBounds:
    """Delay diversity with overlapping linearly modulated pulses.

    The destination matched-filters both relay pulse trains; the resulting
    still-synchronous pair channel has the closed form

        I2 = log2(1 + a + sqrt((1+a)^2 - b^2)) - 1
        a  = rho0 (r1^2 + r2^2 + 2 rho12 r1 r2 cos(th1 - th2))
        b  = 2 rho0 rho21 r1 r2

    where rho12, rho21 are the one-period pulse overlaps at delay tau.
    Cauchy-Schwarz gives |rho12| + |rho21| <= 1, which forces a >= |b| and
    keeps the sqrt argument nonnegative.
    """
    if corr.span != 1:
        raise ConfigError("matched-filter evaluator needs a single-period pulse")
    rho12 = corr.rho12
    rho21 = corr.rho21
    if abs(rho12) >= 1.0:
        raise ConfigError(f"|rho12| must be < 1, got {rho12}")
    if d.size <= 1:
        v = i_stc(f, d, rho0)
        return MiBounds(v, v, v)
    r1 = abs(f.r1d)
    r2 = abs(f.r2d)
    cth = math.cos(cmath.phase(f.r1d) - cmath.phase(f.r2d))
    a = rho0 * (r1 * r1 + r2 * r2 + 2.0 * rho12 * r1 * r2 * cth)
    b = 2.0 * rho0 * rho21 * r1 * r2
    i2 = math.log2(1.0 + a + math.sqrt(max((1.0 + a) ** 2 - b * b, 0.0))) - 1.0
    direct = 0.5 * _log2_1p(rho0 * f.gain2("sd"))
    return MiBounds(direct + 0.5 * i2,
                    direct + 0.5 * (_log2_1p(a) - 1.0),
                    direct + 0.5 * _log2_1p(a))


def _esd_from_gain(g, a1: float, rho0: float):
    """Vector form of the single-stream ISI rate; g is rho0-free squared gain."""
    s = np.asarray(g, dtype=float) * rho0
    x = 2.0 * a1 * s / (1.0 + s)
    return np.log2(1.0 + s) + np.log2(1.0 + np.sqrt(np.maximum(1.0 - x * x, 0.0))) - 1.0


def i_esd(alpha_sd: complex, a1: float, rho0: float) -> float:
    """Single transmitter with adjacent-symbol correlation a1, |a1| < 1/2.

    Frequency-averaging log2(1 + rho0 g (1 + 2 a1 cos w)) gives the closed
    form log2(1 + rho0 g) + log2(1 + sqrt(1 - x^2)) - 1 with
    x = 2 a1 rho0 g / (1 + rho0 g).
    """
    if not abs(a1) < 0.5:
        raise ConfigError(f"|a1| must be < 1/2, got {a1}")
    return float(_esd_from_gain(abs(alpha_sd) ** 2, a1, rho0)[()])


def i_esd_bounds(alpha_sd: complex, rho0: float) -> tuple[float, float]:
    """Envelope of i_esd over all admissible a1: (log2(1+g) - 1, log2(1+g)]."""
    g = rho0 * abs(alpha_sd) ** 2
    return _log2_1p(g) - 1.0, _log2_1p(g)


def _emaca_batch(g1, g2, corr: CorrelationSet, rho0: float, quad_points: int):
    """Frequency-averaged two-stream rate for arrays of squared gains."""
    u, wts = gl_panels(-math.pi, math.pi, max(int(quad_points), 512),
                       max_panel=0.5 * math.pi)
    t11, t12 = spectral_entries(corr, u)
    sprod = np.maximum(t11 * t11 - np.abs(t12) ** 2, 0.0)  # psd: clip roundoff only
    g1 = np.atleast_1d(np.asarray(g1, dtype=float))
    g2 = np.atleast_1d(np.asarray(g2, dtype=float))
    out = np.empty(g1.size)
    wn = wts / (2.0 * math.pi)
    for i in range(0, g1.size, _CHUNK):
        sl = slice(i, min(i + _CHUNK, g1.size))
        arg = (1.0
               + rho0 * (g1[sl, None] + g2[sl, None]) * t11[None, :]
               + (rho0 * rho0) * (g1[sl, None] * g2[sl, None]) * sprod[None, :])
        out[sl] = np.log2(np.maximum(arg, np.finfo(float).tiny)) @ wn
    return out


def i_emaca_spectral(f: FadingRealization, corr: CorrelationSet, rho0: float,
                     quad_points: int = 512,
                     eig: EigenBounds | None = None) -> MiBounds:
    """Both relays transmitting through the ISI coupling, spectral-domain rate.

    value = (1/2pi) integral log2 det(I + rho0 diag(g1, g2) T(w)) dw where
    T(w) is the normalized 2x2 spectral density of the stacked pulse trains.
    Bounds replace T(w) by certified scalar multiples of the identity:
    sum_k log2(1 + rho0 g_k lambda) at the certified min/max eigenvalue.
    """
    g1 = f.gain2("r1d")
    g2 = f.gain2("r2d")
    value = float(_emaca_batch(g1, g2, corr, rho0, quad_points)[0])
    if eig is None:
        eig = certify_pd(corr)
    lower = _log2_1p(rho0 * g1 * eig.certified_min) + _log2_1p(rho0 * g2 * eig.certified_min)
    upper = _log2_1p(rho0 * g1 * eig.certified_max) + _log2_1p(rho0 * g2 * eig.certified_max)
    warns = ()
    if not eig.pd:
        warns = ("spectral density not certified positive definite; lower bound is slack",)
    return MiBounds(value, lower, upper, warns)


def i_astc(f: FadingRealization, d: DecodingSet, corr: CorrelationSet, rho0: float,
           quad_points: int = 512) -> float:
    """Space-time coding under symbol-level asynchrony (ISI-aware decoding).

    Phase two sees the decoding relays as an ISI-coupled multiaccess channel;
    phase one always carries the source's own ISI-shaped stream.
    """
    own = i_esd(f.sd, corr.a1, rho0)
    if d.size == 0:
        return 0.5 * own
    if d.size == 1:
        lone = f.r1d if d.r1 else f.r2d
        return 0.5 * (own + i_esd(lone, corr.a1, rho0))
    return 0.5 * (own + i_emaca_spectral(f, corr, rho0, quad_points).value)


def i_af_pair(g1: float, g2: float, rho0: float) -> float:
    """Coherent-sum rate of one forwarded path pair: log2(1 + rho0 (g1 + g2))."""
    return _log2_1p(rho0 * (g1 + g2))


def scheme_mi(scheme: SchemeId, f: FadingRealization, d: DecodingSet, rho0: float,
              corr: CorrelationSet | None = None,
              delays: DelayConfig | None = None,
              quad_points: int = 512) -> float:
    """Dispatch one scheme's conditional mutual information (value only)."""
    scheme = SchemeId(scheme)
    if scheme == SchemeId.STC_SYNC:
        return i_stc(f, d, rho0)
    if scheme in (SchemeId.TDA_INDEP, SchemeId.TDA_REPETITION):
        if delays is None:
            raise ConfigError(f"{scheme.value} needs a DelayConfig")
        fn = i_tda if scheme == SchemeId.TDA_INDEP else i_rtda
        return fn(f, d, delays, rho0, quad_points).value
    if scheme == SchemeId.TDA_LINMOD:
        if corr is None:
            raise ConfigError("TDA_LINMOD needs a CorrelationSet")
        return i_ltda(f, d, corr, rho0).value
    if scheme == SchemeId.ASTC:
        if corr is None:
            raise ConfigError("ASTC needs a CorrelationSet")
        return i_astc(f, d, corr, rho0, quad_points)
    if scheme == SchemeId.MIX_AF:
        if corr is None:
            raise ConfigError("MIX_AF needs a CorrelationSet (for the both-relays branch)")
        gsd = f.gain2("sd")
        if d.size == 0:
            # amplify-forward stand-in path bound to relay 1 by index
            return 0.5 * i_af_pair(gsd, f.gain2("r1d"), rho0)
        if d.size == 1:
            return 0.5 * (i_af_pair(gsd, f.gain2("r1d"), rho0)
                          + _log2_1p(rho0 * f.gain2("r2d")))
        return i_astc(f, d, corr, rho0, quad_points)
    raise ConfigError(f"unknown scheme {scheme!r}")
