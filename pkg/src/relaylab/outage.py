"""Outage probabilities: Monte Carlo engine, semi-analytic oracles, slope fits.

An outage event at operating point (snr, r) is {I < R} with
R = r log2(1 + snr sigma2_sd).  Per-case curves report the JOINT probability
Pr[I < R, |D| = j] by default (those carry the per-row diversity slopes and
sum to the overall outage); conditional probabilities are available either
analytically or by forcing the decoding set in the simulator.

Monte Carlo determinism: trials are grouped into fixed blocks of 32768 and
the Philox counter of each block is derived from its first trial index, so
the draws for trial t depend only on (seed, t).  Workers split whole blocks
and results merge by summation; worker count can never change the numbers.
"""

from __future__ import annotations

import concurrent.futures
import csv
import enum
import io
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import mutualinfo as mi
from ._quad import gl_nodes
from .channel import (D_BOTH, D_NONE, D_R1, D_R2, LINKS, NetworkConfig,
                      RatePoint, decoding_set_probs)
from .errors import ConfigError, NumericError
from .mutualinfo import DelayConfig, SchemeId, scheme_mi
from .waveform import CorrelationSet

BLOCK_TRIALS = 32768
_COUNTER_STRIDE = 64  # Philox counter words reserved per trial (>= draws used)
_LN2 = math.log(2.0)


class ConditionalCase(str, enum.Enum):
    OVERALL = "overall"
    D0 = "d0"
    D1 = "d1"
    D2 = "d2"

    @property
    def size(self) -> int | None:
        return {"overall": None, "d0": 0, "d1": 1, "d2": 2}[self.value]


@dataclass(frozen=True)
class OutageCurve:
    """One outage-vs-snr curve with confidence intervals.

    conditioned distinguishes Pr[I < R | case] (decoding set forced) from the
    default joint Pr[I < R, case].  trials == 0 marks analytic curves, whose
    intervals collapse onto the value.
    """

    scheme: str
    r: float
    cond: ConditionalCase
    conditioned: bool
    snr: tuple[float, ...]
    outage: tuple[float, ...]
    ci_low: tuple[float, ...]
    ci_high: tuple[float, ...]
    trials: int
    censored: tuple[bool, ...]

    @property
    def snr_db(self) -> tuple[float, ...]:
        return tuple(10.0 * math.log10(s) for s in self.snr)


def wilson_interval(k: int, n: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval; zero counts get the rule-of-three [0, 3/n]."""
    if n <= 0:
        raise ConfigError("n must be positive")
    if k == 0:
        return 0.0, 3.0 / n
    ph = k / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (ph + z2 / (2.0 * n)) / denom
    half = z * math.sqrt(ph * (1.0 - ph) / n + z2 / (4.0 * n * n)) / denom
    return max(center - half, 0.0), min(center + half, 1.0)


# ---------------------------------------------------------------------------
# Monte Carlo engine


@dataclass(frozen=True)
class _McTask:
    scheme: SchemeId
    cfg: NetworkConfig
    r: float
    snr: tuple[float, ...]
    seed: int
    cond: ConditionalCase
    force_set: bool
    corr: CorrelationSet | None
    delays: DelayConfig | None
    quad_points: int
    first_trial: int
    count: int


def _draw_gains(cfg: NetworkConfig, seed: int, first_trial: int, count: int):
    """Complex link gains for trials [first_trial, first_trial+count).

    The Philox counter is pinned to the first trial index times a stride
    comfortably above the words one trial consumes, so draws depend only on
    (seed, trial index).
    """
    key = np.random.SeedSequence(int(seed)).generate_state(2, np.uint64)
    bitgen = np.random.Philox(key=key, counter=int(first_trial) * _COUNTER_STRIDE)
    rng = np.random.Generator(bitgen)
    z = rng.standard_normal((count, 2 * len(LINKS)))
    out = {}
    for i, link in enumerate(LINKS):
        scale = math.sqrt(0.5 * getattr(cfg, "sigma2_" + link))
        out[link] = (z[:, 2 * i] + 1j * z[:, 2 * i + 1]) * scale
    return out


def _mi_block(task: _McTask, gains, m1, m2, rho0: float) -> np.ndarray:
    """Vectorized conditional MI for one block, given relay memberships."""
    gsd = np.abs(gains["sd"]) ** 2
    g1 = np.abs(gains["r1d"]) ** 2
    g2 = np.abs(gains["r2d"]) ** 2
    n = gsd.size
    scheme = task.scheme
    qp = task.quad_points

    if scheme == SchemeId.STC_SYNC:
        relay = np.where(m1, g1, 0.0) + np.where(m2, g2, 0.0)
        return 0.5 * np.log2(1.0 + rho0 * gsd) + 0.5 * np.log2(1.0 + rho0 * relay)

    both = m1 & m2
    out = np.empty(n)

    if scheme in (SchemeId.TDA_INDEP, SchemeId.TDA_REPETITION):
        rep = scheme == SchemeId.TDA_REPETITION
        relay_one = np.where(m1, g1, 0.0) + np.where(m2, g2, 0.0)  # zero or one member
        if rep:
            out[:] = 0.5 * np.log2(1.0 + rho0 * (gsd + relay_one))
        else:
            out[:] = 0.5 * np.log2(1.0 + rho0 * gsd) + 0.5 * np.log2(1.0 + rho0 * relay_one)
        if np.any(both):
            b = np.nonzero(both)[0]
            nu = g1[b] + g2[b]
            bc = 2.0 * rho0 * np.sqrt(g1[b] * g2[b])
            psi = np.angle(gains["r2d"][b]) - np.angle(gains["r1d"][b])
            w = task.delays.t0bw
            if w == 0.0:
                eff = np.abs(gains["r1d"][b] + gains["r2d"][b]) ** 2
                if rep:
                    out[b] = 0.5 * np.log2(1.0 + rho0 * (gsd[b] + eff))
                else:
                    out[b] = 0.5 * np.log2(1.0 + rho0 * gsd[b]) + 0.5 * np.log2(1.0 + rho0 * eff)
            else:
                base = 1.0 + rho0 * ((gsd[b] + nu) if rep else nu)
                mean = mi._mean_log2_cos(base, bc, psi, math.pi * w, qp)
                if rep:
                    out[b] = 0.5 * mean
                else:
                    out[b] = 0.5 * np.log2(1.0 + rho0 * gsd[b]) + 0.5 * mean
        return out

    if scheme == SchemeId.TDA_LINMOD:
        relay_one = np.where(m1, g1, 0.0) + np.where(m2, g2, 0.0)
        out[:] = 0.5 * np.log2(1.0 + rho0 * gsd) + 0.5 * np.log2(1.0 + rho0 * relay_one)
        if np.any(both):
            b = np.nonzero(both)[0]
            r1 = np.abs(gains["r1d"][b])
            r2 = np.abs(gains["r2d"][b])
            cth = np.cos(np.angle(gains["r1d"][b]) - np.angle(gains["r2d"][b]))
            a = rho0 * (r1 * r1 + r2 * r2 + 2.0 * task.corr.rho12 * r1 * r2 * cth)
            bb = 2.0 * rho0 * task.corr.rho21 * r1 * r2
            i2 = np.log2(1.0 + a + np.sqrt(np.maximum((1.0 + a) ** 2 - bb * bb, 0.0))) - 1.0
            out[b] = 0.5 * np.log2(1.0 + rho0 * gsd[b]) + 0.5 * i2
        return out

    if scheme in (SchemeId.ASTC, SchemeId.MIX_AF):
        a1 = task.corr.a1
        own = mi._esd_from_gain(gsd, a1, rho0)
        if scheme == SchemeId.ASTC:
            out[:] = 0.5 * own
            one1 = m1 & ~m2
            one2 = m2 & ~m1
            if np.any(one1):
                out[one1] += 0.5 * mi._esd_from_gain(g1[one1], a1, rho0)
            if np.any(one2):
                out[one2] += 0.5 * mi._esd_from_gain(g2[one2], a1, rho0)
        else:
            af = np.log2(1.0 + rho0 * (gsd + g1))
            out[:] = 0.5 * af
            one = m1 ^ m2
            if np.any(one):
                out[one] = 0.5 * (af[one] + np.log2(1.0 + rho0 * g2[one]))
        if np.any(both):
            b = np.nonzero(both)[0]
            maca = mi._emaca_batch(g1[b], g2[b], task.corr, rho0, task.quad_points)
            out[b] = 0.5 * (own[b] + maca)
        return out

    raise ConfigError(f"scheme {scheme!r} has no Monte Carlo path")


def _run_block(task: _McTask) -> np.ndarray:
    """Outage-and-case counts for one trial block at every grid snr."""
    gains = _draw_gains(task.cfg, task.seed, task.first_trial, task.count)
    gsr1 = np.abs(gains["sr1"]) ** 2
    gsr2 = np.abs(gains["sr2"]) ** 2
    counts = np.zeros(len(task.snr), dtype=np.int64)
    want = task.cond.size
    for i, snr in enumerate(task.snr):
        pt = RatePoint(snr, task.r, task.cfg.sigma2_sd)
        rho0 = pt.rho0
        rate = pt.rate
        if task.force_set:
            m1 = np.full(task.count, want >= 1)
            m2 = np.full(task.count, want >= 2)
            case = np.ones(task.count, dtype=bool)
        else:
            thr = (4.0 ** rate - 1.0) / rho0
            m1 = gsr1 >= thr
            m2 = gsr2 >= thr
            if want is None:
                case = np.ones(task.count, dtype=bool)
            else:
                sizes = m1.astype(np.int8) + m2.astype(np.int8)
                case = sizes == want
        vals = _mi_block(task, gains, m1, m2, rho0)
        counts[i] = int(np.count_nonzero((vals < rate) & case))
    return counts


def _scheme_requirements(scheme: SchemeId, corr, delays):
    if scheme in (SchemeId.TDA_INDEP, SchemeId.TDA_REPETITION) and delays is None:
        raise ConfigError(f"{scheme.value} needs delays (DelayConfig)")
    if scheme == SchemeId.TDA_LINMOD:
        if corr is None or corr.span != 1:
            raise ConfigError("TDA_LINMOD needs a span-1 CorrelationSet")
    if scheme in (SchemeId.ASTC, SchemeId.MIX_AF) and corr is None:
        raise ConfigError(f"{scheme.value} needs a CorrelationSet")


def mc_outage(scheme, r: float, snr_grid, trials: int, seed: int,
              cond: ConditionalCase = ConditionalCase.OVERALL, *,
              cfg: NetworkConfig | None = None,
              corr: CorrelationSet | None = None,
              delays: DelayConfig | None = None,
              force_set: bool = False,
              workers: int = 1,
              quad_points: int = 512) -> OutageCurve:
    """Monte Carlo outage curve over an increasing grid of linear snr values.

    force_set=True conditions on the decoding set (the case is imposed on
    every trial instead of derived from the source-relay links), matching the
    conditional analytic oracles.  Otherwise per-case curves are joint
    probabilities.  Results are exactly reproducible from (seed, trials) and
    independent of the worker count.
    """
    scheme = SchemeId(scheme)
    cond = ConditionalCase(cond)
    cfg = cfg or NetworkConfig()
    if trials < 10 ** 4:
        raise ConfigError(f"trials must be >= 10^4, got {trials}")
    snr = tuple(float(s) for s in np.atleast_1d(np.asarray(snr_grid, dtype=float)))
    if len(snr) == 0 or any(s <= 0 for s in snr):
        raise ConfigError("snr grid must be positive")
    if any(b <= a for a, b in zip(snr, snr[1:])):
        raise ConfigError("snr grid must be strictly increasing")
    if force_set and cond == ConditionalCase.OVERALL:
        raise ConfigError("force_set requires a specific decoding-set case")
    if workers < 1:
        raise ConfigError("workers must be >= 1")
    _scheme_requirements(scheme, corr, delays)

    tasks = []
    first = 0
    while first < trials:
        count = min(BLOCK_TRIALS, trials - first)
        tasks.append(_McTask(scheme, cfg, float(r), snr, int(seed), cond,
                             bool(force_set), corr, delays, int(quad_points),
                             first, count))
        first += count

    if workers == 1 or len(tasks) == 1:
        parts = [_run_block(t) for t in tasks]
    else:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(_run_block, tasks, chunksize=1))
    counts = np.sum(parts, axis=0)

    outage, lo, hi, cens = [], [], [], []
    for k in counts:
        outage.append(int(k) / trials)
        a, b = wilson_interval(int(k), trials)
        lo.append(a)
        hi.append(b)
        cens.append(bool(k == 0))
    return OutageCurve(scheme.value, float(r), cond, bool(force_set), snr,
                       tuple(outage), tuple(lo), tuple(hi), int(trials), tuple(cens))


# ---------------------------------------------------------------------------
# Semi-analytic oracles


def two_exp_pdf(y, lam1: float, lam2: float):
    """Density of the sum of two independent exponentials.

    lam1 lam2 / (lam1 - lam2) * (exp(-lam2 y) - exp(-lam1 y)), with the
    analytic equal-rate limit lam^2 y exp(-lam y) below a 1e-9 relative gap.
    """
    y = np.asarray(y, dtype=float)
    if lam1 <= 0 or lam2 <= 0:
        raise ConfigError("rates must be positive")
    if abs(lam1 - lam2) < 1e-9 * max(lam1, lam2):
        lam = 0.5 * (lam1 + lam2)
        return lam * lam * y * np.exp(-lam * y)
    c = lam1 * lam2 / (lam1 - lam2)
    return c * (np.exp(-lam2 * y) - np.exp(-lam1 * y))


def _cdf_exp(x, lam: float):
    return -np.expm1(-lam * np.maximum(x, 0.0))


def direct_outage(lam: float, rho0: float, rate: float) -> float:
    """Exact Pr[0.5*log2(1 + rho0 X) < rate] for X ~ Exp(lam).

    The squared-gain threshold is (2^(2*rate) - 1)/rho0, so the probability
    is 1 - exp(-lam * threshold).
    """
    if lam <= 0 or rho0 <= 0 or rate < 0:
        raise ConfigError("need lam > 0, rho0 > 0, rate >= 0")
    return float(_cdf_exp((4.0 ** rate - 1.0) / rho0, lam))


def _product_pair_outage(lam_x: float, relay_density, y_hi: float, big_t: float,
                         rho0: float, nodes: int) -> float:
    """Pr[(1 + rho0 X)(1 + rho0 Y) < T] for X ~ Exp(lam_x), Y ~ relay_density."""
    if y_hi <= 0.0:
        return 0.0
    y, w = gl_nodes(0.0, y_hi, nodes)
    x_thr = (big_t / (1.0 + rho0 * y) - 1.0) / rho0
    vals = _cdf_exp(x_thr, lam_x) * relay_density(y)
    return float(np.dot(w, vals))


def analytic_outage_stc(cfg: NetworkConfig, r: float, snr: float,
                        cond: ConditionalCase = ConditionalCase.OVERALL,
                        conditioned: bool = False, nodes: int = 240) -> float:
    """Outage of the synchronous scheme by exact CDFs and 1-D quadrature.

    The direct-only case is an exponential CDF evaluated exactly; one- and
    two-relay cases integrate the exact inner CDF against the relay-sum
    density.  Per-case results are joint probabilities unless conditioned.
    The forced single-relay case refers to relay 1.
    """
    cond = ConditionalCase(cond)
    pt = RatePoint(float(snr), float(r), cfg.sigma2_sd)
    rho0 = pt.rho0
    big_t = 4.0 ** pt.rate
    y_hi = (big_t - 1.0) / rho0
    lam_sd = cfg.lam("sd")
    lam1 = cfg.lam("r1d")
    lam2 = cfg.lam("r2d")

    p_d0 = direct_outage(lam_sd, rho0, pt.rate)

    def p_d1(lam_rel):
        return _product_pair_outage(lam_sd, lambda y: lam_rel * np.exp(-lam_rel * y),
                                    y_hi, big_t, rho0, nodes)

    p_d2 = _product_pair_outage(lam_sd, lambda y: two_exp_pdf(y, lam1, lam2),
                                y_hi, big_t, rho0, nodes)

    probs = decoding_set_probs(cfg, pt)
    if conditioned:
        if cond == ConditionalCase.D0:
            return p_d0
        if cond == ConditionalCase.D1:
            return p_d1(lam1)
        if cond == ConditionalCase.D2:
            return p_d2
    joint = {
        ConditionalCase.D0: probs[D_NONE] * p_d0,
        ConditionalCase.D1: probs[D_R1] * p_d1(lam1) + probs[D_R2] * p_d1(lam2),
        ConditionalCase.D2: probs[D_BOTH] * p_d2,
    }
    if cond == ConditionalCase.OVERALL:
        return sum(joint.values())
    return joint[cond]


def analytic_outage_parallel3(cfg: NetworkConfig, r: float, snr: float,
                              conditioned: bool = False, nodes: int = 120) -> float:
    """Both-relays outage of the three-independent-path product-rate reference.

    Pr[(1+rho0 X)(1+rho0 Y1)(1+rho0 Y2) < (1+snr)^{2r}]: the slope reference
    for ISI-aware space-time decoding with both relays on (pulse-shape
    corrections shift the curve, not its decay exponent).  Joint by default
    (multiplied by Pr[|D| = 2]).
    """
    pt = RatePoint(float(snr), float(r), cfg.sigma2_sd)
    rho0 = pt.rho0
    big_t = 4.0 ** pt.rate
    y_hi = (big_t - 1.0) / rho0
    lam_sd = cfg.lam("sd")
    lam1 = cfg.lam("r1d")
    lam2 = cfg.lam("r2d")
    p = 0.0
    if y_hi > 0.0:
        y2, w2 = gl_nodes(0.0, y_hi, nodes)
        inner = np.empty(nodes)
        for j, (yv, t2) in enumerate(zip(y2, 1.0 + rho0 * y2)):
            rem = big_t / t2
            y1_hi = (rem - 1.0) / rho0
            y1, w1 = gl_nodes(0.0, y1_hi, nodes)
            x_thr = (rem / (1.0 + rho0 * y1) - 1.0) / rho0
            inner[j] = np.dot(w1, _cdf_exp(x_thr, lam_sd) * lam1 * np.exp(-lam1 * y1))
        p = float(np.dot(w2, inner * lam2 * np.exp(-lam2 * y2)))
    if conditioned:
        return p
    return decoding_set_probs(cfg, pt)[D_BOTH] * p


def analytic_outage_rtda2(cfg: NetworkConfig, r: float, snr: float, t0bw: float,
                          conditioned: bool = False, n_scale: int = 64,
                          n_split: int = 32, n_phase: int = 12, n_freq: int = 96,
                          bisect_iters: int = 48) -> float:
    """Both-relays outage of the repetition delay-diversity scheme.

    Quadrature over (log relay-sum, split fraction, relay phase) with the
    direct-gain threshold solved per node: in closed form when t0*bw is a
    whole number of periods, by bisection on the frequency average otherwise.
    Joint by default (multiplied by Pr[|D| = 2]).
    """
    if t0bw < 1.0:
        raise ConfigError("oracle needs t0*bw >= 1 (whole-period lower bound finite)")
    pt = RatePoint(float(snr), float(r), cfg.sigma2_sd)
    rho0 = pt.rho0
    big_t = 4.0 ** pt.rate
    if big_t <= 1.0:
        return 0.0
    delays = DelayConfig.from_t0bw(float(t0bw))
    delta1 = delays.delta1
    lam_sd = cfg.lam("sd")
    lam1 = cfg.lam("r1d")
    lam2 = cfg.lam("r2d")
    x_max = (big_t - 1.0) / rho0
    nu_hi = (2.0 * big_t ** (1.0 / delta1) - 1.0) / rho0
    nu_lo = 1e-8 * (big_t - 1.0) / rho0

    t_nodes, t_w = gl_nodes(math.log(nu_lo), math.log(nu_hi), n_scale)
    nu = np.exp(t_nodes)                       # relay-sum scale, log-spaced
    q_nodes, q_w = gl_nodes(0.0, 1.0, n_split)
    y1 = nu[:, None] * q_nodes[None, :]
    y2 = nu[:, None] * (1.0 - q_nodes[None, :])
    bc = 2.0 * rho0 * np.sqrt(y1 * y2)        # cosine swing of the pair gain

    integer_w = abs(t0bw - round(t0bw)) < 1e-9
    if integer_w:
        big_c = 2.0 * big_t
        a_star = (big_c * big_c + bc * bc) / (2.0 * big_c)
        x_star = np.clip((a_star - 1.0 - rho0 * nu[:, None]) / rho0, 0.0, x_max)
        x_star = np.where(bc < big_c, x_star, 0.0)  # A + sqrt(A^2-B^2) >= B: no root past B >= C
        fx = _cdf_exp(x_star, lam_sd)
    else:
        w = float(t0bw)
        u, u_wts = gl_nodes(-math.pi * w, math.pi * w, n_freq)
        u_wts = u_wts / (2.0 * math.pi * w)
        phi, phi_w = gl_nodes(0.0, math.pi, n_phase)
        phi_w = phi_w / math.pi
        cosu = np.cos(u[None, :] + phi[:, None])       # (n_phase, n_freq)
        base = 1.0 + rho0 * nu[:, None]                # (n_scale, 1)

        def mean_rate(x):
            # x shape (n_phase, n_scale, n_split); returns the frequency average
            arg = (base[None, :, :] + rho0 * x)[..., None] \
                + (bc[None, :, :, None] * cosu[:, None, None, :])
            return 0.5 * (np.log2(arg) @ u_wts)

        lo = np.zeros((n_phase, n_scale, n_split))
        hi = np.full((n_phase, n_scale, n_split), x_max)
        feasible = mean_rate(lo) < pt.rate
        for _ in range(bisect_iters):
            mid = 0.5 * (lo + hi)
            below = mean_rate(mid) < pt.rate
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
        x_star = np.where(feasible, 0.5 * (lo + hi), 0.0)
        fx = np.tensordot(phi_w, _cdf_exp(x_star, lam_sd), axes=(0, 0))

    dens = lam1 * lam2 * np.exp(-lam1 * y1 - lam2 * y2)
    jac = nu[:, None] ** 2                      # dy1 dy2 = nu dnu dq, dnu = nu dt
    p = float(t_w @ ((fx * dens * jac) @ q_w))
    if conditioned:
        return p
    return decoding_set_probs(cfg, pt)[D_BOTH] * p


def analytic_curve(oracle, snr_grid, scheme: str, r: float,
                   cond: ConditionalCase, conditioned: bool = False) -> OutageCurve:
    """Wrap a pointwise oracle (snr -> probability) as an OutageCurve."""
    snr = tuple(float(s) for s in np.atleast_1d(np.asarray(snr_grid, dtype=float)))
    vals = tuple(float(oracle(s)) for s in snr)
    return OutageCurve(scheme, float(r), ConditionalCase(cond), bool(conditioned),
                       snr, vals, vals, vals, 0, tuple(v == 0.0 for v in vals))


# ---------------------------------------------------------------------------
# Mixing protocol


def mixing_protocol_mi(f, pt: RatePoint, corr: CorrelationSet,
                       delays: DelayConfig | None = None) -> tuple[str, float]:
    """Decode-forward with amplify-forward fallback: derive the decoding set,
    then delegate to the per-branch evaluators.  delays is accepted for
    interface uniformity; no branch of this protocol uses it."""
    from .channel import derive_decoding_set

    d = derive_decoding_set(f, pt)
    value = scheme_mi(SchemeId.MIX_AF, f, d, pt.rho0, corr=corr, delays=delays)
    label = {0: "d0-af-fallback", 1: "d1-mixed", 2: "d2-astc"}[d.size]
    return label, value


# ---------------------------------------------------------------------------
# Slope fitting


@dataclass(frozen=True)
class SlopeFit:
    """Least-squares slope of -log10(outage) against log10(snr)."""

    slope: float
    stderr: float
    intercept: float
    n_used: int
    window_db: tuple[float, float]


def slope_fit(curve: OutageCurve, window_db: tuple[float, float] | None = None,
              rel_ci_max: float = 0.3) -> SlopeFit:
    """Fit the decay slope of an outage curve over a dB window.

    Censored points never enter the fit; a window dominated by censored
    points, fewer than 4 usable points, or a usable span under 15 dB raise
    NumericError instead of returning a junk slope.  Points whose confidence
    interval is wider than rel_ci_max of the estimate are dropped as noise.
    """
    db = np.asarray(curve.snr_db)
    out = np.asarray(curve.outage)
    lo = np.asarray(curve.ci_low)
    hi = np.asarray(curve.ci_high)
    cens = np.asarray(curve.censored)
    if window_db is None:
        window_db = (float(db.min()), float(db.max()))
    in_win = (db >= window_db[0] - 1e-9) & (db <= window_db[1] + 1e-9)
    usable = in_win & ~cens & (out > 0.0)
    noisy = usable & ((hi - lo) > rel_ci_max * out)
    usable &= ~noisy
    n_cens = int(np.count_nonzero(in_win & cens))
    n_use = int(np.count_nonzero(usable))
    if n_cens >= max(n_use, 1):
        raise NumericError(
            f"window {window_db} is censored-dominated ({n_cens} censored vs {n_use} usable)")
    if n_use < 4:
        raise NumericError(f"need >= 4 usable points in window {window_db}, have {n_use}")
    x = np.log10(np.asarray(curve.snr)[usable])
    span_db = 10.0 * (x.max() - x.min())
    if span_db < 15.0 - 1e-9:
        raise NumericError(f"usable points span {span_db:.1f} dB, need >= 15")
    y = -np.log10(out[usable])
    coef, res = np.polyfit(x, y, 1, full=True)[:2]
    slope, intercept = float(coef[0]), float(coef[1])
    if n_use > 2 and res.size:
        sigma2 = float(res[0]) / (n_use - 2)
        stderr = math.sqrt(sigma2 / float(np.sum((x - x.mean()) ** 2)))
    else:
        stderr = 0.0
    return SlopeFit(slope, stderr, intercept, n_use, (float(window_db[0]), float(window_db[1])))


# ---------------------------------------------------------------------------
# CSV emission


CSV_COLUMNS = ("scheme", "r", "cond", "snr_db", "outage", "ci_low", "ci_high",
               "trials", "censored")


def write_outage_csv(dest, curves, meta: dict | None = None) -> None:
    """Write curves as CSV with a commented key=value header block.

    The header echoes the resolved configuration so a run can be reproduced
    from its own output; rows use repr floats, so identical runs are
    byte-identical.
    """
    buf = io.StringIO()
    buf.write("# schema=outage-v1\n")
    for k, v in (meta or {}).items():
        buf.write(f"# {k}={v}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_COLUMNS)
    for c in curves:
        for i, s in enumerate(c.snr):
            writer.writerow([
                c.scheme, repr(float(c.r)), c.cond.value,
                repr(10.0 * math.log10(s)), repr(float(c.outage[i])),
                repr(float(c.ci_low[i])), repr(float(c.ci_high[i])),
                c.trials, int(c.censored[i]),
            ])
    text = buf.getvalue()
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        Path(dest).write_text(text)
