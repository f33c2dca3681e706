"""Two-relay cooperative diversity lab.

Mutual-information evaluators for synchronous and delay-asynchronous
relaying, outage simulation with semi-analytic oracles, waveform correlation
certification, finite-block ISI rates, and exact diversity-multiplexing
tradeoff curves.
"""

from .channel import (DecodingSet, FadingRealization, NetworkConfig, RatePoint,
                      decoding_set_probs, derive_decoding_set, rate_target,
                      relay_decodes, sample_fading)
from .errors import ConfigError, NumericError
from .mutualinfo import (DelayConfig, MiBounds, SchemeId, closed_log_integral,
                         i_af_pair, i_astc, i_emaca_spectral, i_esd,
                         i_esd_bounds, i_ltda, i_rtda, i_stc, i_tda, scheme_mi)
from .outage import (ConditionalCase, OutageCurve, SlopeFit,
                     analytic_outage_parallel3, analytic_outage_rtda2,
                     analytic_outage_stc, direct_outage, mc_outage,
                     mixing_protocol_mi, slope_fit, wilson_interval,
                     write_outage_csv)
from .toeplitz import (ConvergenceStudy, IsiTapSet, block_matrix, build_taps,
                       convergence_study, finite_n_mi)
from .tradeoff import (CrossingReport, CrossPoint, TradeoffCurve, crossings,
                       curve, d_curve, rtda_band)
from .waveform import (CorrelationSet, EigenBounds, Waveform, certify_pd,
                       correlations, eigen2, load_waveform, overlap_integral,
                       rectangular, save_waveform, spectral_matrix, srrc)

__version__ = "0.1.0"
