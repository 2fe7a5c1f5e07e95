"""Achievable rates of asynchronous faster-than-Nyquist NOMA uplinks.

Library layout:

- `pulse`: RRC spectrum, pulse correlations, folded / twisted / ratio spectra
- `gram`: MUI Toeplitz matrices and transform-domain evaluators
- `rates`: finite-blocklength per-user rates under SIC detection
- `bounds`: delay-independent asymptotic bounds, SINR and DoF gains
- `montecarlo`: cell drops and the rate experiments
- `cli`: JSON-configured experiment runner emitting CSV datasets
"""

from ._kernels import backend
from .bounds import (
    BoundPair,
    anoma_bounds,
    band_integral,
    dof_gain,
    high_snr_ratio,
    merged_rate,
    rate_bound_pair,
    rate_lower_bound,
    rate_upper_bound,
    sinr_gain,
    synchronous_rate,
)
from .gram import (
    EigReport,
    ProductCoeffs,
    ToeplitzMatrix,
    check_positive_definite,
    dtft_g,
    dtft_t,
    gram_product_coeffs,
    mui_matrix,
)
from .montecarlo import (
    BlockRateEngine,
    CellConfig,
    ErgodicResult,
    InstantaneousResult,
    RateRegion,
    TradeoffRow,
    TrialDraw,
    avg_channel_gain,
    calibrate_power,
    ccdf,
    dbm_to_watts,
    draw_trial,
    ergodic_experiment,
    instantaneous_experiment,
    rate_region_two_user,
    sample_channel,
    sample_positions,
    tradeoff_sweep,
)
from .pulse import (
    DEFAULT_QUAD_POINTS,
    CorrTable,
    FtnConfig,
    PulseParams,
    SpectralGrid,
    alias_range,
    cross_corr,
    folded_spectrum,
    interference_reducing_spectrum,
    rrc_autocorr,
    rrc_spectrum,
    twisted_folded_spectrum,
)
from .rates import (
    ConditionLog,
    NumericalError,
    RateReport,
    Scenario,
    UserLink,
    block_mutual_information,
    conditional_mi,
    logdet_spd,
    normalized_rate,
    rate_report,
    sic_sort,
    sum_rate,
)

__version__ = "0.1.0"
