"""ABC particle Gibbs sampling for stochastic volatility with stable noise."""

__version__ = "0.1.0"

from .errors import DegenerateWeightsError, ParameterError, ParseError, TruncationError
from .stable import StableParams, char_fn, sample_stable
from .svm import (
    GridPoint,
    SvmParams,
    Trajectory,
    emit_return,
    grid_moments,
    grid_params,
    initial_sample,
    simulate,
    transition_logdensity,
    transition_sample,
)
from .kernels import AbcConfig, log_kernel
from .filters import (
    ParticleSystem,
    abc_capf,
    abc_cbf,
    abc_cbfas,
    abc_particle_system,
    cbf,
    cbfas,
    gaussian_loglik,
    multinomial_resample,
    tempered_logweight,
)
from .gibbs import (
    DEFAULT_PRIOR,
    NigState,
    PgConfig,
    PosteriorSample,
    nig_update,
    pg_init,
    pg_sweep,
    run_pg,
    sample_truncated_nig,
)
from .bench import RmseRow, StudyConfig, load_study_config, rmse, run_cell, run_study
from .data import PriceSeries, load_prices, load_series, to_returns
from .report import FitReport, predictive_bands, summarize, volatility_bands
