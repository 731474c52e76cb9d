"""Exact simulation of non-homogeneous Poisson point processes on an interval."""

from .batch import (
    matrix_rows,
    matrix_to_csv,
    matrix_to_json,
    vdraw_intensity_step_regular,
    vdraw_sc_step_regular,
    vztdraw_intensity_step_regular,
    vztdraw_sc_step_regular,
)
from .core import Interval, SamplerOptions
from .errors import (
    BracketError,
    DomainError,
    ImpossibleConditionError,
    MajorizationError,
    NHPPError,
    NumericError,
)
from .general import (
    ThinningTally,
    draw,
    draw_conditional,
    draw_inversion,
    draw_orderstats,
    draw_thinning,
    ztdraw_cumulative_intensity,
    ztdraw_intensity,
)
from .intensity import (
    CumulativeIntensity,
    LinearIntensity,
    LogLinearIntensity,
    StepIntensity,
    cumulative_of,
    numeric_inverse,
    tabulated_inverse,
)
from .majorizer import StepMajorizer, get_step_majorizer
from .ppp import ppp_n, ppp_next_n, ppp_orderstat, ppp_sequential, ztppp
from .rng import RngStream, exponential, poisson, truncated_poisson, uniform01
from .suite import SamplerConfig, illustration_configs, make_sampler, run_config, spec_configs, validate_config
from .special import (
    draw_sc_linear,
    draw_sc_loglinear,
    draw_sc_step,
    draw_sc_step_regular,
    ztdraw_sc_linear,
    ztdraw_sc_loglinear,
    ztdraw_sc_step,
    ztdraw_sc_step_regular,
)

__version__ = "0.1.0"
