"""Survival probabilities under repeated measurement and the ray geometry behind them."""

from .dynamics import (
    GisinGeneral,
    GisinTwoLevel,
    LinearModel,
    NLSE1D,
    SolitonParams,
    derivative,
    energy_uncertainty,
    evolve,
    propagate,
    soliton_state,
    soliton_time_derivative,
)
from .geometry import GeometryReport, fs_distance, fs_speed, path_length
from .hilbert import FiniteState, Grid, GridState, inner_product, norm, normalize
from .zeno import (
    CollapseMode,
    ZenoProtocol,
    ZenoResult,
    short_time_k,
    stochastic_zeno,
    survival_probability,
    zeno_asymptotic,
    zeno_criterion,
    zeno_run,
)

__version__ = "0.1.0"
