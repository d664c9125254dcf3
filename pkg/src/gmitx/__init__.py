"""GMI analysis and data-driven rate selection for Gaussian-codebook /
nearest-neighbor-decoding transmission with processed channel outputs."""

from .channel import (
    ChannelModel,
    TrainingSet,
    dither_biases,
    draw_training_set,
    make_model,
    sample,
    sample_many,
    snr_db,
)
from .estimator import (
    MmsePredictor,
    lmmse_predictor,
    mmse_estimate,
    predictor_moments,
    var_conditional_mean,
)
from .gmi import (
    GmiResult,
    MomentPair,
    bussgang_snr,
    delta_of_predictor,
    gmi_from_delta,
    gmi_lmmse,
    gmi_mmse,
    gmi_scenario_A,
    gmi_scenario_B,
    lower_bound_A,
    optimal_scaling,
)
from .harness import (
    ExperimentConfig,
    TrialRecord,
    cdf_export,
    gmi_sweep,
    over_estimation_probability,
    receding_level,
    run_experiment,
    run_trial,
)
from .lfit import LfitConfig, RegressorSpec, clt_rate, empirical_variance, lfit_run, partition
from .quadrature import QuadratureRule, cdf_product_rule, gauss_hermite_rule
from .regress import EnsemblePredictor, KernelPredictor, LinearPredictor, fit_kernel, fit_ridge, predict

__all__ = [name for name in dir() if not name.startswith("_")]
