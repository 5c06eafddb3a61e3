"""Optimize and audit predictive disparities over the set of good models.

The set of good models holds every model whose loss is within a tolerance
of a benchmark. This package finds the models in that set with the smallest
and largest disparity, including on selectively labelled data.
"""
from .data import (
    Dataset,
    FeaturizerSpec,
    Schema,
    SynthDgpConfig,
    featurize,
    generate_synthetic,
    load_csv,
    reveal_ground_truth,
    split,
    write_csv,
)
from .disparity import DisparitySpec, Event, bgl_disparity, disparity_of_mixture, disparity_of_scorer, make_spec
from .expgrad import (
    ExpGradConfig,
    SaddleResult,
    calibrate_eps,
    certify,
    shrink_support,
    solve_abs_disparity_min,
    solve_bgl,
    solve_disparity_max,
    solve_disparity_min,
)
from .loss import Grid, LossSpec, avg_cost, avg_loss, c0_hat, cost_weight, discretized_loss, loss_value, snap_outcome
from .models import ColumnScorer, ConstantScorer, Scorer, StochasticModel
from .oracle import best_response_h, build_case_weights, exact_best_response, fit_logistic, fit_outcome_model, fit_wls
from .selective import PseudoLabelledDataset, ie, kgb, rie, select_nuisance

__version__ = "0.1.0"
