"""Semi-automatic ABC with Bayes linear estimation."""

import json as _json

from ._sabc import (
    BayesLinearModel,
    NumericalError,
    ValidationError,
    condition_diagnostics,
    criterion_value,
    expand_basis,
    fit_bayes_linear,
    fit_linear,
    gpd_quantile,
    marginal_remap,
    regression_adjust,
    rejection_abc,
    set_threads,
    spearman_matrix,
)
from . import _sabc

__version__ = "0.1.0"


def _text(config):
    return config if isinstance(config, str) else _json.dumps(config)


def canonical_config(config):
    """Fully defaulted config as a dict."""
    return _json.loads(_sabc.canonical_config(_text(config)))


def config_hash(config):
    return _sabc.config_hash(_text(config))


def simulate(config, m, seed):
    """(thetas, stats) drawn from the configured model's prior predictive."""
    return _sabc.simulate(_text(config), m, seed)


def run_semiauto(config):
    """Runs pilot, construction and main ABC; returns the final posterior and estimates."""
    return _sabc.run_semiauto(_text(config))
