"""ambigufair: fairness through ambiguity.

Trains a task classifier only on instances whose sensitive attribute a bagged
ensemble of attribute classifiers cannot confidently predict, and benchmarks
that against reweighing and group-threshold post-processing.
"""

__version__ = "0.1.0"

from .data import (
    CATEGORICAL,
    NUMERIC,
    Column,
    Dataset,
    EncodedMatrix,
    EncodingParams,
    FeatureSchema,
    encode,
    fit_encoding,
    load_canonical,
    save_canonical,
    split_d1_d2,
    split_train_test,
)
from .ensemble import (
    NormBreakerEnsemble,
    ensemble_score,
    nbe_diagnostics,
    nbe_fit,
    uncertainty,
)
from .experiment import (
    ExperimentConfig,
    ExperimentResult,
    build_nonnormative,
    export_results,
    run_experiment,
    run_repetition,
)
from .ingest import SyntheticSpec, gen_synthetic, load_adult, load_compas, load_german
from .interventions import GroupThresholds, apply_thresholds, equalize_tpr_thresholds, reweigh
from .learners import ClassifierConfig, default_config, fit, loss_gradient, predict, predict_proba
from .metrics import FairnessReport, demographic_parity, equality_of_opportunity, report
