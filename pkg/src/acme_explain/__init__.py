"""Fast model-agnostic feature importance via quantile perturbations,
with a Shapley-value baseline, evaluation tooling, and a what-if service."""

from .engine import (
    ClassificationExplanation,
    FeatureEffect,
    GlobalExplanation,
    LocalExplanation,
    classification_explain,
    global_explain,
    local_explain,
    standardized_effects,
    what_if,
)
from .models import (
    KNNModel,
    LinearModel,
    Predictor,
    fit_knn,
    fit_linear_regression,
    fit_model_for_dataset,
    predict_batch,
)
from .external import spawn_external_model
from .shapley import (
    GlobalShap,
    ShapleyAttribution,
    exact_shapley,
    kernel_shap_explain,
    sample_coalitions,
    shap_kernel_weight,
)
from .tabular import (
    BaselineVector,
    Dataset,
    FeatureColumn,
    Kind,
    QuantileGrid,
    baseline_vector,
    empirical_quantile,
    feature_summary,
    load_csv,
    quantile_grid,
)
from .evaluation import (
    SyntheticSpec,
    benchmark_explainers,
    gen_linear_synthetic,
    kendall_tau,
    ndcg,
    topk_feature_eval,
)

__version__ = "0.1.0"
