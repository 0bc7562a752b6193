"""Model-agnostic prediction-difference attributions and interaction effects.

The engine measures how a model's prediction changes when feature sets are
marginalized under a conditional imputer, decomposes combined relevances into
main and joint effects on shared imputations, and ships exact brute-force
Shapley oracles for validating the linear-cost estimators at small scale.
"""

from .bridge import BridgeConnection, BridgePool, bridge_model, pooled_bridge_model
from .calibration import TemperatureFit, apply_temperature, fit_temperature, softmax
from .data import Dataset, FeatureSet, as_sample, load_csv
from .errors import (
    BridgeError,
    CostGuardError,
    ImputerError,
    ModelError,
    PredDiffError,
    SchemaError,
)
from .imputers import (
    ConditionalGaussianImputer,
    ExhaustiveConditionalImputer,
    FactorizedImputer,
    ImputationBatch,
    Imputer,
    TrainSetImputer,
    child_seed,
    exhaustive_conditional,
    factorize,
    fit_conditional_gaussian,
    fit_train_set,
)
from .interactions import (
    InteractionReport,
    ThreePointReport,
    completeness_check,
    decomposition_components,
    interaction_profile,
    joint_effect,
    three_point_effects,
)
from .models import (
    TASK_CLASS_LOGITS,
    TASK_CLASS_PROBS,
    TASK_REGRESSION,
    Model,
    TaskKind,
    constant_model,
    generate_synthetic_dataset,
    linear_model,
    logic_gate_model,
    predict_batch,
    synthetic_model,
    synthetic_target,
)
from .oracles import (
    VALUE_CLASSIFICATION_LOG,
    VALUE_REGRESSION_INTERVENTIONAL,
    VALUE_REGRESSION_OBSERVATIONAL,
    CoalitionTable,
    anchored_decomposition,
    build_value_table,
    exact_shapley,
    interaction_delta,
    shapley_efficiency_residual,
    shapley_interaction_index,
)
from .relevance import (
    EffectReport,
    bootstrap_ci,
    laplace_correct,
    m_value,
    relevance,
    relevance_profile,
)
from .validation import CheckResult, run_golden_checks

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
