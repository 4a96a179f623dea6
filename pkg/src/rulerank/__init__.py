"""Learning personal rankings of association rules from pairwise feedback.

The package mines association rules, describes each rule with a handful of
interestingness measures, and learns a user-specific k-additive capacity by
querying informative pairwise comparisons: the set of capacities consistent
with the answers so far is a convex polytope, each answer cuts it with a
half-space, and queries are picked near the polytope's center with a
ball-tree branch-and-bound search.
"""

from .balltree import BallNode, bounds, build, pair_distance, search_pair
from .choquet import (
    MobiusCapacity,
    SubsetIndex,
    augment,
    augment_matrix,
    capacity_constraints,
    choquet_eval,
    preference_constraint,
)
from .constraints import ConstraintSystem, Provenance
from .corpus import (
    ContingencyCounts,
    FimiParseError,
    Rule,
    TransactionDatabase,
    contingency,
    load_transactions,
    mine_rules,
)
from .estimator import ActiveChoquetRanker, RuleFeaturizer
from .evalkit import (
    constraint_angles,
    convergence_report,
    jaccard_topk_diversity,
    precision_at_k,
    write_metrics_csv,
)
from .learner import (
    IterationRecord,
    SessionConfig,
    SessionResult,
    random_select,
    read_session_log,
    run_gbs,
    select_query,
    write_session_log,
)
from .measures import (
    DEFAULT_MEASURES,
    FeatureMatrix,
    MeasureKind,
    compute_measure,
    feature_matrix,
    read_rules_csv,
    surprise_score,
    write_rules_csv,
)
from .oracles import (
    HumanBridge,
    HumanOracle,
    OracleKind,
    ScoreOracle,
    hidden_choquet_oracle,
    phi_oracle,
    surprise_oracle,
)
from .versionspace import (
    CenterEstimate,
    InfeasibleVersionSpace,
    LPError,
    add_preference,
    chebyshev_center,
    cut_check,
    init_version_space,
    inscribed_radius,
    is_interesting,
    minkowski_center,
    sample_feasible,
)

__version__ = "0.1.0"

__all__ = [
    "ActiveChoquetRanker",
    "BallNode",
    "CenterEstimate",
    "ConstraintSystem",
    "ContingencyCounts",
    "DEFAULT_MEASURES",
    "FeatureMatrix",
    "FimiParseError",
    "HumanBridge",
    "HumanOracle",
    "InfeasibleVersionSpace",
    "IterationRecord",
    "LPError",
    "MeasureKind",
    "MobiusCapacity",
    "OracleKind",
    "Provenance",
    "Rule",
    "RuleFeaturizer",
    "ScoreOracle",
    "SessionConfig",
    "SessionResult",
    "SubsetIndex",
    "TransactionDatabase",
    "add_preference",
    "augment",
    "augment_matrix",
    "bounds",
    "build",
    "capacity_constraints",
    "chebyshev_center",
    "choquet_eval",
    "compute_measure",
    "constraint_angles",
    "contingency",
    "convergence_report",
    "cut_check",
    "feature_matrix",
    "hidden_choquet_oracle",
    "init_version_space",
    "inscribed_radius",
    "is_interesting",
    "jaccard_topk_diversity",
    "load_transactions",
    "mine_rules",
    "minkowski_center",
    "pair_distance",
    "phi_oracle",
    "precision_at_k",
    "preference_constraint",
    "random_select",
    "read_rules_csv",
    "read_session_log",
    "run_gbs",
    "sample_feasible",
    "search_pair",
    "select_query",
    "surprise_oracle",
    "surprise_score",
    "write_metrics_csv",
    "write_rules_csv",
    "write_session_log",
]
