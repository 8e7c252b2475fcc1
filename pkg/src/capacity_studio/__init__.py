"""Decision support on fuzzy measures: Choquet aggregation, capacity
identification, and concept ranking."""

from .capacity import (
    Capacity,
    CriteriaVector,
    Violation,
    additive,
    capacity_from_dict,
    capacity_to_dict,
    dumps_capacity,
    equidistributed,
    is_valid,
    load_capacity,
    load_densities,
    save_capacity,
    validate,
)
from .choquet import choquet, two_additive_choquet
from .concepts import (
    Concept,
    ConceptSet,
    MMPProfile,
    RankedConcept,
    aggregate_subcriteria,
    concepts_from_dict,
    gcs,
    load_concepts,
    rank_concepts,
)
from .errors import (
    CapacityStructureError,
    ConsistencyError,
    CycleError,
    InfeasibilityReport,
    InfeasibleError,
    NumericError,
)
from .indices import (
    IndexReport,
    PairSemantics,
    TwoAdditiveReport,
    classify_pairs,
    index_report,
    interaction,
    interaction_matrix,
    is_two_additive,
    shapley,
)
from .learning import (
    InteractionEqual,
    InteractionOrder,
    LearningSample,
    RankingPair,
    ShapleyEqual,
    ShapleyOrder,
    identify_from_data,
    min_samples,
    preferences_from_json,
    samples_from_json,
)
from .qp import KKTResiduals, QPInputError, QPProblem, QPSolution, solve_qp
from .results import IdentificationResult
from .semantic import (
    IntervalScore,
    LinguisticConstraint,
    constraints_from_json,
    identify_semantic,
    interval_scores_from_json,
    linguistic_to_bounds,
)
from .subsets import CriterionSet, subset_position
from .sugeno import (
    LambdaSolution,
    SingletonDensities,
    build_lattice,
    identify_sugeno,
    solve_lambda,
)

__all__ = [
    "Capacity",
    "Concept",
    "ConceptSet",
    "CriteriaVector",
    "CriterionSet",
    "MMPProfile",
    "RankedConcept",
    "Violation",
    "additive",
    "aggregate_subcriteria",
    "capacity_from_dict",
    "capacity_to_dict",
    "choquet",
    "classify_pairs",
    "concepts_from_dict",
    "dumps_capacity",
    "equidistributed",
    "gcs",
    "index_report",
    "interaction",
    "interaction_matrix",
    "is_two_additive",
    "is_valid",
    "load_capacity",
    "load_concepts",
    "load_densities",
    "rank_concepts",
    "save_capacity",
    "shapley",
    "subset_position",
    "two_additive_choquet",
    "validate",
    "CapacityStructureError",
    "ConsistencyError",
    "CycleError",
    "InfeasibilityReport",
    "InfeasibleError",
    "NumericError",
    "IndexReport",
    "PairSemantics",
    "TwoAdditiveReport",
    "IdentificationResult",
    "InteractionEqual",
    "InteractionOrder",
    "IntervalScore",
    "KKTResiduals",
    "LambdaSolution",
    "LearningSample",
    "LinguisticConstraint",
    "QPInputError",
    "QPProblem",
    "QPSolution",
    "RankingPair",
    "ShapleyEqual",
    "ShapleyOrder",
    "SingletonDensities",
    "build_lattice",
    "constraints_from_json",
    "identify_from_data",
    "identify_semantic",
    "identify_sugeno",
    "interval_scores_from_json",
    "linguistic_to_bounds",
    "min_samples",
    "preferences_from_json",
    "samples_from_json",
    "solve_lambda",
    "solve_qp",
]
