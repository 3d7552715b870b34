"""mmokit: multimodal multiobjective optimization toolkit.

Problems with several equivalent Pareto sets (feature selection, facility
location, a synthetic two-branch benchmark), four niching optimizers behind
one runner interface, decision- and objective-space quality indicators, and
a seeded experiment harness that renders dense-ranked result tables.
"""
from .core import (
    Bounds,
    Population,
    RandomStream,
    Solution,
    crowding_distance,
    crowding_distance_matrix,
    dominates,
    non_dominated_filter,
    non_dominated_mask,
    non_dominated_sort,
    scd_from_matrices,
    special_crowding_distance,
)
from .classifier import CrossValKNN, FoldPlan, TabularDataset, cv_error_rate, knn_classify
from .problems import (
    BudgetExhausted,
    EvaluationBudget,
    FACILITY_TYPES,
    FeatureSelectionProblem,
    LocationInstance,
    LocationSelectionProblem,
    ProblemSpec,
    TwoBranchSynthetic,
    decode_feature_mask,
    distance_to_interval_value,
    evaluate_feature_subset,
    evaluate_location,
    evaluate_synthetic,
    repair_to_region,
)
from .metrics import (
    MetricReport,
    ReferenceSet,
    build_location_reference,
    build_synthetic_reference,
    equivalent_subset_count,
    hypervolume_2d,
    inv_hv,
    inverted_generational_distance,
    load_reference_json,
    save_reference_json,
)
from .operators import polynomial_mutation, sbx_crossover
from .algorithms import (
    REGISTRY,
    AlgorithmConfig,
    OUT_OF_SCOPE,
    Particle,
    RunResult,
    get_algorithm,
    run_cpdea,
    run_mmea_wi,
    run_mo_ring_pso_scd,
    run_omni_optimizer,
    run_random_search,
)
from .data import (
    LocationDatasetSpec,
    LocationSchemaError,
    SplitResult,
    TabularLoadError,
    generate_location_dataset,
    load_location_json,
    load_tabular_csv,
    save_location_json,
    train_test_split,
)
from .harness import (
    DatasetEntry,
    ExperimentConfig,
    RankTable,
    RunRecord,
    aggregate_rank_table,
    average_ranking,
    load_records,
    rank_dense,
    render_table,
    run_experiment,
    save_record,
)

__version__ = "0.1.0"
