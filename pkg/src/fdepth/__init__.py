"""Functional spatial depths and depth-based curve classification."""

from .classify import (
    ClassifierSpec,
    Method,
    Prediction,
    decision_scores,
    dtm_classify,
    knn_classify,
    predict,
    predict_labels,
    trimmed_mean,
    wad_classify,
    wmd_classify,
)
from .core import (
    ConfigError,
    DegenerateBandwidth,
    DepthKind,
    DepthSpec,
    DomainNotIncreasing,
    EmptyGroup,
    FactorizationFailure,
    FdepthError,
    FunctionalSample,
    Grid,
    GridMismatch,
    IndexOutOfRange,
    InsufficientPoints,
    InsufficientSample,
    LabeledSample,
    NonFiniteValue,
    ParseError,
    ZeroDistance,
    ZeroWeights,
    make_labeled_sample,
    validate_labeled_sample,
)
from .datasets import (
    RawCurveTable,
    SplitScheme,
    load_curves_csv,
    natural_cubic_regrid,
    parse_curves_csv,
    split_t1,
    split_t2,
)
from .depths import (
    compute_depth,
    depth_vector,
    fmd,
    fsd,
    generate_projections,
    halfspace_depth_1d,
    hmd,
    idd,
    kfsd,
    mbd,
    rtd,
    simplicial_depth_1d,
)
from .experiments import (
    ExperimentConfig,
    ExperimentSummary,
    MethodSpec,
    emit_table,
    global_vs_local,
    load_config,
    run_experiment,
    run_replication,
    summarize,
    summarize_results,
)
from .geometry import bandwidth_from_percentile, l2_distance, l2_inner, l2_norm, pairwise_distances
from .modelselect import DEFAULT_PERCENTILES, CvPlan, PercentileChoice, cv_select_percentile, make_cv_plan, tiebreak_score
from .simulate import CgpSpec, CovarianceKernel, Model, generate_cgp, sample_gaussian_process

__version__ = "0.1.0"
