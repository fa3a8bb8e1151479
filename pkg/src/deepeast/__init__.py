"""
deepeast: depth-based two-sample homogeneity tests.

The package compares two multivariate samples through data depth. Each
sample ranks the points of the other by depth, the two directed Q
statistics summarise those rankings, and a statistic combining both is
calibrated by block permutation or by its one-dimensional limit law.
"""

__version__ = "0.1.0"

from .depth import Euclidean, Mahalanobis, Projection, Spatial, compute_depths, depth_from_name
from .errors import *  # noqa: F401,F403
from .limitlaw import (
    CRAIG,
    CraigLimitSpec,
    Quadrature,
    QuantileTable,
    finite_sample_quantiles,
    limit_density,
    limit_quantile,
    limit_quantile_table,
    sample_limit,
)
from .permute import (
    PermutationConfig,
    TestResult,
    block_permutation_test,
    calibrate_null_threshold,
    empirical_threshold,
    permutation_qpairs,
)
from .qstat import QPair, q_pair, q_statistic
from .simulate import PowerTable, Scenario, generate_scenario_sample, load_study_config, run_power_study
from .spectra import (
    GroupAssignment,
    ScaleCurve,
    SpectraDataset,
    WindowSpec,
    classify_by_r2,
    extract_window,
    load_spectra,
    make_synthetic_spectra,
    scale_curve,
    transform,
    two_group_test_matrix,
)
from .stats import Max, Min, Product, Sum, WeightedAvg, condition_cs_holds, evaluate_statistic
