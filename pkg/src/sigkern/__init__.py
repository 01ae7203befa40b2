"""Signature kernels and random signature features for multivariate sequences.

Dual algorithms compute truncated signature kernels exactly by dynamic
programming (and the untruncated kernel by a second-order PDE scheme);
primal algorithms build random feature maps whose inner products estimate
the same kernels at linear cost in sequence length. Preprocessing, ridge
classifiers with cross-validation and a benchmark harness round out the
toolkit; the `sigkern` console script drives everything from config files.
"""

from .errors import (
    ConfigError,
    NumericError,
    ParseError,
    SigkernError,
    StratificationError,
)
from .rng import SeedStream
from .sequences import (
    RaggedSequenceSet,
    SequenceBatch,
    gen_brownian,
    load_sequences_csv,
    write_matrix_csv,
    write_sequences_csv,
)
from .static.kernels import StaticKernelSpec, gram, kernel_eval, median_heuristic
from .static.features import (
    StaticFeatureSpec,
    StaticFeatureState,
    fit_static_features,
    transform_static_features,
)
from .fftconv import circular_convolve, fft_pow2, ifft_pow2
from .projections import (
    ProjectionSpec,
    ProjectionState,
    fit_projection,
    project,
    project_outer,
)
from .kernels import (
    KernelConfig,
    LevelValues,
    increment_tensor,
    sig_kernel_bruteforce,
    sig_kernel_dp,
    sig_kernel_gram,
    sig_levels_dp,
    sig_pde_kernel,
)
from .features import (
    LevelBlocks,
    SigFeatureConfig,
    SigFeatureState,
    fit_sig_features,
    normalize_levels,
    rfsf_exact_gram,
    sig_feature_gram,
    transform_sig_features,
)
from .preprocessing import AugmentorOptions, SequenceAugmentor, augment, tabulate
from .models import RidgeModel, fit_ridge, grid_cv, stratified_folds
from .benchmarks import (
    BenchRecord,
    BenchSettings,
    ClassifySettings,
    mape,
    run_bench,
    run_classify,
)
from .utils import ResourceCounters

__version__ = "0.1.0"

__all__ = [
    "SigkernError", "ParseError", "ConfigError", "NumericError", "StratificationError",
    "SeedStream",
    "SequenceBatch", "RaggedSequenceSet", "gen_brownian",
    "load_sequences_csv", "write_matrix_csv", "write_sequences_csv",
    "StaticKernelSpec", "gram", "kernel_eval", "median_heuristic",
    "StaticFeatureSpec", "StaticFeatureState", "fit_static_features",
    "transform_static_features",
    "circular_convolve", "fft_pow2", "ifft_pow2",
    "ProjectionSpec", "ProjectionState", "fit_projection", "project", "project_outer",
    "KernelConfig", "LevelValues", "increment_tensor", "sig_levels_dp",
    "sig_kernel_bruteforce", "sig_kernel_dp", "sig_pde_kernel", "sig_kernel_gram",
    "SigFeatureConfig", "SigFeatureState", "LevelBlocks", "fit_sig_features",
    "transform_sig_features", "normalize_levels", "sig_feature_gram", "rfsf_exact_gram",
    "AugmentorOptions", "SequenceAugmentor", "tabulate", "augment",
    "RidgeModel", "fit_ridge", "grid_cv", "stratified_folds",
    "BenchRecord", "BenchSettings", "ClassifySettings", "mape", "run_bench",
    "run_classify",
    "ResourceCounters",
    "__version__",
]
