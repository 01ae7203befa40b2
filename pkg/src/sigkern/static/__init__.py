from .kernels import StaticKernelSpec, kernel_eval, gram, gram_diag, rowwise, median_heuristic
from .features import StaticFeatureSpec, StaticFeatureState, fit_static_features, transform_static_features

__all__ = [
    "StaticKernelSpec",
    "kernel_eval",
    "gram",
    "gram_diag",
    "rowwise",
    "median_heuristic",
    "StaticFeatureSpec",
    "StaticFeatureState",
    "fit_static_features",
    "transform_static_features",
]
