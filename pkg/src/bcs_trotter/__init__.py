"""Split-step pseudospin dynamics of the mean-field BCS model with chaos quantifiers."""

from .core import (
    CollectiveQuantities,
    ModelParams,
    TangentBundle,
    build_params,
    collective,
    energy,
    random_deviations,
    rotation_apply,
    rotation_matrix,
    sample_initial,
    tau_critical,
    variance_ratio,
)
from .propagators import (
    SABA2,
    CompositionScheme,
    InvalidSchemeError,
    flow_free,
    flow_int,
    integrate,
    reduce_angle,
    step,
)

__version__ = "0.1.0"

__all__ = [
    "CollectiveQuantities",
    "ModelParams",
    "TangentBundle",
    "build_params",
    "collective",
    "energy",
    "random_deviations",
    "rotation_apply",
    "rotation_matrix",
    "sample_initial",
    "tau_critical",
    "variance_ratio",
    "SABA2",
    "CompositionScheme",
    "InvalidSchemeError",
    "flow_free",
    "flow_int",
    "integrate",
    "reduce_angle",
    "step",
    "__version__",
]
