"""Fixed-rank matrix optimization through quotient factorization geometries.

Four interchangeable geometries for the rank-r matrix set (two-factor
full-rank, polar, subspace-projection, and embedded-submanifold), with
scale-invariant metrics, matching first- and second-order solvers, and a
matrix-completion objective that never forms a dense matrix.
"""

from .checkpoint import load_point, save_point
from .completion import (
    CompletionObjective,
    CompletionProblem,
    linearized_step,
    spectral_init,
    tr_radius_seed,
)
from .errors import (
    ConfigError,
    FixedRankError,
    LineSearchError,
    RankDeficientDataError,
    RankDropError,
    SingularCoefficientError,
    SymmetryViolationError,
    UnboundedPolynomialError,
    UndefinedDirectionError,
)
from .factors import FactorTuple, euclidean_dot, euclidean_norm
from .geometry import (
    GEOMETRY_TAGS,
    EmbeddedGeometry,
    FullRankGeometry,
    PolarGeometry,
    SubspaceGeometry,
    geometry_from_tag,
)
from .harness import (
    ExperimentConfig,
    compare_geometries,
    generate_problem,
    run_experiment,
    sample_count,
)
from .manifold import check_gradient, check_hessian
from .sampling import (
    SampledMatrix,
    pair_values,
    read_matrix_market,
    sample_positions_floyd,
    write_matrix_market,
)
from .solvers import (
    GDConfig,
    SolverTrace,
    TRConfig,
    adaptive_step_update,
    gradient_descent,
    tcg_subproblem,
    trust_region,
)

__version__ = "0.1.0"

__all__ = [
    "CompletionObjective",
    "CompletionProblem",
    "ConfigError",
    "EmbeddedGeometry",
    "ExperimentConfig",
    "FactorTuple",
    "FixedRankError",
    "FullRankGeometry",
    "GDConfig",
    "GEOMETRY_TAGS",
    "LineSearchError",
    "PolarGeometry",
    "RankDeficientDataError",
    "RankDropError",
    "SampledMatrix",
    "SingularCoefficientError",
    "SolverTrace",
    "SubspaceGeometry",
    "SymmetryViolationError",
    "TRConfig",
    "UnboundedPolynomialError",
    "UndefinedDirectionError",
    "adaptive_step_update",
    "check_gradient",
    "check_hessian",
    "compare_geometries",
    "euclidean_dot",
    "euclidean_norm",
    "generate_problem",
    "geometry_from_tag",
    "gradient_descent",
    "linearized_step",
    "load_point",
    "pair_values",
    "read_matrix_market",
    "run_experiment",
    "sample_count",
    "sample_positions_floyd",
    "save_point",
    "spectral_init",
    "tcg_subproblem",
    "tr_radius_seed",
    "trust_region",
    "write_matrix_market",
    "__version__",
]
