"""Granger non-causality and coordinated structure of linear stochastic systems.

Block-triangular and coordinated Kalman representations are built either
from system matrices or from output covariances; the zero pattern of the
representation decides the causality question.
"""
from .errors import (
    AlignmentFailure,
    InsufficientLags,
    NoConvergence,
    NotMinimal,
    NotStable,
    SingularInnovation,
    SSGrangerError,
    StructureViolation,
    UnstableRealization,
)
from .model import (
    CovarianceSequence,
    KalmanModel,
    Partition,
    StateSpaceModel,
    StructureReport,
    validate,
)
from .solvers import (
    ctrb_rank,
    kalman_gain,
    observability_staircase,
    obsv_rank,
    rank_tol,
    solve_dare_minimal,
    solve_lyapunov,
)
from .realization import (
    CovFactorization,
    ho_kalman,
    markov_from_fact,
    markov_from_kalman,
    markov_from_ss,
)
from .granger import (
    BlockTriangularResult,
    algorithm1,
    algorithm2,
    barnett_seth,
    check_noncausality,
    min_phase,
    plain_kalman,
)
from .coordinated import (
    CoordinatedModel,
    algorithm3,
    algorithm4,
    check_conditional_structure,
    is_coordinated,
    minimality,
    minimize,
    verify_theorem3_properties,
)
from .simulate import SimulationConfig, empirical_covariances, simulate_path

__version__ = "0.1.0"
