"""Train ensembles of physics-informed networks on a 1D Poisson benchmark and
measure how far beyond the training interval their predictions stay accurate."""

from .diff_engine import LossAndGrad, fd_gradient, grad_pinn_loss, pinn_loss
from .genlevel import (
    EPSILONS,
    AltGenLevelResult,
    ErrorProfile,
    GenLevelResult,
    error_profile,
    gl_alt,
    gl_ensemble,
    gl_single,
    predictions_on_grid,
)
from .jet_mlp import (
    Jet4,
    MlpArchitecture,
    jet_affine,
    jet_tanh,
    mlp_forward_jet,
    mlp_jet_batch,
    mlp_value_batch,
)
from .problem import (
    FULL_DOMAIN,
    Interval,
    PoissonProblem,
    analytic_deriv,
    analytic_u,
    boundary_targets,
    residual_from_jet,
    source_f,
)
from .sampling import RNG_ALGORITHM, CollocationSet, init_params, latin_hypercube
from .stats import (
    StatTestResult,
    chi_square_sf,
    is_significant,
    kruskal_wallis,
    mann_whitney_u,
    pairwise_mann_whitney,
    rank_with_ties,
)
from .training import (
    Ensemble,
    NonFiniteGradientError,
    TrainConfig,
    TrainedModel,
    adam_run,
    lbfgs_run,
    model_from_dict,
    model_to_dict,
    train_ensemble,
    train_single,
)

__version__ = "0.1.0"
