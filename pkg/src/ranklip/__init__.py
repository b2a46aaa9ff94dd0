"""Generalization bounds and experiments for listwise (ListNet) ranking with linear scorers."""
from .bounds import (
    BoundInputs,
    BoundReport,
    DomainError,
    chapelle_wu_bound,
    covering_lipschitz,
    covering_smooth,
    dudley_bound,
    lipschitz_generalization_bound,
    online_excess_risk,
    rademacher_closed_form,
    smooth_excess_risk_chain,
    smooth_intermediates,
    smooth_uniform_bound_solve,
)
from .classes import BallConstraint, ClassSpec, Family
from .data import Dataset, GeneratorConfig, RankingInstance, empirical_risk, generate_synthetic
from .linalg import Norm, max_row_norm, softmax, stable_logsumexp
from .loss import LISTNET, ListNet, listnet_gradient, listnet_hessian, listnet_loss
from .optimize import OgdConfig, erm_train, ogd_train, project_l1, project_l2

__all__ = [name for name in dir() if not name.startswith("_")]
