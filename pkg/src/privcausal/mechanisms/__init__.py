from .audit import audit_effective_eps, bayes_success, bayes_success_enumerated
from .geometric import (
    BoundedGeometric,
    BoundingMode,
    NormKind,
    geo_prob,
    geo_sample,
    solve_eps_x,
)
from .krr import KrrParams, krr_comb_params, krr_cwise_split, krr_sample
from .spec import (
    CwiseSplit,
    Mechanism,
    MechanismKind,
    MechanismSpec,
    build_mechanism,
    geo_joint_split,
    privatize_dataset,
    privatize_rows,
)

__all__ = [
    "BoundedGeometric",
    "BoundingMode",
    "CwiseSplit",
    "KrrParams",
    "Mechanism",
    "MechanismKind",
    "MechanismSpec",
    "NormKind",
    "audit_effective_eps",
    "bayes_success",
    "bayes_success_enumerated",
    "build_mechanism",
    "geo_joint_split",
    "geo_prob",
    "geo_sample",
    "krr_comb_params",
    "krr_cwise_split",
    "krr_sample",
    "privatize_dataset",
    "privatize_rows",
    "solve_eps_x",
]
