from .citests import CiResult, CiTestConfig, chi_square_ci, fisher_z_ci
from .hillclimb import bic_hill_climb
from .pairwise import PAIRWISE, DirectionDecision, anm, cds, igci, reci
from .pc import pc, pc_from_ci, pc_skeleton, pc_with_oracle

__all__ = [
    "CiResult",
    "CiTestConfig",
    "DirectionDecision",
    "PAIRWISE",
    "anm",
    "bic_hill_climb",
    "cds",
    "chi_square_ci",
    "fisher_z_ci",
    "igci",
    "pc",
    "pc_from_ci",
    "pc_skeleton",
    "pc_with_oracle",
    "reci",
]
