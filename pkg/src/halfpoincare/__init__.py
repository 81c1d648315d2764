"""Numerical toolkit for half-integral weight Poincare series on Gamma_0(N)."""

from .group_core import HalfWeight, MetElement, as_weight, sqrt_branch
from .arithmetic import DirichletCharacter, IntMatrix, kronecker, multiplier_J
from .series import SeriesSpec, SeriesValue, TruncationBudget, delta_eval, delta_via_psi, pfkm_eval, psi_eval

__all__ = [
    "HalfWeight",
    "MetElement",
    "as_weight",
    "sqrt_branch",
    "DirichletCharacter",
    "IntMatrix",
    "kronecker",
    "multiplier_J",
    "SeriesSpec",
    "SeriesValue",
    "TruncationBudget",
    "delta_eval",
    "delta_via_psi",
    "pfkm_eval",
    "psi_eval",
]
