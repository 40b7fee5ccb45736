"""
Linearized occupation near the Fermi edge for slowly decaying IM2 couplings (r_gamma << 1, N >> 1).

State N - 1 + n sits at the wave number deviation dk = n / L_F, and for |n| << min(N, 1/r_gamma)

    P(dk) = 1/2 - 3F2(gamma_bar_0, 1/2, 1; 1, 3/2; -(pi / r_gamma)^2) r_gamma L_F dk

Per state this predicts a drop of 3F2 r_gamma. The exact drop `im2_edge_drop` of the closed form
is 3F2 times a factor of order one (1.37 at r = 0.05, alpha_bar_1 = -1), so the two differ by
roughly 1 / r_gamma.
"""

import logging
import math
from typing import Self

import numpy as np
from pydantic import Field, model_validator

from fermi_trap.exceptions import DomainError, LinearWindowError
from fermi_trap.lib.common import CustomBaseModel
from fermi_trap.lib.specfun import FloatArray, edge_hypergeometric
from fermi_trap.theory.couplings import EffectiveCouplings, TrapSpec

logger = logging.getLogger(__name__)


def edge_slope(N: int, r_gamma: float, gamma_bar_0: float) -> float:
    if N < 2:
        raise DomainError(f"N must be at least 2, got {N}")
    if r_gamma <= 0:
        raise DomainError(f"r_gamma must be positive, got {r_gamma}")
    w = (math.pi / r_gamma) ** 2
    return edge_hypergeometric(gamma_bar_0, w) * r_gamma * math.sqrt(2 * N - 1)


class EdgeModel(CustomBaseModel):
    N: int = Field(ge=2)
    r_gamma: float = Field(gt=0)
    gamma_bar_0: float = Field(ge=0)
    slope: float

    @model_validator(mode="after")
    def check_slope(self) -> Self:
        if not self.slope > 0:
            raise ValueError(f"Edge slope must be positive, got {self.slope}")
        return self

    @classmethod
    def create(cls, N: int, r_gamma: float, gamma_bar_0: float) -> "EdgeModel":
        return cls(
            N=N,
            r_gamma=r_gamma,
            gamma_bar_0=gamma_bar_0,
            slope=edge_slope(N, r_gamma, gamma_bar_0),
        )

    @classmethod
    def from_couplings(cls, trap: TrapSpec, couplings: EffectiveCouplings) -> "EdgeModel":
        if couplings.r_gamma is None or couplings.gamma_bar_0 is None:
            raise DomainError(f"{couplings.model} couplings have no exponential decay parameters")
        return cls.create(trap.N, couplings.r_gamma, couplings.gamma_bar_0)

    @property
    def L_F(self) -> float:
        return math.sqrt(2 * self.N - 1)

    @property
    def slope_per_state(self) -> float:
        """Drop between neighbouring states predicted by the linear form (dk changes by 1 / L_F)."""
        return self.slope / self.L_F

    @property
    def window(self) -> float:
        """Largest |dk| for which the linear form stays inside [0, 1]."""
        return 0.5 / self.slope

    @property
    def validity_states(self) -> float:
        # |n| must stay well below this for the continuum limit
        return min(self.N, 1.0 / self.r_gamma)


def edge_occupation(delta_k: float, model: EdgeModel) -> float:
    if abs(delta_k) > model.window:
        raise LinearWindowError(
            f"|dk|={abs(delta_k)} lies outside the linear window |dk| <= {model.window:.6g}"
        )
    return 0.5 - model.slope * delta_k


def sample_edge(model: EdgeModel, n_points: int = 41) -> tuple[FloatArray, FloatArray]:
    """P(dk) on a uniform grid spanning the whole linear window."""
    if n_points < 2:
        raise DomainError(f"At least 2 samples are needed, got {n_points}")
    delta_k = np.linspace(-model.window, model.window, n_points)
    return delta_k, 0.5 - model.slope * delta_k


def luttinger_beta(gamma_LL: float) -> float:
    """Edge exponent of a Luttinger liquid: 2 gamma_LL below 1/2, saturating at 1."""
    if gamma_LL < 0:
        raise DomainError(f"gamma_LL must be non-negative, got {gamma_LL}")
    return 2.0 * gamma_LL if gamma_LL < 0.5 else 1.0
