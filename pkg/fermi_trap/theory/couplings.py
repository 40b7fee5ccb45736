"""
Interaction strengths -> Bogoliubov parameters -> effective couplings.

All energies are in units of hbar * omega_ell, so the mode strengths V(m) are dimensionless.
Only the inter-component coupling is kept (V_parallel = 0); `bogoliubov_angle` and
`excitation_energy` still accept the general four-coupling form.
"""

import logging
import math
from collections.abc import Sequence
from enum import StrEnum
from functools import cached_property
from typing import Literal, NamedTuple, Self

import numpy as np
from pydantic import Field, model_validator
from scipy import optimize

from fermi_trap.constants import REFERENCE_DECAY, REFERENCE_N
from fermi_trap.exceptions import DomainError, InstabilityError
from fermi_trap.lib.common import CustomBaseModel

logger = logging.getLogger(__name__)

# Mode sequences stop once both effective couplings drop below this magnitude
MODE_CUTOFF = 1e-14
# Upper end of the bisection bracket for V(1)
_V_BRACKET_MAX = 0.5 - 1e-12


class InteractionModel(StrEnum):
    FREE = "free"
    IM1 = "im1"
    IM2 = "im2"
    GENERIC = "generic"


class BranchValues(NamedTuple):
    """A quantity on both branches: nu = +1 (mass) and nu = -1 (component fluctuations)."""

    plus: float
    minus: float

    def of(self, nu: int) -> float:
        return self.plus if nu == 1 else self.minus


class TrapSpec(CustomBaseModel):
    N: int = Field(ge=2, description="Particles per component")
    omega_ell: float = Field(default=1.0, gt=0, description="Longitudinal trap frequency")

    @property
    def fermi_index(self) -> int:
        return self.N - 1

    @property
    def half_width(self) -> float:
        """L_F: half-width of the classically allowed region at the Fermi energy"""
        return math.sqrt(2 * self.N - 1)

    @property
    def fermi_wavenumber(self) -> float:
        return math.sqrt(2 * self.N - 1)


class BranchCouplings(CustomBaseModel):
    nu: Literal[1, -1]
    zeta: float
    alpha: float
    gamma: float = Field(ge=0)
    epsilon: float = Field(gt=0)

    @model_validator(mode="after")
    def check_hyperbolic_identity(self) -> Self:
        # alpha^2 = gamma (gamma + 1) for alpha = sinh(2 zeta) / 2, gamma = sinh^2(zeta)
        expected = self.gamma * (self.gamma + 1.0)
        if not math.isclose(self.alpha**2, expected, rel_tol=1e-9, abs_tol=1e-15):
            raise ValueError(f"alpha^2={self.alpha**2} does not match gamma(gamma+1)={expected}")
        return self


class ModeCouplings(CustomBaseModel):
    m: int = Field(ge=1)
    plus: BranchCouplings
    minus: BranchCouplings

    @model_validator(mode="after")
    def check_branch_labels(self) -> Self:
        if self.plus.nu != 1 or self.minus.nu != -1:
            raise ValueError("Branches must be labelled nu=+1 (plus) and nu=-1 (minus)")
        return self

    def branch(self, nu: Literal[1, -1]) -> BranchCouplings:
        return self.plus if nu == 1 else self.minus

    @property
    def alpha_bar(self) -> float:
        return 0.5 * (self.plus.alpha + self.minus.alpha)

    @property
    def gamma_bar(self) -> float:
        return 0.5 * (self.plus.gamma + self.minus.gamma)


class EffectiveCouplings(CustomBaseModel):
    """
    Branch-averaged couplings alpha_bar_m, gamma_bar_m for m = 1, 2, ...

    `alpha_bar[0]` belongs to m = 1. Modes beyond the stored sequences vanish.
    """

    model: InteractionModel
    alpha_bar: tuple[float, ...] = ()
    gamma_bar: tuple[float, ...] = ()

    V1: float | None = None
    mode_1: ModeCouplings | None = None

    r_alpha: float | None = None
    r_gamma: float | None = None
    alpha_bar_0: float | None = None
    gamma_bar_0: float | None = None

    @model_validator(mode="after")
    def check_couplings(self) -> Self:
        if len(self.alpha_bar) != len(self.gamma_bar):
            raise ValueError("alpha_bar and gamma_bar must have the same number of modes")
        if any(alpha > 0 for alpha in self.alpha_bar):
            raise ValueError("Effective couplings alpha_bar_m must be non-positive")
        if any(gamma < 0 for gamma in self.gamma_bar):
            raise ValueError("Effective couplings gamma_bar_m must be non-negative")
        if self.model == InteractionModel.IM2 and None in (
            self.r_alpha,
            self.r_gamma,
            self.alpha_bar_0,
            self.gamma_bar_0,
        ):
            raise ValueError("IM2 couplings need decay constants and m=0 amplitudes")
        return self

    @property
    def num_modes(self) -> int:
        return len(self.alpha_bar)

    def alpha_bar_at(self, m: int) -> float:
        return self.alpha_bar[m - 1] if 1 <= m <= self.num_modes else 0.0

    def gamma_bar_at(self, m: int) -> float:
        return self.gamma_bar[m - 1] if 1 <= m <= self.num_modes else 0.0

    @property
    def alpha_bar_1(self) -> float:
        return self.alpha_bar_at(1)

    @property
    def gamma_bar_1(self) -> float:
        return self.gamma_bar_at(1)

    @cached_property
    def Z_alpha(self) -> float:
        if self.r_alpha is None:
            raise DomainError(f"{self.model} couplings have no alpha decay constant")
        # cosh(r/2) - 1 written without cancellation
        return 2.0 * math.sinh(self.r_alpha / 4.0) ** 2

    @cached_property
    def Z_gamma(self) -> float:
        if self.r_gamma is None:
            raise DomainError(f"{self.model} couplings have no gamma decay constant")
        return 2.0 * math.sinh(self.r_gamma / 2.0) ** 2

    @property
    def is_free(self) -> bool:
        return not any(self.alpha_bar) and not any(self.gamma_bar)


def bogoliubov_angle(
    V_a_par: float, V_a_perp: float, V_b_par: float, V_b_perp: float
) -> BranchValues:
    """zeta_nu = artanh[(V_b_par + nu V_b_perp) / (1 + V_a_par + nu V_a_perp)] / 2"""
    zetas = []
    for nu in (1, -1):
        denominator = 1.0 + V_a_par + nu * V_a_perp
        numerator = V_b_par + nu * V_b_perp
        if denominator <= 0 or not abs(numerator) < denominator:
            raise InstabilityError(
                f"Diagonalization condition violated on branch nu={nu:+d}: "
                f"|{numerator}| must be smaller than {denominator}"
            )
        zetas.append(0.5 * math.atanh(numerator / denominator))
    return BranchValues(*zetas)


def excitation_energy(V_a_par: float, V_a_perp: float, zeta: BranchValues) -> BranchValues:
    """epsilon_nu = (1 + V_a_par + nu V_a_perp) / cosh(2 zeta_nu), in units of hbar omega_ell"""
    return BranchValues(
        *(
            (1.0 + V_a_par + nu * V_a_perp) / math.cosh(2.0 * zeta.of(nu))
            for nu in (1, -1)
        )
    )


def _check_stable(V: float):
    if not abs(V) < 0.5:
        raise InstabilityError(f"|V| must be below 1/2 for a stable spectrum, got V={V}")


def simplified_excitation_energy(V: float) -> BranchValues:
    """epsilon_nu = sqrt(1 + 2 nu V) for V_a_perp = V_b_perp = V and no intra-component part"""
    _check_stable(V)
    return BranchValues(math.sqrt(1.0 + 2.0 * V), math.sqrt(1.0 - 2.0 * V))


def effective_alpha_from_V(V: float) -> float:
    """alpha_bar = (V/4) [1/sqrt(1+2V) - 1/sqrt(1-2V)]; never positive, even in V"""
    _check_stable(V)
    return 0.25 * V * (1.0 / math.sqrt(1.0 + 2.0 * V) - 1.0 / math.sqrt(1.0 - 2.0 * V))


def invert_alpha_bar(target: float) -> float:
    """The V(1) in [0, 1/2) whose effective coupling equals `target` (bisection)."""
    if target > 0:
        raise DomainError(f"Effective couplings are attractive (<= 0), got {target}")
    if target == 0:
        return 0.0

    residual = lambda V: effective_alpha_from_V(V) - target  # noqa: E731
    if residual(_V_BRACKET_MAX) > 0:
        raise InstabilityError(f"alpha_bar_1={target} needs |V(1)| too close to 1/2")

    V = optimize.bisect(
        residual, 0.0, _V_BRACKET_MAX, xtol=1e-300, rtol=4 * np.finfo(float).eps, maxiter=2000
    )
    logger.debug(f"Inverted alpha_bar_1={target} to V(1)={V!r}")
    return V


def mode_couplings(V: float, m: int = 1) -> ModeCouplings:
    """Bogoliubov parameters of mode m for V_a_perp = V_b_perp = V, V_parallel = 0."""
    zeta = bogoliubov_angle(0.0, V, 0.0, V)
    epsilon = excitation_energy(0.0, V, zeta)

    branches = []
    for nu in (1, -1):
        alpha = 0.5 * math.sinh(2.0 * zeta.of(nu))
        # gamma = (sqrt(1 + 4 alpha^2) - 1) / 2 = sinh^2(zeta), in a cancellation-free form
        gamma = 2.0 * alpha * alpha / (math.sqrt(1.0 + 4.0 * alpha * alpha) + 1.0)
        branches.append(
            BranchCouplings(
                nu=nu, zeta=zeta.of(nu), alpha=alpha, gamma=gamma, epsilon=epsilon.of(nu)
            )
        )
    return ModeCouplings(m=m, plus=branches[0], minus=branches[1])


def free_couplings() -> EffectiveCouplings:
    return EffectiveCouplings(model=InteractionModel.FREE)


def im1_couplings(alpha_bar_1: float) -> EffectiveCouplings:
    """Single interacting mode m = 1 with effective coupling `alpha_bar_1`."""
    V1 = invert_alpha_bar(alpha_bar_1)
    mode = mode_couplings(V1, m=1)
    return EffectiveCouplings(
        model=InteractionModel.IM1,
        alpha_bar=(min(mode.alpha_bar, 0.0),),
        gamma_bar=(mode.gamma_bar,),
        V1=V1,
        mode_1=mode,
    )


def _decaying_sequence(amplitude: float, rate: float) -> list[float]:
    # amplitude * exp(-rate m) for m = 1, 2, ... until below MODE_CUTOFF
    if abs(amplitude) < MODE_CUTOFF:
        return []
    num_modes = max(1, math.ceil(math.log(abs(amplitude) / MODE_CUTOFF) / rate))
    return [amplitude * math.exp(-rate * m) for m in range(1, num_modes + 1)]


def im2_couplings(alpha_bar_1: float, r: float, r_gamma: float | None = None) -> EffectiveCouplings:
    """
    Exponentially decaying couplings: alpha_bar_m = exp(-r_alpha m / 2) alpha_bar_0 and
    gamma_bar_m = exp(-r_gamma m) gamma_bar_0, anchored at m = 1 to the IM1 values.

    `r` is r_alpha; r_gamma defaults to the same value.
    """
    r_alpha = r
    r_gamma = r if r_gamma is None else r_gamma
    if not (r_alpha > 0 and r_gamma > 0):
        raise DomainError(
            f"Decay constants must be positive, got r_alpha={r_alpha}, r_gamma={r_gamma}"
        )

    anchor = im1_couplings(alpha_bar_1)
    alpha_bar_0 = math.exp(0.5 * r_alpha) * anchor.alpha_bar_1
    gamma_bar_0 = math.exp(r_gamma) * anchor.gamma_bar_1

    alphas = _decaying_sequence(alpha_bar_0, 0.5 * r_alpha)
    gammas = _decaying_sequence(gamma_bar_0, r_gamma)
    num_modes = max(len(alphas), len(gammas))
    alphas += [0.0] * (num_modes - len(alphas))
    gammas += [0.0] * (num_modes - len(gammas))

    return EffectiveCouplings(
        model=InteractionModel.IM2,
        alpha_bar=tuple(alphas),
        gamma_bar=tuple(gammas),
        V1=anchor.V1,
        mode_1=anchor.mode_1,
        r_alpha=r_alpha,
        r_gamma=r_gamma,
        alpha_bar_0=alpha_bar_0,
        gamma_bar_0=gamma_bar_0,
    )


def generic_couplings(V: Sequence[float]) -> EffectiveCouplings:
    """Effective couplings from an explicit table V(1), V(2), ... of mode strengths."""
    modes = [mode_couplings(V_m, m) for m, V_m in enumerate(V, start=1)]
    return EffectiveCouplings(
        model=InteractionModel.GENERIC,
        alpha_bar=tuple(min(mode.alpha_bar, 0.0) for mode in modes),
        gamma_bar=tuple(mode.gamma_bar for mode in modes),
        V1=V[0] if V else None,
        mode_1=modes[0] if modes else None,
    )


def default_decay(N: int, rounded: bool = False) -> float:
    """
    Decay constant r ~ 1/sqrt(N) (the inverse of the smallest wave number increment ~ 1/L_F).

    With `rounded`, the reference trap N = 14 uses r = 0.3 instead of 1/sqrt(14) = 0.267.
    """
    if N < 2:
        raise DomainError(f"N must be at least 2, got {N}")
    if rounded and N == REFERENCE_N:
        return REFERENCE_DECAY
    return 1.0 / math.sqrt(N)
