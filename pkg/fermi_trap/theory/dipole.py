"""
Effective 1D dipole-dipole potential between longitudinally aligned dipoles, and the
resulting estimate of the dimensionless coupling V(1).

This module works in SI units; V(1) leaves it dimensionless.
"""

import logging
import math
from typing import Self

import numpy as np
from numpy.typing import ArrayLike
from pydantic import Field, model_validator
from scipy import constants

from fermi_trap.constants import REFERENCE_N
from fermi_trap.exceptions import DomainError
from fermi_trap.lib.common import CustomBaseModel
from fermi_trap.lib.specfun import FloatArray, exp_integral_e1_scaled

logger = logging.getLogger(__name__)

BOHR_MAGNETON = constants.physical_constants["Bohr magneton"][0]
ATOMIC_MASS = constants.physical_constants["atomic mass constant"][0]

# Prefactor of V(1) obtained for N = 14 from the exact mode-strength formula
V1_PREFACTOR = 0.8


class PhysicalParams(CustomBaseModel):
    mu: float = Field(gt=0, description="Magnetic dipole moment [A m^2]")
    m_A: float = Field(gt=0, description="Atomic mass [kg]")
    omega_ell: float = Field(gt=0, description="Longitudinal trap frequency [rad/s]")
    omega_t: float = Field(gt=0, description="Transverse trap frequency [rad/s]")
    N: int = Field(default=REFERENCE_N, ge=2)

    @property
    def alpha_t(self) -> float:
        """Inverse transverse oscillator length [1/m]"""
        return math.sqrt(self.m_A * self.omega_t / constants.hbar)

    @property
    def F(self) -> float:
        """Filling factor N omega_ell / omega_t"""
        return self.N * self.omega_ell / self.omega_t

    @classmethod
    def from_lab_units(
        cls,
        mu_bohr: float,
        mass_u: float,
        omega_ell: float,
        omega_t: float | None = None,
        F: float | None = None,
        N: int = REFERENCE_N,
    ) -> "PhysicalParams":
        """Dipole moment in Bohr magnetons and mass in atomic mass units; give omega_t or F."""
        if (omega_t is None) == (F is None):
            raise DomainError("Exactly one of omega_t and F must be given")
        if F is not None:
            if F <= 0:
                raise DomainError(f"Filling factor must be positive, got {F}")
            omega_t = N * omega_ell / F
        return cls(
            mu=mu_bohr * BOHR_MAGNETON,
            m_A=mass_u * ATOMIC_MASS,
            omega_ell=omega_ell,
            omega_t=omega_t,
            N=N,
        )


class V1Estimate(CustomBaseModel):
    V1: float
    F: float
    prefactor: float = V1_PREFACTOR
    reference_N: int = REFERENCE_N
    N: int
    source: str = "prefactor 0.8 evaluated for N=14 from the exact mode-strength formula"

    @property
    def calibrated(self) -> bool:
        return self.N == self.reference_N

    @model_validator(mode="after")
    def check_positive(self) -> Self:
        if not (self.V1 > 0 and self.F > 0):
            raise ValueError("V(1) and F must be positive")
        return self


def v1d_bracket(x: ArrayLike) -> FloatArray | float:
    """
    1 - x e^x Ei(-x) = 1 + x e^x E1(x) for x = k^2 / (2 alpha_t^2) >= 0.

    Equals 1 at x = 0 and approaches 2 - 1/x for large x.
    """
    x_arr = np.asarray(x, dtype=np.float64)
    if np.any(x_arr < 0):
        raise DomainError("The bracket is defined for x >= 0 only")
    flat = [0.0 if value == 0 else value * exp_integral_e1_scaled(value) for value in x_arr.flat]
    values = 1.0 + np.reshape(flat, x_arr.shape)
    return float(values) if values.ndim == 0 else values


def v1d_momentum(k: ArrayLike, params: PhysicalParams) -> FloatArray | float:
    """V_1D(k) = -(mu_0 mu^2 alpha_t^2 / 2 pi) [1 - x e^x Ei(-x)], x = k^2 / (2 alpha_t^2) [J m]"""
    k_arr = np.asarray(k, dtype=np.float64)
    x = k_arr**2 / (2.0 * params.alpha_t**2)
    amplitude = constants.mu_0 * params.mu**2 * params.alpha_t**2 / (2.0 * math.pi)
    return -amplitude * v1d_bracket(x)


def v1_estimate(params: PhysicalParams) -> V1Estimate:
    scale = (
        constants.mu_0
        * params.mu**2
        * params.m_A**1.5
        * math.sqrt(params.omega_ell)
        / (2.0 * math.pi * constants.hbar**2.5)
    )
    estimate = V1Estimate(V1=V1_PREFACTOR * scale / params.F, F=params.F, N=params.N)
    if not estimate.calibrated:
        logger.warning(
            f"V(1) prefactor was computed for N={REFERENCE_N}; the estimate for N={params.N} "
            "is outside its calibrated regime"
        )
    if estimate.V1 >= 0.5:
        logger.warning(f"V(1)={estimate.V1:.4g} exceeds the stability limit 1/2")
    return estimate


def v1d_scan(
    params: PhysicalParams, k_max: float | None = None, n: int = 201
) -> tuple[FloatArray, FloatArray]:
    """V_1D sampled on 0 <= k <= k_max (default ten inverse transverse lengths)."""
    if n < 2:
        raise DomainError(f"At least 2 samples are needed, got {n}")
    k_max = 10.0 * params.alpha_t if k_max is None else k_max
    if k_max <= 0:
        raise DomainError(f"k_max must be positive, got {k_max}")
    k = np.linspace(0.0, k_max, n)
    return k, np.asarray(v1d_momentum(k, params))
