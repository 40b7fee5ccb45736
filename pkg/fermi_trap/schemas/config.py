import json
import math
from enum import StrEnum
from pathlib import Path
from typing import Any, Self

import numpy as np
from pydantic import BaseModel, Field, model_validator

from fermi_trap.constants import OUT_DIR, REFERENCE_N
from fermi_trap.lib.common import CustomBaseModel
from fermi_trap.lib.helpers import grid_from_step
from fermi_trap.lib.specfun import QuadratureSpec
from fermi_trap.theory.couplings import (
    EffectiveCouplings,
    TrapSpec,
    default_decay,
    free_couplings,
    im1_couplings,
    im2_couplings,
)
from fermi_trap.theory.matrix_elements import DEFAULT_P_MAX, TAIL_TOLERANCE
from fermi_trap.theory.observables import DEFAULT_GRID_POINTS, GRID_MARGIN, default_grid


class ModelName(StrEnum):
    IM1 = "im1"
    IM2 = "im2"
    FREE = "free"


class RunConfig(CustomBaseModel):
    """Everything a subcommand needs to reproduce its output; defaults are the figure parameters."""

    N: int = Field(default=REFERENCE_N, ge=2)
    model: ModelName = ModelName.IM1
    alpha_bar_1: float = Field(default=-1.0, le=0)
    # IM2 decay constant; defaults to 1/sqrt(N) (0.3 at N = 14)
    r: float | None = Field(default=None, gt=0)

    m_max: int | None = Field(default=None, ge=0)
    p_max: int = Field(default=DEFAULT_P_MAX, ge=0)
    tail_tolerance: float = Field(default=TAIL_TOLERANCE, gt=0)

    grid_step: float | None = Field(default=None, gt=0)
    grid_points: int = Field(default=DEFAULT_GRID_POINTS, ge=3)

    tolerance: float | None = Field(default=None, gt=0)
    initial_nodes: int | None = Field(default=None, ge=16)

    out_dir: Path = Path(OUT_DIR)

    @model_validator(mode="after")
    def check_table_bounds(self) -> Self:
        # The free model ignores alpha_bar_1 and r, im1 ignores r
        if self.m_max is not None and self.m_max < 2 * self.N - 1:
            raise ValueError(
                f"m_max={self.m_max} must reach the reflection point 2N-1={2 * self.N - 1}"
            )
        return self

    @property
    def decay(self) -> float:
        return self.r if self.r is not None else default_decay(self.N, rounded=True)

    def trap(self) -> TrapSpec:
        return TrapSpec(N=self.N)

    def couplings(self) -> EffectiveCouplings:
        match self.model:
            case ModelName.FREE:
                return free_couplings()
            case ModelName.IM1:
                return im1_couplings(self.alpha_bar_1)
            case ModelName.IM2:
                return im2_couplings(self.alpha_bar_1, self.decay)

    def quadrature(self, base: QuadratureSpec) -> QuadratureSpec:
        """`base` with the configured overrides applied."""
        overrides: dict[str, Any] = {}
        if self.tolerance is not None:
            overrides["rel_tolerance"] = self.tolerance
        if self.initial_nodes is not None:
            overrides["initial_nodes"] = self.initial_nodes
        return QuadratureSpec.model_validate(base.model_dump() | overrides)

    def grid(self) -> np.ndarray:
        trap = self.trap()
        if self.grid_step is None:
            return default_grid(trap, self.grid_points)
        return grid_from_step(trap.half_width + GRID_MARGIN, self.grid_step)


class EdgeConfig(CustomBaseModel):
    N: int = Field(default=REFERENCE_N, ge=2)
    r_gamma: float = Field(default=0.3, gt=0)
    gamma_bar_0: float = Field(default=1.19, ge=0)
    n_points: int = Field(default=41, ge=2)
    out_dir: Path = Path(OUT_DIR)


class DipoleConfig(CustomBaseModel):
    # 53Cr: 6 Bohr magnetons, 53 u, omega_ell = 2 pi x 1 kHz
    mu_bohr: float = Field(default=6.0, gt=0)
    mass_u: float = Field(default=53.0, gt=0)
    omega_ell: float = Field(default=2 * math.pi * 1e3, gt=0)
    omega_t: float | None = Field(default=None, gt=0)
    F: float | None = Field(default=None, gt=0)
    N: int = Field(default=REFERENCE_N, ge=2)
    k_max: float | None = Field(default=None, gt=0)
    n_points: int = Field(default=201, ge=2)
    out_dir: Path = Path(OUT_DIR)

    @model_validator(mode="after")
    def check_transverse_confinement(self) -> Self:
        if (self.omega_t is None) == (self.F is None):
            raise ValueError("Give exactly one of --omega-t and --F")
        return self


def resolve_config[T: BaseModel](
    model: type[T], config_file: Path | None, overrides: dict[str, Any]
) -> T:
    """Built-in defaults < JSON config file < explicit flags (those that are not None)."""
    values: dict[str, Any] = {}
    if config_file is not None:
        values.update(json.loads(config_file.read_text(encoding="utf-8")))
    values.update({key: value for key, value in overrides.items() if value is not None})
    return model.model_validate(values)
