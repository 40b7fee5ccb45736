"""
Observables built from a matrix element table: occupations, densities, Friedel statistics.

Positions and momenta are dimensionless (oscillator length and its inverse). The oscillator
eigenfunctions are their own Fourier transforms up to a phase (-i)^n, so the momentum
density uses the same wave functions with an extra sign (-1)^p.
"""

import logging
import math
from collections.abc import Sequence
from enum import StrEnum
from pathlib import Path
from typing import Self

import numpy as np
from numpy.typing import ArrayLike
from pydantic import Field, model_validator
from scipy import integrate, signal

from fermi_trap.exceptions import ResolutionError
from fermi_trap.lib.common import CustomBaseModel
from fermi_trap.lib.exports import write_csv
from fermi_trap.lib.helpers import symmetric_grid
from fermi_trap.lib.specfun import FloatArray, oscillator_wavefunctions
from fermi_trap.theory.couplings import TrapSpec
from fermi_trap.theory.matrix_elements import MatrixElementTable

logger = logging.getLogger(__name__)

DEFAULT_GRID_POINTS = 2001
# Grid extends this far beyond the classical turning point L_F
GRID_MARGIN = 6.0
MIN_POINTS_PER_PERIOD = 40

_NEGATIVITY_SLACK = 1e-9
_PARITY_SLACK = 1e-10


class DensityAxis(StrEnum):
    POSITION = "position"
    MOMENTUM = "momentum"


class DensityProfile(CustomBaseModel):
    axis: DensityAxis
    grid: np.ndarray
    values: np.ndarray
    trap: TrapSpec

    @model_validator(mode="after")
    def check_profile(self) -> Self:
        if self.grid.ndim != 1 or self.grid.shape != self.values.shape:
            raise ValueError("grid and values must be one-dimensional arrays of equal length")
        if self.values.size and self.values.min() < -_NEGATIVITY_SLACK:
            raise ValueError(f"Negative density {self.values.min()} on the {self.axis} axis")
        if self.is_symmetric:
            scale = max(1.0, float(np.abs(self.values).max(initial=0.0)))
            if np.abs(self.values - self.values[::-1]).max(initial=0.0) > _PARITY_SLACK * scale:
                raise ValueError(f"The {self.axis} density is not even on a symmetric grid")
        return self

    @property
    def is_symmetric(self) -> bool:
        return bool(np.allclose(self.grid, -self.grid[::-1], rtol=0.0, atol=1e-12))

    @property
    def spacing(self) -> float:
        return float(self.grid[1] - self.grid[0])

    def integral(self) -> float:
        return float(integrate.trapezoid(self.values, self.grid))

    def to_csv(self, path: Path, preamble: list[str] | None = None) -> Path:
        rows = zip(self.grid.tolist(), self.values.tolist(), strict=True)
        return write_csv(path, ("x", "value"), rows, preamble)


class FriedelStats(CustomBaseModel):
    num_maxima: int = Field(ge=0)
    # max - min of the oscillating part over the central half |x| < L_F / 2
    amplitude: float = Field(ge=0)
    period_estimate: float = Field(gt=0)
    baseline_mean: float

    @property
    def relative_amplitude(self) -> float:
        """Amplitude per unit of the smooth background; scales as 1/N for the free gas."""
        return self.amplitude / self.baseline_mean if self.baseline_mean > 0 else 0.0


def occupation_probabilities(table: MatrixElementTable) -> FloatArray:
    """P(m) = M(m, 0), indexed from the ground state m = 0."""
    return table.occupations()


def sum_rule_excess(P: Sequence[float] | FloatArray, N: int) -> float:
    """Delta N = sum_m P(m) - N; P must extend far enough that its tail is negligible."""
    return math.fsum(P) - N


def occupation_slope(P: Sequence[float] | FloatArray, N: int) -> float:
    """Drop P(N-1) - P(N) of the occupation across the Fermi edge, per oscillator state."""
    return float(P[N - 1] - P[N])


def default_grid(trap: TrapSpec, num_points: int = DEFAULT_GRID_POINTS) -> FloatArray:
    return symmetric_grid(trap.half_width + GRID_MARGIN, num_points)


def _density(
    table: MatrixElementTable, grid: ArrayLike | None, alternating: bool, diagonal_only: bool
) -> tuple[FloatArray, FloatArray]:
    x = default_grid(table.trap) if grid is None else np.asarray(grid, dtype=np.float64)
    p_max = 0 if diagonal_only else table.p_max
    psi = oscillator_wavefunctions(table.m_max + p_max, x)

    values = np.zeros_like(x)
    for m, p, element in table.rows():
        if p > p_max or element == 0.0:
            continue
        if p == 0:
            values += element * psi[m] ** 2
        else:
            # p and -p contribute equally
            sign = -1.0 if alternating and p % 2 else 1.0
            values += 2.0 * sign * element * psi[m - p] * psi[m + p]
    return x, values


def particle_density(
    table: MatrixElementTable, grid: ArrayLike | None = None, diagonal_only: bool = False
) -> DensityProfile:
    """n(z) = sum_{m,p} psi_{m-p}(z) psi_{m+p}(z) M(m, p)"""
    x, values = _density(table, grid, alternating=False, diagonal_only=diagonal_only)
    return DensityProfile(axis=DensityAxis.POSITION, grid=x, values=values, trap=table.trap)


def momentum_density(
    table: MatrixElementTable, grid: ArrayLike | None = None, diagonal_only: bool = False
) -> DensityProfile:
    """p(k) = sum_{m,p} (-1)^p psi_{m-p}(k) psi_{m+p}(k) M(m, p)"""
    x, values = _density(table, grid, alternating=True, diagonal_only=diagonal_only)
    return DensityProfile(axis=DensityAxis.MOMENTUM, grid=x, values=values, trap=table.trap)


def _moving_average(values: FloatArray, window: int) -> FloatArray:
    half = window // 2
    padded = np.pad(values, half, mode="edge")
    return np.convolve(padded, np.full(2 * half + 1, 1.0 / (2 * half + 1)), mode="valid")


def friedel_stats(profile: DensityProfile) -> FriedelStats:
    """
    Counts the interior maxima inside |x| < L_F and measures the oscillation amplitude over
    the central half after removing a moving-average baseline one period wide.

    Raises:
        ResolutionError: fewer than MIN_POINTS_PER_PERIOD samples per period pi / k_F.
    """
    trap = profile.trap
    nominal_period = math.pi / trap.fermi_wavenumber
    points_per_period = nominal_period / profile.spacing
    if points_per_period < MIN_POINTS_PER_PERIOD:
        raise ResolutionError(
            f"{points_per_period:.1f} points per oscillation period; "
            f"at least {MIN_POINTS_PER_PERIOD} are needed (grid step <= "
            f"{nominal_period / MIN_POINTS_PER_PERIOD:.4g})"
        )

    x, values = profile.grid, profile.values
    peaks, _ = signal.find_peaks(values)
    interior = peaks[np.abs(x[peaks]) < trap.half_width]

    central = np.abs(x) < 0.5 * trap.half_width
    central_peaks = x[peaks[np.abs(x[peaks]) < 0.5 * trap.half_width]]
    period = float(np.diff(central_peaks).mean()) if central_peaks.size > 1 else nominal_period

    baseline = _moving_average(values, round(points_per_period))
    oscillation = values[central] - baseline[central]

    return FriedelStats(
        num_maxima=int(interior.size),
        amplitude=float(np.ptp(oscillation)) if oscillation.size else 0.0,
        period_estimate=period,
        baseline_mean=float(baseline[central].mean()) if central.any() else 0.0,
    )
