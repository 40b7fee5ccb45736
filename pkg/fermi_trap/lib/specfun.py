"""
Special functions and periodic quadrature.

Everything here is pure: no function keeps state between calls, and every tolerance is a
parameter (see `QuadratureSpec`). Lengths are measured in units of the oscillator length.
"""

import logging
import math
from collections.abc import Callable
from typing import Literal, Self

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import Field, model_validator
from scipy import integrate
from scipy.special import gammaln

from fermi_trap.exceptions import ConvergenceError, DomainError
from fermi_trap.lib.common import CustomBaseModel

logger = logging.getLogger(__name__)

type FloatArray = NDArray[np.float64]
type PeriodicIntegrand = Callable[..., ArrayLike]

BESSEL_MAX_ARGUMENT = 200.0
# Power series below this |x|, Miller's downward recurrence above
_BESSEL_SERIES_LIMIT = 15.0
_BESSEL_SERIES_EPS = 1e-17
# Start order of the downward recurrence: p + sqrt(_MILLER_DEPTH * |x|) + 20
_MILLER_DEPTH = 80.0
_MILLER_RESCALE = 1e200

# Series for Ei below this |x|, continued fraction at and above
_EI_SERIES_LIMIT = 2.0
_EI_EPS = 1e-16
_EI_MAX_TERMS = 500

_KERNEL_TAYLOR_LIMIT = 1e-6


class QuadratureSpec(CustomBaseModel):
    initial_nodes: int = Field(default=512, ge=16)
    rel_tolerance: float = Field(default=1e-12, gt=0)
    max_doublings: int = Field(default=8, ge=1)

    @model_validator(mode="after")
    def check_power_of_two(self) -> Self:
        if self.initial_nodes & (self.initial_nodes - 1):
            raise ValueError(f"initial_nodes must be a power of two, got {self.initial_nodes}")
        return self


def _as_output(values: FloatArray, like: ArrayLike) -> FloatArray | float:
    return float(values) if np.ndim(like) == 0 else values


def oscillator_wavefunctions(m_max: int, x: ArrayLike) -> FloatArray:
    """
    Normalized oscillator eigenfunctions psi_0..psi_{m_max} evaluated at `x`.

    Uses the three-term recurrence of the normalized functions themselves
    (psi_{n+1} = sqrt(2/(n+1)) x psi_n - sqrt(n/(n+1)) psi_{n-1}), which never forms the
    Hermite polynomials and therefore stays finite where H_n(x) would overflow.

    Returns:
        Array of shape (m_max + 1, *shape(x)).
    """
    if m_max < 0:
        raise DomainError(f"Oscillator index must be non-negative, got {m_max}")

    x_arr = np.asarray(x, dtype=np.float64)
    psi = np.empty((m_max + 1, *x_arr.shape))
    psi[0] = np.pi**-0.25 * np.exp(-0.5 * x_arr * x_arr)
    if m_max >= 1:
        psi[1] = math.sqrt(2.0) * x_arr * psi[0]
    for n in range(1, m_max):
        psi[n + 1] = math.sqrt(2.0 / (n + 1)) * x_arr * psi[n] - math.sqrt(n / (n + 1)) * psi[n - 1]
    return psi


def oscillator_wavefunction(m: int, x: ArrayLike) -> FloatArray | float:
    return _as_output(oscillator_wavefunctions(m, x)[m], x)


def _bessel_i_series(p: int, ax: FloatArray) -> FloatArray:
    half = 0.5 * ax
    if p == 0:
        term = np.ones_like(ax)
    else:
        with np.errstate(divide="ignore"):
            term = np.exp(p * np.log(half) - gammaln(p + 1))

    total = term.copy()
    quarter_sq = half * half
    for k in range(1, 1000):
        term = term * quarter_sq / (k * (k + p))
        total += term
        if np.all(term <= _BESSEL_SERIES_EPS * total):
            break
    return total


def _bessel_i_miller(p: int, ax: FloatArray) -> FloatArray:
    """Downward recurrence normalized with e^x = I_0(x) + 2 sum_k I_k(x)."""
    start = 2 * ((p + int(math.sqrt(_MILLER_DEPTH * float(ax.max()))) + 20) // 2)
    two_over_x = 2.0 / ax

    current = np.ones_like(ax)  # ~ I_j
    above = np.zeros_like(ax)  # ~ I_{j+1}
    wanted = np.zeros_like(ax)
    norm = np.zeros_like(ax)
    for j in range(start, 0, -1):
        if j == p:
            wanted = current.copy()
        norm += 2.0 * current
        current, above = above + j * two_over_x * current, current

        overflow = current > _MILLER_RESCALE
        if np.any(overflow):
            factor = np.where(overflow, 1.0 / _MILLER_RESCALE, 1.0)
            current, above, wanted, norm = (
                current * factor,
                above * factor,
                wanted * factor,
                norm * factor,
            )

    if p == 0:
        wanted = current
    norm += current
    return np.exp(ax) * wanted / norm


def bessel_i(p: int, x: ArrayLike) -> FloatArray | float:
    """
    Modified Bessel function of the first kind I_p(x) for integer order p >= 0.

    Negative arguments use I_p(-x) = (-1)^p I_p(x); the magnitude is always computed for |x|.
    """
    if p < 0:
        raise DomainError(f"Bessel order must be non-negative, got {p} (use I_-p = I_p)")

    x_arr = np.asarray(x, dtype=np.float64)
    ax = np.abs(x_arr)
    if np.any(ax > BESSEL_MAX_ARGUMENT):
        raise DomainError(f"|x| must not exceed {BESSEL_MAX_ARGUMENT}, got {float(ax.max())}")

    flat = ax.ravel()
    values = np.empty_like(flat)
    series = flat <= _BESSEL_SERIES_LIMIT
    if np.any(series):
        values[series] = _bessel_i_series(p, flat[series])
    if not np.all(series):
        values[~series] = _bessel_i_miller(p, flat[~series])

    values = values.reshape(ax.shape)
    if p % 2 == 1:
        values = np.where(x_arr < 0, -values, values)
    return _as_output(values, x)


def _e1_series(x: float) -> float:
    # E1(x) = -gamma - ln(x) - sum_k (-x)^k / (k k!)
    total = 0.0
    term = 1.0
    for k in range(1, _EI_MAX_TERMS):
        term *= -x / k
        contribution = term / k
        total += contribution
        if abs(contribution) < _EI_EPS * abs(total):
            return -np.euler_gamma - math.log(x) - total
    raise ConvergenceError("Exponential integral series did not converge", (total, term))


def _e1_scaled_continued_fraction(x: float) -> float:
    # Modified Lentz evaluation of e^x E1(x)
    tiny = 1e-300
    b = x + 1.0
    c = 1.0 / tiny
    d = 1.0 / b
    h = d
    for i in range(1, _EI_MAX_TERMS):
        a_i = -float(i * i)
        b += 2.0
        d = 1.0 / (a_i * d + b)
        c = b + a_i / c
        delta = c * d
        h *= delta
        if abs(delta - 1.0) < _EI_EPS:
            return h
    raise ConvergenceError("Exponential integral continued fraction did not converge", (h, delta))


def exp_integral_e1_scaled(x: float) -> float:
    """e^x E1(x) for x > 0; finite for arbitrarily large x."""
    if not x > 0:
        raise DomainError(f"E1 needs a positive argument, got {x}")
    if x < _EI_SERIES_LIMIT:
        return math.exp(x) * _e1_series(x)
    return _e1_scaled_continued_fraction(x)


def exp_integral_ei(x: float) -> float:
    """Exponential integral Ei(x) for negative x, using Ei(x) = -E1(-x)."""
    if not x < 0:
        raise DomainError(f"Ei is only provided for negative arguments, got {x}")
    ax = -x
    if ax < _EI_SERIES_LIMIT:
        return -_e1_series(ax)
    return -math.exp(-ax) * _e1_scaled_continued_fraction(ax)


def edge_hypergeometric(g: float, w: float, rel_tolerance: float = 1e-12) -> float:
    """
    3F2(g, 1/2, 1; 1, 3/2; -w).

    The upper parameter 1 cancels the lower 1, leaving 2F1(g, 1/2; 3/2; -w), whose Euler
    integral is int_0^1 (1 + w u^2)^(-g) du. The integral is well behaved for the large
    negative arguments where the series diverges.
    """
    if g < 0 or w < 0:
        raise DomainError(f"g and w must be non-negative, got g={g}, w={w}")
    if g == 0 or w == 0:
        return 1.0

    # The integrand falls off on the scale u ~ 1/sqrt(w)
    knee = min(1.0, 1.0 / math.sqrt(w))
    value, _ = integrate.quad(
        lambda u: math.exp(-g * math.log1p(w * u * u)),
        0.0,
        1.0,
        points=[knee] if knee < 1.0 else None,
        epsabs=0.0,
        epsrel=rel_tolerance,
        limit=200,
    )
    return value


def _wrap(angles: FloatArray) -> FloatArray:
    return (angles + np.pi) % (2.0 * np.pi) - np.pi


def _evaluate(f: PeriodicIntegrand, *axes: FloatArray) -> tuple[float, float]:
    if len(axes) == 1:
        values = np.asarray(f(axes[0]), dtype=np.float64)
        shape: tuple[int, ...] = axes[0].shape
    else:
        values = np.asarray(f(axes[0][:, None], axes[1][None, :]), dtype=np.float64)
        shape = (axes[0].size, axes[1].size)
    values = np.broadcast_to(values, shape)
    return float(values.sum()), float(np.abs(values).sum())


def periodic_integrate(
    f: PeriodicIntegrand, d: Literal[1, 2] = 1, spec: QuadratureSpec | None = None
) -> float:
    """
    Integral of a smooth 2 pi-periodic function over [-pi, pi]^d.

    Uniform (tensor) trapezoid rule on nested offset grids: the first grid is shifted by a
    third of its spacing, and every doubling adds the midpoints of the current grid, so all
    earlier samples are reused and s = 0 is never a node. `f` must accept numpy arrays
    (for d = 2 it is called as f(s[:, None], t[None, :])).

    Raises:
        ConvergenceError: successive estimates still differ after `max_doublings`.
    """
    if d not in (1, 2):
        raise DomainError(f"Only 1 and 2 dimensional integrals are supported, got d={d}")
    spec = spec or QuadratureSpec()

    n = spec.initial_nodes
    spacing = 2.0 * np.pi / n
    nodes = _wrap(-np.pi + spacing / 3.0 + spacing * np.arange(n))
    axes = [nodes] * d

    total, total_abs = _evaluate(f, *axes)
    estimate = total * spacing**d

    for level in range(1, spec.max_doublings + 1):
        new_axes = [_wrap(axis + 0.5 * spacing) for axis in axes]
        if d == 1:
            added, added_abs = _evaluate(f, new_axes[0])
        else:
            blocks = [
                _evaluate(f, new_axes[0], axes[1]),
                _evaluate(f, axes[0], new_axes[1]),
                _evaluate(f, new_axes[0], new_axes[1]),
            ]
            added = sum(block[0] for block in blocks)
            added_abs = sum(block[1] for block in blocks)

        total += added
        total_abs += added_abs
        axes = [np.concatenate([old, new]) for old, new in zip(axes, new_axes, strict=True)]
        n *= 2
        spacing *= 0.5

        previous, estimate = estimate, total * spacing**d
        scale = max(abs(estimate), total_abs * spacing**d)
        if abs(estimate - previous) <= spec.rel_tolerance * scale:
            logger.debug(f"Periodic quadrature (d={d}) converged at level {level} ({n} nodes)")
            return estimate

    raise ConvergenceError(
        f"Periodic quadrature (d={d}) did not converge with {n} nodes per axis",
        (previous, estimate),
    )


def dirichlet_kernel(m: int, N: int, s: ArrayLike) -> FloatArray | float:
    """
    sin((m + 1/2 - N) s) / (2 sin(s / 2)) with the removable singularity at s = 0 resolved.

    For m >= N this equals 1/2 + sum_{j=1}^{m-N} cos(j s); for m < N it is the negative of
    1/2 + sum_{j=1}^{N-1-m} cos(j s).
    """
    a = m + 0.5 - N
    s_arr = np.asarray(s, dtype=np.float64)
    half_sine = np.sin(0.5 * s_arr)
    near_zero = np.abs(half_sine) < _KERNEL_TAYLOR_LIMIT

    with np.errstate(divide="ignore", invalid="ignore"):
        direct = np.sin(a * s_arr) / (2.0 * half_sine)

    s2 = s_arr * s_arr
    a2 = a * a
    taylor = a * (
        1.0 + s2 * (1.0 - 4.0 * a2) / 24.0 + s2 * s2 * (a2 * a2 / 120.0 - a2 / 144.0 + 7.0 / 5760.0)
    )
    return _as_output(np.where(near_zero, taylor, direct), s)
