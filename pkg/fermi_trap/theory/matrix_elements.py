"""
One-particle matrix elements M(m, p) = <c+_{m-p} c_{m+p}> of the trapped gas at zero temperature.

Every element has the form

    M(m, p) = delta_{p,0} / 2 - (1 / 4 pi^2) int ds dt D_m(s) cos(p t) exp[-W(s, t)]

with D_m the Dirichlet kernel of the filled Fermi sea and W the mode sum
sum_k (2 / k) (gamma_bar_k - alpha_bar_k cos k t) (1 - cos k s). The IM1 and IM2 couplings
reduce the t integral (Bessel function) or resum W (algebraic power factors); the mode sum
itself is kept as an independent oracle.
"""

import logging
import math
from collections.abc import Callable, Iterator
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Self

import numpy as np
from numpy.typing import ArrayLike
from pydantic import Field, model_validator

from fermi_trap.constants import MAX_WORKERS
from fermi_trap.exceptions import ConvergenceError, DomainError, SingularKernelError
from fermi_trap.lib.common import CustomBaseModel
from fermi_trap.lib.exports import write_csv
from fermi_trap.lib.specfun import (
    FloatArray,
    QuadratureSpec,
    bessel_i,
    dirichlet_kernel,
    periodic_integrate,
)
from fermi_trap.theory.couplings import EffectiveCouplings, InteractionModel, TrapSpec

logger = logging.getLogger(__name__)

DEFAULT_P_MAX = 8
# States above the reflection point 2N-1 included by default
DEFAULT_EXTRA_STATES = 10
TAIL_TOLERANCE = 1e-10

_M_STEP = 5
_P_STEP = 4
_MAX_EXTRA_STATES = 200
_MAX_P = 160
# Slack on |M| <= 1 for quadrature noise
_BOUND_SLACK = 1e-8


def default_quadrature(couplings: EffectiveCouplings) -> QuadratureSpec:
    """Starting resolution per model; the quadrature doubles from here until converged."""
    match couplings.model:
        case InteractionModel.IM2:
            nodes = 256 if abs(couplings.alpha_bar_0 or 0.0) <= 2.0 else 512
            return QuadratureSpec(initial_nodes=nodes, max_doublings=4)
        case InteractionModel.GENERIC:
            return QuadratureSpec(initial_nodes=256, max_doublings=4)
        case _:
            nodes = 1024 if abs(couplings.alpha_bar_1) >= 5.0 else 512
            return QuadratureSpec(initial_nodes=nodes)


def _check_indices(m: int, p: int):
    if m < 0 or m < abs(p):
        raise DomainError(f"Oscillator indices m-p={m - p}, m+p={m + p} must be non-negative")


def _delta(p: int) -> float:
    return 0.5 if p == 0 else 0.0


def free_matrix_element(m: int, p: int, trap: TrapSpec) -> float:
    """Filled Fermi sea: 1 on the diagonal below the edge, 0 elsewhere."""
    _check_indices(m, p)
    return 1.0 if p == 0 and m < trap.N else 0.0


def im1_matrix_element(
    m: int,
    p: int,
    trap: TrapSpec,
    couplings: EffectiveCouplings,
    quadrature: QuadratureSpec | None = None,
) -> float:
    _check_indices(m, p)
    if couplings.num_modes > 1:
        raise DomainError(f"Single-mode couplings required, got {couplings.num_modes} modes")
    quadrature = quadrature or default_quadrature(couplings)

    alpha_bar_1 = couplings.alpha_bar_1
    gamma_bar_1 = couplings.gamma_bar_1
    order = abs(p)

    def integrand(s: FloatArray) -> FloatArray:
        one_minus_cos = 1.0 - np.cos(s)
        # bessel_i handles the negative argument through the parity of I_p
        return (
            dirichlet_kernel(m, trap.N, s)
            * np.exp(-2.0 * gamma_bar_1 * one_minus_cos)
            * bessel_i(order, 2.0 * alpha_bar_1 * one_minus_cos)
        )

    return _delta(p) - periodic_integrate(integrand, d=1, spec=quadrature) / (2.0 * math.pi)


def _im2_weight(couplings: EffectiveCouplings) -> Callable[[FloatArray, FloatArray], FloatArray]:
    """exp[-W(s, t)] of the decaying couplings in closed form, without the kernel or cos(p t)."""
    if (
        couplings.alpha_bar_0 is None
        or couplings.gamma_bar_0 is None
        or couplings.r_alpha is None
        or couplings.r_gamma is None
    ):
        raise DomainError(f"{couplings.model} couplings carry no exponential decay parameters")

    alpha_bar_0 = couplings.alpha_bar_0
    gamma_bar_0 = couplings.gamma_bar_0
    Z_alpha = couplings.Z_alpha
    Z_gamma = couplings.Z_gamma
    if gamma_bar_0 > 0 and Z_gamma <= 0:
        raise SingularKernelError(
            f"Z_gamma={Z_gamma} vanishes for gamma_bar_0={gamma_bar_0}; r_gamma must be positive"
        )

    def weight(s: FloatArray, t: FloatArray) -> FloatArray:
        cos_s, cos_t = np.cos(s), np.cos(t)
        log_weight = np.zeros(np.broadcast_shapes(s.shape, t.shape))

        if alpha_bar_0 != 0.0:
            base_t = 1.0 + Z_alpha - cos_t
            # (1 + Z - cos(t - s)) (1 + Z - cos(t + s)) without forming t +- s
            base_pair = (1.0 + Z_alpha - cos_t * cos_s) ** 2 - (np.sin(t) * np.sin(s)) ** 2
            if np.min(base_t) <= 0 or np.min(base_pair) <= 0:
                raise SingularKernelError(f"Non-positive power base for Z_alpha={Z_alpha}")
            log_weight = log_weight - alpha_bar_0 * np.log(base_t)
            log_weight = log_weight + 0.5 * alpha_bar_0 * np.log(base_pair)

        if gamma_bar_0 != 0.0:
            base_s = 1.0 + Z_gamma - cos_s
            log_weight = log_weight + gamma_bar_0 * (math.log(Z_gamma) - np.log(base_s))

        return np.exp(log_weight)

    return weight


def im2_matrix_element(
    m: int,
    p: int,
    trap: TrapSpec,
    couplings: EffectiveCouplings,
    quadrature: QuadratureSpec | None = None,
) -> float:
    _check_indices(m, p)
    weight = _im2_weight(couplings)
    quadrature = quadrature or default_quadrature(couplings)

    def integrand(s: FloatArray, t: FloatArray) -> FloatArray:
        return dirichlet_kernel(m, trap.N, s) * np.cos(p * t) * weight(s, t)

    integral = periodic_integrate(integrand, d=2, spec=quadrature)
    return _delta(p) - integral / (4.0 * math.pi**2)


def im2_matrix_block(
    trap: TrapSpec,
    couplings: EffectiveCouplings,
    m_max: int,
    p_max: int,
    quadrature: QuadratureSpec | None = None,
) -> FloatArray:
    """
    Every IM2 element with m <= m_max and 0 <= p <= p_max at once, as an array indexed [m, p]
    (slots with m < p are meaningless).

    Same trapezoid rule as `im2_matrix_element` on a uniform grid: one real FFT per s node gives
    all cos(p t) moments, and one matrix product with the Dirichlet kernels gives all m. The grid
    doubles until no element moves by more than the quadrature tolerance.

    Raises:
        ConvergenceError: if the block is still moving after the last doubling.
    """
    if m_max < 0 or p_max < 0:
        raise DomainError(f"Block bounds must be non-negative, got m_max={m_max}, p_max={p_max}")
    weight = _im2_weight(couplings)
    quadrature = quadrature or default_quadrature(couplings)

    n = quadrature.initial_nodes
    while n < 4 * (p_max + 1) or n < 2 * (m_max + 1):
        n *= 2
    orders = np.arange(p_max + 1)

    previous: FloatArray | None = None
    change = math.inf
    for _ in range(quadrature.max_doublings + 1):
        h = 2.0 * math.pi / n
        nodes = -math.pi + h / 3.0 + h * np.arange(n)
        samples = weight(nodes[:, None], nodes[None, :])
        moments = np.fft.rfft(samples, axis=1)[:, : p_max + 1]
        cos_moments = np.real(moments * np.exp(-1j * orders * nodes[0]))
        kernels = np.stack([dirichlet_kernel(m, trap.N, nodes) for m in range(m_max + 1)])
        block = -(kernels @ cos_moments) * h * h / (4.0 * math.pi**2)
        block[:, 0] += 0.5
        if previous is not None:
            change = float(np.max(np.abs(block - previous)))
            if change <= quadrature.rel_tolerance:
                return block
            logger.debug(f"IM2 block on {n} nodes moved by {change:.3g}")
        previous = block
        n *= 2

    assert previous is not None
    raise ConvergenceError(
        f"IM2 block not converged after {quadrature.max_doublings} doublings",
        (change, float(np.max(np.abs(previous)))),
    )


def im2_edge_drop(
    couplings: EffectiveCouplings, quadrature: QuadratureSpec | None = None
) -> float:
    """
    P(N - 1) - P(N) for IM2 couplings, the same for every N.

    The Dirichlet kernels of the two states are -1/2 and +1/2, so the drop is the mean of
    exp[-W(s, t)] over the torus.
    """
    weight = _im2_weight(couplings)
    quadrature = quadrature or default_quadrature(couplings)
    return periodic_integrate(weight, d=2, spec=quadrature) / (4.0 * math.pi**2)


def w_function(u: ArrayLike, v: ArrayLike, couplings: EffectiveCouplings) -> FloatArray | float:
    """
    W(u, v) = 2 sum_m (1/m) [gamma_bar_m - alpha_bar_m cos m(u+v)] [1 - cos m(u-v)], summed
    over both branches through the branch averages and truncated with the couplings.
    """
    u_arr = np.asarray(u, dtype=np.float64)
    v_arr = np.asarray(v, dtype=np.float64)
    total_angle = u_arr + v_arr
    relative_angle = u_arr - v_arr
    total = np.zeros(np.broadcast_shapes(u_arr.shape, v_arr.shape))
    for m in range(1, couplings.num_modes + 1):
        coupling = couplings.gamma_bar_at(m) - couplings.alpha_bar_at(m) * np.cos(m * total_angle)
        total += coupling * (1.0 - np.cos(m * relative_angle)) / m
    total *= 2.0
    return float(total) if total.ndim == 0 else total


def _mode_sum_exponent(
    s: FloatArray, t: FloatArray, couplings: EffectiveCouplings, K: int
) -> FloatArray:
    # W((t+s)/2, (t-s)/2) on the tensor grid s x t as a single matrix product over modes
    k = np.arange(1, K + 1, dtype=np.float64)
    alphas = np.array([couplings.alpha_bar_at(int(mode)) for mode in k])
    gammas = np.array([couplings.gamma_bar_at(int(mode)) for mode in k])

    one_minus_cos = 1.0 - np.cos(np.outer(s, k))
    damping = one_minus_cos @ (2.0 * gammas / k)
    mixing = (one_minus_cos * (2.0 * alphas / k)) @ np.cos(np.outer(k, t))
    return damping[:, None] - mixing


def mode_sum_oracle(
    m: int,
    p: int,
    trap: TrapSpec,
    couplings: EffectiveCouplings,
    K: int | None = None,
    quadrature: QuadratureSpec | None = None,
) -> float:
    """
    Brute-force M(m, p) from the untruncated mode sum with K modes (default: every stored mode).

    Valid for any couplings, so it doubles as the evaluator of generic coupling tables.
    """
    _check_indices(m, p)
    K = couplings.num_modes if K is None else K
    if K < 0:
        raise DomainError(f"Mode cutoff must be non-negative, got K={K}")
    quadrature = quadrature or QuadratureSpec(initial_nodes=256, max_doublings=4)

    def integrand(s: FloatArray, t: FloatArray) -> FloatArray:
        s_axis, t_axis = s[:, 0], t[0, :]
        weight = np.cos(p * t_axis)[None, :]
        if K:
            weight = weight * np.exp(-_mode_sum_exponent(s_axis, t_axis, couplings, K))
        return dirichlet_kernel(m, trap.N, s_axis)[:, None] * weight

    integral = periodic_integrate(integrand, d=2, spec=quadrature)
    return _delta(p) - integral / (4.0 * math.pi**2)


def matrix_element(
    m: int,
    p: int,
    trap: TrapSpec,
    couplings: EffectiveCouplings,
    quadrature: QuadratureSpec | None = None,
) -> float:
    match couplings.model:
        case InteractionModel.FREE:
            return free_matrix_element(m, p, trap)
        case InteractionModel.IM1:
            return im1_matrix_element(m, p, trap, couplings, quadrature)
        case InteractionModel.IM2:
            return im2_matrix_element(m, p, trap, couplings, quadrature)
        case InteractionModel.GENERIC:
            return mode_sum_oracle(m, p, trap, couplings, quadrature=quadrature)


class MatrixElementTable(CustomBaseModel):
    """
    M(m, p) for 0 <= p <= min(m, p_max) and m <= m_max.

    Only p >= 0 is stored; M(m, -p) = M(m, p). Elements outside the stored range are zero
    to within `tail_tolerance`.
    """

    trap: TrapSpec
    couplings: EffectiveCouplings
    quadrature: QuadratureSpec
    m_max: int = Field(ge=0)
    p_max: int = Field(ge=0)
    tail_tolerance: float = TAIL_TOLERANCE
    entries: dict[tuple[int, int], float]

    @model_validator(mode="after")
    def check_entries(self) -> Self:
        for (m, p), value in self.entries.items():
            if not 0 <= p <= min(m, self.p_max) or m > self.m_max:
                raise ValueError(f"Entry (m={m}, p={p}) lies outside the table bounds")
            if not abs(value) <= 1.0 + _BOUND_SLACK:
                raise ValueError(f"|M({m}, {p})| = {abs(value)} exceeds 1")
        return self

    def value(self, m: int, p: int) -> float:
        _check_indices(m, p)
        if m > self.m_max or abs(p) > self.p_max:
            return 0.0
        return self.entries[(m, abs(p))]

    def occupations(self) -> FloatArray:
        """P(m) = M(m, 0) for m = 0..m_max (state m is the (m+1)-th oscillator level)."""
        return np.array([self.entries[(m, 0)] for m in range(self.m_max + 1)])

    def diagonal_only(self) -> "MatrixElementTable":
        return self.model_copy(
            update={
                "p_max": 0,
                "entries": {key: value for key, value in self.entries.items() if key[1] == 0},
            }
        )

    def reflection_residual(self) -> float:
        """max |M(2N-1-m, p) + M(m, p) - delta_{p,0}| over every pair inside the table."""
        mirror = 2 * self.trap.N - 1
        if self.m_max < mirror:
            raise DomainError(f"Table ends at m={self.m_max}, below the reflection point {mirror}")
        residuals = [
            abs(self.value(mirror - m, p) + self.value(m, p) - (1.0 if p == 0 else 0.0))
            for m in range(mirror + 1)
            for p in range(min(m, mirror - m, self.p_max) + 1)
        ]
        return max(residuals)

    def rows(self) -> Iterator[tuple[int, int, float]]:
        for m in range(self.m_max + 1):
            for p in range(min(m, self.p_max) + 1):
                yield m, p, self.entries[(m, p)]

    def to_csv(self, path: Path, preamble: list[str] | None = None) -> Path:
        return write_csv(path, ("m", "p", "value"), self.rows(), preamble)


def _row_tail(entries: dict[tuple[int, int], float], m_max: int, p_max: int) -> float:
    return max(abs(entries[(m_max, p)]) for p in range(min(m_max, p_max) + 1))


def _column_tail(entries: dict[tuple[int, int], float], m_max: int, p_max: int) -> float:
    if p_max == 0:
        # Diagonal-only tables never grow sideways
        return 0.0
    return max((abs(entries[(m, p_max)]) for m in range(p_max, m_max + 1)), default=0.0)


def build_table(
    trap: TrapSpec,
    couplings: EffectiveCouplings,
    m_max: int | None = None,
    p_max: int = DEFAULT_P_MAX,
    quadrature: QuadratureSpec | None = None,
    tail_tolerance: float = TAIL_TOLERANCE,
    max_workers: int = MAX_WORKERS,
) -> MatrixElementTable:
    """
    Evaluates every M(m, p) with p >= 0 (on a thread pool, or as one block for IM2), then
    keeps adding rows (m) and columns (p) while the outermost ones still hold elements above
    `tail_tolerance`.
    """
    m_max = 2 * trap.N - 1 + DEFAULT_EXTRA_STATES if m_max is None else m_max
    if m_max < 0 or p_max < 0:
        raise DomainError(f"Table bounds must be non-negative, got m_max={m_max}, p_max={p_max}")
    quadrature = quadrature or default_quadrature(couplings)
    m_cap = max(m_max, 2 * trap.N - 1 + _MAX_EXTRA_STATES)
    p_cap = max(p_max, _MAX_P)

    entries: dict[tuple[int, int], float] = {}

    def evaluate(key: tuple[int, int]) -> float:
        return matrix_element(*key, trap, couplings, quadrature)

    with ThreadPoolExecutor(max_workers=max_workers) as executor:

        def fill(m_hi: int, p_hi: int):
            if couplings.model == InteractionModel.IM2:
                block = im2_matrix_block(trap, couplings, m_hi, p_hi, quadrature)
                entries.update(
                    ((m, p), float(block[m, p]))
                    for m in range(m_hi + 1)
                    for p in range(min(m, p_hi) + 1)
                )
                return
            missing = [
                (m, p)
                for m in range(m_hi + 1)
                for p in range(min(m, p_hi) + 1)
                if (m, p) not in entries
            ]
            entries.update(zip(missing, executor.map(evaluate, missing), strict=True))

        fill(m_max, p_max)
        while True:
            row_tail = _row_tail(entries, m_max, p_max)
            column_tail = _column_tail(entries, m_max, p_max)
            if row_tail <= tail_tolerance and column_tail <= tail_tolerance:
                break
            if (row_tail > tail_tolerance and m_max >= m_cap) or (
                column_tail > tail_tolerance and p_max >= p_cap
            ):
                raise ConvergenceError(
                    f"Table tails still above {tail_tolerance} at m_max={m_max}, p_max={p_max}",
                    (row_tail, column_tail),
                )
            if row_tail > tail_tolerance:
                m_max = min(m_max + _M_STEP, m_cap)
            if column_tail > tail_tolerance:
                p_max = min(p_max + _P_STEP, p_cap)
            logger.debug(
                f"Extending table to m_max={m_max}, p_max={p_max} "
                f"(row tail {row_tail:.3g}, column tail {column_tail:.3g})"
            )
            fill(m_max, p_max)

    logger.debug(f"Built {couplings.model} table with {len(entries)} elements for N={trap.N}")
    return MatrixElementTable(
        trap=trap,
        couplings=couplings,
        quadrature=quadrature,
        m_max=m_max,
        p_max=p_max,
        tail_tolerance=tail_tolerance,
        entries=entries,
    )
