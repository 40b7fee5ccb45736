from collections.abc import Callable, Sequence

import numpy as np


def partition[T](
    predicate: Callable[[T], bool], xs: Sequence[T]
) -> tuple[Sequence[T], Sequence[T]]:
    """Partition a sequence into two sequences based on a predicate"""
    return [x for x in xs if predicate(x)], [x for x in xs if not predicate(x)]


def symmetric_grid(half_width: float, num_points: int) -> np.ndarray:
    """Uniform grid on [-half_width, half_width] that contains both end points"""
    if num_points < 3:
        raise ValueError("A grid needs at least 3 points")
    return np.linspace(-half_width, half_width, num_points)


def grid_from_step(half_width: float, step: float) -> np.ndarray:
    """Symmetric grid with (at most) the given step and an odd number of points"""
    num_intervals = 2 * max(1, int(np.ceil(half_width / step)))
    return symmetric_grid(half_width, num_intervals + 1)
