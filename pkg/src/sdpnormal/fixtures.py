"""Worked example systems, as exact data.

Each builder returns a fresh :class:`SemidefSystem`. The reformulation
traces listed here are the operation sequences used to derive the
published normal forms, so they can be replayed and compared entrywise.
"""

from __future__ import annotations

from fractions import Fraction

from .linalg import Mode
from .system import SemidefSystem, replace_step, shift_b, ReformTrace

F = Fraction


def example1():
    """``x1 [[0,1],[1,0]] ⪯ diag(1,0)``: unattained zero dual infimum."""
    return SemidefSystem.from_data([[[0, 1], [1, 0]]], [[1, 0], [0, 0]])


def example2():
    A1 = [[1, 0, 0], [0, 0, 0], [0, 0, 0]]
    A2 = [[0, 0, 1], [0, 1, 0], [1, 0, 0]]
    B = [[1, 0, 0], [0, 1, 0], [0, 0, 0]]
    return SemidefSystem.from_data([A1, A2], B)


def example3():
    A1 = [[0, 0, 0], [0, 0, 1], [0, 1, 0]]
    B = [[1, 0, 0], [0, 0, 0], [0, 0, 0]]
    return SemidefSystem.from_data([A1], B)


LARGE_BAD_A = [
    [[9, 7, 7, 1], [7, 12, 8, -3], [7, 8, 2, 4], [1, -3, 4, 0]],
    [[17, 7, 8, -1], [7, 8, 7, -3], [8, 7, 4, 2], [-1, -3, 2, 0]],
    [[1, 2, 2, 1], [2, 6, 3, -1], [2, 3, 0, 2], [1, -1, 2, 0]],
    [[9, 6, 7, 1], [6, 13, 8, -3], [7, 8, 2, 4], [1, -3, 4, 0]],
]
LARGE_BAD_B = [[45, 26, 29, 2], [26, 47, 31, -12], [29, 31, 10, 14], [2, -12, 14, 0]]

LARGE_BAD_REFORM_A = [
    [[0, 1, 0, 0], [1, -1, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]],
    [[2, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]],
    [[1, 2, 2, 1], [2, 6, 3, -1], [2, 3, 0, 2], [1, -1, 2, 0]],
    [[7, 2, 3, -1], [2, 1, 2, -1], [3, 2, 2, 0], [-1, -1, 0, 0]],
]
Z_LARGE = [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]]
V_LARGE_BAD = [[7, 2, 3, -1], [2, 1, 2, -1], [3, 2, 2, 0], [-1, -1, 0, 0]]
Y1_LARGE_BAD = [[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 1]]
Y2_LARGE_BAD = [[0, 0, 0, 1], [0, 0, 0, 1], [0, 0, 2, 0], [1, 1, 0, 0]]

LARGE_GOOD_A = [
    [[9, 7, 7, 1], [7, 12, 8, -3], [7, 8, 2, 4], [1, -3, 4, -2]],
    [[17, 7, 8, -1], [7, 8, 7, -3], [8, 7, 4, 2], [-1, -3, 2, -4]],
    [[1, 2, 2, 1], [2, 6, 3, -1], [2, 3, 0, 2], [1, -1, 2, 0]],
    [[9, 6, 7, 1], [6, 13, 8, -3], [7, 8, 2, 4], [1, -3, 4, -2]],
]
LARGE_GOOD_B = [[45, 26, 29, 2], [26, 47, 31, -12], [29, 31, 10, 14], [2, -12, 14, -10]]
LARGE_GOOD_REFORM_A = [
    [[0, 1, 0, 0], [1, -1, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]],
    [[2, 1, 0, 0], [1, 0, 0, 0], [0, 0, 0, 0], [0, 0, 0, 0]],
    [[1, 2, 2, 1], [2, 6, 3, -1], [2, 3, 0, 2], [1, -1, 2, 0]],
    [[7, 2, 3, -1], [2, 1, 2, -1], [3, 2, 2, 0], [-1, -1, 0, -2]],
]
Y_LARGE_GOOD = [[0, 0, 0, 0], [0, 0, 0, 0], [0, 0, 1, 0], [0, 0, 0, 1]]


def large_bad():
    return SemidefSystem.from_data(LARGE_BAD_A, LARGE_BAD_B)


def large_bad_reformulated():
    return SemidefSystem.from_data(LARGE_BAD_REFORM_A, Z_LARGE)


def large_good():
    return SemidefSystem.from_data(LARGE_GOOD_A, LARGE_GOOD_B)


def large_good_reformulated():
    return SemidefSystem.from_data(LARGE_GOOD_REFORM_A, Z_LARGE)


def large_example_steps():
    """B := B - A1 - A2 - 2A4; A4 = A4 - 2A3; A2 = A2 - A3 - 2A4; A1 = A1 - 2A3 - A4."""
    return (
        shift_b([-1, -1, 0, -2]),
        replace_step(3, [0, 0, -2, 1]),
        replace_step(1, [0, 1, -1, -2]),
        replace_step(0, [1, 0, -2, -1]),
    )


def large_example_trace() -> ReformTrace:
    return ReformTrace(large_example_steps())


def large_good_reduced():
    """Slater system left after dropping the always-zero variables of the large good normal form."""
    return SemidefSystem.from_data([[[0, 1], [1, -1]], [[2, 1], [1, 0]]], [[1, 0], [0, 1]])


def bonnans_shapiro(alpha=1):
    """``sup x2`` over ``[[x2 - alpha, 0, 0], [0, x1, x2], [0, x2, 0]] ⪯ 0``.

    In ``sum x_i A_i ⪯ B`` form: ``A1 = E22``, ``A2 = E11 + E23 + E32``,
    ``B = alpha * E11``.
    """
    alpha = Fraction(alpha)
    A1 = [[0, 0, 0], [0, 1, 0], [0, 0, 0]]
    A2 = [[1, 0, 0], [0, 0, 1], [0, 1, 0]]
    B = [[alpha, 0, 0], [0, 0, 0], [0, 0, 0]]
    return SemidefSystem.from_data([A1, A2], B)


def map1():
    """``Y -> (y11, 2 y12)`` as constraint matrices."""
    return [[[1, 0], [0, 0]], [[0, 1], [1, 0]]]


def map2():
    """``Y -> (5y11 + 4y22 + 4y13, 3y11 + 3y22 + 2y13, 2y11 + 2y22 + 2y13)``."""
    return [
        [[5, 0, 2], [0, 4, 0], [2, 0, 0]],
        [[3, 0, 1], [0, 3, 0], [1, 0, 0]],
        [[2, 0, 1], [0, 2, 0], [1, 0, 0]],
    ]


MAP2_REFORM_A = [
    [[1, 0, 0], [0, 0, 0], [0, 0, 0]],
    [[1, 0, 0], [0, 1, 0], [0, 0, 0]],
    [[0, 0, 1], [0, 1, 0], [1, 0, 0]],
]
MAP2_REFORM_B = [[1, 0, 0], [0, 1, 0], [0, 0, 0]]


def map2_reformulated():
    return SemidefSystem.from_data(MAP2_REFORM_A, MAP2_REFORM_B)


def map2_steps():
    """A2 = A2 - A3; A1 = A1 - 2A3; A3 = A3 - A1 - A2; then B := A2."""
    return (
        replace_step(1, [0, 1, -1]),
        replace_step(0, [1, 0, -2]),
        replace_step(2, [-1, -1, 1]),
        shift_b([0, 1, 0]),
    )


def homogeneous(mats, mode: Mode = Mode.EXACT):
    return SemidefSystem.from_data(mats, None, mode=mode)


ALL = {
    "example1": example1,
    "example2": example2,
    "example3": example3,
    "large_bad": large_bad,
    "large_good": large_good,
    "bonnans_shapiro": bonnans_shapiro,
    "map1_homogeneous": lambda: homogeneous(map1()),
    "map2_homogeneous": lambda: homogeneous(map2()),
}
