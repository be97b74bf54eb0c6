"""
Closed-form warping complexity in MACs per pixel, kept as exact rationals.

``c_1d(N) = N``, ``c_2d(N) = N**2 + N`` and
``c_2d_block(N, B) = (N**2 - N) / B + 2N``. A B-frame warps two references
with three channels each, hence ``mc_total_bframe = 6 * c_2d_block``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from fractions import Fraction

from .errors import ContractError

__all__ = [
    "ComplexityReport",
    "BFRAME_FACTOR",
    "TABLE2_BLOCK_SIZES",
    "TABLE2_TAPS",
    "MOTION_DECODING_REFERENCE",
    "c_1d",
    "c_2d",
    "c_2d_block",
    "report",
    "table2_grid",
    "reconcile",
    "round_half_up",
]

BFRAME_FACTOR = 6  # 2 references x 3 channels
TABLE2_BLOCK_SIZES = (1, 4, 8)
TABLE2_TAPS = (2, 4, 8, 12)

# Motion-decoder MACs per pixel of the Cool-chic decoder, by block size. These
# are published figures for that network, not something this package computes.
MOTION_DECODING_REFERENCE = {1: 355, 4: 34, 8: 13}


def _check_positive(name: str, value: int) -> None:
    if not isinstance(value, int) or value < 1:
        raise ContractError(f"{name} must be a positive integer, got {value!r}")


def c_1d(N: int) -> Fraction:
    _check_positive("N", N)
    return Fraction(N)


def c_2d(N: int) -> Fraction:
    _check_positive("N", N)
    return (N + 1) * c_1d(N)


def c_2d_block(N: int, B: int) -> Fraction:
    _check_positive("N", N)
    _check_positive("B", B)
    return Fraction(N * N - N, B) + 2 * N


def round_half_up(value: Fraction) -> int:
    """Display rounding: 25.5 -> 26."""
    return (value.numerator * 2 + value.denominator) // (2 * value.denominator)


@dataclass(frozen=True)
class ComplexityReport:
    n_taps: int
    block_size: int
    c1d: Fraction
    c2d: Fraction
    c2d_block: Fraction
    mc_total_bframe: Fraction
    measured: Fraction | None = None

    @property
    def mc_display(self) -> int:
        return round_half_up(self.mc_total_bframe)

    @property
    def needs_rounding(self) -> bool:
        return self.mc_total_bframe.denominator != 1

    def with_measured(self, value: Fraction) -> "ComplexityReport":
        return replace(self, measured=Fraction(value))


def report(N: int, B: int) -> ComplexityReport:
    block = c_2d_block(N, B)
    return ComplexityReport(N, B, c_1d(N), c_2d(N), block, BFRAME_FACTOR * block)


def table2_grid() -> list[list[ComplexityReport]]:
    """Rows ``B in (1, 4, 8)``, columns ``N in (2, 4, 8, 12)``."""
    return [[report(N, B) for N in TABLE2_TAPS] for B in TABLE2_BLOCK_SIZES]


def reconcile(rep: ComplexityReport, counter) -> bool:
    """True iff a measured per-pixel tally equals the analytic block cost exactly."""
    return Fraction(counter.per_pixel()) == rep.c2d_block
