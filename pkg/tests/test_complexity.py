from fractions import Fraction

import pytest

from subpel.complexity import (
    TABLE2_BLOCK_SIZES,
    TABLE2_TAPS,
    c_1d,
    c_2d,
    c_2d_block,
    reconcile,
    report,
    round_half_up,
    table2_grid,
)
from subpel.errors import ContractError
from subpel.frameio import synth_bandlimited
from subpel.motion import MotionField
from subpel.warp import MacCounter, WarpConfig, warp_block, warp_dense

# Motion compensation cells as printed, rows B = 1, 4, 8, columns N = 2, 4, 8, 12.
PRINTED = [[36, 120, 432, 936], [27, 66, 180, 342], [26, 57, 138, 243]]


@pytest.mark.parametrize("N", [2, 8, 12])
def test_c_1d(N):
    assert c_1d(N) == N


@pytest.mark.parametrize("N,expected", [(2, 6), (8, 72), (12, 156)])
def test_c_2d(N, expected):
    assert c_2d(N) == expected


@pytest.mark.parametrize("N,B,expected", [(8, 4, 30), (2, 8, Fraction(17, 4)), (12, 8, Fraction(81, 2))])
def test_c_2d_block(N, B, expected):
    assert c_2d_block(N, B) == expected


@pytest.mark.parametrize("bad", [0, -1])
def test_invalid_arguments(bad):
    with pytest.raises(ContractError):
        c_1d(bad)
    with pytest.raises(ContractError):
        c_2d_block(4, bad)


def test_limit_consistency():
    for N in TABLE2_TAPS:
        assert c_2d_block(N, 1) == c_2d(N)
        assert report(N, 1).c2d == report(N, 1).c2d_block


def test_monotone():
    for N in TABLE2_TAPS:
        values = [c_2d_block(N, B) for B in range(1, 65)]
        assert all(a > b for a, b in zip(values, values[1:]))
    for B in (1, 2, 4, 8, 16):
        values = [c_2d_block(N, B) for N in range(2, 20)]
        assert all(a < b for a, b in zip(values, values[1:]))


def test_grid_matches_printed_table():
    grid = table2_grid()
    assert [[r.block_size for r in row] for row in grid] == [[B] * 4 for B in TABLE2_BLOCK_SIZES]
    exact = [[r.mc_total_bframe for r in row] for row in grid]
    assert exact == [[36, 120, 432, 936], [27, 66, 180, 342], [Fraction(51, 2), 57, 138, 243]]
    assert [[r.mc_display for r in row] for row in grid] == PRINTED
    flagged = [(r.n_taps, r.block_size) for row in grid for r in row if r.needs_rounding]
    assert flagged == [(2, 8)]
    for row in grid:
        for r in row:
            assert r.mc_total_bframe == 6 * r.c2d_block


def test_round_half_up():
    assert round_half_up(Fraction(51, 2)) == 26
    assert round_half_up(Fraction(57)) == 57
    assert round_half_up(Fraction(1, 3)) == 0


class TestReconcile:
    def test_block_warp(self):
        frame = synth_bandlimited(64, 64, 0.5, seed=2)
        _, counter = warp_block(frame, MotionField.uniform(64, 64, 4, 0.25, 0.5), WarpConfig.build(8))
        assert reconcile(report(8, 4), counter)

    def test_dense_warp(self):
        frame = synth_bandlimited(16, 16, 0.5, seed=2)
        _, counter = warp_dense(frame, MotionField.uniform(16, 16, 1, 0.25, 0.5), WarpConfig.build(2))
        assert reconcile(report(2, 1), counter)

    def test_mismatched_taps(self):
        assert not reconcile(report(4, 4), MacCounter(30 * 64, 64))
