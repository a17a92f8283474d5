import dataclasses
import random
import time

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from util.curves import CurveId, GridPoint, Mode, curve_index, h_index
from util.errors import DomainError, UsageError
from util.h_tables import LEAF_LEVELS, HTables, build_h_tables, h_index_cached


def all_cells(n):
    side = 1 << n
    for x in range(side):
        for y in range(side):
            yield GridPoint(x, y)


def test_single_level_tables():
    tables = build_h_tables(1)
    assert tables.leaf_levels == 1
    for p in all_cells(1):
        assert h_index_cached(tables, p, 1) == h_index(p, 1)


@pytest.mark.parametrize('n', range(1, 7))
def test_matches_recursion_at_every_level(curve_service, n):
    for p in all_cells(n):
        assert h_index_cached(curve_service.tables, p, n) == h_index(p, n)


@pytest.mark.parametrize('n', [7, 8])
def test_matches_recursion_above_block_levels(curve_service, n):
    for p in all_cells(n):
        assert h_index_cached(curve_service.tables, p, n) == h_index(p, n)


def test_small_tables_walk_every_level():
    tables = build_h_tables(5)
    assert tables.leaf_levels == 5
    for p in all_cells(5):
        assert h_index_cached(tables, p, 5) == h_index(p, 5)


@settings(max_examples=300)
@given(st.data())
def test_matches_recursion_at_large_granularity(curve_service, data):
    n = data.draw(st.integers(min_value=9, max_value=31))
    x = data.draw(st.integers(min_value=0, max_value=(1 << n) - 1))
    y = data.draw(st.integers(min_value=0, max_value=(1 << n) - 1))
    p = GridPoint(x, y)
    assert h_index_cached(curve_service.tables, p, n) == h_index(p, n)


@pytest.mark.parametrize('n', [9, 16, 31])
def test_anti_diagonal_ties(curve_service, n):
    side = 1 << n
    for x in range(0, side, max(1, side >> 8)):
        for p in (GridPoint(x, side - 1 - x), GridPoint(x, x), GridPoint(side - 1 - x, x)):
            assert h_index_cached(curve_service.tables, p, n) == h_index(p, n)


def test_tables_are_deterministic():
    assert build_h_tables(8) == build_h_tables(8)


def test_tables_are_immutable():
    tables = build_h_tables(3)
    assert isinstance(tables, HTables)
    with pytest.raises(dataclasses.FrozenInstanceError):
        tables.max_n = 5
    assert isinstance(tables.step, tuple)
    assert all(isinstance(block, tuple) for block in tables.blocks)


def test_table_shapes():
    tables = build_h_tables(12)
    assert tables.state_count == 16
    assert len(tables.apex) == 64
    assert tables.leaf_levels == LEAF_LEVELS
    assert [len(block) for block in tables.blocks] == [0] + [16 << 2 * k for k in range(1, LEAF_LEVELS + 1)]


@pytest.mark.parametrize('max_n', [0, 32])
def test_max_n_bounds(max_n):
    with pytest.raises(DomainError):
        build_h_tables(max_n)


def test_level_above_cap():
    tables = build_h_tables(4)
    with pytest.raises(UsageError, match='max_n=4'):
        h_index_cached(tables, GridPoint(0, 0), 5)


def test_cached_dispatch(curve_service):
    p = GridPoint(12345, 54321)
    cached = curve_index(CurveId.H, p, 16, Mode.CACHED, curve_service.tables)
    assert cached == curve_index(CurveId.H, p, 16)


def best_time(fn, cells, rounds=7):
    best = None
    for _ in range(rounds):
        start = time.perf_counter_ns()
        for p in cells:
            fn(p)
        elapsed = time.perf_counter_ns() - start
        best = elapsed if best is None else min(best, elapsed)
    return best


def test_cached_kernel_not_slower(curve_service):
    rng = random.Random(20240917)
    n = 16
    cells = [GridPoint(rng.randrange(1 << n), rng.randrange(1 << n)) for _ in range(5000)]
    tables = curve_service.tables
    plain = best_time(lambda p: h_index(p, n), cells)
    cached = best_time(lambda p: h_index_cached(tables, p, n), cells)
    assert cached <= 1.10 * plain
