import itertools
from dataclasses import dataclass
from typing import Optional, Tuple

from util.curves import (
    PHASE_A,
    CurveIndex,
    GridPoint,
    check_granularity,
    check_point,
    half_square_rank,
    in_half_square,
    interleave,
    owns_lower,
    takes_diagonal,
)
from util.errors import UsageError

# 2x2 signed permutation matrices (a, b, c, d) = [[a, b], [c, d]]
Matrix = Tuple[int, int, int, int]

IDENTITY: Matrix = (1, 0, 0, 1)
HALF_TURN: Matrix = (-1, 0, 0, -1)
# child canonical frame from the parent's apex-block frame
TO_CHILD_B: Matrix = (0, -1, 1, 0)
TO_CHILD_C: Matrix = (0, 1, -1, 0)

# levels below this are resolved by one block lookup
LEAF_LEVELS = 6

RANK_OUTSIDE = -1
# apex markers in the step table; marker + 1 is the mask xor-ed onto x ^ y
SEEK_DIFFERENT = -1
SEEK_EQUAL = -2


def _mul(g: Matrix, f: Matrix) -> Matrix:
    a, b, c, d = g
    e, f_, g_, h = f
    return (a * e + b * g_, a * f_ + b * h, c * e + d * g_, c * f_ + d * h)


def _apply(g: Matrix, x: int, y: int):
    return g[0] * x + g[1] * y, g[2] * x + g[3] * y


def _canonical(g: Matrix, x: int, y: int, side: int):
    cu, cv = _apply(g, 2 * x + 1 - side, 2 * y + 1 - side)
    return (cu + side - 1) >> 1, (cv + side - 1) >> 1


def _local(g: Matrix, u: int, v: int, side: int):
    # inverse of a signed permutation is its transpose
    gx, gy = _apply((g[0], g[2], g[1], g[3]), 2 * u + 1 - side, 2 * v + 1 - side)
    return (gx + side - 1) >> 1, (gy + side - 1) >> 1


def _orientations():
    result = []
    for (a, b), (c, d) in itertools.product(((1, 0), (-1, 0), (0, 1), (0, -1)), repeat=2):
        if a * d - b * c in (1, -1):
            result.append((a, b, c, d))
    return tuple(sorted(result))


@dataclass(frozen=True)
class HTables:
    """H-curve 캐시 테이블 (상태 = 방향 x 위상, 항목 = 다음 상태 << 4 | 자식 번호)"""
    max_n: int
    leaf_levels: int
    step: Tuple[Optional[int], ...]
    apex: Tuple[int, ...]
    blocks: Tuple[Tuple[int, ...], ...]
    lower_state: int
    upper_state: int

    @property
    def state_count(self) -> int:
        return len(self.step) >> 2

    def index(self, p: GridPoint, n: int) -> CurveIndex:
        return h_index_cached(self, p, n)


def _apex_row(g: Matrix, phase: int, b_entry: int, c_entry: int):
    # a 4x4 block has one bit below the apex level, which fixes every case
    picks = [0] * 4
    seek = SEEK_DIFFERENT
    other = phase ^ 1
    for x, y in itertools.product(range(4), repeat=2):
        u, v = _canonical(g, x, y, 4)
        if u < 2 or v >= 2:
            continue
        xa = u - 2
        tie = xa + v == 1
        to_b = xa + v < 1 or (tie and takes_diagonal(xa, other))
        picks[2 * tie + (x & 1)] = b_entry if to_b else c_entry
        if tie:
            seek = SEEK_DIFFERENT if (x ^ y) & 1 == 0 else SEEK_EQUAL
    return seek, picks


def _block_table(level: int, orientations, state_ids) -> Tuple[int, ...]:
    side = 1 << level
    table = [RANK_OUTSIDE] * (len(state_ids) << 2 * level)
    for phase in (PHASE_A, PHASE_A ^ 1):
        cells = [
            (u, v, half_square_rank(u, v, side, phase))
            for u in range(side)
            for v in range(u + 1)
            if in_half_square(u, v, phase)
        ]
        for g in orientations:
            base = state_ids[(g, phase)] << 2 * level
            for u, v, rank in cells:
                x, y = _local(g, u, v, side)
                table[base | interleave(x, y)] = rank
    return tuple(table)


def build_h_tables(max_n: int) -> HTables:
    """H-curve 캐시 테이블 생성"""
    max_n = check_granularity(max_n)
    leaf_levels = min(max_n, LEAF_LEVELS)
    orientations = _orientations()
    states = [(g, phase) for g in orientations for phase in (PHASE_A, PHASE_A ^ 1)]
    state_ids = {state: sid for sid, state in enumerate(states)}

    step, apex = [], []
    for sid, (g, phase) in enumerate(states):
        other = phase ^ 1
        b_entry = state_ids[(_mul(TO_CHILD_B, g), other)] << 4 | 1
        c_entry = state_ids[(_mul(TO_CHILD_C, g), other)] << 4 | 2
        seek, picks = _apex_row(g, phase, b_entry, c_entry)
        for q in range(4):
            su, sv = _apply(g, 2 * (q & 1) - 1, 2 * (q >> 1) - 1)
            if su < 0 and sv < 0:
                step.append(sid << 4)
            elif su > 0 and sv > 0:
                step.append(sid << 4 | 3)
            elif su > 0:
                step.append(seek)
            else:
                step.append(None)
        apex.extend(picks)

    blocks = [()]
    for level in range(1, leaf_levels + 1):
        blocks.append(_block_table(level, orientations, state_ids))

    return HTables(
        max_n=max_n,
        leaf_levels=leaf_levels,
        step=tuple(step),
        apex=tuple(apex),
        blocks=tuple(blocks),
        lower_state=state_ids[(IDENTITY, PHASE_A)] << 2,
        upper_state=state_ids[(HALF_TURN, PHASE_A)] << 2,
    )


def h_index_cached(tables: HTables, p: GridPoint, n: int) -> CurveIndex:
    """테이블 조회만으로 h_index 계산"""
    check_point(p, n)
    if n > tables.max_n:
        raise UsageError(f"H tables built for max_n={tables.max_n}, requested n={n}")
    x, y = p.x, p.y
    if owns_lower(x, y):
        state, rank = tables.lower_state, 0
    else:
        state, rank = tables.upper_state, 1 << (2 * n - 1)

    z = interleave(x, y)
    d = x ^ y
    low = min(n, tables.leaf_levels)
    step, apex = tables.step, tables.apex
    digits = 0
    for s2 in range(2 * n - 2, 2 * low - 2, -2):
        e = step[state | ((z >> s2) & 3)]
        if e < 0:
            # b or c child: the highest lower bit where x and y differ (or agree) decides
            r = (d ^ (e + 1)) & ((1 << (s2 >> 1)) - 1)
            if r:
                e = apex[state | ((x >> (r.bit_length() - 1)) & 1)]
            else:
                e = apex[state | 2 | (x & 1)]
        digits = (digits << 2) | (e & 3)
        state = e >> 2
    block = tables.blocks[low][(state << (2 * low - 2)) | (z & ((1 << 2 * low) - 1))]
    return CurveIndex(rank + (digits << (2 * low - 1)) + block, n)
