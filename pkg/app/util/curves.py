from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import TYPE_CHECKING, Optional

import numpy as np
from hilbertcurve.hilbertcurve import HilbertCurve

from util.errors import DomainError, UsageError

if TYPE_CHECKING:
    from util.h_tables import HTables

MIN_GRANULARITY = 1
MAX_GRANULARITY = 31

PHASE_A = 0
PHASE_B = 1


class CurveId(str, Enum):
    Z = 'z'
    GRAY_Z = 'grayz'
    HILBERT = 'hilbert'
    H = 'h'

    @property
    def label(self) -> str:
        return _CURVE_LABELS[self]

    @classmethod
    def parse(cls, name: str) -> 'CurveId':
        """이름(z, grayz, hilbert, h)으로 곡선 선택"""
        try:
            return cls(name.strip().lower())
        except ValueError:
            raise UsageError(f"unknown curve: {name!r} (expected one of z, grayz, hilbert, h)")


_CURVE_LABELS = {
    CurveId.Z: 'Z',
    CurveId.GRAY_Z: 'GrayZ',
    CurveId.HILBERT: 'Hilbert',
    CurveId.H: 'H',
}


class Mode(str, Enum):
    PLAIN = 'plain'
    CACHED = 'cached'


@dataclass(frozen=True)
class GridPoint:
    x: int
    y: int


@dataclass(frozen=True)
class CurveIndex:
    value: int
    n: int


def check_granularity(n: int) -> int:
    """세분화 수준 검사 (1..31)"""
    if isinstance(n, bool) or not isinstance(n, (int, np.integer)):
        raise DomainError(f"granularity must be an integer: {n!r}")
    if n < MIN_GRANULARITY or n > MAX_GRANULARITY:
        raise DomainError(f"granularity out of range [{MIN_GRANULARITY}, {MAX_GRANULARITY}]: {n}")
    return int(n)


def check_point(p: GridPoint, n: int) -> None:
    """격자 좌표 범위 검사"""
    side = 1 << check_granularity(n)
    if not 0 <= p.x < side:
        raise DomainError(f"x out of range [0, {side}) for n={n}: {p.x}")
    if not 0 <= p.y < side:
        raise DomainError(f"y out of range [0, {side}) for n={n}: {p.y}")


def check_index(i: CurveIndex) -> None:
    """곡선 인덱스 범위 검사"""
    cells = 1 << (2 * check_granularity(i.n))
    if not 0 <= i.value < cells:
        raise DomainError(f"index out of range [0, 4^{i.n}): {i.value}")


# Z-order

def _spread_bits(v: int) -> int:
    v &= 0xFFFFFFFF
    v = (v | (v << 16)) & 0x0000FFFF0000FFFF
    v = (v | (v << 8)) & 0x00FF00FF00FF00FF
    v = (v | (v << 4)) & 0x0F0F0F0F0F0F0F0F
    v = (v | (v << 2)) & 0x3333333333333333
    v = (v | (v << 1)) & 0x5555555555555555
    return v


def _compact_bits(v: int) -> int:
    v &= 0x5555555555555555
    v = (v | (v >> 1)) & 0x3333333333333333
    v = (v | (v >> 2)) & 0x0F0F0F0F0F0F0F0F
    v = (v | (v >> 4)) & 0x00FF00FF00FF00FF
    v = (v | (v >> 8)) & 0x0000FFFF0000FFFF
    v = (v | (v >> 16)) & 0x00000000FFFFFFFF
    return v


def interleave(x: int, y: int) -> int:
    """x 비트는 짝수 위치, y 비트는 홀수 위치"""
    return _spread_bits(x) | (_spread_bits(y) << 1)


def deinterleave(code: int):
    return _compact_bits(code), _compact_bits(code >> 1)


def z_index(p: GridPoint, n: int) -> CurveIndex:
    """Z-order (Morton) 인덱스"""
    check_point(p, n)
    return CurveIndex(interleave(p.x, p.y), n)


def z_point(i: CurveIndex) -> GridPoint:
    check_index(i)
    x, y = deinterleave(i.value)
    return GridPoint(x, y)


# Gray-coded Z

def to_gray(x: int) -> int:
    return (x >> 1) ^ x


def from_gray(g: int) -> int:
    x, e = g, 1
    while x:
        x = g >> e
        e *= 2
        g ^= x
    return g


def gray_z_index(p: GridPoint, n: int) -> CurveIndex:
    """Gray 코드 순서로 방문하는 Z 인덱스"""
    check_point(p, n)
    return CurveIndex(from_gray(interleave(p.x, p.y)), n)


def gray_z_point(i: CurveIndex) -> GridPoint:
    check_index(i)
    x, y = deinterleave(to_gray(i.value))
    return GridPoint(x, y)


# Hilbert

@lru_cache(maxsize=None)
def _hilbert_curve(n: int) -> HilbertCurve:
    return HilbertCurve(p=n, n=2)


def hilbert_index(p: GridPoint, n: int) -> CurveIndex:
    """Hilbert 인덱스, n=1 방문 순서 (0,0), (0,1), (1,1), (1,0)"""
    check_point(p, n)
    return CurveIndex(_hilbert_curve(n).distance_from_point([p.x, p.y]), n)


def hilbert_point(i: CurveIndex) -> GridPoint:
    check_index(i)
    x, y = _hilbert_curve(i.n).point_from_distance(i.value)
    return GridPoint(x, y)


# H-curve

def takes_diagonal(position: int, phase: int) -> bool:
    """반정사각형 삼각형이 빗변 위 칸을 소유하는지 (A: 짝수 위치, B: 홀수 위치)"""
    return (position & 1) == phase


def owns_lower(x: int, y: int) -> bool:
    """최상위 하단 삼각형(L)의 칸인지"""
    return x > y or (x == y and x % 2 == 0)


def in_half_square(u: int, v: int, phase: int) -> bool:
    """정규 좌표 (u, v)가 해당 위상의 반정사각형에 속하는지"""
    return u > v or (u == v and takes_diagonal(u, phase))


def half_square_rank(u: int, v: int, m: int, phase: int) -> int:
    """한 변이 m인 정규 반정사각형 안에서의 순번"""
    rank = 0
    h = m >> 1
    while h > 1:
        if u >= h:
            unit = h * h >> 1
            u -= h
            if v >= h:
                rank += 3 * unit
                v -= h
            else:
                # apex block, split by its anti-diagonal into two opposite-phase triangles
                phase ^= 1
                bu = h - 1 - v
                if bu > u or (bu == u and takes_diagonal(bu, phase)):
                    rank += unit
                    u, v = bu, u
                else:
                    rank += 2 * unit
                    u, v = v, h - 1 - u
        h >>= 1
    return rank + (u if phase == PHASE_A else v)


def half_square_cell(r: int, m: int, phase: int):
    """half_square_rank의 역변환"""
    digits = []
    h = m >> 1
    while h > 1:
        q, r = divmod(r, h * h >> 1)
        digits.append(q)
        if q == 1 or q == 2:
            phase ^= 1
        h >>= 1
    u, v = (r, 0) if phase == PHASE_A else (1, r)
    h = 2
    for q in reversed(digits):
        if q == 3:
            u, v = h + u, h + v
        elif q == 1:
            u, v = h + v, h - 1 - u
        elif q == 2:
            u, v = 2 * h - 1 - v, u
        h <<= 1
    return u, v


def h_index(p: GridPoint, n: int) -> CurveIndex:
    """닫힌 H-curve 인덱스 (하단 삼각형 L 다음 180도 회전한 U)"""
    check_point(p, n)
    s = 1 << n
    if owns_lower(p.x, p.y):
        return CurveIndex(half_square_rank(p.x, p.y, s, PHASE_A), n)
    return CurveIndex((s * s >> 1) + half_square_rank(s - 1 - p.x, s - 1 - p.y, s, PHASE_A), n)


def h_point(i: CurveIndex) -> GridPoint:
    check_index(i)
    s = 1 << i.n
    half = s * s >> 1
    if i.value < half:
        x, y = half_square_cell(i.value, s, PHASE_A)
        return GridPoint(x, y)
    cu, cv = half_square_cell(i.value - half, s, PHASE_A)
    return GridPoint(s - 1 - cu, s - 1 - cv)


_INDEX_FUNCTIONS = {
    CurveId.Z: z_index,
    CurveId.GRAY_Z: gray_z_index,
    CurveId.HILBERT: hilbert_index,
    CurveId.H: h_index,
}

_POINT_FUNCTIONS = {
    CurveId.Z: z_point,
    CurveId.GRAY_Z: gray_z_point,
    CurveId.HILBERT: hilbert_point,
    CurveId.H: h_point,
}


def curve_index(c: CurveId, p: GridPoint, n: int, mode: Mode = Mode.PLAIN,
                tables: Optional['HTables'] = None) -> CurveIndex:
    """곡선별 인덱스 계산 (H는 cached 모드 지원)"""
    if Mode(mode) == Mode.CACHED:
        if c != CurveId.H:
            raise UsageError(f"cached mode is only available for the H curve, not {CurveId(c).label}")
        if tables is None:
            raise UsageError("cached mode requested without prebuilt H tables")
        return tables.index(p, n)
    return _INDEX_FUNCTIONS[CurveId(c)](p, n)


def curve_point(c: CurveId, i: CurveIndex) -> GridPoint:
    """곡선별 역변환"""
    return _POINT_FUNCTIONS[CurveId(c)](i)


def curve_order(c: CurveId, n: int) -> np.ndarray:
    """전체 방문 순서를 (4^n, 2) 배열로 반환"""
    check_granularity(n)
    cells = 1 << (2 * n)
    point = _POINT_FUNCTIONS[CurveId(c)]
    order = np.empty((cells, 2), dtype=np.int64)
    for value in range(cells):
        p = point(CurveIndex(value, n))
        order[value, 0] = p.x
        order[value, 1] = p.y
    return order
