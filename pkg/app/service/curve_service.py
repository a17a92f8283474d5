import logging
from typing import Optional

from util.curves import (
    MAX_GRANULARITY,
    CurveId,
    CurveIndex,
    GridPoint,
    Mode,
    curve_index,
    curve_point,
)
from util.h_tables import HTables, build_h_tables

# 로거 설정
logger = logging.getLogger(__name__)


class CurveService:
    def __init__(self, max_n: int = MAX_GRANULARITY, prebuild_tables: bool = True):
        self.max_n = max_n
        self._tables: Optional[HTables] = None
        if prebuild_tables:
            self.build_tables()

    def build_tables(self) -> HTables:
        """H 캐시 테이블 생성"""
        self._tables = build_h_tables(self.max_n)
        logger.info(f"Built H tables: {self._tables.state_count} states, "
                    f"{self._tables.leaf_levels}-level blocks, max_n={self.max_n}")
        return self._tables

    @property
    def tables(self) -> Optional[HTables]:
        return self._tables

    def index(self, curve: CurveId, p: GridPoint, n: int, mode: Mode = Mode.PLAIN) -> CurveIndex:
        """곡선 인덱스 계산"""
        return curve_index(curve, p, n, mode, self._tables)

    def point(self, curve: CurveId, i: CurveIndex) -> GridPoint:
        """곡선 인덱스 역변환"""
        return curve_point(curve, i)
