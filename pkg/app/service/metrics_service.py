import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from service.geocode_service import GeoPoint, GeocodeService
from util.curves import CurveId, GridPoint, check_granularity, curve_index, curve_order
from util.errors import CapacityError, DomainError, UsageError

# 로거 설정
logger = logging.getLogger(__name__)

MAX_QUERIES = 10 ** 8
MAX_GRID_CELLS = 1 << 20

DEFAULT_CURVES = (CurveId.H, CurveId.HILBERT, CurveId.Z)
ALL_CURVES = (CurveId.Z, CurveId.GRAY_Z, CurveId.HILBERT, CurveId.H)


@dataclass(frozen=True)
class QueryRect:
    x0: int
    y0: int
    x1: int
    y1: int

    def __post_init__(self):
        if min(self.x0, self.y0) < 0:
            raise DomainError(f"query bounds must be non-negative: {self}")
        if self.x0 > self.x1 or self.y0 > self.y1:
            raise DomainError(f"query bounds are inverted: {self}")

    @property
    def cell_count(self) -> int:
        return (self.x1 - self.x0 + 1) * (self.y1 - self.y0 + 1)

    def cells(self) -> Iterator[GridPoint]:
        for y in range(self.y0, self.y1 + 1):
            for x in range(self.x0, self.x1 + 1):
                yield GridPoint(x, y)


@dataclass(frozen=True)
class QueryClass:
    """모든 사각형 질의(rects) 또는 모든 k x k 창(windows)"""
    kind: str
    k: Optional[int] = None

    def __post_init__(self):
        if self.kind not in ('rects', 'windows'):
            raise UsageError(f"unknown query class: {self.kind!r} (expected rects or windows)")
        if self.kind == 'windows' and (self.k is None or self.k < 1):
            raise DomainError(f"window size must be a positive integer: {self.k}")

    @property
    def descriptor(self) -> str:
        return 'rects' if self.kind == 'rects' else f"windows:{self.k}"

    def query_count(self, n: int) -> int:
        side = 1 << n
        if self.kind == 'rects':
            return (side * (side + 1) // 2) ** 2
        return max(0, side - self.k + 1) ** 2

    def queries(self, n: int) -> Iterator[QueryRect]:
        side = 1 << n
        if self.kind == 'rects':
            for x0 in range(side):
                for x1 in range(x0, side):
                    for y0 in range(side):
                        for y1 in range(y0, side):
                            yield QueryRect(x0, y0, x1, y1)
        else:
            for x0 in range(side - self.k + 1):
                for y0 in range(side - self.k + 1):
                    yield QueryRect(x0, y0, x0 + self.k - 1, y0 + self.k - 1)


@dataclass(frozen=True)
class ExperimentConfig:
    seed: int
    points_per_iteration: int = 1000
    iterations: int = 100
    n: int = 16
    neighbor_offset_degrees: float = 0.001

    def __post_init__(self):
        if self.points_per_iteration < 1:
            raise DomainError(f"points_per_iteration must be at least 1: {self.points_per_iteration}")
        if self.iterations < 1:
            raise DomainError(f"iterations must be at least 1: {self.iterations}")
        if not self.neighbor_offset_degrees > 0:
            raise DomainError(f"neighbor_offset_degrees must be positive: {self.neighbor_offset_degrees}")
        if not 0 <= self.seed < 1 << 64:
            raise DomainError(f"seed must be an unsigned 64-bit integer: {self.seed}")
        check_granularity(self.n)


@dataclass
class TallyResult:
    curves: Tuple[CurveId, ...]
    wins: Dict[CurveId, int]
    ties: int
    total_comparisons: int
    shares: Dict[CurveId, float] = field(default_factory=dict)
    # wins over comparisons that had a unique winner
    decided_shares: Dict[CurveId, float] = field(default_factory=dict)

    @property
    def decided(self) -> int:
        return self.total_comparisons - self.ties

    def records(self) -> List[dict]:
        return [
            {
                'curve': c.label,
                'wins': self.wins[c],
                'share': self.shares[c],
                'decided_share': self.decided_shares[c],
                'ties': self.ties,
                'total': self.total_comparisons,
            }
            for c in self.curves
        ]


@dataclass
class ClusterReport:
    query_class: QueryClass
    n: int
    averages: Dict[CurveId, float]

    def records(self) -> List[dict]:
        return [
            {'class': self.query_class.descriptor, 'n': self.n, 'curve': c.label, 'avg_clusters': avg}
            for c, avg in self.averages.items()
        ]


def levenshtein(a: str, b: str) -> int:
    """편집 거리 (삽입, 삭제, 치환)"""
    if a == b:
        return 0
    if len(a) < len(b):
        a, b = b, a
    previous = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        current = [i]
        for j, cb in enumerate(b, 1):
            current.append(min(
                previous[j] + 1,
                current[j - 1] + 1,
                previous[j - 1] + (ca != cb),
            ))
        previous = current
    return previous[-1]


def count_runs(indices: Sequence[int]) -> int:
    """정렬된 인덱스에서 연속 구간 수"""
    ordered = np.sort(np.asarray(indices, dtype=np.int64))
    if ordered.size == 0:
        return 0
    return 1 + int(np.count_nonzero(np.diff(ordered) != 1))


def count_clusters(q: QueryRect, curve: CurveId, n: int) -> int:
    """질의 사각형이 곡선 위에서 나뉘는 클러스터 수"""
    side = 1 << check_granularity(n)
    if q.x1 >= side or q.y1 >= side:
        raise DomainError(f"query {q} exceeds the {side}x{side} grid")
    return count_runs([curve_index(curve, p, n).value for p in q.cells()])


def _check_capacity(query_class: QueryClass, n: int) -> int:
    check_granularity(n)
    if 1 << (2 * n) > MAX_GRID_CELLS:
        raise CapacityError(f"grid of 4^{n} cells exceeds {MAX_GRID_CELLS} cells; use n <= 10")
    count = query_class.query_count(n)
    if count > MAX_QUERIES:
        raise CapacityError(f"{count} {query_class.descriptor} queries at n={n} exceed {MAX_QUERIES}; use a smaller n")
    if count == 0:
        raise DomainError(f"window size {query_class.k} exceeds the {1 << n}x{1 << n} grid")
    return count


def _pair_coverage(lo: np.ndarray, hi: np.ndarray, side: int, query_class: QueryClass) -> np.ndarray:
    """한 축에서 두 좌표를 모두 포함하는 질의 구간 수"""
    if query_class.kind == 'rects':
        return (lo + 1) * (side - hi)
    k = query_class.k
    first = np.maximum(hi - k + 1, 0)
    last = np.minimum(lo, side - k)
    return np.maximum(last - first + 1, 0)


def average_clusters_exact(query_class: QueryClass, curve: CurveId, n: int) -> float:
    """
    Mean cluster count over every query of the class.

    Uses c_q = |q| - #{i : cells i and i+1 both in q}, summed over all
    queries in closed form, so the cost is linear in the grid size.
    """
    count = _check_capacity(query_class, n)
    side = 1 << n
    order = curve_order(curve, n)
    a, b = order[:-1], order[1:]
    lo = np.minimum(a, b)
    hi = np.maximum(a, b)
    shared = (_pair_coverage(lo[:, 0], hi[:, 0], side, query_class)
              * _pair_coverage(lo[:, 1], hi[:, 1], side, query_class))

    if query_class.kind == 'rects':
        coords = np.arange(side, dtype=np.int64)
        per_axis = int(np.sum((coords + 1) * (side - coords)))
        total_cells = per_axis * per_axis
    else:
        total_cells = count * query_class.k * query_class.k
    return (total_cells - int(np.sum(shared))) / count


def average_clusters_enumerated(query_class: QueryClass, curve: CurveId, n: int) -> float:
    """질의를 하나씩 열거하는 평균 (검증용)"""
    count = _check_capacity(query_class, n)
    grid = np.empty((1 << n, 1 << n), dtype=np.int64)
    order = curve_order(curve, n)
    grid[order[:, 0], order[:, 1]] = np.arange(order.shape[0])
    total = 0
    for q in query_class.queries(n):
        total += count_runs(grid[q.x0:q.x1 + 1, q.y0:q.y1 + 1].ravel())
    return total / count


class MetricsService:
    def __init__(self, geocode_service: GeocodeService):
        self.geocode_service = geocode_service

    def average_clusters(self, query_class: QueryClass, curves: Sequence[CurveId], n: int) -> ClusterReport:
        """곡선별 평균 클러스터 수"""
        averages = {}
        for curve in curves:
            averages[curve] = average_clusters_exact(query_class, curve, n)
            logger.info(f"Average clusters {query_class.descriptor} n={n} {curve.label}: {averages[curve]:.4f}")
        return ClusterReport(query_class, n, averages)

    def _iteration_pairs(self, cfg: ExperimentConfig, iteration: int):
        rng = np.random.default_rng(np.random.SeedSequence([cfg.seed, iteration]))
        size = cfg.points_per_iteration
        off = cfg.neighbor_offset_degrees
        lon = rng.uniform(-180.0, 180.0, size)
        lat = rng.uniform(-90.0, 90.0, size)
        partner_lon = np.clip(lon + rng.uniform(-off, off, size), -180.0, 180.0)
        partner_lat = np.clip(lat + rng.uniform(-off, off, size), -90.0, 90.0)
        for i in range(size):
            yield (GeoPoint.from_degrees(lat[i], lon[i]),
                   GeoPoint.from_degrees(partner_lat[i], partner_lon[i]))

    def _iteration_distances(self, cfg: ExperimentConfig, curves: Sequence[CurveId], iteration: int) -> np.ndarray:
        encode = self.geocode_service.encode_hash
        distances = np.empty((cfg.points_per_iteration, len(curves)), dtype=np.int64)
        for row, (base, partner) in enumerate(self._iteration_pairs(cfg, iteration)):
            for col, curve in enumerate(curves):
                distances[row, col] = levenshtein(
                    encode(base, curve, cfg.n).text,
                    encode(partner, curve, cfg.n).text,
                )
        return distances

    def distances(self, cfg: ExperimentConfig, curves: Sequence[CurveId], workers: int = 1) -> np.ndarray:
        """(비교 수, 곡선 수) 편집 거리 행렬"""
        iterations = range(cfg.iterations)
        if workers > 1:
            with ThreadPoolExecutor(max_workers=workers) as executor:
                blocks = list(executor.map(lambda it: self._iteration_distances(cfg, curves, it), iterations))
        else:
            blocks = [self._iteration_distances(cfg, curves, it) for it in iterations]
        return np.concatenate(blocks, axis=0)

    @staticmethod
    def tally(distances: np.ndarray, curves: Sequence[CurveId]) -> TallyResult:
        """최소 거리가 유일한 곡선이 승리, 공동 최소는 무승부"""
        total = distances.shape[0]
        best = distances.min(axis=1, keepdims=True)
        is_best = distances == best
        unique = is_best.sum(axis=1) == 1
        wins = {c: int(np.count_nonzero(unique & is_best[:, col])) for col, c in enumerate(curves)}
        ties = total - int(np.count_nonzero(unique))
        decided = total - ties
        shares = {c: (wins[c] / total if total else 0.0) for c in curves}
        decided_shares = {c: (wins[c] / decided if decided else 0.0) for c in curves}
        return TallyResult(tuple(curves), wins, ties, total, shares, decided_shares)

    @staticmethod
    def share_between(da: np.ndarray, db: np.ndarray) -> float:
        decided = np.count_nonzero(da != db)
        if decided == 0:
            return 0.0
        return int(np.count_nonzero(da < db)) / int(decided)

    def run_experiment(self, cfg: ExperimentConfig, include_gray: bool = False, workers: int = 1) -> TallyResult:
        """편집 거리 비교 실험"""
        curves = DEFAULT_CURVES + ((CurveId.GRAY_Z,) if include_gray else ())
        logger.info(f"Running experiment: {cfg.iterations} x {cfg.points_per_iteration} points, "
                    f"n={cfg.n}, seed={cfg.seed}, workers={workers}")
        result = self.tally(self.distances(cfg, curves, workers), curves)
        logger.info(f"Experiment finished: {result.total_comparisons} comparisons, {result.ties} ties")
        return result

    def pairwise_share(self, cfg: ExperimentConfig, a: CurveId, b: CurveId, workers: int = 1) -> float:
        """a가 b보다 엄격히 짧은 비율 (동률 제외)"""
        if CurveId(a) == CurveId(b):
            raise UsageError(f"pairwise share needs two different curves, got {CurveId(a).label} twice")
        d = self.distances(cfg, (a, b), workers)
        return self.share_between(d[:, 0], d[:, 1])

    def compare(self, cfg: ExperimentConfig, include_gray: bool = False, workers: int = 1):
        """3자 집계와 Hilbert 대 Z 비율을 같은 점 집합에서 계산"""
        curves = DEFAULT_CURVES + ((CurveId.GRAY_Z,) if include_gray else ())
        logger.info(f"Running comparison: {cfg.iterations} x {cfg.points_per_iteration} points, "
                    f"n={cfg.n}, seed={cfg.seed}, workers={workers}")
        d = self.distances(cfg, curves, workers)
        result = self.tally(d, curves)
        pairwise = self.share_between(d[:, curves.index(CurveId.HILBERT)], d[:, curves.index(CurveId.Z)])
        logger.info(f"Comparison finished: {result.total_comparisons} comparisons, {result.ties} ties")
        return result, pairwise
