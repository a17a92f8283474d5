import csv
import io
import json
import logging
import os
import platform
import time
from contextlib import contextmanager
from dataclasses import asdict, dataclass
from datetime import datetime
from typing import List

import numpy as np
import pytz

from service.geocode_service import GeoPoint, GeocodeService, point_to_cell
from util.curves import CurveId, Mode, check_granularity
from util.errors import DomainError, HarnessError, UsageError

# 로거 설정
logger = logging.getLogger(__name__)

# report row order
VARIANTS = (
    ('Z', CurveId.Z, Mode.PLAIN),
    ('H', CurveId.H, Mode.PLAIN),
    ('Hilbert', CurveId.HILBERT, Mode.PLAIN),
    ('H (cached)', CurveId.H, Mode.CACHED),
)

CSV_COLUMNS = ['variant', 'median_ns', 'mean_ns', 'stddev_ns', 'batch', 'rounds', 'n', 'seed', 'machine']
TIMER_RESOLUTION_FACTOR = 100


@dataclass(frozen=True)
class BenchConfig:
    seed: int
    warmup_rounds: int = 2
    measured_rounds: int = 7
    batch_size: int = 2000
    n: int = 16

    def __post_init__(self):
        if self.measured_rounds < 3:
            raise DomainError(f"measured_rounds must be at least 3: {self.measured_rounds}")
        if self.batch_size < 1:
            raise DomainError(f"batch_size must be at least 1: {self.batch_size}")
        if self.warmup_rounds < 0:
            raise DomainError(f"warmup_rounds must be non-negative: {self.warmup_rounds}")
        if not 0 <= self.seed < 1 << 64:
            raise DomainError(f"seed must be an unsigned 64-bit integer: {self.seed}")
        check_granularity(self.n)


@dataclass(frozen=True)
class VariantStats:
    variant: str
    median_ns: float
    mean_ns: float
    stddev_ns: float


@dataclass
class BenchReport:
    config: BenchConfig
    variants: List[VariantStats]
    machine: str
    timestamp: str = ''
    note: str = 'each variant is timed end to end (quantization, curve index, base-32) on its own'

    def stats(self, variant: str) -> VariantStats:
        for row in self.variants:
            if row.variant == variant:
                return row
        raise KeyError(variant)


def machine_descriptor() -> str:
    """벤치마크 환경 정보"""
    cpu = platform.processor() or platform.machine()
    return (f"{cpu} | {platform.system()} {platform.release()} | "
            f"{platform.python_implementation()} {platform.python_version()}")


def ratio(report: BenchReport, slower: str, faster: str) -> float:
    """중앙값 비율"""
    return report.stats(slower).median_ns / report.stats(faster).median_ns


def format_ns(ns: float) -> str:
    if ns > 10e6:
        return "%.1f ms" % (ns / 1e6)
    elif ns > 10e3:
        return "%.1f us" % (ns / 1e3)
    return "%.0f ns" % ns


@contextmanager
def pinned_to_one_cpu():
    """가능한 플랫폼에서 단일 CPU 고정"""
    if not hasattr(os, 'sched_setaffinity'):
        yield
        return
    original = os.sched_getaffinity(0)
    try:
        os.sched_setaffinity(0, {min(original)})
    except OSError as e:
        logger.info(f"Running unpinned, could not pin benchmark to one CPU: {e}")
        yield
        return
    try:
        yield
    finally:
        os.sched_setaffinity(0, original)


class BenchService:
    def __init__(self, geocode_service: GeocodeService):
        self.geocode_service = geocode_service
        self._sink = 0

    @staticmethod
    def point_batch(cfg: BenchConfig) -> List[GeoPoint]:
        """시드 고정 점 배치"""
        rng = np.random.default_rng(np.random.SeedSequence(cfg.seed))
        lon = rng.uniform(-180.0, 180.0, cfg.batch_size)
        lat = rng.uniform(-90.0, 90.0, cfg.batch_size)
        return [GeoPoint.from_degrees(la, lo) for la, lo in zip(lat, lon)]

    def correctness_sweep(self, points: List[GeoPoint], n: int) -> None:
        """타이밍 전에 같은 배치로 해시 정확성 확인"""
        encode = self.geocode_service.encode_hash
        for g in points:
            cell = point_to_cell(g, n)
            plain_h = encode(g, CurveId.H, n).text
            if encode(g, CurveId.H, n, Mode.CACHED).text != plain_h:
                raise HarnessError(f"cached H hash differs from plain H at {g}")
            for _, curve, mode in VARIANTS:
                h = encode(g, curve, n, mode)
                if self.geocode_service.decode_cell(h) != cell:
                    raise HarnessError(f"{curve.label} hash {h.text} does not decode to cell {cell}")

    def _time_round(self, points: List[GeoPoint], curve: CurveId, mode: Mode, n: int) -> int:
        encode = self.geocode_service.encode_hash
        sink = 0
        start = time.perf_counter_ns()
        for g in points:
            sink ^= hash(encode(g, curve, n, mode).text)
        elapsed = time.perf_counter_ns() - start
        self._sink ^= sink
        return elapsed

    def run_bench(self, cfg: BenchConfig) -> BenchReport:
        """변형별 geohash 계산 시간 측정"""
        if self.geocode_service.curve_service.tables is None:
            raise UsageError("H (cached) variant needs prebuilt H tables")
        points = self.point_batch(cfg)
        self.correctness_sweep(points, cfg.n)
        resolution_ns = time.get_clock_info('perf_counter').resolution * 1e9
        minimum_ns = TIMER_RESOLUTION_FACTOR * resolution_ns

        variants = []
        with pinned_to_one_cpu():
            for label, curve, mode in VARIANTS:
                for _ in range(cfg.warmup_rounds):
                    self._time_round(points, curve, mode, cfg.n)
                samples = []
                for _ in range(cfg.measured_rounds):
                    elapsed = self._time_round(points, curve, mode, cfg.n)
                    if elapsed < minimum_ns:
                        raise HarnessError(
                            f"batch of {cfg.batch_size} took {elapsed} ns, under {TIMER_RESOLUTION_FACTOR}x "
                            f"the timer resolution ({resolution_ns:.0f} ns); use a larger batch")
                    samples.append(elapsed / cfg.batch_size)
                per_op = np.asarray(samples, dtype=np.float64)
                stats = VariantStats(label, float(np.median(per_op)), float(np.mean(per_op)),
                                     float(np.std(per_op, ddof=1)))
                logger.info(f"{label}: median {format_ns(stats.median_ns)} per geohash")
                variants.append(stats)

        return BenchReport(
            config=cfg,
            variants=variants,
            machine=machine_descriptor(),
            timestamp=datetime.now(pytz.UTC).isoformat(),
        )


def emit_table(report: BenchReport, fmt: str = 'text') -> str:
    """벤치마크 결과 직렬화 (text, csv, json)"""
    cfg = report.config
    if fmt == 'text':
        lines = ['Curves | time, ns']
        lines.extend(f"{row.variant} | {row.median_ns:.0f}" for row in report.variants)
        lines.append('')
        lines.append(f"machine: {report.machine}")
        lines.append(f"n={cfg.n} batch={cfg.batch_size} rounds={cfg.measured_rounds} seed={cfg.seed}")
        return '\n'.join(lines) + '\n'
    if fmt == 'csv':
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=CSV_COLUMNS, lineterminator='\n')
        writer.writeheader()
        for row in report.variants:
            writer.writerow({
                'variant': row.variant,
                'median_ns': repr(row.median_ns),
                'mean_ns': repr(row.mean_ns),
                'stddev_ns': repr(row.stddev_ns),
                'batch': cfg.batch_size,
                'rounds': cfg.measured_rounds,
                'n': cfg.n,
                'seed': cfg.seed,
                'machine': report.machine,
            })
        return buffer.getvalue()
    if fmt == 'json':
        return json.dumps({
            'machine': report.machine,
            'seed': cfg.seed,
            'timestamp': report.timestamp,
            'note': report.note,
            'config': asdict(cfg),
            'variants': [asdict(row) for row in report.variants],
        }, indent=2) + '\n'
    raise UsageError(f"unknown format: {fmt!r} (expected text, csv or json)")


def read_csv(text: str) -> List[VariantStats]:
    """csv 출력 -> 변형별 통계"""
    rows = []
    for record in csv.DictReader(io.StringIO(text)):
        rows.append(VariantStats(
            record['variant'],
            float(record['median_ns']),
            float(record['mean_ns']),
            float(record['stddev_ns']),
        ))
    return rows
