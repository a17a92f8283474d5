import csv
import io
import json
import logging
from typing import List, Sequence

from service.bench_service import BenchConfig, BenchService, emit_table
from service.geocode_service import GeoPoint, Geohash, GeocodeService, cell_bounds, cell_to_point
from service.metrics_service import ALL_CURVES, ExperimentConfig, MetricsService, QueryClass
from util.curves import CurveId, Mode
from util.errors import UsageError

# 로거 설정
logger = logging.getLogger(__name__)

ENCODE_FIELDS = ['lat', 'lon', 'curve', 'n', 'hash']
DECODE_FIELDS = ['hash', 'curve', 'n', 'x', 'y', 'lat', 'lon', 'south', 'west', 'north', 'east']
TALLY_FIELDS = ['curve', 'wins', 'share', 'decided_share', 'ties', 'total']
CLUSTER_FIELDS = ['class', 'n', 'curve', 'avg_clusters']


def render_records(records: List[dict], fields: Sequence[str], fmt: str) -> str:
    """레코드 목록 직렬화"""
    if fmt == 'csv':
        buffer = io.StringIO()
        writer = csv.DictWriter(buffer, fieldnames=list(fields), lineterminator='\n')
        writer.writeheader()
        writer.writerows(records)
        return buffer.getvalue()
    if fmt == 'json':
        return json.dumps(records if len(records) != 1 else records[0], indent=2) + '\n'
    if fmt == 'text':
        return ''.join(' '.join(f"{f}={r[f]}" for f in fields) + '\n' for r in records)
    raise UsageError(f"unknown format: {fmt!r} (expected text, csv or json)")


class CommandHandler:
    def __init__(self, geocode_service: GeocodeService, metrics_service: MetricsService,
                 bench_service: BenchService):
        self.geocode_service = geocode_service
        self.metrics_service = metrics_service
        self.bench_service = bench_service

    def handle(self, args) -> str:
        """서브커맨드 처리"""
        command = args.command
        if command == 'encode':
            return self.cmd_encode(args)
        elif command == 'decode':
            return self.cmd_decode(args)
        elif command == 'compare':
            return self.cmd_compare(args)
        elif command == 'clusters':
            return self.cmd_clusters(args)
        elif command == 'bench':
            return self.cmd_bench(args)
        raise UsageError(f"unknown command: {command!r}")

    def cmd_encode(self, args) -> str:
        """좌표 인코딩"""
        curve = CurveId.parse(args.curve)
        g = GeoPoint.from_degrees(args.lat, args.lon)
        h = self.geocode_service.encode_hash(g, curve, args.n, Mode(args.mode))
        record = {'lat': g.lat, 'lon': g.lon, 'curve': curve.value, 'n': args.n, 'hash': h.text}
        return render_records([record], ENCODE_FIELDS, args.format)

    def cmd_decode(self, args) -> str:
        """해시 디코딩 (칸 중심과 경계)"""
        curve = CurveId.parse(args.curve)
        h = Geohash(args.hash, curve, args.n)
        cell = self.geocode_service.decode_cell(h)
        center = cell_to_point(cell, args.n)
        south, west, north, east = cell_bounds(cell, args.n)
        record = {
            'hash': h.text, 'curve': curve.value, 'n': args.n, 'x': cell.x, 'y': cell.y,
            'lat': center.lat, 'lon': center.lon,
            'south': south, 'west': west, 'north': north, 'east': east,
        }
        return render_records([record], DECODE_FIELDS, args.format)

    def cmd_compare(self, args) -> str:
        """편집 거리 비교 실험"""
        cfg = ExperimentConfig(
            seed=args.seed,
            points_per_iteration=args.points,
            iterations=args.iterations,
            n=args.n,
            neighbor_offset_degrees=args.offset,
        )
        result, pairwise = self.metrics_service.compare(cfg, args.include_gray, args.workers)
        records = result.records()
        if args.format == 'json':
            return json.dumps({
                'tally': records,
                'ties': result.ties,
                'total': result.total_comparisons,
                'decided': result.decided,
                'pairwise': {'a': CurveId.HILBERT.label, 'b': CurveId.Z.label, 'share': pairwise},
                'seed': cfg.seed,
                'n': cfg.n,
            }, indent=2) + '\n'
        if args.format == 'csv':
            return render_records(records, TALLY_FIELDS, 'csv')
        lines = [f"{'curve':<8} {'wins':>8} {'share':>6} {'decided':>8}"]
        lines.extend(f"{r['curve']:<8} {r['wins']:>8} {r['share']:>6.2f} {r['decided_share']:>8.2f}" for r in records)
        lines.append(f"{'ties':<8} {result.ties:>8}")
        lines.append(f"{'total':<8} {result.total_comparisons:>8}")
        lines.append(f"Hilbert vs Z: {pairwise:.2f}")
        return '\n'.join(lines) + '\n'

    def cmd_clusters(self, args) -> str:
        """질의 클래스별 평균 클러스터 수"""
        query_class = QueryClass(args.query_class, args.k if args.query_class == 'windows' else None)
        curves = ALL_CURVES if args.curve == 'all' else (CurveId.parse(args.curve),)
        report = self.metrics_service.average_clusters(query_class, curves, args.n)
        records = report.records()
        if args.format == 'text':
            lines = [f"{'curve':<8} {'avg_clusters':>12}   ({query_class.descriptor}, n={args.n})"]
            lines.extend(f"{r['curve']:<8} {r['avg_clusters']:>12.4f}" for r in records)
            return '\n'.join(lines) + '\n'
        return render_records(records, CLUSTER_FIELDS, args.format)

    def cmd_bench(self, args) -> str:
        """geohash 계산 벤치마크"""
        cfg = BenchConfig(
            seed=args.seed,
            warmup_rounds=args.warmup,
            measured_rounds=args.rounds,
            batch_size=args.batch,
            n=args.n,
        )
        report = self.bench_service.run_bench(cfg)
        return emit_table(report, args.format)
