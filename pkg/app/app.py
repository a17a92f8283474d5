import argparse
import logging
import sys

from service.config_service import ConfigService
from service.curve_service import CurveService
from service.geocode_service import GeocodeService
from service.metrics_service import MetricsService
from service.bench_service import BenchService
from handler.command_handler import CommandHandler
from util.errors import GeohashError

logger = logging.getLogger(__name__)

CURVE_CHOICES = ['z', 'grayz', 'hilbert', 'h']
FORMAT_CHOICES = ['text', 'csv', 'json']


def configure_logging(verbose: bool = False):
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.StreamHandler(),
        ],
        force=True,
    )


def build_handler() -> CommandHandler:
    """서비스 구성"""
    curve_service = CurveService()
    geocode_service = GeocodeService(curve_service)
    metrics_service = MetricsService(geocode_service)
    bench_service = BenchService(geocode_service)
    return CommandHandler(geocode_service, metrics_service, bench_service)


def build_parser(config: ConfigService) -> argparse.ArgumentParser:
    """서브커맨드 파서 생성"""
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--n', type=int, default=config.default_granularity, help='subdivision granularity (1..31)')
    common.add_argument('--format', choices=FORMAT_CHOICES, default='text')
    common.add_argument('--seed', type=lambda v: int(v, 0), default=config.default_seed,
                        help='random seed (default: $SFC_GEOHASH_SEED or built-in)')
    common.add_argument('--out', default=None, help='write output to this file instead of stdout')
    common.add_argument('--verbose', action='store_true', help='log progress to stderr')

    parser = argparse.ArgumentParser(
        prog='sfc-geohash',
        description='Geohashes from space-filling curves (Z, Gray-coded Z, Hilbert, H) and their comparison.',
    )
    subparsers = parser.add_subparsers(dest='command', required=True)

    encode = subparsers.add_parser('encode', parents=[common], help='encode a coordinate')
    encode.add_argument('--lat', type=float, required=True)
    encode.add_argument('--lon', type=float, required=True)
    encode.add_argument('--mode', choices=['plain', 'cached'], default='plain')
    encode.add_argument('--curve', choices=CURVE_CHOICES, type=str.lower, default=config.default_curve)

    decode = subparsers.add_parser('decode', parents=[common], help='decode a hash to its cell')
    decode.add_argument('hash')
    decode.add_argument('--curve', choices=CURVE_CHOICES, type=str.lower, default=config.default_curve)

    experiment = config.get_experiment_config()
    compare = subparsers.add_parser('compare', parents=[common], help='edit-distance win-rate experiment')
    compare.add_argument('--points', type=int, default=experiment['points_per_iteration'])
    compare.add_argument('--iterations', type=int, default=experiment['iterations'])
    compare.add_argument('--offset', type=float, default=experiment['neighbor_offset_degrees'])
    compare.add_argument('--workers', type=int, default=config.workers)
    compare.add_argument('--include-gray', action='store_true', help='add Gray-coded Z as a fourth competitor')

    clusters = subparsers.add_parser('clusters', parents=[common], help='average cluster count per query class')
    clusters.add_argument('--class', dest='query_class', choices=['rects', 'windows'], default='windows')
    clusters.add_argument('--k', type=int, default=2)
    clusters.add_argument('--curve', choices=CURVE_CHOICES + ['all'], type=str.lower, default='all')

    bench_defaults = config.get_bench_config()
    bench = subparsers.add_parser('bench', parents=[common], help='nanoseconds per geohash computation')
    bench.add_argument('--rounds', type=int, default=bench_defaults['measured_rounds'])
    bench.add_argument('--warmup', type=int, default=bench_defaults['warmup_rounds'])
    bench.add_argument('--batch', type=int, default=bench_defaults['batch_size'])
    return parser


def main(argv=None) -> int:
    try:
        config = ConfigService()
    except ValueError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2

    args = build_parser(config).parse_args(argv)
    configure_logging(args.verbose)

    try:
        output = build_handler().handle(args)
    except (GeohashError, ValueError) as e:
        logger.error(f"{args.command} failed: {e}")
        return 2

    if args.out:
        with open(args.out, 'w', encoding='utf-8') as f:
            f.write(output)
        logger.info(f"Wrote {args.command} output to {args.out}")
    else:
        sys.stdout.write(output)
    return 0


if __name__ == '__main__':
    sys.exit(main())
