import os
from dataclasses import MISSING, fields

from dotenv import load_dotenv

from service.bench_service import BenchConfig
from service.metrics_service import ExperimentConfig

DEFAULT_SEED = 20240917
SEED_ENV = 'SFC_GEOHASH_SEED'


def _field_defaults(cls) -> dict:
    return {f.name: f.default for f in fields(cls) if f.default is not MISSING}


class ConfigService:
    def __init__(self):
        load_dotenv(override=True)

        # Seed (flag > environment > built-in)
        self.seed_env = os.environ.get(SEED_ENV)
        self.default_seed = DEFAULT_SEED

        # Experiment and benchmark defaults live on their config dataclasses
        self.experiment_defaults = _field_defaults(ExperimentConfig)
        self.bench_defaults = _field_defaults(BenchConfig)

        # Geohash
        self.default_granularity = self.experiment_defaults['n']
        self.default_curve = 'h'

        # Experiment threads
        self.workers = 1

        # Validate settings
        self._validate_config()

    def _validate_config(self):
        """설정 유효성 검사"""
        if self.seed_env is None or self.seed_env.strip() == '':
            return
        try:
            seed = int(self.seed_env.strip(), 0)
        except ValueError:
            raise ValueError(f"Invalid environment variable {SEED_ENV}: {self.seed_env!r} is not an integer")
        if not 0 <= seed < 1 << 64:
            raise ValueError(f"Invalid environment variable {SEED_ENV}: {seed} is not an unsigned 64-bit integer")
        self.default_seed = seed

    def get_experiment_config(self) -> dict:
        """편집 거리 실험 기본값 반환"""
        return {**self.experiment_defaults, 'seed': self.default_seed}

    def get_bench_config(self) -> dict:
        """벤치마크 기본값 반환"""
        return {**self.bench_defaults, 'seed': self.default_seed}
