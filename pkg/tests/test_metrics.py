import os

import pytest
from hypothesis import given
from hypothesis import strategies as st

from service.metrics_service import (
    ALL_CURVES,
    ExperimentConfig,
    QueryClass,
    QueryRect,
    average_clusters_enumerated,
    average_clusters_exact,
    count_clusters,
    levenshtein,
)
from util.curves import CurveId, GridPoint, curve_index
from util.errors import CapacityError, DomainError, UsageError

SEED = int(os.environ.get('SFC_GEOHASH_SEED', '20240917'))
short_text = st.text(alphabet='abcz0', max_size=8)


@pytest.mark.parametrize('a, b, expected', [
    ('', 'abc', 3),
    ('abc', '', 3),
    ('', '', 0),
    ('kitten', 'sitting', 3),
    ('flaw', 'lawn', 2),
    ('0000001', '0000010', 2),
])
def test_levenshtein_examples(a, b, expected):
    assert levenshtein(a, b) == expected


@given(short_text, short_text, short_text)
def test_levenshtein_is_a_metric(a, b, c):
    d = levenshtein(a, b)
    assert d >= 0
    assert (d == 0) == (a == b)
    assert d == levenshtein(b, a)
    assert levenshtein(a, c) <= d + levenshtein(b, c)


@given(short_text, short_text)
def test_levenshtein_bounds(a, b):
    d = levenshtein(a, b)
    assert abs(len(a) - len(b)) <= d <= max(len(a), len(b))


@pytest.mark.parametrize('curve', ALL_CURVES)
@pytest.mark.parametrize('n', range(1, 6))
def test_full_grid_is_one_cluster(curve, n):
    side = 1 << n
    assert count_clusters(QueryRect(0, 0, side - 1, side - 1), curve, n) == 1


@pytest.mark.parametrize('curve, expected', [
    (CurveId.Z, 2),
    (CurveId.HILBERT, 1),
])
def test_left_column(curve, expected):
    assert count_clusters(QueryRect(0, 0, 0, 1), curve, 1) == expected


def test_query_outside_grid():
    with pytest.raises(DomainError, match='exceeds'):
        count_clusters(QueryRect(0, 0, 4, 1), CurveId.Z, 2)
    with pytest.raises(DomainError, match='inverted'):
        QueryRect(2, 0, 1, 1)


def brute_force_runs(indices):
    members = set(indices)
    return sum(1 for i in members if i - 1 not in members)


@pytest.mark.parametrize('curve', ALL_CURVES)
def test_count_clusters_matches_run_counter(curve):
    n = 3
    checked = 0
    for x0 in range(8):
        for x1 in range(x0, 8):
            for y0 in range(8):
                for y1 in range(y0, 8):
                    q = QueryRect(x0, y0, x1, y1)
                    indices = [curve_index(curve, GridPoint(x, y), n).value
                               for x in range(x0, x1 + 1) for y in range(y0, y1 + 1)]
                    assert count_clusters(q, curve, n) == brute_force_runs(indices)
                    checked += 1
    assert checked == 1296


@pytest.mark.parametrize('curve', [CurveId.HILBERT, CurveId.H])
@pytest.mark.parametrize('n', range(1, 5))
def test_line_queries_bounded_by_length(curve, n):
    side = 1 << n
    for m in range(1, side + 1):
        for start in range(side - m + 1):
            for fixed in range(side):
                assert count_clusters(QueryRect(start, fixed, start + m - 1, fixed), curve, n) <= m
                assert count_clusters(QueryRect(fixed, start, fixed, start + m - 1), curve, n) <= m


def test_z_splits_a_two_cell_query():
    assert count_clusters(QueryRect(0, 0, 0, 1), CurveId.Z, 3) == 2


@pytest.mark.parametrize('curve', ALL_CURVES)
@pytest.mark.parametrize('n', [1, 4, 8])
def test_singleton_windows(curve, n):
    assert average_clusters_exact(QueryClass('windows', 1), curve, n) == 1.0


@pytest.mark.parametrize('curve', ALL_CURVES)
@pytest.mark.parametrize('query_class, n', [
    (QueryClass('windows', 2), 3),
    (QueryClass('windows', 3), 3),
    (QueryClass('windows', 4), 4),
    (QueryClass('windows', 8), 3),
    (QueryClass('rects'), 2),
    (QueryClass('rects'), 3),
])
def test_exact_average_matches_enumeration(curve, query_class, n):
    exact = average_clusters_exact(query_class, curve, n)
    assert exact == pytest.approx(average_clusters_enumerated(query_class, curve, n))
    assert exact >= 1.0


def test_two_by_two_window_ordering():
    windows = QueryClass('windows', 2)
    z = average_clusters_exact(windows, CurveId.Z, 3)
    hilbert = average_clusters_exact(windows, CurveId.HILBERT, 3)
    h = average_clusters_exact(windows, CurveId.H, 3)
    assert hilbert <= z
    assert h <= 1.05 * hilbert
    assert hilbert <= 4.0


def test_capacity_guard():
    with pytest.raises(CapacityError, match='smaller n'):
        average_clusters_exact(QueryClass('rects'), CurveId.Z, 8)
    with pytest.raises(CapacityError):
        average_clusters_exact(QueryClass('rects'), CurveId.Z, 30)


def test_grid_cap_refuses_large_window_grids():
    windows = QueryClass('windows', 2)
    assert windows.query_count(11) < 10 ** 8
    with pytest.raises(CapacityError, match='use n <= 10'):
        average_clusters_exact(windows, CurveId.H, 11)


def test_window_larger_than_grid():
    with pytest.raises(DomainError, match='window size'):
        average_clusters_exact(QueryClass('windows', 9), CurveId.Z, 3)


def test_query_class_validation():
    with pytest.raises(UsageError):
        QueryClass('circles')
    with pytest.raises(DomainError):
        QueryClass('windows', 0)


def test_cluster_report_records(metrics_service):
    report = metrics_service.average_clusters(QueryClass('windows', 1), ALL_CURVES, 2)
    records = report.records()
    assert [r['curve'] for r in records] == ['Z', 'GrayZ', 'Hilbert', 'H']
    assert all(r['avg_clusters'] == 1.0 and r['class'] == 'windows:1' and r['n'] == 2 for r in records)


@pytest.mark.parametrize('kwargs', [
    {'points_per_iteration': 0},
    {'iterations': 0},
    {'neighbor_offset_degrees': 0.0},
    {'seed': -1},
    {'n': 32},
])
def test_experiment_config_validation(kwargs):
    with pytest.raises(DomainError):
        ExperimentConfig(**{'seed': SEED, **kwargs})


def test_degenerate_offset_is_all_ties(metrics_service):
    cfg = ExperimentConfig(seed=SEED, points_per_iteration=100, iterations=2, neighbor_offset_degrees=1e-12)
    result = metrics_service.run_experiment(cfg)
    assert result.ties == result.total_comparisons == 200
    assert all(share == 0.0 for share in result.shares.values())
    assert result.decided == 0
    assert all(share == 0.0 for share in result.decided_shares.values())


def test_experiment_is_deterministic(metrics_service):
    cfg = ExperimentConfig(seed=7, points_per_iteration=50, iterations=2)
    assert metrics_service.run_experiment(cfg) == metrics_service.run_experiment(cfg)


def test_experiment_workers_match_sequential(metrics_service):
    cfg = ExperimentConfig(seed=11, points_per_iteration=40, iterations=6, neighbor_offset_degrees=0.05)
    assert metrics_service.run_experiment(cfg, workers=3) == metrics_service.run_experiment(cfg)


def test_experiment_accounting(metrics_service):
    cfg = ExperimentConfig(seed=SEED, points_per_iteration=200, iterations=2, neighbor_offset_degrees=0.05)
    result = metrics_service.run_experiment(cfg, include_gray=True)
    assert result.curves == (CurveId.H, CurveId.HILBERT, CurveId.Z, CurveId.GRAY_Z)
    assert sum(result.wins.values()) + result.ties == result.total_comparisons == 400
    assert all(0.0 <= share <= 1.0 for share in result.shares.values())
    assert sum(result.shares.values()) <= 1.0 + 1e-12
    assert sum(result.decided_shares.values()) == pytest.approx(1.0)
    for c in result.curves:
        assert result.decided_shares[c] == pytest.approx(result.wins[c] / result.decided)


def test_pairwise_same_curve(metrics_service):
    cfg = ExperimentConfig(seed=SEED, points_per_iteration=10, iterations=1)
    with pytest.raises(UsageError):
        metrics_service.pairwise_share(cfg, CurveId.Z, CurveId.Z)


def test_pairwise_complementary(metrics_service):
    cfg = ExperimentConfig(seed=SEED, points_per_iteration=200, iterations=2, neighbor_offset_degrees=0.05)
    forward = metrics_service.pairwise_share(cfg, CurveId.HILBERT, CurveId.Z)
    backward = metrics_service.pairwise_share(cfg, CurveId.Z, CurveId.HILBERT)
    assert forward + backward == pytest.approx(1.0)
    _, pairwise = metrics_service.compare(cfg)
    assert pairwise == pytest.approx(forward)


def test_h_leads_decided_comparisons(metrics_service):
    cfg = ExperimentConfig(seed=SEED, points_per_iteration=500, iterations=4, neighbor_offset_degrees=0.1)
    result, _ = metrics_service.compare(cfg, workers=2)
    h, hilbert, z = (result.decided_shares[c] for c in (CurveId.H, CurveId.HILBERT, CurveId.Z))
    assert 0.60 <= h <= 0.85
    assert h > hilbert and h > z


def test_default_offset_is_mostly_ties(metrics_service):
    cfg = ExperimentConfig(seed=SEED, points_per_iteration=500, iterations=2)
    result = metrics_service.run_experiment(cfg)
    assert result.ties > 0.9 * result.total_comparisons
    assert result.shares[CurveId.H] < 0.1


@pytest.mark.reproduction
def test_reference_experiment_shares(metrics_service):
    cfg = ExperimentConfig(seed=SEED, neighbor_offset_degrees=0.1)
    result, pairwise = metrics_service.compare(cfg, workers=4)
    h, hilbert, z = (result.decided_shares[c] for c in (CurveId.H, CurveId.HILBERT, CurveId.Z))
    assert 0.60 <= h <= 0.85
    assert h > hilbert >= z - 0.03
    assert 0.45 <= pairwise <= 0.60
