"""Trend, phase, inequality, and correlation analytics against literal
reference scans."""

import math

import numpy as np
import pytest

from awareflow.analytics import (
    EventMark,
    LeadDays,
    PhaseThresholds,
    TrendSeries,
    aware_group_means,
    cross_group_ratio,
    daily_counts,
    default_event_marks,
    format_value,
    geo_correlation_series,
    group_trend,
    growth_rates,
    hysteresis,
    lead_days,
    national_percentage,
    neighborhood_awareness_ratio,
    province_percentages,
    segment_phases,
    spearman,
    write_tsv,
)
from awareflow.awareness import NEVER, AwarenessTimeline
from awareflow.domain import Calendar, Dataset, EventLog
from awareflow.errors import AnalyticsError, CohortError
from awareflow.netinfer import build_from_groups

from oracles import (
    neighborhood_ratio_brute,
    phase_scan,
    spearman_rank_then_pearson,
    two_province_fixture,
)
from test_domain import make_individual, make_region


def tl(entries):
    ids = np.array(sorted(entries), dtype=np.uint64)
    ts = np.array([entries[int(i)] for i in ids], dtype=np.int64)
    return AwarenessTimeline(ids, ts)


# --- daily counts and growth -----------------------------------------------------

def test_daily_counts_clip_and_ignore():
    cal = Calendar.from_dates("2020-01-01", "2020-01-05")
    timeline = tl({
        1: cal.day_start_ts(-10),  # before the window: counts into day 0
        2: cal.day_start_ts(0) + 100,
        3: cal.day_start_ts(2),
        4: cal.day_start_ts(2) + 5,
        5: cal.day_start_ts(99),  # after the window: ignored
    })
    new, cum = daily_counts(timeline, cal)
    assert new.tolist() == [2, 0, 2, 0, 0]
    assert cum.tolist() == [2, 2, 4, 4, 4]


def test_growth_rate_conventions():
    g = growth_rates([0.0, 0.0, 2.0, 3.0, 3.0])
    assert np.isnan(g[0])
    assert g[1] == 0.0          # flat at zero
    assert g[2] == np.inf       # rise from zero
    assert g[3] == pytest.approx(0.5)
    assert g[4] == 0.0
    # reconstruction identity away from the special cases
    v = np.array([1.0, 3.0, 4.5, 4.5, 9.0])
    r = growth_rates(v)
    assert np.allclose(v[1:], v[:-1] * (1 + r[1:]))


def test_growth_rates_single_point():
    assert np.isnan(growth_rates([5.0])).all()


# --- phase segmentation ------------------------------------------------------------

def test_two_province_fixture_matches_reference_and_expected():
    prov, nat, expected = two_province_fixture()
    seg = segment_phases(np.array(prov), np.array(nat))
    assert seg.complete
    got = {p.name: (p.start_day, p.end_day) for p in seg.phases}
    assert got == expected
    assert got == phase_scan(prov, nat)
    # phases tile the window in order
    assert seg.phases[0].start_day == 0
    for a, b in zip(seg.phases, seg.phases[1:]):
        assert b.start_day == a.end_day + 1
    assert seg.phases[-1].end_day == len(nat) - 1


def test_flat_zero_series_is_all_normal():
    prov = np.zeros((3, 10))
    nat = np.zeros(10)
    seg = segment_phases(prov, nat)
    assert [p.name for p in seg.phases] == ["Normal"]
    assert (seg.phases[0].start_day, seg.phases[0].end_day) == (0, 9)
    assert not seg.complete


def test_segmentation_matches_reference_on_random_series():
    rng = np.random.default_rng(31)
    for trial in range(50):
        n_prov = int(rng.integers(1, 6))
        n_days = int(rng.integers(2, 25))
        sizes = rng.integers(50, 200, size=n_prov)
        counts = np.zeros((n_prov, n_days))
        for p in range(n_prov):
            # jumpy cumulative counts, often flat early, sometimes explosive
            jumps = rng.choice([0, 0, 1, 2, 10, 60], size=n_days)
            if rng.random() < 0.4:
                jumps[: int(rng.integers(0, n_days))] = 0
            counts[p] = np.cumsum(jumps)
            counts[p] = np.minimum(counts[p], sizes[p])
        prov_pct = counts / sizes[:, None]
        nat_pct = counts.sum(axis=0) / sizes.sum()
        seg = segment_phases(prov_pct, nat_pct)
        got = {p.name: (p.start_day, p.end_day) for p in seg.phases}
        assert got == phase_scan(prov_pct.tolist(), nat_pct.tolist()), f"trial {trial}"


def test_phase_lookup_helpers():
    prov, nat, _ = two_province_fixture()
    seg = segment_phases(np.array(prov), np.array(nat))
    assert seg.phase_of_day(0) == "Normal"
    assert seg.phase_of_day(12) == "Peak"
    assert seg.phase_of_day(99) is None
    assert seg.by_name()["Growth"].n_days == 5


def test_phase_thresholds_validate():
    with pytest.raises(AnalyticsError):
        PhaseThresholds(province_share=0.0).validate()
    with pytest.raises(AnalyticsError):
        PhaseThresholds(sustain_days=0).validate()


# --- cross-group ratios --------------------------------------------------------------

def test_cross_ratio_values():
    timeline = tl({1: 100, 2: 100, 3: 100})
    a = np.array([1, 2, 3] + list(range(10, 10 + 1497)), dtype=np.uint64)  # 3/1500 = 0.002
    b = np.array(range(2000, 2000 + 1000), dtype=np.uint64)
    b[:1] = [1]  # reuse one aware id: 1/1000 = 0.001
    assert cross_group_ratio(timeline, a, np.sort(b), 100) == pytest.approx(2.0)


def test_cross_ratio_reciprocal_identity():
    timeline = tl({1: 10, 2: 20, 5: 15, 7: 30})
    a = np.array([1, 2, 3], dtype=np.uint64)
    b = np.array([5, 6, 7, 8], dtype=np.uint64)
    r_ab = cross_group_ratio(timeline, a, b, 25)
    r_ba = cross_group_ratio(timeline, b, a, 25)
    assert r_ab == pytest.approx(1.0 / r_ba)


def test_cross_ratio_infinite_and_undefined():
    timeline = tl({1: 10})
    aware_side = np.array([1, 2], dtype=np.uint64)
    silent = np.array([3, 4], dtype=np.uint64)
    assert cross_group_ratio(timeline, aware_side, silent, 50) == np.inf
    assert cross_group_ratio(timeline, silent, np.array([5], dtype=np.uint64), 50) is None


# --- neighborhood ratios ---------------------------------------------------------------

IDS4 = np.array([1, 2, 3, 4], dtype=np.uint64)


def test_neighborhood_ratio_on_path():
    g = build_from_groups(IDS4, {"family": [np.array([0, 1]), np.array([1, 2]), np.array([2, 3])]})
    timeline = tl({1: 10, 2: 10})
    r = neighborhood_awareness_ratio(g, "family", timeline, 50)
    # aware: A(frac 1.0), B(frac 0.5); unaware: C(0.5), D(0.0)
    assert r.numerator == pytest.approx(0.75)
    assert r.denominator == pytest.approx(0.25)
    assert r.value == pytest.approx(3.0)
    assert (r.n_aware, r.n_unaware) == (2, 2)


def test_neighborhood_ratio_disjoint_pairs_is_infinite():
    g = build_from_groups(IDS4, {"family": [np.array([0, 1]), np.array([2, 3])]})
    timeline = tl({1: 10, 2: 10})
    r = neighborhood_awareness_ratio(g, "family", timeline, 50)
    assert r.value == math.inf
    assert r.denominator == 0.0


def test_neighborhood_ratio_undefined_sides():
    g = build_from_groups(IDS4, {"family": [np.array([0, 1]), np.array([2, 3])]})
    all_aware = tl({1: 10, 2: 10, 3: 10, 4: 10})
    r = neighborhood_awareness_ratio(g, "family", all_aware, 50)
    assert r.value is None and r.reason == "no_unaware_with_neighbors"
    nobody = tl({})
    r2 = neighborhood_awareness_ratio(g, "family", nobody, 50)
    assert r2.value is None and r2.reason == "no_aware_with_neighbors"
    with pytest.raises(AnalyticsError, match="unknown layer"):
        neighborhood_awareness_ratio(g, "friends", all_aware, 50)


def test_neighborhood_ratio_matches_brute_force_on_random_graphs():
    rng = np.random.default_rng(44)
    for trial in range(60):
        n = int(rng.integers(2, 15))
        ids = np.arange(1, n + 1, dtype=np.uint64)
        possible = [(i, j) for i in range(n) for j in range(i + 1, n)]
        take = rng.random(len(possible)) < 0.3
        edges = [p for p, t in zip(possible, take) if t]
        g = build_from_groups(ids, {"workmate": [np.array(e) for e in edges]})
        aware_rows = rng.random(n) < 0.4
        timeline = tl({int(ids[i]): 10 for i in np.flatnonzero(aware_rows)})
        got = neighborhood_awareness_ratio(g, "workmate", timeline, 50)
        want_value, want_num, want_den = neighborhood_ratio_brute(n, edges, aware_rows)
        if want_value is None:
            assert got.value is None or got.value == want_value
        elif want_value == math.inf:
            assert got.value == math.inf
        else:
            assert got.value == pytest.approx(want_value)
            assert got.numerator == pytest.approx(want_num)
            assert got.denominator == pytest.approx(want_den)


# --- aware group means -------------------------------------------------------------------

def analytics_dataset():
    individuals = [make_individual(i) for i in range(1, 9)]
    return Dataset(
        individuals=individuals,
        regions=[make_region(0), make_region(1, province_id=1, distance=300.0)],
        addresses=[],
        events=EventLog.empty(),
        calendar=Calendar(0, 1),
    )


def test_aware_group_means_purchasing_power():
    ds = analytics_dataset()
    values = np.arange(1, 9, dtype=np.float64)  # value i for individual i
    timeline = tl({3: 10, 5: 10})
    out = aware_group_means(timeline, ds, "gender", 50, values)
    by_name = {name: (mean, n) for name, mean, n in out}
    # ids 3 and 5 are both odd -> female per the fixture builder
    assert by_name["female"] == (pytest.approx(4.0), 2)
    assert by_name["male"] == (None, 0)


def test_aware_group_means_unknown_grouping():
    ds = analytics_dataset()
    with pytest.raises(AnalyticsError, match="unknown grouping"):
        aware_group_means(tl({}), ds, "height", 0, np.zeros(8))


# --- hysteresis ------------------------------------------------------------------------

def test_hysteresis_reaches_ten_percent_in_two_hours():
    # 100 aware at the event; the 110th awareness lands 7200s later
    entries = {i: 0 for i in range(1, 101)}
    for k in range(9):
        entries[101 + k] = 3600
    entries[110] = 7200
    entries[111] = 50_000
    timeline = tl(entries)
    event = EventMark("briefing", 0)
    out = hysteresis(timeline, event, thresholds=(0.10, 0.50))
    assert out[0.10] == 7200
    assert out[0.50] is None  # would need 150 aware, only 111 exist


def test_hysteresis_zero_baseline_raises():
    timeline = tl({1: 100})
    with pytest.raises(AnalyticsError, match="hysteresis baseline is zero"):
        hysteresis(timeline, EventMark("early", 50))


def test_hysteresis_monotone_in_threshold():
    rng = np.random.default_rng(3)
    entries = {int(i): int(t) for i, t in enumerate(np.sort(rng.integers(0, 10_000, 200)), start=1)}
    timeline = tl(entries)
    event = EventMark("e", 2000)
    out = hysteresis(timeline, event, thresholds=(0.05, 0.10, 0.20, 0.50, 1.00))
    times = [v for v in out.values() if v is not None]
    assert times == sorted(times)
    assert all(v >= 0 for v in times)


def test_hysteresis_cohort_restriction():
    timeline = tl({1: 0, 2: 0, 3: 100, 4: 200})
    event = EventMark("e", 0)
    full = hysteresis(timeline, event, thresholds=(1.00,))
    cohort = np.array([1, 3], dtype=np.uint64)
    half = hysteresis(timeline, event, thresholds=(1.00,), cohort_ids=cohort)
    assert full[1.00] == 200  # 2 -> 4 aware
    assert half[1.00] == 100  # 1 -> 2 aware within the cohort


# --- lead days -------------------------------------------------------------------------

def test_lead_days_counts_fastest_growth_wins():
    a = [TrendSeries("a", np.array([0.0, 0.1, 0.4, 0.4]), 10)]
    b = [TrendSeries("b", np.array([0.0, 0.1, 0.1, 0.4]), 10)]
    out = lead_days(a, b)
    # day1 tie (inf vs inf), day2 a wins (3.0 vs 0), day3 b wins (0 vs 3.0)
    assert out == LeadDays(a_leads=1, b_leads=1, ties=1)
    assert out.defined_days == 3


def test_lead_days_excludes_day_zero_and_requires_series():
    a = [TrendSeries("a", np.array([0.5, 0.5]), 5)]
    out = lead_days(a, a)
    assert out.defined_days == 1 and out.ties == 1
    with pytest.raises(AnalyticsError):
        lead_days([], a)


# --- spearman --------------------------------------------------------------------------

def test_spearman_with_ties_matches_rank_then_pearson():
    xs = [1.0, 2.0, 2.0, 4.0]
    ys = [1.0, 3.0, 2.0, 4.0]
    assert spearman(xs, ys) == pytest.approx(spearman_rank_then_pearson(xs, ys), abs=1e-12)
    # ranks (1, 2.5, 2.5, 4) vs (1, 3, 2, 4): rho = 1.125 / sqrt(1.125 * 1.25)
    assert spearman(xs, ys) == pytest.approx(3.0 / math.sqrt(10.0), abs=1e-12)


def test_spearman_monotone_transform_invariance():
    rng = np.random.default_rng(2)
    xs = rng.normal(size=40)
    ys = rng.normal(size=40)
    base = spearman(xs, ys)
    assert spearman(np.exp(xs), ys) == pytest.approx(base, abs=1e-12)
    assert spearman(xs ** 3, ys) == pytest.approx(base, abs=1e-12)
    assert spearman(2 * xs + 7, ys) == pytest.approx(base, abs=1e-12)


def test_spearman_error_cases():
    with pytest.raises(AnalyticsError, match="constant"):
        spearman([1.0, 1.0, 1.0], [1.0, 2.0, 3.0])
    with pytest.raises(AnalyticsError, match="two observations"):
        spearman([1.0], [2.0])
    with pytest.raises(AnalyticsError, match="equally long"):
        spearman([1.0, 2.0], [1.0, 2.0, 3.0])


# --- trends over a real dataset -----------------------------------------------------------

def test_group_trend_weighted_mean_reconstructs_national(small_world, timeline_small, qualified_small):
    _, dataset, _ = small_world
    trends = group_trend(timeline_small, dataset, "gender", cohort_ids=qualified_small)
    nat = national_percentage(timeline_small, dataset, cohort_ids=qualified_small)
    total = sum(t.size for t in trends)
    assert total == len(qualified_small)
    mix = sum(t.values * t.size for t in trends) / total
    assert np.allclose(mix, nat, atol=1e-12)


def test_group_trend_errors(small_world, timeline_small):
    _, dataset, _ = small_world
    with pytest.raises(AnalyticsError, match="unknown grouping"):
        group_trend(timeline_small, dataset, "star_sign")
    with pytest.raises(CohortError):
        group_trend(timeline_small, dataset, "gender", cohort_ids=np.empty(0, dtype=np.uint64))


def test_province_percentages_monotone_and_bounded(small_world, timeline_small):
    _, dataset, _ = small_world
    uniq, pct = province_percentages(timeline_small, dataset)
    assert pct.shape == (len(uniq), dataset.calendar.n_days)
    assert np.all(pct >= 0) and np.all(pct <= 1)
    assert np.all(np.diff(pct, axis=1) >= 0)  # cumulative percentages never fall


# --- geographic correlation ------------------------------------------------------------------

def geo_dataset(gdp_by_city=(1.0, 2.0, 3.0), tightness=0.5):
    regions = []
    for c, gdp in enumerate(gdp_by_city):
        r = make_region(c, province_id=c, distance=0.0 if c == 0 else 100.0 * c, n_days=5)
        regions.append(
            type(r)(**{**r.__dict__, "gdp": gdp, "cultural_tightness": tightness})
        )
    individuals = []
    next_id = 1
    for c in range(len(gdp_by_city)):
        for _ in range(4):
            individuals.append(make_individual(next_id, home_city=c))
            next_id += 1
    return Dataset(individuals, regions, [], EventLog.empty(), Calendar(0, 5))


def test_geo_correlation_perfect_when_factor_ranks_match():
    ds = geo_dataset()
    # 1, 2, 3 aware in cities 0, 1, 2: ranks match gdp = 1 < 2 < 3 every day
    entries = {}
    iid = 1
    for c in range(3):
        for k in range(4):
            if k <= c:
                entries[iid] = 0
            iid += 1
    rho = geo_correlation_series(ds, tl(entries), "gdp")
    assert np.allclose(rho, 1.0)


def test_geo_correlation_constant_factor_is_nan():
    ds = geo_dataset(gdp_by_city=(5.0, 5.0, 5.0))
    rho = geo_correlation_series(ds, tl({1: 0, 5: 0, 9: 0, 10: 0}), "gdp")
    assert np.isnan(rho).all()


def test_geo_correlation_needs_two_units():
    ds = geo_dataset(gdp_by_city=(2.0,))
    rho = geo_correlation_series(ds, tl({1: 0}), "gdp")
    assert np.isnan(rho).all()
    with pytest.raises(AnalyticsError, match="unknown factor"):
        geo_correlation_series(ds, tl({1: 0}), "altitude")


# --- event marks and formatting -----------------------------------------------------------------

def test_default_event_marks_clip_to_window():
    cal = Calendar.from_dates("2019-12-01", "2020-02-26")
    marks = default_event_marks(cal)
    assert len(marks) == 11
    assert all(cal.day_of(m.timestamp) >= 0 for m in marks)
    first = marks[0]
    assert first.label == "retrospective_first_case"
    assert first.timestamp == cal.day_start_ts(7) + 43200  # local noon
    short = Calendar.from_dates("2020-01-01", "2020-01-31")
    assert len(default_event_marks(short)) == 7


def test_format_value_sentinels():
    assert format_value(None) == "NA"
    assert format_value(float("nan")) == "NA"
    assert format_value(float("inf")) == "INF"
    assert format_value(float("-inf")) == "-INF"
    assert format_value(True) == "1"
    assert format_value(False) == "0"
    assert format_value(np.int64(7)) == "7"
    assert format_value(0.25) == "0.25"
    assert format_value("Peak") == "Peak"


def test_write_tsv_round_trip(tmp_path):
    path = tmp_path / "out.tsv"
    write_tsv(path, ["a", "b"], [[1, None], [float("inf"), "x"]])
    assert path.read_text() == "a\tb\n1\tNA\nINF\tx\n"
