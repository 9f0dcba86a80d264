"""Diffusion-pattern analytics: phases, cohort gaps, geography, hysteresis.

Everything here consumes an AwarenessTimeline plus the dataset and returns
plain arrays/dataclasses.  Undefined values are explicit: None (or NaN in
arrays) for undefined, math.inf for ratios with an empty denominator.
Day-level growth rates use the convention that a rise from zero is +inf,
zero-to-zero is 0, and day 0 (no previous day) is undefined (NaN).
"""

from dataclasses import dataclass, field

import numpy as np
from scipy.stats import rankdata

from .awareness import NEVER, awareness_percentage
from .domain import EDUCATIONS, GENDERS, OCCUPATIONS
from .errors import AnalyticsError, CohortError
from .netinfer import LAYERS, layer_fractions

PHASE_ORDER = ("Normal", "Beginning", "Growth", "Peak", "PostPeak")

GEO_FACTORS = (
    "distance_to_epicenter",
    "confirmed_cases",
    "gdp",
    "cultural_tightness",
    "paddy_rice_pct",
    "innovation_index",
    "illiteracy_pct",
    "multi_ethnic_household_pct",
)


@dataclass(frozen=True)
class EventMark:
    """A dated external event used for hysteresis and model checkpoints."""

    label: str
    timestamp: int
    scope: str = "national"
    scope_id: int = 0


# the canonical eleven news events of the 2019-12-01..2020-02-26 window
DEFAULT_EVENT_DATES = (
    ("retrospective_first_case", "2019-12-08", "city", 0),
    ("epicenter_outbreak_briefing", "2019-12-31", "national", 0),
    ("epicenter_59_cases_report", "2020-01-05", "national", 0),
    ("epicenter_exit_screening", "2020-01-16", "national", 0),
    ("h2h_transmission_confirmed", "2020-01-20", "national", 0),
    ("epicenter_lockdown", "2020-01-23", "national", 0),
    ("province_level1_response", "2020-01-24", "province", 0),
    ("national_level1_response", "2020-01-25", "national", 0),
    ("who_pheic_declared", "2020-01-31", "national", 0),
    ("epicenter_quarantine_strategies", "2020-02-02", "national", 0),
    ("disease_named", "2020-02-11", "national", 0),
)


def default_event_marks(calendar):
    """The canonical event list as EventMarks at local noon, window-clipped."""
    index = {date: d for d, date in enumerate(calendar.iso_dates())}
    out = []
    for label, date, scope, scope_id in DEFAULT_EVENT_DATES:
        d = index.get(date)
        if d is not None:
            ts = calendar.day_start_ts(d) + 43200
            out.append(EventMark(label, ts, scope, scope_id))
    return out


@dataclass(frozen=True)
class PhaseThresholds:
    """Decision thresholds for phase segmentation (fractions, not %)."""

    growth_high: float = 1.00        # province growth rate > 100%
    national_begin: float = 0.00001  # national percentage > 0.001%
    growth_peak: float = 0.10        # province growth rate vs 10%
    national_peak: float = 0.001     # national percentage > 0.1%
    province_share: float = 0.95     # "more than 95% of provinces"
    sustain_days: int = 3

    def validate(self):
        if not 0 < self.province_share <= 1:
            raise AnalyticsError("province_share must be in (0, 1]")
        if self.sustain_days < 1:
            raise AnalyticsError("sustain_days must be >= 1")
        return self


@dataclass(frozen=True)
class Phase:
    name: str
    start_day: int
    end_day: int  # inclusive

    @property
    def n_days(self):
        return self.end_day - self.start_day + 1


@dataclass
class PhaseSegmentation:
    phases: list
    complete: bool

    def phase_of_day(self, day):
        for ph in self.phases:
            if ph.start_day <= day <= ph.end_day:
                return ph.name
        return None

    def by_name(self):
        return {ph.name: ph for ph in self.phases}


@dataclass
class TrendSeries:
    """One per-day cumulative awareness percentage line for a group."""

    key: str
    values: np.ndarray
    size: int


@dataclass(frozen=True)
class NeighborhoodRatio:
    value: float  # may be math.inf; None when undefined
    numerator: float
    denominator: float
    n_aware: int
    n_unaware: int
    reason: str = ""


def daily_counts(timeline, calendar):
    """(newly aware, cumulative aware) per calendar day.

    Individuals aware before the window count into day 0; awareness after
    the window end is out of scope and ignored.
    """
    new = np.zeros(calendar.n_days, dtype=np.int64)
    if len(timeline):
        day = calendar.day_of(timeline.first_aware)
        day = np.maximum(day, 0)
        day = day[day < calendar.n_days]
        if len(day):
            new += np.bincount(day, minlength=calendar.n_days)
    return new, np.cumsum(new)


def growth_rates(values):
    """Day-over-day relative growth; index 0 is NaN (no previous day)."""
    v = np.asarray(values, dtype=np.float64)
    out = np.full(len(v), np.nan)
    if len(v) < 2:
        return out
    prev = v[:-1]
    cur = v[1:]
    with np.errstate(divide="ignore", invalid="ignore"):
        r = (cur - prev) / prev
    r = np.where(prev > 0, r, np.where(cur > 0, np.inf, 0.0))
    out[1:] = r
    return out


def _cohort_rows(dataset, cohort_ids):
    cols = dataset.columns()
    if cohort_ids is None:
        return np.arange(cols.n, dtype=np.int64)
    return cols.rows_of(np.asarray(cohort_ids, dtype=np.uint64))


def _group_percentages(timeline, dataset, group_codes, n_groups, rows):
    """Cumulative per-group awareness percentage matrix, shape (G, D)."""
    calendar = dataset.calendar
    cols = dataset.columns()
    D = calendar.n_days
    aligned = timeline.aligned(cols.ids[rows])
    # the never-aware sentinel would overflow day arithmetic; bucket it at D
    day = np.full(len(aligned), D, dtype=np.int64)
    known = aligned != NEVER
    day[known] = np.clip(calendar.day_of(aligned[known]), 0, D)
    key = group_codes.astype(np.int64) * (D + 1) + day
    counts = np.bincount(key, minlength=n_groups * (D + 1)).reshape(n_groups, D + 1)
    cum = np.cumsum(counts[:, :D], axis=1)
    sizes = np.bincount(group_codes.astype(np.int64), minlength=n_groups)
    with np.errstate(divide="ignore", invalid="ignore"):
        pct = cum / sizes[:, None]
    return pct, sizes


_GROUPINGS = {
    "gender": lambda cols: (cols.gender, list(GENDERS)),
    "education": lambda cols: (cols.education, list(EDUCATIONS)),
    "occupation": lambda cols: (cols.occupation, list(OCCUPATIONS)),
    "purchasing_power": lambda cols: (
        cols.purchasing_power - 1,
        [f"level_{k}" for k in range(1, 8)],
    ),
    "has_child": lambda cols: (cols.has_child.astype(np.int8), ["no_child", "has_child"]),
    "married": lambda cols: (cols.married.astype(np.int8), ["unmarried", "married"]),
}


def group_trend(timeline, dataset, grouping, cohort_ids=None):
    """Per-day cumulative awareness percentage for each value of a field.

    Groups with no cohort members are omitted rather than reported as 0/0.
    """
    if grouping not in _GROUPINGS:
        raise AnalyticsError(
            f"unknown grouping {grouping!r}; expected one of {sorted(_GROUPINGS)}"
        )
    cols = dataset.columns()
    rows = _cohort_rows(dataset, cohort_ids)
    if len(rows) == 0:
        raise CohortError(f"empty cohort for grouping {grouping!r}")
    codes_all, names = _GROUPINGS[grouping](cols)
    codes = codes_all[rows]
    pct, sizes = _group_percentages(timeline, dataset, codes, len(names), rows)
    return [
        TrendSeries(key=names[g], values=pct[g], size=int(sizes[g]))
        for g in range(len(names))
        if sizes[g] > 0
    ]


def province_percentages(timeline, dataset, cohort_ids=None):
    """(province_ids, matrix) of per-province awareness percentage by day."""
    rows = _cohort_rows(dataset, cohort_ids)
    if len(rows) == 0:
        raise CohortError("empty cohort for province percentages")
    province = dataset.province_of_individuals()[rows]
    uniq, codes = np.unique(province, return_inverse=True)
    pct, _ = _group_percentages(timeline, dataset, codes, len(uniq), rows)
    return uniq, pct


def national_percentage(timeline, dataset, cohort_ids=None):
    rows = _cohort_rows(dataset, cohort_ids)
    if len(rows) == 0:
        raise CohortError("empty cohort for national percentages")
    pct, _ = _group_percentages(
        timeline, dataset, np.zeros(len(rows), dtype=np.int64), 1, rows
    )
    return pct[0]


def segment_phases(province_pct, national_pct, thresholds=None):
    """Cut the window into Normal/Beginning/Growth/Peak/PostPeak.

    province_pct is a (provinces, days) matrix of cumulative awareness
    percentages; national_pct the national series.  Missing later phases
    leave the last attained phase running to the end (complete=False).
    """
    th = (thresholds or PhaseThresholds()).validate()
    province_pct = np.asarray(province_pct, dtype=np.float64)
    national_pct = np.asarray(national_pct, dtype=np.float64)
    if province_pct.ndim != 2 or province_pct.shape[1] != len(national_pct):
        raise AnalyticsError("province matrix and national series disagree on days")
    D = len(national_pct)
    rates = np.vstack([growth_rates(province_pct[p]) for p in range(len(province_pct))])

    with np.errstate(invalid="ignore"):
        hot = rates > th.growth_high
        warm = rates > th.growth_peak
        cool = rates < th.growth_peak
    begin_ok = hot.any(axis=0) & (national_pct > th.national_begin)
    peak_ok = (warm.mean(axis=0) > th.province_share) & (
        national_pct > th.national_peak
    )
    post_ok = cool.mean(axis=0) > th.province_share

    def first_at_or_after(mask, start):
        idx = np.flatnonzero(mask[start:])
        return int(idx[0]) + start if len(idx) else None

    b = first_at_or_after(begin_ok, 0)
    g = first_at_or_after(begin_ok, b + 1) if b is not None else None
    p = first_at_or_after(peak_ok, g + 1) if g is not None else None
    pp = None
    if p is not None:
        run = th.sustain_days
        sustained = np.zeros(D, dtype=bool)
        limit = D - run + 1
        if limit > 0:
            ok = np.ones(limit, dtype=bool)
            for k in range(run):
                ok &= post_ok[k : k + limit]
            sustained[:limit] = ok
        pp = first_at_or_after(sustained, p + 1)

    bounds = [0, b, g, p, pp, D]
    phases = []
    for i, name in enumerate(PHASE_ORDER):
        start = bounds[i]
        if start is None:
            break
        nxt = next(v for v in bounds[i + 1 :] if v is not None)  # D terminates
        if nxt - 1 >= start:
            phases.append(Phase(name, int(start), int(nxt - 1)))
    complete = {ph.name for ph in phases} == set(PHASE_ORDER)
    return PhaseSegmentation(phases=phases, complete=complete)


def cross_group_ratio(timeline, group_a, group_b, t):
    """P_aware(A) / P_aware(B) at time t; inf when only B is silent."""
    pa = awareness_percentage(timeline, group_a, t)
    pb = awareness_percentage(timeline, group_b, t)
    if pb > 0:
        return pa / pb
    return np.inf if pa > 0 else None


def neighborhood_awareness_ratio(graph, layer, timeline, t):
    """Mean aware-neighbor share of the aware vs of the unaware at t.

    Only individuals with at least one neighbor in the layer enter either
    average; an empty side makes the ratio undefined with a reason code.
    """
    if layer not in LAYERS:
        raise AnalyticsError(f"unknown layer {layer!r}")
    aware = timeline.aligned(graph.ids) <= t
    frac, deg = layer_fractions(graph, layer, aware)
    has = deg > 0
    a_rows = aware & has
    u_rows = ~aware & has
    n_a, n_u = int(a_rows.sum()), int(u_rows.sum())
    if n_a == 0 or n_u == 0:
        reason = "no_aware_with_neighbors" if n_a == 0 else "no_unaware_with_neighbors"
        return NeighborhoodRatio(None, np.nan, np.nan, n_a, n_u, reason)
    num = float(frac[a_rows].mean())
    den = float(frac[u_rows].mean())
    if den > 0:
        return NeighborhoodRatio(num / den, num, den, n_a, n_u)
    if num > 0:
        return NeighborhoodRatio(np.inf, num, den, n_a, n_u)
    return NeighborhoodRatio(None, num, den, n_a, n_u, "no_aware_neighbors_either_side")


def aware_group_means(timeline, dataset, grouping, t, values, cohort_ids=None):
    """Mean of a per-individual value among the aware, split by group.

    ``values`` is aligned to dataset order (e.g. purchasing power levels).
    Groups with no aware members at t get None.
    """
    if grouping not in _GROUPINGS:
        raise AnalyticsError(f"unknown grouping {grouping!r}")
    cols = dataset.columns()
    rows = _cohort_rows(dataset, cohort_ids)
    codes_all, names = _GROUPINGS[grouping](cols)
    codes = codes_all[rows]
    aware = timeline.aligned(cols.ids[rows]) <= t
    vals = np.asarray(values, dtype=np.float64)[rows]
    out = []
    for g, name in enumerate(names):
        sel = (codes == g) & aware
        n = int(sel.sum())
        out.append((name, float(vals[sel].mean()) if n else None, n))
    return out


def hysteresis(timeline, event, thresholds=(0.10, 0.50, 1.00), cohort_ids=None):
    """Seconds until the aware count grows f·N_e past its level at an event.

    N_e is the aware count at the event timestamp; the f entry is the time
    until the cumulative count first reaches N_e * (1 + f), None when the
    series ends before that.  A zero baseline is an error.
    """
    ts = timeline.first_aware
    if cohort_ids is not None:
        ts = timeline.restrict(cohort_ids).first_aware
    ts = np.sort(ts)
    n_e = int(np.searchsorted(ts, event.timestamp, side="right"))
    if n_e == 0:
        raise AnalyticsError(
            f"hysteresis baseline is zero: nobody aware at {event.label!r}"
        )
    out = {}
    for f in thresholds:
        # ceil with a nudge: counts are integers, so targets like 110.00..01
        # from float rounding must not demand one extra person
        target = int(np.ceil(n_e * (1.0 + f) - 1e-9))
        if target <= len(ts):
            out[f] = int(ts[target - 1] - event.timestamp)
        else:
            out[f] = None
    return out


@dataclass
class LeadDays:
    a_leads: int
    b_leads: int
    ties: int

    @property
    def defined_days(self):
        return self.a_leads + self.b_leads + self.ties


def lead_days(trends_a, trends_b):
    """Compare two trend families by their fastest group's daily growth.

    For each day, the growth rate of the fastest-growing group on side A
    is compared with side B's; counts how many days each side leads.  Day
    0 has no growth rate and is excluded.
    """
    if not trends_a or not trends_b:
        raise AnalyticsError("lead_days needs at least one series per side")
    ra = np.vstack([growth_rates(t.values) for t in trends_a])
    rb = np.vstack([growth_rates(t.values) for t in trends_b])
    best_a = ra.max(axis=0)
    best_b = rb.max(axis=0)
    ok = ~(np.isnan(best_a) | np.isnan(best_b))
    a = int(np.sum(best_a[ok] > best_b[ok]))
    b = int(np.sum(best_b[ok] > best_a[ok]))
    ties = int(ok.sum()) - a - b
    return LeadDays(a_leads=a, b_leads=b, ties=ties)


def spearman(xs, ys):
    """Spearman rank correlation (average ranks for ties)."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1:
        raise AnalyticsError("spearman needs two equally long vectors")
    if len(xs) < 2:
        raise AnalyticsError("spearman needs at least two observations")
    if np.ptp(xs) == 0 or np.ptp(ys) == 0:
        raise AnalyticsError("spearman is undefined for constant input")
    rx = rankdata(xs)
    ry = rankdata(ys)
    return float(np.corrcoef(rx, ry)[0, 1])


def _unit_factor(dataset, factor, unit_ids, level, D):
    """Per-unit factor values, shape (U, D); static factors repeat."""
    regions = dataset.regions
    if level == "city":
        by_unit = {r.city_id: [r] for r in regions}
    else:
        by_unit = {}
        for r in regions:
            by_unit.setdefault(r.province_id, []).append(r)
    out = np.zeros((len(unit_ids), D), dtype=np.float64)
    for k, uid in enumerate(unit_ids):
        members = by_unit[int(uid)]
        if factor == "confirmed_cases":
            total = np.zeros(D)
            for r in members:
                cases = np.asarray(r.daily_confirmed_cases, dtype=np.float64)
                if len(cases) == 0:
                    continue
                if len(cases) < D:
                    cases = np.pad(cases, (0, D - len(cases)))
                total += np.cumsum(cases[:D])
            out[k] = total
        else:
            weights = np.array([r.population_count for r in members], dtype=np.float64)
            vals = np.array([getattr(r, factor) for r in members], dtype=np.float64)
            out[k] = np.sum(vals * weights) / weights.sum()
    return out


def geo_correlation_series(dataset, timeline, factor, level="province", cohort_ids=None):
    """Daily Spearman rho between a regional factor and awareness percentage.

    Units are cities or provinces that hold at least one cohort member.
    Days where either side is constant (e.g. before anyone is aware) give
    NaN.
    """
    if factor not in GEO_FACTORS:
        raise AnalyticsError(
            f"unknown factor {factor!r}; expected one of {sorted(GEO_FACTORS)}"
        )
    if level not in ("city", "province"):
        raise AnalyticsError("level must be 'city' or 'province'")
    rows = _cohort_rows(dataset, cohort_ids)
    if len(rows) == 0:
        raise CohortError("empty cohort for geographic correlation")
    cols = dataset.columns()
    unit_of = (
        cols.home_city if level == "city" else dataset.province_of_individuals()
    )
    unit = unit_of[rows]
    unit_ids, codes = np.unique(unit, return_inverse=True)
    D = dataset.calendar.n_days
    pct, _ = _group_percentages(timeline, dataset, codes, len(unit_ids), rows)
    fac = _unit_factor(dataset, factor, unit_ids, level, D)
    out = np.full(D, np.nan)
    if len(unit_ids) < 2:
        return out
    for d in range(D):
        try:
            out[d] = spearman(fac[:, d], pct[:, d])
        except AnalyticsError:
            pass
    return out


# ---------------------------------------------------------------------------
# tabular output helpers (TSV with NA / INF sentinels)
# ---------------------------------------------------------------------------

def format_value(v):
    if v is None:
        return "NA"
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        f = float(v)
        if np.isnan(f):
            return "NA"
        if np.isinf(f):
            return "INF" if f > 0 else "-INF"
        return format(f, ".10g")
    return str(v)


def write_tsv(path, header, rows):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\t".join(header) + "\n")
        for row in rows:
            fh.write("\t".join(format_value(v) for v in row) + "\n")
