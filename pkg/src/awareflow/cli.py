"""Command-line pipeline driver.

Subcommands cover the full run: ``gen`` simulates a dataset, ``infer-net``
rebuilds the shared-address networks, ``label`` derives awareness labels
and the qualified cohort, ``segment`` computes trends and phases,
``cohort`` the group-level analytics, ``geo-corr`` the geographic
correlation series, ``regress`` the time-evolving model suite, ``report``
a summary bundle, and ``all`` chains them in order.

Every subcommand writes its artifacts plus a deterministic manifest (no
timestamps, no absolute paths) so that identical config + seed runs are
byte-identical.  Exit codes: 0 ok, 2 config error, 3 missing artifact,
4 data integrity, 5 numerical/analytic failure.
"""

import argparse
import hashlib
import json
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .analytics import (
    EventMark,
    Phase,
    PhaseSegmentation,
    PhaseThresholds,
    daily_counts,
    default_event_marks,
    format_value,
    geo_correlation_series,
    group_trend,
    growth_rates,
    hysteresis,
    lead_days,
    aware_group_means,
    national_percentage,
    neighborhood_awareness_ratio,
    province_percentages,
    segment_phases,
    write_tsv,
    GEO_FACTORS,
)
from .awareness import (
    AwarenessTimeline,
    compile_query_set,
    filter_qualified,
    history_window,
    label_awareness,
    load_patterns,
)
from .domain import (
    ADDRESS_KINDS,
    Calendar,
    load_dataset,
    save_dataset,
    validate_dataset,
)
from .errors import (
    AnalyticsError,
    AwareflowError,
    CohortError,
    ConfigError,
    DegenerateOutcomeError,
    IntegrityError,
    MissingArtifactError,
    NumericalError,
    ParseError,
    PatternSyntaxError,
)
from .kernels import counter_uniforms
from .netinfer import DEFAULT_CAPS, LAYERS, infer_networks, read_edges, write_edges
from .presets import PRESET_NAMES, default_patterns_path, load_preset
from .regress import (
    FeatureSpec,
    FitConfig,
    checkpoint_schedule,
    run_time_evolving,
    typical_profile,
)
from .simulate import SimConfig, generate

DAY = 86400
# RNG stream for drawing the regression sample; simulator streams are < 100
SAMPLE_STREAM = 101

GROUPINGS = (
    "gender",
    "education",
    "occupation",
    "purchasing_power",
    "has_child",
    "married",
)

COMMANDS = (
    "gen",
    "infer-net",
    "label",
    "segment",
    "cohort",
    "geo-corr",
    "regress",
    "report",
    "all",
)

REGRESSION_DEFAULTS = {
    "sample_size": 100_000,
    "max_iter": 100,
    "tol": 1e-8,
    "ridge": 1e-4,
    "coef_cap": 30.0,
    "age_mode": "linear",
    "pct_min": 1,
    "pct_max": 95,
    "p_threshold": 0.05,
}


# ---------------------------------------------------------------------------
# run configuration
# ---------------------------------------------------------------------------

@dataclass
class RunConfig:
    out_dir: str = "runs/out"
    dataset_dir: str = None  # defaults to <out_dir>/dataset
    seed: int = 1
    jobs: int = 0  # 0 = all cores
    patterns: str = None  # None = bundled default pattern file
    threshold: int = 3
    history_months: int = 60
    min_purchases_per_month: int = 1
    caps: dict = field(default_factory=lambda: dict(DEFAULT_CAPS))
    phase_thresholds: dict = field(default_factory=dict)
    marks: list = None  # None = canonical event list; [] = no events
    regression: dict = field(default_factory=dict)
    simulator: dict = None

    @classmethod
    def from_dict(cls, data):
        if not isinstance(data, dict):
            raise ConfigError("run config must be a JSON object")
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown run config keys: {', '.join(unknown)}")
        cfg = cls(**data)
        cfg.validate()
        return cfg

    def validate(self):
        problems = []
        if not isinstance(self.seed, int) or self.seed < 0:
            problems.append("seed must be a non-negative integer")
        if not isinstance(self.jobs, int) or self.jobs < 0:
            problems.append("jobs must be a non-negative integer")
        if self.threshold < 1:
            problems.append("threshold must be >= 1")
        if self.history_months < 1:
            problems.append("history_months must be >= 1")
        if self.min_purchases_per_month < 1:
            problems.append("min_purchases_per_month must be >= 1")
        if not isinstance(self.caps, dict):
            problems.append("caps must be an object")
        else:
            bad = sorted(set(self.caps) - set(ADDRESS_KINDS))
            if bad:
                problems.append(f"caps has unknown address kinds: {', '.join(bad)}")
            for k, v in self.caps.items():
                if not isinstance(v, int) or v < 2:
                    problems.append(f"cap for {k!r} must be an integer >= 2")
        unknown = sorted(set(self.regression) - set(REGRESSION_DEFAULTS))
        if unknown:
            problems.append(f"unknown regression keys: {', '.join(unknown)}")
        if self.marks is not None:
            if not isinstance(self.marks, list):
                problems.append("marks must be a list or null")
            else:
                for m in self.marks:
                    if not isinstance(m, dict) or "label" not in m or "timestamp" not in m:
                        problems.append("each mark needs label and timestamp")
                        break
        if problems:
            raise ConfigError("; ".join(problems))
        return self

    def to_dict(self):
        return {
            "out_dir": self.out_dir,
            "dataset_dir": self.dataset_dir,
            "seed": self.seed,
            "jobs": self.jobs,
            "patterns": self.patterns,
            "threshold": self.threshold,
            "history_months": self.history_months,
            "min_purchases_per_month": self.min_purchases_per_month,
            "caps": dict(self.caps),
            "phase_thresholds": dict(self.phase_thresholds),
            "marks": self.marks,
            "regression": dict(self.regression),
            "simulator": self.simulator,
        }

    # resolved accessors ----------------------------------------------------

    def resolved_dataset_dir(self):
        return self.dataset_dir or os.path.join(self.out_dir, "dataset")

    def patterns_path(self):
        return self.patterns or default_patterns_path()

    def thresholds(self):
        extra = dict(self.phase_thresholds)
        known = set(PhaseThresholds.__dataclass_fields__)
        unknown = sorted(set(extra) - known)
        if unknown:
            raise ConfigError(f"unknown phase threshold keys: {', '.join(unknown)}")
        try:
            return PhaseThresholds(**extra).validate()
        except AnalyticsError as exc:
            raise ConfigError(str(exc))

    def regression_config(self):
        merged = {**REGRESSION_DEFAULTS, **self.regression}
        if merged["sample_size"] < 1:
            raise ConfigError("regression.sample_size must be >= 1")
        if not 1 <= merged["pct_min"] <= merged["pct_max"] <= 100:
            raise ConfigError("regression percentages must satisfy 1 <= min <= max <= 100")
        return merged

    def event_marks(self, calendar):
        if self.marks is None:
            return default_event_marks(calendar)
        out = []
        for m in self.marks:
            out.append(
                EventMark(
                    label=str(m["label"]),
                    timestamp=int(m["timestamp"]),
                    scope=str(m.get("scope", "national")),
                    scope_id=int(m.get("scope_id", 0)),
                )
            )
        return out

    def digest(self):
        """Hash of the semantic config: everything except where it is written."""
        data = self.to_dict()
        data.pop("out_dir")
        data.pop("dataset_dir")
        blob = json.dumps(data, sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def load_run_config(spec_arg):
    """--config accepts a bundled preset name or a path to a JSON file."""
    if spec_arg in PRESET_NAMES:
        return RunConfig.from_dict(load_preset(spec_arg))
    if not os.path.exists(spec_arg):
        raise ConfigError(
            f"config {spec_arg!r} is neither a preset ({', '.join(PRESET_NAMES)}) "
            f"nor an existing file"
        )
    with open(spec_arg, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"{spec_arg}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}"
            )
    return RunConfig.from_dict(data)


def apply_flags(cfg, args):
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out_dir = args.out
    if args.jobs is not None:
        cfg.jobs = args.jobs
    if args.patterns is not None:
        if not os.path.exists(args.patterns):
            raise ConfigError(f"pattern file {args.patterns!r} does not exist")
        cfg.patterns = args.patterns
    if args.phase_thresholds is not None:
        with open(args.phase_thresholds, "r", encoding="utf-8") as fh:
            try:
                cfg.phase_thresholds = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ConfigError(
                    f"{args.phase_thresholds}:{exc.lineno}:{exc.colno}: "
                    f"invalid JSON: {exc.msg}"
                )
    cfg.validate()
    cfg.thresholds()
    cfg.regression_config()
    return cfg


# ---------------------------------------------------------------------------
# pipeline state: artifacts on disk, cached in memory for `all`
# ---------------------------------------------------------------------------

class PipelineState:
    """Lazy access to pipeline artifacts.

    Each accessor serves the in-memory object when a previous step of the
    same process produced it, otherwise loads from disk, otherwise raises
    MissingArtifactError naming the subcommand that would create it.
    """

    def __init__(self, cfg):
        self.cfg = cfg
        self._dataset = None
        self._graph = None
        self._timeline = None
        self._qualified = None
        self._segmentation = None
        self._matcher = None

    # path helpers ----------------------------------------------------------

    def out_path(self, name):
        return os.path.join(self.cfg.out_dir, name)

    def dataset_path(self, name):
        return os.path.join(self.cfg.resolved_dataset_dir(), name)

    def rel(self, path):
        rp = os.path.relpath(path, self.cfg.out_dir)
        if rp.startswith(".."):
            # out-of-tree input (e.g. the bundled pattern file): a relative
            # path would encode where the run directory sits, breaking
            # byte-identity across runs, so record just the file name
            return os.path.basename(path)
        return rp.replace(os.sep, "/")

    # artifact accessors ----------------------------------------------------

    def dataset(self):
        if self._dataset is None:
            ddir = self.cfg.resolved_dataset_dir()
            names = ("population.jsonl", "regions.jsonl", "addresses.jsonl", "events.jsonl")
            paths = [os.path.join(ddir, n) for n in names]
            for n, p in zip(names, paths):
                if not os.path.exists(p):
                    raise MissingArtifactError(os.path.join(ddir, n), "gen")
            calendar = None
            cal_path = os.path.join(ddir, "calendar.json")
            if os.path.exists(cal_path):
                with open(cal_path, "r", encoding="utf-8") as fh:
                    c = json.load(fh)
                calendar = Calendar.from_dates(c["start_date"], c["end_date"])
            self._dataset = load_dataset(*paths, calendar=calendar)
        return self._dataset

    def graph(self):
        if self._graph is None:
            path = self.out_path("networks.edges")
            if not os.path.exists(path):
                raise MissingArtifactError("networks.edges", "infer-net")
            self._graph = read_edges(path, self.dataset().columns().ids)
        return self._graph

    def timeline(self):
        if self._timeline is None:
            path = self.out_path("labels.tsv")
            if not os.path.exists(path):
                raise MissingArtifactError("labels.tsv", "label")
            ids, ts = [], []
            with open(path, "r", encoding="utf-8") as fh:
                next(fh)  # header
                for line in fh:
                    parts = line.rstrip("\n").split("\t")
                    ids.append(int(parts[0]))
                    ts.append(int(parts[1]))
            self._timeline = AwarenessTimeline(
                np.array(ids, dtype=np.uint64), np.array(ts, dtype=np.int64)
            )
        return self._timeline

    def qualified(self):
        if self._qualified is None:
            path = self.out_path("qualified.txt")
            if not os.path.exists(path):
                raise MissingArtifactError("qualified.txt", "label")
            with open(path, "r", encoding="utf-8") as fh:
                vals = [int(line) for line in fh if line.strip()]
            self._qualified = np.array(sorted(vals), dtype=np.uint64)
        return self._qualified

    def segmentation(self):
        if self._segmentation is None:
            path = self.out_path("phases.tsv")
            if not os.path.exists(path):
                raise MissingArtifactError("phases.tsv", "segment")
            phases, complete = [], True
            with open(path, "r", encoding="utf-8") as fh:
                next(fh)
                for line in fh:
                    parts = line.rstrip("\n").split("\t")
                    phases.append(Phase(parts[0], int(parts[1]), int(parts[2])))
                    complete = parts[5] == "1"
            self._segmentation = PhaseSegmentation(phases, complete)
        return self._segmentation

    def matcher(self):
        if self._matcher is None:
            self._matcher = compile_query_set(load_patterns(self.cfg.patterns_path()))
        return self._matcher

    def cohort_timeline(self):
        return self.timeline().restrict(self.qualified())


# ---------------------------------------------------------------------------
# manifests
# ---------------------------------------------------------------------------

def sha256_file(path):
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 22), b""):
            h.update(chunk)
    return h.hexdigest()


def write_manifest(state, command, inputs, outputs, stats=None):
    cfg = state.cfg
    manifest = {
        "command": command,
        "version": __version__,
        "seed": cfg.seed,
        "config_sha256": cfg.digest(),
        "inputs": {state.rel(p): sha256_file(p) for p in inputs},
        "outputs": {state.rel(p): sha256_file(p) for p in outputs},
        "stats": stats or {},
    }
    path = state.out_path(f"manifest_{command.replace('-', '_')}.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def read_manifest(state, command):
    path = state.out_path(f"manifest_{command.replace('-', '_')}.json")
    if not os.path.exists(path):
        raise MissingArtifactError(os.path.basename(path), command)
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def day_end_ts(calendar, d):
    return calendar.day_start_ts(d) + DAY - 1


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_gen(state):
    cfg = state.cfg
    if cfg.simulator is None:
        raise ConfigError("config has no simulator section; `gen` needs one")
    sim = SimConfig.from_dict(cfg.simulator)
    sim.seed = cfg.seed
    sim.validate()
    dataset, truth = generate(sim)
    report = validate_dataset(dataset)
    if report.violations:
        raise IntegrityError(
            "generated dataset failed validation: " + "; ".join(report.violations[:10]),
            report.violations,
        )
    ddir = cfg.resolved_dataset_dir()
    paths = save_dataset(dataset, ddir)
    truth_paths = truth.save(ddir)
    cal_path = os.path.join(ddir, "calendar.json")
    iso = dataset.calendar.iso_dates()
    with open(cal_path, "w", encoding="utf-8") as fh:
        json.dump({"start_date": iso[0], "end_date": iso[-1]}, fh, sort_keys=True)
        fh.write("\n")
    state._dataset = dataset
    outputs = list(paths.values()) + list(truth_paths.values()) + [cal_path]
    stats = {
        "individuals": len(dataset.individuals),
        "regions": len(dataset.regions),
        "addresses": len(dataset.addresses),
        "events": len(dataset.events),
        "truth_aware": len(truth.timeline),
        "n_days": dataset.calendar.n_days,
    }
    return write_manifest(state, "gen", [], outputs, stats)


def cmd_infer_net(state):
    cfg = state.cfg
    dataset = state.dataset()
    caps = {**DEFAULT_CAPS, **cfg.caps}
    graph = infer_networks(dataset.addresses, caps=caps, ids=dataset.columns().ids)
    path = state.out_path("networks.edges")
    write_edges(graph, path)
    state._graph = graph
    inputs = [state.dataset_path("addresses.jsonl"), state.dataset_path("population.jsonl")]
    stats = {"edges": {name: int(graph.layer(name).edge_count) for name in LAYERS}}
    return write_manifest(state, "infer-net", inputs, [path], stats)


def cmd_label(state):
    cfg = state.cfg
    dataset = state.dataset()
    calendar = dataset.calendar
    matcher = state.matcher()
    window = history_window(calendar, cfg.history_months)
    qualified = filter_qualified(
        dataset.events, window, min_per_month=cfg.min_purchases_per_month
    )
    timeline = label_awareness(dataset.events, matcher, threshold=cfg.threshold)

    qual_path = state.out_path("qualified.txt")
    with open(qual_path, "w", encoding="utf-8") as fh:
        fh.write("".join(f"{int(i)}\n" for i in qualified))

    labels_path = state.out_path("labels.tsv")
    iso = calendar.iso_dates()
    days = calendar.day_of(timeline.first_aware) if len(timeline) else np.empty(0, int)
    rows = []
    for k in range(len(timeline)):
        d = int(days[k])
        date = iso[d] if 0 <= d < calendar.n_days else "NA"
        rows.append((int(timeline.ids[k]), int(timeline.first_aware[k]), d, date))
    write_tsv(
        labels_path,
        ("individual_id", "first_aware_ts", "first_aware_day", "first_aware_date"),
        rows,
    )
    state._timeline = timeline
    state._qualified = qualified
    inputs = [state.dataset_path("events.jsonl"), cfg.patterns_path()]
    n_qual_aware = int(np.isin(timeline.ids, qualified).sum())
    stats = {
        "aware": len(timeline),
        "qualified": int(len(qualified)),
        "qualified_aware": n_qual_aware,
        "threshold": cfg.threshold,
    }
    return write_manifest(state, "label", inputs, [qual_path, labels_path], stats)


def cmd_segment(state):
    cfg = state.cfg
    dataset = state.dataset()
    calendar = dataset.calendar
    qualified = state.qualified()
    tlq = state.cohort_timeline()
    iso = calendar.iso_dates()

    new, cum = daily_counts(tlq, calendar)
    nat = national_percentage(tlq, dataset, qualified)
    nat_growth = growth_rates(nat)
    nat_path = state.out_path("national_trend.tsv")
    write_tsv(
        nat_path,
        ("day", "date", "new_aware", "cumulative_aware", "percentage", "growth_rate"),
        [
            (d, iso[d], int(new[d]), int(cum[d]), nat[d], nat_growth[d])
            for d in range(calendar.n_days)
        ],
    )

    prov_ids, prov = province_percentages(tlq, dataset, qualified)
    prov_path = state.out_path("province_trend.tsv")
    prov_rows = []
    for k, pid in enumerate(prov_ids):
        g = growth_rates(prov[k])
        for d in range(calendar.n_days):
            prov_rows.append((d, iso[d], int(pid), prov[k, d], g[d]))
    write_tsv(prov_path, ("day", "date", "province_id", "percentage", "growth_rate"), prov_rows)

    seg = segment_phases(prov, nat, cfg.thresholds())
    phases_path = state.out_path("phases.tsv")
    write_tsv(
        phases_path,
        ("phase", "start_day", "end_day", "start_date", "end_date", "complete"),
        [
            (p.name, p.start_day, p.end_day, iso[p.start_day], iso[p.end_day], seg.complete)
            for p in seg.phases
        ],
    )
    state._segmentation = seg
    inputs = [state.out_path("labels.tsv"), state.out_path("qualified.txt")]
    stats = {
        "complete": seg.complete,
        "phases": {p.name: [p.start_day, p.end_day] for p in seg.phases},
        "final_percentage": float(nat[-1]),
    }
    return write_manifest(state, "segment", inputs, [nat_path, prov_path, phases_path], stats)


def cmd_cohort(state):
    cfg = state.cfg
    dataset = state.dataset()
    calendar = dataset.calendar
    qualified = state.qualified()
    timeline = state.timeline()
    tlq = state.cohort_timeline()
    graph = state.graph()
    seg = state.segmentation()
    iso = calendar.iso_dates()
    D = calendar.n_days
    outputs = []

    # per-group awareness trends
    trends = {g: group_trend(tlq, dataset, g, qualified) for g in GROUPINGS}
    trend_rows = []
    for grouping in GROUPINGS:
        for series in trends[grouping]:
            for d in range(D):
                trend_rows.append(
                    (grouping, series.key, series.size, d, iso[d], series.values[d])
                )
    trends_path = state.out_path("trends.tsv")
    write_tsv(
        trends_path,
        ("grouping", "group", "group_size", "day", "date", "percentage"),
        trend_rows,
    )
    outputs.append(trends_path)

    # pairwise cross-group ratios from the same series (inf when only the
    # denominator is silent, NA when both are)
    ratio_rows = []
    for grouping in GROUPINGS:
        series = trends[grouping]
        for a in range(len(series)):
            for b in range(a + 1, len(series)):
                pa, pb = series[a].values, series[b].values
                for d in range(D):
                    if pb[d] > 0:
                        r = pa[d] / pb[d]
                    elif pa[d] > 0:
                        r = np.inf
                    else:
                        r = None
                    ratio_rows.append(
                        (grouping, series[a].key, series[b].key, d, iso[d], r)
                    )
    ratios_path = state.out_path("cross_ratios.tsv")
    write_tsv(
        ratios_path,
        ("grouping", "group_a", "group_b", "day", "date", "ratio"),
        ratio_rows,
    )
    outputs.append(ratios_path)

    # neighborhood awareness ratios per layer per day, plus phase means
    nb_rows = []
    nb_values = {}
    for layer in LAYERS:
        vals = np.full(D, np.nan)
        for d in range(D):
            r = neighborhood_awareness_ratio(graph, layer, tlq, day_end_ts(calendar, d))
            nb_rows.append(
                (
                    layer, d, iso[d], r.value, r.numerator, r.denominator,
                    r.n_aware, r.n_unaware, r.reason or "ok",
                )
            )
            if r.value is not None and np.isfinite(r.value):
                vals[d] = r.value
        nb_values[layer] = vals
    nb_path = state.out_path("neighborhood_ratios.tsv")
    write_tsv(
        nb_path,
        (
            "layer", "day", "date", "ratio", "numerator", "denominator",
            "n_aware", "n_unaware", "status",
        ),
        nb_rows,
    )
    outputs.append(nb_path)

    mean_rows = []
    for layer in LAYERS:
        for p in seg.phases:
            window = nb_values[layer][p.start_day : p.end_day + 1]
            defined = window[~np.isnan(window)]
            mean = float(defined.mean()) if len(defined) else None
            mean_rows.append((layer, p.name, mean, len(defined), p.n_days))
    means_path = state.out_path("neighborhood_phase_means.tsv")
    write_tsv(
        means_path,
        ("layer", "phase", "mean_ratio", "n_defined", "n_days"),
        mean_rows,
    )
    outputs.append(means_path)

    # mean purchasing power of the aware, by occupation
    pp_rows = []
    pp_values = dataset.columns().purchasing_power.astype(np.float64)
    for d in range(D):
        for name, mean, n in aware_group_means(
            tlq, dataset, "occupation", day_end_ts(calendar, d), pp_values, qualified
        ):
            pp_rows.append((name, d, iso[d], mean, n))
    pp_path = state.out_path("aware_purchasing_power.tsv")
    write_tsv(
        pp_path,
        ("group", "day", "date", "mean_purchasing_power", "n_aware"),
        pp_rows,
    )
    outputs.append(pp_path)

    # hysteresis per event mark
    hys_rows = []
    for mark in cfg.event_marks(calendar):
        d = int(calendar.day_of(mark.timestamp))
        date = iso[d] if 0 <= d < D else "NA"
        try:
            durations = hysteresis(timeline, mark, cohort_ids=qualified)
        except AnalyticsError:
            hys_rows.append((mark.label, mark.timestamp, date, 0, None, None, "zero_baseline"))
            continue
        ts = np.sort(tlq.first_aware)
        n_e = int(np.searchsorted(ts, mark.timestamp, side="right"))
        for f in sorted(durations):
            dur = durations[f]
            status = "ok" if dur is not None else "absent"
            hys_rows.append((mark.label, mark.timestamp, date, n_e, f, dur, status))
    hys_path = state.out_path("hysteresis.tsv")
    write_tsv(
        hys_path,
        (
            "event", "event_time", "event_date", "baseline_count",
            "threshold", "duration_seconds", "status",
        ),
        hys_rows,
    )
    outputs.append(hys_path)

    # which factorization's fastest group leads, day by day
    ld = lead_days(trends["occupation"], trends["purchasing_power"])
    lead_path = state.out_path("lead_days.tsv")
    write_tsv(
        lead_path,
        ("factorization_a", "factorization_b", "a_leads", "b_leads", "ties", "defined_days"),
        [("occupation", "purchasing_power", ld.a_leads, ld.b_leads, ld.ties, ld.defined_days)],
    )
    outputs.append(lead_path)

    inputs = [
        state.out_path("labels.tsv"),
        state.out_path("qualified.txt"),
        state.out_path("networks.edges"),
        state.out_path("phases.tsv"),
    ]
    stats = {
        "lead_days": {"a_leads": ld.a_leads, "b_leads": ld.b_leads, "ties": ld.ties},
        "groupings": list(GROUPINGS),
    }
    return write_manifest(state, "cohort", inputs, outputs, stats)


def cmd_geo_corr(state):
    dataset = state.dataset()
    calendar = dataset.calendar
    qualified = state.qualified()
    tlq = state.cohort_timeline()
    iso = calendar.iso_dates()
    rows = []
    plans = [("city", "distance_to_epicenter")]
    plans += [("province", f) for f in GEO_FACTORS]
    for level, factor in plans:
        rho = geo_correlation_series(dataset, tlq, factor, level=level, cohort_ids=qualified)
        for d in range(calendar.n_days):
            rows.append((level, factor, d, iso[d], rho[d]))
    path = state.out_path("geo_correlations.tsv")
    write_tsv(path, ("level", "factor", "day", "date", "rho"), rows)
    inputs = [state.out_path("labels.tsv"), state.out_path("qualified.txt")]
    return write_manifest(state, "geo-corr", inputs, [path], {"series": len(plans)})


def regression_sample(cfg, qualified):
    """Deterministic sample of the qualified cohort for model fitting."""
    reg = cfg.regression_config()
    size = reg["sample_size"]
    if size >= len(qualified):
        raise ConfigError(
            f"regression.sample_size ({size}) must be smaller than the "
            f"qualified cohort ({len(qualified)}); the rest estimates "
            f"network features"
        )
    u = counter_uniforms(cfg.seed, SAMPLE_STREAM, qualified, 0)
    order = np.lexsort((qualified, u))
    return np.sort(qualified[order[:size]])


def cmd_regress(state):
    cfg = state.cfg
    dataset = state.dataset()
    calendar = dataset.calendar
    qualified = state.qualified()
    tlq = state.cohort_timeline()
    graph = state.graph()
    seg = state.segmentation()
    reg = cfg.regression_config()
    iso = calendar.iso_dates()

    marks = cfg.event_marks(calendar)
    schedule = checkpoint_schedule(
        tlq, qualified, marks, pct_min=reg["pct_min"], pct_max=reg["pct_max"]
    )

    def date_of(ts):
        d = int(calendar.day_of(ts))
        return iso[d] if 0 <= d < calendar.n_days else "NA"

    sched_path = state.out_path("schedule.tsv")
    write_tsv(
        sched_path,
        ("position", "kind", "trigger", "time", "date", "value"),
        [
            (k, c.kind, c.trigger, c.time, date_of(c.time), c.value)
            for k, c in enumerate(schedule.entries)
        ],
    )

    sample = regression_sample(cfg, qualified)
    spec = FeatureSpec(age_mode=reg["age_mode"])
    fit_config = FitConfig(
        max_iter=reg["max_iter"],
        tol=reg["tol"],
        ridge=reg["ridge"],
        coef_cap=reg["coef_cap"],
    )
    jobs = cfg.jobs if cfg.jobs > 0 else None
    models = run_time_evolving(
        dataset, graph, tlq, schedule, sample, spec, fit_config, jobs=jobs
    )

    reg_rows = []
    for k, m in enumerate(models):
        c = m.checkpoint
        base = (k, c.kind, c.trigger, c.time, date_of(c.time), m.n_obs, m.n_aware)
        if m.result is None:
            reg_rows.append(
                base + (None, None, None, "NA", None, None, None, None, None, m.error)
            )
            continue
        r = m.result
        for j, feature in enumerate(r.names):
            reg_rows.append(
                base
                + (
                    r.converged, r.ridge_used, r.n_iter, feature, r.coef[j],
                    r.se[j], r.z[j], r.p[j], r.odds_ratio[j], None,
                )
            )
    reg_path = state.out_path("regression.tsv")
    write_tsv(
        reg_path,
        (
            "position", "kind", "trigger", "time", "date", "n_obs", "n_aware",
            "converged", "ridge", "n_iter", "feature", "coefficient",
            "std_error", "z", "p_value", "odds_ratio", "error",
        ),
        reg_rows,
    )

    profile = typical_profile(models, seg, calendar, p_threshold=reg["p_threshold"])
    prof_path = state.out_path("profiles.tsv")
    write_tsv(
        prof_path,
        ("phase", "feature", "direction", "n_significant", "n_models"),
        [(e.phase, e.feature, e.direction, e.n_significant, e.n_models) for e in profile],
    )

    inputs = [
        state.out_path("labels.tsv"),
        state.out_path("qualified.txt"),
        state.out_path("networks.edges"),
        state.out_path("phases.tsv"),
    ]
    n_failed = sum(1 for m in models if m.result is None)
    stats = {
        "checkpoints": len(schedule.entries),
        "missing_percentages": schedule.missing,
        "sample_size": int(len(sample)),
        "failed_fits": n_failed,
        "ridge_fits": sum(1 for m in models if m.result is not None and m.result.ridge_used),
    }
    return write_manifest(
        state, "regress", inputs, [sched_path, reg_path, prof_path], stats
    )


def _read_tsv(path):
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        rows = [line.rstrip("\n").split("\t") for line in fh]
    return header, rows


def cmd_report(state):
    """Summary bundle assembled from the artifacts (never from memory, so
    `all` and stepwise invocations produce identical bytes)."""
    cfg = state.cfg
    gen_stats = read_manifest(state, "gen")["stats"]
    net_stats = read_manifest(state, "infer-net")["stats"]
    label_stats = read_manifest(state, "label")["stats"]
    segment_stats = read_manifest(state, "segment")["stats"]
    cohort_stats = read_manifest(state, "cohort")["stats"]
    read_manifest(state, "geo-corr")
    regress_stats = read_manifest(state, "regress")["stats"]

    _, phase_rows = _read_tsv(state.out_path("phases.tsv"))
    phases = [
        {
            "phase": r[0],
            "start_day": int(r[1]),
            "end_day": int(r[2]),
            "start_date": r[3],
            "end_date": r[4],
        }
        for r in phase_rows
    ]
    _, profile_rows = _read_tsv(state.out_path("profiles.tsv"))
    profiles = [
        {"phase": r[0], "feature": r[1], "direction": r[2]} for r in profile_rows
    ]
    _, geo_rows = _read_tsv(state.out_path("geo_correlations.tsv"))
    geo_peak = {}
    for level, factor, day, date, rho in geo_rows:
        if rho in ("NA", "INF", "-INF"):
            continue
        key = f"{level}/{factor}"
        val = float(rho)
        if key not in geo_peak or abs(val) > abs(geo_peak[key]["rho"]):
            geo_peak[key] = {"day": int(day), "date": date, "rho": val}
    _, hys_rows = _read_tsv(state.out_path("hysteresis.tsv"))
    n_hys_ok = sum(1 for r in hys_rows if r[6] == "ok")

    report = {
        "version": __version__,
        "seed": cfg.seed,
        "config_sha256": cfg.digest(),
        "population": gen_stats,
        "network_edges": net_stats.get("edges", {}),
        "labeling": label_stats,
        "phases": phases,
        "phases_complete": segment_stats.get("complete"),
        "final_percentage": segment_stats.get("final_percentage"),
        "lead_days": cohort_stats.get("lead_days"),
        "hysteresis_defined": n_hys_ok,
        "schedule": {
            "checkpoints": regress_stats.get("checkpoints"),
            "missing_percentages": regress_stats.get("missing_percentages"),
            "failed_fits": regress_stats.get("failed_fits"),
        },
        "profiles": profiles,
        "geo_peak_rho": geo_peak,
    }
    json_path = state.out_path("report.json")
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")

    lines = [
        f"awareness pipeline report (seed {cfg.seed})",
        "",
        f"individuals: {gen_stats.get('individuals')}  events: {gen_stats.get('events')}",
        f"qualified: {label_stats.get('qualified')}  aware: {label_stats.get('aware')}"
        f"  final pct: {format_value(report['final_percentage'])}",
        "edges: "
        + "  ".join(f"{k}={v}" for k, v in sorted(report["network_edges"].items())),
        "",
        "phases" + ("" if report["phases_complete"] else " (incomplete)") + ":",
    ]
    for p in phases:
        lines.append(
            f"  {p['phase']:<10} {p['start_date']} .. {p['end_date']}"
            f" (days {p['start_day']}-{p['end_day']})"
        )
    lines.append("")
    lines.append(
        f"checkpoints: {report['schedule']['checkpoints']}"
        f"  missing: {len(report['schedule']['missing_percentages'] or [])}"
        f"  failed fits: {report['schedule']['failed_fits']}"
    )
    ld = report["lead_days"] or {}
    lines.append(
        f"lead days (occupation vs purchasing power): "
        f"{ld.get('a_leads')} vs {ld.get('b_leads')} (ties {ld.get('ties')})"
    )
    lines.append("")
    lines.append("typical profile:")
    for pr in profiles:
        lines.append(f"  {pr['phase']:<10} {pr['direction']:<8} {pr['feature']}")
    txt_path = state.out_path("report.txt")
    with open(txt_path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")

    inputs = [
        state.out_path("phases.tsv"),
        state.out_path("profiles.tsv"),
        state.out_path("geo_correlations.tsv"),
        state.out_path("hysteresis.tsv"),
    ]
    return write_manifest(state, "report", inputs, [json_path, txt_path])


STEP_ORDER = ("gen", "infer-net", "label", "segment", "cohort", "geo-corr", "regress", "report")

STEP_FUNCS = {
    "gen": cmd_gen,
    "infer-net": cmd_infer_net,
    "label": cmd_label,
    "segment": cmd_segment,
    "cohort": cmd_cohort,
    "geo-corr": cmd_geo_corr,
    "regress": cmd_regress,
    "report": cmd_report,
}


def cmd_all(state):
    manifests = []
    for name in STEP_ORDER:
        manifests.append(STEP_FUNCS[name](state))
        print(f"[{name}] ok", flush=True)
    outputs = sorted(manifests)
    return write_manifest(state, "all", [], outputs, {"steps": list(STEP_ORDER)})


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

EXIT_CODES = (
    ((ConfigError, PatternSyntaxError), 2),
    ((MissingArtifactError,), 3),
    ((ParseError, IntegrityError), 4),
    ((NumericalError, DegenerateOutcomeError, AnalyticsError, CohortError), 5),
)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="awareflow",
        description="batch pipeline for awareness diffusion analytics",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name, help=f"run the {name} stage")
        p.add_argument(
            "--config",
            default="small",
            help=f"preset name ({', '.join(PRESET_NAMES)}) or JSON config path",
        )
        p.add_argument("--seed", type=int, default=None, help="override the run seed")
        p.add_argument("--out", default=None, help="override the output directory")
        p.add_argument("--jobs", type=int, default=None, help="parallel fits (0 = all cores)")
        p.add_argument(
            "--phase-thresholds", default=None, help="JSON file of phase thresholds"
        )
        p.add_argument("--patterns", default=None, help="query pattern file")
    return parser


def run_subcommand(name, cfg):
    os.makedirs(cfg.out_dir, exist_ok=True)
    state = PipelineState(cfg)
    if name == "all":
        return cmd_all(state)
    return STEP_FUNCS[name](state)


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = apply_flags(load_run_config(args.config), args)
        manifest = run_subcommand(args.command, cfg)
        print(f"[{args.command}] manifest: {manifest}")
        return 0
    except AwareflowError as exc:
        print(f"error: {exc}", file=sys.stderr)
        for classes, code in EXIT_CODES:
            if isinstance(exc, classes):
                return code
        return 1


if __name__ == "__main__":
    sys.exit(main())
