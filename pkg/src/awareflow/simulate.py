"""Synthetic population, event-log, and awareness-diffusion generator.

Produces datasets with known ground truth: the true multiplex network
comes from the address groups it plants, and the true first-aware moment
of every individual is recorded as diffusion runs.  Per-individual
randomness in the diffusion uses counter-based streams (hash of seed,
stream, individual id, day), so results are bitwise reproducible and do
not depend on evaluation order or chunking.
"""

import json
from dataclasses import dataclass, field, asdict

import numpy as np

from . import kernels
from .awareness import NEVER, AwarenessTimeline
from .domain import (
    CHINA_UTC_OFFSET,
    SECONDS_PER_DAY,
    EDUCATIONS,
    EVENT_KIND_PURCHASE,
    EVENT_KIND_QUERY,
    GENDERS,
    MAX_PURCHASING_POWER,
    OCCUPATIONS,
    AddressRecord,
    Calendar,
    Dataset,
    EventLog,
    Individual,
    Region,
    month_number,
)
from .errors import ConfigError
from .netinfer import LAYERS, MultiplexGraph, build_from_groups, read_edges, write_edges

# counter-rng stream ids, one per decision kind
S_AWARE = 1
S_MOMENT = 2
S_QUERY_JITTER = 3
S_SUPPRESS = 4
S_TEXT = 5
S_POST = 6
S_POST_TS = 7
S_NOISE_Q = 8
S_NOISE_TS = 9
S_NOISE_TEXT = 10
S_BG_BUY = 11
S_BG_TS = 12
S_BG_CAT = 13
S_PPE_TS = 14

DEFAULT_AWARE_TEXTS = (
    "wuhan pneumonia cases",
    "hubei epidemic news",
    "new coronavirus symptoms",
    "covid outbreak latest",
    "unexplained pneumonia wuhan",
    "n95 mask virus protection",
    "wuhan virus what is it",
    "viral pneumonia treatment",
)

DEFAULT_NOISE_TEXTS = (
    "cheap flights to sanya",
    "winter coat sale",
    "phone screen repair",
    "spring festival train tickets",
    "hotpot restaurant nearby",
    "laptop price comparison",
    "yoga class schedule",
    "electric kettle reviews",
)

DEFAULT_CATEGORIES = (
    "groceries",
    "apparel",
    "electronics",
    "household",
    "books",
    "toys",
    "beauty",
    "snacks",
)


def month_start_ts(months):
    """Epoch seconds of China-local midnight opening each month number."""
    m = np.asarray(months, dtype=np.int64).astype("datetime64[M]")
    days = m.astype("datetime64[D]").astype(np.int64)
    return days * SECONDS_PER_DAY - CHINA_UTC_OFFSET


@dataclass
class ShockEvent:
    """External attention shock: a bump on the hazard's linear predictor.

    The bump applies on the day containing ``timestamp`` and halves each
    day after.  scope limits it to one province or city.
    """

    label: str
    timestamp: int
    magnitude: float
    scope: str = "national"
    scope_id: int = 0


@dataclass
class HazardCoefficients:
    """Per-day awareness hazard on the logit scale.

    hazard = sigmoid(intercept + demographics + sum_layer w * aware_frac
                     + shock * shock_level - distance * km / scale)
    """

    intercept: float = -7.0
    female: float = -0.3
    age_per_year: float = -0.01
    age_center: float = 40.0
    education: dict = field(
        default_factory=lambda: {
            "college_or_lower": -0.5,
            "bachelor": 0.0,
            "postgraduate": 0.4,
        }
    )
    occupation: dict = field(
        default_factory=lambda: {
            "hospital_staff": 1.0,
            "education_research": 0.5,
            "white_collar": 0.0,
            "government": 0.3,
            "blue_collar": -0.4,
            "agri_forestry_husbandry_fishery": -0.8,
            "individual_operation_service": -0.3,
        }
    )
    purchasing_power_per_level: float = 0.10
    has_child: float = 0.20
    married: float = 0.10
    layer_weights: dict = field(
        default_factory=lambda: {"family": 3.0, "schoolmate": 1.0, "workmate": 2.0}
    )
    shock: float = 1.0
    distance: float = 1.0
    distance_scale_km: float = 1000.0


@dataclass
class RegionConfig:
    n_cities: int = 12
    n_provinces: int = 4
    max_distance_km: float = 2500.0
    epidemic_growth: float = 0.22
    epidemic_start_day: int = 0
    spread_km_per_day: float = 150.0
    attr_noise: float = 0.10


@dataclass
class DemographicsConfig:
    female_p: float = 0.49
    age_min: int = 16
    age_max: int = 70
    education_probs: dict = field(
        default_factory=lambda: {
            "college_or_lower": 0.45,
            "bachelor": 0.45,
            "postgraduate": 0.10,
        }
    )
    occupation_probs: dict = field(
        default_factory=lambda: {
            "hospital_staff": 0.04,
            "education_research": 0.08,
            "white_collar": 0.30,
            "government": 0.08,
            "blue_collar": 0.25,
            "agri_forestry_husbandry_fishery": 0.10,
            "individual_operation_service": 0.15,
        }
    )
    purchasing_power_probs: tuple = (0.08, 0.15, 0.22, 0.25, 0.18, 0.08, 0.04)
    has_child_p: float = 0.45
    married_p: float = 0.60
    qualified_p: float = 0.90

    def __post_init__(self):
        self.purchasing_power_probs = tuple(self.purchasing_power_probs)


@dataclass
class NetworkConfig:
    family_size_probs: tuple = (0.20, 0.35, 0.25, 0.15, 0.05)
    school_p: float = 0.25
    school_size_min: int = 5
    school_size_max: int = 30
    company_p: float = 0.50
    company_size_min: int = 3
    company_size_max: int = 15

    def __post_init__(self):
        self.family_size_probs = tuple(self.family_size_probs)


@dataclass
class SimConfig:
    n_individuals: int = 1000
    seed: int = 1
    calendar_start: str = "2019-12-01"
    n_days: int = 88
    regions: RegionConfig = field(default_factory=RegionConfig)
    demographics: DemographicsConfig = field(default_factory=DemographicsConfig)
    network: NetworkConfig = field(default_factory=NetworkConfig)
    hazard: HazardCoefficients = field(default_factory=HazardCoefficients)
    events: list = field(default_factory=list)
    stockout_day: int = 62
    query_noise: float = 0.0
    history_months: int = 60
    unqualified_month_p: float = 0.75
    extra_purchase_p: float = 0.20
    post_aware_query_p: float = 0.03
    background_query_p: float = 0.02
    background_purchase_p: float = 0.01
    aware_query_texts: tuple = DEFAULT_AWARE_TEXTS
    noise_query_texts: tuple = DEFAULT_NOISE_TEXTS
    purchase_categories: tuple = DEFAULT_CATEGORIES
    ppe_category: str = "n95 respirator mask"

    def calendar(self):
        start = Calendar.from_dates(self.calendar_start, self.calendar_start)
        return Calendar(start.start_day, self.n_days)

    def validate(self):
        problems = []
        if self.n_individuals < 1:
            problems.append("n_individuals must be >= 1")
        if self.n_days < 1:
            problems.append("n_days must be >= 1")
        if self.history_months < 1:
            problems.append("history_months must be >= 1")
        for name in (
            "query_noise",
            "unqualified_month_p",
            "extra_purchase_p",
            "post_aware_query_p",
            "background_query_p",
            "background_purchase_p",
        ):
            v = getattr(self, name)
            if not 0.0 <= v <= 1.0:
                problems.append(f"{name} must be in [0, 1], got {v}")
        r = self.regions
        if r.n_cities < 1:
            problems.append("regions.n_cities must be >= 1")
        if not 1 <= r.n_provinces <= r.n_cities:
            problems.append("regions.n_provinces must be in [1, n_cities]")
        d = self.demographics
        for name, probs, allowed in (
            ("education_probs", d.education_probs, EDUCATIONS),
            ("occupation_probs", d.occupation_probs, OCCUPATIONS),
        ):
            unknown = set(probs) - set(allowed)
            if unknown:
                problems.append(f"demographics.{name}: unknown keys {sorted(unknown)}")
            if any(p < 0 for p in probs.values()) or sum(probs.values()) <= 0:
                problems.append(f"demographics.{name}: probabilities must be >= 0 and sum > 0")
        if len(d.purchasing_power_probs) != MAX_PURCHASING_POWER:
            problems.append(
                f"demographics.purchasing_power_probs needs {MAX_PURCHASING_POWER} entries"
            )
        net = self.network
        fam = tuple(net.family_size_probs)
        if not fam or any(p < 0 for p in fam) or sum(fam) <= 0:
            problems.append("network.family_size_probs must be nonempty, >= 0, sum > 0")
        else:
            feasible = [k + 1 for k, p in enumerate(fam) if p > 0]
            if min(feasible) > self.n_individuals:
                problems.append(
                    f"smallest possible family size {min(feasible)} exceeds the "
                    f"population of {self.n_individuals}"
                )
            if len(fam) > 10:
                problems.append("family sizes above 10 would exceed the home-layer cap")
        for lo, hi, cap, label in (
            (net.school_size_min, net.school_size_max, 500, "school"),
            (net.company_size_min, net.company_size_max, 500, "company"),
        ):
            if not 1 <= lo <= hi:
                problems.append(f"network.{label} size range [{lo}, {hi}] is invalid")
            if hi > cap:
                problems.append(f"network.{label} size max {hi} exceeds the cap {cap}")
        for ev in self.events:
            if ev.scope not in ("national", "province", "city"):
                problems.append(f"event {ev.label!r}: unknown scope {ev.scope!r}")
        if not self.aware_query_texts:
            problems.append("aware_query_texts must not be empty")
        if not self.noise_query_texts:
            problems.append("noise_query_texts must not be empty")
        if not self.purchase_categories:
            problems.append("purchase_categories must not be empty")
        if self.ppe_category in self.purchase_categories:
            problems.append("ppe_category must not appear in purchase_categories")
        if problems:
            raise ConfigError("invalid simulator config: " + "; ".join(problems))
        return self

    def to_dict(self):
        out = asdict(self)
        out["events"] = [asdict(e) for e in self.events]
        for key in ("aware_query_texts", "noise_query_texts", "purchase_categories"):
            out[key] = list(out[key])
        out["demographics"]["purchasing_power_probs"] = list(
            out["demographics"]["purchasing_power_probs"]
        )
        out["network"]["family_size_probs"] = list(out["network"]["family_size_probs"])
        return out

    @classmethod
    def from_dict(cls, data):
        data = dict(data)
        sections = {
            "regions": RegionConfig,
            "demographics": DemographicsConfig,
            "network": NetworkConfig,
            "hazard": HazardCoefficients,
        }
        kwargs = {}
        for key, section_cls in sections.items():
            if key in data:
                sub = data.pop(key)
                known = section_cls.__dataclass_fields__
                unknown = set(sub) - set(known)
                if unknown:
                    raise ConfigError(
                        f"unknown simulator.{key} keys: {sorted(unknown)}"
                    )
                kwargs[key] = section_cls(**sub)
        if "events" in data:
            events = []
            for ev in data.pop("events"):
                unknown = set(ev) - set(ShockEvent.__dataclass_fields__)
                if unknown:
                    raise ConfigError(f"unknown event keys: {sorted(unknown)}")
                events.append(ShockEvent(**ev))
            kwargs["events"] = events
        known = cls.__dataclass_fields__
        unknown = set(data) - set(known)
        if unknown:
            raise ConfigError(f"unknown simulator keys: {sorted(unknown)}")
        for key in ("aware_query_texts", "noise_query_texts", "purchase_categories"):
            if key in data:
                data[key] = tuple(data[key])
        return cls(**data, **kwargs).validate()


def load_sim_config(path):
    with open(path, "r", encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: invalid JSON ({exc.msg})") from None
    return SimConfig.from_dict(data)


def save_sim_config(config, path):
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(config.to_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")


@dataclass
class GroundTruth:
    """What the generator knows and the pipeline must recover."""

    timeline: AwarenessTimeline
    graph: MultiplexGraph

    def save(self, directory):
        import os

        os.makedirs(directory, exist_ok=True)
        labels_path = os.path.join(directory, "truth_labels.jsonl")
        aligned = self.timeline.aligned(self.graph.ids)
        with open(labels_path, "w", encoding="utf-8") as fh:
            for i, ind_id in enumerate(self.graph.ids):
                ts = None if aligned[i] == NEVER else int(aligned[i])
                fh.write(
                    json.dumps(
                        {"individual_id": int(ind_id), "first_aware": ts},
                        separators=(",", ":"),
                    )
                    + "\n"
                )
        edges_path = os.path.join(directory, "truth_network.edges")
        write_edges(self.graph, edges_path)
        return {"truth_labels": labels_path, "truth_network": edges_path}

    @classmethod
    def load(cls, directory, ids):
        import os

        labels_path = os.path.join(directory, "truth_labels.jsonl")
        got_ids, got_ts = [], []
        with open(labels_path, "r", encoding="utf-8") as fh:
            for line in fh:
                obj = json.loads(line)
                if obj["first_aware"] is not None:
                    got_ids.append(obj["individual_id"])
                    got_ts.append(obj["first_aware"])
        timeline = AwarenessTimeline(
            np.array(got_ids, dtype=np.uint64), np.array(got_ts, dtype=np.int64)
        )
        graph = read_edges(os.path.join(directory, "truth_network.edges"), ids)
        return cls(timeline, graph)


def _chunk_sizes(rng, total, size_probs):
    """Partition `total` into chunk sizes drawn from size_probs (1-based)."""
    sizes = []
    remaining = total
    probs = np.asarray(size_probs, dtype=np.float64)
    probs = probs / probs.sum()
    while remaining > 0:
        draw = int(rng.choice(len(probs), p=probs)) + 1
        sizes.append(min(draw, remaining))
        remaining -= sizes[-1]
    return sizes


def _make_regions(rng, config):
    r = config.regions
    n_c, n_p = r.n_cities, r.n_provinces
    dist = np.zeros(n_c)
    if n_c > 1:
        base = np.linspace(0.0, 1.0, n_c)[1:]
        jitter = rng.uniform(0.9, 1.1, size=n_c - 1)
        dist[1:] = np.maximum(50.0, base * jitter * r.max_distance_km)
    rel = dist / max(r.max_distance_km, 1.0)

    def coupled(level, slope, lo=0.0, hi=1.0, scale=1.0):
        noise = rng.normal(0.0, r.attr_noise, size=n_c)
        return np.clip((level + slope * rel + noise) * scale, lo, hi)

    gdp = 90_000.0 * np.exp(-1.2 * rel) * rng.lognormal(0.0, r.attr_noise, size=n_c)
    tight = coupled(0.70, -0.35)
    paddy = coupled(0.55, -0.30)
    innov = coupled(0.65, -0.35)
    illit = coupled(0.04, +0.12)
    ethnic = coupled(0.05, +0.18)
    pop = np.maximum(10_000, rng.lognormal(12.5, 0.4, size=n_c)).astype(np.int64)

    lag = dist / max(r.spread_km_per_day, 1e-9)
    days = np.arange(config.n_days, dtype=np.float64)
    regions = []
    for c in range(n_c):
        t = days - r.epidemic_start_day - lag[c]
        cases = np.where(t >= 0, np.exp(r.epidemic_growth * t), 0.0)
        cases = np.minimum(cases, pop[c] / 50).astype(np.int64)
        regions.append(
            Region(
                city_id=c,
                province_id=c * n_p // n_c,
                name=f"city_{c:03d}",
                distance_to_epicenter=float(dist[c]),
                gdp=float(gdp[c]),
                daily_confirmed_cases=tuple(int(v) for v in cases),
                cultural_tightness=float(tight[c]),
                paddy_rice_pct=float(paddy[c]),
                innovation_index=float(innov[c]),
                illiteracy_pct=float(illit[c]),
                multi_ethnic_household_pct=float(ethnic[c]),
                population_count=int(pop[c]),
            )
        )
    return regions


def _prob_vector(probs, keys):
    v = np.array([probs.get(k, 0.0) for k in keys], dtype=np.float64)
    return v / v.sum()


def generate_population(config):
    """Build the static world: individuals, regions, addresses, history.

    Returns (dataset, truth_graph); dataset.events holds only the
    pre-window purchase history at this point.
    """
    config.validate()
    rng = np.random.default_rng(config.seed)
    calendar = config.calendar()
    regions = _make_regions(rng, config)
    n = config.n_individuals
    d = config.demographics

    city_pop = np.array([r.population_count for r in regions], dtype=np.float64)
    home_city = rng.choice(len(regions), size=n, p=city_pop / city_pop.sum())
    gender = (rng.random(n) < d.female_p).astype(np.int8)  # 1 = female
    age = rng.integers(d.age_min, d.age_max + 1, size=n).astype(np.int16)
    education = rng.choice(
        len(EDUCATIONS), size=n, p=_prob_vector(d.education_probs, EDUCATIONS)
    ).astype(np.int8)
    occupation = rng.choice(
        len(OCCUPATIONS), size=n, p=_prob_vector(d.occupation_probs, OCCUPATIONS)
    ).astype(np.int8)
    pp_probs = np.asarray(d.purchasing_power_probs, dtype=np.float64)
    purchasing_power = (
        rng.choice(MAX_PURCHASING_POWER, size=n, p=pp_probs / pp_probs.sum()) + 1
    ).astype(np.int8)
    has_child = rng.random(n) < d.has_child_p
    married = rng.random(n) < d.married_p
    qualified = rng.random(n) < d.qualified_p

    ids = np.arange(1, n + 1, dtype=np.uint64)
    individuals = [
        Individual(
            id=int(ids[i]),
            gender=GENDERS[gender[i]],
            age=int(age[i]),
            education=EDUCATIONS[education[i]],
            occupation=OCCUPATIONS[occupation[i]],
            purchasing_power=int(purchasing_power[i]),
            has_child=bool(has_child[i]),
            married=bool(married[i]),
            home_city=int(home_city[i]),
            qualified=bool(qualified[i]),
        )
        for i in range(n)
    ]

    # shared-address groups; everyone is glued to one home, schools and
    # companies are opt-in samples within the home city
    start_month = int(month_number(np.array([calendar.day_start_ts(0)]))[0])
    hist_start = int(month_start_ts(start_month - config.history_months))
    window_end = calendar.day_start_ts(calendar.n_days) - 1
    interval = (hist_start, window_end)

    net = config.network
    addresses = []
    groups = {"family": [], "schoolmate": [], "workmate": []}
    next_addr = {"home": 1_000_000, "school_dorm": 2_000_000, "company": 3_000_000}

    def add_group(kind, layer, member_rows):
        addr_id = next_addr[kind]
        next_addr[kind] += 1
        for row in member_rows:
            addresses.append(
                AddressRecord(
                    individual_id=int(ids[row]),
                    address_id=addr_id,
                    kind=kind,
                    active_start=interval[0],
                    active_end=interval[1],
                )
            )
        groups[layer].append(np.asarray(member_rows, dtype=np.int64))

    for c in range(len(regions)):
        rows_c = np.flatnonzero(home_city == c)
        if len(rows_c) == 0:
            continue
        perm = rng.permutation(rows_c)
        offset = 0
        for size in _chunk_sizes(rng, len(perm), net.family_size_probs):
            add_group("home", "family", perm[offset : offset + size])
            offset += size

        attend = perm[rng.random(len(perm)) < net.school_p]
        offset = 0
        while offset < len(attend):
            size = int(rng.integers(net.school_size_min, net.school_size_max + 1))
            add_group("school_dorm", "schoolmate", attend[offset : offset + size])
            offset += size

        employed = perm[rng.random(len(perm)) < net.company_p]
        offset = 0
        while offset < len(employed):
            size = int(rng.integers(net.company_size_min, net.company_size_max + 1))
            add_group("company", "workmate", employed[offset : offset + size])
            offset += size

    truth_graph = build_from_groups(ids, groups)

    # purchase history: qualified individuals buy every month, the rest
    # have gaps (at least one month is always forced out)
    months = np.arange(
        start_month - config.history_months, start_month, dtype=np.int64
    )
    m_start = month_start_ts(months)
    m_len = np.diff(np.append(m_start, month_start_ts(start_month))).astype(np.int64)
    n_m = config.history_months
    present = np.ones((n, n_m), dtype=bool)
    nq_rows = np.flatnonzero(~qualified)
    if len(nq_rows):
        present[nq_rows] = rng.random((len(nq_rows), n_m)) < config.unqualified_month_p
        stuck = nq_rows[present[nq_rows].all(axis=1)]
        if len(stuck):
            present[stuck, rng.integers(0, n_m, size=len(stuck))] = False
    extra = (rng.random((n, n_m)) < config.extra_purchase_p) & present

    chunks = []
    cats = list(config.purchase_categories)
    for grid in (present, extra):
        rows, cols = np.nonzero(grid)
        ts = m_start[cols] + (rng.random(len(rows)) * (m_len[cols] - 1)).astype(np.int64)
        cat_idx = rng.integers(0, len(cats), size=len(rows))
        chunks.append((ids[rows], ts, cat_idx))

    iid = np.concatenate([c[0] for c in chunks])
    ts = np.concatenate([c[1] for c in chunks])
    cat = np.concatenate([c[2] for c in chunks])
    text = np.array(cats, dtype=object)[cat]
    events = EventLog.canonical(
        np.full(len(iid), EVENT_KIND_PURCHASE, dtype=np.uint8),
        iid,
        ts,
        text,
        np.zeros(len(iid), dtype=bool),
    )

    # same canonical order the JSONL reader produces, so a generated
    # dataset compares equal after a save/load round trip
    addresses.sort(key=lambda a: (a.individual_id, a.kind, a.address_id, a.active_start))
    dataset = Dataset(individuals, regions, addresses, events, calendar)
    return dataset, truth_graph


def _hazard_base(config, cols, distance_km):
    hz = config.hazard
    z = np.full(cols.n, hz.intercept, dtype=np.float64)
    z += hz.female * (cols.gender == 1)
    z += hz.age_per_year * (cols.age.astype(np.float64) - hz.age_center)
    edu = np.array([hz.education.get(e, 0.0) for e in EDUCATIONS])
    occ = np.array([hz.occupation.get(o, 0.0) for o in OCCUPATIONS])
    z += edu[cols.education]
    z += occ[cols.occupation]
    z += hz.purchasing_power_per_level * (cols.purchasing_power.astype(np.float64) - 4.0)
    z += hz.has_child * cols.has_child
    z += hz.married * cols.married
    z -= hz.distance * distance_km / hz.distance_scale_km
    return z


def hazard_probability(config, cols, distance_km, layer_fracs, shock_level):
    """Vectorized per-day awareness hazard; exposed for direct testing."""
    z = _hazard_base(config, cols, distance_km)
    hz = config.hazard
    for name in LAYERS:
        z = z + hz.layer_weights.get(name, 0.0) * np.asarray(layer_fracs[name])
    z = z + hz.shock * np.asarray(shock_level)
    with np.errstate(over="ignore"):  # exp(|z|) huge -> p saturates
        return 1.0 / (1.0 + np.exp(-z))


def simulate_diffusion(dataset, graph, config):
    """Run the daily awareness process; returns (window_events, truth).

    Emits, per newly aware individual, three awareness queries the same
    day (each independently suppressed with probability query_noise) and
    a PPE purchase while stock lasts; plus background noise queries and
    purchases for everyone.
    """
    config.validate()
    cols = dataset.columns()
    calendar = dataset.calendar
    n = cols.n
    ids = cols.ids
    seed = config.seed
    hz = config.hazard

    z0 = _hazard_base(config, cols, dataset.distance_km())
    layer_csr = {}
    inv_deg = {}
    counts = {}
    for name in LAYERS:
        lyr = graph.layer(name)
        layer_csr[name] = (lyr.indptr, lyr.indices)
        deg = lyr.degrees().astype(np.float64)
        with np.errstate(divide="ignore"):
            inv = np.where(deg > 0, 1.0 / np.maximum(deg, 1.0), 0.0)
        inv_deg[name] = inv
        counts[name] = np.zeros(n, dtype=np.int64)

    province = dataset.province_of_individuals()
    event_rows = []
    for ev in config.events:
        day0 = int(calendar.day_of(ev.timestamp))
        if ev.scope == "national":
            mask = None
        elif ev.scope == "province":
            mask = province == ev.scope_id
        else:
            mask = cols.home_city == ev.scope_id
        event_rows.append((day0, float(ev.magnitude), mask))

    aware = np.zeros(n, dtype=bool)
    first_moment = np.full(n, NEVER, dtype=np.int64)
    first_day = np.full(n, -1, dtype=np.int64)
    noise = config.query_noise

    aware_texts = np.array(list(config.aware_query_texts), dtype=object)
    noise_texts = np.array(list(config.noise_query_texts), dtype=object)
    categories = np.array(list(config.purchase_categories), dtype=object)

    ev_kind, ev_iid, ev_ts, ev_text, ev_ppe = [], [], [], [], []

    def emit(kind, iid, ts, text, ppe=None):
        if len(iid) == 0:
            return
        ev_kind.append(np.full(len(iid), kind, dtype=np.uint8))
        ev_iid.append(iid)
        ev_ts.append(ts)
        ev_text.append(text)
        if ppe is None:
            ppe = np.zeros(len(iid), dtype=bool)
        ev_ppe.append(ppe)

    for d in range(calendar.n_days):
        day_start = calendar.day_start_ts(d)

        shock = np.zeros(n, dtype=np.float64)
        for day0, mag, mask in event_rows:
            if d < day0:
                continue
            f = mag * 0.5 ** (d - day0)
            if f < 1e-9:
                continue
            if mask is None:
                shock += f
            else:
                shock[mask] += f

        un = np.flatnonzero(~aware)
        if len(un):
            z = z0[un].copy()
            for name in LAYERS:
                z += hz.layer_weights.get(name, 0.0) * (
                    counts[name][un] * inv_deg[name][un]
                )
            z += hz.shock * shock[un]
            with np.errstate(over="ignore"):  # exp(|z|) huge -> p saturates
                p = 1.0 / (1.0 + np.exp(-z))
            u = kernels.counter_uniforms(seed, S_AWARE, ids[un], d)
            new = un[u < p]
        else:
            new = np.empty(0, dtype=np.int64)

        if len(new):
            new_ids = ids[new]
            um = kernels.counter_uniforms(seed, S_MOMENT, new_ids, d)
            # first-aware moment in the first half of the day so the three
            # same-day queries always fit before midnight
            moment = day_start + (um * (SECONDS_PER_DAY // 2)).astype(np.int64)
            first_moment[new] = moment
            first_day[new] = d
            aware[new] = True
            new64 = new.astype(np.int64)
            for name in LAYERS:
                indptr, indices = layer_csr[name]
                kernels.increment_neighbor_counts(indptr, indices, new64, counts[name])

            room = day_start + SECONDS_PER_DAY - 1 - moment
            for k in (1, 2, 3):
                tag = (d << 2) | k
                uj = kernels.counter_uniforms(seed, S_QUERY_JITTER, new_ids, tag)
                ts_k = moment + (uj * room).astype(np.int64)
                keep = kernels.counter_uniforms(seed, S_SUPPRESS, new_ids, tag) >= noise
                ut = kernels.counter_uniforms(seed, S_TEXT, new_ids, tag)
                texts = aware_texts[(ut * len(aware_texts)).astype(np.int64)]
                emit(EVENT_KIND_QUERY, new_ids[keep], ts_k[keep], texts[keep])

            if d <= config.stockout_day:
                up = kernels.counter_uniforms(seed, S_PPE_TS, new_ids, d)
                ts_p = moment + (up * room).astype(np.int64)
                emit(
                    EVENT_KIND_PURCHASE,
                    new_ids,
                    ts_p,
                    np.full(len(new_ids), config.ppe_category, dtype=object),
                    ppe=np.ones(len(new_ids), dtype=bool),
                )

        # individuals aware before today occasionally keep searching
        post = np.flatnonzero(aware & (first_day < d))
        if len(post) and config.post_aware_query_p > 0:
            pids = ids[post]
            sel = kernels.counter_uniforms(seed, S_POST, pids, d) < config.post_aware_query_p
            pids = pids[sel]
            if len(pids):
                tag = d << 2
                keep = kernels.counter_uniforms(seed, S_SUPPRESS, pids, tag) >= noise
                pids = pids[keep]
            if len(pids):
                ts_q = day_start + (
                    kernels.counter_uniforms(seed, S_POST_TS, pids, d) * (SECONDS_PER_DAY - 1)
                ).astype(np.int64)
                ut = kernels.counter_uniforms(seed, S_TEXT, pids, d << 2)
                texts = aware_texts[(ut * len(aware_texts)).astype(np.int64)]
                emit(EVENT_KIND_QUERY, pids, ts_q, texts)

        if config.background_query_p > 0:
            sel = kernels.counter_uniforms(seed, S_NOISE_Q, ids, d) < config.background_query_p
            nids = ids[sel]
            if len(nids):
                ts_q = day_start + (
                    kernels.counter_uniforms(seed, S_NOISE_TS, nids, d) * (SECONDS_PER_DAY - 1)
                ).astype(np.int64)
                ut = kernels.counter_uniforms(seed, S_NOISE_TEXT, nids, d)
                emit(EVENT_KIND_QUERY, nids, ts_q, noise_texts[(ut * len(noise_texts)).astype(np.int64)])

        if config.background_purchase_p > 0:
            sel = kernels.counter_uniforms(seed, S_BG_BUY, ids, d) < config.background_purchase_p
            bids = ids[sel]
            if len(bids):
                ts_b = day_start + (
                    kernels.counter_uniforms(seed, S_BG_TS, bids, d) * (SECONDS_PER_DAY - 1)
                ).astype(np.int64)
                uc = kernels.counter_uniforms(seed, S_BG_CAT, bids, d)
                emit(EVENT_KIND_PURCHASE, bids, ts_b, categories[(uc * len(categories)).astype(np.int64)])

    if ev_iid:
        events = EventLog.canonical(
            np.concatenate(ev_kind),
            np.concatenate(ev_iid),
            np.concatenate(ev_ts),
            np.concatenate(ev_text),
            np.concatenate(ev_ppe),
        )
    else:
        events = EventLog.empty()

    aware_rows = np.flatnonzero(first_moment != NEVER)
    timeline = AwarenessTimeline(ids[aware_rows], first_moment[aware_rows])
    return events, GroundTruth(timeline=timeline, graph=graph)


def generate(config):
    """Full synthetic run: population, history, diffusion, merged log."""
    dataset, truth_graph = generate_population(config)
    window_events, truth = simulate_diffusion(dataset, truth_graph, config)
    dataset.events = EventLog.concat(dataset.events, window_events)
    return dataset, truth
