"""Shared data model: records, columnar event log, calendar, dataset I/O.

All on-disk formats are line-delimited JSON (one object per line, UTF-8),
with field names matching the dataclasses below.  Timestamps are integer
epoch seconds; calendar days are local midnight-to-midnight in China
standard time (UTC+8, no DST).  Ids are unsigned 64-bit decimals.
"""

import json
from dataclasses import dataclass, field
from datetime import date, timedelta

import numpy as np

from .errors import IntegrityError, ParseError

CHINA_UTC_OFFSET = 8 * 3600
SECONDS_PER_DAY = 86400
_EPOCH_DATE = date(1970, 1, 1)

GENDERS = ("male", "female")
EDUCATIONS = ("college_or_lower", "bachelor", "postgraduate")
OCCUPATIONS = (
    "hospital_staff",
    "education_research",
    "white_collar",
    "government",
    "blue_collar",
    "agri_forestry_husbandry_fishery",
    "individual_operation_service",
)
ADDRESS_KINDS = ("home", "school_dorm", "company")
EVENT_KIND_QUERY = 0
EVENT_KIND_PURCHASE = 1

MAX_PURCHASING_POWER = 7


def day_number(ts):
    """China-local day number (days since epoch) of an epoch timestamp."""
    return (np.asarray(ts, dtype=np.int64) + CHINA_UTC_OFFSET) // SECONDS_PER_DAY


def month_number(ts):
    """China-local month number (months since 1970-01) of a timestamp."""
    days = day_number(ts)
    return days.astype("datetime64[D]").astype("datetime64[M]").astype(np.int64)


class Calendar:
    """Contiguous run of observation days in China local time."""

    def __init__(self, start_day, n_days):
        if n_days < 1:
            raise ValueError("calendar needs at least one day")
        self.start_day = int(start_day)
        self.n_days = int(n_days)

    @classmethod
    def from_dates(cls, start_date, end_date):
        """Inclusive [start_date, end_date], ISO strings."""
        start = date.fromisoformat(start_date)
        end = date.fromisoformat(end_date)
        n = (end - start).days + 1
        return cls((start - _EPOCH_DATE).days, n)

    @property
    def end_day(self):
        return self.start_day + self.n_days - 1

    def day_of(self, ts):
        """0-based day index of a timestamp; may fall outside [0, n_days)."""
        return day_number(ts) - self.start_day

    def day_start_ts(self, index):
        """Epoch seconds of China-local midnight opening day ``index``."""
        return (self.start_day + index) * SECONDS_PER_DAY - CHINA_UTC_OFFSET

    def date_of(self, index):
        return _EPOCH_DATE + timedelta(days=self.start_day + int(index))

    def iso_dates(self):
        return [self.date_of(i).isoformat() for i in range(self.n_days)]

    def __eq__(self, other):
        return (
            isinstance(other, Calendar)
            and self.start_day == other.start_day
            and self.n_days == other.n_days
        )

    def __repr__(self):
        return (
            f"Calendar({self.date_of(0).isoformat()}..."
            f"{self.date_of(self.n_days - 1).isoformat()}, {self.n_days} days)"
        )


@dataclass(frozen=True)
class Individual:
    id: int
    gender: str
    age: int
    education: str
    occupation: str
    purchasing_power: int
    has_child: bool
    married: bool
    home_city: int
    qualified: bool


@dataclass(frozen=True)
class Region:
    city_id: int
    province_id: int
    name: str
    distance_to_epicenter: float
    gdp: float
    daily_confirmed_cases: tuple
    cultural_tightness: float
    paddy_rice_pct: float
    innovation_index: float
    illiteracy_pct: float
    multi_ethnic_household_pct: float
    population_count: int


@dataclass(frozen=True)
class QueryEvent:
    individual_id: int
    timestamp: int
    query_text: str


@dataclass(frozen=True)
class PurchaseEvent:
    individual_id: int
    timestamp: int
    category: str
    is_ppe: bool


@dataclass(frozen=True)
class AddressRecord:
    individual_id: int
    address_id: int
    kind: str
    active_start: int
    active_end: int


class EventLog:
    """Columnar store for the mixed query/purchase stream.

    Globally sorted by (timestamp, individual_id, kind, text); the
    per-individual view (sorted by individual, then time) is derived lazily.
    """

    def __init__(self, kind, individual_id, timestamp, text, is_ppe,
                 text_pool=None, text_code=None):
        self.kind = np.asarray(kind, dtype=np.uint8)
        self.individual_id = np.asarray(individual_id, dtype=np.uint64)
        self.timestamp = np.asarray(timestamp, dtype=np.int64)
        self.text = np.asarray(text, dtype=object)
        self.is_ppe = np.asarray(is_ppe, dtype=bool)
        # Interned texts: text_pool is the sorted distinct texts and
        # text_code maps each row into it.  Optional; set by canonical().
        self.text_pool = text_pool
        self.text_code = text_code
        self._ind_order = None

    @classmethod
    def empty(cls):
        z = np.empty(0)
        return cls(
            z, z, z, np.empty(0, dtype=object), z,
            text_pool=[], text_code=np.empty(0, dtype=np.int64),
        )

    @classmethod
    def canonical(cls, kind, individual_id, timestamp, text, is_ppe):
        """Build an EventLog in canonical global order.

        The order is insensitive to input permutation: ties on
        (timestamp, individual, kind) are broken by the text rank.
        """
        log = cls(kind, individual_id, timestamp, text, is_ppe)
        if len(log) == 0:
            return cls.empty()
        distinct = sorted(set(log.text.tolist()))
        rank = {t: i for i, t in enumerate(distinct)}
        codes = np.fromiter(
            (rank[t] for t in log.text.tolist()), dtype=np.int64, count=len(log)
        )
        order = np.lexsort(
            (log.is_ppe, codes, log.kind, log.individual_id, log.timestamp)
        )
        return cls(
            log.kind[order],
            log.individual_id[order],
            log.timestamp[order],
            log.text[order],
            log.is_ppe[order],
            text_pool=distinct,
            text_code=codes[order],
        )

    @classmethod
    def concat(cls, *logs):
        """Merge logs into one canonical log."""
        logs = [lg for lg in logs if len(lg)]
        if not logs:
            return cls.empty()
        return cls.canonical(
            np.concatenate([lg.kind for lg in logs]),
            np.concatenate([lg.individual_id for lg in logs]),
            np.concatenate([lg.timestamp for lg in logs]),
            np.concatenate([lg.text for lg in logs]),
            np.concatenate([lg.is_ppe for lg in logs]),
        )

    @classmethod
    def from_records(cls, records):
        kind, iid, ts, text, ppe = [], [], [], [], []
        for r in records:
            if isinstance(r, QueryEvent):
                kind.append(EVENT_KIND_QUERY)
                text.append(r.query_text)
                ppe.append(False)
            else:
                kind.append(EVENT_KIND_PURCHASE)
                text.append(r.category)
                ppe.append(r.is_ppe)
            iid.append(r.individual_id)
            ts.append(r.timestamp)
        return cls.canonical(kind, iid, ts, np.array(text, dtype=object), ppe)

    def take(self, order):
        return EventLog(
            self.kind[order],
            self.individual_id[order],
            self.timestamp[order],
            self.text[order],
            self.is_ppe[order],
            text_pool=self.text_pool,
            text_code=None if self.text_code is None else self.text_code[order],
        )

    def __len__(self):
        return len(self.timestamp)

    def record(self, i):
        if self.kind[i] == EVENT_KIND_QUERY:
            return QueryEvent(
                int(self.individual_id[i]), int(self.timestamp[i]), self.text[i]
            )
        return PurchaseEvent(
            int(self.individual_id[i]),
            int(self.timestamp[i]),
            self.text[i],
            bool(self.is_ppe[i]),
        )

    def __iter__(self):
        for i in range(len(self)):
            yield self.record(i)

    def individual_order(self):
        """Row permutation sorting by (individual_id, timestamp)."""
        if self._ind_order is None:
            self._ind_order = np.lexsort((self.timestamp, self.individual_id))
        return self._ind_order

    def queries_mask(self):
        return self.kind == EVENT_KIND_QUERY

    def purchases_mask(self):
        return self.kind == EVENT_KIND_PURCHASE

    def __eq__(self, other):
        if not isinstance(other, EventLog) or len(self) != len(other):
            return False
        return (
            np.array_equal(self.kind, other.kind)
            and np.array_equal(self.individual_id, other.individual_id)
            and np.array_equal(self.timestamp, other.timestamp)
            and np.array_equal(self.text, other.text)
            and np.array_equal(self.is_ppe, other.is_ppe)
        )


@dataclass
class PopulationColumns:
    """Columnar view over the individual table, aligned to dataset order."""

    ids: np.ndarray
    gender: np.ndarray
    age: np.ndarray
    education: np.ndarray
    occupation: np.ndarray
    purchasing_power: np.ndarray
    has_child: np.ndarray
    married: np.ndarray
    home_city: np.ndarray
    qualified: np.ndarray
    index_of: dict

    @property
    def n(self):
        return len(self.ids)

    def rows_of(self, individual_ids):
        return np.fromiter(
            (self.index_of[int(i)] for i in individual_ids),
            dtype=np.int64,
            count=len(individual_ids),
        )


@dataclass
class Dataset:
    """Immutable-after-load container for one observation run."""

    individuals: list
    regions: list
    addresses: list
    events: EventLog
    calendar: Calendar
    _columns: PopulationColumns = field(default=None, repr=False, compare=False)

    def __eq__(self, other):
        return (
            isinstance(other, Dataset)
            and self.individuals == other.individuals
            and self.regions == other.regions
            and self.addresses == other.addresses
            and self.events == other.events
            and self.calendar == other.calendar
        )

    def columns(self):
        if self._columns is None:
            n = len(self.individuals)
            g = {name: i for i, name in enumerate(GENDERS)}
            e = {name: i for i, name in enumerate(EDUCATIONS)}
            o = {name: i for i, name in enumerate(OCCUPATIONS)}
            self._columns = PopulationColumns(
                ids=np.array([p.id for p in self.individuals], dtype=np.uint64),
                gender=np.array([g[p.gender] for p in self.individuals], np.int8),
                age=np.array([p.age for p in self.individuals], np.int16),
                education=np.array(
                    [e[p.education] for p in self.individuals], np.int8
                ),
                occupation=np.array(
                    [o[p.occupation] for p in self.individuals], np.int8
                ),
                purchasing_power=np.array(
                    [p.purchasing_power for p in self.individuals], np.int8
                ),
                has_child=np.array([p.has_child for p in self.individuals], bool),
                married=np.array([p.married for p in self.individuals], bool),
                home_city=np.array(
                    [p.home_city for p in self.individuals], np.int64
                ),
                qualified=np.array([p.qualified for p in self.individuals], bool),
                index_of={p.id: i for i, p in enumerate(self.individuals)},
            )
        return self._columns

    def region_by_city(self):
        return {r.city_id: r for r in self.regions}

    def distance_km(self):
        """Per-individual distance to the epicenter via the home city."""
        by_city = {r.city_id: r.distance_to_epicenter for r in self.regions}
        cols = self.columns()
        return np.array([by_city[int(c)] for c in cols.home_city], dtype=np.float64)

    def province_of_individuals(self):
        by_city = {r.city_id: r.province_id for r in self.regions}
        cols = self.columns()
        return np.array([by_city[int(c)] for c in cols.home_city], dtype=np.int64)


@dataclass
class ValidationReport:
    counts: dict
    enum_histograms: dict
    violations: list
    notes: list

    def ok(self):
        return not self.violations


# ---------------------------------------------------------------------------
# parsing helpers
# ---------------------------------------------------------------------------

def _iter_jsonl(path):
    with open(path, "r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(path, line_no, f"invalid JSON: {exc.msg}") from None
            if not isinstance(obj, dict):
                raise ParseError(path, line_no, "expected a JSON object")
            yield line_no, obj


def _need(obj, key, path, line_no):
    if key not in obj:
        raise ParseError(path, line_no, f"missing field {key!r}")
    return obj[key]


def _need_id(obj, key, path, line_no):
    v = _need(obj, key, path, line_no)
    if not isinstance(v, int) or isinstance(v, bool) or v < 0 or v >= 2**64:
        raise ParseError(path, line_no, f"{key} must be an unsigned 64-bit integer")
    return v


def _need_int(obj, key, path, line_no):
    v = _need(obj, key, path, line_no)
    if not isinstance(v, int) or isinstance(v, bool):
        raise ParseError(path, line_no, f"{key} must be an integer")
    return v


def _need_num(obj, key, path, line_no):
    v = _need(obj, key, path, line_no)
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ParseError(path, line_no, f"{key} must be a number")
    return float(v)


def _need_bool(obj, key, path, line_no):
    v = _need(obj, key, path, line_no)
    if not isinstance(v, bool):
        raise ParseError(path, line_no, f"{key} must be a boolean")
    return v


def _need_str(obj, key, path, line_no):
    v = _need(obj, key, path, line_no)
    if not isinstance(v, str):
        raise ParseError(path, line_no, f"{key} must be a string")
    return v


def _need_enum(obj, key, allowed, path, line_no):
    v = _need_str(obj, key, path, line_no)
    if v not in allowed:
        raise ParseError(
            path, line_no, f"{key} must be one of {sorted(allowed)}, got {v!r}"
        )
    return v


def read_population(path):
    out = []
    for line_no, obj in _iter_jsonl(path):
        pp = _need_int(obj, "purchasing_power", path, line_no)
        if not 1 <= pp <= MAX_PURCHASING_POWER:
            raise ParseError(
                path,
                line_no,
                f"purchasing_power must be in [1, {MAX_PURCHASING_POWER}], got {pp}",
            )
        age = _need_int(obj, "age", path, line_no)
        if age < 0:
            raise ParseError(path, line_no, f"age must be >= 0, got {age}")
        out.append(
            Individual(
                id=_need_id(obj, "id", path, line_no),
                gender=_need_enum(obj, "gender", GENDERS, path, line_no),
                age=age,
                education=_need_enum(obj, "education", EDUCATIONS, path, line_no),
                occupation=_need_enum(obj, "occupation", OCCUPATIONS, path, line_no),
                purchasing_power=pp,
                has_child=_need_bool(obj, "has_child", path, line_no),
                married=_need_bool(obj, "married", path, line_no),
                home_city=_need_id(obj, "home_city", path, line_no),
                qualified=_need_bool(obj, "qualified", path, line_no),
            )
        )
    out.sort(key=lambda p: p.id)
    return out


def read_regions(path):
    out = []
    for line_no, obj in _iter_jsonl(path):
        cases = _need(obj, "daily_confirmed_cases", path, line_no)
        if not isinstance(cases, list) or any(
            not isinstance(c, int) or isinstance(c, bool) or c < 0 for c in cases
        ):
            raise ParseError(
                path, line_no, "daily_confirmed_cases must be a list of ints >= 0"
            )
        pop = _need_int(obj, "population_count", path, line_no)
        if pop <= 0:
            raise ParseError(path, line_no, "population_count must be > 0")
        region = Region(
            city_id=_need_id(obj, "city_id", path, line_no),
            province_id=_need_id(obj, "province_id", path, line_no),
            name=_need_str(obj, "name", path, line_no),
            distance_to_epicenter=_need_num(obj, "distance_to_epicenter", path, line_no),
            gdp=_need_num(obj, "gdp", path, line_no),
            daily_confirmed_cases=tuple(cases),
            cultural_tightness=_need_num(obj, "cultural_tightness", path, line_no),
            paddy_rice_pct=_need_num(obj, "paddy_rice_pct", path, line_no),
            innovation_index=_need_num(obj, "innovation_index", path, line_no),
            illiteracy_pct=_need_num(obj, "illiteracy_pct", path, line_no),
            multi_ethnic_household_pct=_need_num(
                obj, "multi_ethnic_household_pct", path, line_no
            ),
            population_count=pop,
        )
        if region.distance_to_epicenter < 0:
            raise ParseError(path, line_no, "distance_to_epicenter must be >= 0")
        for key in ("paddy_rice_pct", "illiteracy_pct", "multi_ethnic_household_pct"):
            v = getattr(region, key)
            if not 0.0 <= v <= 1.0:
                raise ParseError(path, line_no, f"{key} must be in [0, 1], got {v}")
        out.append(region)
    out.sort(key=lambda r: r.city_id)
    return out


def read_addresses(path):
    out = []
    for line_no, obj in _iter_jsonl(path):
        interval = _need(obj, "active_interval", path, line_no)
        if (
            not isinstance(interval, list)
            or len(interval) != 2
            or any(not isinstance(v, int) or isinstance(v, bool) for v in interval)
        ):
            raise ParseError(
                path, line_no, "active_interval must be [start, end] epoch seconds"
            )
        out.append(
            AddressRecord(
                individual_id=_need_id(obj, "individual_id", path, line_no),
                address_id=_need_id(obj, "address_id", path, line_no),
                kind=_need_enum(obj, "kind", ADDRESS_KINDS, path, line_no),
                active_start=interval[0],
                active_end=interval[1],
            )
        )
    out.sort(key=lambda a: (a.individual_id, a.kind, a.address_id, a.active_start))
    return out


def read_events(path):
    kind, iid, ts, text, ppe = [], [], [], [], []
    k_append, i_append = kind.append, iid.append
    t_append, x_append, p_append = ts.append, text.append, ppe.append
    for line_no, obj in _iter_jsonl(path):
        etype = _need_enum(obj, "type", ("query", "purchase"), path, line_no)
        i_append(_need_id(obj, "individual_id", path, line_no))
        t_append(_need_int(obj, "timestamp", path, line_no))
        if etype == "query":
            k_append(EVENT_KIND_QUERY)
            x_append(_need_str(obj, "query_text", path, line_no))
            p_append(False)
        else:
            k_append(EVENT_KIND_PURCHASE)
            x_append(_need_str(obj, "category", path, line_no))
            p_append(_need_bool(obj, "is_ppe", path, line_no))
    return EventLog.canonical(kind, iid, ts, np.array(text, dtype=object), ppe)


# ---------------------------------------------------------------------------
# writers (inverse of the readers; round-trip safe)
# ---------------------------------------------------------------------------

def write_population(path, individuals):
    with open(path, "w", encoding="utf-8") as fh:
        for p in individuals:
            fh.write(
                json.dumps(
                    {
                        "id": p.id,
                        "gender": p.gender,
                        "age": p.age,
                        "education": p.education,
                        "occupation": p.occupation,
                        "purchasing_power": p.purchasing_power,
                        "has_child": p.has_child,
                        "married": p.married,
                        "home_city": p.home_city,
                        "qualified": p.qualified,
                    },
                    separators=(",", ":"),
                )
                + "\n"
            )


def write_regions(path, regions):
    with open(path, "w", encoding="utf-8") as fh:
        for r in regions:
            fh.write(
                json.dumps(
                    {
                        "city_id": r.city_id,
                        "province_id": r.province_id,
                        "name": r.name,
                        "distance_to_epicenter": r.distance_to_epicenter,
                        "gdp": r.gdp,
                        "daily_confirmed_cases": list(r.daily_confirmed_cases),
                        "cultural_tightness": r.cultural_tightness,
                        "paddy_rice_pct": r.paddy_rice_pct,
                        "innovation_index": r.innovation_index,
                        "illiteracy_pct": r.illiteracy_pct,
                        "multi_ethnic_household_pct": r.multi_ethnic_household_pct,
                        "population_count": r.population_count,
                    },
                    separators=(",", ":"),
                )
                + "\n"
            )


def write_addresses(path, addresses):
    with open(path, "w", encoding="utf-8") as fh:
        for a in addresses:
            fh.write(
                json.dumps(
                    {
                        "individual_id": a.individual_id,
                        "address_id": a.address_id,
                        "kind": a.kind,
                        "active_interval": [a.active_start, a.active_end],
                    },
                    separators=(",", ":"),
                )
                + "\n"
            )


def write_events(path, events):
    dumps = json.dumps
    with open(path, "w", encoding="utf-8") as fh:
        kind = events.kind
        iid = events.individual_id
        ts = events.timestamp
        text = events.text
        ppe = events.is_ppe
        lines = []
        for i in range(len(events)):
            if kind[i] == EVENT_KIND_QUERY:
                obj = {
                    "type": "query",
                    "individual_id": int(iid[i]),
                    "timestamp": int(ts[i]),
                    "query_text": text[i],
                }
            else:
                obj = {
                    "type": "purchase",
                    "individual_id": int(iid[i]),
                    "timestamp": int(ts[i]),
                    "category": text[i],
                    "is_ppe": bool(ppe[i]),
                }
            lines.append(dumps(obj, separators=(",", ":")))
            if len(lines) >= 100_000:
                fh.write("\n".join(lines) + "\n")
                lines = []
        if lines:
            fh.write("\n".join(lines) + "\n")


def save_dataset(dataset, directory):
    """Write the four dataset files into ``directory``; returns their paths."""
    import os

    os.makedirs(directory, exist_ok=True)
    paths = {
        "population": os.path.join(directory, "population.jsonl"),
        "regions": os.path.join(directory, "regions.jsonl"),
        "addresses": os.path.join(directory, "addresses.jsonl"),
        "events": os.path.join(directory, "events.jsonl"),
    }
    write_population(paths["population"], dataset.individuals)
    write_regions(paths["regions"], dataset.regions)
    write_addresses(paths["addresses"], dataset.addresses)
    write_events(paths["events"], dataset.events)
    return paths


# ---------------------------------------------------------------------------
# loading and validation
# ---------------------------------------------------------------------------

def infer_calendar(events):
    """Fallback window when none is configured: span of the query events.

    Query events only occur inside the observation window, so their day
    span is the window; with no queries we fall back to the whole event
    span, and with no events at all to a single day at the epoch.
    """
    if len(events) == 0:
        return Calendar(0, 1)
    mask = events.queries_mask()
    ts = events.timestamp[mask] if mask.any() else events.timestamp
    days = day_number(ts)
    lo, hi = int(days.min()), int(days.max())
    return Calendar(lo, hi - lo + 1)


def load_dataset(
    population_path, regions_path, addresses_path, events_path, calendar=None
):
    """Parse, assemble, and validate one dataset from disk.

    Raises ParseError on per-record schema violations and IntegrityError
    when cross-record invariants (foreign keys, duplicates, interval
    ordering) are violated.
    """
    individuals = read_population(population_path)
    regions = read_regions(regions_path)
    addresses = read_addresses(addresses_path)
    events = read_events(events_path)
    if calendar is None:
        calendar = infer_calendar(events)
    dataset = Dataset(individuals, regions, addresses, events, calendar)
    report = validate_dataset(dataset)
    if report.violations:
        shown = "; ".join(report.violations[:10])
        more = len(report.violations) - 10
        if more > 0:
            shown += f"; ... {more} more"
        raise IntegrityError(
            f"dataset failed validation: {shown}", report.violations
        )
    return dataset


def validate_dataset(dataset):
    """Collect entity counts, enum histograms, and invariant violations.

    Violations are data, not failures: the report always comes back, and a
    dataset accepted by load_dataset produces an empty violation list.
    """
    violations = []
    notes = []

    ids_seen = {}
    for p in dataset.individuals:
        ids_seen[p.id] = ids_seen.get(p.id, 0) + 1
    for pid, c in ids_seen.items():
        if c > 1:
            violations.append(f"duplicate individual id {pid} ({c} records)")

    city_ids = {}
    for r in dataset.regions:
        city_ids[r.city_id] = city_ids.get(r.city_id, 0) + 1
    for cid, c in city_ids.items():
        if c > 1:
            violations.append(f"duplicate city_id {cid} ({c} records)")

    for p in dataset.individuals:
        if p.gender not in GENDERS:
            violations.append(f"individual {p.id}: unknown gender {p.gender!r}")
        if p.education not in EDUCATIONS:
            violations.append(f"individual {p.id}: unknown education {p.education!r}")
        if p.occupation not in OCCUPATIONS:
            violations.append(
                f"individual {p.id}: unknown occupation {p.occupation!r}"
            )
        if not 1 <= p.purchasing_power <= MAX_PURCHASING_POWER:
            violations.append(
                f"individual {p.id}: purchasing_power {p.purchasing_power} "
                f"outside [1, {MAX_PURCHASING_POWER}]"
            )
        if p.age < 0:
            violations.append(f"individual {p.id}: negative age {p.age}")
        if p.home_city not in city_ids:
            violations.append(f"individual {p.id}: unknown home_city {p.home_city}")

    if dataset.regions:
        min_dist = min(r.distance_to_epicenter for r in dataset.regions)
        if min_dist != 0:
            violations.append(
                f"no epicenter: minimum distance_to_epicenter is {min_dist}, not 0"
            )
        for r in dataset.regions:
            for key in (
                "paddy_rice_pct",
                "illiteracy_pct",
                "multi_ethnic_household_pct",
            ):
                v = getattr(r, key)
                if not 0.0 <= v <= 1.0:
                    violations.append(f"region {r.city_id}: {key}={v} outside [0, 1]")
            if r.distance_to_epicenter < 0:
                violations.append(
                    f"region {r.city_id}: negative distance_to_epicenter"
                )
            if r.gdp < 0:
                violations.append(f"region {r.city_id}: negative gdp")
            if r.population_count <= 0:
                violations.append(f"region {r.city_id}: population_count <= 0")
            if (
                r.daily_confirmed_cases
                and len(r.daily_confirmed_cases) != dataset.calendar.n_days
            ):
                violations.append(
                    f"region {r.city_id}: daily_confirmed_cases has "
                    f"{len(r.daily_confirmed_cases)} entries, calendar has "
                    f"{dataset.calendar.n_days} days"
                )

    home_memberships = {}
    for a in dataset.addresses:
        if a.individual_id not in ids_seen:
            violations.append(
                f"address {a.address_id}: unknown individual {a.individual_id}"
            )
        if a.kind not in ADDRESS_KINDS:
            violations.append(f"address {a.address_id}: unknown kind {a.kind!r}")
        if a.active_start > a.active_end:
            violations.append(
                f"address {a.address_id} / individual {a.individual_id}: "
                f"active_interval start {a.active_start} > end {a.active_end}"
            )
        if a.kind == "home":
            key = a.individual_id
            home_memberships.setdefault(key, set()).add(a.address_id)
    multi_home = sum(1 for v in home_memberships.values() if len(v) > 1)
    if multi_home:
        notes.append(
            f"{multi_home} individuals appear at more than one home address; "
            "all their family cliques are kept"
        )

    ev = dataset.events
    if len(ev):
        known = np.array(
            [int(i) in ids_seen for i in np.unique(ev.individual_id)], dtype=bool
        )
        unknown_ids = np.unique(ev.individual_id)[~known]
        for uid in unknown_ids[:50]:
            violations.append(f"event references unknown individual {int(uid)}")
        if len(unknown_ids) > 50:
            violations.append(
                f"... {len(unknown_ids) - 50} more unknown event individuals"
            )
        last_day = day_number(ev.timestamp.max())
        if last_day > dataset.calendar.end_day:
            violations.append(
                f"events extend past the calendar end "
                f"(day {int(last_day)} > {dataset.calendar.end_day})"
            )

    genders, educations, occupations = {}, {}, {}
    for p in dataset.individuals:
        genders[p.gender] = genders.get(p.gender, 0) + 1
        educations[p.education] = educations.get(p.education, 0) + 1
        occupations[p.occupation] = occupations.get(p.occupation, 0) + 1
    kinds = {}
    for a in dataset.addresses:
        kinds[a.kind] = kinds.get(a.kind, 0) + 1
    n_q = int(dataset.events.queries_mask().sum()) if len(dataset.events) else 0

    return ValidationReport(
        counts={
            "individuals": len(dataset.individuals),
            "regions": len(dataset.regions),
            "addresses": len(dataset.addresses),
            "events": len(dataset.events),
        },
        enum_histograms={
            "gender": genders,
            "education": educations,
            "occupation": occupations,
            "address_kind": kinds,
            "event_type": {
                "query": n_q,
                "purchase": len(dataset.events) - n_q,
            },
        },
        violations=violations,
        notes=notes,
    )
