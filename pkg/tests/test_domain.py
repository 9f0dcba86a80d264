"""Data model: calendar math, canonical event log, JSONL round trips,
validation invariants."""

import json
import random
from datetime import date, datetime, timedelta, timezone

import numpy as np
import pytest

from awareflow.domain import (
    Calendar,
    Dataset,
    EventLog,
    Individual,
    PurchaseEvent,
    QueryEvent,
    Region,
    AddressRecord,
    day_number,
    infer_calendar,
    load_dataset,
    month_number,
    read_events,
    save_dataset,
    validate_dataset,
    write_events,
)
from awareflow.errors import IntegrityError, ParseError

CN = timezone(timedelta(hours=8))


# --- calendar ---------------------------------------------------------------

def test_calendar_from_dates_inclusive():
    cal = Calendar.from_dates("2019-12-01", "2020-02-26")
    assert cal.n_days == 88
    assert cal.date_of(0) == date(2019, 12, 1)
    assert cal.date_of(87) == date(2020, 2, 26)
    assert cal.end_day == cal.start_day + 87


def test_calendar_rejects_empty():
    with pytest.raises(ValueError):
        Calendar(0, 0)


def test_day_boundaries_are_china_midnight():
    cal = Calendar.from_dates("2020-01-01", "2020-01-31")
    for i in (0, 14, 30):
        ts = cal.day_start_ts(i)
        local = datetime.fromtimestamp(ts, tz=CN)
        assert (local.hour, local.minute, local.second) == (0, 0, 0)
        assert local.date() == cal.date_of(i)
        assert cal.day_of(ts) == i
        assert cal.day_of(ts + 86399) == i
        assert cal.day_of(ts + 86400) == i + 1
        assert cal.day_of(ts - 1) == i - 1


def test_day_and_month_numbers_match_datetime():
    rng = random.Random(5)
    for _ in range(200):
        ts = rng.randrange(0, 2_000_000_000)
        local = datetime.fromtimestamp(ts, tz=CN)
        assert int(day_number(ts)) == (local.date() - date(1970, 1, 1)).days
        assert int(month_number(ts)) == (local.year - 1970) * 12 + local.month - 1


def test_calendar_equality_and_iso_dates():
    a = Calendar.from_dates("2019-12-01", "2019-12-03")
    b = Calendar(a.start_day, 3)
    assert a == b
    assert a.iso_dates() == ["2019-12-01", "2019-12-02", "2019-12-03"]


# --- event log --------------------------------------------------------------

def sample_records():
    return [
        QueryEvent(2, 1000, "n95 face mask"),
        QueryEvent(1, 1000, "rice cooker"),
        PurchaseEvent(1, 999, "books", False),
        PurchaseEvent(3, 1000, "n95 respirator mask", True),
        QueryEvent(1, 1500, "wuhan pneumonia"),
        QueryEvent(1, 1000, "face mask"),  # same (ts, id, kind), text breaks tie
    ]


def test_canonical_order_is_input_permutation_invariant():
    records = sample_records()
    base = EventLog.from_records(records)
    rng = random.Random(11)
    for _ in range(10):
        shuffled = records[:]
        rng.shuffle(shuffled)
        assert EventLog.from_records(shuffled) == base
    # globally sorted by time first
    assert np.all(np.diff(base.timestamp) >= 0)


def test_concat_equals_union():
    records = sample_records()
    a = EventLog.from_records(records[:2])
    b = EventLog.from_records(records[2:])
    assert EventLog.concat(a, b) == EventLog.from_records(records)
    assert EventLog.concat(a, EventLog.empty()) == a
    assert len(EventLog.concat()) == 0


def test_records_round_trip_through_columns():
    records = sample_records()
    log = EventLog.from_records(records)
    assert sorted(log, key=repr) == sorted(records, key=repr)
    assert log.queries_mask().sum() == 4
    assert log.purchases_mask().sum() == 2
    assert log.is_ppe.sum() == 1


def test_individual_order_sorts_by_id_then_time():
    log = EventLog.from_records(sample_records())
    order = log.individual_order()
    pairs = list(zip(log.individual_id[order], log.timestamp[order]))
    assert pairs == sorted(pairs)


# --- JSONL readers ----------------------------------------------------------

def test_empty_events_file(tmp_path):
    path = tmp_path / "events.jsonl"
    path.write_text("")
    log = read_events(path)
    assert len(log) == 0


def test_events_file_roundtrip_and_line_shuffle(tmp_path):
    log = EventLog.from_records(sample_records())
    path = tmp_path / "events.jsonl"
    write_events(path, log)
    assert read_events(path) == log
    lines = path.read_text().strip().split("\n")
    random.Random(3).shuffle(lines)
    shuffled = tmp_path / "shuffled.jsonl"
    shuffled.write_text("\n".join(lines) + "\n")
    assert read_events(shuffled) == log


def test_purchasing_power_out_of_range_is_parse_error(tmp_path):
    ok = {
        "id": 1, "gender": "female", "age": 30, "education": "bachelor",
        "occupation": "white_collar", "purchasing_power": 4, "has_child": False,
        "married": False, "home_city": 0, "qualified": True,
    }
    bad = dict(ok, id=2, purchasing_power=9)
    path = tmp_path / "population.jsonl"
    path.write_text(json.dumps(ok) + "\n" + json.dumps(bad) + "\n")
    from awareflow.domain import read_population

    with pytest.raises(ParseError) as exc:
        read_population(path)
    assert exc.value.line_no == 2
    assert "purchasing_power must be in [1, 7], got 9" in str(exc.value)
    assert str(path) in str(exc.value)


def test_reader_error_variants(tmp_path):
    from awareflow.domain import read_population

    path = tmp_path / "population.jsonl"
    # invalid JSON reports position
    path.write_text("{broken\n")
    with pytest.raises(ParseError, match="invalid JSON"):
        read_population(path)
    # unknown enum value
    row = {
        "id": 1, "gender": "other", "age": 30, "education": "bachelor",
        "occupation": "white_collar", "purchasing_power": 4, "has_child": False,
        "married": False, "home_city": 0, "qualified": True,
    }
    path.write_text(json.dumps(row) + "\n")
    with pytest.raises(ParseError, match="gender must be one of"):
        read_population(path)
    # missing field
    del row["age"]
    row["gender"] = "female"
    path.write_text(json.dumps(row) + "\n")
    with pytest.raises(ParseError, match="missing field 'age'"):
        read_population(path)


def test_event_reader_rejects_bad_type(tmp_path):
    path = tmp_path / "events.jsonl"
    path.write_text('{"type":"click","individual_id":1,"timestamp":0}\n')
    with pytest.raises(ParseError, match="type must be one of"):
        read_events(path)


# --- validation fixtures ----------------------------------------------------

def make_region(city_id=0, province_id=0, distance=0.0, n_days=1):
    return Region(
        city_id=city_id,
        province_id=province_id,
        name=f"city-{city_id}",
        distance_to_epicenter=distance,
        gdp=100.0,
        daily_confirmed_cases=tuple([0] * n_days),
        cultural_tightness=0.5,
        paddy_rice_pct=0.2,
        innovation_index=1.0,
        illiteracy_pct=0.05,
        multi_ethnic_household_pct=0.1,
        population_count=1000,
    )


def make_individual(ind_id, home_city=0):
    return Individual(
        id=ind_id,
        gender="female" if ind_id % 2 else "male",
        age=20 + ind_id,
        education="bachelor",
        occupation="white_collar",
        purchasing_power=4,
        has_child=False,
        married=False,
        home_city=home_city,
        qualified=True,
    )


def tiny_dataset(individuals, addresses=(), events=None):
    return Dataset(
        individuals=list(individuals),
        regions=[make_region(0), make_region(1, distance=300.0)],
        addresses=list(addresses),
        events=events if events is not None else EventLog.empty(),
        calendar=Calendar(0, 1),
    )


def test_valid_ten_individuals_no_violations():
    ds = tiny_dataset([make_individual(i) for i in range(1, 11)])
    report = validate_dataset(ds)
    assert report.ok()
    assert report.violations == []
    assert report.counts["individuals"] == 10
    assert report.enum_histograms["education"] == {"bachelor": 10}


def test_unknown_home_city_violation_names_individual():
    ds = tiny_dataset([make_individual(1), make_individual(2), make_individual(3, home_city=99)])
    report = validate_dataset(ds)
    assert report.violations == ["individual 3: unknown home_city 99"]


def test_duplicate_individual_id_violation():
    ds = tiny_dataset([make_individual(7), make_individual(7)])
    report = validate_dataset(ds)
    assert "duplicate individual id 7 (2 records)" in report.violations


def test_interval_start_after_end_violation():
    bad = AddressRecord(individual_id=1, address_id=10, kind="home",
                        active_start=100, active_end=50)
    ds = tiny_dataset([make_individual(1)], addresses=[bad])
    report = validate_dataset(ds)
    assert report.violations == [
        "address 10 / individual 1: active_interval start 100 > end 50"
    ]


def test_missing_epicenter_violation():
    ds = Dataset(
        individuals=[make_individual(1)],
        regions=[make_region(0, distance=5.0)],
        addresses=[],
        events=EventLog.empty(),
        calendar=Calendar(0, 1),
    )
    report = validate_dataset(ds)
    assert "no epicenter: minimum distance_to_epicenter is 5.0, not 0" in report.violations


def test_event_for_unknown_individual_violation():
    events = EventLog.from_records([QueryEvent(42, 1000, "x")])
    ds = tiny_dataset([make_individual(1)], events=events)
    report = validate_dataset(ds)
    assert any(
        v == "event references unknown individual 42" for v in report.violations
    )


def test_multi_home_is_a_note_not_a_violation():
    addrs = [
        AddressRecord(1, 10, "home", 0, 100),
        AddressRecord(1, 11, "home", 0, 100),
    ]
    ds = tiny_dataset([make_individual(1)], addresses=addrs)
    report = validate_dataset(ds)
    assert report.ok()
    assert any("more than one home address" in n for n in report.notes)


def test_load_dataset_raises_integrity_error(tmp_path):
    ds = tiny_dataset([make_individual(1), make_individual(2, home_city=77)])
    paths = save_dataset(ds, tmp_path)
    with pytest.raises(IntegrityError) as exc:
        load_dataset(paths["population"], paths["regions"], paths["addresses"],
                     paths["events"], calendar=ds.calendar)
    assert "dataset failed validation" in str(exc.value)
    assert "individual 2: unknown home_city 77" in str(exc.value)


def test_infer_calendar_uses_query_span():
    cal = Calendar.from_dates("2020-01-05", "2020-01-09")
    records = [
        PurchaseEvent(1, cal.day_start_ts(-200), "books", False),  # old history
        QueryEvent(1, cal.day_start_ts(0) + 10, "a"),
        QueryEvent(1, cal.day_start_ts(4) + 10, "b"),
    ]
    inferred = infer_calendar(EventLog.from_records(records))
    assert inferred == cal
    assert infer_calendar(EventLog.empty()) == Calendar(0, 1)


# --- full round trip --------------------------------------------------------

def test_simulated_dataset_round_trips_through_disk(tmp_path, small_world):
    _, dataset, _ = small_world
    paths = save_dataset(dataset, tmp_path)
    loaded = load_dataset(
        paths["population"], paths["regions"], paths["addresses"], paths["events"],
        calendar=dataset.calendar,
    )
    assert loaded == dataset
    assert validate_dataset(loaded).ok()


def test_columns_view_is_consistent(small_world):
    _, dataset, _ = small_world
    cols = dataset.columns()
    assert cols.n == len(dataset.individuals)
    assert np.all(np.diff(cols.ids.astype(np.int64)) > 0)  # sorted unique ids
    some = dataset.individuals[17]
    row = cols.index_of[some.id]
    assert cols.age[row] == some.age
    assert bool(cols.qualified[row]) == some.qualified
    # distances come from the home city of each individual
    by_city = {r.city_id: r.distance_to_epicenter for r in dataset.regions}
    dist = dataset.distance_km()
    assert dist[row] == by_city[some.home_city]
