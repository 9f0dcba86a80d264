"""Shared fixtures: one small simulated world reused across test modules.

The world is big enough to exercise every pipeline stage (three network
layers, a mid-window shock, qualified and unqualified shoppers) while
staying fast to generate, so it is built once per session.
"""

import pytest

from awareflow import kernels
from awareflow.awareness import (
    compile_query_set,
    filter_qualified,
    history_window,
    label_awareness,
    load_patterns,
)
from awareflow.netinfer import infer_networks
from awareflow.presets import default_patterns_path
from awareflow.simulate import (
    HazardCoefficients,
    RegionConfig,
    ShockEvent,
    SimConfig,
    generate,
)


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # compile the jitted kernels once so timings inside tests stay honest
    kernels.warmup()


def small_world_config():
    cfg = SimConfig(
        n_individuals=400,
        seed=321,
        n_days=40,
        regions=RegionConfig(n_cities=6, n_provinces=3, max_distance_km=1800.0),
        hazard=HazardCoefficients(intercept=-6.0),
        history_months=6,
        query_noise=0.0,
        stockout_day=30,
    )
    cal = cfg.calendar()
    cfg.events = [ShockEvent("drill", cal.day_start_ts(12) + 43200, 5.0)]
    return cfg


@pytest.fixture(scope="session")
def small_world():
    cfg = small_world_config()
    cfg.validate()
    dataset, truth = generate(cfg)
    return cfg, dataset, truth


@pytest.fixture(scope="session")
def matcher():
    return compile_query_set(load_patterns(default_patterns_path()))


@pytest.fixture(scope="session")
def timeline_small(small_world, matcher):
    _, dataset, _ = small_world
    return label_awareness(dataset.events, matcher)


@pytest.fixture(scope="session")
def qualified_small(small_world):
    cfg, dataset, _ = small_world
    window = history_window(dataset.calendar, months=cfg.history_months)
    return filter_qualified(dataset.events, window)


@pytest.fixture(scope="session")
def graph_small(small_world):
    _, dataset, _ = small_world
    return infer_networks(dataset.addresses, ids=dataset.columns().ids)
