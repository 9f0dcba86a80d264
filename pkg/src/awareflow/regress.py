"""Time-evolving logistic regression of awareness on individual features.

A design matrix is built per checkpoint time t: demographics, distance,
purchasing power, and per-layer social exposure (share of aware neighbors
among the retained population, i.e. everyone outside the regression
sample).  Fitting is maximum likelihood via iteratively reweighted least
squares with a small ridge fallback when the likelihood has no finite
maximizer (perfect separation) or Newton fails to converge.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import expit
from scipy.stats import norm

from . import kernels
from .domain import EDUCATIONS, GENDERS, OCCUPATIONS
from .errors import ConfigError, DegenerateOutcomeError, NumericalError
from .netinfer import LAYERS

AGE_BRACKETS = (
    ("under_18", 0, 17),
    ("18_24", 18, 24),
    ("25_49", 25, 49),
    ("50_plus", 50, 10**9),
)


@dataclass(frozen=True)
class FeatureSpec:
    """Which columns enter the design and which levels are references."""

    gender_ref: str = "male"
    education_ref: str = "bachelor"
    occupation_ref: str = "white_collar"
    age_mode: str = "linear"  # "linear" (standardized) or "brackets"
    age_bracket_ref: str = "25_49"

    def validate(self):
        if self.gender_ref not in GENDERS:
            raise ConfigError(f"unknown gender_ref {self.gender_ref!r}")
        if self.education_ref not in EDUCATIONS:
            raise ConfigError(f"unknown education_ref {self.education_ref!r}")
        if self.occupation_ref not in OCCUPATIONS:
            raise ConfigError(f"unknown occupation_ref {self.occupation_ref!r}")
        if self.age_mode not in ("linear", "brackets"):
            raise ConfigError("age_mode must be 'linear' or 'brackets'")
        if self.age_bracket_ref not in {b[0] for b in AGE_BRACKETS}:
            raise ConfigError(f"unknown age_bracket_ref {self.age_bracket_ref!r}")
        return self

    def column_names(self):
        names = ["intercept"]
        names += [f"gender_{g}" for g in GENDERS if g != self.gender_ref]
        if self.age_mode == "linear":
            names.append("age_std")
        else:
            names += [
                f"age_{b[0]}" for b in AGE_BRACKETS if b[0] != self.age_bracket_ref
            ]
        names += [f"education_{e}" for e in EDUCATIONS if e != self.education_ref]
        names += [f"occupation_{o}" for o in OCCUPATIONS if o != self.occupation_ref]
        names += ["distance_std", "purchasing_power_std", "has_child", "married"]
        for layer in LAYERS:
            names += [f"{layer}_aware_frac", f"{layer}_has_neighbors"]
        return names


def _standardize(x):
    x = np.asarray(x, dtype=np.float64)
    sd = x.std()
    if sd == 0:
        return np.zeros_like(x)
    return (x - x.mean()) / sd


class DesignBuilder:
    """Precomputes everything about a sample that does not depend on t."""

    def __init__(self, dataset, graph, timeline, sample_ids, spec=None):
        self.spec = (spec or FeatureSpec()).validate()
        cols = dataset.columns()
        self.names = self.spec.column_names()
        sample_ids = np.asarray(sample_ids, dtype=np.uint64)
        if len(np.unique(sample_ids)) != len(sample_ids):
            raise ConfigError("sample contains duplicate ids")
        self.sample_rows = cols.rows_of(sample_ids)
        if len(self.sample_rows) == 0:
            raise ConfigError("empty regression sample")
        if len(self.sample_rows) >= cols.n:
            raise ConfigError(
                "sample covers the whole population; nobody is left to "
                "compute neighbor exposure against"
            )
        self.graph = graph
        # graph rows and dataset rows must mean the same individual
        if not np.array_equal(graph.ids, cols.ids):
            raise ConfigError("graph node universe does not match the dataset")
        retained = np.ones(cols.n, dtype=bool)
        retained[self.sample_rows] = False
        self.retained = retained
        self.aligned_all = timeline.aligned(cols.ids)

        n_s = len(self.sample_rows)
        k = len(self.names)
        X = np.zeros((n_s, k), dtype=np.float64)
        col = {name: j for j, name in enumerate(self.names)}
        X[:, col["intercept"]] = 1.0
        sp = self.spec
        g_row = cols.gender[self.sample_rows]
        for gi, g in enumerate(GENDERS):
            if g != sp.gender_ref:
                X[:, col[f"gender_{g}"]] = g_row == gi
        age = cols.age[self.sample_rows].astype(np.float64)
        if sp.age_mode == "linear":
            X[:, col["age_std"]] = _standardize(age)
        else:
            for name, lo, hi in AGE_BRACKETS:
                if name != sp.age_bracket_ref:
                    X[:, col[f"age_{name}"]] = (age >= lo) & (age <= hi)
        e_row = cols.education[self.sample_rows]
        for ei, e in enumerate(EDUCATIONS):
            if e != sp.education_ref:
                X[:, col[f"education_{e}"]] = e_row == ei
        o_row = cols.occupation[self.sample_rows]
        for oi, o in enumerate(OCCUPATIONS):
            if o != sp.occupation_ref:
                X[:, col[f"occupation_{o}"]] = o_row == oi
        X[:, col["distance_std"]] = _standardize(
            dataset.distance_km()[self.sample_rows]
        )
        X[:, col["purchasing_power_std"]] = _standardize(
            cols.purchasing_power[self.sample_rows].astype(np.float64)
        )
        X[:, col["has_child"]] = cols.has_child[self.sample_rows]
        X[:, col["married"]] = cols.married[self.sample_rows]

        self._frac_cols = {}
        self._retained_deg = {}
        for layer in LAYERS:
            lyr = graph.layer(layer)
            base, _ = kernels.count_marked_neighbors_two(
                lyr.indptr, lyr.indices, retained, retained
            )
            self._retained_deg[layer] = base
            X[:, col[f"{layer}_has_neighbors"]] = base[self.sample_rows] > 0
            self._frac_cols[layer] = col[f"{layer}_aware_frac"]
        self._static = X

    def at(self, t):
        """(X, y) at time t: exposure columns filled, labels thresholded."""
        X = self._static.copy()
        aware = self.aligned_all <= t
        for layer in LAYERS:
            lyr = self.graph.layer(layer)
            base, hit = kernels.count_marked_neighbors_two(
                lyr.indptr, lyr.indices, self.retained, self.retained & aware
            )
            deg = self._retained_deg[layer]
            frac = np.zeros(len(deg), dtype=np.float64)
            nz = deg > 0
            frac[nz] = hit[nz] / deg[nz]
            X[:, self._frac_cols[layer]] = frac[self.sample_rows]
        y = aware[self.sample_rows].astype(np.float64)
        return X, y


def build_design(dataset, graph, timeline, t, sample_ids, spec=None):
    """One-shot design matrix; returns (X, y, column_names)."""
    builder = DesignBuilder(dataset, graph, timeline, sample_ids, spec)
    X, y = builder.at(t)
    return X, y, builder.names


@dataclass
class FitConfig:
    max_iter: int = 100
    tol: float = 1e-8
    ridge: float = 1e-4
    coef_cap: float = 30.0  # |coef| beyond this means separation in practice


@dataclass
class FitResult:
    coef: np.ndarray
    se: np.ndarray
    z: np.ndarray
    p: np.ndarray
    odds_ratio: np.ndarray
    converged: bool
    n_iter: int
    ridge_used: bool
    log_likelihood: float
    names: list = None


def log_likelihood(X, y, beta):
    """Bernoulli log likelihood at beta (no penalty)."""
    eta = X @ beta
    return float(np.sum(y * eta - np.logaddexp(0.0, eta)))


def score_vector(X, y, beta):
    """Gradient of the log likelihood at beta."""
    return X.T @ (y - expit(X @ beta))


def _irls(X, y, lam, max_iter, tol):
    """Newton solve of the (optionally ridge-penalized) likelihood.

    The first column is treated as the intercept and never penalized.
    Returns (beta, hessian, n_iter, converged).
    """
    n, k = X.shape
    pen = np.full(k, lam)
    pen[0] = 0.0
    beta = np.zeros(k)
    H = None
    for it in range(1, max_iter + 1):
        mu = expit(X @ beta)
        score = X.T @ (y - mu) - pen * beta
        w = np.maximum(mu * (1.0 - mu), 1e-12)
        H = X.T @ (X * w[:, None])
        H[np.diag_indices(k)] += pen
        if np.max(np.abs(score)) < tol:
            return beta, H, it, True
        try:
            step = np.linalg.solve(H, score)
        except np.linalg.LinAlgError:
            raise NumericalError("singular information matrix") from None
        beta = beta + step
        if not np.all(np.isfinite(beta)):
            raise NumericalError("coefficients diverged to non-finite values")
    return beta, H, max_iter, False


def fit_logistic(X, y, config=None, names=None):
    """Fit and return Wald-style inference for every column.

    Plain maximum likelihood first; perfect separation or non-convergence
    triggers one ridge-penalized refit (intercept exempt).  A one-class
    outcome is refused outright.
    """
    config = config or FitConfig()
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or len(X) != len(y):
        raise NumericalError("design matrix and outcome length mismatch")
    uniq = np.unique(y)
    if not np.all(np.isin(uniq, (0.0, 1.0))):
        raise DegenerateOutcomeError("outcome must be binary 0/1")
    if len(uniq) < 2:
        raise DegenerateOutcomeError(
            f"outcome is all {int(uniq[0])}s; the model is undefined"
        )

    ridge_used = False
    try:
        beta, H, n_iter, converged = _irls(X, y, 0.0, config.max_iter, config.tol)
        if not converged or np.max(np.abs(beta)) > config.coef_cap:
            ridge_used = True
    except NumericalError:
        ridge_used = True
    if ridge_used:
        beta, H, n_iter, converged = _irls(
            X, y, config.ridge, config.max_iter, config.tol
        )
        if not converged:
            raise NumericalError(
                "logistic fit failed to converge even with ridge penalty"
            )

    try:
        cov = np.linalg.inv(H)
    except np.linalg.LinAlgError:
        raise NumericalError("information matrix is singular at the optimum") from None
    se = np.sqrt(np.maximum(np.diag(cov), 0.0))
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, beta / se, np.nan)
    p = np.where(np.isnan(z), np.nan, 2.0 * norm.sf(np.abs(z)))
    return FitResult(
        coef=beta,
        se=se,
        z=z,
        p=p,
        odds_ratio=np.exp(beta),
        converged=converged,
        n_iter=n_iter,
        ridge_used=ridge_used,
        log_likelihood=log_likelihood(X, y, beta),
        names=list(names) if names is not None else None,
    )


@dataclass(frozen=True)
class Checkpoint:
    kind: str  # "percentage" | "event"
    trigger: str
    time: int
    value: float = None


@dataclass
class Schedule:
    entries: list
    missing: list  # integer percentages the series never reached

    def __len__(self):
        return len(self.entries)


def checkpoint_schedule(timeline, cohort_ids, events, pct_min=1, pct_max=95):
    """Fit times: first crossing of each integer percentage, plus events.

    Crossing times are exact first-aware timestamps (sub-day resolution).
    An event coinciding with a crossing stays a separate entry.  Never
    reached percentages are reported in ``missing``.
    """
    cohort_ids = np.asarray(cohort_ids, dtype=np.uint64)
    n = len(cohort_ids)
    if n == 0:
        raise DegenerateOutcomeError("checkpoint schedule over an empty cohort")
    ts = np.sort(timeline.restrict(cohort_ids).first_aware)
    entries = []
    missing = []
    for k in range(pct_min, pct_max + 1):
        m = (n * k + 99) // 100  # ceil(n*k/100): first count reaching k%
        if m <= len(ts):
            entries.append(
                Checkpoint(
                    kind="percentage", trigger=f"pct_{k:02d}", time=int(ts[m - 1]), value=float(k)
                )
            )
        else:
            missing.append(k)
    for ev in events:
        entries.append(
            Checkpoint(kind="event", trigger=f"event_{ev.label}", time=int(ev.timestamp))
        )
    entries.sort(key=lambda c: (c.time, c.kind, c.trigger))
    return Schedule(entries=entries, missing=missing)


@dataclass
class CheckpointModel:
    checkpoint: Checkpoint
    result: FitResult  # None when the fit errored
    error: str
    n_obs: int
    n_aware: int


def run_time_evolving(
    dataset,
    graph,
    timeline,
    schedule,
    sample_ids,
    spec=None,
    fit_config=None,
    jobs=None,
):
    """Fit one model per checkpoint; per-checkpoint failures are recorded
    (error string instead of a result) and the series continues."""
    builder = DesignBuilder(dataset, graph, timeline, sample_ids, spec)
    fit_config = fit_config or FitConfig()

    def one(checkpoint):
        X, y = builder.at(checkpoint.time)
        n_aware = int(y.sum())
        try:
            result = fit_logistic(X, y, fit_config, names=builder.names)
            return CheckpointModel(checkpoint, result, None, len(y), n_aware)
        except (DegenerateOutcomeError, NumericalError) as exc:
            return CheckpointModel(checkpoint, None, str(exc), len(y), n_aware)

    n_jobs = jobs if jobs and jobs > 0 else (os.cpu_count() or 1)
    if n_jobs <= 1 or len(schedule.entries) <= 1:
        return [one(cp) for cp in schedule.entries]
    with ThreadPoolExecutor(max_workers=n_jobs) as pool:
        return list(pool.map(one, schedule.entries))


@dataclass(frozen=True)
class ProfileEntry:
    phase: str
    feature: str
    direction: str  # "positive" (OR > 1) or "negative"
    n_significant: int
    n_models: int


def typical_profile(models, segmentation, calendar, p_threshold=0.05):
    """Per phase, the features significant in the same direction in a
    strict majority of that phase's successful checkpoint fits."""
    by_phase = {}
    for m in models:
        if m.result is None:
            continue
        day = int(calendar.day_of(m.checkpoint.time))
        phase = segmentation.phase_of_day(day)
        if phase is not None:
            by_phase.setdefault(phase, []).append(m)
    out = []
    phase_rank = {name: i for i, name in enumerate(segmentation.by_name())}
    for phase in sorted(by_phase, key=lambda ph: phase_rank.get(ph, 99)):
        phase_models = by_phase[phase]
        names = phase_models[0].result.names
        n = len(phase_models)
        for j, feature in enumerate(names):
            if feature == "intercept":
                continue
            pos = sum(
                1
                for m in phase_models
                if m.result.p[j] < p_threshold and m.result.coef[j] > 0
            )
            neg = sum(
                1
                for m in phase_models
                if m.result.p[j] < p_threshold and m.result.coef[j] < 0
            )
            if pos * 2 > n:
                out.append(ProfileEntry(phase, feature, "positive", pos, n))
            elif neg * 2 > n:
                out.append(ProfileEntry(phase, feature, "negative", neg, n))
    return out
