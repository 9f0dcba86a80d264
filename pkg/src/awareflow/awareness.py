"""Awareness labeling from query logs.

A pattern expression is a conjunction of OR-groups:

    expr  := group ('&' group)*
    group := '(' term ('|' term)* ')'
    term  := free text without '|', '&', '(' or ')'

A query matches an expression when every group has at least one term
present in the normalized text (lowercased, whitespace collapsed, terms
matched on token boundaries).  An individual becomes aware at the moment
of their third matching query, cumulatively, and stays aware forever.
"""

import numpy as np

from .domain import month_number
from .errors import CohortError, PatternSyntaxError

# Sentinel for "never aware"; any real timestamp compares smaller, so
# aware_mask_at reduces to first_aware <= t with no special cases.
NEVER = np.iinfo(np.int64).max


def normalize_text(text):
    return " ".join(text.lower().split())


def parse_pattern(expr):
    """Parse one expression into a tuple of OR-groups (tuples of terms)."""
    groups = []
    i = 0
    n = len(expr)
    while True:
        while i < n and expr[i].isspace():
            i += 1
        if i >= n:
            if groups:
                break
            raise PatternSyntaxError(expr, i, "expected '('")
        if expr[i] != "(":
            raise PatternSyntaxError(expr, i, f"expected '(' but found {expr[i]!r}")
        i += 1
        terms = []
        start = i
        while True:
            if i >= n:
                raise PatternSyntaxError(expr, i, "unterminated group")
            ch = expr[i]
            if ch in "|)":
                term = normalize_text(expr[start:i])
                if not term:
                    raise PatternSyntaxError(expr, start, "empty term")
                terms.append(term)
                i += 1
                if ch == ")":
                    break
                start = i
            elif ch in "(&":
                raise PatternSyntaxError(expr, i, f"unexpected {ch!r} inside group")
            else:
                i += 1
        groups.append(tuple(terms))
        while i < n and expr[i].isspace():
            i += 1
        if i >= n:
            break
        if expr[i] != "&":
            raise PatternSyntaxError(expr, i, f"expected '&' but found {expr[i]!r}")
        i += 1
    return tuple(groups)


class QueryMatcher:
    """Compiled set of pattern expressions with per-text memoization."""

    _CACHE_LIMIT = 1 << 20

    def __init__(self, patterns):
        self.patterns = tuple(patterns)
        self._cache = {}

    @property
    def n_patterns(self):
        return len(self.patterns)

    def matches(self, text):
        hit = self._cache.get(text)
        if hit is not None:
            return hit
        padded = f" {normalize_text(text)} "
        out = any(
            all(any(f" {t} " in padded for t in group) for group in pattern)
            for pattern in self.patterns
        )
        if len(self._cache) >= self._CACHE_LIMIT:
            self._cache.clear()
        self._cache[text] = out
        return out


def compile_query_set(expressions):
    """Compile pattern expressions (strings) into a QueryMatcher."""
    return QueryMatcher([parse_pattern(e) for e in expressions])


def load_patterns(path):
    """Read pattern expressions from a file: one per line, '#' comments."""
    out = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.split("#", 1)[0].strip()
            if line:
                out.append(line)
    return out


def history_window(calendar, months=60):
    """Month-number window of the `months` months before the calendar start."""
    start_month = int(month_number(np.array([calendar.day_start_ts(0)]))[0])
    return start_month - months, months


def filter_qualified(events, window, min_per_month=1, restrict_ids=None):
    """Ids with >= min_per_month purchases in every month of the window.

    ``window`` is (first_month_number, n_months) as from history_window.
    Result is a sorted uint64 array; restrict_ids, when given, intersects.
    """
    first_month, n_months = window
    if n_months <= 0:
        raise CohortError("history window must cover at least one month")
    mask = events.purchases_mask()
    ids = events.individual_id[mask]
    months = month_number(events.timestamp[mask]) - first_month
    in_window = (months >= 0) & (months < n_months)
    ids = ids[in_window]
    months = months[in_window]
    if len(ids) == 0:
        qualified = np.empty(0, dtype=np.uint64)
    else:
        uids, inv = np.unique(ids, return_inverse=True)
        key = inv.astype(np.int64) * n_months + months
        ukey, counts = np.unique(key, return_counts=True)
        ok = ukey[counts >= min_per_month]
        months_ok = np.bincount(ok // n_months, minlength=len(uids))
        qualified = uids[months_ok == n_months]
    if restrict_ids is not None:
        restrict_ids = np.asarray(restrict_ids, dtype=np.uint64)
        qualified = qualified[np.isin(qualified, restrict_ids)]
    return qualified


class AwarenessTimeline:
    """First-aware timestamps per individual, id-sorted.

    Only individuals that ever became aware are stored; lookups for others
    yield the NEVER sentinel (or None from first_aware_of).
    """

    def __init__(self, ids, first_aware):
        ids = np.asarray(ids, dtype=np.uint64)
        first_aware = np.asarray(first_aware, dtype=np.int64)
        order = np.argsort(ids)
        self.ids = ids[order]
        self.first_aware = first_aware[order]

    def __len__(self):
        return len(self.ids)

    def first_aware_of(self, individual_id):
        pos = np.searchsorted(self.ids, np.uint64(individual_id))
        if pos < len(self.ids) and self.ids[pos] == np.uint64(individual_id):
            return int(self.first_aware[pos])
        return None

    def label(self, individual_id, t):
        ts = self.first_aware_of(individual_id)
        return int(ts is not None and ts <= t)

    def aligned(self, ids):
        """First-aware timestamps aligned to `ids` (NEVER where absent)."""
        ids = np.asarray(ids, dtype=np.uint64)
        out = np.full(len(ids), NEVER, dtype=np.int64)
        pos = np.searchsorted(self.ids, ids)
        pos_clipped = np.minimum(pos, max(len(self.ids) - 1, 0))
        if len(self.ids):
            found = self.ids[pos_clipped] == ids
            out[found] = self.first_aware[pos_clipped[found]]
        return out

    def aware_mask_at(self, t, ids):
        return self.aligned(ids) <= t

    def restrict(self, ids):
        keep = np.isin(self.ids, np.asarray(ids, dtype=np.uint64))
        return AwarenessTimeline(self.ids[keep], self.first_aware[keep])

    def __eq__(self, other):
        if not isinstance(other, AwarenessTimeline):
            return False
        return np.array_equal(self.ids, other.ids) and np.array_equal(
            self.first_aware, other.first_aware
        )


def match_mask(events, matcher):
    """Boolean mask over all events: query events whose text matches.

    Uses the event log's interned text pool when available so each
    distinct text is evaluated once.
    """
    out = np.zeros(len(events), dtype=bool)
    qmask = events.queries_mask()
    if events.text_pool is not None:
        pool_hit = np.fromiter(
            (matcher.matches(t) for t in events.text_pool),
            dtype=bool,
            count=len(events.text_pool),
        )
        out[qmask] = pool_hit[events.text_code[qmask]]
    else:
        idx = np.flatnonzero(qmask)
        texts = events.text[idx]
        out[idx] = np.fromiter(
            (matcher.matches(t) for t in texts), dtype=bool, count=len(texts)
        )
    return out


def label_awareness(events, matcher, threshold=3):
    """Label first-aware moments: timestamp of the threshold-th match."""
    hit = match_mask(events, matcher)
    ids = events.individual_id[hit]
    ts = events.timestamp[hit]
    if len(ids) == 0:
        return AwarenessTimeline(np.empty(0, dtype=np.uint64), np.empty(0, dtype=np.int64))
    order = np.lexsort((ts, ids))
    ids = ids[order]
    ts = ts[order]
    uids, starts, counts = np.unique(ids, return_index=True, return_counts=True)
    enough = counts >= threshold
    return AwarenessTimeline(uids[enough], ts[starts[enough] + threshold - 1])


def awareness_percentage(timeline, cohort_ids, t):
    """Share of the cohort aware at time t, in [0, 1]."""
    cohort_ids = np.asarray(cohort_ids, dtype=np.uint64)
    if len(cohort_ids) == 0:
        raise CohortError("awareness percentage over an empty cohort")
    return float(np.mean(timeline.aligned(cohort_ids) <= t))
