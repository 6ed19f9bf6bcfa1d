from datetime import datetime, timedelta, timezone

import hypothesis
import pytest

from trendwatch.corpus import Tweet, TrendRecord, UserProfile

hypothesis.settings.register_profile(
    "invariants",
    max_examples=1000,
    deadline=None,
    suppress_health_check=[hypothesis.HealthCheck.too_slow],
)
hypothesis.settings.register_profile("dev", max_examples=50, deadline=None)
hypothesis.settings.load_profile("invariants")

T0 = datetime(2021, 1, 24, tzinfo=timezone.utc)


def at(hours: float = 0, seconds: float = 0) -> datetime:
    return T0 + timedelta(hours=hours, seconds=seconds)


def tweet(tid, user="u1", text="x #tag", when=None, lang="en", tags=("tag",), rt=False):
    return Tweet(str(tid), user, text, when or T0, lang, tuple(tags), rt)


def profile(uid, **kw):
    return UserProfile(uid, **kw)


# Sample of local and global trending hashtags (first trend, #other countries,
# worldwide, local), target country Pakistan.
LOCALITY_TABLE = [
    ("samsungpakistan", "Pakistan", 0, False, True),
    ("fajr", "Pakistan", 1, False, True),
    ("motivationalquotes", "Pakistan", 2, False, True),
    ("potus", "Australia", 12, False, False),
    ("ufc257", "Japan", 58, True, False),
    ("t10league", "India", 2, False, False),
]


def locality_trends():
    return [
        (TrendRecord(tag, "Pakistan", T0, T0 + timedelta(hours=1), first, n, world), local)
        for tag, first, n, world, local in LOCALITY_TABLE
    ]


# acceptance summary ------------------------------------------------------

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def record_criterion():
    def record(name: str, ok: bool, detail: str = "") -> bool:
        ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}".rstrip())
        return ok
    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


# invariant bookkeeping ---------------------------------------------------
# The acceptance module runs last so that its invariant-suite criterion can
# read the outcome of every invariant test already executed in this session.

INVARIANT_RESULTS: dict[str, dict] = {}


def _max_examples(item) -> int:
    fn = getattr(item, "obj", None)
    s = getattr(fn, "_hypothesis_internal_use_settings", None)
    return (s or hypothesis.settings.default).max_examples


def pytest_collection_modifyitems(session, config, items):
    for item in items:
        if item.get_closest_marker("invariant"):
            INVARIANT_RESULTS[item.nodeid] = {"max_examples": _max_examples(item), "outcome": None}
    items.sort(key=lambda it: ("test_acceptance" in it.nodeid, "invariant_suite" in it.name))


def pytest_runtest_logreport(report):
    entry = INVARIANT_RESULTS.get(report.nodeid)
    if entry is None:
        return
    if report.when == "call" or report.failed:
        if entry["outcome"] in (None, "passed"):
            entry["outcome"] = report.outcome
