from __future__ import annotations

import time
from contextlib import contextmanager

import pytest

from ldsrlars.stream import Stream, parse_atom_list


def atoms(text: str) -> frozenset:
    return frozenset(parse_atom_list(text))


def stream(*slots: str) -> Stream:
    return Stream(tuple(atoms(s) for s in slots))


@pytest.fixture
def traffic_text() -> str:
    return (
        "box( inNetwork(Veh) <- onLane(Veh,X,Y) ).\n"
        "appears(Veh) <- onLane(Veh,X,Y), not (wplus[0] at[T] true and at[T-1] inNetwork(Veh)).\n"
        "disappears(Veh) <- wplus[0] at[T] true and at[T-1] inNetwork(Veh), not inNetwork(Veh).\n"
    )


@pytest.fixture
def train_text() -> str:
    return "irregular :- train_pass, train_pass at least 1 in {1,2}.\n"


# -- acceptance reporting -----------------------------------------------------------

_RESULTS = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[_RESULTS] = []


@pytest.fixture
def criterion(request):
    """Time a block and record one PASS/FAIL line for the terminal summary."""

    @contextmanager
    def run(label: str, limit: float):
        start = time.perf_counter()
        ok = False
        try:
            yield
            ok = True
        finally:
            elapsed = time.perf_counter() - start
            within = elapsed < limit
            request.config.stash[_RESULTS].append((label, ok and within, elapsed, limit))
        assert within, f"{label} took {elapsed:.1f}s (limit {limit:.0f}s)"

    return run


def pytest_terminal_summary(terminalreporter, config):
    rows = config.stash.get(_RESULTS, [])
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for label, ok, elapsed, limit in rows:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {label}  ({elapsed:.1f}s, limit {limit:.0f}s)")
