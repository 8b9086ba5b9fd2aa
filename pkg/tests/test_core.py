import math
import random

import pytest

from trajsim import ModelError
from trajsim.core import (FOREVER, PRIORITY_GENERAL, PRIORITY_MANAGER,
                          PRIORITY_MAX, PRIORITY_MIN, PRIORITY_RELEASE,
                          PRIORITY_RELEASE_POST, Engine)


class Probe:
    """Process stub that logs its own execution."""

    def __init__(self, name, log, engine=None, reschedule=None):
        self.name = name
        self.log = log
        self.engine = engine
        self.reschedule = reschedule

    def run(self):
        self.log.append((self.engine.now if self.engine else None, self.name))
        if self.reschedule:
            delay, rank = self.reschedule
            self.reschedule = None
            self.engine.schedule(delay, self, rank)


def drain(engine):
    while engine.step():
        pass


def test_priority_ladder_is_strictly_ordered():
    assert (PRIORITY_MAX > PRIORITY_RELEASE > PRIORITY_MANAGER
            > PRIORITY_RELEASE_POST > 2 > PRIORITY_GENERAL > PRIORITY_MIN)


def test_same_instant_runs_higher_rank_first():
    eng = Engine()
    log = []
    low = Probe("low", log, eng)
    high = Probe("high", log, eng)
    eng.schedule(1.0, low, PRIORITY_GENERAL)
    eng.schedule(1.0, high, PRIORITY_RELEASE)
    drain(eng)
    assert [name for _, name in log] == ["high", "low"]


def test_equal_rank_ties_break_by_insertion_order():
    eng = Engine()
    log = []
    probes = [Probe(f"p{i}", log, eng) for i in range(5)]
    for p in probes:
        eng.schedule(2.0, p, PRIORITY_GENERAL)
    drain(eng)
    assert [name for _, name in log] == ["p0", "p1", "p2", "p3", "p4"]


def test_rescheduling_replaces_the_pending_event():
    eng = Engine()
    log = []
    p = Probe("p", log, eng)
    eng.schedule(5.0, p)
    eng.schedule(1.0, p)
    drain(eng)
    assert log == [(1.0, "p")]
    assert eng.pending_count() == 0


def test_unschedule_drops_event_and_reports_absence():
    eng = Engine()
    log = []
    p = Probe("p", log, eng)
    eng.schedule(1.0, p)
    assert eng.is_scheduled(p)
    assert eng.unschedule(p) is True
    assert eng.unschedule(p) is False
    drain(eng)
    assert log == []


def test_negative_delay_rejected():
    eng = Engine()
    with pytest.raises(ModelError):
        eng.schedule(-0.1, Probe("p", []))


def test_clock_advances_to_event_times():
    eng = Engine()
    log = []
    eng.schedule(1.5, Probe("a", log, eng))
    eng.schedule(4.25, Probe("b", log, eng))
    drain(eng)
    assert log == [(1.5, "a"), (4.25, "b")]
    assert eng.now == 4.25


def test_event_exactly_at_horizon_does_not_run():
    eng = Engine()
    log = []
    eng.schedule(2.0, Probe("a", log, eng))
    eng.schedule(5.0, Probe("b", log, eng))
    eng.run_until(5.0)
    assert [name for _, name in log] == ["a"]
    assert eng.now == 5.0
    assert eng.is_scheduled is not None and eng.pending_count() == 1


def test_clock_stays_at_last_event_when_set_drains():
    eng = Engine()
    eng.schedule(3.0, Probe("a", [], eng))
    eng.run_until(100.0)
    assert eng.now == 3.0


def test_infinite_horizon_drains_without_moving_clock_to_infinity():
    eng = Engine()
    eng.schedule(3.0, Probe("a", [], eng))
    eng.run_until(FOREVER)
    assert eng.now == 3.0
    eng2 = Engine()
    eng2.schedule(3.0, Probe("a", [], eng2))
    eng2.run_until(float("inf"))
    assert eng2.now == 3.0


def test_next_time_and_peek():
    eng = Engine()
    a = Probe("a", [], eng)
    b = Probe("b", [], eng)
    assert eng.next_time() == FOREVER
    assert eng.peek(3) == []
    eng.schedule(2.0, a)
    eng.schedule(1.0, b)
    assert eng.next_time() == 1.0
    assert eng.peek(2) == [(1.0, "b"), (2.0, "a")]
    # peek must not disturb the schedule
    assert eng.pending_count() == 2


def test_peek_skips_stale_entries():
    eng = Engine()
    a = Probe("a", [], eng)
    eng.schedule(1.0, a)
    eng.schedule(9.0, a)
    assert eng.peek(5) == [(9.0, "a")]


def test_reschedule_from_within_run():
    eng = Engine()
    log = []
    p = Probe("p", log, eng, reschedule=(2.0, PRIORITY_GENERAL))
    eng.schedule(1.0, p)
    drain(eng)
    assert log == [(1.0, "p"), (3.0, "p")]


def test_reset_clears_clock_and_events():
    eng = Engine()
    eng.schedule(1.0, Probe("a", [], eng))
    eng.run_until(10.0)
    eng.reset()
    assert eng.now == 0.0
    assert eng.pending_count() == 0
    assert eng.next_time() == FOREVER


class ReferenceEventSet:
    """Sorted-list event set with the same contract, used as an oracle."""

    def __init__(self):
        self.now = 0.0
        self.entries = []
        self.seq = 0

    def schedule(self, delay, process, priority):
        self.entries = [e for e in self.entries if e[3] is not process]
        self.seq += 1
        self.entries.append((self.now + delay, -priority, self.seq, process))
        self.entries.sort()

    def unschedule(self, process):
        before = len(self.entries)
        self.entries = [e for e in self.entries if e[3] is not process]
        return len(self.entries) != before

    def drain(self):
        order = []
        for at, _, _, process in self.entries:
            self.now = at
            order.append((at, process))
        self.entries = []
        return order


def test_randomized_operations_match_reference_oracle():
    rng = random.Random(20240817)
    eng = Engine()
    ref = ReferenceEventSet()
    log = []
    processes = [Probe(f"p{i}", log, eng) for i in range(40)]
    for _ in range(5000):
        op = rng.random()
        p = rng.choice(processes)
        if op < 0.75:
            delay = rng.choice([0.0, 0.5, 1.0, 1.0, 2.5])
            rank = rng.randint(PRIORITY_MIN, PRIORITY_MAX)
            eng.schedule(delay, p, rank)
            ref.schedule(delay, p, rank)
        else:
            assert eng.unschedule(p) == ref.unschedule(p)
    drain(eng)
    expected = [(at, proc.name) for at, proc in ref.drain()]
    assert log == expected
    assert eng.now == ref.now or math.isclose(eng.now, ref.now)
