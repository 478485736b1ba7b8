"""Constructive multi-start heuristic.

Frozen traces (hand derivation):
  toy1, draws (1,2),(1,2): batch size ceil(10/2)=5 caps each tuple, so the
      pairing yields [(1,2,5),(1,2,5)] and one heater forces makespan 2.
  toy2: (1,1)/(2,2) lack copies, (1,2) trips over the shared part, so only
      the single-mold pairs remain: [(0,1,10),(0,2,10)], makespan 2.
  single demanded mold (demand 1000, 4 copies, tv 550, tc 606): one
      identical-pair tuple q=500 runs 20 periods; splitting it across two
      heaters gives 10.
  shave check (demand 9, rate 10, setup 606): a lone single-mold tuple q=12
      needs 2 periods; shaving the surplus back to q=9 fits one period.
"""

import random

import pytest

from curesched.domain import (
    AssignmentTuple,
    Mold,
    Schedule,
    Part,
    schedule_makespan,
    validate_instance,
    validate_schedule,
)
from curesched.errors import UnproduciblePair
from curesched.heuristic import (
    HeuristicConfig,
    assignment_procedure,
    improvement_procedure,
    mold_pairs_procedure,
    run_heuristic,
)

from helpers import PHI, single_mold_big, tiny_instance, toy1, toy1_two_heaters, toy2, variant


class ScriptedRng:
    """Stands in for random.Random: choice() follows a script, then always
    takes the first offered element."""

    def __init__(self, picks=()):
        self.picks = list(picks)

    def choice(self, seq):
        if self.picks:
            want = self.picks.pop(0)
            assert want in seq, f"scripted pick {want} not offered in {list(seq)}"
            return want
        return seq[0]


def _pairs(tuples):
    return [(t.m1, t.m2, t.q) for t in tuples]


# ── pairing ──────────────────────────────────────────────────────────

def test_toy1_pairing_mixed_draws():
    tuples = mold_pairs_procedure(toy1(), ScriptedRng([(1, 2), (1, 2)]))
    assert _pairs(tuples) == [(1, 2, 5), (1, 2, 5)]
    assert [t.id for t in tuples] == [1, 2]
    assert all(not t.assigned for t in tuples)


def test_toy1_pairing_identical_draws():
    tuples = mold_pairs_procedure(toy1(), ScriptedRng([(1, 1), (2, 2)]))
    assert _pairs(tuples) == [(1, 1, 5), (2, 2, 5)]


def test_toy2_pairing_forced_singles():
    tuples = mold_pairs_procedure(toy2(), ScriptedRng())
    assert sorted(_pairs(tuples)) == [(0, 1, 10), (0, 2, 10)]


def test_pairing_covers_demand_with_batch_ceiling():
    inst = variant(
        toy1(),
        molds=(
            Mold(id=1, copies=3, setup_dmin=600, removal_dmin=300, demand=10),
            Mold(id=2, copies=2, setup_dmin=600, removal_dmin=300, demand=0),
        ),
    )
    tuples = mold_pairs_procedure(inst, random.Random(7))
    produced = sum(t.production().get(1, 0) for t in tuples)
    assert produced >= 10
    assert all(t.q <= 4 for t in tuples)  # ceil(10/3) = 4


def test_pairing_raises_when_nothing_admissible():
    # inadmissible on purpose: the required part has no units at all
    inst = variant(toy2(), parts=(Part(id=1, units=0, molds=frozenset({1, 2})),))
    with pytest.raises(UnproduciblePair):
        mold_pairs_procedure(inst, random.Random(0))


def test_pairing_zero_demand():
    inst = variant(
        toy1(),
        molds=tuple(Mold(m.id, m.copies, m.setup_dmin, m.removal_dmin, 0)
                    for m in toy1().molds),
    )
    assert mold_pairs_procedure(inst, random.Random(0)) == []


# ── assignment ───────────────────────────────────────────────────────

def test_toy2_assignment_sequential():
    tuples = [AssignmentTuple(1, 0, 1, 10), AssignmentTuple(2, 0, 2, 10)]
    sched = assignment_procedure(toy2(), tuples)
    placed = sorted(sched.tuples, key=lambda t: t.id)
    assert (placed[0].heater, placed[0].start, placed[0].length) == (1, 0, 1)
    assert (placed[1].heater, placed[1].start, placed[1].length) == (1, 1, 1)
    assert schedule_makespan(sched) == 2
    assert validate_schedule(toy2(), sched).ok


def test_assignment_prefers_preloaded_heater():
    inst = variant(toy1_two_heaters(), init={(1, 2): 1})
    sched = assignment_procedure(inst, [AssignmentTuple(1, 0, 1, 7)])
    t = sched.tuples[0]
    assert (t.heater, t.start, t.length) == (2, 0, 1)


def test_assignment_waits_for_mold_copies():
    molds = (
        Mold(id=1, copies=1, setup_dmin=600, removal_dmin=300, demand=10),
        Mold(id=2, copies=2, setup_dmin=600, removal_dmin=300, demand=0),
    )
    inst = variant(toy1_two_heaters(), molds=molds)
    sched = assignment_procedure(
        inst, [AssignmentTuple(1, 0, 1, 5), AssignmentTuple(2, 0, 1, 5)]
    )
    placed = sorted(sched.tuples, key=lambda t: t.id)
    assert (placed[0].heater, placed[0].start) == (1, 0)
    # the single copy frees at period 1; staying on heater 1 avoids a setup
    assert (placed[1].heater, placed[1].start) == (1, 1)
    assert validate_schedule(inst, sched).ok


def test_assignment_two_heaters_parallel():
    inst = toy1_two_heaters()
    sched = assignment_procedure(
        inst, [AssignmentTuple(1, 1, 2, 5), AssignmentTuple(2, 1, 2, 5)]
    )
    assert schedule_makespan(sched) == 1
    assert {t.heater for t in sched.tuples} == {1, 2}


def test_assignment_is_deterministic():
    inst = toy1()
    tuples = [AssignmentTuple(1, 1, 2, 5), AssignmentTuple(2, 1, 2, 5)]
    a = assignment_procedure(inst, tuples)
    b = assignment_procedure(inst, tuples)
    assert [(t.id, t.heater, t.start, t.length) for t in a.tuples] == \
           [(t.id, t.heater, t.start, t.length) for t in b.tuples]


# ── improvement ──────────────────────────────────────────────────────

def test_improvement_splits_identical_pair_across_heaters():
    inst = single_mold_big(copies=4, heaters=2)
    initial = assignment_procedure(inst, [AssignmentTuple(1, 1, 1, 500)])
    assert schedule_makespan(initial) == 20
    improved = improvement_procedure(inst, initial)
    assert schedule_makespan(improved) == 10
    assert validate_schedule(inst, improved).ok


def test_improvement_shaves_overproduction():
    inst = variant(
        toy1(),
        molds=(Mold(id=1, copies=2, setup_dmin=606, removal_dmin=449, demand=9),),
        curing={(1, 1): 1440},
        mold_compat=((1, 1),),
    )
    initial = assignment_procedure(inst, [AssignmentTuple(1, 0, 1, 12)])
    assert schedule_makespan(initial) == 2
    improved = improvement_procedure(inst, initial)
    assert schedule_makespan(improved) == 1
    assert [t.q for t in improved.tuples] == [9]


def test_improvement_keeps_toy1_at_two_periods():
    inst = toy1()
    initial = assignment_procedure(
        inst, [AssignmentTuple(1, 1, 1, 5), AssignmentTuple(2, 2, 2, 5)]
    )
    assert schedule_makespan(initial) == 2
    improved = improvement_procedure(inst, initial)
    assert schedule_makespan(improved) == 2


def test_improvement_never_degrades_and_stays_feasible():
    for seed in range(12):
        inst = tiny_instance(seed)
        tuples = mold_pairs_procedure(inst, random.Random(seed * 17 + 1))
        initial = assignment_procedure(inst, tuples)
        improved = improvement_procedure(inst, initial)
        assert schedule_makespan(improved) <= schedule_makespan(initial)
        assert validate_schedule(inst, improved).ok


# ── multi-start driver ───────────────────────────────────────────────

def test_run_heuristic_toy1():
    sched = run_heuristic(toy1(), HeuristicConfig(total_iterations=100, seed=0))
    assert schedule_makespan(sched) == 2
    assert validate_schedule(toy1(), sched).ok


def test_run_heuristic_toy2():
    sched = run_heuristic(toy2(), HeuristicConfig(total_iterations=100, seed=0))
    assert schedule_makespan(sched) == 2
    assert validate_schedule(toy2(), sched).ok


def test_run_heuristic_big_mold():
    inst = single_mold_big(copies=4, heaters=2)
    sched = run_heuristic(inst, HeuristicConfig(total_iterations=100, seed=0))
    assert schedule_makespan(sched) == 10


def test_run_heuristic_zero_demand():
    inst = variant(
        toy1(),
        molds=tuple(Mold(m.id, m.copies, m.setup_dmin, m.removal_dmin, 0)
                    for m in toy1().molds),
    )
    sched = run_heuristic(inst, HeuristicConfig(total_iterations=10, seed=0))
    assert sched.tuples == []
    assert not sched.sentinel
    assert schedule_makespan(sched) == 0


def test_run_heuristic_deterministic():
    inst = tiny_instance(3)
    cfg = HeuristicConfig(total_iterations=50, seed=11)
    a = run_heuristic(inst, cfg)
    b = run_heuristic(inst, cfg)
    key = lambda s: [(t.id, t.m1, t.m2, t.q, t.heater, t.start, t.length) for t in s.tuples]
    assert key(a) == key(b)


def test_run_heuristic_worker_count_does_not_change_result():
    inst = tiny_instance(5)
    a = run_heuristic(inst, HeuristicConfig(total_iterations=40, seed=2, worker_count=1))
    b = run_heuristic(inst, HeuristicConfig(total_iterations=40, seed=2, worker_count=4))
    key = lambda s: [(t.id, t.m1, t.m2, t.q, t.heater, t.start, t.length) for t in s.tuples]
    assert key(a) == key(b)


def test_run_heuristic_tiny_instances_feasible():
    for seed in range(15):
        inst = tiny_instance(100 + seed)
        sched = run_heuristic(inst, HeuristicConfig(total_iterations=30, seed=seed))
        report = validate_schedule(inst, sched)
        assert report.ok, f"seed {seed}: {report.violations}"
