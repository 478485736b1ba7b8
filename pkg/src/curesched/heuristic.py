"""Randomized multi-start constructive heuristic.

Each start draws mold pairs at random into batch tuples, places them
greedily on heaters, then tries a local improvement (split big pair tuples,
re-place everything, shave overproduced quantities). The driver runs many
independent starts from per-iteration seeds and keeps the best schedule, so
results are reproducible for a given seed regardless of worker count.
"""

import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

from .domain import (
    EMPTY,
    PARTS_GLOBAL,
    PARTS_PER_HEATER,
    AssignmentTuple,
    Instance,
    Schedule,
    ceil_div,
    derive_aux_sets,
    plan_slot,
    schedule_makespan,
    validate_schedule,
)
from .errors import NoFeasiblePlacement, UnproduciblePair

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15


def _mix64(x: int) -> int:
    """splitmix64 finalizer; decorrelates consecutive integers."""
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def iteration_seed(seed: int, index: int) -> int:
    """Independent per-start RNG seed."""
    return _mix64((seed + (index + 1) * _GOLDEN) & _MASK64)


@dataclass(frozen=True)
class HeuristicConfig:
    total_iterations: int = 100
    seed: int = 0
    worker_count: int = 1
    parts_mode: str = PARTS_PER_HEATER


# ── pairing ──────────────────────────────────────────────────────────


def _tuple_part_need(inst: Instance, counts) -> dict:
    need = {}
    for p in inst.parts:
        u = sum(c for m, c in counts.items() if m in p.molds)
        if u:
            need[p.id] = u
    return need


def _pair_pool(inst: Instance):
    """All drawable (m1, m2) pairs, singles included, 0 = empty slot.

    A pair must fit one heater on its own: enough copies, part units for
    both slots, and the joint setup work inside one period budget.
    """
    aux = derive_aux_sets(inst)
    seen = {(i, j) for (i, j, _k) in aux.triples_ext}
    pool = []
    for i, j in sorted(seen):
        counts = {}
        for m in (i, j):
            if m != EMPTY:
                counts[m] = counts.get(m, 0) + 1
        if any(c > inst.mold_by_id[m].copies for m, c in counts.items()):
            continue
        need = _tuple_part_need(inst, counts)
        if any(u > inst.part_by_id[p].units for p, u in need.items()):
            continue
        setup = sum(inst.mold_by_id[m].setup_dmin * c for m, c in counts.items())
        if setup > inst.period_dmin:
            continue
        pool.append((i, j))
    return pool


def mold_pairs_procedure(inst: Instance, rng) -> list:
    """Draw batch tuples until every demand is covered.

    Batch size per mold is ceil(demand / copies); a draw's quantity is the
    smallest batch size or leftover demand among its molds. An identical
    pair burns demand twice as fast. `rng` only needs a choice() method.
    """
    pool = _pair_pool(inst)
    batch = {
        m.id: ceil_div(m.demand, m.copies)
        for m in inst.molds
        if m.demand > 0 and m.copies > 0
    }
    residual = {m.id: m.demand for m in inst.molds if m.demand > 0}
    tuples = []
    next_id = 0
    while any(r > 0 for r in residual.values()):
        candidates = [
            (i, j)
            for (i, j) in pool
            if all(residual.get(m, 0) > 0 for m in (i, j) if m != EMPTY)
        ]
        if not candidates:
            stuck = sorted(m for m, r in residual.items() if r > 0)
            raise UnproduciblePair(
                f"no admissible mold pair covers remaining demand of molds {stuck}"
            )
        i, j = rng.choice(candidates)
        if i == EMPTY:
            q = min(batch[j], residual[j])
        elif i == j:
            q = min(batch[i], residual[i])
        else:
            q = min(batch[i], batch[j], residual[i], residual[j])
        next_id += 1
        t = AssignmentTuple(id=next_id, m1=i, m2=j, q=q)
        for m, produced in t.production().items():
            residual[m] -= produced
        tuples.append(t)
    return tuples


# ── assignment ───────────────────────────────────────────────────────


def _earliest_clear(intervals, capacity: int, need: int) -> int:
    """First period t such that usage + need fits capacity forever after."""
    if need <= 0:
        return 0
    events = {}
    for s, e, amount in intervals:
        events[s] = events.get(s, 0) + amount
        events[e] = events.get(e, 0) - amount
    level = 0
    clear_after = 0
    times = sorted(events)
    for idx, tm in enumerate(times):
        level += events[tm]
        if level + need > capacity:
            # overloaded from tm to the next event time
            clear_after = times[idx + 1]  # final event always drops to 0
    return clear_after


def assignment_procedure(inst: Instance, tuples,
                         parts_mode: str = PARTS_PER_HEATER) -> Schedule:
    """Place tuples one by one, earliest-start-first.

    Each round recomputes every pending tuple's earliest start (heater free,
    mold copies free, shared part units free in global mode) and places the
    one that can start soonest, ids breaking ties. The heater is the one
    reaching that start with the least changeover work, lowest id last.
    """
    aux = derive_aux_sets(inst)
    heaters_for = {}
    for k in inst.heaters:
        for pair in aux.pairs_by_heater[k]:
            heaters_for.setdefault(pair, []).append(k)

    pending = sorted(
        (replace(t, heater=None, start=None, length=None) for t in tuples),
        key=lambda t: t.id,
    )
    avail = {k: 0 for k in inst.heaters}
    residents = {k: {} for k in inst.heaters}
    for (m, k), c in inst.init.items():
        residents[k][m] = residents[k].get(m, 0) + c
    mold_use = {m.id: [] for m in inst.molds}
    part_use = {p.id: [] for p in inst.parts}
    placed = []

    while pending:
        best_key = None
        best_idx = None
        for idx, t in enumerate(pending):
            ks = heaters_for.get((t.m1, t.m2))
            if not ks:
                raise NoFeasiblePlacement(
                    f"pair ({t.m1}, {t.m2}) fits no heater"
                )
            ready = min(avail[k] for k in ks)
            for m, c in t.mold_counts().items():
                ready = max(
                    ready,
                    _earliest_clear(mold_use[m], inst.mold_by_id[m].copies, c),
                )
            if parts_mode == PARTS_GLOBAL:
                for pid, u in _tuple_part_need(inst, t.mold_counts()).items():
                    ready = max(
                        ready,
                        _earliest_clear(part_use[pid], inst.part_by_id[pid].units, u),
                    )
            key = (ready, t.id)
            if best_key is None or key < best_key:
                best_key, best_idx = key, idx
        t = pending.pop(best_idx)
        ready = best_key[0]

        chosen = None
        for k in heaters_for[(t.m1, t.m2)]:
            base = max(avail[k], ready)
            plan = plan_slot(inst, k, residents[k], avail[k], base,
                             t.mold_counts(), t.q)
            if plan.problems:
                # a one-period gap empties the heater first; retry clean
                plan = plan_slot(inst, k, residents[k], avail[k], base + 1,
                                 t.mold_counts(), t.q)
                if plan.problems:
                    continue
            key = (plan.start, plan.deduction, k)
            if chosen is None or key < chosen[0]:
                chosen = (key, plan)
        if chosen is None:
            raise NoFeasiblePlacement(
                f"tuple {t.id} ({t.m1}, {t.m2}) fits no heater budget"
            )
        (start, _cost, k), plan = chosen
        t = replace(t, heater=k, start=start, length=plan.length)
        placed.append(t)
        avail[k] = start + plan.length
        residents[k] = dict(t.mold_counts())
        for m, c in t.mold_counts().items():
            mold_use[m].append((start, start + plan.length, c))
        if parts_mode == PARTS_GLOBAL:
            for pid, u in _tuple_part_need(inst, t.mold_counts()).items():
                part_use[pid].append((start, start + plan.length, u))

    return Schedule(tuples=sorted(placed, key=lambda t: t.id))


# ── improvement ──────────────────────────────────────────────────────


def _shave_overproduction(inst: Instance, schedule: Schedule) -> Schedule:
    """Trim the last tuple on each heater down to what demand still needs.

    An identical pair loses two tires per quantity step, so its cut is
    halved. Lengths are re-planned after each cut.
    """
    tuples = sorted(schedule.tuples, key=lambda t: t.id)
    produced = {m.id: 0 for m in inst.molds}
    for t in tuples:
        for m, n in t.production().items():
            produced[m] += n

    by_heater = {}
    for t in tuples:
        by_heater.setdefault(t.heater, []).append(t)

    out = {t.id: t for t in tuples}
    for k in sorted(by_heater):
        seq = sorted(by_heater[k], key=lambda t: (t.start, t.id))
        last = seq[-1]
        if last.q <= 1:
            continue
        surplus = min(
            produced[m] - inst.mold_by_id[m].demand
            for m in last.mold_counts()
        )
        if last.m1 != EMPTY and last.m1 == last.m2:
            delta = min(last.q - 1, surplus // 2)
        else:
            delta = min(last.q - 1, surplus)
        if delta <= 0:
            continue
        residents = {}
        for (m, kk), c in inst.init.items():
            if kk == k:
                residents[m] = residents.get(m, 0) + c
        prev_end = 0
        for t in seq[:-1]:
            residents = t.mold_counts()
            prev_end = t.start + t.length
        new_q = last.q - delta
        plan = plan_slot(inst, k, residents, prev_end, last.start,
                         last.mold_counts(), new_q)
        if plan.problems:
            continue
        out[last.id] = replace(last, q=new_q, length=plan.length)
        for m, c in last.mold_counts().items():
            produced[m] -= c * delta
    return Schedule(tuples=sorted(out.values(), key=lambda t: t.id))


def improvement_procedure(inst: Instance, schedule: Schedule,
                          parts_mode: str = PARTS_PER_HEATER) -> Schedule:
    """Split-reassign-shave local search; keeps strictly better schedules.

    Every two-mold tuple splits into two halves (identical pairs into two
    identical pairs, mixed pairs into two singles), everything is placed
    from scratch, and overproduced tails are shaved. The candidate replaces
    the incumbent only when it is feasible and strictly shorter.
    """
    improved = schedule
    while True:
        base = sorted(improved.tuples, key=lambda t: t.id)
        next_id = max((t.id for t in base), default=0)
        split = []
        for t in base:
            if t.m1 != EMPTY:
                q_hi = ceil_div(t.q, 2)
                q_lo = t.q - q_hi
                if t.m1 == t.m2:
                    halves = ((t.m1, t.m2, q_hi), (t.m1, t.m2, q_lo))
                else:
                    halves = ((EMPTY, t.m1, q_hi), (EMPTY, t.m2, q_lo))
                for m1, m2, q in halves:
                    if q >= 1:
                        next_id += 1
                        split.append(AssignmentTuple(id=next_id, m1=m1, m2=m2, q=q))
            else:
                split.append(AssignmentTuple(id=t.id, m1=t.m1, m2=t.m2, q=t.q))
        candidate = assignment_procedure(inst, split, parts_mode)
        candidate = _shave_overproduction(inst, candidate)
        if (schedule_makespan(candidate) < schedule_makespan(improved)
                and validate_schedule(inst, candidate, parts_mode).ok):
            improved = candidate
            continue
        return improved


# ── multi-start driver ───────────────────────────────────────────────


def _single_start(inst: Instance, seed: int, parts_mode: str) -> Schedule:
    rng = random.Random(seed)
    tuples = mold_pairs_procedure(inst, rng)
    sched = assignment_procedure(inst, tuples, parts_mode)
    return improvement_procedure(inst, sched, parts_mode)


def run_heuristic(inst: Instance, config: HeuristicConfig | None = None) -> Schedule:
    """Best schedule over many independent randomized starts."""
    config = config or HeuristicConfig()
    if inst.total_demand == 0:
        return Schedule(tuples=[])
    seeds = [
        iteration_seed(config.seed, i) for i in range(config.total_iterations)
    ]
    if config.worker_count > 1:
        with ThreadPoolExecutor(max_workers=config.worker_count) as pool:
            results = list(
                pool.map(lambda s: _single_start(inst, s, config.parts_mode), seeds)
            )
    else:
        results = [_single_start(inst, s, config.parts_mode) for s in seeds]

    best = Schedule.empty_candidate()
    best_key = (schedule_makespan(best), -1)
    for i, sched in enumerate(results):
        key = (schedule_makespan(sched), i)
        if key < best_key:
            best, best_key = sched, key
    return best
