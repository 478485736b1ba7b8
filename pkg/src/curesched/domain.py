"""Problem data model and the shared feasibility arithmetic.

A plant cures tires in heaters. Each heater holds up to two molds at once
(one "slot" each); both slots cure in lockstep, so a mixed pair advances at
the slower mold's rate. Mounting a mold costs its setup time, taking one out
costs its removal time, and both come out of the period budget of the heater
they happen on. All durations are integer deciminutes and every period has
the same budget (`period_dmin`, 14400 = 24h in the stock data).

The capacity rules in `plan_slot` are the single source of truth used by the
constructive heuristic, the schedule validator, the exact search, and the
encoder that turns schedules into model variable assignments:

  * a tuple placed directly after its heater's previous occupant pays the
    multiset difference (new copies mounted, leaving copies removed) in its
    first period;
  * a tuple placed after an idle gap pays only its own setups, because an
    idle heater cannot hold molds: the previous occupant is taken out during
    the first gap period, which must fit that removal work;
  * every later period of the tuple runs at the full rate
    floor(period / max cure time of the molds on board).
"""

import math
from dataclasses import dataclass, field, replace

MoldId = int
HeaterId = int
Period = int

EMPTY: MoldId = 0

PARTS_PER_HEATER = "per-heater"
PARTS_GLOBAL = "global"
PARTS_MODES = (PARTS_PER_HEATER, PARTS_GLOBAL)


@dataclass(frozen=True)
class Mold:
    """One mold type: interchangeable physical copies and their timings."""

    id: MoldId
    copies: int         # physical copies available
    setup_dmin: int     # time to mount one copy in a heater
    removal_dmin: int   # time to take one copy out
    demand: int         # tires to cure


@dataclass(frozen=True)
class Part:
    """A scarce accessory needed by every copy of the molds listed."""

    id: int
    units: int
    molds: frozenset


class Instance:
    """Immutable problem instance.

    `curing` maps compatible (mold, heater) pairs to the cure time of one
    tire; absence means the pair is incompatible. `mold_compat` lists the
    unordered mold pairs allowed to share a heater, (m, m) meaning two copies
    of m may run together. `init` maps (mold, heater) to copies already
    mounted before the first period.
    """

    def __init__(self, name, period_dmin, molds, heaters, curing,
                 mold_compat, parts=(), init=None, meta=None):
        self.name = name
        self.period_dmin = int(period_dmin)
        self.molds = tuple(sorted(molds, key=lambda m: m.id))
        self.heaters = tuple(sorted(set(heaters)))
        self.curing = {(int(m), int(h)): int(tv) for (m, h), tv in dict(curing).items()}
        self.mold_compat = frozenset(
            (min(i, j), max(i, j)) for i, j in mold_compat
        )
        self.parts = tuple(sorted(parts, key=lambda p: p.id))
        self.init = {k: int(c) for k, c in (init or {}).items() if int(c) > 0}
        self.meta = dict(meta or {})

        self.mold_by_id = {m.id: m for m in self.molds}
        self.part_by_id = {p.id: p for p in self.parts}
        self.mold_ids = tuple(m.id for m in self.molds)
        self.compat_heaters = {
            m.id: tuple(h for h in self.heaters if (m.id, h) in self.curing)
            for m in self.molds
        }
        self.parts_of = {
            m.id: tuple(p.id for p in self.parts if m.id in p.molds)
            for m in self.molds
        }

    def __repr__(self):
        return (f"Instance({self.name!r}, molds={len(self.molds)}, "
                f"heaters={len(self.heaters)}, demand={self.total_demand})")

    @property
    def total_demand(self):
        return sum(m.demand for m in self.molds)


@dataclass(frozen=True)
class AuxSets:
    """Index sets derived from compatibility data.

    triples        : (i, j, k) with i <= j, molds i,j allowed together and
                     both compatible with heater k
    triples_ext    : triples plus (0, j, k) for every compatible (j, k),
                     0 being the empty slot
    triples_by_first : mold -> {(j, k)} where the mold fills the first slot
    ext_by_second  : mold -> {(j, k)} where the mold fills the second slot
                     (j may be 0 or the mold itself)
    pairs_by_heater: heater -> {(i, j)} runnable on it, empty slot included
    molds_by_part  : part -> molds requiring it
    """

    triples: frozenset
    triples_ext: frozenset
    triples_by_first: dict
    ext_by_second: dict
    pairs_by_heater: dict
    molds_by_part: dict


def derive_aux_sets(inst: Instance) -> AuxSets:
    """Build all derived index sets; deterministic and side-effect free."""
    triples = frozenset(
        (i, j, k)
        for (i, j) in inst.mold_compat
        for k in inst.heaters
        if (i, k) in inst.curing and (j, k) in inst.curing
    )
    ext = triples | frozenset((EMPTY, j, k) for (j, k) in inst.curing)
    triples_by_first = {
        m: frozenset((j, k) for (i, j, k) in triples if i == m)
        for m in inst.mold_ids
    }
    ext_by_second = {
        m: frozenset((i, k) for (i, j, k) in ext if j == m)
        for m in inst.mold_ids
    }
    pairs_by_heater = {
        h: frozenset((i, j) for (i, j, k) in ext if k == h)
        for h in inst.heaters
    }
    molds_by_part = {p.id: frozenset(p.molds) for p in inst.parts}
    return AuxSets(
        triples=triples,
        triples_ext=ext,
        triples_by_first=triples_by_first,
        ext_by_second=ext_by_second,
        pairs_by_heater=pairs_by_heater,
        molds_by_part=molds_by_part,
    )


# ── schedules ────────────────────────────────────────────────────────


@dataclass
class AssignmentTuple:
    """A batch: mold pair, quantity per slot, and its placement.

    m1 may be 0 (empty slot). An identical pair (m, m) cures 2q tires of m;
    a mixed pair cures q of each mold; a single mold cures q. Placement
    fields stay None until the assignment step fills them. `start` counts
    periods from 0.
    """

    id: int
    m1: MoldId
    m2: MoldId
    q: int
    heater: HeaterId | None = None
    start: Period | None = None
    length: int | None = None

    def __post_init__(self):
        if self.m1 > self.m2:
            self.m1, self.m2 = self.m2, self.m1

    @property
    def assigned(self) -> bool:
        return self.heater is not None and self.start is not None and self.length is not None

    def mold_counts(self) -> dict:
        counts = {}
        for m in (self.m1, self.m2):
            if m != EMPTY:
                counts[m] = counts.get(m, 0) + 1
        return counts

    def production(self) -> dict:
        """Tires cured per mold."""
        return {m: c * self.q for m, c in self.mold_counts().items()}


@dataclass
class Schedule:
    """A set of placed tuples. `sentinel` marks the pre-search placeholder
    candidate that compares worse than any real schedule."""

    tuples: list
    sentinel: bool = False

    @classmethod
    def empty_candidate(cls) -> "Schedule":
        return cls(tuples=[], sentinel=True)


def schedule_makespan(schedule: Schedule):
    """Last busy period count; 0 for a real empty schedule, +inf for the
    sentinel candidate."""
    if schedule.sentinel:
        return math.inf
    return max((t.start + t.length for t in schedule.tuples), default=0)


# ── capacity arithmetic (shared by all solver modes) ─────────────────


def slot_rate(period_dmin: int, cure_dmin: int) -> int:
    """Tires one slot delivers in an undisturbed period."""
    return period_dmin // cure_dmin


def ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def transition_work(inst: Instance, before, after):
    """(setup, removal) deciminutes to re-equip a heater from multiset
    `before` to multiset `after`."""
    setups = 0
    removals = 0
    for m in set(before) | set(after):
        diff = after.get(m, 0) - before.get(m, 0)
        if diff > 0:
            setups += diff * inst.mold_by_id[m].setup_dmin
        elif diff < 0:
            removals += (-diff) * inst.mold_by_id[m].removal_dmin
    return setups, removals


@dataclass(frozen=True)
class SlotPlan:
    """First-period budget accounting for one tuple on one heater."""

    start: Period
    length: int
    cap_first: int
    cap_int: int
    deduction: int
    problems: tuple = ()


def plan_slot(inst: Instance, heater: HeaterId, residents, prev_end: Period,
              start: Period, molds, quantity: int) -> SlotPlan:
    """Work out feasible per-period output for a tuple.

    `residents` is the mold multiset left by the heater's previous occupant
    (or its initial loading), `prev_end` that occupant's end period. The
    caller guarantees start >= prev_end.
    """
    phi = inst.period_dmin
    problems = []
    if start > prev_end:
        # the old molds leave during the first idle period
        _, gap_removal = transition_work(inst, residents, {})
        if gap_removal > phi:
            problems.append(
                f"removal work {gap_removal} in the gap at period {prev_end} "
                f"exceeds the period budget {phi}"
            )
        setups, _ = transition_work(inst, {}, molds)
        deduction = setups
    else:
        setups, removals = transition_work(inst, residents, molds)
        deduction = setups + removals
    if deduction > phi:
        problems.append(
            f"changeover work {deduction} at period {start} exceeds "
            f"the period budget {phi}"
        )
    max_tv = max(inst.curing[(m, heater)] for m in molds) if molds else phi
    cap_first = max((phi - deduction) // max_tv, 0)
    cap_int = slot_rate(phi, max_tv)
    if quantity <= cap_first:
        length = 1
    elif cap_int <= 0:
        problems.append(f"cure time exceeds the period budget on heater {heater}")
        length = 1
    else:
        length = 1 + ceil_div(quantity - cap_first, cap_int)
    return SlotPlan(start=start, length=length, cap_first=cap_first,
                    cap_int=cap_int, deduction=deduction,
                    problems=tuple(problems))


# ── validation ───────────────────────────────────────────────────────


@dataclass
class ValidationReport:
    """Instance admissibility findings; empty means admissible."""

    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations


@dataclass
class FeasibilityReport:
    """Schedule feasibility findings; empty means feasible."""

    violations: list

    @property
    def ok(self) -> bool:
        return not self.violations


def validate_instance(inst: Instance) -> ValidationReport:
    """Check every instance invariant; returns all violations found."""
    v = []
    if inst.period_dmin <= 0:
        v.append("period budget must be positive")

    seen = set()
    for m in inst.molds:
        if m.id in seen:
            v.append(f"duplicate mold id {m.id}")
        seen.add(m.id)
        if m.id <= 0:
            v.append(f"mold id {m.id} must be positive (0 is the empty slot)")
        if m.copies < 0:
            v.append(f"mold {m.id} copy count must be non-negative")
        if m.setup_dmin <= 0:
            v.append(f"mold {m.id} setup time must be positive")
        if m.removal_dmin <= 0:
            v.append(f"mold {m.id} removal time must be positive")
        if m.demand < 0:
            v.append(f"mold {m.id} demand must be non-negative")

    heater_set = set(inst.heaters)
    for (m, h), tv in sorted(inst.curing.items()):
        if m not in inst.mold_by_id:
            v.append(f"curing entry references unknown mold {m}")
            continue
        if h not in heater_set:
            v.append(f"curing entry references unknown heater {h}")
        if tv <= 0:
            v.append(f"cure time for mold {m} in heater {h} must be positive")
        elif tv > inst.period_dmin:
            v.append(
                f"cure time {tv} for mold {m} in heater {h} exceeds the period"
            )

    for i, j in sorted(inst.mold_compat):
        for m in {i, j}:
            if m not in inst.mold_by_id:
                v.append(f"mold_compat pair ({i}, {j}) references unknown mold {m}")

    part_seen = set()
    for p in inst.parts:
        if p.id in part_seen:
            v.append(f"duplicate part id {p.id}")
        part_seen.add(p.id)
        if p.units < 0:
            v.append(f"part {p.id} unit count must be non-negative")
        for m in sorted(p.molds):
            if m not in inst.mold_by_id:
                v.append(f"part {p.id} references unknown mold {m}")

    for (m, h), c in sorted(inst.init.items()):
        if m not in inst.mold_by_id:
            v.append(f"init references unknown mold {m}")
        if h not in heater_set:
            v.append(f"init references unknown heater {h}")
        if c not in (1, 2):
            v.append(f"init count {c} for mold {m} in heater {h} must be 1 or 2")
    for h in sorted(heater_set):
        load = sum(c for (m, hh), c in inst.init.items() if hh == h)
        if load > 2:
            v.append(f"init load on heater {h} exceeds two slots")

    # every demanded mold must be producible by at least the single-mold route
    for m in inst.molds:
        if m.demand <= 0:
            continue
        if m.copies < 1:
            v.append(f"demanded mold {m.id} has no copies")
        if m.id in inst.mold_by_id and not inst.compat_heaters.get(m.id):
            v.append(f"demanded mold {m.id} has no compatible heater")
        if m.setup_dmin > inst.period_dmin:
            v.append(f"demanded mold {m.id} setup time exceeds the period")
        if m.removal_dmin > inst.period_dmin:
            v.append(f"demanded mold {m.id} removal time exceeds the period")
        for pid in inst.parts_of.get(m.id, ()):
            if inst.part_by_id[pid].units < 1:
                v.append(f"demanded mold {m.id} requires part {pid} with zero units")

    return ValidationReport(violations=v)


def _part_usage(inst: Instance, counts) -> dict:
    """Part units tied down by a mold multiset."""
    usage = {}
    for p in inst.parts:
        u = sum(c for m, c in counts.items() if m in p.molds)
        if u:
            usage[p.id] = u
    return usage


def validate_schedule(inst: Instance, schedule: Schedule,
                      parts_mode: str = PARTS_PER_HEATER) -> FeasibilityReport:
    """Check a schedule against every feasibility rule of the problem."""
    if parts_mode not in PARTS_MODES:
        raise ValueError(f"unknown parts mode {parts_mode!r}")
    v = []
    if schedule.sentinel:
        return FeasibilityReport(violations=["sentinel candidate, not a schedule"])

    heater_set = set(inst.heaters)
    usable = []
    for t in schedule.tuples:
        bad = False
        if not t.assigned:
            v.append(f"tuple {t.id} is not fully assigned")
            bad = True
        if t.q < 0:
            v.append(f"tuple {t.id} has negative quantity")
            bad = True
        if t.m1 == EMPTY and t.m2 == EMPTY:
            v.append(f"tuple {t.id} holds no mold")
            bad = True
        for m in (t.m1, t.m2):
            if m != EMPTY and m not in inst.mold_by_id:
                v.append(f"tuple {t.id} references unknown mold {m}")
                bad = True
        if t.heater is not None and t.heater not in heater_set:
            v.append(f"tuple {t.id} references unknown heater {t.heater}")
            bad = True
        if bad:
            continue
        if t.start < 0 or t.length < 1:
            v.append(f"tuple {t.id} has an invalid placement window")
            continue
        for m in (t.m1, t.m2):
            if m != EMPTY and (m, t.heater) not in inst.curing:
                v.append(f"tuple {t.id}: mold {m} is not compatible with heater {t.heater}")
                bad = True
        if t.m1 != EMPTY and (t.m1, t.m2) not in inst.mold_compat:
            v.append(f"tuple {t.id}: pair ({t.m1}, {t.m2}) is not an allowed mold pair")
            bad = True
        if not bad:
            usable.append(t)

    # heater walks: occupancy, changeover budgets, per-tuple capacity
    for h in inst.heaters:
        on_h = sorted((t for t in usable if t.heater == h),
                      key=lambda t: (t.start, t.id))
        residents = {}
        for (m, hh), c in inst.init.items():
            if hh == h:
                residents[m] = residents.get(m, 0) + c
        prev_end = 0
        for t in on_h:
            if t.start < prev_end:
                v.append(f"tuples overlap on heater {h} at period {t.start}")
                # resync so later tuples still get checked
                prev_end = t.start
            plan = plan_slot(inst, h, residents, prev_end, t.start,
                             t.mold_counts(), t.q)
            for p in plan.problems:
                v.append(f"tuple {t.id} on heater {h}: {p}")
            available = plan.cap_first + (t.length - 1) * plan.cap_int
            if t.q > available:
                v.append(
                    f"tuple {t.id} on heater {h}: capacity {available} over "
                    f"{t.length} period(s) cannot cover quantity {t.q}"
                )
            residents = t.mold_counts()
            prev_end = t.start + t.length

    # per-period mold copies and part units
    horizon = int(schedule_makespan(schedule)) if schedule.tuples else 0
    for t0 in range(horizon):
        counts = {}
        per_heater = {}
        for t in usable:
            if t.start <= t0 < t.start + t.length:
                for m, c in t.mold_counts().items():
                    counts[m] = counts.get(m, 0) + c
                ph = per_heater.setdefault(t.heater, {})
                for m, c in t.mold_counts().items():
                    ph[m] = ph.get(m, 0) + c
        for m, c in sorted(counts.items()):
            if c > inst.mold_by_id[m].copies:
                v.append(
                    f"mold {m} uses {c} copies in period {t0}, "
                    f"only {inst.mold_by_id[m].copies} exist"
                )
        if parts_mode == PARTS_PER_HEATER:
            for h, ph in sorted(per_heater.items()):
                for pid, u in sorted(_part_usage(inst, ph).items()):
                    if u > inst.part_by_id[pid].units:
                        v.append(
                            f"part {pid} needs {u} units on heater {h} in "
                            f"period {t0}, only {inst.part_by_id[pid].units} exist"
                        )
        else:
            for pid, u in sorted(_part_usage(inst, counts).items()):
                if u > inst.part_by_id[pid].units:
                    v.append(
                        f"part {pid} needs {u} units in period {t0}, "
                        f"only {inst.part_by_id[pid].units} exist"
                    )

    # demand coverage
    produced = {m.id: 0 for m in inst.molds}
    for t in usable:
        for m, n in t.production().items():
            produced[m] = produced.get(m, 0) + n
    for m in inst.molds:
        if produced.get(m.id, 0) < m.demand:
            v.append(
                f"mold {m.id} demand {m.demand} not covered "
                f"(produced {produced.get(m.id, 0)})"
            )

    return FeasibilityReport(violations=v)
