"""Shared fixtures and independent oracles for the test suite.

The toy instances are rebuilt here programmatically instead of loading the
shipped JSON fixtures, so the data files themselves are covered by a separate
equality test. The exhaustive oracles below are deliberately primitive: plain
bounded search with no bound pruning and no dominance reasoning, so they share
no logic with the branch-and-bound solver they are checking.
"""

import random
from itertools import product

from curesched.domain import (
    Instance,
    Mold,
    Part,
    PARTS_GLOBAL,
    PARTS_PER_HEATER,
    transition_work,
)

PHI = 14400  # one day in deciminutes


def toy1() -> Instance:
    """Two molds (2 copies each), one heater, no parts."""
    return Instance(
        name="toy1",
        period_dmin=PHI,
        molds=(
            Mold(id=1, copies=2, setup_dmin=600, removal_dmin=300, demand=10),
            Mold(id=2, copies=2, setup_dmin=600, removal_dmin=300, demand=10),
        ),
        heaters=(1,),
        curing={(1, 1): 400, (2, 1): 400},
        mold_compat=((1, 1), (1, 2), (2, 2)),
        parts=(),
        init={},
    )


def toy2() -> Instance:
    """Like toy1 but single copies and a shared part blocking co-curing."""
    return Instance(
        name="toy2",
        period_dmin=PHI,
        molds=(
            Mold(id=1, copies=1, setup_dmin=600, removal_dmin=300, demand=10),
            Mold(id=2, copies=1, setup_dmin=600, removal_dmin=300, demand=10),
        ),
        heaters=(1,),
        curing={(1, 1): 400, (2, 1): 400},
        mold_compat=((1, 1), (1, 2), (2, 2)),
        parts=(Part(id=1, units=1, molds=frozenset({1, 2})),),
        init={},
    )


def variant(inst: Instance, **changes) -> Instance:
    """Rebuild an instance with selected fields replaced."""
    fields = dict(
        name=inst.name,
        period_dmin=inst.period_dmin,
        molds=inst.molds,
        heaters=inst.heaters,
        curing=dict(inst.curing),
        mold_compat=tuple(sorted(inst.mold_compat)),
        parts=inst.parts,
        init=dict(inst.init),
    )
    fields.update(changes)
    return Instance(**fields)


def toy1_two_heaters() -> Instance:
    inst = toy1()
    curing = dict(inst.curing)
    curing[(1, 2)] = 400
    curing[(2, 2)] = 400
    return variant(inst, name="toy1h2", heaters=(1, 2), curing=curing)


def single_mold_big(copies: int = 4, heaters: int = 2) -> Instance:
    """One demanded mold sized so the baseline horizon is visibly loose.

    copies=4 lets the identical-pair split run on two heaters in parallel,
    halving the single-tuple makespan.
    """
    hs = tuple(range(1, heaters + 1))
    return Instance(
        name="bigmold",
        period_dmin=PHI,
        molds=(Mold(id=1, copies=copies, setup_dmin=606, removal_dmin=449, demand=1000),),
        heaters=hs,
        curing={(1, h): 550 for h in hs},
        mold_compat=((1, 1),),
        parts=(),
        init={},
    )


# ── random tiny instances ────────────────────────────────────────────

TINY_TV_POOL = (2400, 2880, 3600, 4800, 7200)  # per-period rates 6,5,4,3,2


def tiny_instance(seed: int) -> Instance:
    """Random admissible instance with |M| <= 3, |H| <= 2, demand <= 30."""
    rng = random.Random(seed)
    while True:
        n_molds = rng.randint(1, 3)
        n_heaters = rng.randint(1, 2)
        mold_ids = list(range(1, n_molds + 1))
        heater_ids = tuple(range(1, n_heaters + 1))

        budget = 30
        molds = []
        for m in mold_ids:
            dm = rng.randint(0, min(12, budget))
            budget -= dm
            molds.append(
                Mold(
                    id=m,
                    copies=rng.randint(1, 3),
                    setup_dmin=rng.randint(400, 1500),
                    removal_dmin=rng.randint(200, 900),
                    demand=dm,
                )
            )

        curing = {}
        for m in mold_ids:
            hs = [h for h in heater_ids if rng.random() < 0.8]
            if not hs:
                hs = [rng.choice(heater_ids)]
            for h in hs:
                curing[(m, h)] = rng.choice(TINY_TV_POOL)

        compat = {(m, m) for m in mold_ids}
        for i, j in product(mold_ids, mold_ids):
            if i < j and rng.random() < 0.7:
                compat.add((i, j))

        parts = ()
        if rng.random() < 0.3 and n_molds >= 1:
            members = frozenset(rng.sample(mold_ids, rng.randint(1, n_molds)))
            parts = (Part(id=1, units=rng.randint(1, 2), molds=members),)

        init = {}
        if rng.random() < 0.2:
            h = rng.choice(heater_ids)
            m = rng.choice(mold_ids)
            if (m, h) in curing:
                init[(m, h)] = 1

        inst = Instance(
            name=f"tiny{seed}",
            period_dmin=PHI,
            molds=tuple(molds),
            heaters=heater_ids,
            curing=curing,
            mold_compat=tuple(sorted(compat)),
            parts=parts,
            init=init,
        )
        from curesched.domain import validate_instance

        if not validate_instance(inst).violations and any(m.demand for m in molds):
            return inst


# ── exhaustive oracles ───────────────────────────────────────────────


def _heater_options(inst, pairs_by_heater, residents, heater, used, part_used, parts_mode):
    """Config choices for one heater given current residents and usage.

    Yields (molds_multiset, production_per_slot_unit, pair) plus the idle
    choice. Production is at per-period capacity.
    """
    phi = inst.period_dmin
    options = []
    removal = sum(inst.mold_by_id[m].removal_dmin * c for m, c in residents.items())
    if removal <= phi:
        options.append((None, {}, 0))
    for i, j in sorted(pairs_by_heater.get(heater, ())):
        ms = {}
        if i:
            ms[i] = ms.get(i, 0) + 1
        ms[j] = ms.get(j, 0) + 1
        ok = True
        for m, c in ms.items():
            if used.get(m, 0) + c > inst.mold_by_id[m].copies:
                ok = False
        if not ok:
            continue
        usage = {}
        for part in inst.parts:
            c = sum(cc for m, cc in ms.items() if m in part.molds)
            if c:
                usage[part.id] = c
        if parts_mode == PARTS_PER_HEATER:
            if any(c > inst.part_by_id[q].units for q, c in usage.items()):
                continue
        else:
            if any(part_used.get(q, 0) + c > inst.part_by_id[q].units for q, c in usage.items()):
                continue
        setups, removals = transition_work(inst, residents, ms)
        if setups + removals > phi:
            continue
        max_tv = max(inst.curing[(m, heater)] for m in ms)
        cap = (phi - setups - removals) // max_tv
        options.append(((i, j), ms, cap))
    return options


def _joint_configs(inst, pairs_by_heater, residents_by_heater, parts_mode):
    """All joint per-period configurations across heaters."""

    heaters = list(inst.heaters)

    def rec(idx, used, part_used, acc):
        if idx == len(heaters):
            yield list(acc)
            return
        h = heaters[idx]
        for pair, ms, cap in _heater_options(
            inst, pairs_by_heater, residents_by_heater[h], h, used, part_used, parts_mode
        ):
            new_used = dict(used)
            for m, c in ms.items():
                new_used[m] = new_used.get(m, 0) + c
            new_part = dict(part_used)
            for part in inst.parts:
                c = sum(cc for m, cc in ms.items() if m in part.molds)
                if c:
                    new_part[part.id] = new_part.get(part.id, 0) + c
            acc.append((h, pair, ms, cap))
            yield from rec(idx + 1, new_used, new_part, acc)
            acc.pop()

    yield from rec(0, {}, {}, [])


def brute_force_optimum(inst, horizon, parts_mode=PARTS_PER_HEATER):
    """Smallest feasible makespan within `horizon`, or None.

    Plain iterative-deepening search over per-period heater configurations,
    producing at capacity. Memoised only on exact (state, budget) pairs.
    """
    from curesched.domain import derive_aux_sets

    aux = derive_aux_sets(inst)
    pairs_by_heater = aux.pairs_by_heater
    demanded = sorted(m.id for m in inst.molds if m.demand > 0)
    init_residents = {h: {} for h in inst.heaters}
    for (m, h), c in inst.init.items():
        if c:
            init_residents[h][m] = init_residents[h].get(m, 0) + c

    def freeze(residual, residents):
        return (
            tuple(residual[m] for m in demanded),
            tuple(tuple(sorted(residents[h].items())) for h in inst.heaters),
        )

    memo = {}

    def feasible(residual, residents, budget):
        if all(residual[m] <= 0 for m in demanded):
            return True
        if budget == 0:
            return False
        key = (freeze(residual, residents), budget)
        if key in memo:
            return memo[key]
        out = False
        for joint in _joint_configs(inst, pairs_by_heater, residents, parts_mode):
            new_res = dict(residual)
            new_residents = {}
            for h, pair, ms, cap in joint:
                new_residents[h] = ms
                if pair is not None:
                    i, j = pair
                    if i:
                        new_res[i] = max(0, new_res[i] - cap)
                    new_res[j] = max(0, new_res[j] - cap)
            if feasible(new_res, new_residents, budget - 1):
                out = True
                break
        memo[key] = out
        return out

    residual = {m.id: m.demand for m in inst.molds}
    for b in range(horizon + 1):
        if feasible(residual, init_residents, b):
            return b
    return None


def brute_force_optimum_all_levels(inst, horizon, parts_mode=PARTS_PER_HEATER):
    """Like brute_force_optimum but enumerating every production level 0..cap.

    Exponential; only usable on micro instances. Exists to check that fixing
    production at capacity loses nothing.
    """
    from curesched.domain import derive_aux_sets

    aux = derive_aux_sets(inst)
    pairs_by_heater = aux.pairs_by_heater
    demanded = sorted(m.id for m in inst.molds if m.demand > 0)
    init_residents = {h: {} for h in inst.heaters}
    for (m, h), c in inst.init.items():
        if c:
            init_residents[h][m] = init_residents[h].get(m, 0) + c

    def freeze(residual, residents):
        return (
            tuple(residual[m] for m in demanded),
            tuple(tuple(sorted(residents[h].items())) for h in inst.heaters),
        )

    memo = {}

    def feasible(residual, residents, budget):
        if all(residual[m] <= 0 for m in demanded):
            return True
        if budget == 0:
            return False
        key = (freeze(residual, residents), budget)
        if key in memo:
            return memo[key]
        out = False
        for joint in _joint_configs(inst, pairs_by_heater, residents, parts_mode):
            level_axes = []
            for h, pair, ms, cap in joint:
                if pair is None:
                    level_axes.append([0])
                else:
                    level_axes.append(range(cap + 1))
            for levels in product(*level_axes):
                new_res = dict(residual)
                new_residents = {}
                for (h, pair, ms, cap), u in zip(joint, levels):
                    new_residents[h] = ms
                    if pair is not None:
                        i, j = pair
                        if i:
                            new_res[i] = max(0, new_res[i] - u)
                        new_res[j] = max(0, new_res[j] - u)
                if feasible(new_res, new_residents, budget - 1):
                    out = True
                    break
            if out:
                break
        memo[key] = out
        return out

    residual = {m.id: m.demand for m in inst.molds}
    for b in range(horizon + 1):
        if feasible(residual, init_residents, b):
            return b
    return None
