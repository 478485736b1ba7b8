"""Closed-form planning-horizon bound.

The model needs an a-priori number of periods (THB) large enough that an
optimal schedule fits. The bound charges every demanded mold with a serial,
worst-heater production plan and sums the periods: molds that own at least
two copies and need no scarce part may run as an identical pair (double rate,
double changeover allowance); everything else runs one copy at a time. The
sum of per-mold ceilings is a valid horizon because the mold blocks can
simply be lined up one after another on any single compatible heater.
"""

from dataclasses import dataclass

from .domain import Instance, ceil_div, slot_rate


@dataclass(frozen=True)
class MoldPartition:
    """Demanded molds split by how their horizon share is charged.

    pooled : >= 2 copies and no part required; charged at identical-pair rate
    serial : single copy or at least one part required; charged one copy at a time
    """

    pooled: frozenset
    serial: frozenset


def partition_molds(inst: Instance) -> MoldPartition:
    pooled = set()
    serial = set()
    for m in inst.molds:
        if m.demand <= 0:
            continue
        if m.copies >= 2 and not inst.parts_of.get(m.id):
            pooled.add(m.id)
        else:
            serial.add(m.id)
    return MoldPartition(pooled=frozenset(pooled), serial=frozenset(serial))


def compute_thb(inst: Instance) -> int:
    """Periods sufficient to cover all demand; 0 when nothing is demanded."""
    part = partition_molds(inst)
    phi = inst.period_dmin
    total = 0
    for m in inst.molds:
        if m.demand <= 0:
            continue
        tv = max(inst.curing[(m.id, h)] for h in inst.compat_heaters[m.id])
        rate = slot_rate(phi, tv)
        setup_units = ceil_div(m.setup_dmin, tv)
        removal_units = ceil_div(m.removal_dmin, tv)
        if m.id in part.pooled:
            total += ceil_div(4 * setup_units + 4 * removal_units + m.demand,
                              2 * rate)
        else:
            total += ceil_div(setup_units + removal_units + m.demand, rate)
    return total
