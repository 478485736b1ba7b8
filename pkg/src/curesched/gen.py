"""Random instance generator over three size scenarios.

Each scenario fixes a demand range, per-mold demand baselines, a
mold-copy policy, and shared timing pools; an instance is then a
deterministic function of (scenario spec, seed).  Mold and heater counts
are drawn per instance from {5, 7} and {7, 12} and recorded in the
instance metadata.  Compatibility follows a fixed group template: molds
1..5 pair among themselves and cure in heaters 1..7, molds 6..7 pair
together and cure in heaters 8..10, molds 8..9 in heaters 11..12.  A
7-mold draw therefore forces the 12-heater layout, since the smaller
plant has no heater that could cure molds 6 and 7 at all.

Demands are drawn uniformly within ±20% of the mold's baseline, rounded,
and clamped to the scenario range.  The default baselines are spread
log-uniformly so the ±20% band itself stays inside the range.
"""

import random
from dataclasses import dataclass

from .domain import Instance, Mold, Part, validate_instance

__all__ = ["SCENARIOS", "ScenarioSpec", "generate_instance"]

_MOLD_GROUPS = ((1, 2, 3, 4, 5), (6, 7), (8, 9))
_HEATER_GROUPS = ((1, 2, 3, 4, 5, 6, 7), (8, 9, 10), (11, 12))

_NAME_PREFIX = {"small": "S", "medium": "M", "large": "L"}


def _log_spaced(lo: int, hi: int, n: int = 7) -> tuple:
    """n integers spread log-uniformly from lo to hi inclusive."""
    return tuple(round(lo * (hi / lo) ** (i / (n - 1))) for i in range(n))


@dataclass(frozen=True)
class ScenarioSpec:
    """Everything the generator needs to build one instance family."""

    size: str
    demand_baselines: tuple
    demand_range: tuple
    mold_counts: tuple = (5, 7)
    heater_counts: tuple = (7, 12)
    nm_choices: tuple = (1,)
    setup_pool: tuple = (416, 606, 668)
    removal_pool: tuple = (252, 449, 622)
    curing_pool: tuple = (125, 180, 260, 300, 400, 420, 530, 550)
    period_dmin: int = 14400
    mold_groups: tuple = _MOLD_GROUPS
    heater_groups: tuple = _HEATER_GROUPS
    include_part2: bool = False
    part2_units: int = 2

    def __post_init__(self):
        lo, hi = self.demand_range
        if lo > hi or lo < 0:
            raise ValueError(f"bad demand range {self.demand_range}")
        if len(self.demand_baselines) < max(self.mold_counts):
            raise ValueError("need one demand baseline per possible mold")
        if any(b <= 0 for b in self.demand_baselines):
            raise ValueError("demand baselines must be positive")
        for pool in (self.setup_pool, self.removal_pool, self.curing_pool,
                     self.nm_choices, self.mold_counts, self.heater_counts):
            if not pool:
                raise ValueError("spec pools must be non-empty")
        if self.period_dmin <= 0:
            raise ValueError("period_dmin must be positive")
        if self.part2_units <= 0:
            raise ValueError("part2_units must be positive")
        if len(self.mold_groups) != len(self.heater_groups):
            raise ValueError("mold and heater group templates must align")


SCENARIOS = {
    "small": ScenarioSpec(
        size="small",
        demand_baselines=_log_spaced(28, 495),
        demand_range=(22, 595),
        nm_choices=(1,),
    ),
    "medium": ScenarioSpec(
        size="medium",
        demand_baselines=_log_spaced(139, 2510),
        demand_range=(111, 3012),
        nm_choices=(2,),
    ),
    "large": ScenarioSpec(
        size="large",
        demand_baselines=_log_spaced(2024, 5955),
        demand_range=(1619, 7147),
        nm_choices=(2, 10, 15),
        include_part2=True,
    ),
}


def _heater_count_covers(spec: ScenarioSpec, n_molds: int, n_heaters: int) -> bool:
    """True when every mold group in play has at least one heater."""
    for group, heaters in zip(spec.mold_groups, spec.heater_groups):
        if any(m <= n_molds for m in group):
            if not any(k <= n_heaters for k in heaters):
                return False
    return True


def generate_instance(spec: ScenarioSpec, seed: int) -> Instance:
    """One admissible instance, a pure function of (spec, seed).

    Draw order is fixed: mold count, heater count, then per mold its copy
    count, setup, removal and demand, then curing times in (group, mold,
    heater) order.
    """
    rng = random.Random(seed)
    n_molds = rng.choice(spec.mold_counts)
    heater_choices = [h for h in spec.heater_counts
                      if _heater_count_covers(spec, n_molds, h)]
    if not heater_choices:
        raise ValueError(
            f"no heater count in {spec.heater_counts} covers {n_molds} molds")
    n_heaters = rng.choice(heater_choices)

    lo, hi = spec.demand_range
    molds = []
    for m in range(1, n_molds + 1):
        copies = rng.choice(spec.nm_choices)
        setup = rng.choice(spec.setup_pool)
        removal = rng.choice(spec.removal_pool)
        baseline = spec.demand_baselines[m - 1]
        demand = min(hi, max(lo, round(rng.uniform(0.8 * baseline,
                                                   1.2 * baseline))))
        molds.append(Mold(id=m, copies=copies, setup_dmin=setup,
                          removal_dmin=removal, demand=demand))

    heaters = tuple(range(1, n_heaters + 1))
    curing = {}
    compat = set()
    for group, group_heaters in zip(spec.mold_groups, spec.heater_groups):
        members = [m for m in group if m <= n_molds]
        for m in members:
            for k in group_heaters:
                if k <= n_heaters:
                    curing[(m, k)] = rng.choice(spec.curing_pool)
        for a in members:
            for b in members:
                if a <= b:
                    compat.add((a, b))

    parts = [Part(id=1, units=1, molds=frozenset({1, 2}))]
    meta = {
        "scenario": spec.size,
        "seed": seed,
        "n_molds": n_molds,
        "n_heaters": n_heaters,
    }
    if spec.include_part2:
        parts.append(Part(id=2, units=spec.part2_units,
                          molds=frozenset({3, 4})))
        meta["part2_units"] = spec.part2_units

    prefix = _NAME_PREFIX.get(spec.size, spec.size[:1].upper())
    inst = Instance(
        name=f"{prefix}{seed:02d}",
        period_dmin=spec.period_dmin,
        molds=tuple(molds),
        heaters=heaters,
        curing=curing,
        mold_compat=tuple(sorted(compat)),
        parts=tuple(parts),
        meta=meta,
    )
    report = validate_instance(inst)
    if not report.ok:
        raise ValueError("generated instance failed validation: "
                         + "; ".join(report.violations))
    return inst
