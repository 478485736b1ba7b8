"""Integer programming model of the curing plan, and its plumbing.

build_model lays out the full variable and constraint system for a fixed
period horizon; every coefficient is an integer deciminute, so the emitted
files carry no floating point. The same model object also serves as the
codec between schedules and variable assignments: check_assignment evaluates
every row, extract_schedule decodes solver output into tuples, and
schedule_to_assignment encodes a schedule for cross-checking.
"""

from dataclasses import dataclass

from .domain import (
    EMPTY,
    PARTS_GLOBAL,
    PARTS_MODES,
    PARTS_PER_HEATER,
    AssignmentTuple,
    FeasibilityReport,
    Instance,
    Schedule,
    derive_aux_sets,
    plan_slot,
    schedule_makespan,
    slot_rate,
)
from .errors import InfeasibleAssignment
from .lpformat import fold, term_units


@dataclass(frozen=True)
class Constraint:
    name: str
    tag: str        # family tag written into the LP comment line
    label: str
    terms: tuple    # ((coef, var), ...)
    sense: str      # <=, >=, =
    rhs: int


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str       # "binary" | "general"
    lo: int = 0
    hi: int | None = None


class MilpModel:
    """Immutable symbolic model plus the index maps used for en/decoding."""

    def __init__(self, inst, thb, parts_mode, aux, objective, constraints,
                 variables, x, y, yp, z, w, u, prd):
        self.inst = inst
        self.thb = thb
        self.parts_mode = parts_mode
        self.aux = aux
        self.objective = objective
        self.constraints = constraints
        self.variables = variables
        self.x = x          # (mold, heater, period 0..thb) -> name
        self.y = y          # (mold, heater, period)        -> name
        self.yp = yp
        self.z = z          # (m1, m2, heater, period)      -> name
        self.w = w          # period -> name
        self.u = u          # (m1, m2, heater, period)      -> name
        self.prd = prd      # (mold, period)                -> name

    def __repr__(self):
        return (f"MilpModel({self.inst.name!r}, thb={self.thb}, "
                f"rows={len(self.constraints)}, vars={len(self.variables)})")


@dataclass(frozen=True)
class ModelStats:
    n_constraints: int
    n_binary_vars: int   # z and w
    n_integer_vars: int  # u and prd
    thb: int


def _merge_terms(terms):
    """Coalesce repeated variables; identical pairs fold to coefficient 2."""
    acc = {}
    order = []
    for coef, var in terms:
        if var not in acc:
            order.append(var)
            acc[var] = 0
        acc[var] += coef
    return tuple((acc[v], v) for v in order if acc[v] != 0)


def build_model(inst: Instance, thb: int,
                parts_mode: str = PARTS_PER_HEATER) -> MilpModel:
    """Construct the whole system over periods 1..thb (0 = initial state)."""
    if parts_mode not in PARTS_MODES:
        raise ValueError(f"unknown parts mode {parts_mode!r}")
    if thb < 0:
        raise ValueError("horizon must be non-negative")
    aux = derive_aux_sets(inst)
    phi = inst.period_dmin
    periods = range(1, thb + 1)
    ext = sorted(aux.triples_ext)

    variables = []
    x, y, yp, z, w, u, prd = {}, {}, {}, {}, {}, {}, {}

    for i in inst.mold_ids:
        for k in inst.heaters:
            for t in range(0, thb + 1):
                x[(i, k, t)] = name = f"x_{i}_{k}_{t}"
                variables.append(Variable(name, "general", 0, 2))
    for fam, store in (("y", y), ("yp", yp)):
        for i in inst.mold_ids:
            for k in inst.heaters:
                for t in periods:
                    store[(i, k, t)] = name = f"{fam}_{i}_{k}_{t}"
                    variables.append(Variable(name, "general", 0, 2))
    for (i, j, k) in ext:
        for t in periods:
            z[(i, j, k, t)] = name = f"z_{i}_{j}_{k}_{t}"
            variables.append(Variable(name, "binary"))
    for t in periods:
        w[t] = name = f"w_{t}"
        variables.append(Variable(name, "binary"))
    for (i, j, k) in ext:
        for t in periods:
            u[(i, j, k, t)] = name = f"u_{i}_{j}_{k}_{t}"
            variables.append(Variable(name, "general", 0, None))
    for i in inst.mold_ids:
        for t in periods:
            prd[(i, t)] = name = f"prd_{i}_{t}"
            variables.append(Variable(name, "general", 0, None))

    rows = []

    def add(name, tag, label, terms, sense, rhs):
        rows.append(Constraint(name, tag, label, _merge_terms(terms), sense, rhs))

    for t in range(1, thb):
        add(f"prefix_{t}", "eq-2", f"prefix period {t}",
            [(1, w[t]), (-1, w[t + 1])], ">=", 0)

    for t in periods:
        terms = [(2 * len(inst.heaters), w[t])]
        terms += [(-1, z[(i, j, k, t)]) for (i, j, k) in ext]
        add(f"active_{t}", "eq-3", f"active period {t}", terms, ">=", 0)

    for k in inst.heaters:
        for t in periods:
            terms = [(1, z[(i, j, k, t)])
                     for (i, j) in sorted(aux.pairs_by_heater[k])]
            add(f"slots_{k}_{t}", "eq-4", f"heater {k} period {t}",
                terms, "<=", 1)

    for (i, j, k) in ext:
        tvs = [inst.curing[(m, k)] for m in (i, j) if m != EMPTY]
        max_tv = max(tvs)
        for t in periods:
            terms = [(max_tv, u[(i, j, k, t)])]
            for m in inst.mold_ids:
                terms.append((inst.mold_by_id[m].setup_dmin, y[(m, k, t)]))
            for m in inst.mold_ids:
                terms.append((inst.mold_by_id[m].removal_dmin, yp[(m, k, t)]))
            if i == EMPTY:
                tag, label = "eq-6", f"capacity mold {j} heater {k} period {t}"
            else:
                tag, label = "eq-5", f"capacity pair ({i},{j}) heater {k} period {t}"
            add(f"cap_{i}_{j}_{k}_{t}", tag, label, terms, "<=", phi)

    for (i, j, k) in ext:
        tvs = [inst.curing[(m, k)] for m in (i, j) if m != EMPTY]
        cap = slot_rate(phi, max(tvs))
        for t in periods:
            add(f"rate_{i}_{j}_{k}_{t}", "eq-7",
                f"rate pair ({i},{j}) heater {k} period {t}",
                [(1, u[(i, j, k, t)]), (-cap, z[(i, j, k, t)])], "<=", 0)

    for i in inst.mold_ids:
        for t in periods:
            terms = [(1, prd[(i, t)])]
            for (j, k) in sorted(aux.triples_by_first[i]):
                terms.append((-1, u[(i, j, k, t)]))
            for (j, k) in sorted(aux.ext_by_second[i]):
                terms.append((-1, u[(j, i, k, t)]))
            add(f"prod_{i}_{t}", "eq-8", f"production mold {i} period {t}",
                terms, "=", 0)

    if thb > 0:
        for i in inst.mold_ids:
            terms = [(1, prd[(i, t)]) for t in periods]
            add(f"demand_{i}", "eq-9", f"demand mold {i}",
                terms, ">=", inst.mold_by_id[i].demand)

    for i in inst.mold_ids:
        for k in inst.heaters:
            for t in periods:
                terms = [(1, x[(i, k, t)])]
                for (j, kk) in sorted(aux.triples_by_first[i]):
                    if kk == k:
                        terms.append((-1, z[(i, j, k, t)]))
                for (j, kk) in sorted(aux.ext_by_second[i]):
                    if kk == k:
                        terms.append((-1, z[(j, i, k, t)]))
                add(f"molds_{i}_{k}_{t}", "eq-10",
                    f"mold count mold {i} heater {k} period {t}",
                    terms, "=", 0)

    for i in inst.mold_ids:
        for t in periods:
            terms = [(1, x[(i, k, t)]) for k in inst.heaters]
            add(f"copies_{i}_{t}", "eq-11", f"copies mold {i} period {t}",
                terms, "<=", inst.mold_by_id[i].copies)

    for p in inst.parts:
        members = sorted(p.molds)
        if parts_mode == PARTS_PER_HEATER:
            for k in inst.heaters:
                for t in periods:
                    terms = [(1, x[(m, k, t)]) for m in members]
                    add(f"parts_{p.id}_{k}_{t}", "eq-12",
                        f"part {p.id} heater {k} period {t}",
                        terms, "<=", p.units)
        else:
            for t in periods:
                terms = [(1, x[(m, k, t)])
                         for m in members for k in inst.heaters]
                add(f"parts_{p.id}_{t}", "eq-12", f"part {p.id} period {t}",
                    terms, "<=", p.units)

    for i in inst.mold_ids:
        for k in inst.heaters:
            add(f"start_{i}_{k}", "eq-13", f"initial mold {i} heater {k}",
                [(1, x[(i, k, 0)])], "=", inst.init.get((i, k), 0))

    for i in inst.mold_ids:
        for k in inst.heaters:
            for t in periods:
                add(f"setup_{i}_{k}_{t}", "eq-14",
                    f"setups mold {i} heater {k} period {t}",
                    [(1, y[(i, k, t)]), (-1, x[(i, k, t)]), (1, x[(i, k, t - 1)])],
                    ">=", 0)
    for i in inst.mold_ids:
        for k in inst.heaters:
            for t in periods:
                add(f"removal_{i}_{k}_{t}", "eq-15",
                    f"removals mold {i} heater {k} period {t}",
                    [(1, yp[(i, k, t)]), (1, x[(i, k, t)]), (-1, x[(i, k, t - 1)])],
                    ">=", 0)

    objective = tuple((1, w[t]) for t in periods)
    return MilpModel(
        inst=inst, thb=thb, parts_mode=parts_mode, aux=aux,
        objective=objective, constraints=tuple(rows),
        variables=tuple(variables),
        x=x, y=y, yp=yp, z=z, w=w, u=u, prd=prd,
    )


def model_stats(m: MilpModel) -> ModelStats:
    return ModelStats(
        n_constraints=len(m.constraints),
        n_binary_vars=len(m.z) + len(m.w),
        n_integer_vars=len(m.u) + len(m.prd),
        thb=m.thb,
    )


# ── LP emission ──────────────────────────────────────────────────────


def emit_lp(m: MilpModel) -> str:
    lines = [f"\\ model {m.inst.name} thb={m.thb} parts={m.parts_mode}"]
    lines.append("Minimize")
    units = term_units(m.objective) if m.objective else ["0"]
    lines.extend(fold(" obj:", units))
    lines.append("Subject To")
    for c in m.constraints:
        lines.append(f"\\ {c.tag} {c.label}")
        units = term_units(c.terms) if c.terms else ["0"]
        units.append(f"{c.sense} {c.rhs}")
        lines.extend(fold(f" {c.name}:", units))
    bounded = [v for v in m.variables if v.kind == "general" and v.hi is not None]
    if bounded:
        lines.append("Bounds")
        for v in bounded:
            lines.append(f" {v.lo} <= {v.name} <= {v.hi}")
    generals = [v.name for v in m.variables if v.kind == "general"]
    if generals:
        lines.append("Generals")
        lines.extend(fold(" " + generals[0], generals[1:]))
    binaries = [v.name for v in m.variables if v.kind == "binary"]
    if binaries:
        lines.append("Binaries")
        lines.extend(fold(" " + binaries[0], binaries[1:]))
    lines.append("End")
    return "\n".join(lines) + "\n"


# ── assignment checking, decoding, encoding ──────────────────────────


def _is_int(val) -> bool:
    return isinstance(val, int) or (isinstance(val, float) and val == int(val))


def check_assignment(m: MilpModel, assignment) -> FeasibilityReport:
    """Evaluate every variable domain and every constraint row."""
    v = []
    known = {var.name for var in m.variables}
    for name in assignment:
        if name not in known:
            v.append(f"assignment references unknown variable {name}")
    for var in m.variables:
        val = assignment.get(var.name, 0)
        if not _is_int(val):
            v.append(f"{var.name} = {val} is not integral")
            continue
        val = int(val)
        if var.kind == "binary" and val not in (0, 1):
            v.append(f"binary {var.name} = {val} outside {{0,1}}")
        if var.lo is not None and val < var.lo:
            v.append(f"{var.name} = {val} below lower bound {var.lo}")
        if var.hi is not None and val > var.hi:
            v.append(f"{var.name} = {val} above upper bound {var.hi}")
    for c in m.constraints:
        lhs = sum(coef * assignment.get(var, 0) for coef, var in c.terms)
        if c.sense == "<=":
            ok = lhs <= c.rhs
        elif c.sense == ">=":
            ok = lhs >= c.rhs
        else:
            ok = lhs == c.rhs
        if not ok:
            v.append(f"{c.name} ({c.tag} {c.label}): {lhs} {c.sense} {c.rhs} fails")
    return FeasibilityReport(violations=v)


def extract_schedule(m: MilpModel, assignment) -> Schedule:
    """Decode z/u values into placed tuples; rejects invalid assignments.

    Consecutive periods holding the same pair on the same heater merge into
    one tuple whose quantity is the summed production, zero-production
    staging periods included.
    """
    report = check_assignment(m, assignment)
    if not report.ok:
        raise InfeasibleAssignment(report.violations)

    def val(name):
        return int(assignment.get(name, 0))

    runs = []
    for k in m.inst.heaters:
        pairs = sorted(m.aux.pairs_by_heater[k])
        run = None  # [pair, start_period, length, quantity]
        for t in range(1, m.thb + 1):
            active = [(i, j) for (i, j) in pairs if val(m.z[(i, j, k, t)]) == 1]
            pair = active[0] if active else None
            produced = val(m.u[(pair[0], pair[1], k, t)]) if pair else 0
            if run is not None and pair == run[0]:
                run[2] += 1
                run[3] += produced
            else:
                if run is not None:
                    runs.append((k, *run))
                run = [pair, t, 1, produced] if pair else None
        if run is not None:
            runs.append((k, *run))

    runs.sort(key=lambda r: (r[0], r[2]))
    tuples = [
        AssignmentTuple(id=n + 1, m1=pair[0], m2=pair[1], q=q,
                        heater=k, start=start - 1, length=length)
        for n, (k, pair, start, length, q) in enumerate(runs)
    ]
    return Schedule(tuples=tuples)


def schedule_to_assignment(m: MilpModel, schedule: Schedule) -> dict:
    """Encode a feasible schedule as a variable assignment for this model.

    Production is packed greedily: the first period takes what the
    changeover leaves, later periods the full rate. Mount/removal variables
    follow the heater-state differences, so gap removals land in the first
    idle period exactly as the rows expect.
    """
    inst = m.inst
    makespan = schedule_makespan(schedule)
    if schedule.sentinel:
        raise ValueError("cannot encode the sentinel candidate")
    if makespan > m.thb:
        raise ValueError(
            f"schedule spans {makespan} periods, model horizon is {m.thb}"
        )
    asg = {}

    loads = {}  # (heater, model period) -> mold multiset
    for k in inst.heaters:
        seq = sorted((t for t in schedule.tuples if t.heater == k),
                     key=lambda t: (t.start, t.id))
        residents = {}
        for (mm, kk), c in inst.init.items():
            if kk == k:
                residents[mm] = residents.get(mm, 0) + c
        prev_end = 0
        for t in seq:
            counts = t.mold_counts()
            plan = plan_slot(inst, k, residents, prev_end, t.start, counts, t.q)
            remaining = t.q
            for offset in range(t.length):
                period = t.start + 1 + offset
                asg[m.z[(t.m1, t.m2, k, period)]] = 1
                loads[(k, period)] = counts
                cap = plan.cap_first if offset == 0 else plan.cap_int
                give = min(remaining, cap)
                if give > 0:
                    asg[m.u[(t.m1, t.m2, k, period)]] = give
                    remaining -= give
            residents = counts
            prev_end = t.start + t.length

    for (i, j, k, t), name in m.u.items():
        produced = asg.get(name, 0)
        if produced:
            if i != EMPTY:
                key = m.prd[(i, t)]
                asg[key] = asg.get(key, 0) + produced
            key = m.prd[(j, t)]
            asg[key] = asg.get(key, 0) + produced

    for i in inst.mold_ids:
        for k in inst.heaters:
            if inst.init.get((i, k)):
                asg[m.x[(i, k, 0)]] = inst.init[(i, k)]
            for t in range(1, m.thb + 1):
                c = loads.get((k, t), {}).get(i, 0)
                if c:
                    asg[m.x[(i, k, t)]] = c
    for i in inst.mold_ids:
        for k in inst.heaters:
            for t in range(1, m.thb + 1):
                diff = (asg.get(m.x[(i, k, t)], 0)
                        - asg.get(m.x[(i, k, t - 1)], 0))
                if diff > 0:
                    asg[m.y[(i, k, t)]] = diff
                elif diff < 0:
                    asg[m.yp[(i, k, t)]] = -diff

    for t in range(1, int(makespan) + 1):
        asg[m.w[t]] = 1
    return asg
