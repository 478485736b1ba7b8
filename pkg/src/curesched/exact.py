"""Provably minimal makespans, two ways.

`solve_exact` runs a depth-first branch and bound over per-period heater
configurations: each heater either idles (dropping its resident molds) or
hosts an allowed mold pair producing at full per-period capacity.  States
are memoised on (residual demand, resident molds) and pruned with a
residual-demand lower bound, so the search handles the instance sizes the
test rigs and the small benchmark scenarios produce.

`solve_with_adapter` writes a built model to an LP file, invokes an
external solver command on it, and decodes the returned solution file
into a schedule.  The command contract is

    <solver-cmd> <model.lp> <out.sol>

where the solution file holds one `name value` pair per line plus an
`objective <v>` line, and the exit code is 0 for solved, 10 for proven
infeasible, anything else for failure.
"""

import math
import os
import subprocess
import tempfile
import time
from dataclasses import dataclass

from .domain import (
    AssignmentTuple,
    Instance,
    PARTS_MODES,
    PARTS_PER_HEATER,
    Schedule,
    ceil_div,
    derive_aux_sets,
    schedule_makespan,
    transition_work,
)
from .errors import (
    AdapterFailure,
    AdapterUnavailable,
    SolutionParseError,
)
from .milp import MilpModel, ModelStats, extract_schedule, emit_lp, model_stats

__all__ = [
    "SearchLimits",
    "SolveReport",
    "SolverAdapter",
    "solve_exact",
    "solve_with_adapter",
]


@dataclass(frozen=True)
class SearchLimits:
    """Knobs that keep the exhaustive search from running away."""

    max_nodes: int = 5_000_000
    time_limit_seconds: float = 600.0
    max_thb: int = 400

    def __post_init__(self):
        if self.max_nodes <= 0:
            raise ValueError("max_nodes must be positive")
        if self.time_limit_seconds <= 0:
            raise ValueError("time_limit_seconds must be positive")
        if self.max_thb <= 0:
            raise ValueError("max_thb must be positive")


@dataclass(frozen=True)
class SolverAdapter:
    """How to invoke an external MILP solver executable."""

    command: tuple
    time_limit_seconds: float = None


@dataclass
class SolveReport:
    """Outcome of one solver run.

    status is one of "optimal", "feasible", "infeasible", "limit";
    gap_percent is 0 exactly when the makespan is proven optimal.  The
    schedule is None when the run only confirmed a caller-supplied
    incumbent without reconstructing its assignment.
    """

    mode: str
    status: str
    makespan: int
    gap_percent: float
    wall_seconds: float
    stats: ModelStats = None
    schedule: Schedule = None
    nodes: int = 0
    # two-phase pipelines split wall_seconds into these
    heuristic_seconds: float = None
    solver_seconds: float = None


class _Frame:
    """One depth-first search frame: a period's state plus the lazy stream
    of joint configurations not yet branched on."""

    __slots__ = ("period", "res", "residents", "joint_in", "gen")

    def __init__(self, period, res, residents, joint_in):
        self.period = period
        self.res = res
        self.residents = residents
        self.joint_in = joint_in
        self.gen = None


def _mold_rate(inst: Instance, mold_id: int, parts_mode: str) -> int:
    """Upper bound on units of one mold the plant can cure per period."""
    heaters = inst.compat_heaters.get(mold_id, ())
    if not heaters:
        return 0
    per_slot = max(inst.period_dmin // inst.curing[(mold_id, k)] for k in heaters)
    concurrent = min(inst.mold_by_id[mold_id].copies, 2 * len(heaters))
    part_units = [inst.part_by_id[p].units for p in inst.parts_of.get(mold_id, ())]
    if part_units:
        tightest = min(part_units)
        if parts_mode == PARTS_PER_HEATER:
            concurrent = min(concurrent, min(2, tightest) * len(heaters))
        else:
            concurrent = min(concurrent, tightest)
    return concurrent * per_slot


def _heater_options(inst, aux, residents, k, res, used, part_used, parts_mode):
    """Per-period choices for one heater: an allowed pair at full capacity,
    or idling (residents leave, which must fit the period).

    Mounting a mold whose residual demand is already zero is skipped, since
    a single-mold slot dominates; pairs that merely keep such a mold
    resident stay available because holding it can be cheaper than paying
    its removal.  Options come back most-productive-first so a depth-first
    walk reaches good incumbents early.
    """
    phi = inst.period_dmin
    opts = []
    removal_bill = sum(inst.mold_by_id[m].removal_dmin * c
                       for m, c in residents.items())
    if removal_bill <= phi:
        opts.append((0, None, {}, 0))
    for i, j in sorted(aux.pairs_by_heater.get(k, ())):
        counts = {}
        if i:
            counts[i] = counts.get(i, 0) + 1
        counts[j] = counts.get(j, 0) + 1
        ok = True
        for m, c in counts.items():
            if used.get(m, 0) + c > inst.mold_by_id[m].copies:
                ok = False
                break
            # never mount a finished mold; keeping a resident one is fine
            if res.get(m, 0) <= 0 and c > residents.get(m, 0):
                ok = False
                break
        if not ok:
            continue
        usage = {}
        for p in inst.parts:
            c = sum(cc for m, cc in counts.items() if m in p.molds)
            if c:
                usage[p.id] = c
        if parts_mode == PARTS_PER_HEATER:
            if any(c > inst.part_by_id[p].units for p, c in usage.items()):
                continue
        else:
            if any(part_used.get(p, 0) + c > inst.part_by_id[p].units
                   for p, c in usage.items()):
                continue
        setups, removals = transition_work(inst, residents, counts)
        if setups + removals > phi:
            continue
        max_tv = max(inst.curing[(m, k)] for m in counts)
        cap = (phi - setups - removals) // max_tv
        useful = sum(min(res.get(m, 0), cap * c) for m, c in counts.items())
        opts.append((useful, (i, j), counts, cap))
    opts.sort(key=lambda o: (-o[0], o[1] is None, o[1] or (0, 0)))
    return [(pair, counts, cap) for _, pair, counts, cap in opts]


def _iter_joint_configs(inst, aux, residents_by_heater, res, parts_mode):
    """Joint per-period configurations across heaters, yielded lazily in
    heater id order so huge plants never materialize the cross product."""
    heaters = list(inst.heaters)

    def rec(idx, used, part_used, acc):
        if idx == len(heaters):
            yield list(acc)
            return
        k = heaters[idx]
        options = _heater_options(inst, aux, residents_by_heater[k], k,
                                  res, used, part_used, parts_mode)
        for pair, counts, cap in options:
            new_used = used
            new_part = part_used
            if counts:
                new_used = dict(used)
                for m, c in counts.items():
                    new_used[m] = new_used.get(m, 0) + c
                new_part = dict(part_used)
                for p in inst.parts:
                    c = sum(cc for m, cc in counts.items() if m in p.molds)
                    if c:
                        new_part[p.id] = new_part.get(p.id, 0) + c
            acc.append((k, pair, counts, cap))
            yield from rec(idx + 1, new_used, new_part, acc)
            acc.pop()

    yield from rec(0, {}, {}, [])


def _config_production(joint):
    produced = {}
    for _, pair, _, cap in joint:
        if pair is None:
            continue
        i, j = pair
        if i:
            produced[i] = produced.get(i, 0) + cap
        produced[j] = produced.get(j, 0) + cap
    return produced


def _path_schedule(inst, path) -> Schedule:
    """Turn a per-period config history into merged assignment tuples."""
    per_heater = {k: [] for k in inst.heaters}
    for joint in path:
        for k, pair, _, cap in joint:
            per_heater[k].append((pair, cap))
    tuples = []
    next_id = 1
    for k in inst.heaters:
        seq = per_heater[k]
        t = 0
        while t < len(seq):
            pair, cap = seq[t]
            if pair is None:
                t += 1
                continue
            q = cap
            end = t + 1
            while end < len(seq) and seq[end][0] == pair:
                q += seq[end][1]
                end += 1
            i, j = pair
            tuples.append(AssignmentTuple(id=next_id, m1=i, m2=j, q=q,
                                          heater=k, start=t, length=end - t))
            next_id += 1
            t = end
    return Schedule(tuples=tuples)


def solve_exact(inst: Instance, thb: int, limits: SearchLimits = None,
                parts_mode: str = PARTS_PER_HEATER,
                incumbent_makespan: int = None) -> SolveReport:
    """Minimal makespan within a `thb`-period horizon, or proof there is none.

    An `incumbent_makespan` (say, from the randomized heuristic) seeds the
    pruning bound; the search then only looks for strictly shorter
    schedules, and exhausting the tree without finding one proves the
    incumbent optimal (reported with schedule None).
    """
    if parts_mode not in PARTS_MODES:
        raise ValueError(f"unknown parts mode {parts_mode!r}")
    if limits is None:
        limits = SearchLimits()
    if thb < 0:
        raise ValueError("thb must be non-negative")
    if thb > limits.max_thb:
        raise ValueError(f"thb {thb} exceeds max_thb {limits.max_thb}")
    if incumbent_makespan is not None and incumbent_makespan < 0:
        raise ValueError("incumbent_makespan must be non-negative")

    start_clock = time.perf_counter()
    deadline = start_clock + limits.time_limit_seconds
    aux = derive_aux_sets(inst)
    demanded = sorted(m.id for m in inst.molds if m.demand > 0)
    rate = {i: _mold_rate(inst, i, parts_mode) for i in demanded}

    residual0 = {i: inst.mold_by_id[i].demand for i in demanded}
    residents0 = {k: {} for k in inst.heaters}
    for (m, k), c in inst.init.items():
        if c:
            residents0[k][m] = residents0[k].get(m, 0) + c

    def lower_bound(res):
        lb = 0
        for i in demanded:
            r = res[i]
            if r <= 0:
                continue
            if rate[i] == 0:
                return math.inf
            lb = max(lb, ceil_div(r, rate[i]))
        return lb

    root_lb = lower_bound(residual0)
    best = math.inf if incumbent_makespan is None else incumbent_makespan
    best_path = None
    memo = {}
    nodes = 0

    def freeze(res, residents):
        return (
            tuple(res[i] for i in demanded),
            tuple(tuple(sorted(residents[k].items())) for k in inst.heaters),
        )

    # explicit stack, children pulled lazily: horizons never overflow the
    # interpreter and huge plants never materialize a config cross product
    hit_limit = False
    stack = [_Frame(1, residual0, residents0, None)]
    while stack:
        fr = stack[-1]
        if fr.gen is None:
            # clock check per frame touch, not just per counted node, so a
            # long run of pruned children cannot overshoot the deadline
            if time.perf_counter() > deadline:
                hit_limit = True
                break
            res, residents, period = fr.res, fr.residents, fr.period
            if all(res[i] <= 0 for i in demanded):
                span = period - 1
                if span < best:
                    best = span
                    best_path = [f.joint_in for f in stack[1:]]
                stack.pop()
                continue
            lb = lower_bound(res)
            floor = period - 1 + lb
            if floor >= best or floor > thb:
                stack.pop()
                continue
            key = freeze(res, residents)
            seen = memo.get(key)
            if seen is not None and seen <= period:
                stack.pop()
                continue
            memo[key] = period
            nodes += 1
            if nodes > limits.max_nodes or time.perf_counter() > deadline:
                hit_limit = True
                break
            fr.gen = _iter_joint_configs(inst, aux, residents, res,
                                         parts_mode)
        joint = next(fr.gen, None)
        if joint is None:
            stack.pop()
            continue
        produced = _config_production(joint)
        new_res = {i: max(0, fr.res[i] - produced.get(i, 0))
                   for i in demanded}
        new_residents = {k: counts for k, _, counts, _ in joint}
        stack.append(_Frame(fr.period + 1, new_res, new_residents, joint))
    wall = time.perf_counter() - start_clock

    if best is math.inf:
        if hit_limit:
            return SolveReport("exact", "limit", None, None, wall, nodes=nodes)
        return SolveReport("exact", "infeasible", None, None, wall, nodes=nodes)

    schedule = _path_schedule(inst, best_path) if best_path is not None else None
    if not hit_limit or root_lb >= best:
        return SolveReport("exact", "optimal", int(best), 0.0, wall,
                           schedule=schedule, nodes=nodes)
    gap = 100.0 * (best - root_lb) / best
    return SolveReport("exact", "feasible", int(best), gap, wall,
                       schedule=schedule, nodes=nodes)


# ── external solver bridge ───────────────────────────────────────────


def _command_list(adapter: SolverAdapter):
    if adapter is None:
        raise AdapterUnavailable("no solver adapter configured")
    cmd = adapter.command
    if isinstance(cmd, str):
        cmd = (cmd,)
    cmd = tuple(cmd)
    if not cmd:
        raise AdapterUnavailable("solver adapter has an empty command")
    return list(cmd)


def _parse_solution(text: str):
    assignment = {}
    objective = None
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        fields = line.split()
        if len(fields) != 2:
            raise SolutionParseError(f"malformed solution line: {raw!r}")
        name, value = fields
        try:
            v = float(value)
        except ValueError:
            raise SolutionParseError(f"non-numeric value in line: {raw!r}")
        rounded = round(v)
        if abs(v - rounded) <= 1e-6:
            v = int(rounded)
        if name == "objective":
            objective = v
        else:
            assignment[name] = v
    if objective is None:
        raise SolutionParseError("solution file has no objective line")
    return assignment, objective


def solve_with_adapter(m: MilpModel, adapter: SolverAdapter) -> SolveReport:
    """Solve a built model through an external solver command.

    Raises AdapterUnavailable when the command is missing, AdapterFailure
    on an unexpected exit code, SolutionParseError on an unreadable
    solution file, and lets InfeasibleAssignment from schedule decoding
    propagate.  A wall-clock timeout comes back as status "limit".
    """
    command = _command_list(adapter)
    stats = model_stats(m)
    start_clock = time.perf_counter()
    with tempfile.TemporaryDirectory(prefix="curesched-") as workdir:
        lp_path = os.path.join(workdir, "model.lp")
        sol_path = os.path.join(workdir, "model.sol")
        with open(lp_path, "w") as fh:
            fh.write(emit_lp(m))
        env = dict(os.environ)
        if adapter.time_limit_seconds is not None:
            env["CURESCHED_LPSOLVE_TIME_LIMIT"] = str(adapter.time_limit_seconds)
        try:
            proc = subprocess.run(
                command + [lp_path, sol_path],
                capture_output=True,
                text=True,
                timeout=adapter.time_limit_seconds,
                env=env,
            )
        except FileNotFoundError as exc:
            raise AdapterUnavailable(f"solver command not found: {command[0]}") from exc
        except subprocess.TimeoutExpired:
            wall = time.perf_counter() - start_clock
            return SolveReport("adapter", "limit", None, None, wall, stats=stats)
        wall = time.perf_counter() - start_clock
        if proc.returncode == 10:
            return SolveReport("adapter", "infeasible", None, None, wall, stats=stats)
        if proc.returncode != 0:
            tail = (proc.stderr or proc.stdout or "").strip().splitlines()
            detail = tail[-1] if tail else "no output"
            raise AdapterFailure(
                f"solver exited with code {proc.returncode}: {detail}")
        try:
            with open(sol_path) as fh:
                text = fh.read()
        except OSError as exc:
            raise SolutionParseError("solver wrote no solution file") from exc
    assignment, _ = _parse_solution(text)
    schedule = extract_schedule(m, assignment)
    makespan = int(schedule_makespan(schedule))
    return SolveReport("adapter", "optimal", makespan, 0.0, wall,
                       stats=stats, schedule=schedule)
