"""Command-line front end: instance files, experiment runs, result tables.

Instances travel as JSON documents (see `instance_to_json` for the exact
field layout), schedules as flat JSON lists of assignment tuples, and
benchmark results as CSV plus an aligned text table.  The `cli_main`
entry point exposes four subcommands:

    solve     one instance, one mode, key-value report on stdout
    generate  write a batch of scenario instances to a directory
    bench     run a suite file and emit the result table
    validate  check an instance file, optionally with a schedule

Exit codes: 0 solved/valid, 1 infeasible or invalid, 2 bad usage or a
malformed file, 3 a resource limit stopped the run early.
"""

import argparse
import csv
import io
import json
import shlex
import sys
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from .domain import (
    AssignmentTuple,
    Instance,
    Mold,
    Part,
    PARTS_MODES,
    PARTS_PER_HEATER,
    Schedule,
    schedule_makespan,
    validate_instance,
    validate_schedule,
)
from .errors import (
    CureschedError,
    Infeasible,
    NoFeasiblePlacement,
    UnproduciblePair,
)
from .exact import SearchLimits, SolverAdapter, solve_exact
from .gen import SCENARIOS, generate_instance
from .heuristic import HeuristicConfig, run_heuristic
from .hop import (
    HopConfig,
    SOLVER_ADAPTER,
    SOLVER_INTERNAL,
    run_baseline_milp,
    run_hop,
)
from .horizon import compute_thb
from .milp import build_model, emit_lp, model_stats

__all__ = [
    "ModeResult",
    "ResultRow",
    "cli_main",
    "instance_from_json",
    "instance_to_json",
    "load_instance",
    "load_schedule",
    "rows_to_csv",
    "rows_to_table",
    "run_benchmark",
    "save_instance",
    "save_schedule",
    "schedule_from_json",
    "schedule_to_json",
    "toy_instance",
]

MODES = ("heuristic", "milp", "hop", "exact")
TOY_NAMES = ("toy1", "toy2")

_COLUMNS = ("instance", "mode", "thb", "makespan", "gap_pct", "time_s",
            "constraints", "binary_vars", "real_vars")


# ── instance JSON ────────────────────────────────────────────────────


def _field(doc, key, where):
    if not isinstance(doc, dict):
        raise ValueError(f"{where}: expected a JSON object")
    if key not in doc:
        raise ValueError(f"{where}: missing field {key!r}")
    return doc[key]


def instance_to_json(inst: Instance) -> dict:
    """Plain-JSON document for an instance; lists sorted for stable bytes."""
    doc = {
        "name": inst.name,
        "phi_dmin": inst.period_dmin,
        "molds": [
            {"id": m.id, "nm": m.copies, "tc_dmin": m.setup_dmin,
             "tq_dmin": m.removal_dmin, "demand": m.demand}
            for m in inst.molds
        ],
        "heaters": list(inst.heaters),
        "curing_dmin": [
            {"mold": m, "heater": k, "tv": tv}
            for (m, k), tv in sorted(inst.curing.items())
        ],
        "mold_compat": [list(p) for p in sorted(inst.mold_compat)],
        "parts": [
            {"id": p.id, "np": p.units, "molds": sorted(p.molds)}
            for p in inst.parts
        ],
        "init": [
            {"mold": m, "heater": k, "count": c}
            for (m, k), c in sorted(inst.init.items())
        ],
    }
    if inst.meta:
        doc["meta"] = dict(inst.meta)
    return doc


def instance_from_json(doc) -> Instance:
    """Inverse of `instance_to_json`; structural errors become ValueError."""
    molds = tuple(
        Mold(id=int(_field(m, "id", "mold entry")),
             copies=int(_field(m, "nm", "mold entry")),
             setup_dmin=int(_field(m, "tc_dmin", "mold entry")),
             removal_dmin=int(_field(m, "tq_dmin", "mold entry")),
             demand=int(_field(m, "demand", "mold entry")))
        for m in _field(doc, "molds", "instance")
    )
    curing = {
        (int(_field(e, "mold", "curing entry")),
         int(_field(e, "heater", "curing entry"))):
        int(_field(e, "tv", "curing entry"))
        for e in _field(doc, "curing_dmin", "instance")
    }
    parts = tuple(
        Part(id=int(_field(p, "id", "part entry")),
             units=int(_field(p, "np", "part entry")),
             molds=frozenset(int(v) for v in _field(p, "molds", "part entry")))
        for p in _field(doc, "parts", "instance")
    )
    init = {
        (int(_field(e, "mold", "init entry")),
         int(_field(e, "heater", "init entry"))):
        int(_field(e, "count", "init entry"))
        for e in _field(doc, "init", "instance")
    }
    return Instance(
        name=str(_field(doc, "name", "instance")),
        period_dmin=int(_field(doc, "phi_dmin", "instance")),
        molds=molds,
        heaters=tuple(int(h) for h in _field(doc, "heaters", "instance")),
        curing=curing,
        mold_compat=tuple(
            (int(a), int(b)) for a, b in _field(doc, "mold_compat", "instance")
        ),
        parts=parts,
        init=init,
        meta=doc.get("meta"),
    )


def save_instance(inst: Instance, path) -> None:
    text = json.dumps(instance_to_json(inst), indent=2, sort_keys=True) + "\n"
    Path(path).write_text(text, encoding="utf-8")


def load_instance(path) -> Instance:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValueError(f"{path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON: {exc}") from exc
    return instance_from_json(doc)


def toy_instance(name: str) -> Instance:
    """One of the packaged fixture instances, by name."""
    if name not in TOY_NAMES:
        raise ValueError(
            f"unknown fixture {name!r}; available: {', '.join(TOY_NAMES)}")
    raw = (resources.files("curesched") / "data" / f"{name}.json").read_text(
        encoding="utf-8")
    return instance_from_json(json.loads(raw))


# ── schedule JSON ────────────────────────────────────────────────────


def schedule_to_json(schedule: Schedule) -> list:
    return [
        {"id": t.id, "m1": t.m1, "m2": t.m2, "q": t.q,
         "heater": t.heater, "start": t.start, "length": t.length}
        for t in schedule.tuples
    ]


def schedule_from_json(doc) -> Schedule:
    if not isinstance(doc, list):
        raise ValueError("schedule document: expected a JSON list")
    tuples = []
    for idx, entry in enumerate(doc):
        where = f"schedule entry {idx}"
        tuples.append(AssignmentTuple(
            id=int(_field(entry, "id", where)),
            m1=int(_field(entry, "m1", where)),
            m2=int(_field(entry, "m2", where)),
            q=int(_field(entry, "q", where)),
            heater=int(_field(entry, "heater", where)),
            start=int(_field(entry, "start", where)),
            length=int(_field(entry, "length", where)),
        ))
    return Schedule(tuples=tuples)


def save_schedule(schedule: Schedule, path) -> None:
    text = json.dumps(schedule_to_json(schedule), indent=2, sort_keys=True)
    Path(path).write_text(text + "\n", encoding="utf-8")


def load_schedule(path) -> Schedule:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise ValueError(f"{path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"{path}: invalid JSON: {exc}") from exc
    return schedule_from_json(doc)


# ── result rows ──────────────────────────────────────────────────────


@dataclass
class ModeResult:
    """One table cell block: how a single mode fared on one instance."""

    thb: int = None
    makespan: int = None
    gap_percent: float = None
    time_seconds: float = None
    constraints: int = None
    binary_vars: int = None
    real_vars: int = None
    note: str = None    # "infeasible" / "limit" / "error" when no makespan


@dataclass
class ResultRow:
    instance: str
    cells: dict


def _fmt_opt(v):
    return "" if v is None else str(v)


def _fmt_gap(g):
    if g is None:
        return ""
    return "0" if g == 0 else f"{g:.2f}"


def _fmt_avg(v):
    if v is None:
        return ""
    return str(int(v)) if float(v).is_integer() else f"{v:.2f}"


def _cell_strings(instance, mode, cell, record_time):
    makespan = cell.makespan if cell.makespan is not None else (cell.note or "")
    time_s = ""
    if record_time and cell.time_seconds is not None:
        time_s = f"{cell.time_seconds:.2f}"
    return [
        instance,
        mode,
        _fmt_opt(cell.thb),
        str(makespan),
        _fmt_gap(cell.gap_percent),
        time_s,
        _fmt_opt(cell.constraints),
        _fmt_opt(cell.binary_vars),
        _fmt_opt(cell.real_vars),
    ]


def _average_strings(rows, mode, record_time):
    cells = [row.cells[mode] for row in rows if mode in row.cells]

    def mean(field):
        vals = [getattr(c, field) for c in cells
                if getattr(c, field) is not None]
        return sum(vals) / len(vals) if vals else None

    time_s = ""
    if record_time and mean("time_seconds") is not None:
        time_s = f"{mean('time_seconds'):.2f}"
    return [
        "Average",
        mode,
        _fmt_avg(mean("thb")),
        _fmt_avg(mean("makespan")),
        _fmt_avg(mean("gap_percent")),
        time_s,
        _fmt_avg(mean("constraints")),
        _fmt_avg(mean("binary_vars")),
        _fmt_avg(mean("real_vars")),
    ]


def _table_rows(rows, modes, record_time, average):
    out = [list(_COLUMNS)]
    for row in rows:
        for mode in modes:
            cell = row.cells.get(mode)
            if cell is not None:
                out.append(_cell_strings(row.instance, mode, cell,
                                         record_time))
    if average and rows:
        for mode in modes:
            out.append(_average_strings(rows, mode, record_time))
    return out


def rows_to_csv(rows, modes, record_time=False, average=True) -> str:
    """CSV text for result rows; one line per (instance, mode), then one
    arithmetic-mean line per mode.  Byte-stable unless times are recorded."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    for line in _table_rows(rows, modes, record_time, average):
        writer.writerow(line)
    return buf.getvalue()


def rows_to_table(rows, modes, record_time=False, average=True) -> str:
    """The same rows rendered as an aligned, human-readable text table."""
    table = _table_rows(rows, modes, record_time, average)
    widths = [max(len(r[i]) for r in table) for i in range(len(_COLUMNS))]
    lines = [
        "  ".join(cell.ljust(w) for cell, w in zip(r, widths)).rstrip()
        for r in table
    ]
    return "\n".join(lines) + "\n"


# ── solving one (instance, mode) ─────────────────────────────────────


def _solve_one(inst, mode, iterations=None, seed=None, time_limit=None,
               parts_mode=PARTS_PER_HEATER, solver_cmd=None):
    """Dispatch one run; returns (status, ModeResult, schedule-or-None)."""
    heuristic_cfg = HeuristicConfig(
        total_iterations=100 if iterations is None else iterations,
        seed=0 if seed is None else seed,
        parts_mode=parts_mode,
    )
    started = time.perf_counter()
    try:
        if mode == "heuristic":
            sched = run_heuristic(inst, heuristic_cfg)
            elapsed = time.perf_counter() - started
            return "feasible", ModeResult(
                makespan=int(schedule_makespan(sched)),
                time_seconds=elapsed), sched

        if mode == "exact":
            thb = compute_thb(inst)
            limits = SearchLimits(
                time_limit_seconds=(600.0 if time_limit is None
                                    else time_limit),
                max_thb=max(SearchLimits().max_thb, thb),
            )
            rep = solve_exact(inst, thb, limits=limits,
                              parts_mode=parts_mode)
            note = None if rep.makespan is not None else rep.status
            return rep.status, ModeResult(
                thb=thb, makespan=rep.makespan, gap_percent=rep.gap_percent,
                time_seconds=rep.wall_seconds, note=note), rep.schedule

        adapter = None
        if solver_cmd:
            adapter = SolverAdapter(tuple(shlex.split(solver_cmd)),
                                    time_limit_seconds=time_limit)
        kwargs = {
            "heuristic": heuristic_cfg,
            "solver": SOLVER_ADAPTER if adapter else SOLVER_INTERNAL,
            "parts_mode": parts_mode,
            "adapter": adapter,
        }
        if time_limit is not None:
            kwargs["time_limit_seconds"] = time_limit
        cfg = HopConfig(**kwargs)
        run = run_hop if mode == "hop" else run_baseline_milp
        rep, sched = run(inst, cfg)
        stats = rep.stats
        note = None if rep.makespan is not None else rep.status
        return rep.status, ModeResult(
            thb=stats.thb if stats else None,
            makespan=rep.makespan,
            gap_percent=rep.gap_percent,
            time_seconds=rep.wall_seconds,
            constraints=stats.n_constraints if stats else None,
            binary_vars=stats.n_binary_vars if stats else None,
            real_vars=stats.n_integer_vars if stats else None,
            note=note), sched
    except (Infeasible, UnproduciblePair, NoFeasiblePlacement):
        elapsed = time.perf_counter() - started
        return "infeasible", ModeResult(note="infeasible",
                                        time_seconds=elapsed), None


def run_benchmark(suite: dict, base_dir=".") -> list:
    """Run every (instance, mode) pair of a suite; one row per instance.

    A failing pair is recorded in its cell and the run continues.  Relative
    instance paths resolve against `base_dir`.
    """
    base = Path(base_dir)
    instance_paths = _field(suite, "instances", "suite")
    modes = _field(suite, "modes", "suite")
    for mode in modes:
        if mode not in MODES:
            raise ValueError(f"suite: unknown mode {mode!r}")
    options = dict(
        iterations=suite.get("iterations"),
        seed=suite.get("seed"),
        time_limit=suite.get("time_limit"),
        parts_mode=suite.get("parts_mode", PARTS_PER_HEATER),
        solver_cmd=suite.get("solver_cmd"),
    )
    rows = []
    for raw_path in instance_paths:
        path = Path(raw_path)
        if not path.is_absolute():
            path = base / path
        cells = {}
        try:
            inst = load_instance(path)
        except ValueError:
            rows.append(ResultRow(instance=path.stem, cells={
                mode: ModeResult(note="error") for mode in modes}))
            continue
        for mode in modes:
            try:
                _, cell, _ = _solve_one(inst, mode, **options)
            except CureschedError:
                cell = ModeResult(note="error")
            cells[mode] = cell
        rows.append(ResultRow(instance=inst.name, cells=cells))
    return rows


# ── command line ─────────────────────────────────────────────────────


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="curesched",
        description="Lot-sizing and scheduling toolkit for tire curing.")
    sub = parser.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="solve one instance file")
    ps.add_argument("--instance", required=True)
    ps.add_argument("--mode", required=True, choices=MODES)
    ps.add_argument("--iterations", type=int, default=None)
    ps.add_argument("--seed", type=int, default=None)
    ps.add_argument("--time-limit", type=float, default=None)
    ps.add_argument("--parts-mode", choices=PARTS_MODES,
                    default=PARTS_PER_HEATER)
    ps.add_argument("--emit-lp", default=None, metavar="FILE.lp")
    ps.add_argument("--out", default=None, metavar="FILE.csv")
    ps.add_argument("--schedule-out", default=None, metavar="FILE.json")
    ps.add_argument("--solver-cmd", default=None,
                    help="external MILP solver command; gets LP and"
                         " solution paths appended")
    ps.add_argument("--record-time", action="store_true")

    pg = sub.add_parser("generate", help="write scenario instances")
    pg.add_argument("--scenario", required=True, choices=sorted(SCENARIOS))
    pg.add_argument("--count", type=int, required=True)
    pg.add_argument("--seed", type=int, required=True)
    pg.add_argument("--out-dir", required=True)

    pb = sub.add_parser("bench", help="run a suite file")
    pb.add_argument("--suite", required=True)
    pb.add_argument("--out", required=True, metavar="FILE.csv")
    pb.add_argument("--record-time", action="store_true")

    pv = sub.add_parser("validate", help="check an instance or schedule")
    pv.add_argument("--instance", required=True)
    pv.add_argument("--schedule", default=None)
    pv.add_argument("--parts-mode", choices=PARTS_MODES,
                    default=PARTS_PER_HEATER)
    return parser


def _cmd_solve(args):
    if args.emit_lp and args.mode == "heuristic":
        raise ValueError(
            "--emit-lp needs a model-building mode (milp, hop, exact)")
    inst = load_instance(args.instance)
    status, cell, sched = _solve_one(
        inst, args.mode, iterations=args.iterations, seed=args.seed,
        time_limit=args.time_limit, parts_mode=args.parts_mode,
        solver_cmd=args.solver_cmd)
    if args.emit_lp and cell.thb is not None:
        model = build_model(inst, cell.thb, args.parts_mode)
        Path(args.emit_lp).write_text(emit_lp(model), encoding="utf-8")
    if args.schedule_out and sched is not None:
        save_schedule(sched, args.schedule_out)
    if args.out:
        row = ResultRow(instance=inst.name, cells={args.mode: cell})
        Path(args.out).write_text(
            rows_to_csv([row], [args.mode], record_time=args.record_time,
                        average=False),
            encoding="utf-8")

    lines = [f"instance {inst.name}", f"mode {args.mode}", f"status {status}"]
    if cell.makespan is not None:
        lines.append(f"makespan {cell.makespan}")
    if cell.gap_percent is not None:
        lines.append(f"gap_pct {_fmt_gap(cell.gap_percent)}")
    if cell.thb is not None:
        lines.append(f"thb {cell.thb}")
    if cell.constraints is not None:
        lines.append(f"constraints {cell.constraints}")
        lines.append(f"binary_vars {cell.binary_vars}")
        lines.append(f"real_vars {cell.real_vars}")
    if args.record_time and cell.time_seconds is not None:
        lines.append(f"time_s {cell.time_seconds:.2f}")
    print("\n".join(lines))

    if status == "infeasible":
        return 1
    if status == "optimal" or args.mode == "heuristic":
        return 0
    return 3


def _cmd_generate(args):
    if args.count <= 0:
        raise ValueError("--count must be positive")
    spec = SCENARIOS[args.scenario]
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    for seed in range(args.seed, args.seed + args.count):
        inst = generate_instance(spec, seed)
        path = out_dir / f"{inst.name}.json"
        save_instance(inst, path)
        print(path)
    return 0


def _cmd_bench(args):
    suite_path = Path(args.suite)
    try:
        suite = json.loads(suite_path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise ValueError(f"{suite_path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"{suite_path}: invalid JSON: {exc}") from exc
    modes = _field(suite, "modes", "suite")
    record_time = args.record_time or bool(suite.get("record_time"))
    rows = run_benchmark(suite, base_dir=suite_path.parent)
    Path(args.out).write_text(
        rows_to_csv(rows, modes, record_time=record_time), encoding="utf-8")
    print(rows_to_table(rows, modes, record_time=record_time), end="")
    return 0


def _cmd_validate(args):
    inst = load_instance(args.instance)
    violations = list(validate_instance(inst).violations)
    if args.schedule:
        sched = load_schedule(args.schedule)
        violations += validate_schedule(inst, sched,
                                        parts_mode=args.parts_mode).violations
    if violations:
        for v in violations:
            print(f"violation: {v}")
        return 1
    print("ok")
    return 0


def cli_main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    handlers = {
        "solve": _cmd_solve,
        "generate": _cmd_generate,
        "bench": _cmd_bench,
        "validate": _cmd_validate,
    }
    try:
        return handlers[args.command](args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CureschedError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(cli_main())
