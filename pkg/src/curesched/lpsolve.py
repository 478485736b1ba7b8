"""Bundled MILP solver command.

Reads an LP file, solves it with HiGHS through scipy, and writes a
solution file of `name value` lines plus an `objective <v>` line, which
is exactly what the solver adapter expects:

    python3 -m curesched.lpsolve model.lp out.sol

Exit codes: 0 when solved to proven optimality, 10 when proven
infeasible, anything else on failure.  The environment variable
CURESCHED_LPSOLVE_TIME_LIMIT (seconds) caps the solve time.
"""

import os
import sys

import numpy as np
from scipy import sparse
from scipy.optimize import Bounds, LinearConstraint, milp

from .lpformat import parse_lp

_USAGE = "usage: curesched-lpsolve <model.lp> <out.sol>"


def _variable_order(parsed):
    """Deterministic variable ordering: first appearance in the file."""
    order = []
    seen = set()

    def add(name):
        if name not in seen:
            seen.add(name)
            order.append(name)

    for _, name in parsed.objective:
        add(name)
    for row in parsed.constraints:
        for _, name in row.terms:
            add(name)
    for name in parsed.bounds:
        add(name)
    for name in parsed.generals:
        add(name)
    for name in parsed.binaries:
        add(name)
    return order


def _build_arrays(parsed, order):
    index = {name: i for i, name in enumerate(order)}
    n = len(order)

    c = np.zeros(n)
    for coef, name in parsed.objective:
        c[index[name]] += coef

    lo = np.zeros(n)
    hi = np.full(n, np.inf)
    binaries = set(parsed.binaries)
    for name in binaries:
        hi[index[name]] = 1.0
    for name, (lb, ub) in parsed.bounds.items():
        i = index[name]
        lo[i] = -np.inf if lb is None else lb
        hi[i] = np.inf if ub is None else ub

    integral = binaries | set(parsed.generals)
    integrality = np.array([1 if name in integral else 0 for name in order])

    rows, cols, vals = [], [], []
    con_lo, con_hi = [], []
    for r, row in enumerate(parsed.constraints):
        for coef, name in row.terms:
            rows.append(r)
            cols.append(index[name])
            vals.append(coef)
        if row.sense == "<=":
            con_lo.append(-np.inf)
            con_hi.append(row.rhs)
        elif row.sense == ">=":
            con_lo.append(row.rhs)
            con_hi.append(np.inf)
        else:
            con_lo.append(row.rhs)
            con_hi.append(row.rhs)
    a = sparse.csc_matrix(
        (vals, (rows, cols)), shape=(len(parsed.constraints), n))
    return c, a, np.array(con_lo), np.array(con_hi), lo, hi, integrality


def _format_value(v):
    rounded = round(float(v))
    if abs(float(v) - rounded) <= 1e-6:
        return str(int(rounded))
    return repr(float(v))


def main(argv=None) -> int:
    args = sys.argv[1:] if argv is None else list(argv)
    if len(args) != 2:
        print(_USAGE, file=sys.stderr)
        return 2
    lp_path, sol_path = args

    try:
        with open(lp_path) as fh:
            parsed = parse_lp(fh.read())
    except OSError as exc:
        print(f"cannot read {lp_path}: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"cannot parse {lp_path}: {exc}", file=sys.stderr)
        return 1

    order = _variable_order(parsed)
    if not order:
        # nothing to decide; a constant model is trivially optimal
        with open(sol_path, "w") as fh:
            fh.write("objective 0\n")
        return 0

    c, a, con_lo, con_hi, lo, hi, integrality = _build_arrays(parsed, order)

    options = {}
    raw_limit = os.environ.get("CURESCHED_LPSOLVE_TIME_LIMIT")
    if raw_limit:
        try:
            options["time_limit"] = float(raw_limit)
        except ValueError:
            print(f"ignoring bad CURESCHED_LPSOLVE_TIME_LIMIT {raw_limit!r}",
                  file=sys.stderr)

    kwargs = {"integrality": integrality, "bounds": Bounds(lo, hi)}
    if len(parsed.constraints):
        kwargs["constraints"] = LinearConstraint(a, con_lo, con_hi)
    if options:
        kwargs["options"] = options
    result = milp(c, **kwargs)

    if result.status == 2:
        print("proven infeasible", file=sys.stderr)
        return 10
    if result.status != 0 or result.x is None:
        print(f"solve failed: {result.message}", file=sys.stderr)
        return 1

    with open(sol_path, "w") as fh:
        for name, value in zip(order, result.x):
            fh.write(f"{name} {_format_value(value)}\n")
        fh.write(f"objective {_format_value(result.fun)}\n")
    return 0


if __name__ == "__main__":
    sys.exit(main())
