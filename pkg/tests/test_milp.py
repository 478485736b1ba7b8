"""Model builder, size accounting, LP emission, and assignment decoding.

Frozen counts for toy1 at a 2-period horizon, by hand enumeration of the
constraint families (pair-extended triple set has 5 members on heater 1):

    rows:  prefix 1, active 2, slots 2, capacity 10, rate 10, production 4,
           demand 2, mold-count 4, copies 4, initial 2, setups 4, removals 4
           -> 49 total; slope 23 rows per period plus 3 fixed rows
    binary: z 10 + w 2 = 12     integer: u 10 + prd 4 = 14

toy2 adds one part over molds {1,2}: +1 row per heater-period -> 51.
"""

import pytest

from curesched.domain import (
    AssignmentTuple,
    Mold,
    Schedule,
    schedule_makespan,
    validate_schedule,
)
from curesched.errors import InfeasibleAssignment
from curesched.lpformat import parse_lp
from curesched.milp import (
    build_model,
    check_assignment,
    emit_lp,
    extract_schedule,
    model_stats,
    schedule_to_assignment,
)

from helpers import single_mold_big, toy1, toy1_two_heaters, toy2, variant


def toy2_two_heaters():
    base = toy1_two_heaters()
    return variant(base, name="toy2h2", molds=toy2().molds, parts=toy2().parts)


def toy1_optimal_assignment():
    """Hand-built optimum: pair (1,2) cures 10+10 tires in period 1; both
    molds leave the heater in period 2."""
    return {
        "w_1": 1,
        "z_1_2_1_1": 1,
        "u_1_2_1_1": 10,
        "x_1_1_1": 1,
        "x_2_1_1": 1,
        "y_1_1_1": 1,
        "y_2_1_1": 1,
        "yp_1_1_2": 1,
        "yp_2_1_2": 1,
        "prd_1_1": 10,
        "prd_2_1": 10,
    }


# ── sizes ────────────────────────────────────────────────────────────

def test_toy1_model_counts():
    stats = model_stats(build_model(toy1(), 2))
    assert stats.n_constraints == 49
    assert stats.n_binary_vars == 12
    assert stats.n_integer_vars == 14
    assert stats.thb == 2


def test_toy2_model_counts():
    assert model_stats(build_model(toy2(), 2)).n_constraints == 51
    assert model_stats(build_model(toy2(), 2, parts_mode="global")).n_constraints == 51


def test_counts_affine_in_horizon():
    for thb, rows, nbin, nint in ((5, 118, 30, 35), (10, 233, 60, 70),
                                  (20, 463, 120, 140)):
        stats = model_stats(build_model(toy1(), thb))
        assert (stats.n_constraints, stats.n_binary_vars, stats.n_integer_vars) \
            == (rows, nbin, nint)


def test_zero_horizon_keeps_only_initial_rows():
    stats = model_stats(build_model(toy1(), 0))
    assert stats.n_constraints == 2
    assert stats.n_binary_vars == 0
    assert stats.n_integer_vars == 0


def test_parts_mode_changes_row_count_on_two_heaters():
    inst = toy2_two_heaters()
    per_heater = model_stats(build_model(inst, 2, parts_mode="per-heater"))
    global_ = model_stats(build_model(inst, 2, parts_mode="global"))
    assert per_heater.n_constraints - global_.n_constraints == 2
    assert per_heater.n_binary_vars == global_.n_binary_vars
    assert per_heater.n_integer_vars == global_.n_integer_vars


def test_part_row_shape():
    m = build_model(toy2(), 2)
    rows = [c for c in m.constraints if c.name == "parts_1_1_1"]
    assert len(rows) == 1
    row = rows[0]
    assert sorted(row.terms) == [(1, "x_1_1_1"), (1, "x_2_1_1")]
    assert row.sense == "<="
    assert row.rhs == 1


# ── assignment checking and decoding ─────────────────────────────────

def test_toy1_optimal_assignment_checks_out():
    m = build_model(toy1(), 2)
    report = check_assignment(m, toy1_optimal_assignment())
    assert report.ok, report.violations


def test_toy1_extract_schedule():
    m = build_model(toy1(), 2)
    sched = extract_schedule(m, toy1_optimal_assignment())
    assert len(sched.tuples) == 1
    t = sched.tuples[0]
    assert (t.m1, t.m2, t.q, t.heater, t.start, t.length) == (1, 2, 10, 1, 0, 1)
    assert schedule_makespan(sched) == 1
    assert validate_schedule(toy1(), sched).ok


def test_extract_rejects_demand_shortfall():
    m = build_model(toy1(), 2)
    bad = toy1_optimal_assignment()
    bad["u_1_2_1_1"] = 9
    bad["prd_1_1"] = 9
    bad["prd_2_1"] = 9
    with pytest.raises(InfeasibleAssignment) as err:
        extract_schedule(m, bad)
    assert any("demand" in v for v in err.value.violations)


def test_extract_rejects_capacity_overrun():
    m = build_model(toy1(), 2)
    bad = toy1_optimal_assignment()
    bad["u_1_2_1_1"] = 37  # rate cap is floor(14400/400) = 36
    bad["prd_1_1"] = 37
    bad["prd_2_1"] = 37
    with pytest.raises(InfeasibleAssignment):
        extract_schedule(m, bad)


def test_zero_demand_all_zero_assignment():
    inst = variant(
        toy1(),
        molds=tuple(Mold(m.id, m.copies, m.setup_dmin, m.removal_dmin, 0)
                    for m in toy1().molds),
    )
    m = build_model(inst, 1)
    sched = extract_schedule(m, {})
    assert sched.tuples == []
    assert schedule_makespan(sched) == 0


# ── schedule encoder (round trip through the variable space) ─────────

def test_encode_decode_round_trip_sequential():
    inst = toy2()
    sched = Schedule(tuples=[
        AssignmentTuple(1, 0, 1, 10, heater=1, start=0, length=1),
        AssignmentTuple(2, 0, 2, 10, heater=1, start=1, length=1),
    ])
    m = build_model(inst, 2)
    asg = schedule_to_assignment(m, sched)
    assert check_assignment(m, asg).ok
    assert sum(v for n, v in asg.items() if n.startswith("w_")) == 2
    back = extract_schedule(m, asg)
    assert [(t.m1, t.m2, t.q, t.heater, t.start, t.length) for t in back.tuples] \
        == [(0, 1, 10, 1, 0, 1), (0, 2, 10, 1, 1, 1)]


def test_encode_decode_round_trip_with_gap():
    # heater sits idle in period 2; mold 1 must leave during that period
    inst = toy1()
    sched = Schedule(tuples=[
        AssignmentTuple(1, 0, 1, 10, heater=1, start=0, length=1),
        AssignmentTuple(2, 0, 2, 10, heater=1, start=2, length=1),
    ])
    assert validate_schedule(inst, sched).ok
    m = build_model(inst, 3)
    asg = schedule_to_assignment(m, sched)
    assert check_assignment(m, asg).ok
    assert asg.get("yp_1_1_2") == 1
    back = extract_schedule(m, asg)
    assert [(t.m1, t.m2, t.q, t.heater, t.start, t.length) for t in back.tuples] \
        == [(0, 1, 10, 1, 0, 1), (0, 2, 10, 1, 2, 1)]


def test_encode_identical_pair_doubles_production():
    inst = single_mold_big(copies=4, heaters=2)
    sched = Schedule(tuples=[
        AssignmentTuple(1, 1, 1, 250, heater=1, start=0, length=10),
        AssignmentTuple(2, 1, 1, 250, heater=2, start=0, length=10),
    ])
    assert validate_schedule(inst, sched).ok
    m = build_model(inst, 10)
    asg = schedule_to_assignment(m, sched)
    assert check_assignment(m, asg).ok
    total = sum(v for n, v in asg.items() if n.startswith("prd_1_"))
    assert total == 1000


# ── LP emission ──────────────────────────────────────────────────────

def test_lp_sections_and_known_lines():
    text = emit_lp(build_model(toy1(), 2))
    lines = text.splitlines()
    assert " obj: w_1 + w_2" in lines
    assert "\\ eq-9 demand mold 1" in lines
    assert " demand_1: prd_1_1 + prd_1_2 >= 10" in lines
    assert " 0 <= x_1_1_0 <= 2" in lines
    order = [lines.index(s) for s in
             ("Minimize", "Subject To", "Bounds", "Generals", "Binaries", "End")]
    assert order == sorted(order)
    gen_body = text.split("Generals")[1].split("Binaries")[0]
    bin_body = text.split("Binaries")[1].split("End")[0]
    for name in ("x_1_1_0", "y_2_1_2", "yp_1_1_1", "u_1_2_1_1", "prd_2_2"):
        assert name in gen_body.split()
    for name in ("z_0_1_1_2", "z_2_2_1_1", "w_1", "w_2"):
        assert name in bin_body.split()


def test_lp_emission_byte_stable():
    a = emit_lp(build_model(toy1(), 2))
    b = emit_lp(build_model(toy1(), 2))
    assert a == b


def test_lp_round_trip_counts():
    m = build_model(toy1(), 2)
    stats = model_stats(m)
    parsed = parse_lp(emit_lp(m))
    assert len(parsed.constraints) == stats.n_constraints == 49
    assert len(parsed.binaries) == stats.n_binary_vars == 12
    upad = [v for v in parsed.generals if v.startswith(("u_", "prd_"))]
    assert len(upad) == stats.n_integer_vars == 14
    assert len(parsed.generals) == 28  # x, y, yp, u, prd


def test_lp_round_trip_wrapped_lines():
    m = build_model(single_mold_big(copies=4, heaters=2), 30)
    text = emit_lp(m)
    assert all(len(line) <= 230 for line in text.splitlines())
    parsed = parse_lp(text)
    stats = model_stats(m)
    assert len(parsed.constraints) == stats.n_constraints
    assert len(parsed.binaries) == stats.n_binary_vars
    demand_rows = [c for c in parsed.constraints if c.name == "demand_1"]
    assert len(demand_rows) == 1
    assert len(demand_rows[0].terms) == 30  # one prd per period, re-joined
    assert demand_rows[0].rhs == 1000


def test_lp_zero_horizon_objective_only_body():
    text = emit_lp(build_model(toy1(), 0))
    assert " obj: 0" in text.splitlines()
    parsed = parse_lp(text)
    assert parsed.objective == []
    assert len(parsed.constraints) == 2
    assert parsed.binaries == ()


def test_lp_parts_modes_share_variable_sections():
    per = emit_lp(build_model(toy2(), 2, parts_mode="per-heater"))
    glo = emit_lp(build_model(toy2(), 2, parts_mode="global"))
    assert per != glo
    cut = lambda s: s.split("Bounds")[1]  # bounds + generals + binaries + end
    assert cut(per) == cut(glo)
    assert "parts_1_1_1:" in per
    assert "parts_1_1:" in glo
