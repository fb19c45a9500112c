import dataclasses

import pytest
from hypothesis import given, settings, strategies as st

from evshare.charging import (
    build_charging_program,
    company_cost,
    decode_schedule,
    noncollab_point,
    validate_schedule,
)
from evshare.core import CriterionPoint, binary, check_assignment, criterion_point, expr, pareto_filter, program
from evshare.oracle import (
    BudgetExceeded,
    OracleBudget,
    brute_force_frontier,
    charging_frontier,
    noncollab_costs,
    schedule_to_assignment,
    standalone_minimum,
)
from evshare.scenario import ScenarioConfig, generate_scenario, t1_instance

from helpers import infeasible_program, make_point_program

point_sets = st.lists(
    st.tuples(st.integers(min_value=0, max_value=30), st.integers(min_value=0, max_value=30)),
    min_size=1,
    max_size=7,
)


def test_brute_force_toy_example():
    prog = make_point_program([(1, 3), (2, 2), (3, 1), (3, 3)])
    got = brute_force_frontier(prog)
    assert set(got) == {CriterionPoint(1, 3), CriterionPoint(2, 2), CriterionPoint(3, 1)}
    # returned assignments actually produce their points
    for point, assignment in got.items():
        assert check_assignment(prog, assignment) == []
        assert criterion_point(prog, assignment) == point


def test_brute_force_infeasible_is_empty():
    assert brute_force_frontier(infeasible_program()) == {}


def test_brute_force_participation_filter():
    prog = make_point_program([(1, 9), (5, 5), (9, 1)])
    got = brute_force_frontier(prog, participation=(5, 5))
    assert set(got) == {CriterionPoint(5, 5)}
    assert brute_force_frontier(prog, participation=(0, 0)) == {}


def test_brute_force_budget_refusal():
    vars40 = [binary(f"b{i}") for i in range(40)]
    prog = program(vars40, [], expr({"b0": 1}), expr({"b1": 1}))
    with pytest.raises(BudgetExceeded, match="refus"):
        brute_force_frontier(prog, budget=OracleBudget(max_candidates=1 << 20))


@given(point_sets)
@settings(max_examples=40, deadline=None)
def test_brute_force_matches_pareto_filter_on_selectors(raw):
    prog = make_point_program(raw)
    got = set(brute_force_frontier(prog))
    assert got == pareto_filter({CriterionPoint(*p) for p in raw})


def test_t1_frontier_is_the_single_shared_optimum():
    inst = t1_instance()
    participation = noncollab_costs(inst)
    assert participation == (2100, 2100)
    frontier = charging_frontier(inst, participation=participation)
    assert set(frontier) == {CriterionPoint(2100, 2100)}


def test_unconstrained_frontier_allows_free_riding():
    # halve the collaborative tariff: riding on the other company's rental
    # then beats standalone, but only outside the participation caps
    inst = t1_instance()
    cheap = dataclasses.replace(
        inst, energy_fee_collab={k: 50 for k in inst.energy_fee_collab})
    frontier = charging_frontier(cheap)
    assert min(p.z1 for p in frontier) == 600  # 10 units at 0.50 + travel 1.00
    capped = charging_frontier(cheap, participation=noncollab_costs(cheap))
    assert all(p.z1 <= 2100 and p.z2 <= 2100 for p in capped)
    assert all(not any(q != p and q.z1 <= p.z1 and q.z2 <= p.z2 for q in frontier)
               for p in frontier)


def test_charging_frontier_assignments_decode_and_cost_out():
    inst = t1_instance()
    prog = build_charging_program(inst)
    for point, assignment in charging_frontier(inst).items():
        schedule = decode_schedule(assignment, inst, prog)
        assert validate_schedule(schedule, inst) == []
        assert company_cost(schedule, inst, "k1") == point.z1
        assert company_cost(schedule, inst, "k2") == point.z2


def test_structural_budget_refusal():
    big = generate_scenario(ScenarioConfig(n_evs=6, n_chargers=3, seed=1, horizon=12,
                                           earliest_start_range=(0, 8)))
    with pytest.raises(BudgetExceeded):
        charging_frontier(big, budget=OracleBudget(max_candidates=100))


def test_standalone_minimum_matches_solver_path():
    inst = t1_instance()
    assert standalone_minimum(inst, "k1") == 2100
    assert standalone_minimum(inst, "k2") == 2100
    point = noncollab_point(inst)
    assert noncollab_costs(inst) == (point.z1_non, point.z2_non)


def test_oracle_and_solver_agree_on_generated_instances():
    for seed in (1, 2, 3):
        cfg = ScenarioConfig(n_evs=3, n_chargers=2, seed=seed, horizon=6,
                             earliest_start_range=(0, 3), demand_intervals=(1, 2))
        inst = generate_scenario(cfg)
        point = noncollab_point(inst)
        assert noncollab_costs(inst) == (point.z1_non, point.z2_non)


def test_schedule_to_assignment_is_program_feasible():
    inst = t1_instance()
    prog = build_charging_program(inst)
    for point, assignment in charging_frontier(inst, participation=(2100, 2100)).items():
        assert check_assignment(prog, assignment) == []
        back = decode_schedule(assignment, inst, prog)
        assert schedule_to_assignment(back, inst) == assignment
