"""Shared test scaffolding: tiny programs with known criterion points."""

from evshare.core import (
    BiObjectiveProgram,
    Constraint,
    CriterionPoint,
    LinearExpression,
    Variable,
)


def make_point_program(points):
    """Program whose feasible criterion points are exactly ``points``.

    One binary selector per point, exactly one active.  Lets frontier and
    solver behavior be checked against plain set arithmetic.
    """
    points = [CriterionPoint(*p) if isinstance(p, tuple) else p for p in points]
    variables = tuple(Variable(f"s{i}", "binary", 0, 1) for i in range(len(points)))
    one_hot = Constraint(
        LinearExpression({v.id: 1 for v in variables}, 0), "=", 1, "pick-one")
    objective1 = LinearExpression(
        {v.id: p.z1 for v, p in zip(variables, points) if p.z1 != 0}, 0)
    objective2 = LinearExpression(
        {v.id: p.z2 for v, p in zip(variables, points) if p.z2 != 0}, 0)
    return BiObjectiveProgram(variables, (one_hot,), objective1, objective2)


def infeasible_program():
    """One binary forced both up and down."""
    x = Variable("x", "binary", 0, 1)
    up = Constraint(LinearExpression({"x": 1}, 0), ">=", 2, "force-up")
    return BiObjectiveProgram(
        (x,), (up,), LinearExpression({"x": 1}, 0), LinearExpression({"x": 1}, 0))


def selected_point(program, assignment):
    """Criterion point encoded by a selector assignment."""
    from evshare.core import criterion_point

    return criterion_point(program, assignment)
