"""Exact single-objective minimization over BiObjectivePrograms.

Reference backend: depth-first branch and bound over the integer variables
in declaration order (lower value first), with incremental activity-bound
constraint propagation and an objective cutoff row.  Dependency-free and
deterministic: two runs on identical inputs return identical assignments.

Also hosts the two-stage lexicographic solve used by the frontier search,
an LP-format exporter, and a parser for external solver solutions.
"""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass

from .core import (Assignment, Constraint, CriterionPoint, EvshareError,
                   evaluate, expr)


class SolverError(EvshareError):
    pass


class SolutionParseError(EvshareError):
    pass


class SolutionValidationError(EvshareError):
    pass


@dataclass(frozen=True)
class SolverConfig:
    zeta: int = 1             # strict-inequality offset in minor units
    node_limit: int = None    # None = unlimited
    deterministic: bool = True  # the reference backend is always deterministic

    def __post_init__(self):
        if self.zeta < 1:
            raise SolverError("zeta must be at least one minor unit")
        if self.node_limit is not None and self.node_limit < 1:
            raise SolverError("node_limit must be positive when set")


@dataclass(frozen=True)
class SolveOutcome:
    status: str               # optimal | infeasible | node-limit
    assignment: Assignment    # when optimal
    value: int                # when optimal
    nodes_explored: int


@dataclass(frozen=True)
class LexOutcome:
    """Result of a two-stage lexicographic minimization."""

    status: str               # optimal | infeasible | node-limit
    assignment: Assignment
    point: CriterionPoint
    nodes_explored: int
    solves: int = 0           # single-objective solves actually performed


class _NodeLimitHit(Exception):
    pass


class _Search:
    """One branch-and-bound run over a compiled row system."""

    def __init__(self, program, objective_index, extra_constraints, config):
        variables = program.variables
        self.ids = [v.id for v in variables]
        self.n = len(variables)
        index = {vid: i for i, vid in enumerate(self.ids)}
        self.lower = [v.lower for v in variables]
        self.upper = [v.upper for v in variables]

        row_vars, row_coefs, row_sense, row_rhs = [], [], [], []
        for con in list(program.constraints) + list(extra_constraints):
            try:
                rv = [index[vid] for vid in con.expression.terms]
            except KeyError as exc:
                raise SolverError(f"constraint {con.name!r} references undeclared {exc}") from None
            row_vars.append(rv)
            row_coefs.append(list(con.expression.terms.values()))
            row_sense.append(con.sense)
            row_rhs.append(con.rhs - con.expression.constant)

        objective = program.objective(objective_index)
        self.obj_const = objective.constant
        self.obj_row = len(row_vars)
        row_vars.append([index[vid] for vid in objective.terms])
        row_coefs.append(list(objective.terms.values()))
        row_sense.append("<=")
        row_rhs.append(None)  # dynamic cutoff, set once an incumbent exists

        self.row_vars = row_vars
        self.row_coefs = row_coefs
        self.row_sense = row_sense
        self.row_rhs = row_rhs
        self.nrows = len(row_vars)

        var_rows = [[] for _ in range(self.n)]
        for r in range(self.nrows):
            for v, c in zip(row_vars[r], row_coefs[r]):
                var_rows[v].append((r, c))
        self.var_rows = var_rows

        amin = [0] * self.nrows
        amax = [0] * self.nrows
        for r in range(self.nrows):
            lo = hi = 0
            for v, c in zip(row_vars[r], row_coefs[r]):
                a = c * self.lower[v]
                b = c * self.upper[v]
                if a <= b:
                    lo += a
                    hi += b
                else:
                    lo += b
                    hi += a
            amin[r] = lo
            amax[r] = hi
        self.amin = amin
        self.amax = amax

        self.in_queue = [False] * self.nrows
        self.trail = []
        self.cutoff = None     # row-space objective cutoff (rhs for obj_row)
        self.best_value = None
        self.best_values = None
        self.nodes = 0
        self.node_limit = config.node_limit

    # -- bound updates ------------------------------------------------------

    def _change(self, v, new_lower, new_upper, queue):
        lower, upper = self.lower, self.upper
        old_l, old_u = lower[v], upper[v]
        self.trail.append((v, old_l, old_u))
        lower[v] = new_lower
        upper[v] = new_upper
        amin, amax, in_queue = self.amin, self.amax, self.in_queue
        dl = new_lower - old_l
        du = new_upper - old_u
        for r, c in self.var_rows[v]:
            if c > 0:
                if dl:
                    amin[r] += c * dl
                if du:
                    amax[r] += c * du
            else:
                if du:
                    amin[r] += c * du
                if dl:
                    amax[r] += c * dl
            if not in_queue[r]:
                in_queue[r] = True
                queue.append(r)
        return new_lower <= new_upper

    def _undo(self, mark):
        lower, upper, amin, amax = self.lower, self.upper, self.amin, self.amax
        trail = self.trail
        while len(trail) > mark:
            v, old_l, old_u = trail.pop()
            dl = old_l - lower[v]
            du = old_u - upper[v]
            for r, c in self.var_rows[v]:
                if c > 0:
                    if dl:
                        amin[r] += c * dl
                    if du:
                        amax[r] += c * du
                else:
                    if du:
                        amin[r] += c * du
                    if dl:
                        amax[r] += c * dl
            lower[v] = old_l
            upper[v] = old_u

    # -- propagation --------------------------------------------------------

    def _seed(self, rows):
        """Start a propagation queue; entries are flagged as queued."""
        queue = []
        in_queue = self.in_queue
        for r in rows:
            if not in_queue[r]:
                in_queue[r] = True
                queue.append(r)
        return queue

    def _propagate(self, queue):
        """Run the queue (already flagged) to fixpoint; False on infeasibility."""
        in_queue = self.in_queue
        lower, upper = self.lower, self.upper
        amin, amax = self.amin, self.amax
        row_vars, row_coefs = self.row_vars, self.row_coefs
        row_sense, row_rhs = self.row_sense, self.row_rhs
        obj_row = self.obj_row
        head = 0
        while head < len(queue):
            r = queue[head]
            head += 1
            in_queue[r] = False
            sense = row_sense[r]
            rhs = self.cutoff if r == obj_row else row_rhs[r]
            if rhs is None:
                continue
            rv = row_vars[r]
            rc = row_coefs[r]
            if sense != ">=":
                # upper side: sum <= rhs
                if amin[r] > rhs:
                    for rr in queue[head:]:
                        in_queue[rr] = False
                    return False
                slack = rhs - amin[r]
                for v, c in zip(rv, rc):
                    lo = lower[v]
                    up = upper[v]
                    if lo == up:
                        continue
                    if c > 0:
                        new_u = lo + slack // c
                        if new_u < up:
                            if not self._change(v, lo, new_u, queue):
                                for rr in queue[head:]:
                                    in_queue[rr] = False
                                return False
                            slack = rhs - amin[r]
                    else:
                        new_l = up - slack // -c
                        if new_l > lo:
                            if not self._change(v, new_l, up, queue):
                                for rr in queue[head:]:
                                    in_queue[rr] = False
                                return False
                            slack = rhs - amin[r]
            if sense != "<=":
                # lower side: sum >= rhs
                if amax[r] < rhs:
                    for rr in queue[head:]:
                        in_queue[rr] = False
                    return False
                need = rhs - amax[r]
                for v, c in zip(rv, rc):
                    lo = lower[v]
                    up = upper[v]
                    if lo == up:
                        continue
                    if c > 0:
                        new_l = up - (-need) // c
                        if new_l > lo:
                            if not self._change(v, new_l, up, queue):
                                for rr in queue[head:]:
                                    in_queue[rr] = False
                                return False
                            need = rhs - amax[r]
                    else:
                        new_u = lo + need // c
                        if new_u < up:
                            if not self._change(v, lo, new_u, queue):
                                for rr in queue[head:]:
                                    in_queue[rr] = False
                                return False
                            need = rhs - amax[r]
        return True

    # -- search -------------------------------------------------------------

    def _record_leaf(self):
        raw = self.amin[self.obj_row]
        value = raw + self.obj_const
        if self.best_value is None or value < self.best_value:
            self.best_value = value
            self.best_values = self.lower[:]
            self.cutoff = raw - 1

    def _dfs(self, start):
        self.nodes += 1
        if self.node_limit is not None and self.nodes > self.node_limit:
            raise _NodeLimitHit
        lower, upper = self.lower, self.upper
        n = self.n
        i = start
        while i < n and lower[i] == upper[i]:
            i += 1
        if i == n:
            self._record_leaf()
            return
        pivot = lower[i]
        for branch_lower, branch_upper in ((pivot, pivot), (pivot + 1, self.upper[i])):
            if branch_lower > branch_upper:
                continue
            mark = len(self.trail)
            queue = self._seed([self.obj_row] if self.cutoff is not None else [])
            if self._change(i, branch_lower, branch_upper, queue):
                if self._propagate(queue):
                    self._dfs(i)
            else:
                for r in queue:
                    self.in_queue[r] = False
            self._undo(mark)

    def run(self):
        limit_hit = False
        if self._propagate(self._seed(range(self.nrows))):
            try:
                self._dfs(0)
            except _NodeLimitHit:
                limit_hit = True
        if limit_hit:
            return SolveOutcome("node-limit", None, None, self.nodes)
        if self.best_value is None:
            return SolveOutcome("infeasible", None, None, self.nodes)
        assignment = Assignment(dict(zip(self.ids, self.best_values)))
        return SolveOutcome("optimal", assignment, self.best_value, self.nodes)


def solve_min(program, objective_index, extra_constraints=(), config=SolverConfig()):
    """Global minimum of one objective over the program plus extra constraints."""
    search = _Search(program, objective_index, extra_constraints, config)
    depth_need = 10 * search.n + 1000
    if sys.getrecursionlimit() < depth_need:
        sys.setrecursionlimit(depth_need)
    return search.run()


def rectangle_constraints(program, rectangle):
    """Inclusive box bounds on both objective values, as four linear rows.

    Strict corners must be pre-offset by zeta by the caller; the solver never
    adjusts them.
    """
    if rectangle is None:
        return []
    tl, br = rectangle.top_left, rectangle.bottom_right
    o1, o2 = program.objective1, program.objective2
    return [
        Constraint(o1, ">=", tl.z1, "rect-z1-lo"),
        Constraint(o1, "<=", br.z1, "rect-z1-hi"),
        Constraint(o2, ">=", br.z2, "rect-z2-lo"),
        Constraint(o2, "<=", tl.z2, "rect-z2-hi"),
    ]


def lexmin(program, order, rectangle=None, config=SolverConfig(), extra_constraints=()):
    """Two-stage lexicographic minimization inside an objective-space box.

    order is (1, 2) or (2, 1).  Stage one minimizes the first listed
    objective under the rectangle bounds; stage two minimizes the other with
    the first held at its optimum by an equality constraint.
    """
    first, second = order
    if {first, second} != {1, 2}:
        raise SolverError(f"order must be a permutation of (1, 2), got {order!r}")
    box = rectangle_constraints(program, rectangle) + list(extra_constraints)
    stage1 = solve_min(program, first, box, config)
    if stage1.status != "optimal":
        return LexOutcome(stage1.status, None, None, stage1.nodes_explored, 1)
    pin = Constraint(program.objective(first), "=", stage1.value, "lex-stage1-pin")
    stage2 = solve_min(program, second, box + [pin], config)
    nodes = stage1.nodes_explored + stage2.nodes_explored
    if stage2.status != "optimal":
        return LexOutcome(stage2.status, None, None, nodes, 2)
    point = CriterionPoint(evaluate(program.objective1, stage2.assignment),
                           evaluate(program.objective2, stage2.assignment))
    return LexOutcome("optimal", stage2.assignment, point, nodes, 2)


# ---------------------------------------------------------------------------
# External solver adapter: LP text out, "name value" listing in.

_LP_NAME = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")


def _lp_name(vid):
    if not _LP_NAME.match(vid):
        raise SolverError(f"variable id {vid!r} is not LP-format safe")
    return vid


def _lp_terms(expression):
    parts = []
    for vid, coef in expression.sorted_terms():
        name = _lp_name(vid)
        if not parts:
            prefix = "- " if coef < 0 else ""
            parts.append(f"{prefix}{abs(coef)} {name}")
        else:
            sign = "-" if coef < 0 else "+"
            parts.append(f"{sign} {abs(coef)} {name}")
    if not parts:
        parts.append("0")
    return " ".join(parts)


def export_lp(program, objective_index, extra_constraints=()):
    """Render one objective's ILP in the industry LP text format."""
    objective = program.objective(objective_index)
    lines = ["Minimize"]
    obj_terms = _lp_terms(objective)
    if objective.constant:
        sign = "-" if objective.constant < 0 else "+"
        obj_terms += f" {sign} {abs(objective.constant)}"
    lines.append(f" obj: {obj_terms}")
    lines.append("Subject To")
    sense_text = {"<=": "<=", ">=": ">=", "=": "="}
    for idx, con in enumerate(list(program.constraints) + list(extra_constraints)):
        label = re.sub(r"[^A-Za-z0-9_]", "_", con.name) if con.name else "row"
        rhs = con.rhs - con.expression.constant
        lines.append(f" c{idx}_{label}: {_lp_terms(con.expression)} {sense_text[con.sense]} {rhs}")
    binaries = [v.id for v in program.variables if v.kind == "binary"]
    generals = [v.id for v in program.variables if v.kind != "binary"]
    if generals:
        lines.append("Bounds")
        for v in program.variables:
            if v.kind != "binary":
                lines.append(f" {v.lower} <= {_lp_name(v.id)} <= {v.upper}")
    if binaries:
        lines.append("Binaries")
        for name in binaries:
            lines.append(f" {_lp_name(name)}")
    if generals:
        lines.append("Generals")
        for name in generals:
            lines.append(f" {_lp_name(name)}")
    lines.append("End")
    return "\n".join(lines) + "\n"


def parse_external_solution(text, program):
    """Parse a whitespace-separated `variable value` listing into an Assignment.

    Values must sit within 1e-6 of an integer; variables missing from the
    listing default to zero when zero is inside their bounds.
    """
    tokens = text.split()
    if len(tokens) % 2 != 0:
        raise SolutionParseError("expected `variable value` pairs, got an odd token count")
    var_map = program.variable_map()
    values = {}
    for name, raw in zip(tokens[::2], tokens[1::2]):
        if name not in var_map:
            raise SolutionParseError(f"unknown variable {name!r}")
        try:
            x = float(raw)
        except ValueError:
            raise SolutionParseError(f"non-numeric value {raw!r} for {name}") from None
        nearest = round(x)
        if abs(x - nearest) > 1e-6:
            raise SolutionParseError(f"value {raw} for {name} is not within 1e-6 of an integer")
        values[name] = int(nearest)
    for v in program.variables:
        if v.id not in values:
            if v.lower <= 0 <= v.upper:
                values[v.id] = 0
            else:
                raise SolutionValidationError(
                    f"variable {v.id} missing and zero is outside its bounds")
    for v in program.variables:
        if not (v.lower <= values[v.id] <= v.upper):
            raise SolutionValidationError(
                f"value {values[v.id]} for {v.id} outside bounds [{v.lower}, {v.upper}]")
    return Assignment(values)
