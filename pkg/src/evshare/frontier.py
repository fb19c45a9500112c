"""Exact and reduced Pareto frontiers for bi-objective integer programs.

Three search strategies over objective-space rectangles, all driven by the
same branch-and-bound backend:

  * ``bbox``  -- exhaustive rectangle subdivision; returns every
    non-dominated point inside the participation region.
  * ``b3m1``  -- same exploration, but a freshly found point that lies
    within the closeness margins of an already retained point is dropped,
    pruning near-duplicate points (and their child rectangles).
  * ``b3m2``  -- rectangles are shrunk by the margins before they are
    searched, skipping whole regions that cannot contain a point farther
    than the margins from the retained corners.  Candidates from a shrunk
    box are certified non-dominated with two extra solves before being
    recorded.

All objective values are fixed-point integers (minor currency units).  The
strict-inequality offset ``zeta`` of the solver configuration (1 minor unit
by default) converts open bounds into closed integer bounds.
"""

import csv
import io
import math
import time
from collections import deque
from dataclasses import dataclass
from fractions import Fraction

from .core import (
    Constraint,
    CriterionPoint,
    EvshareError,
)
from . import solver as _solver


class FrontierError(EvshareError):
    """Invalid frontier parameters or malformed frontier artifacts."""


# ---------------------------------------------------------------------------
# Value objects.


@dataclass(frozen=True)
class Rectangle:
    """Axis-aligned objective-space box between two criterion points.

    ``top_left`` has the smaller z1 and larger z2; ``bottom_right`` the
    larger z1 and smaller z2.  Both corners are inclusive.
    """

    top_left: CriterionPoint
    bottom_right: CriterionPoint

    def __post_init__(self):
        if (self.top_left.z1 > self.bottom_right.z1
                or self.top_left.z2 < self.bottom_right.z2):
            raise FrontierError(
                f"invalid rectangle corners {self.top_left.as_tuple()} .. "
                f"{self.bottom_right.as_tuple()}")

    def z2_extent(self):
        return self.top_left.z2 - self.bottom_right.z2


@dataclass(frozen=True)
class ClosenessMargins:
    """Distance thresholds below which two points count as interchangeable.

    ``sigma1``/``sigma2`` are fixed-point integer distances along z1/z2;
    ``epsilon`` keeps the originating tolerance (a Fraction, e.g. 3/100)
    for reporting.
    """

    sigma1: int
    sigma2: int
    epsilon: Fraction

    def __post_init__(self):
        if self.sigma1 < 0 or self.sigma2 < 0:
            raise FrontierError("closeness margins must be non-negative")


@dataclass(frozen=True)
class ParticipationPoint:
    """Per-company standalone costs; collaboration must not exceed them."""

    z1_non: int
    z2_non: int


@dataclass(frozen=True)
class FrontierResult:
    """Outcome of one frontier run.

    ``points`` is a tuple of (CriterionPoint, Assignment) pairs sorted by
    ascending z1.  ``status`` is "ok", or "no-collaboration" when the
    participation region is empty (then ``points`` is empty too).
    ``epsilon`` is the tolerance as a percentage (exact Fraction).
    """

    method: str
    epsilon: Fraction
    points: tuple
    solver_calls: int
    wall_time: float
    rectangles_processed: int
    status: str

    def criterion_points(self):
        return tuple(p for p, _ in self.points)


METHODS = ("bbox", "b3m1", "b3m2")


# ---------------------------------------------------------------------------
# Margins and closeness predicates.


def _exact(value):
    """Exact Fraction from int/str/float/Fraction (floats via repr)."""
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    return Fraction(str(value))


def _half_up(fraction):
    """Round an exact non-negative Fraction to int, ties away from zero."""
    return int((2 * fraction + 1) // 2) if fraction >= 0 else -int((-2 * fraction + 1) // 2)


def compute_margins(epsilon, z_top, z_bottom):
    """Margins from a relative tolerance and the frontier's extreme points.

    ``epsilon`` is the tolerance as a plain fraction (0.03 for 3%); sigma1
    scales the top-left z1, sigma2 the bottom-right z2, each rounded
    half-up to a whole fixed-point unit.
    """
    eps = _exact(epsilon)
    if eps < 0:
        raise FrontierError(f"closeness tolerance must be >= 0, got {epsilon!r}")
    sigma1 = _half_up(eps * z_top.z1)
    sigma2 = _half_up(eps * z_bottom.z2)
    return ClosenessMargins(sigma1, sigma2, eps)


def strictly_close(point, others, margins):
    """True if some point of ``others`` is within BOTH margins (inclusive).

    "Strict" means both coordinates must be close simultaneously, as
    opposed to the either-coordinate rule of relaxed_close.
    """
    return any(abs(point.z1 - q.z1) <= margins.sigma1
               and abs(point.z2 - q.z2) <= margins.sigma2
               for q in others)


def relaxed_close(point, others, margins):
    """True if some point of ``others`` is within EITHER margin (inclusive)."""
    return any(abs(point.z1 - q.z1) <= margins.sigma1
               or abs(point.z2 - q.z2) <= margins.sigma2
               for q in others)


# ---------------------------------------------------------------------------
# Rectangle surgery.


def split_rectangle(rect):
    """Split at the floor midpoint of the z2 range.

    Returns (top, bottom) sharing the mid line, or None when the rectangle
    has no z2 extent to split.
    """
    if rect.z2_extent() <= 0:
        return None
    mid = (rect.top_left.z2 + rect.bottom_right.z2) // 2
    top = Rectangle(rect.top_left,
                    CriterionPoint(rect.bottom_right.z1, mid))
    bottom = Rectangle(CriterionPoint(rect.top_left.z1, mid),
                       rect.bottom_right)
    return top, bottom


def shrink_rectangle(rect, margins):
    """Pull both corners inward by (sigma1, sigma2).

    Returns the shrunk rectangle, or None when the margins swallow it
    entirely (the caller should drop such a rectangle unsearched).
    """
    tl = CriterionPoint(rect.top_left.z1 + margins.sigma1,
                        rect.top_left.z2 - margins.sigma2)
    br = CriterionPoint(rect.bottom_right.z1 - margins.sigma1,
                        rect.bottom_right.z2 + margins.sigma2)
    if tl.z1 > br.z1 or tl.z2 < br.z2:
        return None
    return Rectangle(tl, br)


# ---------------------------------------------------------------------------
# Participation bounds and the initial box.


def participation_constraints(program, participation):
    """Rows capping each company's objective at its standalone cost."""
    if participation is None:
        return []
    return [
        Constraint(program.objective1, "<=", participation.z1_non, "participation-z1"),
        Constraint(program.objective2, "<=", participation.z2_non, "participation-z2"),
    ]


def initial_box(program, participation=None, config=_solver.SolverConfig()):
    """Locate the frontier's endpoints inside the participation region.

    Returns (z_top, z_bottom, assignments, solves) where assignments maps
    each endpoint to a witness.  Returns None when the participation region
    contains no feasible point at all -- collaboration cannot make both
    parties at least as well off as standing alone.
    """
    caps = participation_constraints(program, participation)
    top = _solver.lexmin(program, (1, 2), None, config, caps)
    if top.status == "infeasible":
        return None
    if top.status != "optimal":
        raise FrontierError(f"endpoint search ended with status {top.status}")
    bottom = _solver.lexmin(program, (2, 1), None, config, caps)
    if bottom.status != "optimal":
        raise FrontierError(f"endpoint search ended with status {bottom.status}")
    assignments = {top.point: top.assignment}
    assignments.setdefault(bottom.point, bottom.assignment)
    return top.point, bottom.point, assignments, top.solves + bottom.solves


# ---------------------------------------------------------------------------
# The rectangle engine.


class _Run:
    """Mutable state shared by the three strategies during one run."""

    def __init__(self, program, participation, config, margins):
        self.program = program
        self.participation = participation
        self.config = config
        self.margins = margins
        self.caps = participation_constraints(program, participation)
        self.recorded = {}
        self.solver_calls = 0
        self.rectangles = 0

    def lexmin(self, order, rectangle):
        out = _solver.lexmin(self.program, order, rectangle, self.config)
        self.solver_calls += out.solves
        if out.status == "node-limit":
            raise FrontierError("node limit exhausted during rectangle search")
        return out

    def record(self, point, assignment):
        self.recorded[point] = assignment

    def certify_nondominated(self, point):
        """Check nothing in the participation region dominates ``point``.

        Two single-objective solves: the best z2 subject to z1 <= point.z1
        must be point.z2, and symmetrically for z1.  Needed only for
        candidates from shrunk rectangles, whose box bounds no longer
        guarantee non-dominance.
        """
        cap1 = Constraint(self.program.objective1, "<=", point.z1, "certify-z1")
        cap2 = Constraint(self.program.objective2, "<=", point.z2, "certify-z2")
        best2 = _solver.solve_min(self.program, 2, self.caps + [cap1], self.config)
        self.solver_calls += 1
        if best2.status != "optimal" or best2.value < point.z2:
            return False
        best1 = _solver.solve_min(self.program, 1, self.caps + [cap2], self.config)
        self.solver_calls += 1
        return best1.status == "optimal" and best1.value >= point.z1


def _search_bottom(run, rect_bottom):
    """Lexicographic (z1, z2) minimum over the bottom half-rectangle."""
    return run.lexmin((1, 2), rect_bottom)


def _search_top(run, rect_top):
    """Lexicographic (z2, z1) minimum over the (tightened) top rectangle."""
    return run.lexmin((2, 1), rect_top)


def _run_rectangles(method, run, z_top, z_bottom):
    """FIFO rectangle subdivision between the two frontier endpoints."""
    zeta = run.config.zeta
    queue = deque()
    if z_top != z_bottom:
        queue.append(Rectangle(z_top, z_bottom))
    while queue:
        rect = queue.popleft()
        run.rectangles += 1

        search_box = rect
        if method == "b3m2":
            search_box = shrink_rectangle(rect, run.margins)
            if search_box is None:
                continue
        if search_box.z2_extent() > 0:
            mid = (search_box.top_left.z2 + search_box.bottom_right.z2) // 2
        elif method == "b3m2":
            mid = search_box.bottom_right.z2  # shrunk to a single z2 line
        else:
            continue
        bottom_half = Rectangle(CriterionPoint(search_box.top_left.z1, mid),
                                search_box.bottom_right)

        # --- bottom search: leftmost point with z2 at or below the mid line.
        found_bottom = None          # newly recorded point, if any
        top_z1_cap = search_box.bottom_right.z1
        bottom = _search_bottom(run, bottom_half)
        if bottom.status == "optimal":
            candidate = bottom.point
            top_z1_cap = candidate.z1 - zeta
            if candidate not in run.recorded:
                if method == "b3m1" and strictly_close(
                        candidate, (rect.bottom_right,), run.margins):
                    pass  # prune: interchangeable with the retained corner
                elif method == "b3m2" and not run.certify_nondominated(candidate):
                    pass  # dominated outside the shrunk box; keep the cap
                else:
                    run.record(candidate, bottom.assignment)
                    found_bottom = candidate
                    queue.append(Rectangle(candidate, rect.bottom_right))

        # --- top rectangle: everything above the mid line, left of the cap.
        if method == "b3m2" and found_bottom is not None:
            # Re-anchor on the recorded point, stepping a full margin left
            # (at least zeta) and a margin up, never below the mid line.
            top_z1_cap = found_bottom.z1 - max(run.margins.sigma1, zeta)
            top_floor = max(found_bottom.z2 + run.margins.sigma2, mid)
        else:
            top_floor = mid
        if top_z1_cap < search_box.top_left.z1 or top_floor > search_box.top_left.z2:
            continue
        top_box = Rectangle(search_box.top_left,
                            CriterionPoint(top_z1_cap, top_floor))

        top = _search_top(run, top_box)
        if top.status != "optimal":
            continue
        candidate = top.point
        if candidate in run.recorded:
            continue
        if method == "b3m1":
            anchors = [rect.top_left]
            anchors.append(found_bottom if found_bottom is not None
                           else rect.bottom_right)
            if strictly_close(candidate, anchors, run.margins):
                if found_bottom is not None and strictly_close(
                        candidate, (found_bottom,), run.margins):
                    # The pruned point may hide others between it and the
                    # freshly recorded one: re-queue the enlarged top part.
                    queue.append(Rectangle(rect.top_left, found_bottom))
                continue
        if method == "b3m2" and not run.certify_nondominated(candidate):
            continue
        run.record(candidate, top.assignment)
        queue.append(Rectangle(rect.top_left, candidate))


def run_method(program, participation=None, method="bbox", epsilon=0,
               config=_solver.SolverConfig()):
    """Compute a frontier with the chosen strategy.

    ``epsilon`` is the closeness tolerance as a percentage (3 means 3%);
    exact rationals and decimal strings are accepted.  ``participation``
    caps each objective at the standalone cost of its company.
    """
    if method not in METHODS:
        raise FrontierError(f"unknown method {method!r}; expected one of {METHODS}")
    eps_pct = _exact(epsilon)
    if eps_pct < 0:
        raise FrontierError(f"epsilon must be >= 0, got {epsilon!r}")
    if method == "bbox":
        eps_pct = Fraction(0)

    start = time.perf_counter()
    box = initial_box(program, participation, config)
    if box is None:
        return FrontierResult(method, eps_pct, (), 2, time.perf_counter() - start,
                              0, "no-collaboration")
    z_top, z_bottom, endpoints, endpoint_solves = box
    margins = compute_margins(eps_pct / 100, z_top, z_bottom)

    run = _Run(program, participation, config, margins)
    run.solver_calls = endpoint_solves
    for point, assignment in endpoints.items():
        run.record(point, assignment)

    _run_rectangles(method, run, z_top, z_bottom)

    ordered = tuple(sorted(run.recorded.items(), key=lambda item: item[0].as_tuple()))
    return FrontierResult(method, eps_pct, ordered, run.solver_calls,
                          time.perf_counter() - start, run.rectangles, "ok")


# ---------------------------------------------------------------------------
# Quality metrics.


def gap_metric(exact_points, reduced_points, z_top, z_bottom):
    """Mean normalized distance from dropped points to the reduced frontier.

    Distances are scaled per axis by the frontier extremes (z_top.z1,
    z_bottom.z2), combined euclidean, normalized by sqrt(2), averaged over
    the dropped points and returned as a percentage.  An empty drop set
    gives 0.0.
    """
    if z_top.z1 == 0 or z_bottom.z2 == 0:
        raise FrontierError("gap metric undefined: zero normalization bound")
    exact = list(exact_points)
    reduced = set(reduced_points)
    if not reduced:
        raise FrontierError("gap metric undefined: reduced frontier is empty")
    stray = reduced - set(exact)
    if stray:
        raise FrontierError(
            f"reduced frontier is not a subset of the exact one: {sorted(p.as_tuple() for p in stray)}")
    ignored = [p for p in exact if p not in reduced]
    if not ignored:
        return 0.0
    total = 0.0
    for p in ignored:
        best = min(math.hypot((p.z1 - q.z1) / z_top.z1, (p.z2 - q.z2) / z_bottom.z2)
                   for q in reduced)
        total += best / math.sqrt(2)
    return total / len(ignored) * 100.0


def cts_metric(base_cpu, method_cpu):
    """Relative CPU-time saving of a method over the baseline, in percent."""
    if base_cpu <= 0:
        raise FrontierError(f"baseline CPU time must be positive, got {base_cpu!r}")
    return (base_cpu - method_cpu) / base_cpu * 100.0


# ---------------------------------------------------------------------------
# CSV artifacts.

FRONTIER_HEADER = ("method", "epsilon", "index", "z1", "z2", "assignment_ref")
STATS_HEADER = ("method", "epsilon", "ndp", "solver_calls", "wall_ms",
                "gap_pct", "cts_pct")


def _epsilon_text(eps_pct):
    eps_pct = _exact(eps_pct)
    if eps_pct.denominator == 1:
        return str(eps_pct.numerator)
    return repr(float(eps_pct))


def assignment_refs(result):
    """Stable per-point labels used to cross-reference the assignments file."""
    return tuple(f"{result.method}-{index}" for index in range(len(result.points)))


def frontier_to_csv(result):
    """Render a frontier as CSV text, one row per point, sorted by z1."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(FRONTIER_HEADER)
    eps = _epsilon_text(result.epsilon)
    for index, ((point, _), ref) in enumerate(zip(result.points, assignment_refs(result))):
        writer.writerow([result.method, eps, index, point.z1, point.z2, ref])
    return out.getvalue()


def frontier_from_csv(text):
    """Parse frontier CSV back into (method, epsilon, [(point, ref), ...])."""
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != FRONTIER_HEADER:
        raise FrontierError(f"bad frontier CSV header: {rows[0] if rows else 'empty file'!r}")
    method = None
    epsilon = None
    points = []
    for lineno, row in enumerate(rows[1:], start=2):
        if not row:
            continue
        if len(row) != len(FRONTIER_HEADER):
            raise FrontierError(f"frontier CSV row {lineno}: expected "
                                f"{len(FRONTIER_HEADER)} fields, got {len(row)}")
        try:
            point = CriterionPoint(int(row[3]), int(row[4]))
        except ValueError as exc:
            raise FrontierError(f"frontier CSV row {lineno}: {exc}") from None
        if method is None:
            method, epsilon = row[0], _exact(row[1])
        elif row[0] != method:
            raise FrontierError(f"frontier CSV row {lineno}: mixed methods")
        points.append((point, row[5]))
    return method, epsilon, points


def stats_to_csv(rows):
    """Render per-run statistics rows (dicts keyed like STATS_HEADER)."""
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(STATS_HEADER)
    for row in rows:
        writer.writerow([
            row["method"],
            _epsilon_text(row["epsilon"]),
            row["ndp"],
            row["solver_calls"],
            row["wall_ms"],
            "" if row.get("gap_pct") is None else f"{row['gap_pct']:.1f}",
            "" if row.get("cts_pct") is None else f"{row['cts_pct']:.1f}",
        ])
    return out.getvalue()


def stats_from_csv(text):
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != STATS_HEADER:
        raise FrontierError(f"bad stats CSV header: {rows[0] if rows else 'empty file'!r}")
    parsed = []
    for row in rows[1:]:
        if not row:
            continue
        parsed.append({
            "method": row[0],
            "epsilon": _exact(row[1]),
            "ndp": int(row[2]),
            "solver_calls": int(row[3]),
            "wall_ms": int(row[4]),
            "gap_pct": float(row[5]) if row[5] else None,
            "cts_pct": float(row[6]) if row[6] else None,
        })
    return parsed


def stats_row(result, gap_pct=None, cts_pct=None):
    """Build one stats CSV row from a frontier result."""
    return {
        "method": result.method,
        "epsilon": result.epsilon,
        "ndp": len(result.points),
        "solver_calls": result.solver_calls,
        "wall_ms": int(round(result.wall_time * 1000)),
        "gap_pct": gap_pct,
        "cts_pct": cts_pct,
    }
