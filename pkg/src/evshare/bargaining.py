"""Agreement-point selection over a finite frontier.

Two families of selection rules: generalized Nash bargaining (weighted
log-gain maximization against the disagreement point) and distance
minimization to the ideal point under a min-max normalized alpha-norm,
including the infinity-norm limit.

Norm comparisons stay in exact rational arithmetic whenever every term's
power is exactly representable (always for integer alpha, and for rational
alpha when the inputs happen to be perfect powers); only genuinely
irrational powers fall back to floats.
"""

import math
from dataclasses import dataclass
from fractions import Fraction

from .core import CriterionPoint, EvshareError
from . import solver as _solver

INFINITY = math.inf


class BargainError(EvshareError):
    """Invalid bargaining parameters or an empty/degenerate selection."""


def _exact(value):
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    return Fraction(str(value))


def _is_infinite(alpha):
    if isinstance(alpha, str):
        return alpha.strip().lower() in ("inf", "infinity")
    try:
        return math.isinf(alpha)
    except TypeError:
        return False


# ---------------------------------------------------------------------------
# Reference points.


@dataclass(frozen=True)
class ReferencePoints:
    """Ideal (per-objective minima) and disagreement (standalone costs)."""

    ideal: CriterionPoint
    disagreement: CriterionPoint

    def __post_init__(self):
        if (self.ideal.z1 > self.disagreement.z1
                or self.ideal.z2 > self.disagreement.z2):
            raise BargainError(
                f"ideal {self.ideal.as_tuple()} exceeds disagreement "
                f"{self.disagreement.as_tuple()}")


@dataclass(frozen=True)
class BargainConfig:
    """Selection rule and its parameter.

    mode is one of "gnb", "alpha-norm", "inf-norm"; pi is the first
    company's bargaining strength (gnb), alpha the norm exponent.
    """

    mode: str = "gnb"
    pi: Fraction = Fraction(1, 2)
    alpha: Fraction = Fraction(2)

    def __post_init__(self):
        if self.mode not in ("gnb", "alpha-norm", "inf-norm"):
            raise BargainError(f"unknown bargaining mode {self.mode!r}")
        pi = _exact(self.pi)
        if not 0 < pi < 1:
            raise BargainError(f"pi must lie strictly inside (0, 1), got {self.pi!r}")
        object.__setattr__(self, "pi", pi)
        if not _is_infinite(self.alpha):
            alpha = _exact(self.alpha)
            if alpha <= 0:
                raise BargainError(f"alpha must be positive, got {self.alpha!r}")
            object.__setattr__(self, "alpha", alpha)


def reference_points(program, participation, config=_solver.SolverConfig()):
    """Ideal point from two single-objective solves; disagreement verbatim.

    Both solves run inside the participation region so the ideal can never
    fall outside the disagreement box.
    """
    from .frontier import participation_constraints          # circular-safe

    caps = participation_constraints(program, participation)
    best1 = _solver.solve_min(program, 1, caps, config)
    if best1.status != "optimal":
        raise BargainError(f"objective-1 minimization ended {best1.status}")
    best2 = _solver.solve_min(program, 2, caps, config)
    if best2.status != "optimal":
        raise BargainError(f"objective-2 minimization ended {best2.status}")
    ideal = CriterionPoint(best1.value, best2.value)
    disagreement = CriterionPoint(participation.z1_non, participation.z2_non)
    return ReferencePoints(ideal, disagreement)


# ---------------------------------------------------------------------------
# Generalized Nash bargaining.

_GNB_REL_TIE = 1e-12


def _log_gain_ties(a, b):
    """True when two log-objective values differ by < 1e-12 relatively."""
    diff = abs(a - b)
    scale = max(abs(a), abs(b))
    return diff == 0.0 or diff <= _GNB_REL_TIE * scale


def gnb_select(points, disagreement, pi):
    """Maximize gain1^pi * gain2^(1-pi) against the disagreement point.

    Computed as pi*ln(gain1) + (1-pi)*ln(gain2) over points where both
    gains are positive; points with a zero (or negative) gain rank strictly
    below every positive-gain point.  Near-equal log objectives (relative
    difference below 1e-12) tie; ties go to the smallest z1, then z2.
    """
    pi = _exact(pi)
    if not 0 < pi < 1:
        raise BargainError(f"pi must lie strictly inside (0, 1), got {pi!r}")
    ordered = sorted(points, key=CriterionPoint.as_tuple)
    if not ordered:
        raise BargainError("cannot bargain over an empty point set")
    weight1 = float(pi)
    weight2 = float(1 - pi)
    best = None
    best_value = None
    for point in ordered:
        gain1 = disagreement.z1 - point.z1
        gain2 = disagreement.z2 - point.z2
        if gain1 <= 0 or gain2 <= 0:
            if best is None:
                best = point        # placeholder until a positive-gain point
            continue
        value = weight1 * math.log(gain1) + weight2 * math.log(gain2)
        if best_value is None or (value > best_value
                                  and not _log_gain_ties(value, best_value)):
            best, best_value = point, value
    return best


# ---------------------------------------------------------------------------
# Alpha-norm distances.


def _integer_root(value, degree):
    """Exact integer degree-th root of a non-negative int, or None."""
    if value < 0:
        return None
    if value in (0, 1) or degree == 1:
        return value
    low, high = 0, 1 << (value.bit_length() // degree + 1)
    while low < high:
        mid = (low + high + 1) // 2
        if mid ** degree <= value:
            low = mid
        else:
            high = mid - 1
    return low if low ** degree == value else None


def _exact_power(base, alpha):
    """base**alpha as an exact Fraction, or None when irrational."""
    base = abs(_exact(base))
    if base == 0:
        return Fraction(0)
    powered = base ** alpha.numerator
    if alpha.denominator == 1:
        return powered
    num = _integer_root(powered.numerator, alpha.denominator)
    den = _integer_root(powered.denominator, alpha.denominator)
    if num is None or den is None:
        return None
    return Fraction(num, den)


def power_sum(values, alpha):
    """Sum of |v|**alpha, exact (Fraction) when every term is; float otherwise.

    Monotone in the alpha-norm, so argmin comparisons can use it directly
    without extracting the final root.
    """
    alpha = _exact(alpha)
    if alpha <= 0:
        raise BargainError(f"alpha must be positive, got {alpha!r}")
    total = Fraction(0)
    exact = True
    for value in values:
        term = _exact_power(value, alpha)
        if term is None:
            exact = False
            break
        total += term
    if exact:
        return total
    return math.fsum(abs(float(_exact(v))) ** float(alpha) for v in values)


def alpha_norm(values, alpha):
    """(sum |v|**alpha)**(1/alpha); the max coordinate for infinite alpha."""
    values = list(values)
    if _is_infinite(alpha):
        if not values:
            return Fraction(0)
        return max(abs(_exact(v)) for v in values)
    alpha = _exact(alpha)
    total = power_sum(values, alpha)
    if isinstance(total, Fraction):
        root = _exact_power(total, 1 / alpha)
        if root is not None:
            return root
        total = float(total)
    return total ** (1 / float(alpha))


def distance_select(points, refs, alpha):
    """Pick the point nearest the ideal under the normalized alpha-norm.

    Coordinates are min-max normalized by the ideal/disagreement box before
    measuring; ties go to the smallest z1, then z2.  Pass math.inf (or
    "inf") for the min-max rule.
    """
    span1 = refs.disagreement.z1 - refs.ideal.z1
    span2 = refs.disagreement.z2 - refs.ideal.z2
    if span1 <= 0 or span2 <= 0:
        raise BargainError(
            f"degenerate normalization spans ({span1}, {span2}); "
            "disagreement must strictly exceed ideal in both coordinates")
    ordered = sorted(points, key=CriterionPoint.as_tuple)
    if not ordered:
        raise BargainError("cannot bargain over an empty point set")
    infinite = _is_infinite(alpha)
    if not infinite:
        alpha = _exact(alpha)
    best = None
    best_key = None
    for point in ordered:
        f1 = abs(Fraction(point.z1 - refs.ideal.z1, span1))
        f2 = abs(Fraction(point.z2 - refs.ideal.z2, span2))
        key = max(f1, f2) if infinite else power_sum((f1, f2), alpha)
        if best_key is None or key < best_key:
            best, best_key = point, key
    return best


def bargain_select(points, refs, config):
    """Dispatch to the configured selection rule."""
    if config.mode == "gnb":
        return gnb_select(points, refs.disagreement, config.pi)
    if config.mode == "inf-norm":
        return distance_select(points, refs, INFINITY)
    return distance_select(points, refs, config.alpha)
