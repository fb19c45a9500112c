"""Selecting one agreement point from a frontier.

Two selection families: the asymmetric Nash product over cost savings
(bargaining power pi tilts the pick), and closest-to-ideal under an
alpha-norm after per-axis normalization.  Both shown first on a tiny
hand-checkable set, then on a generated scenario's frontier.
"""

from fractions import Fraction

from evshare.bargaining import (
    INFINITY,
    ReferencePoints,
    distance_select,
    gnb_select,
    reference_points,
)
from evshare.charging import build_charging_program, noncollab_point
from evshare.core import CriterionPoint, format_minor
from evshare.frontier import run_method
from evshare.scenario import ScenarioConfig, generate_scenario

# --- the hand-checkable set -------------------------------------------------
pts = {CriterionPoint(4, 8), CriterionPoint(8, 4)}
d = CriterionPoint(10, 10)
print("points {(4,8), (8,4)}, disagreement (10,10):")
for pi in (Fraction(3, 10), Fraction(1, 2), Fraction(7, 10)):
    sel = gnb_select(pts, d, pi)
    print(f"  pi={float(pi):.1f} -> ({sel.z1}, {sel.z2})")
print("  (the symmetric tie at pi=0.5 resolves to the smallest z1)")

refs = ReferencePoints(CriterionPoint(0, 0), CriterionPoint(10, 10))
pts2 = {CriterionPoint(2, 8), CriterionPoint(4, 4)}
for alpha in (1, 2, INFINITY):
    sel = distance_select(pts2, refs, alpha)
    print(f"closest to ideal, alpha={alpha}: ({sel.z1}, {sel.z2})")

# --- a generated scenario ---------------------------------------------------
config = ScenarioConfig(
    ev_distribution="uniform",
    charger_layout="centralized",
    n_evs=2,
    n_chargers=2,
    seed=1037,
    horizon=6,
    window_length_h=3,
    earliest_start_range=(0, 3),
    demand_intervals=(1, 2),
    vot_sek_per_hour=200,
    rental_fee_sek=400,
)
inst = generate_scenario(config)
prog = build_charging_program(inst)
part = noncollab_point(inst)
frontier = run_method(prog, part, "bbox")
points = frontier.criterion_points()
print(f"\n{inst.name}: {len(points)} frontier points")

refs = reference_points(prog, part)
print(f"ideal ({format_minor(refs.ideal.z1)}, {format_minor(refs.ideal.z2)}), "
      f"disagreement ({format_minor(refs.disagreement.z1)}, "
      f"{format_minor(refs.disagreement.z2)}) SEK")

disagreement = CriterionPoint(part.z1_non, part.z2_non)
print("\nNash-product pick as company 1's bargaining power grows:")
for tenths in range(1, 10):
    sel = gnb_select(points, disagreement, Fraction(tenths, 10))
    print(f"  pi={tenths / 10:.1f} -> ({format_minor(sel.z1)}, {format_minor(sel.z2)})")

print("\nclosest-to-ideal picks:")
for alpha in (1, 2, INFINITY):
    sel = distance_select(points, refs, alpha)
    print(f"  alpha={alpha}: ({format_minor(sel.z1)}, {format_minor(sel.z2)})")
