"""Collaborative EV charging model: instance data, program builder, schedules.

Two companies share (or don't share) rented chargers over a discrete horizon
of unit intervals 1..T, where interval t covers clock span [t-1, t).  Each EV
charges in one contiguous session at one charger.  A company's cost is
rental fees + energy fees (own tariff at chargers it rents, collaborative
tariff at chargers the other company rents) + travel cost once per session
+ value-of-time cost for waiting past the earliest start.

All money is in integer minor units (0.01 SEK).
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import core
from .core import Constraint, EvshareError, binary, expr, integer


class InstanceError(EvshareError):
    pass


class DecodeError(EvshareError):
    pass


class CostError(EvshareError):
    pass


class InfeasibleError(EvshareError):
    pass


@dataclass(frozen=True)
class ChargingInstance:
    name: str
    companies: tuple          # exactly two company ids
    evs: tuple                # EV ids
    owner: dict               # ev id -> company id
    chargers: tuple           # charger ids
    horizon: int              # number of unit intervals T
    rental_fee: dict          # (charger, company) -> minor units per day
    energy_fee_own: dict      # (charger, interval) -> minor units per energy unit
    energy_fee_collab: dict   # (charger, interval) -> minor units per energy unit
    charge_rate: dict         # (ev, charger) -> energy units per interval
    travel_cost: dict         # (ev, charger) -> minor units per visit
    vot: dict                 # ev -> minor units per interval of waiting
    window: dict              # ev -> (earliest start e, latest finish l), interval indices
    demand: dict              # ev -> (L, H) energy bounds
    ev_positions: dict = field(default_factory=dict)       # ev -> (x, y) km, optional
    charger_positions: dict = field(default_factory=dict)  # charger -> (x, y) km, optional

    def __post_init__(self):
        if len(self.companies) != 2 or len(set(self.companies)) != 2:
            raise InstanceError("exactly two distinct companies required")
        if self.horizon < 1:
            raise InstanceError("horizon must be at least one interval")
        for i in self.evs:
            if self.owner.get(i) not in self.companies:
                raise InstanceError(f"EV {i} has no valid owning company")
            e, l = self.window[i]
            if not (0 <= e <= l <= self.horizon):
                raise InstanceError(f"EV {i}: window [{e},{l}] outside [0,{self.horizon}]")
            lo, hi = self.demand[i]
            if not (0 <= lo <= hi):
                raise InstanceError(f"EV {i}: demand bounds ({lo},{hi}) invalid")
            if self.vot[i] < 0:
                raise InstanceError(f"EV {i}: negative value of time")
            for j in self.chargers:
                if self.charge_rate[i, j] < 0 or self.travel_cost[i, j] < 0:
                    raise InstanceError(f"negative rate or travel cost for ({i},{j})")
        for j in self.chargers:
            for k in self.companies:
                if self.rental_fee[j, k] < 0:
                    raise InstanceError(f"negative rental fee for ({j},{k})")
            for t in range(1, self.horizon + 1):
                if self.energy_fee_own[j, t] < 0 or self.energy_fee_collab[j, t] < 0:
                    raise InstanceError(f"negative energy fee for ({j},{t})")

    def company_evs(self, k):
        return tuple(i for i in self.evs if self.owner[i] == k)

    def other_company(self, k):
        a, b = self.companies
        return b if k == a else a

    def intervals(self):
        return range(1, self.horizon + 1)


# Variable naming scheme (LP-format safe: no hyphens, no leading digits).
def var_x(i, j, t):
    return f"x_{i}_{j}_{t}"


def var_start(i, j, t):
    return f"xs_{i}_{j}_{t}"


def var_end(i, j, t):
    return f"xe_{i}_{j}_{t}"


def var_rent(j, k):
    return f"y_{j}_{k}"


def var_both(i, j, t, k):
    return f"u_{i}_{j}_{t}_{k}"


def var_tstart(i):
    return f"ts_{i}"


def var_tfinish(i):
    return f"tf_{i}"


def build_charging_program(instance):
    """Build the bi-objective program for a two-company charging instance.

    Variables: x (EV charges at charger in interval), xs/xe (session
    start/end indicators), y (company rents charger), u = x*y linearized,
    ts/tf (integer start/finish times).  Objective k is company k's cost.

    The builder is total: demand/window conflicts build fine and surface as
    infeasibility at solve time (see infeasibility_diagnostic).
    """
    ins = instance
    T = ins.horizon
    variables = []
    constraints = []

    # Declaration order doubles as the solver's branching order: rentals
    # first, then each EV's interval pattern; everything after is forced by
    # propagation once x and y are fixed.
    for j in ins.chargers:
        for k in ins.companies:
            variables.append(binary(var_rent(j, k)))
    for i in ins.evs:
        for j in ins.chargers:
            for t in ins.intervals():
                variables.append(binary(var_x(i, j, t)))
    for i in ins.evs:
        for j in ins.chargers:
            for t in ins.intervals():
                variables.append(binary(var_start(i, j, t)))
                variables.append(binary(var_end(i, j, t)))
    for i in ins.evs:
        for j in ins.chargers:
            for t in ins.intervals():
                for k in ins.companies:
                    variables.append(binary(var_both(i, j, t, k)))
    for i in ins.evs:
        variables.append(integer(var_tstart(i), 0, T - 1))
        variables.append(integer(var_tfinish(i), 1, T))

    add = constraints.append
    for i in ins.evs:
        for j in ins.chargers:
            for t in ins.intervals():
                # Start indicator covers every 0->1 transition of x.
                prev = {var_x(i, j, t - 1): 1} if t > 1 else {}
                add(Constraint(expr({var_start(i, j, t): 1, var_x(i, j, t): -1, **prev}),
                               ">=", 0, f"start-indicator:{i}:{j}:{t}"))
                # End indicator covers every 1->0 transition.
                nxt = {var_x(i, j, t + 1): 1} if t < T else {}
                add(Constraint(expr({var_end(i, j, t): 1, var_x(i, j, t): -1, **nxt}),
                               ">=", 0, f"end-indicator:{i}:{j}:{t}"))

    for i in ins.evs:
        add(Constraint(expr({var_start(i, j, t): 1 for j in ins.chargers for t in ins.intervals()}),
                       "=", 1, f"single-start:{i}"))
        add(Constraint(expr({var_end(i, j, t): 1 for j in ins.chargers for t in ins.intervals()}),
                       "=", 1, f"single-end:{i}"))
        for j in ins.chargers:
            terms = {var_start(i, j, t): 1 for t in ins.intervals()}
            for t in ins.intervals():
                terms[var_end(i, j, t)] = terms.get(var_end(i, j, t), 0) - 1
            add(Constraint(expr(terms), "=", 0, f"start-end-balance:{i}:{j}"))

    for j in ins.chargers:
        for t in ins.intervals():
            add(Constraint(expr({var_x(i, j, t): 1 for i in ins.evs}),
                           "<=", 1, f"charger-capacity:{j}:{t}"))

    for i in ins.evs:
        # ts = sum xs * (t-1), tf = sum xe * t, duration linkage, windows, demand.
        add(Constraint(expr({var_tstart(i): 1,
                             **{var_start(i, j, t): -(t - 1) for j in ins.chargers for t in ins.intervals()}}),
                       "=", 0, f"start-time:{i}"))
        add(Constraint(expr({var_tfinish(i): 1,
                             **{var_end(i, j, t): -t for j in ins.chargers for t in ins.intervals()}}),
                       "=", 0, f"finish-time:{i}"))
        terms = {var_x(i, j, t): 1 for j in ins.chargers for t in ins.intervals()}
        terms[var_tfinish(i)] = -1
        terms[var_tstart(i)] = 1
        add(Constraint(expr(terms), "=", 0, f"duration:{i}"))
        e, l = ins.window[i]
        add(Constraint(expr({var_tstart(i): 1}), ">=", e, f"time-window-start:{i}"))
        add(Constraint(expr({var_tfinish(i): 1}), "<=", l, f"time-window-end:{i}"))
        lo, hi = ins.demand[i]
        energy = {var_x(i, j, t): ins.charge_rate[i, j] for j in ins.chargers for t in ins.intervals()}
        add(Constraint(expr(energy), ">=", lo, f"demand-lower:{i}"))
        add(Constraint(expr(energy), "<=", hi, f"demand-upper:{i}"))

    for j in ins.chargers:
        add(Constraint(expr({var_rent(j, k): 1 for k in ins.companies}),
                       "<=", 1, f"rental-exclusive:{j}"))
        for i in ins.evs:
            for t in ins.intervals():
                add(Constraint(expr({var_x(i, j, t): 1,
                                     **{var_rent(j, k): -1 for k in ins.companies}}),
                               "<=", 0, f"rented-only:{i}:{j}:{t}"))

    for i in ins.evs:
        for j in ins.chargers:
            for t in ins.intervals():
                for k in ins.companies:
                    u = var_both(i, j, t, k)
                    add(Constraint(expr({u: 1, var_x(i, j, t): -1}), "<=", 0,
                                   f"product-le-x:{i}:{j}:{t}:{k}"))
                    add(Constraint(expr({u: 1, var_rent(j, k): -1}), "<=", 0,
                                   f"product-le-y:{i}:{j}:{t}:{k}"))
                    add(Constraint(expr({u: 1, var_x(i, j, t): -1, var_rent(j, k): -1}), ">=", -1,
                                   f"product-lb:{i}:{j}:{t}:{k}"))

    objectives = []
    for k in ins.companies:
        other = ins.other_company(k)
        terms = {}
        constant = 0
        for j in ins.chargers:
            terms[var_rent(j, k)] = ins.rental_fee[j, k]
        for i in ins.company_evs(k):
            for j in ins.chargers:
                rate = ins.charge_rate[i, j]
                for t in ins.intervals():
                    # Own tariff where company k rented, collaborative tariff
                    # where the other company rented.
                    terms[var_both(i, j, t, k)] = terms.get(var_both(i, j, t, k), 0) + \
                        ins.energy_fee_own[j, t] * rate
                    terms[var_both(i, j, t, other)] = terms.get(var_both(i, j, t, other), 0) + \
                        ins.energy_fee_collab[j, t] * rate
                for t in ins.intervals():
                    terms[var_start(i, j, t)] = terms.get(var_start(i, j, t), 0) + ins.travel_cost[i, j]
            terms[var_tstart(i)] = terms.get(var_tstart(i), 0) + ins.vot[i]
            constant -= ins.vot[i] * ins.window[i][0]
        objectives.append(expr(terms, constant))

    return core.program(variables, constraints, objectives[0], objectives[1])


def infeasibility_diagnostic(instance):
    """Name EVs that can never meet demand inside their window, or None."""
    bad = []
    for i in instance.evs:
        e, l = instance.window[i]
        span = l - e
        best = max((instance.charge_rate[i, j] for j in instance.chargers), default=0)
        lo, hi = instance.demand[i]
        if lo > best * span:
            bad.append(i)
            continue
        # Demand floor must be reachable without overshooting the cap.
        feasible_duration = False
        for j in instance.chargers:
            rate = instance.charge_rate[i, j]
            for d in range(0, span + 1):
                if lo <= rate * d <= hi:
                    feasible_duration = True
                    break
            if feasible_duration:
                break
        if not feasible_duration:
            bad.append(i)
    if bad:
        return "no feasible session for EV " + ", ".join(bad)
    return None


@dataclass(frozen=True)
class Schedule:
    """Decoded rentals and charging sessions.

    rentals: charger -> company id or None.
    sessions: ev -> (charger, start, finish) with start/finish on the
      interval-boundary scale, occupying intervals start+1 .. finish.
    occupancy: (charger, interval) -> ev.
    energy: ev -> energy units delivered.
    """

    rentals: dict
    sessions: dict
    occupancy: dict
    energy: dict


def decode_schedule(assignment, instance, program=None):
    """Extract a Schedule from a feasible assignment of the built program."""
    prog = program if program is not None else build_charging_program(instance)
    violated = core.check_assignment(prog, assignment)
    if violated:
        shown = ", ".join(violated[:8])
        raise DecodeError(f"assignment violates constraints: {shown}")
    values = assignment.values
    rentals = {}
    for j in instance.chargers:
        renter = [k for k in instance.companies if values[var_rent(j, k)] == 1]
        rentals[j] = renter[0] if renter else None
    sessions = {}
    occupancy = {}
    energy = {}
    for i in instance.evs:
        start = values[var_tstart(i)]
        finish = values[var_tfinish(i)]
        charger = None
        for j in instance.chargers:
            for t in instance.intervals():
                if values[var_start(i, j, t)] == 1:
                    charger = j
        sessions[i] = (charger, start, finish)
        active = 0
        for t in range(start + 1, finish + 1):
            occupancy[sessions[i][0], t] = i
            active += 1
        energy[i] = instance.charge_rate[i, charger] * active if charger is not None else 0
    return Schedule(rentals, sessions, occupancy, energy)


def validate_schedule(schedule, instance):
    """Re-check a decoded schedule against the instance; empty list iff valid."""
    violations = []
    seen = {}
    for j, k in schedule.rentals.items():
        if k is not None and k not in instance.companies:
            violations.append(f"rental-exclusive: charger {j}")
    for i in instance.evs:
        if i not in schedule.sessions:
            violations.append(f"missing-session: {i}")
            continue
        j, start, finish = schedule.sessions[i]
        if j not in instance.chargers or not (0 <= start <= finish <= instance.horizon):
            violations.append(f"session-bounds: {i}")
            continue
        e, l = instance.window[i]
        if start < e or finish > l:
            violations.append(f"time-window: {i}")
        lo, hi = instance.demand[i]
        delivered = instance.charge_rate[i, j] * (finish - start)
        if not (lo <= delivered <= hi):
            violations.append(f"demand: {i}")
        if finish > start and schedule.rentals.get(j) is None:
            violations.append(f"unrented-charger: {i} at {j}")
        for t in range(start + 1, finish + 1):
            if (j, t) in seen:
                violations.append(f"charger-capacity: charger {j}, interval {t}")
            else:
                seen[j, t] = i
    return violations


def company_cost(schedule, instance, k):
    """Company k's total cost of a schedule, per the decoded cost model."""
    total = 0
    for j in instance.chargers:
        if schedule.rentals.get(j) == k:
            total += instance.rental_fee[j, k]
    for i in instance.company_evs(k):
        j, start, finish = schedule.sessions[i]
        if finish > start:
            renter = schedule.rentals.get(j)
            if renter is None:
                raise CostError(f"EV {i} charges at unrented charger {j}")
            fee = instance.energy_fee_own if renter == k else instance.energy_fee_collab
            rate = instance.charge_rate[i, j]
            for t in range(start + 1, finish + 1):
                total += fee[j, t] * rate
        total += instance.travel_cost[i, j]
        total += instance.vot[i] * (start - instance.window[i][0])
    return total


def standalone_instance(instance, k):
    """The restriction of an instance to company k's own fleet."""
    evs = instance.company_evs(k)
    return ChargingInstance(
        name=f"{instance.name}-standalone-{k}",
        companies=instance.companies,
        evs=evs,
        owner={i: k for i in evs},
        chargers=instance.chargers,
        horizon=instance.horizon,
        rental_fee=dict(instance.rental_fee),
        energy_fee_own=dict(instance.energy_fee_own),
        energy_fee_collab=dict(instance.energy_fee_collab),
        charge_rate={(i, j): instance.charge_rate[i, j] for i in evs for j in instance.chargers},
        travel_cost={(i, j): instance.travel_cost[i, j] for i in evs for j in instance.chargers},
        vot={i: instance.vot[i] for i in evs},
        window={i: instance.window[i] for i in evs},
        demand={i: instance.demand[i] for i in evs},
    )


def noncollab_point(instance, config=None):
    """Each company's optimal standalone cost (no shared access): (z1Non, z2Non)."""
    from . import solver  # local import keeps the model layer usable without it

    from .frontier import ParticipationPoint

    cfg = config if config is not None else solver.SolverConfig()
    costs = []
    for index, k in enumerate(instance.companies, start=1):
        sub = standalone_instance(instance, k)
        if not sub.evs:
            costs.append(0)
            continue
        prog = build_charging_program(sub)
        other = instance.other_company(k)
        pins = [Constraint(expr({var_rent(j, other): 1}), "=", 0, f"no-foreign-rental:{j}")
                for j in sub.chargers]
        outcome = solver.solve_min(prog, index, extra_constraints=pins, config=cfg)
        if outcome.status != "optimal":
            hint = infeasibility_diagnostic(sub)
            detail = f" ({hint})" if hint else ""
            raise InfeasibleError(f"standalone problem infeasible for company {k}{detail}")
        costs.append(outcome.value)
    return ParticipationPoint(costs[0], costs[1])


# ---------------------------------------------------------------------------
# JSON formats (documented in README; key order is part of the format).

def instance_to_dict(instance):
    ins = instance
    T = ins.horizon
    return {
        "name": ins.name,
        "horizon": T,
        "companies": list(ins.companies),
        "chargers": [
            {"id": j, "position": list(ins.charger_positions[j]) if j in ins.charger_positions else None}
            for j in ins.chargers
        ],
        "evs": [
            {
                "id": i,
                "company": ins.owner[i],
                "position": list(ins.ev_positions[i]) if i in ins.ev_positions else None,
                "window": list(ins.window[i]),
                "demand": list(ins.demand[i]),
                "vot": ins.vot[i],
            }
            for i in ins.evs
        ],
        "rental_fee": {j: {k: ins.rental_fee[j, k] for k in ins.companies} for j in ins.chargers},
        "energy_fee_own": {j: [ins.energy_fee_own[j, t] for t in ins.intervals()] for j in ins.chargers},
        "energy_fee_collab": {j: [ins.energy_fee_collab[j, t] for t in ins.intervals()] for j in ins.chargers},
        "charge_rate": {i: {j: ins.charge_rate[i, j] for j in ins.chargers} for i in ins.evs},
        "travel_cost": {i: {j: ins.travel_cost[i, j] for j in ins.chargers} for i in ins.evs},
        "units": {"money": "minor units of 0.01 SEK", "energy": "kWh", "interval_hours": 1},
    }


def instance_to_json(instance):
    import json

    return json.dumps(instance_to_dict(instance), indent=2) + "\n"


def instance_from_dict(data):
    companies = tuple(data["companies"])
    chargers = tuple(c["id"] for c in data["chargers"])
    evs = tuple(e["id"] for e in data["evs"])
    T = data["horizon"]
    charger_positions = {c["id"]: tuple(c["position"]) for c in data["chargers"] if c.get("position")}
    ev_positions = {e["id"]: tuple(e["position"]) for e in data["evs"] if e.get("position")}
    return ChargingInstance(
        name=data.get("name", ""),
        companies=companies,
        evs=evs,
        owner={e["id"]: e["company"] for e in data["evs"]},
        chargers=chargers,
        horizon=T,
        rental_fee={(j, k): data["rental_fee"][j][k] for j in chargers for k in companies},
        energy_fee_own={(j, t): data["energy_fee_own"][j][t - 1] for j in chargers for t in range(1, T + 1)},
        energy_fee_collab={(j, t): data["energy_fee_collab"][j][t - 1] for j in chargers for t in range(1, T + 1)},
        charge_rate={(e["id"], j): data["charge_rate"][e["id"]][j] for e in data["evs"] for j in chargers},
        travel_cost={(e["id"], j): data["travel_cost"][e["id"]][j] for e in data["evs"] for j in chargers},
        vot={e["id"]: e["vot"] for e in data["evs"]},
        window={e["id"]: tuple(e["window"]) for e in data["evs"]},
        demand={e["id"]: tuple(e["demand"]) for e in data["evs"]},
        ev_positions=ev_positions,
        charger_positions=charger_positions,
    )


def instance_from_json(text):
    import json

    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"instance file is not valid JSON: {exc}") from exc
    try:
        return instance_from_dict(data)
    except (KeyError, TypeError, AttributeError) as exc:
        raise InstanceError(f"malformed instance JSON: {exc!r}") from exc


def schedule_to_dict(schedule, instance):
    return {
        "instance": instance.name,
        "rentals": {j: schedule.rentals.get(j) for j in instance.chargers},
        "sessions": [
            {"ev": i, "charger": schedule.sessions[i][0],
             "start": schedule.sessions[i][1], "end": schedule.sessions[i][2]}
            for i in instance.evs
        ],
        "energy": {i: schedule.energy.get(i, 0) for i in instance.evs},
        "costs": {k: company_cost(schedule, instance, k) for k in instance.companies},
    }


def schedule_to_json(schedule, instance):
    import json

    return json.dumps(schedule_to_dict(schedule, instance), indent=2) + "\n"


def schedule_from_dict(data, instance):
    sessions = {row["ev"]: (row["charger"], row["start"], row["end"]) for row in data["sessions"]}
    occupancy = {}
    energy = {}
    for i, (j, start, finish) in sessions.items():
        for t in range(start + 1, finish + 1):
            occupancy[j, t] = i
        rate = instance.charge_rate.get((i, j), 0)
        energy[i] = rate * (finish - start)
    rentals = {j: data["rentals"].get(j) for j in instance.chargers}
    return Schedule(rentals, sessions, occupancy, energy)


def schedule_from_json(text, instance):
    import json

    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceError(f"schedule file is not valid JSON: {exc}") from exc
    try:
        return schedule_from_dict(data, instance)
    except (KeyError, TypeError, AttributeError) as exc:
        raise InstanceError(f"malformed schedule JSON: {exc!r}") from exc
