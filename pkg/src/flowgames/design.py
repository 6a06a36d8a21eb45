"""The designer's problem: minimize expected cost over obedient outcomes.

The optimization runs as a finite LP over state-conditional distributions on
a candidate grid of flows (seeded with solved equilibria so the LP is always
feasible). The returned basic feasible solution certifies the finite-support
bound structurally: its support cannot exceed the LP row count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .checks import check_bcwe, check_ccwe
from .lp import LPResult, lp_solve
from .model import (
    CostExpr,
    FlowProfile,
    GameSpec,
    Outcome,
    eval_cost,
    flow_linf,
    social_cost,
)
from .wardrop import grid_flows, solve_we_multistart, solve_we_potential, verify_we


@dataclass(frozen=True)
class DesignerProblem:
    """A game, a per-state designer cost, and per-state candidate flows.

    ``designer_cost`` maps each state to a cost expression over flows; pass
    the same expression per state for state-independent objectives. The
    candidate lists must be seeded with per-state equilibria (build them via
    :func:`build_grid`) or the LP may be infeasible.
    """

    game: GameSpec
    designer_cost: dict
    candidates: dict

    def __post_init__(self):
        for state in self.game.states:
            if state not in self.designer_cost:
                raise ValueError(f"no designer cost for state {state!r}")
            if not self.candidates.get(state):
                raise ValueError(f"no candidates for state {state!r}")


@dataclass(frozen=True)
class LPSolution:
    """An optimal outcome with its objective and basis certificate."""

    outcome: Outcome | None
    objective: float | None
    basis: tuple | None
    status: str


@dataclass(frozen=True)
class SupportBoundReport:
    """Truthy iff the solution satisfies the Caratheodory-style cap."""

    ok: bool
    support: int
    caratheodory_bound: int
    bfs_bound: int
    within_bfs: bool

    def __bool__(self) -> bool:
        return self.ok


def social_cost_expr(game: GameSpec) -> dict:
    """Designer cost equal to realized social cost, encoded per state."""
    return {state: None for state in game.states}


def _designer_value(game: GameSpec, expr, flow: FlowProfile, state: str):
    if expr is None:
        return social_cost(game, flow, state)
    from .model import _eval_expr

    def resolve(vpop, vaction):
        if vpop is None:
            if len(game.populations) != 1:
                raise ValueError("bare flow variable in a multi-population game")
            vpop = game.populations[0].name
        i = game.population_index(vpop)
        j = game.action_index(vpop, vaction)
        return flow.flows[i][j]

    return _eval_expr(expr, resolve, state)


def build_grid(game: GameSpec, resolution: int, seeds: tuple = ()) -> dict:
    """Per-state candidate lists: lattice flows, seeds, and solved equilibria.

    Candidates are deduplicated exactly and ordered lexicographically so LP
    results are reproducible bit for bit.
    """
    if resolution < 1:
        raise ValueError("resolution must be >= 1")
    lattice = grid_flows(game, resolution)
    per_pop = math.prod(
        math.comb(resolution + len(p.actions) - 1, len(p.actions) - 1)
        for p in game.populations
    )
    if per_pop > 10**6:
        raise ValueError(f"grid of size {per_pop} exceeds the 1e6 cap")
    out = {}
    for state in game.states:
        candidates = list(lattice) + list(seeds)
        for we in _state_equilibria(game, state):
            candidates.append(we)
        seen = set()
        unique = []
        for f in candidates:
            key = tuple(tuple(float(v) for v in vec) for vec in f.flows)
            if key in seen:
                continue
            seen.add(key)
            unique.append(f)
        unique.sort(key=lambda f: tuple(tuple(float(v) for v in vec) for vec in f.flows))
        out[state] = tuple(unique)
    return out


def _snap_rational(game: GameSpec, flow: FlowProfile, state: str) -> FlowProfile:
    """Replace solver floats with a nearby exact rational equilibrium.

    Affine latencies put equilibria at rational points, so a snapped flow that
    verifies exactly is the true equilibrium (or an equally valid one on a
    tie). Quadratic latencies can have irrational equilibria; those keep
    their float coordinates.
    """
    for bound in (64, 4096, 10**6):
        flows = []
        ok = True
        for vec, mass in zip(flow.flows, flow.masses):
            vals = [Fraction(float(v)).limit_denominator(bound) for v in vec]
            # absorb the rounding drift into the largest coordinate
            j = max(range(len(vals)), key=lambda i: vals[i])
            vals[j] += mass - sum(vals)
            if vals[j] < 0:
                ok = False
                break
            flows.append(tuple(vals))
        if not ok:
            continue
        candidate = FlowProfile(tuple(flows), masses=flow.masses)
        if verify_we(game, candidate, state) <= 0:
            return candidate
    return flow


def _state_equilibria(game: GameSpec, state: str) -> list[FlowProfile]:
    if game.congestion is not None:
        result = solve_we_potential(game.congestion, state)
        found = [result.flow] if result.max_violation <= 1e-7 else []
    else:
        found = [r.flow for r in solve_we_multistart(game, state)]
    return [_snap_rational(game, f, state) for f in found]


def solve_program_p(problem: DesignerProblem) -> LPSolution:
    """Minimize expected designer cost over obedient state-conditional
    distributions supported on the candidate flows.

    Weights in the returned outcome are snapped to small-denominator
    rationals whenever the snapped outcome is verified exactly feasible with
    a matching objective, so rational instances round-trip exactly.
    """
    game = problem.game
    columns = []  # (state, candidate index)
    for state in game.states:
        for idx in range(len(problem.candidates[state])):
            columns.append((state, idx))
    ncols = len(columns)
    objective = np.zeros(ncols)
    cost_cache = {}
    for col, (state, idx) in enumerate(columns):
        flow = problem.candidates[state][idx]
        p = game.prior_of(state)
        objective[col] = float(p * _designer_value(game, problem.designer_cost[state], flow, state))
        cost_cache[(state, idx)] = {
            (pop.name, a): eval_cost(game, pop.name, a, flow, state)
            for pop in game.populations
            for a in pop.actions
        }
    a_eq = np.zeros((len(game.states), ncols))
    b_eq = np.ones(len(game.states))
    for col, (state, _) in enumerate(columns):
        a_eq[game.state_index(state), col] = 1.0
    rows = []
    for k, pop in enumerate(game.populations):
        for ja, a in enumerate(pop.actions):
            for b in pop.actions:
                if a == b:
                    continue
                row = np.zeros(ncols)
                for col, (state, idx) in enumerate(columns):
                    flow = problem.candidates[state][idx]
                    p = game.prior_of(state)
                    costs = cost_cache[(state, idx)]
                    row[col] = float(
                        p * flow.flows[k][ja] * (costs[(pop.name, a)] - costs[(pop.name, b)])
                    )
                rows.append(row)
    a_ub = np.vstack(rows) if rows else None
    b_ub = np.zeros(len(rows)) if rows else None
    result = lp_solve(objective, a_eq, b_eq, a_ub, b_ub)
    if result.status != "optimal":
        return LPSolution(None, None, None, result.status)
    outcome, value = _outcome_from_solution(problem, columns, result)
    return LPSolution(outcome, value, result.basis, "optimal")


def _outcome_from_solution(problem: DesignerProblem, columns, result: LPResult):
    game = problem.game
    per_state: dict = {state: [] for state in game.states}
    for col, (state, idx) in enumerate(columns):
        w = float(result.x[col])
        if w > 1e-11:
            per_state[state].append((problem.candidates[state][idx], w))
    for state, atoms in per_state.items():
        total = sum(w for _, w in atoms)
        per_state[state] = tuple((f, w / total) for f, w in atoms)
    rational = _rationalize(game, per_state, result.objective, problem)
    if rational is not None:
        return rational
    return Outcome(per_state), result.objective


def _rationalize(game, per_state, objective, problem):
    """Try to snap float weights to small rationals and verify exactly.

    Returns (outcome, exact objective) on success, None when the snapped
    weights fail any exact feasibility or value check.
    """
    snapped = {}
    for state, atoms in per_state.items():
        weights = [Fraction(w).limit_denominator(10**6) for _, w in atoms]
        if sum(weights) != 1 or any(w < 0 for w in weights):
            return None
        snapped[state] = tuple((f, w) for (f, _), w in zip(atoms, weights))
    try:
        outcome = Outcome(snapped)
    except ValueError:
        return None
    report = check_bcwe(game, outcome)
    if report.worst_violation > 0:
        return None
    value = 0
    for state in game.states:
        p = game.prior_of(state)
        for f, w in snapped[state]:
            value = value + p * w * _designer_value(game, problem.designer_cost[state], f, state)
    if abs(float(value) - objective) > 1e-9:
        return None
    return outcome, value


def support_bound_check(solution: LPSolution, game: GameSpec) -> SupportBoundReport:
    """Compare the solution's support size to the structural caps.

    The coarse cap is |states| * (|A|^2 + 1); the sharper one is the LP row
    count |states| + sum_k |A^k| (|A^k| - 1), which any basic feasible
    solution satisfies automatically.
    """
    if solution.outcome is None:
        raise ValueError("no outcome to check")
    support = sum(len(atoms) for atoms in solution.outcome.per_state.values())
    asq = sum(len(p.actions) ** 2 for p in game.populations)
    pairs = sum(len(p.actions) * (len(p.actions) - 1) for p in game.populations)
    caratheodory = len(game.states) * (asq + 1)
    bfs = len(game.states) + pairs
    return SupportBoundReport(
        ok=support <= caratheodory,
        support=support,
        caratheodory_bound=caratheodory,
        bfs_bound=bfs,
        within_bfs=support <= bfs,
    )


def ccwe_grid_gap(game: GameSpec, state: str, resolution: int) -> tuple[float, float]:
    """Measure how tightly near-obedient grid distributions pin the social cost.

    Over pure lattice candidates (no equilibrium seeding), first minimize the
    uniform slack s with which the coarse-obedience rows can be satisfied,
    then push expected social cost both ways subject to that slack. Returns
    (slack, gap) where gap is the worst deviation of the achievable expected
    social cost from the equilibrium social cost. Both shrink as the lattice
    refines, turning the equilibrium-uniqueness property into a measurable
    grid-scale statement.
    """
    if game.congestion is None:
        raise ValueError("needs a congestion backing for the reference equilibrium")
    we = solve_we_potential(game.congestion, state, tol=1e-10)
    we_cost = float(social_cost(game, we.flow, state))
    lattice = grid_flows(game, resolution)
    ncols = len(lattice)
    sc = np.array([float(social_cost(game, f, state)) for f in lattice])
    rows = []
    for k, pop in enumerate(game.populations):
        for b in pop.actions:
            row = np.zeros(ncols)
            for col, f in enumerate(lattice):
                own = sum(
                    float(f.flows[k][ja]) * float(eval_cost(game, pop.name, act, f, state))
                    for ja, act in enumerate(pop.actions)
                )
                row[col] = own - float(eval_cost(game, pop.name, b, f, state))
            rows.append(row)
    nrows = len(rows)
    # variables: mu (ncols) then slack s
    a_eq = np.zeros((1, ncols + 1))
    a_eq[0, :ncols] = 1.0
    a_ub = np.zeros((nrows, ncols + 1))
    for i, row in enumerate(rows):
        a_ub[i, :ncols] = row
        a_ub[i, ncols] = -1.0
    c_slack = np.zeros(ncols + 1)
    c_slack[ncols] = 1.0
    first = lp_solve(c_slack, a_eq, np.ones(1), a_ub, np.zeros(nrows))
    if first.status != "optimal":
        raise RuntimeError("slack minimization failed")
    slack = max(0.0, float(first.objective))
    a_ub2 = np.vstack(rows)
    b_ub2 = np.full(nrows, slack + 1e-12)
    gap = 0.0
    for sign in (1.0, -1.0):
        res = lp_solve(sign * sc, np.ones((1, ncols)), np.ones(1), a_ub2, b_ub2)
        if res.status != "optimal":
            raise RuntimeError("cost-range LP failed")
        value = float(sc @ res.x)
        gap = max(gap, abs(value - we_cost))
    return slack, gap
