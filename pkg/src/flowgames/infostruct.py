"""Information structures: synthesis, obedience checking, and solving.

A structure splits the unit player mass into sub-populations with type sets
and a state-conditional kernel over joint type profiles. Strategies map each
sub-population's types to flows of that sub-population's mass; the game is
evaluated at the aggregate flow. Synthesis follows the direct-recommendation
construction (types are actions, strategies obey), and solving works through
the auxiliary complete-information game whose populations are (sub-
population, type) pairs weighted by the kernel.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .model import (
    FlowProfile,
    GameSpec,
    Outcome,
    eval_cost,
)
from .wardrop import _PotentialCore


@dataclass(frozen=True)
class InformationStructure:
    """Sub-population sizes, finite type sets, and a kernel state -> types.

    ``sizes`` are exact rationals summing to 1; ``kernel`` maps each state
    name to a tuple of (type profile, weight) pairs with weights summing to
    1 per state.
    """

    sizes: tuple
    type_sets: tuple
    kernel: dict

    def __post_init__(self):
        if not self.sizes:
            raise ValueError("no sub-populations")
        if len(self.sizes) != len(self.type_sets):
            raise ValueError("sizes and type sets differ in length")
        if any(s < 0 for s in self.sizes):
            raise ValueError("negative sub-population size")
        total = sum(self.sizes)
        if total != 1 and abs(float(total) - 1.0) > 1e-12:
            raise ValueError(f"sizes sum to {float(total)!r}, expected 1")
        for types in self.type_sets:
            if not types:
                raise ValueError("empty type set")
            if len(set(types)) != len(types):
                raise ValueError("duplicate type names")
        for state, atoms in self.kernel.items():
            total = 0
            for profile, w in atoms:
                if len(profile) != len(self.sizes):
                    raise ValueError(f"type profile {profile!r} has wrong length")
                for k, t in enumerate(profile):
                    if t not in self.type_sets[k]:
                        raise ValueError(f"unknown type {t!r} for sub-population {k}")
                if w < 0:
                    raise ValueError("negative kernel weight")
                total = total + w
            if total != 1 and abs(float(total) - 1.0) > 1e-12:
                raise ValueError(f"kernel weights for state {state!r} sum to {float(total)!r}")

    def population_count(self) -> int:
        return len(self.sizes)


@dataclass(frozen=True)
class StrategyProfile:
    """Per sub-population, a flow vector of mass gamma_k for each type.

    ``strategies[k][t]`` is the action-indexed vector played by sub-
    population k upon observing its t-th type.
    """

    strategies: tuple

    def __post_init__(self):
        normalized = []
        for block in self.strategies:
            normalized.append(tuple(tuple(v for v in vec) for vec in block))
        object.__setattr__(self, "strategies", tuple(normalized))

    def vector(self, k: int, type_index: int) -> tuple:
        return self.strategies[k][type_index]


def _require_single_population(game: GameSpec):
    if len(game.populations) != 1:
        raise ValueError("information structures need a single homogeneous population")
    return game.populations[0]


def validate_strategies(
    structure: InformationStructure, strategies: StrategyProfile, n_actions: int
):
    if len(strategies.strategies) != structure.population_count():
        raise ValueError("strategy blocks do not match sub-population count")
    for k, block in enumerate(strategies.strategies):
        if len(block) != len(structure.type_sets[k]):
            raise ValueError(f"sub-population {k} needs one vector per type")
        for vec in block:
            if len(vec) != n_actions:
                raise ValueError(f"strategy vector {vec!r} has wrong action count")
            if any(v < 0 for v in vec):
                raise ValueError("negative strategy mass")
            total = sum(vec)
            gamma = structure.sizes[k]
            if total != gamma and abs(float(total) - float(gamma)) > 1e-9:
                raise ValueError(
                    f"sub-population {k} plays mass {float(total)!r}, expected {float(gamma)!r}"
                )


def aggregate_flow(
    structure: InformationStructure, strategies: StrategyProfile, profile: tuple
) -> tuple:
    """Total flow when each sub-population k observes profile[k]."""
    n_actions = len(strategies.strategies[0][0])
    agg = [0] * n_actions
    for k, t in enumerate(profile):
        vec = strategies.strategies[k][structure.type_sets[k].index(t)]
        for j in range(n_actions):
            agg[j] = agg[j] + vec[j]
    return tuple(agg)


def bwe_violation(
    game: GameSpec, structure: InformationStructure, strategies: StrategyProfile
):
    """Worst conditional obedience violation over (sub-population, type, a, b).

    For every type with positive kernel marginal and every action carrying
    positive mass under it, compares the conditional expected cost of that
    action against each alternative at the realized aggregate flows. Raw and
    signed; exact on rational data.
    """
    pop = _require_single_population(game)
    actions = pop.actions
    validate_strategies(structure, strategies, len(actions))
    worst = None
    for k in range(structure.population_count()):
        for ti, t in enumerate(structure.type_sets[k]):
            weights = []  # (weight, aggregate profile, state)
            marginal = 0
            for state in game.states:
                p = game.prior_of(state)
                for profile, w in structure.kernel.get(state, ()):
                    if profile[k] != t or w == 0:
                        continue
                    weight = p * w
                    marginal = marginal + weight
                    weights.append((weight, profile, state))
            if marginal == 0:
                continue
            vec = strategies.strategies[k][ti]
            cond_costs = []
            for jb in range(len(actions)):
                total = 0
                for weight, profile, state in weights:
                    agg = aggregate_flow(structure, strategies, profile)
                    flow = FlowProfile((agg,))
                    total = total + weight * eval_cost(game, pop.name, actions[jb], flow, state)
                cond_costs.append(total / marginal)
            cheapest = min(cond_costs)
            for ja in range(len(actions)):
                if vec[ja] > 0:
                    gap = cond_costs[ja] - cheapest
                    if worst is None or gap > worst:
                        worst = gap
    return 0 if worst is None else worst


def outcome_of_strategies(
    structure: InformationStructure, strategies: StrategyProfile
) -> Outcome:
    """Push the kernel through the aggregate-flow map.

    Type profiles inducing identical aggregates merge; weights stay exact on
    rational data.
    """
    per_state = {}
    for state, atoms in structure.kernel.items():
        bucket = {}
        for profile, w in atoms:
            if w == 0:
                continue
            agg = aggregate_flow(structure, strategies, profile)
            bucket[agg] = bucket.get(agg, 0) + w
        entries = sorted(bucket.items(), key=lambda kv: tuple(map(float, kv[0])))
        per_state[state] = tuple((FlowProfile((agg,)), w) for agg, w in entries)
    return Outcome(per_state)


def _largest_remainder_counts(vector, denominator: int) -> list[int]:
    """Integer counts summing to ``denominator`` proportional to the vector."""
    scaled = [v * denominator for v in vector]
    floors = [int(s) if s >= 0 else 0 for s in map(_floor, scaled)]
    counts = list(floors)
    shortfall = denominator - sum(counts)
    remainders = sorted(
        range(len(vector)),
        key=lambda j: (-(scaled[j] - floors[j]), j),
    )
    for j in remainders[:shortfall]:
        counts[j] += 1
    return counts


def _floor(x) -> int:
    if isinstance(x, Fraction):
        return x.numerator // x.denominator
    return int(np.floor(x))


def direct_structure_from_bcwe(
    game: GameSpec, outcome: Outcome, denominator: int, symmetrize: bool = True
) -> tuple[InformationStructure, StrategyProfile, object]:
    """Build a direct (types = actions) structure approximating an outcome.

    The unit mass splits into ``denominator`` equal sub-populations. For each
    support flow, integer counts of sub-populations per action are chosen by
    largest remainders, and the kernel recommends block assignments; with
    ``symmetrize`` (default) the kernel averages uniformly over the cyclic
    rotations of the blocks so every sub-population sees the same conditional
    recommendation frequencies. Strategies are obedient. Returns the realized
    obedience violation, which is exactly zero whenever every support flow
    has denominators dividing ``denominator``.
    """
    pop = _require_single_population(game)
    if denominator < 1:
        raise ValueError("denominator must be >= 1")
    k_count = denominator
    actions = pop.actions
    sizes = tuple(Fraction(1, k_count) for _ in range(k_count))
    type_sets = tuple(tuple(actions) for _ in range(k_count))
    kernel = {}
    for state in game.states:
        bucket = {}
        for flow, w in outcome.per_state[state]:
            if w == 0:
                continue
            counts = _largest_remainder_counts(flow.flows[0], k_count)
            base = []
            for j, c in enumerate(counts):
                base.extend([actions[j]] * c)
            rotations = range(k_count) if symmetrize else (0,)
            share = Fraction(1, k_count) if symmetrize else 1
            for r in rotations:
                profile = tuple(base[(i - r) % k_count] for i in range(k_count))
                bucket[profile] = bucket.get(profile, 0) + w * share
        entries = sorted(bucket.items())
        kernel[state] = tuple(entries)
    structure = InformationStructure(sizes, type_sets, kernel)
    gamma = Fraction(1, k_count)
    obedient = tuple(
        tuple(
            tuple(gamma if j == ja else Fraction(0) for j in range(len(actions)))
            for ja in range(len(actions))
        )
        for _ in range(k_count)
    )
    strategies = StrategyProfile(obedient)
    eps = bwe_violation(game, structure, strategies)
    eps = eps if eps > 0 else 0
    return structure, strategies, eps


# ---------------------------------------------------------------------------
# Solving arbitrary structures through the auxiliary game
# ---------------------------------------------------------------------------


def _auxiliary_core(game: GameSpec, structure: InformationStructure, blocks):
    """Assemble the potential-minimization data for the auxiliary game.

    Auxiliary variables are ((k, type), action) flows; auxiliary resources
    are (game resource, state, kernel profile) with latency scaled by the
    kernel weight, so the auxiliary potential is the kernel-weighted sum of
    per-state potentials at the realized aggregates.
    """
    spec = game.congestion
    pop = game.populations[0]
    actions = pop.actions
    columns = []
    for bk, (k, ti) in enumerate(blocks):
        for a in actions:
            columns.append((bk, a))
    col_index = {key: i for i, key in enumerate(columns)}
    block_of = {key: bk for bk, key in enumerate(blocks)}
    aux_rows = []
    polys = []
    for state in game.states:
        p = game.prior_of(state)
        for profile, w in structure.kernel.get(state, ()):
            weight = float(p * w)
            if weight == 0:
                continue
            for e in spec.resources:
                row = np.zeros(len(columns))
                hit = False
                for k, t in enumerate(profile):
                    ti = structure.type_sets[k].index(t)
                    if (k, ti) not in block_of:
                        continue
                    bk = block_of[(k, ti)]
                    for j, a in enumerate(actions):
                        if e in spec.actions[(pop.name, a)]:
                            row[col_index[(bk, a)]] = 1.0
                            hit = True
                if not hit:
                    continue
                aux_rows.append(row)
                polys.append([weight * float(c) for c in spec.latencies[(e, state)]])
    m = np.vstack(aux_rows) if aux_rows else np.zeros((1, len(columns)))
    if not aux_rows:
        polys = [[0.0]]
    ranges = []
    masses = []
    lo = 0
    for k, ti in blocks:
        ranges.append((lo, lo + len(actions)))
        masses.append(float(structure.sizes[k]))
        lo += len(actions)
    return _PotentialCore(m, polys, ranges, masses), columns


def solve_bwe(
    game: GameSpec,
    structure: InformationStructure,
    tol: float = 1e-8,
    max_iter: int = 400,
    start: StrategyProfile | None = None,
) -> StrategyProfile:
    """Equilibrium strategies for an information structure over a congestion
    game, found by minimizing the kernel-weighted auxiliary potential.

    Types with zero kernel marginal are unconstrained and get all mass on the
    first action. Tiny solver dust below 1e-9 of a block's mass is snapped to
    zero so positivity checks in :func:`bwe_violation` see honest supports.
    """
    if game.congestion is None:
        raise ValueError("solving needs a congestion backing")
    pop = _require_single_population(game)
    actions = pop.actions
    blocks = []
    for k in range(structure.population_count()):
        if structure.sizes[k] == 0:
            continue
        for ti, t in enumerate(structure.type_sets[k]):
            marginal = 0
            for state in game.states:
                p = game.prior_of(state)
                for profile, w in structure.kernel.get(state, ()):
                    if profile[k] == t:
                        marginal = marginal + p * w
            if marginal > 0:
                blocks.append((k, ti))
    core, columns = _auxiliary_core(game, structure, blocks)
    if start is None:
        x0 = np.concatenate(
            [
                np.full(len(actions), float(structure.sizes[k]) / len(actions))
                for k, _ in blocks
            ]
        )
    else:
        x0 = np.array(
            [
                float(start.strategies[k][ti][j])
                for k, ti in blocks
                for j in range(len(actions))
            ]
        )
    x, _violation, _iters = core.minimize(x0, tol, max_iter)
    out = []
    pos = {blk: i for i, blk in enumerate(blocks)}
    for k in range(structure.population_count()):
        gamma = structure.sizes[k]
        block_vecs = []
        for ti in range(len(structure.type_sets[k])):
            if (k, ti) in pos and gamma > 0:
                lo = pos[(k, ti)] * len(actions)
                vec = np.maximum(x[lo : lo + len(actions)], 0.0)
                vec[vec < 1e-9 * float(gamma)] = 0.0
                total = vec.sum()
                if total > 0:
                    vec = vec * (float(gamma) / total)
                else:
                    vec = np.zeros(len(actions))
                    vec[0] = float(gamma)
                block_vecs.append(tuple(float(v) for v in vec))
            else:
                vec = [0.0] * len(actions)
                vec[0] = float(gamma)
                block_vecs.append(tuple(vec))
        out.append(tuple(block_vecs))
    return StrategyProfile(tuple(out))


@dataclass(frozen=True)
class UniquenessProbeReport:
    """Spread of solved equilibria across random restarts.

    ``flow_deviation`` compares the realized aggregate flows per kernel
    atom, not the per-sub-population decomposition: whenever two
    sub-populations can trade mass without moving any aggregate, the
    decomposition is a payoff-irrelevant degree of freedom, so only the
    aggregates are pinned down by strict convexity.
    """

    cost_deviation: float
    flow_deviation: float
    trials: int
    worst_violation: float


def bwe_cost_uniqueness_probe(
    game: GameSpec,
    structure: InformationStructure,
    trials: int = 20,
    tol: float = 1e-8,
    seed: int = 0,
) -> UniquenessProbeReport:
    """Solve from random interior starts and measure how much the per-type
    positive-flow conditional costs (and the realized flows) spread."""
    import random as _random

    rng = _random.Random(seed)
    pop = _require_single_population(game)
    actions = pop.actions
    atoms = []  # positive-weight kernel atoms, deduplicated
    seen = set()
    for state in game.states:
        p = game.prior_of(state)
        for profile, w in structure.kernel.get(state, ()):
            if p * w > 0 and profile not in seen:
                seen.add(profile)
                atoms.append(profile)
    runs = []
    worst_violation = 0.0
    for _ in range(max(1, trials)):
        start_blocks = []
        for k in range(structure.population_count()):
            gamma = float(structure.sizes[k])
            vecs = []
            for _t in structure.type_sets[k]:
                raw = [rng.random() + 1e-3 for _ in actions]
                total = sum(raw)
                vecs.append(tuple(gamma * v / total for v in raw))
            start_blocks.append(tuple(vecs))
        start = StrategyProfile(tuple(start_blocks))
        solved = solve_bwe(game, structure, tol=tol, start=start)
        worst_violation = max(worst_violation, float(bwe_violation(game, structure, solved)))
        aggregates = {
            profile: aggregate_flow(structure, solved, profile) for profile in atoms
        }
        runs.append((aggregates, _conditional_costs(game, structure, solved)))
    cost_dev = 0.0
    flow_dev = 0.0
    for (agg1, c1), (agg2, c2) in itertools.combinations(runs, 2):
        for key in c1:
            if key in c2 and (c1[key][1] or c2[key][1]):
                cost_dev = max(cost_dev, abs(c1[key][0] - c2[key][0]))
        for profile in atoms:
            for x1, x2 in zip(agg1[profile], agg2[profile]):
                flow_dev = max(flow_dev, abs(float(x1) - float(x2)))
    return UniquenessProbeReport(cost_dev, flow_dev, trials, worst_violation)


def _conditional_costs(game, structure, strategies) -> dict:
    """Map (k, type, action) -> (conditional cost, has positive flow)."""
    pop = game.populations[0]
    actions = pop.actions
    out = {}
    for k in range(structure.population_count()):
        for ti, t in enumerate(structure.type_sets[k]):
            weights = []
            marginal = 0.0
            for state in game.states:
                p = float(game.prior_of(state))
                for profile, w in structure.kernel.get(state, ()):
                    if profile[k] != t or w == 0:
                        continue
                    weights.append((p * float(w), profile, state))
                    marginal += p * float(w)
            if marginal == 0:
                continue
            vec = strategies.strategies[k][ti]
            for j, action in enumerate(actions):
                total = 0.0
                for weight, profile, state in weights:
                    agg = aggregate_flow(structure, strategies, profile)
                    flow = FlowProfile((agg,))
                    total += weight * float(eval_cost(game, pop.name, action, flow, state))
                out[(k, t, action)] = (total / marginal, float(vec[j]) > 1e-7)
    return out
