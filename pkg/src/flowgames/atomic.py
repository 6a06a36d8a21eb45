"""Finite-player counterparts and convergence to the continuum limit.

An atomic game samples n_k players for each population, each controlling
weight w_i of that population's mass. Correlated recommendations are checked
either by brute force over full action profiles or at the flow level for
symmetric count-based recommendations, and a sequence of scaled games traces
how the obedience slack and the outcome distance shrink.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .checks import CheckReport, check_bce_flowlevel
from .lp import lp_solve
from .model import FlowProfile, GameSpec, Outcome, eval_cost


@dataclass(frozen=True)
class AtomicGame:
    """A draw of finitely many weighted players from each population.

    ``counts[k]`` players split population k's mass according to
    ``weights[k]`` (uniform when omitted); the weights must sum to that
    population's mass exactly when rational.
    """

    game: GameSpec
    counts: tuple
    weights: tuple = None

    def __post_init__(self):
        if len(self.counts) != len(self.game.populations):
            raise ValueError("one player count per population required")
        if any(n < 1 for n in self.counts):
            raise ValueError("each population needs at least one player")
        if self.weights is None:
            built = tuple(
                tuple(Fraction(1, n) for _ in range(n)) for n in self.counts
            )
            object.__setattr__(self, "weights", built)
        if len(self.weights) != len(self.counts):
            raise ValueError("one weight vector per population required")
        for k, vec in enumerate(self.weights):
            if len(vec) != self.counts[k]:
                raise ValueError(f"population {k} needs {self.counts[k]} weights")
            if any(w <= 0 for w in vec):
                raise ValueError("player weights must be positive")
            total = sum(vec)
            if total != 1 and abs(float(total) - 1.0) > 1e-12:
                raise ValueError(f"population {k} weights sum to {float(total)!r}")

    def uniform(self) -> bool:
        return all(
            all(w == Fraction(1, self.counts[k]) for w in vec)
            for k, vec in enumerate(self.weights)
        )


def flow_of_profile(agame: AtomicGame, profile: tuple) -> FlowProfile:
    """Aggregate a full action profile into the induced flow.

    ``profile[k][i]`` is the action name chosen by player i of population k.
    """
    flows = []
    for k, pop in enumerate(agame.game.populations):
        if len(profile[k]) != agame.counts[k]:
            raise ValueError(f"population {k} needs {agame.counts[k]} choices")
        vec = [0] * len(pop.actions)
        for i, action in enumerate(profile[k]):
            vec[agame.game.action_index(pop.name, action)] += agame.weights[k][i]
        flows.append(tuple(vec))
    return FlowProfile(tuple(flows))


def _normalize_profile(agame: AtomicGame, profile):
    """Accept a flat tuple of actions for single-population games."""
    if len(agame.game.populations) == 1 and profile and isinstance(profile[0], str):
        return (tuple(profile),)
    return tuple(tuple(block) for block in profile)


def check_bce_bruteforce(agame: AtomicGame, beta: dict, tol: float = 0.0) -> CheckReport:
    """Obedience of an explicit profile distribution, player by player.

    ``beta`` maps each state to (profile, weight) pairs over full action
    profiles. Every player's conditional deviation gain is computed exactly
    on rational data; the profile space must stay at or below 10**6 entries.
    """
    size = 1
    for k, pop in enumerate(agame.game.populations):
        size *= len(pop.actions) ** agame.counts[k]
        if size > 10**6:
            raise ValueError("profile space too large for brute force")
    entries = []  # (state, prior*weight, normalized profile)
    for state, atoms in beta.items():
        if state not in agame.game.states:
            raise ValueError(f"unknown state {state!r}")
        p = agame.game.prior_of(state)
        total = 0
        for profile, w in atoms:
            if w < 0:
                raise ValueError("negative profile weight")
            total = total + w
            if w == 0:
                continue
            entries.append((state, p * w, _normalize_profile(agame, profile)))
        if total != 1 and abs(float(total) - 1.0) > 1e-9:
            raise ValueError(f"profile weights for state {state!r} sum to {float(total)!r}")
    worst = None
    witness = None
    for k, pop in enumerate(agame.game.populations):
        for i in range(agame.counts[k]):
            for a in pop.actions:
                mass = 0
                for _state, weight, profile in entries:
                    if profile[k][i] == a:
                        mass = mass + weight
                if mass == 0:
                    continue
                for b in pop.actions:
                    if b == a:
                        continue
                    value = 0
                    for state, weight, profile in entries:
                        if profile[k][i] != a:
                            continue
                        flow = flow_of_profile(agame, profile)
                        deviated = tuple(
                            tuple(
                                (b if (kk == k and ii == i) else act)
                                for ii, act in enumerate(block)
                            )
                            for kk, block in enumerate(profile)
                        )
                        dflow = flow_of_profile(agame, deviated)
                        value = value + weight * (
                            eval_cost(agame.game, pop.name, a, flow, state)
                            - eval_cost(agame.game, pop.name, b, dflow, state)
                        )
                    if worst is None or value > worst:
                        worst = value
                        witness = (pop.name, i, a, b)
    if worst is None:
        return CheckReport("bce", 0, None)
    return CheckReport("bce", worst, witness)


@dataclass(frozen=True)
class SymmetricBCE:
    """Count-based symmetric recommendation: states to flows to counts.

    ``outcome`` carries the recommended flows and weights; ``counts`` maps
    each support flow (as nested tuples) to per-population integer counts
    realizing it with uniform players. ``delta`` is the rounding distance to
    the target flows and ``eps`` the realized obedience slack.
    """

    outcome: Outcome
    n: tuple
    counts: dict
    delta: object
    eps: object

    def __post_init__(self):
        for key, per_pop in self.counts.items():
            for k, nk in enumerate(self.n):
                if sum(per_pop[k]) != nk:
                    raise ValueError(f"counts for {key!r} do not total {nk}")


def _flow_key(flow: FlowProfile) -> tuple:
    return tuple(tuple(v for v in block) for block in flow.flows)


def construct_eps_bce(agame: AtomicGame, outcome: Outcome) -> SymmetricBCE:
    """Round a continuum outcome onto uniform finite players.

    Each support flow is replaced by largest-remainder integer counts (ties
    to the smaller action index) and the recommendation becomes: draw a flow
    by its weight, then assign players to actions uniformly at random
    consistent with the counts. Returns the rounding distance and the
    realized flow-level obedience slack, both exact on rational data.
    """
    if not agame.uniform():
        raise ValueError("count-based recommendations need uniform weights")
    counts = {}
    delta = 0
    rounded_per_state = {}
    for state in agame.game.states:
        atoms = []
        for flow, w in outcome.per_state[state]:
            per_pop = []
            for k in range(len(agame.game.populations)):
                nk = agame.counts[k]
                vec = flow.flows[k]
                scaled = [v * nk for v in vec]
                floors = [_int_floor(s) for s in scaled]
                cnt = list(floors)
                short = nk - sum(cnt)
                order = sorted(
                    range(len(vec)), key=lambda j: (-(scaled[j] - floors[j]), j)
                )
                for j in order[:short]:
                    cnt[j] += 1
                per_pop.append(tuple(cnt))
                for j, c in enumerate(cnt):
                    gap = Fraction(c, nk) - vec[j] if isinstance(vec[j], Fraction) else c / nk - vec[j]
                    gap = -gap if gap < 0 else gap
                    if gap > delta:
                        delta = gap
            rounded = FlowProfile(
                tuple(
                    tuple(Fraction(c, agame.counts[k]) for c in per_pop[k])
                    for k in range(len(per_pop))
                )
            )
            key = _flow_key(rounded)
            counts[key] = tuple(per_pop)
            atoms.append((rounded, w))
        merged = {}
        for flow, w in atoms:
            merged[_flow_key(flow)] = merged.get(_flow_key(flow), 0) + w
        rounded_per_state[state] = tuple(
            (FlowProfile(key), w) for key, w in sorted(merged.items())
        )
    rounded_outcome = Outcome(rounded_per_state)
    bce = SymmetricBCE(rounded_outcome, tuple(agame.counts), counts, delta, 0)
    report = check_bce_flowlevel(agame.game, bce)
    eps = report.worst_violation
    eps = eps if eps > 0 else 0
    return SymmetricBCE(rounded_outcome, tuple(agame.counts), counts, delta, eps)


def _int_floor(x) -> int:
    if isinstance(x, Fraction):
        return x.numerator // x.denominator
    return int(np.floor(float(x) + 1e-12))


def bce_to_profile_distribution(agame: AtomicGame, bce: SymmetricBCE) -> dict:
    """Expand count-based recommendations into full profile distributions.

    Each flow atom spreads uniformly over the action profiles consistent
    with its counts; weights come out exact when the inputs are rational.
    """
    beta = {}
    for state, atoms in bce.outcome.per_state.items():
        rows = []
        for flow, w in atoms:
            if w == 0:
                continue
            per_pop = bce.counts[_flow_key(flow)]
            pop_assignments = []
            for k, pop in enumerate(agame.game.populations):
                pop_assignments.append(
                    list(_assignments(per_pop[k], pop.actions, agame.counts[k]))
                )
            total = 1
            for block in pop_assignments:
                total *= len(block)
            share = w * Fraction(1, total) if isinstance(w, Fraction) else w / total
            combos = [()]
            for block in pop_assignments:
                combos = [c + (b,) for c in combos for b in block]
            for profile in combos:
                rows.append((profile, share))
        merged = {}
        for profile, w in rows:
            merged[profile] = merged.get(profile, 0) + w
        beta[state] = tuple(sorted(merged.items()))
    return beta


def _assignments(count_vec, actions, n):
    """All assignments of n players to actions with the given counts."""
    if sum(count_vec) != n:
        raise ValueError("counts do not total the player count")

    def rec(remaining, counts):
        if remaining == 0:
            yield ()
            return
        for j, c in enumerate(counts):
            if c > 0:
                reduced = counts[:j] + (c - 1,) + counts[j + 1 :]
                for tail in rec(remaining - 1, reduced):
                    yield (actions[j],) + tail

    yield from rec(n, tuple(count_vec))


def wasserstein_outcome_distance(mu1: Outcome, mu2: Outcome, prior) -> float:
    """Prior-weighted earth-mover distance between two outcomes.

    Ground metric is the sup norm between flow profiles. States where the
    supports coincide exactly contribute zero without touching the solver.
    """
    states = set(mu1.per_state) | set(mu2.per_state)
    total = 0.0
    for state in states:
        p = float(prior[state]) if isinstance(prior, dict) else float(prior(state))
        if p == 0:
            continue
        atoms1 = [(f, w) for f, w in mu1.per_state.get(state, ()) if w != 0]
        atoms2 = [(f, w) for f, w in mu2.per_state.get(state, ()) if w != 0]
        key1 = sorted((_flow_key(f), w) for f, w in atoms1)
        key2 = sorted((_flow_key(f), w) for f, w in atoms2)
        if key1 == key2:
            continue
        total += p * _w1(atoms1, atoms2)
    return total


def _w1(atoms1, atoms2) -> float:
    n1, n2 = len(atoms1), len(atoms2)
    if n1 == 0 or n2 == 0:
        raise ValueError("cannot transport to an empty distribution")
    cost = np.zeros(n1 * n2)
    for i, (f1, _) in enumerate(atoms1):
        for j, (f2, _) in enumerate(atoms2):
            d = 0.0
            for b1, b2 in zip(f1.flows, f2.flows):
                for v1, v2 in zip(b1, b2):
                    d = max(d, abs(float(v1) - float(v2)))
            cost[i * n2 + j] = d
    a_eq = np.zeros((n1 + n2, n1 * n2))
    b_eq = np.zeros(n1 + n2)
    for i in range(n1):
        a_eq[i, i * n2 : (i + 1) * n2] = 1.0
        b_eq[i] = float(atoms1[i][1])
    for j in range(n2):
        a_eq[n1 + j, j::n2] = 1.0
        b_eq[n1 + j] = float(atoms2[j][1])
    result = lp_solve(cost, a_eq=a_eq[:-1], b_eq=b_eq[:-1])
    if result.status != "optimal":
        raise RuntimeError(f"transport solve failed: {result.status}")
    return max(0.0, float(result.objective))


@dataclass(frozen=True)
class ConvergenceRow:
    n: int
    delta: float
    eps: object
    wasserstein: float


def convergence_run(game: GameSpec, outcome: Outcome, n_list) -> list[ConvergenceRow]:
    """Round one outcome onto a schedule of player counts.

    The outcome must already satisfy state-averaged obedience to 1e-6. Each
    row reports the rounding distance, the realized flow-level obedience
    slack, and the prior-weighted transport distance between the original
    outcome and its rounded image.
    """
    from .checks import check_bcwe

    report = check_bcwe(game, outcome)
    if float(report.worst_violation) > 1e-6:
        raise ValueError(
            f"outcome violates obedience by {float(report.worst_violation)!r}"
        )
    prior = {s: game.prior_of(s) for s in game.states}
    rows = []
    for n in n_list:
        counts = (n,) * len(game.populations) if isinstance(n, int) else tuple(n)
        agame = AtomicGame(game, counts)
        bce = construct_eps_bce(agame, outcome)
        dist = wasserstein_outcome_distance(outcome, bce.outcome, prior)
        label = n if isinstance(n, int) else tuple(n)
        rows.append(ConvergenceRow(label, float(bce.delta), bce.eps, dist))
    return rows
