"""Equilibrium computation for single-state slices of a game.

Congestion-backed games are solved by minimizing the convex potential (the
sum over resources of latency antiderivatives) with Frank-Wolfe steps plus a
Newton polish on the detected support, which brings equilibrium violations
down to solver precision. Games without a potential are handled by damped
best-response iteration, which reports rather than hides non-convergence.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy.optimize import brentq

from .model import (
    CongestionSpec,
    FlowProfile,
    GameSpec,
    congestion_to_game,
    eval_cost,
    flow_linf,
    social_cost,
    uniform_flow,
)


@dataclass(frozen=True)
class WESolveResult:
    """A solver's best flow with its certified equilibrium violation.

    ``potential_value`` is present only for congestion-backed solves.
    ``max_violation`` is the raw signed worst violation as reported by
    :func:`verify_we` on the returned flow.
    """

    flow: FlowProfile
    potential_value: float | None
    max_violation: float
    iterations: int


def potential_value(spec: CongestionSpec, flow: FlowProfile, state: str):
    """Potential: sum over resources of the latency antiderivative at the load.

    Uses the exact closed form of the polynomial antiderivative, so rational
    flows give exact rational values.
    """
    from .model import load_profile

    loads = load_profile(spec, flow)
    total = 0
    for e in spec.resources:
        x = loads[e]
        coeffs = spec.latencies[(e, state)]
        term = 0
        power = x
        for j, c in enumerate(coeffs):
            # dividing by Fraction keeps rational inputs exact and floats float
            term = term + c * power / Fraction(j + 1)
            power = power * x
        total = total + term
    return total


def potential_gradient(spec: CongestionSpec, flow: FlowProfile, state: str) -> tuple:
    """Per (population, action) derivative of the potential: the action costs."""
    from .model import load_profile

    loads = load_profile(spec, flow)
    out = []
    for pop in spec.populations:
        row = []
        for action in pop.actions:
            row.append(
                sum(spec.latency_value(e, state, loads[e]) for e in spec.actions[(pop.name, action)])
            )
        out.append(tuple(row))
    return tuple(out)


def verify_we(game: GameSpec, flow: FlowProfile, state: str):
    """Worst equilibrium violation: max over k, a, b of y_a (c_a - c_b).

    Nonpositive iff the flow is a Wardrop equilibrium. Returned raw and
    signed; callers compare against their own tolerance.
    """
    worst = None
    for k, pop in enumerate(game.populations):
        if len(pop.actions) < 2:
            continue
        costs = [eval_cost(game, pop.name, a, flow, state) for a in pop.actions]
        cheapest = min(costs)
        for j, a in enumerate(pop.actions):
            y = flow.flows[k][j]
            if y == 0:
                continue
            gap = y * (costs[j] - cheapest)
            if worst is None or gap > worst:
                worst = gap
    return 0 if worst is None else worst


# ---------------------------------------------------------------------------
# Shared block-simplex potential minimizer
# ---------------------------------------------------------------------------


class _PotentialCore:
    """Minimize sum_e F_e(M x) over a product of scaled simplexes.

    ``incidence`` is the dense resource-by-variable matrix (entries may be
    fractional when variables enter loads with weights), ``polys`` the
    per-resource latency coefficient arrays (ascending powers), ``blocks``
    the [start, end) variable ranges of each simplex, and ``masses`` the
    simplex scales.
    """

    def __init__(self, incidence, polys, blocks, masses):
        self.m = np.asarray(incidence, dtype=float)
        self.polys = [np.asarray(p, dtype=float) for p in polys]
        self.dpolys = [
            np.array([j * p[j] for j in range(1, len(p))], dtype=float) if len(p) > 1 else np.zeros(1)
            for p in self.polys
        ]
        self.blocks = blocks
        self.masses = np.asarray(masses, dtype=float)
        self.n = self.m.shape[1]

    def _polyvals(self, loads, arrays):
        return np.array(
            [sum(c * loads[i] ** j for j, c in enumerate(arr)) for i, arr in enumerate(arrays)]
        )

    def costs(self, x):
        loads = self.m @ x
        vals = self._polyvals(loads, self.polys)
        return self.m.T @ vals

    def fw_vertex(self, g):
        s = np.zeros(self.n)
        for (lo, hi), mass in zip(self.blocks, self.masses):
            j = lo + int(np.argmin(g[lo:hi]))
            s[j] = mass
        return s

    def line_search(self, x, d):
        def h(t):
            return float(self.costs(x + t * d) @ d)

        h1 = h(1.0)
        if h1 <= 0:
            return 1.0
        h0 = h(0.0)
        if h0 >= 0:
            return 0.0
        return brentq(h, 0.0, 1.0, xtol=1e-14)

    def frank_wolfe(self, x, iters):
        for t in range(iters):
            g = self.costs(x)
            s = self.fw_vertex(g)
            d = s - x
            gap = float(-g @ d)
            if gap <= 1e-14:
                return x, t, gap
            x = x + self.line_search(x, d) * d
        g = self.costs(x)
        s = self.fw_vertex(g)
        return x, iters, float(g @ (x - s))

    def violation(self, x):
        g = self.costs(x)
        worst = 0.0
        for (lo, hi), mass in zip(self.blocks, self.masses):
            if hi - lo < 2 or mass <= 0:
                continue
            cheapest = float(np.min(g[lo:hi]))
            for j in range(lo, hi):
                if x[j] > 0:
                    worst = max(worst, x[j] * (g[j] - cheapest))
        return worst

    def newton_polish(self, x):
        """Solve the equal-cost system on the active support exactly.

        Returns the polished point or None. The support starts from the
        near-minimal-cost actions and is repaired by dropping actions that
        go negative and adding actions that undercut the support cost.
        """
        g = self.costs(x)
        support = []
        for (lo, hi), mass in zip(self.blocks, self.masses):
            cheapest = float(np.min(g[lo:hi]))
            scale = 1.0 + abs(cheapest)
            sup = [j for j in range(lo, hi) if x[j] > 1e-8 or g[j] <= cheapest + 1e-6 * scale]
            support.append(sup)
        for _ in range(2 * self.n + 2):
            y = self._solve_support(support, x)
            if y is None:
                return None
            changed = False
            for bi, ((lo, hi), sup) in enumerate(zip(self.blocks, support)):
                neg = [j for j in sup if y[j] < -1e-12]
                if neg and len(sup) > 1:
                    worst = min(neg, key=lambda j: y[j])
                    support[bi] = [j for j in sup if j != worst]
                    changed = True
            if changed:
                continue
            y = np.maximum(y, 0.0)
            for (lo, hi), mass in zip(self.blocks, self.masses):
                total = y[lo:hi].sum()
                if total > 0 and mass > 0:
                    y[lo:hi] *= mass / total
            g = self.costs(y)
            grew = False
            for bi, ((lo, hi), sup) in enumerate(zip(self.blocks, support)):
                in_cost = max(float(g[j]) for j in sup)
                scale = 1.0 + abs(in_cost)
                outside = [
                    j for j in range(lo, hi) if j not in sup and g[j] < in_cost - 1e-10 * scale
                ]
                if outside:
                    support[bi] = sorted(sup + [min(outside, key=lambda j: g[j])])
                    grew = True
            if grew:
                continue
            return y
        return None

    def _solve_support(self, support, x):
        index = [j for sup in support for j in sup]
        if not index:
            return None
        pos = {j: i for i, j in enumerate(index)}
        msub = self.m[:, index]
        size = len(index)
        sub = np.array([float(x[j]) for j in index])

        def embed(values):
            y = np.zeros(self.n)
            for i, j in enumerate(index):
                y[j] = values[i]
            return y

        for _round in range(60):
            y = embed(sub)
            loads = self.m @ y
            vals = self._polyvals(loads, self.polys)
            dvals = self._polyvals(loads, self.dpolys)
            g = self.m.T @ vals
            hess = msub.T @ (dvals[:, None] * msub)
            rows = []
            rhs = []
            for bi, sup in enumerate(support):
                base = sup[0]
                for j in sup[1:]:
                    rows.append(hess[pos[j], :] - hess[pos[base], :])
                    rhs.append(-(g[j] - g[base]))
                mass_row = np.zeros(size)
                for j in sup:
                    mass_row[pos[j]] = 1.0
                rows.append(mass_row)
                rhs.append(self.masses[bi] - sum(sub[pos[j]] for j in sup))
            a = np.vstack(rows)
            b = np.asarray(rhs)
            if np.max(np.abs(b)) < 1e-14:
                return y
            try:
                step, *_ = np.linalg.lstsq(a, b, rcond=None)
            except np.linalg.LinAlgError:
                return None
            sub = sub + step
            if np.max(np.abs(step)) < 1e-15:
                return embed(sub)
        return embed(sub)

    def minimize(self, x0, tol, max_iter):
        """Alternate Frank-Wolfe chunks with polish attempts."""
        x = np.asarray(x0, dtype=float)
        best = x
        best_v = self.violation(x)
        done = 0
        chunk = 10
        while done < max_iter:
            if best_v <= tol:
                break
            steps = min(chunk, max_iter - done)
            x, used, _gap = self.frank_wolfe(x, steps)
            done += used
            v = self.violation(x)
            if v < best_v:
                best, best_v = x, v
            polished = self.newton_polish(x)
            if polished is not None:
                pv = self.violation(polished)
                if pv < best_v:
                    best, best_v = polished, pv
            if used < steps:
                break
            chunk = min(chunk * 2, 80)
        return best, best_v, done


def _spec_core(spec: CongestionSpec, state: str) -> tuple[_PotentialCore, list]:
    columns = [(pop.name, a) for pop in spec.populations for a in pop.actions]
    m = np.zeros((len(spec.resources), len(columns)))
    for i, e in enumerate(spec.resources):
        for j, key in enumerate(columns):
            if e in spec.actions[key]:
                m[i, j] = 1.0
    polys = [spec.latencies[(e, state)] for e in spec.resources]
    blocks = []
    lo = 0
    for pop in spec.populations:
        blocks.append((lo, lo + len(pop.actions)))
        lo += len(pop.actions)
    core = _PotentialCore(m, polys, blocks, [1.0] * len(spec.populations))
    return core, columns


def _vector_of(flow: FlowProfile) -> np.ndarray:
    return np.array([float(v) for vec in flow.flows for v in vec])


def _profile_of(vector, game: GameSpec) -> FlowProfile:
    flows = []
    lo = 0
    for pop in game.populations:
        vec = [max(0.0, float(v)) for v in vector[lo : lo + len(pop.actions)]]
        total = sum(vec)
        if total > 0:
            vec = [v / total for v in vec]
        lo += len(pop.actions)
        flows.append(tuple(vec))
    return FlowProfile(tuple(flows))


def solve_we_potential(
    spec: CongestionSpec,
    state: str,
    tol: float = 1e-8,
    max_iter: int = 500,
    start: FlowProfile | None = None,
) -> WESolveResult:
    """Equilibrium of a congestion game by potential minimization.

    Frank-Wolfe iterations localize the support, and a Newton polish on the
    equal-cost system finishes the job; the reported violation is always
    re-measured by :func:`verify_we` on the returned flow.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    game = congestion_to_game(spec)
    if all(len(p.actions) == 1 for p in spec.populations):
        flow = uniform_flow(game)
        return WESolveResult(flow, float(potential_value(spec, flow, state)), 0.0, 0)
    core, _ = _spec_core(spec, state)
    x0 = _vector_of(start if start is not None else uniform_flow(game))
    x, _v, iters = core.minimize(x0, tol, max_iter)
    flow = _profile_of(x, game)
    violation = float(verify_we(game, flow, state))
    return WESolveResult(flow, float(potential_value(spec, flow, state)), violation, iters)


def solve_we_br(
    game: GameSpec,
    state: str,
    start: FlowProfile,
    tol: float = 1e-6,
    max_iter: int = 2000,
) -> WESolveResult:
    """Damped best response: shift mass toward cheapest actions, halving the
    step on oscillation. Works on any game; convergence is reported, not
    assumed."""
    if tol <= 0:
        raise ValueError("tol must be positive")
    flows = [list(map(float, vec)) for vec in start.flows]
    eta = 0.5
    best = [list(vec) for vec in flows]
    best_v = _br_violation(game, flows, state)
    prev_v = best_v
    iters = 0
    for iters in range(1, max_iter + 1):
        if best_v <= tol:
            break
        for k, pop in enumerate(game.populations):
            if len(pop.actions) < 2:
                continue
            costs = [float(eval_cost(game, pop.name, a, _as_profile(flows), state)) for a in pop.actions]
            cheapest = min(costs)
            winners = [j for j, c in enumerate(costs) if c <= cheapest + 1e-15]
            moved = 0.0
            for j, c in enumerate(costs):
                if j in winners:
                    continue
                shift = eta * flows[k][j] * min(1.0, c - cheapest)
                flows[k][j] -= shift
                moved += shift
            for j in winners:
                flows[k][j] += moved / len(winners)
        v = _br_violation(game, flows, state)
        if v < best_v:
            best = [list(vec) for vec in flows]
            best_v = v
        if v > prev_v + 1e-15:
            eta = max(eta / 2, 1e-9)
        prev_v = v
    flow = _as_profile(best)
    pot = None
    if game.congestion is not None:
        pot = float(potential_value(game.congestion, flow, state))
    return WESolveResult(flow, pot, float(verify_we(game, flow, state)), iters)


def _as_profile(flows) -> FlowProfile:
    out = []
    for vec in flows:
        clipped = [max(0.0, v) for v in vec]
        total = sum(clipped)
        out.append(tuple(v / total for v in clipped) if total > 0 else tuple(clipped))
    return FlowProfile(tuple(out))


def _br_violation(game, flows, state) -> float:
    return float(verify_we(game, _as_profile(flows), state))


def solve_we_multistart(
    game: GameSpec,
    state: str,
    tol: float = 1e-6,
    max_iter: int = 2000,
    extra_starts: tuple = (),
) -> list[WESolveResult]:
    """Best-response solving from every vertex plus the uniform profile.

    Returns all converged results (violation <= tol), deduplicated within
    L-infinity 10*tol, sorted lexicographically by flow.
    """
    starts = [uniform_flow(game)]
    shape = [len(p.actions) for p in game.populations]
    if math.prod(shape) <= 64:
        for choices in itertools.product(*[range(s) for s in shape]):
            from .model import vertex_flow

            starts.append(vertex_flow(game, choices))
    starts.extend(extra_starts)
    found: list[WESolveResult] = []
    for start in starts:
        result = solve_we_br(game, state, start, tol, max_iter)
        if result.max_violation > tol:
            continue
        if any(flow_linf(result.flow, r.flow) <= 10 * tol for r in found):
            continue
        found.append(result)
    found.sort(key=lambda r: tuple(tuple(map(float, vec)) for vec in r.flow.flows))
    return found


def _simplex_grid(n_actions: int, resolution: int):
    """All length-n tuples of nonnegative multiples of 1/resolution summing to 1."""
    out = []

    def rec(prefix, remaining, slots):
        if slots == 1:
            out.append(prefix + (Fraction(remaining, resolution),))
            return
        for i in range(remaining + 1):
            rec(prefix + (Fraction(i, resolution),), remaining - i, slots - 1)

    rec((), resolution, n_actions)
    return out


def grid_flows(game: GameSpec, resolution: int) -> list[FlowProfile]:
    """The product over populations of simplex lattices with the given denominator."""
    per_pop = [_simplex_grid(len(p.actions), resolution) for p in game.populations]
    size = math.prod(len(g) for g in per_pop)
    if size > 10**7:
        raise ValueError(f"grid of size {size} exceeds the 1e7 cap")
    return [FlowProfile(combo) for combo in itertools.product(*per_pop)]


def enumerate_we_grid(
    game: GameSpec, state: str, resolution: int = 64, tol: float = 1e-6
) -> list[FlowProfile]:
    """Find equilibria by scanning a lattice and polishing near-equilibria.

    Every grid flow is scored by :func:`verify_we`; flows within an adaptive
    threshold of equilibrium are polished by best response and deduplicated
    within L-infinity 10*tol. Heuristic by nature: exactness is only claimed
    for equilibria on or near the lattice.
    """
    flows = grid_flows(game, resolution)
    scored = [(float(verify_we(game, f, state)), f) for f in flows]
    spread = 0.0
    sample = flows[:: max(1, len(flows) // 128)]
    for f in sample:
        for k, pop in enumerate(game.populations):
            costs = [float(eval_cost(game, pop.name, a, f, state)) for a in pop.actions]
            spread = max(spread, max(costs) - min(costs))
    keep = max(tol, 4.0 * spread / resolution)
    # process best candidates first so an exact lattice equilibrium, not a
    # polished neighbor, is the kept representative of its cluster
    scored.sort(key=lambda t: t[0])
    result: list[FlowProfile] = []
    for v, f in scored:
        if v > keep:
            continue
        if game.congestion is not None:
            # Newton-polished potential descent reaches ~1e-12, so copies of
            # one equilibrium collapse inside the dedup radius; best response
            # can stall at ~sqrt(tol) near boundary equilibria
            polished = solve_we_potential(game.congestion, state, min(tol, 1e-10), start=f)
        else:
            polished = solve_we_br(game, state, f, tol)
        if polished.max_violation > tol:
            continue
        candidate = polished.flow
        if any(flow_linf(candidate, r) <= 10 * tol for r in result):
            continue
        result.append(candidate)
    result.sort(key=lambda f: tuple(tuple(map(float, vec)) for vec in f.flows))
    return result


def we_social_cost(game: GameSpec, flow: FlowProfile, state: str) -> float:
    return float(social_cost(game, flow, state))
