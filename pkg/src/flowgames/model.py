"""Core game objects: cost expressions, game specs, flows, and outcomes.

A game couples finitely many populations of infinitesimal players with a
finite state space. Each population splits a unit mass of players across
its actions; the cost of an action is a function of the whole flow profile
and the realized state, written in a small expression language that is
closed under exact rational evaluation.

The expression language supports rational constants, flow variables
``y[action]`` / ``y[pop][action]``, the state value ``theta`` (for games
whose states are named by rational literals), explicit per-state tables
``theta[s0=1, s1=0]``, the operators ``+ - *``, ``max``/``min``, and
nonnegative integer powers ``^``. Evaluation is type generic: rational
inputs produce exact rational outputs, float inputs produce floats.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

Real = Union[int, float, Fraction]

# Per-population mass and per-state weight tolerances for float data;
# exact rational data is checked exactly.
MASS_TOL = 1e-12


class EvaluationError(ArithmeticError):
    """A cost expression produced a non-finite or unresolvable value."""


# ---------------------------------------------------------------------------
# Cost expressions
# ---------------------------------------------------------------------------


class CostExpr:
    """Base class for cost expression nodes."""

    __slots__ = ()


@dataclass(frozen=True)
class Const(CostExpr):
    """A rational constant."""

    value: Fraction

    def __post_init__(self):
        if not isinstance(self.value, Fraction):
            object.__setattr__(self, "value", Fraction(self.value))


@dataclass(frozen=True)
class FlowVar(CostExpr):
    """The flow on one action; ``pop`` is None in single-population games."""

    pop: str | None
    action: str


@dataclass(frozen=True)
class ThetaVal(CostExpr):
    """The numeric value of the current state.

    Resolvable only when the state's name parses as a rational literal,
    e.g. states named "0" and "1".
    """


@dataclass(frozen=True)
class StateCoef(CostExpr):
    """A constant that depends on the state through an explicit table."""

    table: tuple[tuple[str, Fraction], ...]

    def __post_init__(self):
        names = [s for s, _ in self.table]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate state in coefficient table: {names}")


@dataclass(frozen=True)
class Neg(CostExpr):
    arg: CostExpr


@dataclass(frozen=True)
class Add(CostExpr):
    left: CostExpr
    right: CostExpr


@dataclass(frozen=True)
class Sub(CostExpr):
    left: CostExpr
    right: CostExpr


@dataclass(frozen=True)
class Mul(CostExpr):
    left: CostExpr
    right: CostExpr


@dataclass(frozen=True)
class MaxOf(CostExpr):
    args: tuple[CostExpr, ...]

    def __post_init__(self):
        if len(self.args) < 2:
            raise ValueError("max needs at least two arguments")


@dataclass(frozen=True)
class MinOf(CostExpr):
    args: tuple[CostExpr, ...]

    def __post_init__(self):
        if len(self.args) < 2:
            raise ValueError("min needs at least two arguments")


@dataclass(frozen=True)
class Pow(CostExpr):
    """Integer power; the exponent is a fixed nonnegative integer."""

    base: CostExpr
    exponent: int

    def __post_init__(self):
        if not isinstance(self.exponent, int) or self.exponent < 0:
            raise ValueError(f"exponent must be a nonnegative integer, got {self.exponent!r}")


def flow_vars(expr: CostExpr) -> set[tuple[str | None, str]]:
    """Collect the (pop, action) pairs referenced by an expression."""
    out: set[tuple[str | None, str]] = set()
    stack = [expr]
    while stack:
        node = stack.pop()
        if isinstance(node, FlowVar):
            out.add((node.pop, node.action))
        elif isinstance(node, Neg):
            stack.append(node.arg)
        elif isinstance(node, (Add, Sub, Mul)):
            stack.append(node.left)
            stack.append(node.right)
        elif isinstance(node, (MaxOf, MinOf)):
            stack.extend(node.args)
        elif isinstance(node, Pow):
            stack.append(node.base)
    return out


def _eval_expr(expr: CostExpr, resolve, state: str):
    """Evaluate recursively; ``resolve(pop, action)`` yields flow values."""
    if isinstance(expr, Const):
        return expr.value
    if isinstance(expr, FlowVar):
        return resolve(expr.pop, expr.action)
    if isinstance(expr, ThetaVal):
        try:
            return Fraction(state)
        except ValueError:
            raise EvaluationError(
                f"state {state!r} is not a rational literal; 'theta' cannot be resolved"
            ) from None
    if isinstance(expr, StateCoef):
        for name, value in expr.table:
            if name == state:
                return value
        raise EvaluationError(f"state {state!r} missing from coefficient table")
    if isinstance(expr, Neg):
        return -_eval_expr(expr.arg, resolve, state)
    if isinstance(expr, Add):
        return _eval_expr(expr.left, resolve, state) + _eval_expr(expr.right, resolve, state)
    if isinstance(expr, Sub):
        return _eval_expr(expr.left, resolve, state) - _eval_expr(expr.right, resolve, state)
    if isinstance(expr, Mul):
        return _eval_expr(expr.left, resolve, state) * _eval_expr(expr.right, resolve, state)
    if isinstance(expr, MaxOf):
        return max(_eval_expr(a, resolve, state) for a in expr.args)
    if isinstance(expr, MinOf):
        return min(_eval_expr(a, resolve, state) for a in expr.args)
    if isinstance(expr, Pow):
        return _eval_expr(expr.base, resolve, state) ** expr.exponent
    raise TypeError(f"unknown expression node {type(expr).__name__}")


def format_expr(expr: CostExpr) -> str:
    """Render an expression in the mini-language (parseable canonical form)."""
    return _format(expr, 0)


def _format(expr: CostExpr, parent_prec: int) -> str:
    # precedence: + - (1), * (2), unary - (3), ^ (4), atoms (5)
    if isinstance(expr, Const):
        text = str(expr.value)
        prec = 5 if expr.value >= 0 else 3
    elif isinstance(expr, FlowVar):
        text = f"y[{expr.action}]" if expr.pop is None else f"y[{expr.pop}][{expr.action}]"
        prec = 5
    elif isinstance(expr, ThetaVal):
        text, prec = "theta", 5
    elif isinstance(expr, StateCoef):
        inner = ", ".join(f"{s}={v}" for s, v in expr.table)
        text, prec = f"theta[{inner}]", 5
    elif isinstance(expr, Neg):
        text, prec = f"-{_format(expr.arg, 3)}", 3
    elif isinstance(expr, Add):
        text, prec = f"{_format(expr.left, 1)} + {_format(expr.right, 2)}", 1
    elif isinstance(expr, Sub):
        text, prec = f"{_format(expr.left, 1)} - {_format(expr.right, 2)}", 1
    elif isinstance(expr, Mul):
        text, prec = f"{_format(expr.left, 2)}*{_format(expr.right, 3)}", 2
    elif isinstance(expr, MaxOf):
        text, prec = "max(" + ", ".join(_format(a, 0) for a in expr.args) + ")", 5
    elif isinstance(expr, MinOf):
        text, prec = "min(" + ", ".join(_format(a, 0) for a in expr.args) + ")", 5
    elif isinstance(expr, Pow):
        text, prec = f"{_format(expr.base, 5)}^{expr.exponent}", 4
    else:
        raise TypeError(f"unknown expression node {type(expr).__name__}")
    if prec < parent_prec:
        return f"({text})"
    return text


# ---------------------------------------------------------------------------
# Expression parser
# ---------------------------------------------------------------------------


class CostParseError(ValueError):
    """Raised on malformed expression text; carries a 0-based column."""

    def __init__(self, message: str, column: int):
        super().__init__(f"column {column + 1}: {message}")
        self.column = column
        self.bare_message = message


_TOKEN_RE = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d+)?)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>\*\*|[-+*/^\[\](),=]))"
)


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            stripped = text[pos:].lstrip()
            if not stripped:
                break
            col = len(text) - len(stripped)
            raise CostParseError(f"unexpected character {stripped[0]!r}", col)
        if match.lastgroup == "num":
            tokens.append(("num", match.group("num"), match.start("num")))
        elif match.lastgroup == "name":
            tokens.append(("name", match.group("name"), match.start("name")))
        else:
            op = match.group("op")
            tokens.append(("op", "^" if op == "**" else op, match.start("op")))
        pos = match.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    def peek(self):
        return self.tokens[self.i]

    def next(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str):
        kind, value, col = self.next()
        if kind != "op" or value != op:
            raise CostParseError(f"expected {op!r}", col)

    def fail(self, message: str):
        raise CostParseError(message, self.peek()[2])

    def parse(self) -> CostExpr:
        expr = self.expr()
        if self.peek()[0] != "end":
            self.fail(f"unexpected {self.peek()[1]!r}")
        return expr

    def expr(self) -> CostExpr:
        node = self.term()
        while self.peek()[:2] in (("op", "+"), ("op", "-")):
            op = self.next()[1]
            rhs = self.term()
            node = Add(node, rhs) if op == "+" else Sub(node, rhs)
        return node

    def term(self) -> CostExpr:
        node = self.factor()
        while self.peek()[:2] == ("op", "*"):
            self.next()
            node = Mul(node, self.factor())
        return node

    def factor(self) -> CostExpr:
        if self.peek()[:2] == ("op", "-"):
            self.next()
            return Neg(self.factor())
        return self.power()

    def power(self) -> CostExpr:
        base = self.atom()
        if self.peek()[:2] == ("op", "^"):
            self.next()
            kind, value, col = self.next()
            if kind != "num" or "." in value:
                raise CostParseError("exponent must be a nonnegative integer", col)
            return Pow(base, int(value))
        return base

    def atom(self) -> CostExpr:
        kind, value, col = self.next()
        if kind == "num":
            return Const(self.rational_tail(value, col))
        if kind == "op" and value == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        if kind == "name":
            if value == "y":
                return self.flow_var()
            if value == "theta":
                if self.peek()[:2] == ("op", "["):
                    return self.state_table()
                return ThetaVal()
            if value in ("max", "min"):
                self.expect_op("(")
                args = [self.expr()]
                while self.peek()[:2] == ("op", ","):
                    self.next()
                    args.append(self.expr())
                self.expect_op(")")
                if len(args) < 2:
                    raise CostParseError(f"{value} needs at least two arguments", col)
                node_cls = MaxOf if value == "max" else MinOf
                return node_cls(tuple(args))
            raise CostParseError(f"unknown identifier {value!r}", col)
        raise CostParseError(f"expected a value, got {value!r}" if value else "unexpected end", col)

    def rational_tail(self, text: str, col: int) -> Fraction:
        # "3/4" is a rational literal, not a division operator
        if self.peek()[:2] == ("op", "/"):
            self.next()
            kind, denom, dcol = self.next()
            if kind != "num" or "." in denom or "." in text:
                raise CostParseError("fraction literals need integer parts", dcol)
            if int(denom) == 0:
                raise CostParseError("zero denominator", dcol)
            return Fraction(int(text), int(denom))
        return Fraction(text)

    def name_in_brackets(self) -> str:
        self.expect_op("[")
        kind, value, col = self.next()
        if kind not in ("name", "num"):
            raise CostParseError("expected a name", col)
        self.expect_op("]")
        return value

    def flow_var(self) -> FlowVar:
        first = self.name_in_brackets()
        if self.peek()[:2] == ("op", "["):
            second = self.name_in_brackets()
            return FlowVar(first, second)
        return FlowVar(None, first)

    def state_table(self) -> StateCoef:
        self.expect_op("[")
        items = []
        while True:
            kind, name, col = self.next()
            if kind not in ("name", "num"):
                raise CostParseError("expected a state name", col)
            self.expect_op("=")
            kind2, value, vcol = self.next()
            if kind2 != "num":
                raise CostParseError("expected a rational value", vcol)
            items.append((name, self.rational_tail(value, vcol)))
            kind3, punct, pcol = self.next()
            if punct == "]":
                break
            if punct != ",":
                raise CostParseError("expected ',' or ']'", pcol)
        return StateCoef(tuple(items))


def parse_cost(text: str) -> CostExpr:
    """Parse an expression string like ``max(2 - 4*y[b], 4*y[b] - 2)``.

    Raises:
        CostParseError: on malformed input, with the offending column.
    """
    return _Parser(text).parse()


def parse_rational(text: str) -> Fraction:
    """Parse "3", "3/4", or "0.5" into an exact rational."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"not a rational literal: {text!r}") from None


# ---------------------------------------------------------------------------
# Game containers
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Population:
    name: str
    actions: tuple[str, ...]

    def __post_init__(self):
        if not self.actions:
            raise ValueError(f"population {self.name!r} has no actions")
        if len(set(self.actions)) != len(self.actions):
            raise ValueError(f"population {self.name!r} has duplicate actions")


@dataclass(frozen=True)
class CongestionSpec:
    """A resource-based game: action costs add up latencies of used resources.

    Fields:
        resources: resource names.
        latencies: (resource, state) -> polynomial coefficients in ascending
            powers, all nonnegative (hence nondecreasing load-cost maps).
        actions: (pop, action) -> the nonempty frozenset of resources used.
        populations: population structure shared with the derived game.
        states: state names.
        prior: per-state probabilities used when deriving a full game.
    """

    resources: tuple[str, ...]
    latencies: dict
    actions: dict
    populations: tuple[Population, ...]
    states: tuple[str, ...]
    prior: tuple[Fraction, ...]

    def __post_init__(self):
        if not self.resources:
            raise ValueError("no resources")
        if len(set(self.resources)) != len(self.resources):
            raise ValueError("duplicate resource names")
        if not self.states:
            raise ValueError("no states")
        if len(self.prior) != len(self.states):
            raise ValueError("prior length does not match state count")
        known = set(self.resources)
        for pop in self.populations:
            for action in pop.actions:
                subset = self.actions.get((pop.name, action))
                if subset is None:
                    raise ValueError(f"no resource set for action ({pop.name!r}, {action!r})")
                if not subset:
                    raise ValueError(f"action ({pop.name!r}, {action!r}) uses no resources")
                if not set(subset) <= known:
                    raise ValueError(f"action ({pop.name!r}, {action!r}) uses unknown resources")
        for e in self.resources:
            for s in self.states:
                coeffs = self.latencies.get((e, s))
                if coeffs is None:
                    raise ValueError(f"no latency for resource {e!r} in state {s!r}")
                if any(c < 0 for c in coeffs):
                    raise ValueError(f"negative latency coefficient on {e!r} in state {s!r}")
        self._check_monotone()

    def _check_monotone(self):
        # redundant given nonnegative coefficients, but cheap: sample the
        # derivative sign on [0, |populations|]
        top = max(1, len(self.populations))
        samples = [top * i / 16 for i in range(17)]
        for (e, s), coeffs in self.latencies.items():
            for x in samples:
                d = sum(j * float(c) * x ** (j - 1) for j, c in enumerate(coeffs) if j >= 1)
                if d < -1e-12:
                    raise ValueError(f"latency on {e!r} in state {s!r} is decreasing at {x}")

    def latency_value(self, resource: str, state: str, load):
        """Evaluate one latency polynomial; exact on rational loads."""
        total = 0
        power = 1
        for c in self.latencies[(resource, state)]:
            total = total + c * power
            power = power * load
        return total


@dataclass(frozen=True)
class GameSpec:
    """A finite-population anonymous game with state-dependent costs.

    Structural problems (missing costs, duplicate names) raise ValueError at
    construction; numeric invariants such as the prior summing to 1 are
    reported by :func:`validate_game` so that diagnostic tooling can inspect
    malformed instances.
    """

    populations: tuple[Population, ...]
    states: tuple[str, ...]
    prior: tuple[Fraction, ...]
    costs: dict
    congestion: CongestionSpec | None = None
    _pop_index: dict = field(init=False, repr=False, compare=False, default=None)
    _act_index: dict = field(init=False, repr=False, compare=False, default=None)

    def __post_init__(self):
        if not self.populations:
            raise ValueError("no populations")
        names = [p.name for p in self.populations]
        if len(set(names)) != len(names):
            raise ValueError("duplicate population names")
        if not self.states:
            raise ValueError("no states")
        if len(set(self.states)) != len(self.states):
            raise ValueError("duplicate state names")
        if len(self.prior) != len(self.states):
            raise ValueError("prior length does not match state count")
        expected = {(p.name, a) for p in self.populations for a in p.actions}
        got = set(self.costs)
        if got != expected:
            missing = sorted(expected - got)
            extra = sorted(got - expected)
            raise ValueError(f"cost table mismatch: missing {missing}, extra {extra}")
        object.__setattr__(self, "_pop_index", {p.name: i for i, p in enumerate(self.populations)})
        object.__setattr__(
            self,
            "_act_index",
            {(p.name, a): j for p in self.populations for j, a in enumerate(p.actions)},
        )

    def population_index(self, pop: str) -> int:
        try:
            return self._pop_index[pop]
        except KeyError:
            raise ValueError(f"unknown population {pop!r}") from None

    def action_index(self, pop: str, action: str) -> int:
        try:
            return self._act_index[(pop, action)]
        except KeyError:
            raise ValueError(f"unknown action {action!r} in population {pop!r}") from None

    def state_index(self, state: str) -> int:
        try:
            return self.states.index(state)
        except ValueError:
            raise ValueError(f"unknown state {state!r}") from None

    def prior_of(self, state: str) -> Fraction:
        return self.prior[self.state_index(state)]


@dataclass(frozen=True)
class FlowProfile:
    """One flow vector per population; per-population entries sum to the mass.

    ``masses`` defaults to 1 per population; scaled masses appear when a
    profile describes a sub-population inside an information structure.
    """

    flows: tuple
    masses: tuple = None

    def __post_init__(self):
        flows = tuple(tuple(v for v in vec) for vec in self.flows)
        object.__setattr__(self, "flows", flows)
        if not flows:
            raise ValueError("empty flow profile")
        masses = self.masses
        if masses is None:
            masses = tuple(Fraction(1) for _ in flows)
        else:
            masses = tuple(masses)
            if len(masses) != len(flows):
                raise ValueError("masses length does not match population count")
        object.__setattr__(self, "masses", masses)
        for k, vec in enumerate(flows):
            if not vec:
                raise ValueError(f"population {k} has an empty flow vector")
            for v in vec:
                if v < 0:
                    raise ValueError(f"negative flow entry {v!r} in population {k}")
            total = sum(vec)
            if abs(total - masses[k]) > MASS_TOL:
                raise ValueError(
                    f"population {k} flow sums to {float(total)!r}, expected {float(masses[k])!r}"
                )

    def value(self, pop_index: int, action_index: int):
        return self.flows[pop_index][action_index]


def flow_linf(a: FlowProfile, b: FlowProfile) -> float:
    """L-infinity distance between two profiles with the same shape."""
    if len(a.flows) != len(b.flows):
        raise ValueError("profiles have different population counts")
    worst = 0.0
    for va, vb in zip(a.flows, b.flows):
        if len(va) != len(vb):
            raise ValueError("profiles have different action counts")
        for x, y in zip(va, vb):
            d = abs(float(x) - float(y))
            if d > worst:
                worst = d
    return worst


@dataclass(frozen=True)
class Outcome:
    """Per state, a finite-support distribution over flow profiles."""

    per_state: dict

    def __post_init__(self):
        if not self.per_state:
            raise ValueError("empty outcome")
        normalized = {}
        for state, atoms in self.per_state.items():
            atoms = tuple((f, w) for f, w in atoms)
            if not atoms:
                raise ValueError(f"state {state!r} has no support")
            total = 0
            for f, w in atoms:
                if not isinstance(f, FlowProfile):
                    raise ValueError(f"support of state {state!r} contains a non-flow")
                if w < 0:
                    raise ValueError(f"negative weight {w!r} in state {state!r}")
                total = total + w
            if abs(total - 1) > MASS_TOL:
                raise ValueError(f"weights in state {state!r} sum to {float(total)!r}")
            # canonical atom order makes structural equality order-free
            normalized[state] = tuple(
                sorted(atoms, key=lambda fw: tuple(tuple(map(float, v)) for v in fw[0].flows))
            )
        object.__setattr__(self, "per_state", normalized)

    def states(self) -> tuple:
        return tuple(self.per_state)


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------


def eval_cost(game: GameSpec, pop: str, action: str, flow: FlowProfile, state: str):
    """Cost of taking ``action`` in population ``pop`` at ``flow`` and ``state``.

    Exact on rational inputs; floats otherwise. Raises ValueError for unknown
    identifiers and EvaluationError if the expression fails to produce a
    finite value.
    """
    game.state_index(state)
    k = game.population_index(pop)
    game.action_index(pop, action)
    expr = game.costs[(pop, action)]

    def resolve(vpop, vaction):
        if vpop is None:
            if len(game.populations) != 1:
                raise EvaluationError(
                    f"bare flow variable y[{vaction}] in a multi-population game"
                )
            vpop = game.populations[0].name
        i = game.population_index(vpop)
        j = game.action_index(vpop, vaction)
        return flow.flows[i][j]

    value = _eval_expr(expr, resolve, state)
    if isinstance(value, float) and not math.isfinite(value):
        raise EvaluationError(f"cost of ({pop!r}, {action!r}) is not finite at {flow.flows}")
    return value


def social_cost(game: GameSpec, flow: FlowProfile, state: str):
    """Flow-weighted total cost: sum over populations and actions of y_a * c_a."""
    total = 0
    for k, pop in enumerate(game.populations):
        for j, action in enumerate(pop.actions):
            y = flow.flows[k][j]
            if y == 0:
                continue  # skip so zero-mass actions cannot poison exactness
            total = total + y * eval_cost(game, pop.name, action, flow, state)
    return total


def congestion_to_game(spec: CongestionSpec) -> GameSpec:
    """Expand a congestion spec into a full game with expression-tree costs.

    The cost of an action is the sum over its resources of the latency
    polynomial evaluated at the resource load, where the load aggregates the
    flow of every action (of every population) using that resource.
    """
    loads = {}
    for e in spec.resources:
        users = []
        for pop in spec.populations:
            for action in pop.actions:
                if e in spec.actions[(pop.name, action)]:
                    users.append(FlowVar(pop.name, action))
        if users:
            expr = users[0]
            for extra in users[1:]:
                expr = Add(expr, extra)
            loads[e] = expr

    def coef_node(e, j):
        values = [spec.latencies[(e, s)] for s in spec.states]
        per_state = [v[j] if j < len(v) else Fraction(0) for v in values]
        if all(c == per_state[0] for c in per_state):
            return Const(Fraction(per_state[0]))
        return StateCoef(tuple(zip(spec.states, map(Fraction, per_state))))

    costs = {}
    for pop in spec.populations:
        for action in pop.actions:
            terms = []
            for e in sorted(spec.actions[(pop.name, action)], key=spec.resources.index):
                degree = max(len(spec.latencies[(e, s)]) for s in spec.states)
                for j in range(degree):
                    if all(
                        (j >= len(spec.latencies[(e, s)]) or spec.latencies[(e, s)][j] == 0)
                        for s in spec.states
                    ):
                        continue
                    coef = coef_node(e, j)
                    if j == 0:
                        terms.append(coef)
                    else:
                        base = loads[e] if j == 1 else Pow(loads[e], j)
                        if isinstance(coef, Const) and coef.value == 1:
                            terms.append(base)
                        else:
                            terms.append(Mul(coef, base))
            if not terms:
                expr: CostExpr = Const(Fraction(0))
            else:
                expr = terms[0]
                for extra in terms[1:]:
                    expr = Add(expr, extra)
            costs[(pop.name, action)] = expr
    return GameSpec(
        populations=spec.populations,
        states=spec.states,
        prior=spec.prior,
        costs=costs,
        congestion=spec,
    )


def load_profile(spec: CongestionSpec, flow: FlowProfile) -> dict:
    """Resource loads: each resource collects the flow of all actions using it."""
    loads = {e: 0 for e in spec.resources}
    for k, pop in enumerate(spec.populations):
        for j, action in enumerate(pop.actions):
            y = flow.flows[k][j]
            for e in spec.actions[(pop.name, action)]:
                loads[e] = loads[e] + y
    return loads


def validate_game(game: GameSpec) -> list[str]:
    """Collect every violated game invariant; an empty list means valid."""
    problems = []
    total = sum(game.prior)
    if total != 1 and abs(float(total) - 1.0) > MASS_TOL:
        problems.append(f"prior does not sum to 1 (sum is {float(total)!r})")
    for s, p in zip(game.states, game.prior):
        if p < 0:
            problems.append(f"prior of state {s!r} is negative")
        elif p == 0:
            problems.append(f"prior of state {s!r} is zero (full support required)")
    declared = {(p.name, a) for p in game.populations for a in p.actions}
    single = len(game.populations) == 1
    sole = game.populations[0].name
    for (pop, action), expr in sorted(game.costs.items()):
        for vpop, vaction in sorted(flow_vars(expr), key=lambda t: (t[0] or "", t[1])):
            resolved = vpop
            if resolved is None:
                if not single:
                    problems.append(
                        f"cost of ({pop!r}, {action!r}) uses bare y[{vaction}] "
                        "in a multi-population game"
                    )
                    continue
                resolved = sole
            if (resolved, vaction) not in declared:
                problems.append(
                    f"cost of ({pop!r}, {action!r}) references unbound flow "
                    f"variable y[{resolved}][{vaction}]"
                )
    return problems


def uniform_flow(game: GameSpec) -> FlowProfile:
    """The profile splitting each population's mass evenly across actions."""
    return FlowProfile(
        tuple(
            tuple(Fraction(1, len(p.actions)) for _ in p.actions) for p in game.populations
        )
    )


def vertex_flow(game: GameSpec, choices: tuple[int, ...]) -> FlowProfile:
    """The profile putting all of population k's mass on action choices[k]."""
    return FlowProfile(
        tuple(
            tuple(Fraction(1) if j == choices[k] else Fraction(0) for j in range(len(p.actions)))
            for k, p in enumerate(game.populations)
        )
    )
