"""A small arithmetic expression language and file-loadable model definitions.

Grammar (standard precedence, ``^`` right-associative, unary minus binds
looser than ``^``)::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor)*
    factor := '-'? atom ('^' factor)?
    atom   := number | identifier | call | '(' expr ')'

Evaluation is over 64-bit floats; division by zero and domain errors raise
:class:`~dynwire.errors.ExprEvalError` rather than injecting NaN or
infinity silently.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Callable, Mapping, Union

import numpy as np

from .errors import ExprEvalError, ExprSyntaxError, ModelSpecError
from .dynam import Machine, ResourceSharer
from .finset import FinFunction

__all__ = [
    "Expr",
    "Num",
    "Var",
    "Neg",
    "BinOp",
    "Call",
    "parse",
    "format_expr",
    "eval_expr",
    "compile_expr",
    "free_variables",
    "ModelSpec",
    "spec_violations",
    "instantiate",
    "builtin_model",
    "BUILTIN_MODELS",
    "spec_to_json",
    "spec_from_json",
]


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Num:
    value: float  # nonnegative; negative literals parse as Neg(Num(...))


@dataclass(frozen=True)
class Var:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / ^
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Call:
    fn: str  # one of sin cos exp
    arg: "Expr"


Expr = Union[Num, Var, Neg, BinOp, Call]

FUNCTIONS: dict[str, Callable[[float], float]] = {
    "sin": math.sin,
    "cos": math.cos,
    "exp": math.exp,
}


# ---------------------------------------------------------------------------
# Parsing

_TOKEN_RE = re.compile(
    r"""
    (?P<NUMBER>\d+(\.\d+)?([eE][+-]?\d+)?)
  | (?P<IDENT>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<OP>[-+*/^()])
  | (?P<WS>\s+)
    """,
    re.VERBOSE,
)


@dataclass
class _Token:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        match = _TOKEN_RE.match(text, pos)
        if match is None:
            raise ExprSyntaxError(
                f"unexpected character {text[pos]!r}",
                pos,
                frozenset({"number", "identifier", "operator"}),
            )
        kind = match.lastgroup or ""
        if kind != "WS":
            tokens.append(_Token(kind if kind != "OP" else match.group(), match.group(), pos))
        pos = match.end()
    tokens.append(_Token("END", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str):
        self.tokens = _tokenize(text)
        self.i = 0

    @property
    def current(self) -> _Token:
        return self.tokens[self.i]

    def advance(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def fail(self, expected: frozenset[str]):
        tok = self.current
        what = "end of input" if tok.kind == "END" else repr(tok.text)
        raise ExprSyntaxError(f"unexpected {what}", tok.pos, expected)

    def expr(self) -> Expr:
        node = self.term()
        while self.current.kind in ("+", "-"):
            op = self.advance().kind
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Expr:
        node = self.factor()
        while self.current.kind in ("*", "/"):
            op = self.advance().kind
            node = BinOp(op, node, self.factor())
        return node

    def factor(self) -> Expr:
        negate = False
        if self.current.kind == "-":
            self.advance()
            negate = True
        node = self.atom()
        if self.current.kind == "^":
            self.advance()
            node = BinOp("^", node, self.factor())
        return Neg(node) if negate else node

    def atom(self) -> Expr:
        tok = self.current
        if tok.kind == "NUMBER":
            self.advance()
            return Num(float(tok.text))
        if tok.kind == "IDENT":
            self.advance()
            if self.current.kind == "(":
                if tok.text not in FUNCTIONS:
                    raise ExprSyntaxError(
                        f"unknown function {tok.text!r}",
                        tok.pos,
                        frozenset(FUNCTIONS),
                    )
                self.advance()
                arg = self.expr()
                if self.current.kind != ")":
                    self.fail(frozenset({")"}))
                self.advance()
                return Call(tok.text, arg)
            return Var(tok.text)
        if tok.kind == "(":
            self.advance()
            node = self.expr()
            if self.current.kind != ")":
                self.fail(frozenset({")"}))
            self.advance()
            return node
        self.fail(frozenset({"number", "identifier", "(", "-"}))
        raise AssertionError("unreachable")


def parse(text: str) -> Expr:
    """Parse expression text; errors carry the byte offset and expected tokens."""
    parser = _Parser(text)
    node = parser.expr()
    if parser.current.kind != "END":
        parser.fail(frozenset({"+", "-", "*", "/", "^", "end of input"}))
    return node


# ---------------------------------------------------------------------------
# Printing (inverse of parse on well-formed ASTs)

_PREC = {"+": 1, "-": 1, "*": 2, "/": 2, "^": 3}
_NEG_PREC = 2.5
_ATOM_PREC = 4.0


def _prec(e: Expr) -> float:
    if isinstance(e, BinOp):
        return _PREC[e.op]
    if isinstance(e, Neg):
        return _NEG_PREC
    return _ATOM_PREC


def format_expr(e: Expr) -> str:
    """Render an AST to text that parses back to the same AST."""
    if isinstance(e, Num):
        if e.value < 0 or math.isnan(e.value) or math.isinf(e.value):
            raise ModelSpecError(f"literal {e.value!r} is not printable")
        return repr(float(e.value))
    if isinstance(e, Var):
        return e.name
    if isinstance(e, Neg):
        inner = format_expr(e.operand)
        # Only atoms and powers may follow a unary minus without parens.
        if _prec(e.operand) < 3:
            inner = f"({inner})"
        return f"-{inner}"
    if isinstance(e, Call):
        return f"{e.fn}({format_expr(e.arg)})"
    if isinstance(e, BinOp):
        p = _PREC[e.op]
        left = format_expr(e.left)
        right = format_expr(e.right)
        if e.op == "^":
            if _prec(e.left) <= p:
                left = f"({left})"
            if _prec(e.right) < p:
                right = f"({right})"
        else:
            if _prec(e.left) < p:
                left = f"({left})"
            if _prec(e.right) <= p:
                right = f"({right})"
        return f"{left}{e.op}{right}"
    raise TypeError(f"not an expression: {type(e).__name__}")


# ---------------------------------------------------------------------------
# Evaluation


def compile_expr(e: Expr) -> Callable[[Mapping[str, float]], float]:
    """Compile an AST to a closure tree; shared by eval_expr and instantiate."""
    if isinstance(e, Num):
        value = float(e.value)
        return lambda env: value
    if isinstance(e, Var):
        name = e.name

        def var(env: Mapping[str, float]) -> float:
            try:
                return env[name]
            except KeyError:
                raise ExprEvalError(f"unbound variable {name!r}") from None

        return var
    if isinstance(e, Neg):
        inner = compile_expr(e.operand)
        return lambda env: -inner(env)
    if isinstance(e, Call):
        fn = FUNCTIONS[e.fn]
        arg = compile_expr(e.arg)

        def call(env: Mapping[str, float]) -> float:
            try:
                return fn(arg(env))
            except (ValueError, OverflowError) as exc:
                raise ExprEvalError(f"{e.fn}: {exc}") from None

        return call
    if isinstance(e, BinOp):
        left = compile_expr(e.left)
        right = compile_expr(e.right)
        op = e.op
        if op == "+":
            return lambda env: left(env) + right(env)
        if op == "-":
            return lambda env: left(env) - right(env)
        if op == "*":
            return lambda env: left(env) * right(env)
        if op == "/":

            def div(env: Mapping[str, float]) -> float:
                denom = right(env)
                if denom == 0.0:
                    raise ExprEvalError("division by zero")
                return left(env) / denom

            return div

        def power(env: Mapping[str, float]) -> float:
            try:
                return math.pow(left(env), right(env))
            except (ValueError, OverflowError) as exc:
                raise ExprEvalError(f"power: {exc}") from None

        return power
    raise TypeError(f"not an expression: {type(e).__name__}")


def eval_expr(e: Expr, env: Mapping[str, float]) -> float:
    """Evaluate with every free variable bound; non-finite results are errors."""
    result = compile_expr(e)(env)
    if not math.isfinite(result):
        raise ExprEvalError(f"evaluation produced a non-finite value {result!r}")
    return result


def free_variables(e: Expr) -> set[str]:
    if isinstance(e, Num):
        return set()
    if isinstance(e, Var):
        return {e.name}
    if isinstance(e, Neg):
        return free_variables(e.operand)
    if isinstance(e, Call):
        return free_variables(e.arg)
    if isinstance(e, BinOp):
        return free_variables(e.left) | free_variables(e.right)
    raise TypeError(f"not an expression: {type(e).__name__}")


# ---------------------------------------------------------------------------
# Model specifications


@dataclass(frozen=True)
class ModelSpec:
    """A serializable elementary system definition.

    Machines declare ``inputs`` and a ``readout`` expression per output;
    sharers declare ``ports`` as a list of state names.  Readout expressions
    may reference states and parameters only, since readouts are functions
    of state.
    """

    kind: str  # "machine" | "sharer"
    flavor: str  # "continuous" | "discrete"
    states: tuple[str, ...]
    dynamics: dict[str, Expr]
    inputs: tuple[str, ...] = ()
    params: dict[str, float] = field(default_factory=dict)
    readout: tuple[Expr, ...] = ()
    ports: tuple[str, ...] = ()


def spec_violations(spec: ModelSpec) -> list[str]:
    """All consistency problems of a spec, as human-readable strings."""
    problems = []
    if spec.kind not in ("machine", "sharer"):
        problems.append(f"unknown kind {spec.kind!r}")
    if spec.flavor not in ("continuous", "discrete"):
        problems.append(f"unknown flavor {spec.flavor!r}")
    names = list(spec.states) + list(spec.inputs) + list(spec.params)
    if len(set(names)) != len(names):
        problems.append("state, input, and parameter names must be distinct")
    missing = [s for s in spec.states if s not in spec.dynamics]
    if missing:
        problems.append(f"states without dynamics: {', '.join(missing)}")
    extra = [s for s in spec.dynamics if s not in spec.states]
    if extra:
        problems.append(f"dynamics for undeclared states: {', '.join(extra)}")
    bound = set(spec.states) | set(spec.inputs) | set(spec.params)
    for state, expr in spec.dynamics.items():
        for name in sorted(free_variables(expr) - bound):
            problems.append(f"dynamics of {state!r} references unbound name {name!r}")
    state_bound = set(spec.states) | set(spec.params)
    for k, expr in enumerate(spec.readout):
        for name in sorted(free_variables(expr) - state_bound):
            problems.append(
                f"readout {k} references {name!r}, which is not a state or parameter"
            )
    if spec.kind == "machine":
        if spec.ports:
            problems.append("machines do not declare ports")
    else:
        if spec.inputs or spec.readout:
            problems.append("sharers do not declare inputs or readout")
        for k, port in enumerate(spec.ports):
            if port not in spec.states:
                problems.append(f"port {k} references unknown state {port!r}")
    return problems


def instantiate(spec: ModelSpec) -> Machine | ResourceSharer:
    """Build an evaluatable machine or sharer from a spec."""
    problems = spec_violations(spec)
    if problems:
        raise ModelSpecError("; ".join(problems))

    params = {k: float(v) for k, v in spec.params.items()}
    states = spec.states
    dyn_fns = [compile_expr(spec.dynamics[s]) for s in states]

    def guard(value: float, what: str) -> float:
        if not math.isfinite(value):
            raise ExprEvalError(f"{what} produced a non-finite value")
        return value

    if spec.kind == "machine":
        inputs = spec.inputs
        read_fns = [compile_expr(e) for e in spec.readout]

        def dynamics(a: np.ndarray, x: np.ndarray) -> np.ndarray:
            env = dict(params)
            env.update(zip(inputs, a.tolist()))
            env.update(zip(states, x.tolist()))
            return np.array(
                [guard(f(env), f"dynamics of {s!r}") for s, f in zip(states, dyn_fns)]
            )

        def readout(x: np.ndarray) -> np.ndarray:
            env = dict(params)
            env.update(zip(states, x.tolist()))
            return np.array([guard(f(env), "readout") for f in read_fns])

        return Machine(
            len(inputs), len(states), len(spec.readout), dynamics, readout, spec.flavor
        )

    index = {s: k for k, s in enumerate(states)}
    portmap = FinFunction(len(spec.ports), len(states), tuple(index[p] for p in spec.ports))

    def sharer_dynamics(x: np.ndarray) -> np.ndarray:
        env = dict(params)
        env.update(zip(states, x.tolist()))
        return np.array(
            [guard(f(env), f"dynamics of {s!r}") for s, f in zip(states, dyn_fns)]
        )

    return ResourceSharer(len(spec.ports), len(states), portmap, sharer_dynamics, spec.flavor)


# ---------------------------------------------------------------------------
# Built-in models.  Parameters are always explicit: defaults belong in config
# files, not here.


def _sir_city(params: Mapping[str, float]) -> ModelSpec:
    # Total in/outflow is routed proportionally to compartment shares, which
    # keeps populations nonnegative and conserves people under permutation
    # wirings.  Readout is the identity on (S, I, R).
    flows = {
        "S": "inflow*S/(S+I+R) - outflow*S/(S+I+R)",
        "I": "inflow*I/(S+I+R) - outflow*I/(S+I+R)",
        "R": "inflow*R/(S+I+R) - outflow*R/(S+I+R)",
    }
    return ModelSpec(
        kind="machine",
        flavor="continuous",
        states=("S", "I", "R"),
        inputs=("inflow", "outflow"),
        params=dict(params),
        dynamics={
            "S": parse("-beta*S*I + " + flows["S"]),
            "I": parse("beta*S*I - gamma*I + " + flows["I"]),
            "R": parse("gamma*I + " + flows["R"]),
        },
        readout=(parse("S"), parse("I"), parse("R")),
    )


def _lv_predation(params: Mapping[str, float]) -> ModelSpec:
    # Bilinear predation coupling: prey loses a*prey*pred, predator gains
    # b*prey*pred.  Both species are shared through ports.
    return ModelSpec(
        kind="sharer",
        flavor="continuous",
        states=("prey", "pred"),
        params=dict(params),
        dynamics={"prey": parse("-a*prey*pred"), "pred": parse("b*prey*pred")},
        ports=("prey", "pred"),
    )


def _lv_growth(params: Mapping[str, float]) -> ModelSpec:
    return ModelSpec(
        kind="sharer",
        flavor="continuous",
        states=("pop",),
        params=dict(params),
        dynamics={"pop": parse("r*pop")},
        ports=("pop",),
    )


def _lv_decline(params: Mapping[str, float]) -> ModelSpec:
    return ModelSpec(
        kind="sharer",
        flavor="continuous",
        states=("pop",),
        params=dict(params),
        dynamics={"pop": parse("-r*pop")},
        ports=("pop",),
    )


def _heat_node(params: Mapping[str, float]) -> ModelSpec:
    # One grid cell of the 5-point stencil: inputs are the four neighbor
    # values (North, East, South, West) and the readout copies the cell
    # value to all four ports.
    return ModelSpec(
        kind="machine",
        flavor="continuous",
        states=("T",),
        inputs=("aN", "aE", "aS", "aW"),
        params=dict(params),
        dynamics={"T": parse("alpha*(aN+aE+aS+aW-4*T)")},
        readout=(parse("T"), parse("T"), parse("T"), parse("T")),
    )


BUILTIN_MODELS: dict[str, tuple[Callable[[Mapping[str, float]], ModelSpec], tuple[str, ...]]] = {
    "sir_city": (_sir_city, ("beta", "gamma")),
    "lv_predation": (_lv_predation, ("a", "b")),
    "lv_growth": (_lv_growth, ("r",)),
    "lv_decline": (_lv_decline, ("r",)),
    "heat_node": (_heat_node, ("alpha",)),
}


def builtin_model(name: str, params: Mapping[str, float]) -> ModelSpec:
    """A named builtin with explicitly supplied parameters."""
    try:
        builder, required = BUILTIN_MODELS[name]
    except KeyError:
        raise ModelSpecError(
            f"unknown builtin {name!r}; available: {', '.join(sorted(BUILTIN_MODELS))}"
        ) from None
    missing = sorted(set(required) - set(params))
    extra = sorted(set(params) - set(required))
    if missing:
        raise ModelSpecError(f"builtin {name!r} is missing parameters: {', '.join(missing)}")
    if extra:
        raise ModelSpecError(f"builtin {name!r} got unknown parameters: {', '.join(extra)}")
    return builder(params)


# ---------------------------------------------------------------------------
# JSON form


def spec_to_json(spec: ModelSpec) -> dict:
    out: dict = {
        "kind": spec.kind,
        "flavor": spec.flavor,
        "states": list(spec.states),
        "params": dict(spec.params),
        "dynamics": {s: format_expr(e) for s, e in spec.dynamics.items()},
    }
    if spec.kind == "machine":
        out["inputs"] = list(spec.inputs)
        out["readout"] = [format_expr(e) for e in spec.readout]
    else:
        out["ports"] = list(spec.ports)
    return out


def spec_from_json(data: Mapping) -> ModelSpec:
    """Parse a model JSON object; ``{"builtin": name, "params": {...}}`` is
    also accepted and resolves through the registry."""
    if "builtin" in data:
        return builtin_model(str(data["builtin"]), data.get("params", {}))
    try:
        kind = str(data["kind"])
        flavor = str(data["flavor"])
        states = tuple(str(s) for s in data["states"])
        dynamics = {str(s): parse(str(e)) for s, e in dict(data["dynamics"]).items()}
    except KeyError as exc:
        raise ModelSpecError(f"model JSON is missing key {exc.args[0]!r}") from None
    params = {str(k): float(v) for k, v in dict(data.get("params", {})).items()}
    inputs = tuple(str(s) for s in data.get("inputs", ()))
    readout = tuple(parse(str(e)) for e in data.get("readout", ()))
    ports = tuple(str(s) for s in data.get("ports", ()))
    return ModelSpec(
        kind=kind,
        flavor=flavor,
        states=states,
        dynamics=dynamics,
        inputs=inputs,
        params=params,
        readout=readout,
        ports=ports,
    )
