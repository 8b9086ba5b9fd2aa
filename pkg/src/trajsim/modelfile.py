"""Declarative model files: parse, validate, render, build environments.

A model file holds four kinds of blocks: ``meta`` (run defaults), ``resource``
declarations, ``trajectory`` definitions (activity calls, optionally with
nested sub-trajectory blocks), and ``generator`` bindings.  Expressions cover
numeric literals, strings, booleans, Inf, lists, arithmetic, comparisons and
a small set of functions; draw-free expressions are folded to constants at
build time, the rest become thunks evaluated per execution.

Example::

    meta { name = "mm1"  seed = 42  horizon = 1000  replications = 10 }
    resource server { capacity = 1 }
    trajectory main {
      seize(server, 1)
      timeout(exponential(1.1))
      release(server, 1)
    }
    generator customer { trajectory = main  dist = exponential(1.0) }
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field

from .distributions import at as dist_at
from .distributions import constant as dist_constant
from .distributions import exponential as dist_exponential
from .distributions import from_ as dist_from
from .distributions import uniform as dist_uniform
from .environment import Environment
from .errors import ModelError, ParseError
from .trajectory import Trajectory

# -- AST -----------------------------------------------------------------

_LOC = field(default=(0, 0), compare=False, repr=False)


@dataclass
class Num:
    value: float
    loc: tuple = _LOC


@dataclass
class Str:
    value: str
    loc: tuple = _LOC


@dataclass
class Flag:
    value: bool
    loc: tuple = _LOC


@dataclass
class InfLit:
    loc: tuple = _LOC


@dataclass
class ListLit:
    items: tuple
    loc: tuple = _LOC


@dataclass
class Ref:
    name: str
    loc: tuple = _LOC


@dataclass
class Arg:
    name: str | None
    value: object
    loc: tuple = _LOC


@dataclass
class Call:
    name: str
    args: tuple
    loc: tuple = _LOC


@dataclass
class Unary:
    op: str
    operand: object
    loc: tuple = _LOC


@dataclass
class Binary:
    op: str
    left: object
    right: object
    loc: tuple = _LOC


@dataclass
class SubBlock:
    name: str
    statements: tuple
    loc: tuple = _LOC


@dataclass
class ActivityStmt:
    name: str
    args: tuple
    subs: tuple
    loc: tuple = _LOC


@dataclass
class IncludeStmt:
    name: str
    loc: tuple = _LOC


@dataclass
class Assign:
    name: str
    value: object
    loc: tuple = _LOC


@dataclass
class MetaDecl:
    assigns: tuple
    loc: tuple = _LOC


@dataclass
class ResourceDecl:
    name: str
    assigns: tuple
    loc: tuple = _LOC


@dataclass
class TrajectoryDecl:
    name: str
    statements: tuple
    loc: tuple = _LOC


@dataclass
class GeneratorDecl:
    name: str
    assigns: tuple
    loc: tuple = _LOC


@dataclass
class Model:
    meta: MetaDecl | None
    resources: tuple
    trajectories: tuple
    generators: tuple
    path: str = field(default="<string>", compare=False)

    def _meta_value(self, key: str, default):
        if self.meta is not None:
            for assign in self.meta.assigns:
                if assign.name == key:
                    ok, value = fold(assign.value)
                    if ok:
                        return value
        return default

    @property
    def name(self) -> str:
        return str(self._meta_value("name", "anonymous"))

    @property
    def seed(self):
        return int(self._meta_value("seed", 0))

    @property
    def horizon(self) -> float:
        return float(self._meta_value("horizon", math.inf))

    @property
    def replications(self) -> int:
        return int(self._meta_value("replications", 1))

    @property
    def analytic(self):
        """Optional ("mm1", arrival_rate, service_rate) reference."""
        if self.meta is None:
            return None
        for assign in self.meta.assigns:
            if assign.name == "analytic":
                call = assign.value
                args = [fold(a.value)[1] for a in call.args]
                return (call.name, *args)
        return None


# -- tokenizer -----------------------------------------------------------

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r\n]+)
  | (?P<comment>\#[^\n]*)
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_.]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<op>==|!=|<=|>=|[-+*/<>=(){}\[\],])
""", re.VERBOSE)

_ESCAPES = {"n": "\n", "t": "\t", '"': '"', "\\": "\\"}


@dataclass
class _Token:
    kind: str
    value: str
    line: int
    col: int


def _tokenize(text: str, path: str) -> list[_Token]:
    tokens = []
    pos = 0
    line = 1
    line_start = 0
    n = len(text)
    while pos < n:
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            col = pos - line_start + 1
            raise ParseError(f"unexpected character {text[pos]!r}", line, col, path)
        kind = m.lastgroup
        value = m.group()
        col = pos - line_start + 1
        if kind == "ws":
            nl = value.count("\n")
            if nl:
                line += nl
                line_start = pos + value.rindex("\n") + 1
        elif kind != "comment":
            tokens.append(_Token(kind, value, line, col))
        pos = m.end()
    tokens.append(_Token("eof", "", line, pos - line_start + 1))
    return tokens


def _unquote(raw: str, line: int, col: int, path: str) -> str:
    out = []
    i = 1
    while i < len(raw) - 1:
        c = raw[i]
        if c == "\\":
            i += 1
            esc = raw[i]
            if esc not in _ESCAPES:
                raise ParseError(f"unknown escape \\{esc}", line, col, path)
            out.append(_ESCAPES[esc])
        else:
            out.append(c)
        i += 1
    return "".join(out)


# -- parser --------------------------------------------------------------

class _Parser:
    def __init__(self, text: str, path: str):
        self.tokens = _tokenize(text, path)
        self.path = path
        self.i = 0

    def peek(self) -> _Token:
        return self.tokens[self.i]

    def next(self) -> _Token:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def error(self, message: str, tok: _Token | None = None) -> ParseError:
        tok = tok or self.peek()
        return ParseError(message, tok.line, tok.col, self.path)

    def expect(self, value: str) -> _Token:
        tok = self.next()
        if tok.value != value:
            got = tok.value or "end of file"
            raise self.error(f"expected {value!r}, got {got!r}", tok)
        return tok

    def expect_ident(self, what: str) -> _Token:
        tok = self.next()
        if tok.kind != "ident":
            got = tok.value or "end of file"
            raise self.error(f"expected {what}, got {got!r}", tok)
        return tok

    # -- grammar ---------------------------------------------------------

    def parse_model(self) -> Model:
        meta = None
        resources = []
        trajectories = []
        generators = []
        while self.peek().kind != "eof":
            tok = self.expect_ident("a block keyword")
            if tok.value == "meta":
                if meta is not None:
                    raise self.error("duplicate meta block", tok)
                meta = MetaDecl(self.parse_assign_block(), (tok.line, tok.col))
            elif tok.value == "resource":
                name = self.expect_ident("a resource name")
                resources.append(ResourceDecl(
                    name.value, self.parse_assign_block(), (tok.line, tok.col)))
            elif tok.value == "trajectory":
                name = self.expect_ident("a trajectory name")
                trajectories.append(TrajectoryDecl(
                    name.value, self.parse_statement_block(), (tok.line, tok.col)))
            elif tok.value == "generator":
                name = self.expect_ident("a generator name")
                generators.append(GeneratorDecl(
                    name.value, self.parse_assign_block(), (tok.line, tok.col)))
            else:
                raise self.error(
                    f"expected meta, resource, trajectory or generator, "
                    f"got {tok.value!r}", tok)
        return Model(meta, tuple(resources), tuple(trajectories),
                     tuple(generators), self.path)

    def parse_assign_block(self) -> tuple:
        self.expect("{")
        assigns = []
        while self.peek().value != "}":
            name = self.expect_ident("an option name")
            self.expect("=")
            value = self.parse_expr()
            assigns.append(Assign(name.value, value, (name.line, name.col)))
        self.expect("}")
        return tuple(assigns)

    def parse_statement_block(self) -> tuple:
        self.expect("{")
        statements = []
        while self.peek().value != "}":
            statements.append(self.parse_statement())
        self.expect("}")
        return tuple(statements)

    def parse_statement(self):
        name = self.expect_ident("an activity name")
        loc = (name.line, name.col)
        self.expect("(")
        if name.value == "include":
            target = self.expect_ident("a trajectory name")
            self.expect(")")
            return IncludeStmt(target.value, loc)
        args = []
        if self.peek().value != ")":
            args.append(self.parse_arg())
            while self.peek().value == ",":
                self.next()
                args.append(self.parse_arg())
        self.expect(")")
        subs = []
        if self.peek().value == "{":
            self.next()
            while self.peek().value != "}":
                sub_name = self.expect_ident("a sub-trajectory block name")
                subs.append(SubBlock(sub_name.value, self.parse_statement_block(),
                                     (sub_name.line, sub_name.col)))
            self.expect("}")
        return ActivityStmt(name.value, tuple(args), tuple(subs), loc)

    def parse_arg(self) -> Arg:
        tok = self.peek()
        if (tok.kind == "ident" and self.tokens[self.i + 1].value == "="
                and self.tokens[self.i + 2].value != "="):
            self.next()
            self.next()
            return Arg(tok.value, self.parse_expr(), (tok.line, tok.col))
        return Arg(None, self.parse_expr(), (tok.line, tok.col))

    # expressions, lowest precedence first
    def parse_expr(self):
        left = self.parse_additive()
        while self.peek().value in ("==", "!=", "<", "<=", ">", ">="):
            op = self.next()
            right = self.parse_additive()
            left = Binary(op.value, left, right, (op.line, op.col))
        return left

    def parse_additive(self):
        left = self.parse_multiplicative()
        while self.peek().value in ("+", "-"):
            op = self.next()
            right = self.parse_multiplicative()
            left = Binary(op.value, left, right, (op.line, op.col))
        return left

    def parse_multiplicative(self):
        left = self.parse_unary()
        while self.peek().value in ("*", "/"):
            op = self.next()
            right = self.parse_unary()
            left = Binary(op.value, left, right, (op.line, op.col))
        return left

    def parse_unary(self):
        tok = self.peek()
        if tok.value == "-":
            self.next()
            return Unary("-", self.parse_unary(), (tok.line, tok.col))
        return self.parse_primary()

    def parse_primary(self):
        tok = self.next()
        loc = (tok.line, tok.col)
        if tok.kind == "number":
            return Num(float(tok.value), loc)
        if tok.kind == "string":
            return Str(_unquote(tok.value, tok.line, tok.col, self.path), loc)
        if tok.value == "(":
            inner = self.parse_expr()
            self.expect(")")
            return inner
        if tok.value == "[":
            items = []
            if self.peek().value != "]":
                items.append(self.parse_expr())
                while self.peek().value == ",":
                    self.next()
                    items.append(self.parse_expr())
            self.expect("]")
            return ListLit(tuple(items), loc)
        if tok.kind == "ident":
            if tok.value == "true":
                return Flag(True, loc)
            if tok.value == "false":
                return Flag(False, loc)
            if tok.value == "Inf":
                return InfLit(loc)
            if self.peek().value == "(":
                self.next()
                args = []
                if self.peek().value != ")":
                    args.append(self.parse_arg())
                    while self.peek().value == ",":
                        self.next()
                        args.append(self.parse_arg())
                self.expect(")")
                return Call(tok.value, tuple(args), loc)
            return Ref(tok.value, loc)
        got = tok.value or "end of file"
        raise self.error(f"expected an expression, got {got!r}", tok)


def parse_model(text: str, path: str = "<string>", validate: bool = True) -> Model:
    model = _Parser(text, path).parse_model()
    if validate:
        validate_model(model)
    return model


def load_model(path: str) -> Model:
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    return parse_model(text, path)


# -- constant folding and evaluation -------------------------------------

def fold(expr):
    """(True, value) when the expression is draw-free, else (False, None)."""
    if isinstance(expr, Num):
        return True, expr.value
    if isinstance(expr, (Str, Flag)):
        return True, expr.value
    if isinstance(expr, InfLit):
        return True, math.inf
    if isinstance(expr, ListLit):
        values = []
        for item in expr.items:
            ok, v = fold(item)
            if not ok:
                return False, None
            values.append(v)
        return True, values
    if isinstance(expr, Unary):
        ok, v = fold(expr.operand)
        return (True, -v) if ok else (False, None)
    if isinstance(expr, Binary):
        ok_l, left = fold(expr.left)
        ok_r, right = fold(expr.right)
        if ok_l and ok_r:
            return True, _apply_binary(expr.op, left, right)
        return False, None
    return False, None


def _apply_binary(op: str, left, right):
    if op == "+":
        return left + right
    if op == "-":
        return left - right
    if op == "*":
        return left * right
    if op == "/":
        return left / right
    if op == "==":
        return 1.0 if left == right else 0.0
    if op == "!=":
        return 1.0 if left != right else 0.0
    if op == "<":
        return 1.0 if left < right else 0.0
    if op == "<=":
        return 1.0 if left <= right else 0.0
    if op == ">":
        return 1.0 if left > right else 0.0
    return 1.0 if left >= right else 0.0


#: functions allowed in value expressions
_VALUE_FUNCTIONS = ("now", "round", "get_attribute", "exponential", "uniform",
                    "constant")
#: functions allowed only in the generator dist slot
_DIST_FUNCTIONS = ("at", "from")


def _eval(expr, env: Environment):
    if isinstance(expr, Num):
        return expr.value
    if isinstance(expr, (Str, Flag)):
        return expr.value
    if isinstance(expr, InfLit):
        return math.inf
    if isinstance(expr, ListLit):
        return [_eval(item, env) for item in expr.items]
    if isinstance(expr, Unary):
        return -_eval(expr.operand, env)
    if isinstance(expr, Binary):
        return _apply_binary(expr.op, _eval(expr.left, env),
                             _eval(expr.right, env))
    if isinstance(expr, Call):
        values = [_eval(a.value, env) for a in expr.args]
        name = expr.name
        if name == "now":
            return env.now
        if name == "round":
            return float(round(*values))
        if name == "get_attribute":
            key = str(values[0])
            global_ = bool(values[1]) if len(values) > 1 else False
            return env.get_attribute(key, global_)
        if name == "exponential":
            return float(env.rng.exponential(1.0 / values[0]))
        if name == "uniform":
            return float(env.rng.uniform(values[0], values[1]))
        if name == "constant":
            return values[0]
        raise ModelError(f"unknown function '{name}'")
    if isinstance(expr, Ref):
        raise ModelError(f"name '{expr.name}' is not a value")
    raise ModelError(f"cannot evaluate {expr!r}")


def compile_value(expr, env: Environment):
    """A constant when the expression is draw-free, else a thunk over env."""
    ok, value = fold(expr)
    if ok:
        return value
    return lambda: _eval(expr, env)


def compile_dist(expr, env: Environment):
    """Compile a generator dist expression into a distribution callable."""
    if isinstance(expr, Call):
        name = expr.name
        values = [fold(a.value)[1] for a in expr.args]
        if name == "at":
            return dist_at(*values)
        if name == "from":
            return dist_from(values[0], compile_dist(expr.args[1].value, env))
        if name == "exponential":
            batch = int(values[1]) if len(values) > 1 else 1
            return dist_exponential(env, values[0], batch)
        if name == "uniform":
            batch = int(values[2]) if len(values) > 2 else 1
            return dist_uniform(env, values[0], values[1], batch)
        if name == "constant":
            return dist_constant(values[0])
    ok, value = fold(expr)
    if ok:
        return dist_constant(value)
    return lambda: _eval(expr, env)


# -- validation ----------------------------------------------------------

#: per-activity: ordered argument names, required count, allowed sub-blocks,
#: index of the resource-name arg, index of the generator-name arg
_ACTIVITIES = {
    "log":                     (("message",), 1, (), None, None),
    "timeout":                 (("delay",), 1, (), None, None),
    "set_attribute":           (("key", "value", "global"), 2, (), None, None),
    "set_prioritization":      (("priority", "preemptible", "restart"), 3, (), None, None),
    "seize":                   (("resource", "amount", "continue"), 1,
                                ("post_seize", "reject"), 0, None),
    "seize_selected":          (("amount", "continue"), 0,
                                ("post_seize", "reject"), None, None),
    "release":                 (("resource", "amount"), 1, (), 0, None),
    "release_selected":        (("amount",), 0, (), None, None),
    "set_capacity":            (("resource", "value"), 2, (), 0, None),
    "set_capacity_selected":   (("value",), 1, (), None, None),
    "set_queue_size":          (("resource", "value"), 2, (), 0, None),
    "set_queue_size_selected": (("value",), 1, (), None, None),
    "select":                  (("resources", "policy"), 1, (), None, None),
    "branch":                  (("option", "continue"), 1, ("sub",), None, None),
    "clone":                   (("n",), 1, ("sub",), None, None),
    "synchronize":             (("wait",), 0, (), None, None),
    "rollback":                (("amount", "times", "check"), 1, (), None, None),
    "batch":                   (("n", "timeout", "permanent", "name", "rule"), 1,
                                (), None, None),
    "separate":                ((), 0, (), None, None),
    "send":                    (("signals", "delay"), 1, (), None, None),
    "trap":                    (("signals", "interruptible"), 1, ("handler",),
                                None, None),
    "untrap":                  (("signals",), 1, (), None, None),
    "wait":                    ((), 0, (), None, None),
    "leave":                   (("prob",), 1, (), None, None),
    "renege_in":               (("t",), 1, ("out",), None, None),
    "renege_if":               (("signal",), 1, ("out",), None, None),
    "renege_abort":            ((), 0, (), None, None),
    "activate":                (("generator",), 1, (), None, 0),
    "deactivate":              (("generator",), 1, (), None, 0),
    "set_trajectory":          (("generator", "trajectory"), 2, (), None, 0),
    "set_distribution":        (("generator", "dist"), 2, (), None, 0),
}

_RESOURCE_KEYS = ("capacity", "queue_size", "monitored", "preemptive",
                  "preempt_order", "queue_size_strict")
_GENERATOR_KEYS = ("trajectory", "dist", "mon", "priority", "preemptible",
                   "restart")
_META_KEYS = ("name", "seed", "horizon", "replications", "analytic")


class _Validator:
    def __init__(self, model: Model):
        self.model = model
        self.path = model.path
        self.resources = {r.name for r in model.resources}
        self.trajectories = {t.name: t for t in model.trajectories}
        self.generators = {g.name for g in model.generators}

    def error(self, message: str, loc) -> ParseError:
        return ParseError(message, loc[0], loc[1], self.path)

    def run(self) -> None:
        self.check_duplicates()
        self.check_meta()
        self.check_resources()
        self.check_generators()
        for decl in self.model.trajectories:
            self.check_statements(decl.statements)
        self.check_includes()

    def check_duplicates(self) -> None:
        for decls, what in ((self.model.resources, "resource"),
                            (self.model.trajectories, "trajectory"),
                            (self.model.generators, "generator")):
            seen = set()
            for decl in decls:
                if decl.name in seen:
                    raise self.error(f"duplicate {what} '{decl.name}'", decl.loc)
                seen.add(decl.name)

    def check_keys(self, assigns, allowed, what: str) -> None:
        seen = set()
        for assign in assigns:
            if assign.name not in allowed:
                raise self.error(
                    f"unknown {what} option '{assign.name}'", assign.loc)
            if assign.name in seen:
                raise self.error(
                    f"duplicate {what} option '{assign.name}'", assign.loc)
            seen.add(assign.name)

    def check_meta(self) -> None:
        meta = self.model.meta
        if meta is None:
            return
        self.check_keys(meta.assigns, _META_KEYS, "meta")
        for assign in meta.assigns:
            if assign.name == "analytic":
                call = assign.value
                if not isinstance(call, Call) or call.name != "mm1":
                    raise self.error("analytic must be mm1(arrival_rate, "
                                     "service_rate)", assign.loc)
                if len(call.args) != 2 or not all(
                        fold(a.value)[0] for a in call.args):
                    raise self.error("analytic mm1 needs two constant rates",
                                     assign.loc)
            elif not fold(assign.value)[0]:
                raise self.error(
                    f"meta option '{assign.name}' must be a constant", assign.loc)

    def check_resources(self) -> None:
        for decl in self.model.resources:
            self.check_keys(decl.assigns, _RESOURCE_KEYS, "resource")
            for assign in decl.assigns:
                if not fold(assign.value)[0]:
                    raise self.error(
                        f"resource option '{assign.name}' must be a constant",
                        assign.loc)

    def check_generators(self) -> None:
        for decl in self.model.generators:
            self.check_keys(decl.assigns, _GENERATOR_KEYS, "generator")
            names = {a.name for a in decl.assigns}
            if "trajectory" not in names or "dist" not in names:
                raise self.error(
                    f"generator '{decl.name}' needs trajectory and dist",
                    decl.loc)
            for assign in decl.assigns:
                if assign.name == "trajectory":
                    if not isinstance(assign.value, Ref):
                        raise self.error("trajectory must be a name", assign.loc)
                    if assign.value.name not in self.trajectories:
                        raise self.error(
                            f"unknown trajectory '{assign.value.name}'",
                            assign.loc)
                elif assign.name == "dist":
                    self.check_expr(assign.value, dist_slot=True)
                elif not fold(assign.value)[0]:
                    raise self.error(
                        f"generator option '{assign.name}' must be a constant",
                        assign.loc)

    def check_statements(self, statements) -> None:
        for stmt in statements:
            if isinstance(stmt, IncludeStmt):
                if stmt.name not in self.trajectories:
                    raise self.error(
                        f"include of unknown trajectory '{stmt.name}'", stmt.loc)
                continue
            spec = _ACTIVITIES.get(stmt.name)
            if spec is None:
                raise self.error(f"unknown activity '{stmt.name}'", stmt.loc)
            arg_names, required, sub_names, res_arg, gen_arg = spec
            self.check_args(stmt, arg_names, required, res_arg, gen_arg)
            repeatable = sub_names == ("sub",)
            seen = set()
            for sub in stmt.subs:
                if sub.name not in sub_names:
                    raise self.error(
                        f"activity '{stmt.name}' has no sub-trajectory "
                        f"'{sub.name}'", sub.loc)
                if not repeatable:
                    if sub.name in seen:
                        raise self.error(
                            f"duplicate sub-trajectory '{sub.name}'", sub.loc)
                    seen.add(sub.name)
                self.check_statements(sub.statements)

    def check_args(self, stmt: ActivityStmt, arg_names, required,
                   res_arg, gen_arg) -> None:
        given = {}
        positional = 0
        named = False
        for arg in stmt.args:
            if arg.name is None:
                if named:
                    raise self.error(
                        "positional argument after a named one", arg.loc)
                if positional >= len(arg_names):
                    raise self.error(
                        f"activity '{stmt.name}' takes at most "
                        f"{len(arg_names)} arguments", arg.loc)
                key = arg_names[positional]
                positional += 1
            else:
                named = True
                if arg.name not in arg_names:
                    raise self.error(
                        f"activity '{stmt.name}' has no argument "
                        f"'{arg.name}'", arg.loc)
                key = arg.name
            if key in given:
                raise self.error(f"duplicate argument '{key}'", arg.loc)
            given[key] = arg
        for key in arg_names[:required]:
            if key not in given:
                raise self.error(
                    f"activity '{stmt.name}' needs argument '{key}'", stmt.loc)
        for key, arg in given.items():
            index = arg_names.index(key)
            if res_arg is not None and index == res_arg:
                self.check_entity_ref(arg, self.resources, "resource")
            elif gen_arg is not None and index == gen_arg:
                self.check_entity_ref(arg, self.generators, "generator")
            elif stmt.name == "set_trajectory" and key == "trajectory":
                if not isinstance(arg.value, Ref) or \
                        arg.value.name not in self.trajectories:
                    raise self.error("unknown trajectory", arg.loc)
            elif stmt.name == "set_distribution" and key == "dist":
                self.check_expr(arg.value, dist_slot=True)
            elif stmt.name == "select" and key == "resources":
                value = arg.value
                items = value.items if isinstance(value, ListLit) else (value,)
                for item in items:
                    if isinstance(item, (Ref, Str)):
                        name = item.name if isinstance(item, Ref) else item.value
                        if name not in self.resources:
                            raise self.error(
                                f"unknown resource '{name}'", arg.loc)
                    else:
                        raise self.error(
                            "select resources must be names", arg.loc)
            else:
                self.check_expr(arg.value, dist_slot=False)

    def check_entity_ref(self, arg: Arg, known: set, what: str) -> None:
        value = arg.value
        name = None
        if isinstance(value, Ref):
            name = value.name
        elif isinstance(value, Str):
            name = value.value
        else:
            raise self.error(f"{what} argument must be a name", arg.loc)
        if name not in known:
            raise self.error(f"unknown {what} '{name}'", arg.loc)

    def check_expr(self, expr, dist_slot: bool) -> None:
        if isinstance(expr, Ref):
            raise self.error(f"name '{expr.name}' is not a value here", expr.loc)
        if isinstance(expr, (Num, Str, Flag, InfLit)):
            return
        if isinstance(expr, ListLit):
            for item in expr.items:
                self.check_expr(item, False)
            return
        if isinstance(expr, Unary):
            self.check_expr(expr.operand, False)
            return
        if isinstance(expr, Binary):
            self.check_expr(expr.left, False)
            self.check_expr(expr.right, False)
            return
        if isinstance(expr, Call):
            allowed = _VALUE_FUNCTIONS + _DIST_FUNCTIONS if dist_slot \
                else _VALUE_FUNCTIONS
            if expr.name not in allowed:
                if expr.name in _DIST_FUNCTIONS:
                    raise self.error(
                        f"'{expr.name}' is only allowed in a generator dist",
                        expr.loc)
                raise self.error(f"unknown function '{expr.name}'", expr.loc)
            inner_dist = expr.name == "from"
            for i, arg in enumerate(expr.args):
                self.check_expr(arg.value, inner_dist and i == 1)

    def check_includes(self) -> None:
        expand_trajectories(self.model)


def validate_model(model: Model) -> None:
    _Validator(model).run()


def expand_trajectories(model: Model) -> dict:
    """Trajectory statements with include() spliced in; cycles are errors."""
    decls = {t.name: t for t in model.trajectories}
    expanded: dict[str, tuple] = {}
    visiting: list[str] = []

    def expand_list(statements) -> tuple:
        out = []
        for stmt in statements:
            if isinstance(stmt, IncludeStmt):
                out.extend(expand_name(stmt.name, stmt.loc))
            elif isinstance(stmt, ActivityStmt) and stmt.subs:
                subs = tuple(SubBlock(s.name, expand_list(s.statements), s.loc)
                             for s in stmt.subs)
                out.append(ActivityStmt(stmt.name, stmt.args, subs, stmt.loc))
            else:
                out.append(stmt)
        return tuple(out)

    def expand_name(name: str, loc) -> tuple:
        if name in expanded:
            return expanded[name]
        if name in visiting:
            cycle = " -> ".join(visiting + [name])
            raise ParseError(f"include cycle: {cycle}", loc[0], loc[1],
                             model.path)
        visiting.append(name)
        result = expand_list(decls[name].statements)
        visiting.pop()
        expanded[name] = result
        return result

    for decl in model.trajectories:
        expand_name(decl.name, decl.loc)
    return expanded


# -- building an environment ---------------------------------------------

def _arg_map(stmt: ActivityStmt) -> dict:
    arg_names = _ACTIVITIES[stmt.name][0]
    out = {}
    positional = 0
    for arg in stmt.args:
        if arg.name is None:
            out[arg_names[positional]] = arg.value
            positional += 1
        else:
            out[arg.name] = arg.value
    return out

def _sub_map(stmt: ActivityStmt) -> dict:
    out: dict[str, list] = {}
    for sub in stmt.subs:
        out.setdefault(sub.name, []).append(sub)
    return out


def _name_of(expr) -> str:
    if isinstance(expr, Ref):
        return expr.name
    if isinstance(expr, Str):
        return expr.value
    raise ModelError(f"expected a name, got {expr!r}")


class _Builder:
    def __init__(self, model: Model, env: Environment):
        self.model = model
        self.env = env
        self.expanded = expand_trajectories(model)
        self.shells = {t.name: Trajectory(t.name) for t in model.trajectories}

    def build(self) -> None:
        for decl in self.model.resources:
            options = {a.name: fold(a.value)[1] for a in decl.assigns}
            self.env.add_resource(
                decl.name,
                capacity=options.get("capacity", 1),
                queue_size=options.get("queue_size", math.inf),
                monitored=bool(options.get("monitored", True)),
                preemptive=bool(options.get("preemptive", False)),
                preempt_order=str(options.get("preempt_order", "fifo")),
                queue_size_strict=bool(options.get("queue_size_strict", False)))
        for decl in self.model.trajectories:
            self.fill(self.shells[decl.name], self.expanded[decl.name])
        for decl in self.model.generators:
            options = {a.name: a for a in decl.assigns}
            trajectory = self.shells[options["trajectory"].value.name]
            dist = compile_dist(options["dist"].value, self.env)

            def const(key, default):
                if key in options:
                    return fold(options[key].value)[1]
                return default
            self.env.add_generator(
                decl.name, trajectory, dist,
                mon=int(const("mon", 1)),
                priority=int(const("priority", 0)),
                preemptible=int(const("preemptible", const("priority", 0))),
                restart=bool(const("restart", False)))

    def value(self, expr):
        return compile_value(expr, self.env)

    def const(self, expr):
        ok, v = fold(expr)
        if not ok:
            raise ModelError("expected a constant expression")
        return v

    def sub(self, blocks: dict, key: str) -> Trajectory | None:
        if key not in blocks:
            return None
        traj = Trajectory()
        self.fill(traj, blocks[key][0].statements)
        return traj

    def fill(self, traj: Trajectory, statements) -> None:
        for stmt in statements:
            self.add_statement(traj, stmt)

    def add_statement(self, traj: Trajectory, stmt: ActivityStmt) -> None:
        name = stmt.name
        args = _arg_map(stmt)
        subs = _sub_map(stmt)
        env = self.env
        if name == "log":
            traj.log(self.value(args["message"]))
        elif name == "timeout":
            traj.timeout(self.value(args["delay"]))
        elif name == "set_attribute":
            traj.set_attribute(self.value(args["key"]),
                               self.value(args["value"]),
                               bool(self.const(args.get("global", Flag(False)))))
        elif name == "set_prioritization":
            values = (int(self.const(args["priority"])),
                      int(self.const(args["preemptible"])),
                      bool(self.const(args["restart"])))
            traj.set_prioritization(values)
        elif name in ("seize", "seize_selected"):
            continue_ = None
            if "continue" in args:
                flags = self.const(args["continue"])
                continue_ = tuple(bool(f) for f in flags) \
                    if isinstance(flags, list) else bool(flags)
            kwargs = dict(continue_=continue_,
                          post_seize=self.sub(subs, "post_seize"),
                          reject=self.sub(subs, "reject"))
            amount = self.value(args.get("amount", Num(1.0)))
            if name == "seize":
                traj.seize(_name_of(args["resource"]), amount, **kwargs)
            else:
                traj.seize_selected(amount, **kwargs)
        elif name == "release":
            traj.release(_name_of(args["resource"]),
                         self.value(args.get("amount", Num(1.0))))
        elif name == "release_selected":
            traj.release_selected(self.value(args.get("amount", Num(1.0))))
        elif name == "set_capacity":
            traj.set_capacity(_name_of(args["resource"]),
                              self.value(args["value"]))
        elif name == "set_capacity_selected":
            traj.set_capacity_selected(self.value(args["value"]))
        elif name == "set_queue_size":
            traj.set_queue_size(_name_of(args["resource"]),
                                self.value(args["value"]))
        elif name == "set_queue_size_selected":
            traj.set_queue_size_selected(self.value(args["value"]))
        elif name == "select":
            value = args["resources"]
            items = value.items if isinstance(value, ListLit) else (value,)
            names = [_name_of(item) for item in items]
            policy = str(self.const(args.get("policy", Str("shortest-queue"))))
            traj.select(names, policy)
        elif name == "branch":
            sub_trajs = [self.sub({"sub": [block]}, "sub")
                         for block in subs.get("sub", [])]
            continue_ = None
            if "continue" in args:
                flags = self.const(args["continue"])
                continue_ = tuple(bool(f) for f in flags) \
                    if isinstance(flags, list) else bool(flags)
            traj.branch(self.value(args["option"]), continue_, *sub_trajs)
        elif name == "clone":
            sub_trajs = [self.sub({"sub": [block]}, "sub")
                         for block in subs.get("sub", [])]
            traj.clone(self.value(args["n"]), *sub_trajs)
        elif name == "synchronize":
            traj.synchronize(bool(self.const(args.get("wait", Flag(True)))))
        elif name == "rollback":
            check = args.get("check")
            traj.rollback(self.value(args["amount"]),
                          self.const(args.get("times", InfLit())),
                          self.value(check) if check is not None else None)
        elif name == "batch":
            rule = args.get("rule")
            traj.batch(self.value(args["n"]),
                       timeout=self.value(args.get("timeout", Num(0.0))),
                       permanent=bool(self.const(args.get("permanent", Flag(False)))),
                       name=str(self.const(args.get("name", Str("")))),
                       rule=self.value(rule) if rule is not None else None)
        elif name == "separate":
            traj.separate()
        elif name == "send":
            traj.send(self.value(args["signals"]),
                      self.value(args.get("delay", Num(0.0))))
        elif name == "trap":
            traj.trap(self.value(args["signals"]),
                      handler=self.sub(subs, "handler"),
                      interruptible=bool(self.const(
                          args.get("interruptible", Flag(True)))))
        elif name == "untrap":
            traj.untrap(self.value(args["signals"]))
        elif name == "wait":
            traj.wait()
        elif name == "leave":
            traj.leave(self.value(args["prob"]))
        elif name == "renege_in":
            traj.renege_in(self.value(args["t"]), out=self.sub(subs, "out"))
        elif name == "renege_if":
            traj.renege_if(self.value(args["signal"]),
                           out=self.sub(subs, "out"))
        elif name == "renege_abort":
            traj.renege_abort()
        elif name == "activate":
            traj.activate(_name_of(args["generator"]))
        elif name == "deactivate":
            traj.deactivate(_name_of(args["generator"]))
        elif name == "set_trajectory":
            traj.set_trajectory(_name_of(args["generator"]),
                                self.shells[args["trajectory"].name])
        elif name == "set_distribution":
            traj.set_distribution(_name_of(args["generator"]),
                                  compile_dist(args["dist"], env))
        else:
            raise ModelError(f"unknown activity '{name}'")


def build_environment(model: Model, seed=None, stream: int = 1, trace=False,
                      name: str | None = None) -> Environment:
    """Instantiate one environment (one replication) from a parsed model."""
    env = Environment(name or model.name,
                      seed=model.seed if seed is None else seed,
                      stream=stream, trace=trace)
    _Builder(model, env).build()
    return env


# -- rendering -----------------------------------------------------------

def format_number(value: float) -> str:
    if value == math.inf:
        return "Inf"
    text = "%g" % value
    if float(text) == value:
        return text
    return repr(value)


def render_expr(expr) -> str:
    if isinstance(expr, Num):
        return format_number(expr.value)
    if isinstance(expr, Str):
        escaped = expr.value.replace("\\", "\\\\").replace('"', '\\"') \
            .replace("\n", "\\n").replace("\t", "\\t")
        return f'"{escaped}"'
    if isinstance(expr, Flag):
        return "true" if expr.value else "false"
    if isinstance(expr, InfLit):
        return "Inf"
    if isinstance(expr, ListLit):
        return "[" + ", ".join(render_expr(i) for i in expr.items) + "]"
    if isinstance(expr, Ref):
        return expr.name
    if isinstance(expr, Call):
        return expr.name + "(" + ", ".join(_render_arg(a) for a in expr.args) + ")"
    if isinstance(expr, Unary):
        return "-" + _render_child(expr.operand)
    if isinstance(expr, Binary):
        return (f"{_render_child(expr.left)} {expr.op} "
                f"{_render_child(expr.right)}")
    raise ModelError(f"cannot render {expr!r}")


def _render_child(expr) -> str:
    text = render_expr(expr)
    if isinstance(expr, (Binary, Unary)):
        return f"({text})"
    return text


def _render_arg(arg: Arg) -> str:
    if arg.name is not None:
        return f"{arg.name} = {render_expr(arg.value)}"
    return render_expr(arg.value)


def _render_statements(statements, indent: int, out: list) -> None:
    pad = "  " * indent
    for stmt in statements:
        if isinstance(stmt, IncludeStmt):
            out.append(f"{pad}include({stmt.name})")
            continue
        args = ", ".join(_render_arg(a) for a in stmt.args)
        line = f"{pad}{stmt.name}({args})"
        if stmt.subs:
            out.append(line + " {")
            for sub in stmt.subs:
                out.append(f"{pad}  {sub.name} {{")
                _render_statements(sub.statements, indent + 2, out)
                out.append(f"{pad}  }}")
            out.append(f"{pad}}}")
        else:
            out.append(line)


def render_model(model: Model) -> str:
    out: list[str] = []
    if model.meta is not None:
        out.append("meta {")
        for assign in model.meta.assigns:
            out.append(f"  {assign.name} = {render_expr(assign.value)}")
        out.append("}")
        out.append("")
    for decl in model.resources:
        out.append(f"resource {decl.name} {{")
        for assign in decl.assigns:
            out.append(f"  {assign.name} = {render_expr(assign.value)}")
        out.append("}")
        out.append("")
    for decl in model.trajectories:
        out.append(f"trajectory {decl.name} {{")
        _render_statements(decl.statements, 1, out)
        out.append("}")
        out.append("")
    for decl in model.generators:
        out.append(f"generator {decl.name} {{")
        for assign in decl.assigns:
            out.append(f"  {assign.name} = {render_expr(assign.value)}")
        out.append("}")
        out.append("")
    return "\n".join(out).rstrip() + "\n"
