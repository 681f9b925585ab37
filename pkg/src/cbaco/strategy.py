"""A small strategy language steering located graph rewriting.

Scripts combine rule applications with *focusing* constructs that move
the position and banned subgraphs of a located graph:

* ``setPos(e)`` / ``setBan(e)`` assign a computed element set,
* ``one(s)`` picks the least element of a set, ``all(s)`` keeps it whole,
* set expressions start from ``crtGraph`` / ``crtPos`` / ``crtBan`` and
  combine with union (``[cup]`` or ``∪``), difference (``\\``),
  ``property(src, node, attr=="v")`` filtering and
  ``ngb(src, node|edge, attr=="v")`` one-hop neighbourhoods,
* ``one(R)`` applies rule ``R`` at the first admissible match,
* ``while(c)do(s)`` and ``repeat(s)`` iterate; failed iterations roll
  back cleanly because graphs are immutable snapshots.

The interpreter is transactional: a failing sub-strategy leaves no trace
on the state the caller continues with, and every rule-application
attempt or loop iteration consumes budget so runaway scripts stop with
:class:`BudgetExceeded` instead of hanging.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Iterator, Mapping

from .portgraph import (
    LocatedGraph, LocatedRule, Morphism, NODE,
    admissible, apply_located_rule, match_rule,
)


class StrategyError(Exception):
    """Base class for strategy failures."""


class StrategySyntaxError(StrategyError):
    def __init__(self, message: str, line: int, col: int):
        super().__init__(f"{message} (line {line}, column {col})")
        self.line = line
        self.col = col


class UnknownRule(StrategyError):
    """The script applies a rule that is not registered."""


class BudgetExceeded(StrategyError):
    """The script exceeded its application/iteration budget."""


class StrategyFailed(StrategyError):
    """A strategy expression failed; ``state`` holds the graph at failure."""

    def __init__(self, message: str, state: LocatedGraph):
        super().__init__(message)
        self.state = state


# ----------------------------------------------------------------------
# Abstract syntax
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class Seq:
    steps: tuple


@dataclass(frozen=True)
class SetPos:
    expr: "One | All"


@dataclass(frozen=True)
class SetBan:
    expr: "One | All"


@dataclass(frozen=True)
class While:
    cond: object
    body: Seq


@dataclass(frozen=True)
class Repeat:
    body: object


@dataclass(frozen=True)
class RuleApp:
    name: str


@dataclass(frozen=True)
class One:
    expr: object  # set expression


@dataclass(frozen=True)
class All:
    expr: object


@dataclass(frozen=True)
class Not:
    cond: object


@dataclass(frozen=True)
class IsEmpty:
    expr: object


@dataclass(frozen=True)
class Union:
    left: object
    right: object


@dataclass(frozen=True)
class Diff:
    left: object
    right: object


@dataclass(frozen=True)
class Ngb:
    src: object
    kind: str  # "node" | "edge": what the predicate filters
    pred: "Pred"


@dataclass(frozen=True)
class Property:
    src: object
    kind: str  # always "node": filtered elements are nodes
    pred: "Pred"


@dataclass(frozen=True)
class CrtGraph:
    pass


@dataclass(frozen=True)
class CrtPos:
    pass


@dataclass(frozen=True)
class CrtBan:
    pass


@dataclass(frozen=True)
class Pred:
    attr: str
    value: object


RESERVED = {
    "setPos", "setBan", "while", "do", "repeat", "one", "all", "not",
    "isEmpty", "ngb", "property", "crtGraph", "crtPos", "crtBan",
    "node", "edge", "true", "false",
}


# ----------------------------------------------------------------------
# Lexer
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class _Tok:
    type: str  # IDENT STRING NUMBER PUNCT UNION DIFF EQ EOF
    value: object
    line: int
    col: int


def _tokenize(src: str) -> list[_Tok]:
    toks: list[_Tok] = []
    i, line, col = 0, 1, 1
    n = len(src)

    def err(msg: str) -> StrategySyntaxError:
        return StrategySyntaxError(msg, line, col)

    while i < n:
        c = src[i]
        if c == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if c.isspace():
            i += 1
            col += 1
            continue
        if c == "[":
            if src.startswith("[cup]", i):
                toks.append(_Tok("UNION", "[cup]", line, col))
                i += 5
                col += 5
                continue
            raise err("expected [cup]")
        if c == "∪":
            toks.append(_Tok("UNION", "∪", line, col))
            i += 1
            col += 1
            continue
        if c == "\\":
            toks.append(_Tok("DIFF", "\\", line, col))
            i += 1
            col += 1
            continue
        if c == "=" and src.startswith("==", i):
            toks.append(_Tok("EQ", "==", line, col))
            i += 2
            col += 2
            continue
        if c in "();,":
            toks.append(_Tok("PUNCT", c, line, col))
            i += 1
            col += 1
            continue
        if c == '"':
            j = i + 1
            while j < n and src[j] != '"':
                if src[j] == "\n":
                    raise err("unterminated string")
                j += 1
            if j >= n:
                raise err("unterminated string")
            toks.append(_Tok("STRING", src[i + 1:j], line, col))
            col += j + 1 - i
            i = j + 1
            continue
        if c.isdigit() or (c == "-" and i + 1 < n and src[i + 1].isdigit()):
            j = i + 1
            while j < n and src[j].isdigit():
                j += 1
            toks.append(_Tok("NUMBER", int(src[i:j]), line, col))
            col += j - i
            i = j
            continue
        if c.isalpha() or c == "_":
            j = i
            while j < n and (src[j].isalnum() or src[j] in "_-"):
                j += 1
            toks.append(_Tok("IDENT", src[i:j], line, col))
            col += j - i
            i = j
            continue
        raise err(f"unexpected character {c!r}")
    toks.append(_Tok("EOF", None, line, col))
    return toks


# ----------------------------------------------------------------------
# Parser
# ----------------------------------------------------------------------


class _Parser:
    def __init__(self, toks: list[_Tok]):
        self.toks = toks
        self.i = 0

    def peek(self) -> _Tok:
        return self.toks[self.i]

    def next(self) -> _Tok:
        t = self.toks[self.i]
        self.i += 1
        return t

    def err(self, msg: str) -> StrategySyntaxError:
        t = self.peek()
        return StrategySyntaxError(msg, t.line, t.col)

    def expect_punct(self, ch: str) -> None:
        t = self.next()
        if t.type != "PUNCT" or t.value != ch:
            raise StrategySyntaxError(f"expected {ch!r}", t.line, t.col)

    def expect_ident(self, word: str) -> None:
        t = self.next()
        if t.type != "IDENT" or t.value != word:
            raise StrategySyntaxError(f"expected {word!r}", t.line, t.col)

    def at_ident(self, word: str) -> bool:
        t = self.peek()
        return t.type == "IDENT" and t.value == word

    # seq := stmt (';' stmt)* [';']
    def parse_seq(self, closers: tuple[str, ...]) -> Seq:
        steps = [self.parse_stmt()]
        while True:
            t = self.peek()
            if t.type == "PUNCT" and t.value == ";":
                self.next()
                nxt = self.peek()
                if nxt.type == "EOF" or (nxt.type == "PUNCT" and nxt.value in closers):
                    break  # trailing semicolon
                steps.append(self.parse_stmt())
            else:
                break
        return Seq(tuple(steps))

    def parse_stmt(self) -> object:
        t = self.peek()
        if t.type != "IDENT":
            raise self.err("expected a statement")
        if t.value == "setPos":
            self.next()
            self.expect_punct("(")
            e = self.parse_posexpr()
            self.expect_punct(")")
            return SetPos(e)
        if t.value == "setBan":
            self.next()
            self.expect_punct("(")
            e = self.parse_posexpr()
            self.expect_punct(")")
            return SetBan(e)
        if t.value == "while":
            self.next()
            self.expect_punct("(")
            cond = self.parse_cond()
            self.expect_punct(")")
            self.expect_ident("do")
            self.expect_punct("(")
            body = self.parse_seq(closers=(")",))
            self.expect_punct(")")
            return While(cond, body)
        if t.value == "repeat":
            self.next()
            self.expect_punct("(")
            body = self.parse_seq(closers=(")",))
            self.expect_punct(")")
            return Repeat(body)
        if t.value == "one":
            self.next()
            self.expect_punct("(")
            inner = self.peek()
            if inner.type == "IDENT" and inner.value not in RESERVED:
                name = self.next().value
                self.expect_punct(")")
                return RuleApp(str(name))
            raise self.err("one(...) as a statement must name a rule")
        if t.value == "all":
            raise self.err("all(...) cannot be applied as a statement")
        if t.value in RESERVED:
            raise self.err(f"{t.value!r} is not a statement")
        self.next()
        return RuleApp(str(t.value))  # bare rule name

    def parse_cond(self) -> object:
        t = self.peek()
        if self.at_ident("not"):
            self.next()
            self.expect_punct("(")
            c = self.parse_cond()
            self.expect_punct(")")
            return Not(c)
        if self.at_ident("isEmpty"):
            self.next()
            self.expect_punct("(")
            e = self.parse_setexpr()
            self.expect_punct(")")
            return IsEmpty(e)
        if self.at_ident("one"):
            self.next()
            self.expect_punct("(")
            inner = self.peek()
            if inner.type == "IDENT" and inner.value not in RESERVED:
                name = self.next().value
                self.expect_punct(")")
                return RuleApp(str(name))
            raise self.err("one(...) as a condition must name a rule")
        if t.type == "IDENT" and t.value not in RESERVED:
            self.next()
            return RuleApp(str(t.value))
        raise self.err("expected a condition")

    def parse_posexpr(self) -> One | All:
        if self.at_ident("one"):
            self.next()
            self.expect_punct("(")
            e = self.parse_setexpr()
            self.expect_punct(")")
            return One(e)
        if self.at_ident("all"):
            self.next()
            self.expect_punct("(")
            e = self.parse_setexpr()
            self.expect_punct(")")
            return All(e)
        raise self.err("expected one(...) or all(...)")

    def parse_setexpr(self) -> object:
        left = self.parse_setterm()
        while True:
            t = self.peek()
            if t.type == "UNION":
                self.next()
                left = Union(left, self.parse_setterm())
            elif t.type == "DIFF":
                self.next()
                left = Diff(left, self.parse_setterm())
            else:
                return left

    def parse_setterm(self) -> object:
        t = self.peek()
        if t.type == "PUNCT" and t.value == "(":
            self.next()
            e = self.parse_setexpr()
            self.expect_punct(")")
            return e
        if self.at_ident("crtGraph"):
            self.next()
            return CrtGraph()
        if self.at_ident("crtPos"):
            self.next()
            return CrtPos()
        if self.at_ident("crtBan"):
            self.next()
            return CrtBan()
        if self.at_ident("ngb"):
            self.next()
            self.expect_punct("(")
            src = self.parse_setexpr()
            self.expect_punct(",")
            kind = self.parse_kind()
            self.expect_punct(",")
            pred = self.parse_pred()
            self.expect_punct(")")
            return Ngb(src, kind, pred)
        if self.at_ident("property"):
            self.next()
            self.expect_punct("(")
            src = self.parse_setexpr()
            self.expect_punct(",")
            kind = self.parse_kind()
            if kind != "node":
                raise self.err("property(...) filters nodes")
            self.expect_punct(",")
            pred = self.parse_pred()
            self.expect_punct(")")
            return Property(src, kind, pred)
        raise self.err("expected a set expression")

    def parse_kind(self) -> str:
        t = self.next()
        if t.type == "IDENT" and t.value in ("node", "edge"):
            return str(t.value)
        raise StrategySyntaxError("expected node or edge", t.line, t.col)

    def parse_pred(self) -> Pred:
        t = self.next()
        if t.type != "IDENT":
            raise StrategySyntaxError("expected an attribute name", t.line, t.col)
        attr = str(t.value)
        eq = self.next()
        if eq.type != "EQ":
            raise StrategySyntaxError("expected ==", eq.line, eq.col)
        v = self.next()
        if v.type == "STRING":
            return Pred(attr, v.value)
        if v.type == "NUMBER":
            return Pred(attr, v.value)
        if v.type == "IDENT" and v.value in ("true", "false"):
            return Pred(attr, v.value == "true")
        raise StrategySyntaxError("expected a literal value", v.line, v.col)


def parse_strategy(src: str) -> Seq:
    """Parse a strategy script into its abstract syntax tree."""
    p = _Parser(_tokenize(src))
    seq = p.parse_seq(closers=())
    t = p.peek()
    if t.type != "EOF":
        raise StrategySyntaxError("trailing input after script", t.line, t.col)
    return seq


# ----------------------------------------------------------------------
# Pretty printer
# ----------------------------------------------------------------------


def pretty(node: object) -> str:
    """Render an AST back to concrete syntax (parses to an equal tree)."""
    if isinstance(node, Seq):
        return ";\n".join(pretty(s) for s in node.steps)
    if isinstance(node, SetPos):
        return f"setPos({pretty(node.expr)})"
    if isinstance(node, SetBan):
        return f"setBan({pretty(node.expr)})"
    if isinstance(node, While):
        return f"while({pretty(node.cond)})do(\n{_indent(pretty(node.body))}\n)"
    if isinstance(node, Repeat):
        return f"repeat({pretty(node.body)})"
    if isinstance(node, RuleApp):
        return f"one({node.name})"
    if isinstance(node, One):
        return f"one({pretty(node.expr)})"
    if isinstance(node, All):
        return f"all({pretty(node.expr)})"
    if isinstance(node, Not):
        return f"not({pretty(node.cond)})"
    if isinstance(node, IsEmpty):
        return f"isEmpty({pretty(node.expr)})"
    if isinstance(node, Union):
        return f"{pretty(node.left)}[cup]{pretty(node.right)}"
    if isinstance(node, Diff):
        return f"{pretty(node.left)}\\{pretty(node.right)}"
    if isinstance(node, Ngb):
        return f"ngb({pretty(node.src)},{node.kind},{pretty(node.pred)})"
    if isinstance(node, Property):
        return f"property({pretty(node.src)},{node.kind},{pretty(node.pred)})"
    if isinstance(node, CrtGraph):
        return "crtGraph"
    if isinstance(node, CrtPos):
        return "crtPos"
    if isinstance(node, CrtBan):
        return "crtBan"
    if isinstance(node, Pred):
        return f"{node.attr}=={_literal(node.value)}"
    raise TypeError(f"not an AST node: {node!r}")


def _literal(v: object) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    return f'"{v}"'


def _indent(s: str) -> str:
    return "\n".join("  " + line for line in s.splitlines())


# ----------------------------------------------------------------------
# Derivations
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class DerivationStep:
    """One edge of a derivation tree (a rule application or other transition)."""

    parent: int
    child: int
    kind: str  # "rule" | "event"
    label: str


class DerivationTree:
    """Snapshots of a located graph connected by labelled transitions."""

    def __init__(self, root: LocatedGraph):
        self.snapshots: list[LocatedGraph] = [root]
        self.steps: list[DerivationStep] = []

    @property
    def root(self) -> int:
        return 0

    def add(self, parent: int, snapshot: LocatedGraph, kind: str, label: str) -> int:
        if not 0 <= parent < len(self.snapshots):
            raise ValueError(f"no derivation node {parent}")
        self.snapshots.append(snapshot)
        child = len(self.snapshots) - 1
        self.steps.append(DerivationStep(parent, child, kind, label))
        return child

    def children(self, node: int) -> list[int]:
        return [s.child for s in self.steps if s.parent == node]

    def __len__(self) -> int:
        return len(self.snapshots)


@dataclass(frozen=True)
class AppliedRule:
    """Record of one successful rule application inside a strategy run."""

    rule: str
    match: str  # morphism digest
    state: LocatedGraph


@dataclass(frozen=True)
class StrategyResult:
    state: LocatedGraph
    steps: tuple[AppliedRule, ...]


# ----------------------------------------------------------------------
# Interpreter
# ----------------------------------------------------------------------


@dataclass(frozen=True)
class _ExecState:
    lg: LocatedGraph
    steps: tuple[AppliedRule, ...] = ()


class Interpreter:
    """Run strategy scripts over a located graph with a named rule registry."""

    def __init__(
        self,
        rules: Mapping[str, LocatedRule],
        budget: int = 10_000,
        rng: random.Random | None = None,
    ):
        self.rules = dict(rules)
        self.budget = budget
        self.rng = rng
        self._ticks = 0

    def run(self, script: Seq | str, lgraph: LocatedGraph) -> StrategyResult:
        ast = parse_strategy(script) if isinstance(script, str) else script
        self._ticks = 0
        final = self._exec(ast, _ExecState(lgraph))
        return StrategyResult(final.lg, final.steps)

    # -- bookkeeping -----------------------------------------------------

    def _tick(self) -> None:
        self._ticks += 1
        if self._ticks > self.budget:
            raise BudgetExceeded(f"strategy exceeded its budget of {self.budget}")

    # -- statements ------------------------------------------------------

    def _exec(self, node: object, st: _ExecState) -> _ExecState:
        if isinstance(node, Seq):
            for step in node.steps:
                st = self._exec(step, st)
            return st
        if isinstance(node, SetPos):
            value = self._eval_pos(node.expr, st)
            return _ExecState(
                LocatedGraph(st.lg.graph, position=value, banned=st.lg.banned), st.steps
            )
        if isinstance(node, SetBan):
            value = self._eval_pos(node.expr, st)
            return _ExecState(
                LocatedGraph(st.lg.graph, position=st.lg.position, banned=value), st.steps
            )
        if isinstance(node, RuleApp):
            self._tick()
            return self._apply_rule(node.name, st)
        if isinstance(node, While):
            while True:
                self._tick()
                ok, st_after = self._eval_cond(node.cond, st)
                if not ok:
                    return st
                st = self._exec(node.body, st_after)
        if isinstance(node, Repeat):
            while True:
                self._tick()
                try:
                    st = self._exec(node.body, st)
                except StrategyFailed:
                    return st
        raise TypeError(f"not a statement: {node!r}")

    def _apply_rule(self, name: str, st: _ExecState) -> _ExecState:
        if name not in self.rules:
            raise UnknownRule(f"no rule named {name!r}")
        lrule = self.rules[name]
        matches = match_rule(st.lg.graph, lrule.rule)
        candidates = [f for f in matches if admissible(st.lg, lrule, f)]
        if not candidates:
            raise StrategyFailed(f"rule {name!r} has no admissible match", st.lg)
        f: Morphism = self.rng.choice(candidates) if self.rng else candidates[0]
        lg2 = apply_located_rule(st.lg, lrule, f)
        step = AppliedRule(name, f.digest(), lg2)
        return _ExecState(lg2, st.steps + (step,))

    # -- conditions --------------------------------------------------------

    def _eval_cond(self, cond: object, st: _ExecState) -> tuple[bool, _ExecState]:
        """Evaluate a condition; successful rule-application effects are kept."""
        if isinstance(cond, RuleApp):
            self._tick()
            try:
                return True, self._apply_rule(cond.name, st)
            except StrategyFailed:
                return False, st
        if isinstance(cond, Not):
            ok, _ = self._eval_cond(cond.cond, st)  # lookahead: effects discarded
            return (not ok), st
        if isinstance(cond, IsEmpty):
            return len(self._eval_set(cond.expr, st)) == 0, st
        raise TypeError(f"not a condition: {cond!r}")

    # -- set and position expressions ---------------------------------------

    def _eval_pos(self, expr: One | All, st: _ExecState) -> frozenset[int]:
        value = self._eval_set(expr.expr, st)
        if isinstance(expr, All):
            return value
        if not value:
            raise StrategyFailed("one(...) over an empty set", st.lg)
        return frozenset({min(value)})

    def _eval_set(self, expr: object, st: _ExecState) -> frozenset[int]:
        g = st.lg.graph
        if isinstance(expr, CrtGraph):
            return frozenset(g.elements())
        if isinstance(expr, CrtPos):
            return st.lg.position
        if isinstance(expr, CrtBan):
            return st.lg.banned
        if isinstance(expr, Union):
            return self._eval_set(expr.left, st) | self._eval_set(expr.right, st)
        if isinstance(expr, Diff):
            return self._eval_set(expr.left, st) - self._eval_set(expr.right, st)
        if isinstance(expr, Property):
            src = self._eval_set(expr.src, st)
            return frozenset(
                i for i in src
                if g.kind(i) == NODE and _pred_ok(g.node_record(i), expr.pred)
            )
        if isinstance(expr, Ngb):
            src = self._eval_set(expr.src, st)
            out: set[int] = set()
            for i in src:
                if g.kind(i) != NODE:
                    continue
                for p in g.node_ports(i):
                    for e in g.port_edges(p):
                        if expr.kind == "edge" and not _pred_ok(g.edge_record(e), expr.pred):
                            continue
                        a, b = g.edge_ports(e)
                        other = b if a == p else a
                        m = g.port_node(other)
                        if expr.kind == "node" and not _pred_ok(g.node_record(m), expr.pred):
                            continue
                        out.add(m)
            return frozenset(out)
        raise TypeError(f"not a set expression: {expr!r}")


def _pred_ok(rec, pred: Pred) -> bool:
    return pred.attr in rec and rec[pred.attr] == pred.value


def run_strategy(
    script: str | Seq,
    lgraph: LocatedGraph,
    rules: Mapping[str, LocatedRule],
    budget: int = 10_000,
    seed: int | None = None,
) -> StrategyResult:
    """Parse (if needed) and run a script; convenience wrapper over Interpreter."""
    rng = random.Random(seed) if seed is not None else None
    return Interpreter(rules, budget=budget, rng=rng).run(script, lgraph)
