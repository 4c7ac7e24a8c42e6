"""Concrete syntax for scenario files and policies.

A scenario file declares one lattice followed by location blocks::

    lattice {
      levels: 1, 2, 3;
      order: 1 < 2, 2 < 3;
    }

    location D {
      state <3, 2, 1, 3>;        // clearance, current, history, classification
      policy BLP;
      process read(?x)@B . out(x)@C . 0;
    }

Processes are ground: a bare name is a location or data literal unless
an enclosing ``?name`` binder is in scope, in which case it refers to
the bound variable.  Policies are patterns, so the convention flips
inside aspects: bare names in cuts are variables and literals are
quoted, as in ``'Government' :: read('pass', data)@'AirlineDB' . X``.

Policy operators, loosest to tightest: ``>`` (first opinion wins),
``=>``, ``(+)`` and ``(x)``, ``/\\`` and ``\\/``, ``!``.  All binary
operators associate to the left.  ``//`` starts a comment.

The renderer is the exact inverse: ``parse(render(x))`` returns an
equal tree for every well-formed tree.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .lattice import Lattice, Level, UnknownLevelName
from .syntax import (
    ANY_ARGS,
    Action,
    ActionKind,
    AnyArgs,
    Aspect,
    Bin,
    Binder,
    Body,
    Choice,
    Const,
    Cut,
    Eq,
    Geq,
    LevExpr,
    LevLit,
    LevName,
    Lit,
    LocalizedState,
    LocatedItem,
    Net,
    Nil,
    Not,
    OccursIn,
    Parallel,
    Policy,
    PolicyOp,
    Present,
    Process,
    Replicate,
    TupleBody,
    Var,
    Wildcard,
    with_keys,
)

LEVEL_NAMES = ("Ss", "Cs", "Hs", "Ot", "Ht")
ACTION_KINDS = {"out": ActionKind.OUT, "in": ActionKind.IN, "read": ActionKind.READ}


@dataclass(frozen=True)
class SourceSpan:
    filename: str
    line: int
    col: int

    def __str__(self) -> str:
        return "%s:%d:%d" % (self.filename, self.line, self.col)


class ParseError(Exception):
    def __init__(self, message: str, span: SourceSpan, expected: tuple[str, ...] = ()):
        self.span = span
        self.expected = expected
        if expected:
            message = "%s (expected %s)" % (message, " or ".join(expected))
        super().__init__("%s: %s" % (span, message))


class DuplicateLatticeDecl(ParseError):
    def __init__(self, span: SourceSpan):
        super().__init__("a scenario declares exactly one lattice", span)


class UndeclaredLevel(ParseError):
    """A level name used in a state or policy is not in the lattice.
    Syntactically fine, semantically broken, so tools treat it as a
    validation failure rather than a parse failure."""

    def __init__(self, name: str, span: SourceSpan):
        self.name = name
        super().__init__("unknown level name %r" % name, span)


_TOKEN_RE = re.compile(
    r"""
      (?P<ws>[\s]+)
    | (?P<comment>//[^\n]*)
    | (?P<occurs>occurs-in)
    | (?P<qlit>'[A-Za-z0-9_]+')
    | (?P<star>_\*)
    | (?P<ident>[A-Za-z0-9_]+)
    | (?P<op>::|=>|>=|/\\|\\/)
    | (?P<punct>[{}()\[\]<>,;:.@+*|!?=])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Tok:
    type: str  # ident | qlit | star | op | punct | eof
    value: str
    line: int
    col: int


def _lex(text: str, filename: str) -> list[_Tok]:
    toks: list[_Tok] = []
    line, col, pos = 1, 1, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError("stray character %r" % text[pos], SourceSpan(filename, line, col))
        kind = m.lastgroup
        value = m.group()
        if kind not in ("ws", "comment"):
            if kind == "qlit":
                toks.append(_Tok("qlit", value[1:-1], line, col))
            elif kind == "occurs":
                toks.append(_Tok("op", "occurs-in", line, col))
            else:
                toks.append(_Tok(kind, value, line, col))
        nl = value.count("\n")
        if nl:
            line += nl
            col = len(value) - value.rfind("\n")
        else:
            col += len(value)
        pos = m.end()
    toks.append(_Tok("eof", "", line, col))
    return toks


class _Parser:
    def __init__(self, text: str, filename: str, lattice: Lattice | None, presets: dict[str, Policy]):
        self.toks = _lex(text, filename)
        self.pos = 0
        self.filename = filename
        self.lattice = lattice
        self.presets = presets

    # -- token plumbing ----------------------------------------------------

    def peek(self, ahead: int = 0) -> _Tok:
        i = min(self.pos + ahead, len(self.toks) - 1)
        return self.toks[i]

    def next(self) -> _Tok:
        t = self.toks[self.pos]
        if t.type != "eof":
            self.pos += 1
        return t

    def span(self, tok: _Tok | None = None) -> SourceSpan:
        t = tok or self.peek()
        return SourceSpan(self.filename, t.line, t.col)

    def fail(self, message: str, expected: tuple[str, ...] = ()) -> ParseError:
        return ParseError(message, self.span(), expected)

    def expect(self, value: str) -> _Tok:
        t = self.peek()
        if t.value != value or t.type == "qlit":
            raise self.fail("found %r" % (t.value or "end of input"), (value,))
        return self.next()

    def expect_ident(self, what: str = "name") -> str:
        t = self.peek()
        if t.type != "ident":
            raise self.fail("found %r" % (t.value or "end of input"), (what,))
        return self.next().value

    def at(self, value: str) -> bool:
        t = self.peek()
        return t.value == value and t.type != "qlit"

    # -- scenario ----------------------------------------------------------

    def scenario(self) -> Net:
        self.expect("lattice")
        self.lattice = self.lattice_block()
        items: list[LocatedItem] = []
        while not self.at(""):
            if self.at("lattice"):
                raise DuplicateLatticeDecl(self.span())
            self.expect("location")
            items.extend(self.location_block())
        return Net(with_keys(items), self.lattice)

    def lattice_block(self) -> Lattice:
        self.expect("{")
        self.expect("levels")
        self.expect(":")
        names = [self.expect_ident("level name")]
        while self.at(","):
            self.next()
            names.append(self.expect_ident("level name"))
        self.expect(";")
        self.expect("order")
        self.expect(":")
        edges: list[tuple[str, str]] = []
        if not self.at(";"):
            edges.append(self.order_edge())
            while self.at(","):
                self.next()
                edges.append(self.order_edge())
        self.expect(";")
        self.expect("}")
        return Lattice(names, edges)

    def order_edge(self) -> tuple[str, str]:
        lo = self.expect_ident("level name")
        self.expect("<")
        hi = self.expect_ident("level name")
        return lo, hi

    def location_block(self) -> list[LocatedItem]:
        name = self.expect_ident("location name")
        self.expect("{")
        self.expect("state")
        state = self.state_decl()
        self.expect("policy")
        pol = self.policy()
        self.expect(";")
        items: list[LocatedItem] = []
        while not self.at("}"):
            if self.at("process"):
                self.next()
                body: Body = self.process(frozenset())
            elif self.at("tuple"):
                self.next()
                body = self.tuple_body()
            else:
                raise self.fail("found %r" % self.peek().value, ("process", "tuple", "}"))
            self.expect(";")
            items.append(LocatedItem(name, state, pol, body))
        if not items:
            raise self.fail("location %r declares no process or tuple" % name, ("process", "tuple"))
        self.expect("}")
        return items

    def state_decl(self) -> LocalizedState:
        self.expect("<")
        levels = [self.level_ref()]
        for _ in range(3):
            self.expect(",")
            levels.append(self.level_ref())
        self.expect(">")
        self.expect(";")
        return LocalizedState(*levels)

    def level_ref(self) -> Level:
        t = self.peek()
        name = self.expect_ident("level name")
        assert self.lattice is not None
        try:
            return self.lattice.level(name)
        except UnknownLevelName:
            raise UndeclaredLevel(name, self.span(t)) from None

    def tuple_body(self) -> TupleBody:
        self.expect("<")
        values: list[str] = []
        if not self.at(">"):
            values.append(self.expect_ident("data literal"))
            while self.at(","):
                self.next()
                values.append(self.expect_ident("data literal"))
        self.expect(">")
        return TupleBody(tuple(values))

    # -- processes ---------------------------------------------------------

    def process(self, bound: frozenset[str]) -> Process:
        parts = [self.choice(bound)]
        while self.at("|"):
            self.next()
            parts.append(self.choice(bound))
        if len(parts) == 1:
            return parts[0]
        return Parallel(tuple(parts))

    def choice(self, bound: frozenset[str]) -> Process:
        first_span = self.span()
        parts = [self.prefixed(bound)]
        while self.at("+"):
            self.next()
            parts.append(self.prefixed(bound))
        if len(parts) == 1:
            return parts[0]
        branches = []
        for p in parts:
            if not (isinstance(p, Choice) and len(p.branches) == 1):
                raise ParseError("every branch of a sum must be an action prefix", first_span)
            branches.append(p.branches[0])
        return Choice(tuple(branches))

    def prefixed(self, bound: frozenset[str]) -> Process:
        t = self.peek()
        if t.type == "ident" and t.value in ACTION_KINDS:
            action = self.net_action(bound)
            self.expect(".")
            inner = bound
            if isinstance(action.args, tuple):
                inner = bound | {a.name for a in action.args if isinstance(a, Binder)}
            cont = self.prefixed(inner)
            return Choice(((action, cont),))
        if self.at("0"):
            self.next()
            return Nil()
        if self.at("*"):
            self.next()
            return Replicate(self.prefixed(bound))
        if self.at("("):
            self.next()
            p = self.process(bound)
            self.expect(")")
            return p
        raise self.fail("found %r" % (t.value or "end of input"), ("out", "in", "read", "0", "*", "("))

    def net_action(self, bound: frozenset[str]) -> Action:
        kind = ACTION_KINDS[self.next().value]
        self.expect("(")
        args: list = []
        if not self.at(")"):
            args.append(self.net_arg(bound))
            while self.at(","):
                self.next()
                args.append(self.net_arg(bound))
        self.expect(")")
        self.expect("@")
        target = self.net_ref(bound)
        return Action(kind, tuple(args), target)

    def net_arg(self, bound: frozenset[str]):
        if self.at("?"):
            self.next()
            return Binder(self.expect_ident("variable name"))
        return self.net_ref(bound)

    def net_ref(self, bound: frozenset[str]):
        t = self.peek()
        if t.type != "ident":
            raise self.fail("found %r" % (t.value or "end of input"), ("name",))
        self.next()
        return Var(t.value) if t.value in bound else Lit(t.value)

    # -- policies ----------------------------------------------------------
    # One precedence-climbing chain per tier; which tiers apply depends on
    # the sub-language (full policies, recommendations, conditions).

    def policy(self) -> Policy:
        return self._prio(self._pol_atom)

    def rec_expr(self) -> Policy:
        return self._imp(self._rec_atom, stop=("if",))

    def cond_expr(self) -> Policy:
        return self._tbool(self._cond_atom, stop=("]",))

    def _prio(self, atom) -> Policy:
        e = self._imp(atom, stop=())
        while self.at(">"):
            self.next()
            e = Bin(PolicyOp.PRIOR, e, self._imp(atom, stop=()))
        return e

    def _imp(self, atom, stop: tuple[str, ...]) -> Policy:
        e = self._kcomb(atom, stop)
        while self.at("=>"):
            self.next()
            e = Bin(PolicyOp.IMPLIES, e, self._kcomb(atom, stop))
        return e

    def _kcomb(self, atom, stop: tuple[str, ...]) -> Policy:
        e = self._tbool(atom, stop)
        while True:
            op = self._peek_kcomb_op()
            if op is None:
                return e
            for _ in range(3):
                self.next()
            e = Bin(op, e, self._tbool(atom, stop))

    def _peek_kcomb_op(self) -> PolicyOp | None:
        # (+) and (x) are three tokens each; only ever legal in operator
        # position, so plain lookahead keeps them apart from parentheses.
        if not self.at("("):
            return None
        t1, t2 = self.peek(1), self.peek(2)
        if t2.value != ")" or t2.type == "qlit":
            return None
        if t1.value == "+" and t1.type == "punct":
            return PolicyOp.OPLUS
        if t1.value == "x" and t1.type == "ident":
            return PolicyOp.OTIMES
        return None

    def _tbool(self, atom, stop: tuple[str, ...]) -> Policy:
        e = self._unary(atom, stop)
        while self.at("/\\") or self.at("\\/"):
            op = PolicyOp.AND if self.next().value == "/\\" else PolicyOp.OR
            e = Bin(op, e, self._unary(atom, stop))
        return e

    def _unary(self, atom, stop: tuple[str, ...]) -> Policy:
        if self.at("!"):
            self.next()
            return Not(self._unary(atom, stop))
        return atom(stop)

    def _pol_atom(self, stop: tuple[str, ...]) -> Policy:
        t = self.peek()
        if self.at("true"):
            self.next()
            return Const(True)
        if self.at("false"):
            self.next()
            return Const(False)
        if self.at("("):
            self.next()
            e = self.policy()
            self.expect(")")
            return e
        if self.at("["):
            return self.aspect()
        if t.type == "ident":
            self.next()
            if t.value in self.presets:
                return self.presets[t.value]
            raise ParseError("unknown policy preset %r" % t.value, self.span(t))
        raise self.fail("found %r" % (t.value or "end of input"), ("true", "false", "[", "(", "preset name"))

    def aspect(self) -> Aspect:
        self.expect("[")
        rec = self.rec_expr()
        self.expect("if")
        cut = self.cut()
        self.expect(":")
        cond = self.cond_expr()
        self.expect("]")
        return Aspect(rec, cut, cond)

    def cut(self) -> Cut:
        subject = self.cut_ref()
        self.expect("::")
        action = self.cut_action()
        self.expect(".")
        cont = self.expect_ident("continuation name")
        return Cut(subject, action, cont)

    def cut_action(self) -> Action:
        t = self.peek()
        if t.type != "ident" or t.value not in ACTION_KINDS:
            raise self.fail("found %r" % (t.value or "end of input"), ("out", "in", "read"))
        kind = ACTION_KINDS[self.next().value]
        self.expect("(")
        if self.peek().type == "star":
            self.next()
            args: object = ANY_ARGS
        else:
            pats: list = []
            if not self.at(")"):
                pats.append(self.cut_arg())
                while self.at(","):
                    self.next()
                    pats.append(self.cut_arg())
            args = tuple(pats)
        self.expect(")")
        self.expect("@")
        return Action(kind, args, self.cut_ref())

    def cut_arg(self):
        t = self.peek()
        if self.at("_"):
            self.next()
            return Wildcard()
        if self.at("?"):
            self.next()
            return Binder(self.expect_ident("variable name"))
        if t.type == "qlit":
            self.next()
            return Lit(t.value)
        if t.type == "ident":
            self.next()
            return Var(t.value)
        raise self.fail("found %r" % (t.value or "end of input"), ("name", "'literal'", "_", "?"))

    def cut_ref(self):
        t = self.peek()
        if t.type == "qlit":
            self.next()
            return Lit(t.value)
        if t.type == "ident":
            self.next()
            return Var(t.value)
        raise self.fail("found %r" % (t.value or "end of input"), ("name", "'literal'"))

    def _rec_atom(self, stop: tuple[str, ...]) -> Policy:
        t = self.peek()
        if self.at("true"):
            self.next()
            return Const(True)
        if self.at("false"):
            self.next()
            return Const(False)
        if self.at("("):
            self.next()
            e = self._imp(self._rec_atom, stop=())
            self.expect(")")
            return e
        if t.type == "ident" and t.value in ACTION_KINDS:
            return self.occurs()
        if t.type == "ident" and (t.value in LEVEL_NAMES or self.peek(1).value == ">="):
            left = self.lev_expr()
            self.expect(">=")
            return Geq(left, self.lev_expr())
        if t.type in ("ident", "qlit"):
            left = self.cut_ref()
            self.expect("=")
            return Eq(left, self.cut_ref())
        raise self.fail(
            "found %r" % (t.value or "end of input"),
            ("true", "false", "(", "out", "in", "read", "level comparison", "name"),
        )

    def occurs(self) -> OccursIn:
        pat = self.cut_action()
        self.expect("occurs-in")
        return OccursIn(pat, self.expect_ident("continuation name"))

    def lev_expr(self) -> LevExpr:
        t = self.peek()
        if t.type == "ident" and t.value in LEVEL_NAMES:
            self.next()
            return LevName(t.value)
        name = self.expect_ident("level")
        assert self.lattice is not None
        try:
            return LevLit(self.lattice.level(name))
        except UnknownLevelName:
            raise UndeclaredLevel(name, self.span(t)) from None

    def _cond_atom(self, stop: tuple[str, ...]) -> Policy:
        t = self.peek()
        if self.at("true"):
            self.next()
            return Const(True)
        if self.at("false"):
            self.next()
            return Const(False)
        if self.at("("):
            self.next()
            e = self._tbool(self._cond_atom, stop=())
            self.expect(")")
            return e
        if self.at("test"):
            self.next()
            self.expect("(")
            if self.peek().type == "star":
                self.next()
                args: object = ANY_ARGS
            else:
                pats: list = []
                if not self.at(")"):
                    pats.append(self.cut_arg())
                    while self.at(","):
                        self.next()
                        pats.append(self.cut_arg())
                args = tuple(pats)
            self.expect(")")
            self.expect("@")
            return Present(args, self.cut_ref())
        if t.type == "ident" and t.value in ACTION_KINDS:
            return self.occurs()
        if t.type in ("ident", "qlit"):
            left = self.cut_ref()
            self.expect("=")
            return Eq(left, self.cut_ref())
        raise self.fail(
            "found %r" % (t.value or "end of input"),
            ("true", "false", "(", "test", "out", "in", "read", "name"),
        )


def _default_presets() -> dict[str, Policy]:
    from .blp import blp_policy  # deferred to avoid an import cycle

    return {"BLP": blp_policy()}


def parse_scenario(text: str, presets: dict[str, Policy] | None = None, filename: str = "<scenario>") -> Net:
    p = _Parser(text, filename, None, _default_presets() if presets is None else presets)
    net = p.scenario()
    p.expect("")  # eof
    return net


def parse_policy(text: str, lattice: Lattice, presets: dict[str, Policy] | None = None,
                 filename: str = "<policy>") -> Policy:
    p = _Parser(text, filename, lattice, _default_presets() if presets is None else presets)
    pol = p.policy()
    if p.peek().type != "eof":
        raise p.fail("trailing input after policy")
    return pol


def parse_process_text(text: str, filename: str = "<process>") -> Process:
    p = _Parser(text, filename, None, {})
    proc = p.process(frozenset())
    if p.peek().type != "eof":
        raise p.fail("trailing input after process")
    return proc


# ---------------------------------------------------------------------------
# Rendering

_PREC = {
    PolicyOp.PRIOR: 1,
    PolicyOp.IMPLIES: 2,
    PolicyOp.OPLUS: 3,
    PolicyOp.OTIMES: 3,
    PolicyOp.AND: 4,
    PolicyOp.OR: 4,
}
_NOT_PREC = 5
_ATOM_PREC = 6


def _render_ref(ref, quoted: bool) -> str:
    if isinstance(ref, Lit):
        return "'%s'" % ref.name if quoted else ref.name
    if isinstance(ref, Var):
        return ref.name
    if isinstance(ref, Binder):
        return "?%s" % ref.name
    return "_"


def _render_args(args, quoted: bool) -> str:
    if isinstance(args, AnyArgs):
        return "_*"
    return ", ".join(_render_ref(a, quoted) for a in args)


def _render_pat_action(action: Action) -> str:
    return "%s(%s)@%s" % (action.kind.value, _render_args(action.args, True), _render_ref(action.target, True))


def render_policy(pol: Policy, prec: int = 0) -> str:
    if isinstance(pol, Const):
        return "true" if pol.value else "false"
    if isinstance(pol, Not):
        inner = "!%s" % render_policy(pol.operand, _NOT_PREC)
        return inner if prec <= _NOT_PREC else "(%s)" % inner
    if isinstance(pol, Bin):
        p = _PREC[pol.op]
        body = "%s %s %s" % (render_policy(pol.left, p), pol.op.value, render_policy(pol.right, p + 1))
        return body if p >= prec else "(%s)" % body
    if isinstance(pol, Geq):
        return "%s >= %s" % (_render_lev(pol.left), _render_lev(pol.right))
    if isinstance(pol, Eq):
        return "%s = %s" % (_render_ref(pol.left, True), _render_ref(pol.right, True))
    if isinstance(pol, OccursIn):
        return "%s occurs-in %s" % (_render_pat_action(pol.pat), pol.cont)
    if isinstance(pol, Present):
        return "test(%s)@%s" % (_render_args(pol.args, True), _render_ref(pol.target, True))
    if isinstance(pol, Aspect):
        cut = pol.cut
        cut_text = "%s :: %s . %s" % (_render_ref(cut.subject, True), _render_pat_action(cut.action), cut.cont)
        return "[ %s if %s : %s ]" % (render_policy(pol.rec), cut_text, render_policy(pol.cond))
    raise TypeError("not a policy node: %r" % (pol,))


def _render_lev(lev: LevExpr) -> str:
    if isinstance(lev, LevName):
        return lev.which
    return lev.level.name


def render_process(proc: Process) -> str:
    if isinstance(proc, Nil):
        return "0"
    if isinstance(proc, Parallel):
        return " | ".join(_paren_if(p, isinstance(p, Parallel)) for p in proc.parts)
    if isinstance(proc, Replicate):
        needs = isinstance(proc.body, Parallel) or (isinstance(proc.body, Choice) and len(proc.body.branches) > 1)
        return "*%s" % _paren_if(proc.body, needs)
    return " + ".join(_render_branch(a, cont) for a, cont in proc.branches)


def _render_branch(action: Action, cont: Process) -> str:
    needs = isinstance(cont, Parallel) or (isinstance(cont, Choice) and len(cont.branches) > 1)
    return "%s . %s" % (_render_net_action(action), _paren_if(cont, needs))


def _paren_if(proc: Process, needs: bool) -> str:
    text = render_process(proc)
    return "(%s)" % text if needs else text


def _render_net_action(action: Action) -> str:
    return "%s(%s)@%s" % (action.kind.value, _render_args(action.args, False), _render_ref(action.target, False))


def render_item_body(body: Body) -> str:
    if isinstance(body, TupleBody):
        return "tuple <%s>" % ", ".join(body.values)
    return "process %s" % render_process(body)


def _hasse_edges(lat: Lattice) -> list[tuple[str, str]]:
    names = lat.level_names
    edges = []
    for a in names:
        for b in names:
            if a == b or not lat.leq(lat.level(a), lat.level(b)):
                continue
            between = any(
                c != a and c != b and lat.leq(lat.level(a), lat.level(c)) and lat.leq(lat.level(c), lat.level(b))
                for c in names
            )
            if not between:
                edges.append((a, b))
    return edges


def render_scenario(net: Net) -> str:
    lat = net.lattice
    lines = ["lattice {"]
    lines.append("  levels: %s;" % ", ".join(lat.level_names))
    lines.append("  order: %s;" % ", ".join("%s < %s" % e for e in _hasse_edges(lat)))
    lines.append("}")
    for item in net.items:
        st = item.state
        lines.append("")
        lines.append("location %s {" % item.name)
        lines.append("  state <%s, %s, %s, %s>;" % (st.gS.name, st.gC.name, st.gH.name, st.gO.name))
        lines.append("  policy %s;" % render_policy(item.policy))
        lines.append("  %s;" % render_item_body(item.body))
        lines.append("}")
    return "\n".join(lines) + "\n"
