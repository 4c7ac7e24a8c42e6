"""Abstract syntax for nets, processes and policies.

A net is a multiset of located items over one security lattice.  Every
item carries a location name, a localized state (four levels), a policy
and a body, which is either a process or a plain tuple of literals.
Policies are four-valued expressions whose leaves are aspects; an
aspect traps actions matching its cut and then evaluates its
recommendation under the trapped bindings.

All node types are immutable; the engine rewrites nets by building new
ones.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Union

from .lattice import Lattice, Level


# ---------------------------------------------------------------------------
# References and patterns

@dataclass(frozen=True)
class Lit:
    """A location literal (also used for plain data, which is just a name)."""

    name: str


@dataclass(frozen=True)
class Var:
    """A variable reference, bound by a binder or by a policy cut."""

    name: str


@dataclass(frozen=True)
class Binder:
    """An input binder ``?u``; only meaningful in in/read argument lists."""

    name: str


@dataclass(frozen=True)
class Wildcard:
    """The ``_`` pattern of policy cuts; matches one token, binds nothing."""


@dataclass(frozen=True)
class AnyArgs:
    """The ``_*`` pattern of policy cuts; matches an argument list of any arity."""


ANY_ARGS = AnyArgs()

LocRef = Union[Lit, Var]
Pattern = Union[Lit, Var, Binder, Wildcard]
Args = Union[tuple[Pattern, ...], AnyArgs]


class ActionKind(Enum):
    OUT = "out"
    IN = "in"
    READ = "read"


@dataclass(frozen=True)
class Action:
    kind: ActionKind
    args: Args
    target: LocRef


# ---------------------------------------------------------------------------
# Processes

@dataclass(frozen=True)
class Nil:
    """The inert process ``0``."""


@dataclass(frozen=True)
class Choice:
    """A sum of action-prefixed branches; committing to one discards the rest."""

    branches: tuple[tuple[Action, "Process"], ...]

    def __post_init__(self) -> None:
        if not self.branches:
            raise ValueError("a choice needs at least one branch")


@dataclass(frozen=True)
class Parallel:
    parts: tuple["Process", ...]


@dataclass(frozen=True)
class Replicate:
    body: "Process"


Process = Union[Nil, Choice, Parallel, Replicate]


@dataclass(frozen=True)
class TupleBody:
    """A tuple of data literals stored at a location."""

    values: tuple[str, ...]


Body = Union[Process, TupleBody]


# ---------------------------------------------------------------------------
# Policies

class PolicyOp(Enum):
    AND = "/\\"
    OR = "\\/"
    OPLUS = "(+)"
    OTIMES = "(x)"
    IMPLIES = "=>"
    PRIOR = ">"


@dataclass(frozen=True)
class Const:
    value: bool


@dataclass(frozen=True)
class Not:
    operand: "PolicyExpr"


@dataclass(frozen=True)
class Bin:
    op: PolicyOp
    left: "PolicyExpr"
    right: "PolicyExpr"


@dataclass(frozen=True)
class LevName:
    """One of the five level placeholders a recommendation may mention:
    subject clearance Ss, subject current level Cs, subject history Hs,
    target classification Ot, target history Ht."""

    which: str

    def __post_init__(self) -> None:
        if self.which not in ("Ss", "Cs", "Hs", "Ot", "Ht"):
            raise ValueError("unknown level placeholder %r" % self.which)


@dataclass(frozen=True)
class LevLit:
    level: Level


LevExpr = Union[LevName, LevLit]


@dataclass(frozen=True)
class Geq:
    """Lattice comparison between level expressions, two-valued (TT or FF)."""

    left: LevExpr
    right: LevExpr


@dataclass(frozen=True)
class Eq:
    """Literal equality between location references."""

    left: LocRef
    right: LocRef


@dataclass(frozen=True)
class OccursIn:
    """Syntactic search for an action shape inside a trapped continuation."""

    pat: Action
    cont: str


@dataclass(frozen=True)
class Present:
    """True when the current net holds a tuple at ``target`` matching ``args``.

    Written ``test(v1, v2)@l`` in the concrete syntax.
    """

    args: Args
    target: LocRef


@dataclass(frozen=True)
class Cut:
    """The action shape an aspect traps: subject, action pattern and a name
    for the continuation of the trapped process."""

    subject: LocRef
    action: Action
    cont: str


@dataclass(frozen=True)
class Aspect:
    rec: "PolicyExpr"
    cut: Cut
    cond: "PolicyExpr"


PolicyExpr = Union[Const, Not, Bin, Geq, Eq, OccursIn, Present, Aspect]
Policy = PolicyExpr


# ---------------------------------------------------------------------------
# Located items and nets

@dataclass(frozen=True)
class LocalizedState:
    """Security annotation of one item: clearance gS, current level gC,
    history gH and classification gO."""

    gS: Level
    gC: Level
    gH: Level
    gO: Level


@dataclass(frozen=True)
class LocatedItem:
    name: str
    state: LocalizedState
    policy: Policy
    body: Body
    # Bookkeeping, not part of the term: declared items come from a scenario,
    # virtual ones are created by writes at run time.  The key identifies the
    # item within one run for traces and oracles.
    declared: bool = field(default=True, compare=False)
    key: str = field(default="", compare=False)


@dataclass(frozen=True)
class Net:
    items: tuple[LocatedItem, ...]
    lattice: Lattice

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Net):
            return NotImplemented
        return self.items == other.items and _lattice_eq(self.lattice, other.lattice)

    def __hash__(self) -> int:
        return hash(self.items)


def _lattice_eq(a: Lattice, b: Lattice) -> bool:
    return a.level_names == b.level_names and all(
        a.leq(a.level(x), a.level(y)) == b.leq(b.level(x), b.level(y))
        for x in a.level_names
        for y in a.level_names
    )


def with_keys(items: list[LocatedItem]) -> tuple[LocatedItem, ...]:
    """Assign stable keys ``name#i`` to declared items in declaration order."""
    counts: dict[str, int] = {}
    out = []
    for it in items:
        i = counts.get(it.name, 0)
        counts[it.name] = i + 1
        out.append(LocatedItem(it.name, it.state, it.policy, it.body, it.declared, "%s#%d" % (it.name, i)))
    return tuple(out)


# ---------------------------------------------------------------------------
# Static validation

@dataclass(frozen=True)
class Diagnostic:
    where: str
    message: str

    def __str__(self) -> str:
        return "%s: %s" % (self.where, self.message)


def _walk_actions(proc: Process, bound: frozenset[str]):
    """Yield (action, bound-variables-at-that-point) for every action prefix."""
    if isinstance(proc, Nil):
        return
    if isinstance(proc, Parallel):
        for p in proc.parts:
            yield from _walk_actions(p, bound)
        return
    if isinstance(proc, Replicate):
        yield from _walk_actions(proc.body, bound)
        return
    for action, cont in proc.branches:
        yield action, bound
        inner = bound
        if isinstance(action.args, tuple):
            inner = bound | {a.name for a in action.args if isinstance(a, Binder)}
        yield from _walk_actions(cont, inner)


def validate(net: Net) -> list[Diagnostic]:
    """Well-formedness diagnostics for an executable net.

    Policies are not inspected here; their shape is fixed by the parser.
    """
    out: list[Diagnostic] = []
    lat = net.lattice
    declared_names = {it.name for it in net.items if it.declared}

    for it in net.items:
        st = it.state
        for lv in (st.gS, st.gC, st.gH, st.gO):
            if lv not in lat:
                out.append(Diagnostic(it.key or it.name, "level %r is not in the net's lattice" % lv.name))
                break
        else:
            if not lat.leq(st.gC, st.gS):
                out.append(Diagnostic(it.key or it.name, "current level %s exceeds clearance %s" % (st.gC.name, st.gS.name)))
            if isinstance(it.body, TupleBody):
                if it.declared and not (st.gS == st.gC == st.gO):
                    out.append(Diagnostic(it.key or it.name, "a stored tuple must have equal clearance, current level and classification"))
            else:
                if st.gO != st.gS:
                    out.append(Diagnostic(it.key or it.name, "a process location's classification must equal its clearance"))

        if isinstance(it.body, TupleBody):
            continue
        for action, bound in _walk_actions(it.body, frozenset()):
            args = action.args
            if isinstance(args, AnyArgs):
                out.append(Diagnostic(it.key or it.name, "arity pattern _* is only allowed in policy cuts"))
                continue
            for a in args:
                if isinstance(a, Wildcard):
                    out.append(Diagnostic(it.key or it.name, "wildcard _ is only allowed in policy cuts"))
                elif isinstance(a, Binder):
                    if action.kind is ActionKind.OUT:
                        out.append(Diagnostic(it.key or it.name, "out arguments cannot contain binders"))
                elif isinstance(a, Var) and a.name not in bound:
                    out.append(Diagnostic(it.key or it.name, "variable %r is not bound by any enclosing binder" % a.name))
            tgt = action.target
            if isinstance(tgt, Var):
                if tgt.name not in bound:
                    out.append(Diagnostic(it.key or it.name, "target variable %r is not bound" % tgt.name))
            elif action.kind is ActionKind.OUT and tgt.name not in declared_names:
                out.append(Diagnostic(it.key or it.name, "out targets undeclared location %r" % tgt.name))
    return out
