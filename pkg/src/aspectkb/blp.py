"""Bell-LaPadula as an aspect bundle, plus an independent audit model.

The policy side is a single reusable value, ``blp_policy()``: eight
aspects joined with ``(+)``.  Reads require the reader's clearance to
dominate the tuple's classification and history; ins additionally
require the tuple's classification to dominate the consumer's current
level and history; outs require the target classification to dominate
the writer's current level and history.

The audit side never looks at a policy.  It keeps a global state: a set
of (subject, object, read/write) access triples plus name-level maps of
clearance, current level, classification and history, and evaluates the
no-read-up, no-write-down and history conditions over that state by
plain enumeration.  ``lemma_harness`` drives randomly generated nets
through the engine and checks, decision by decision, that denials line
up exactly with would-be violations on the audit side.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources

from .engine import Redex, Trace, TraceEvent, apply, canonical_key, enumerate_redexes, normalize
from .lattice import Lattice, Level, chain
from .parser import parse_scenario, render_scenario
from .syntax import (
    ANY_ARGS,
    Action,
    ActionKind,
    Aspect,
    Bin,
    Binder,
    Choice,
    Const,
    Cut,
    Geq,
    LevName,
    Lit,
    LocalizedState,
    LocatedItem,
    Net,
    Nil,
    Policy,
    PolicyOp,
    TupleBody,
    Var,
    with_keys,
)

__all__ = [
    "blp_policy",
    "GlobalState",
    "Violation",
    "SecurityReport",
    "oracle_check",
    "initial_global_state",
    "state_from_trace",
    "verify_history_agreement",
    "candidate_triples",
    "candidate_violations",
    "HarnessReport",
    "lemma_harness",
    "random_net",
    "preset_lattice",
    "list_builtin_scenarios",
    "builtin_scenario_text",
    "load_builtin_scenario",
]


# ---------------------------------------------------------------------------
# The preset policy

_RULES = (
    (ActionKind.READ, "Ss", "Ot"),
    (ActionKind.IN, "Ss", "Ot"),
    (ActionKind.OUT, "Ot", "Cs"),
    (ActionKind.IN, "Ot", "Cs"),
    (ActionKind.OUT, "Ot", "Hs"),
    (ActionKind.IN, "Ot", "Hs"),
    (ActionKind.READ, "Ss", "Ht"),
    (ActionKind.IN, "Ss", "Ht"),
)


def _rule_aspect(kind: ActionKind, left: str, right: str) -> Aspect:
    cut = Cut(Var("s"), Action(kind, ANY_ARGS, Var("t")), "X")
    return Aspect(Geq(LevName(left), LevName(right)), cut, Const(True))


@lru_cache(maxsize=1)
def blp_policy() -> Policy:
    """The eight-rule bundle, combined with (+).  Cached: every location
    that installs the preset shares one policy value."""
    pol: Policy = _rule_aspect(*_RULES[0])
    for rule in _RULES[1:]:
        pol = Bin(PolicyOp.OPLUS, pol, _rule_aspect(*rule))
    return pol


# ---------------------------------------------------------------------------
# Global audit state

@dataclass
class GlobalState:
    """Accumulated accesses plus name-level security maps."""

    accesses: set[tuple[str, str, str]]
    fS: dict[str, Level]
    fC: dict[str, Level]
    fO: dict[str, Level]
    fH: dict[str, Level]
    lattice: Lattice

    def copy(self) -> "GlobalState":
        return GlobalState(set(self.accesses), dict(self.fS), dict(self.fC),
                           dict(self.fO), dict(self.fH), self.lattice)

    def absorb(self, triple: tuple[str, str, str]) -> None:
        """Record one access and update the history maps: a reader's
        history absorbs the object's classification, a written object's
        history absorbs the writer's current level."""
        s, o, op = triple
        self.accesses.add(triple)
        if op == "read":
            self.fH[s] = self.lattice.join(self.fH[s], self.fO[o])
        else:
            self.fH[o] = self.lattice.join(self.fH[o], self.fC[s])


@dataclass(frozen=True)
class Violation:
    rule: str  # ss | star1 | star2 | history-read | history-write | history-monotone
    subject: str
    obj: str
    detail: str


@dataclass
class SecurityReport:
    violations: list[Violation]

    @property
    def secure(self) -> bool:
        return not self.violations


def oracle_check(gs: GlobalState) -> SecurityReport:
    """Evaluate the five access-control conditions over a global state."""
    lat = gs.lattice
    out: list[Violation] = []
    for s, o, op in sorted(gs.accesses):
        if op == "read":
            if not lat.leq(gs.fO[o], gs.fS[s]):
                out.append(Violation("ss", s, o, "clearance %s below classification %s"
                                     % (gs.fS[s].name, gs.fO[o].name)))
            if not lat.leq(gs.fO[o], gs.fH[s]):
                out.append(Violation("history-read", s, o, "history %s below classification %s"
                                     % (gs.fH[s].name, gs.fO[o].name)))
        else:
            if not lat.leq(gs.fC[s], gs.fO[o]):
                out.append(Violation("star1", s, o, "classification %s below current level %s"
                                     % (gs.fO[o].name, gs.fC[s].name)))
            if not lat.leq(gs.fC[s], gs.fH[o]):
                out.append(Violation("history-write", s, o, "object history %s below writer level %s"
                                     % (gs.fH[o].name, gs.fC[s].name)))
            for s2, o2, op2 in sorted(gs.accesses):
                if s2 == s and op2 == "read" and not lat.leq(gs.fO[o2], gs.fO[o]):
                    out.append(Violation("star2", s, o, "wrote %s below previously read %s (%s)"
                                         % (gs.fO[o].name, gs.fO[o2].name, o2)))
    return SecurityReport(out)


def initial_global_state(net: Net) -> GlobalState:
    """Name-level maps from the declared annotations; no accesses yet.
    When several items share a name the first declaration wins."""
    fS: dict[str, Level] = {}
    fC: dict[str, Level] = {}
    fO: dict[str, Level] = {}
    fH: dict[str, Level] = {}
    for it in net.items:
        if it.name in fS:
            continue
        fS[it.name] = it.state.gS
        fC[it.name] = it.state.gC
        fO[it.name] = it.state.gO
        fH[it.name] = it.state.gH
    return GlobalState(set(), fS, fC, fO, fH, net.lattice)


def candidate_triples(ev_or_redex) -> list[tuple[str, str, str]]:
    """The access triples one interaction would add.  in counts as both
    a read and a write."""
    if isinstance(ev_or_redex, TraceEvent):
        s, o, kind = ev_or_redex.subject, ev_or_redex.target, ev_or_redex.kind
    else:
        r: Redex = ev_or_redex
        s, o, kind = r.subject.name, r.target.name, r.action.kind.value
    if kind == "read":
        return [(s, o, "read")]
    if kind == "out":
        return [(s, o, "write")]
    return [(s, o, "read"), (s, o, "write")]


def candidate_violations(gs: GlobalState, triples: list[tuple[str, str, str]]) -> list[Violation]:
    """Violations that granting the candidate access would introduce.

    Reads are checked against the no-read-up condition.  Writes are
    checked against no-write-down and against the reads the same subject
    has already performed; reads the subject might perform later are not
    held against a write that precedes them.
    """
    lat = gs.lattice
    out: list[Violation] = []
    for s, o, op in triples:
        if op == "read":
            if not lat.leq(gs.fO[o], gs.fS[s]):
                out.append(Violation("ss", s, o, "clearance %s below classification %s"
                                     % (gs.fS[s].name, gs.fO[o].name)))
        else:
            if not lat.leq(gs.fC[s], gs.fO[o]):
                out.append(Violation("star1", s, o, "classification %s below current level %s"
                                     % (gs.fO[o].name, gs.fC[s].name)))
            for s2, o2, op2 in sorted(gs.accesses):
                if s2 == s and op2 == "read" and not lat.leq(gs.fO[o2], gs.fO[o]):
                    out.append(Violation("star2", s, o, "would write %s below previously read %s (%s)"
                                         % (gs.fO[o].name, gs.fO[o2].name, o2)))
    return out


def state_from_trace(trace: Trace, upto: int | None = None) -> GlobalState:
    """Replay a trace's granted, enabled events into a global state.
    Only names, kinds and initial annotations are consulted; none of the
    engine's evolving state fields enter the computation."""
    gs = initial_global_state(trace.initial)
    events = trace.events if upto is None else trace.events[:upto]
    for ev in events:
        if not (ev.granted and ev.enabled):
            continue
        for triple in candidate_triples(ev):
            gs.absorb(triple)
    return gs


# ---------------------------------------------------------------------------
# Engine history vs recomputed history

def _initial_item_maps(net: Net):
    gS: dict[str, Level] = {}
    gC: dict[str, Level] = {}
    gO: dict[str, Level] = {}
    gH: dict[str, Level] = {}
    for it in net.items:
        gS[it.key] = it.state.gS
        gC[it.key] = it.state.gC
        gO[it.key] = it.state.gO
        gH[it.key] = it.state.gH
    return gS, gC, gO, gH


def verify_history_agreement(trace: Trace) -> list[dict]:
    """Recompute every history value a trace should have produced and
    compare with what the engine reported.

    The recomputation works per item, from the initial annotations and
    the event stream alone: a granted read or in joins the tuple's
    classification and history into the reading item's history; a
    granted out stamps the new tuple with the base item's history joined
    with the writer's current level and history.  Returns one record per
    disagreement; an empty list means the engine's history fields are
    exactly reproducible.
    """
    lat = trace.initial.lattice
    gS, gC, gO, gH = _initial_item_maps(trace.initial)

    def lookup(table: dict[str, Level], key: str) -> Level:
        # unfolded replica keys extend their parent's key
        while key not in table:
            cut = max(key.rfind("*"), key.rfind("~"))
            if cut <= 0:
                raise KeyError(key)
            key = key[:cut]
        return table[key]

    problems: list[dict] = []

    def complain(step: int, what: str, expected: str, actual: str) -> None:
        problems.append({"step": step, "what": what, "expected": expected, "actual": actual})

    for ev in trace.events:
        if not (ev.granted and ev.enabled):
            continue
        if ev.kind in ("read", "in"):
            old = lookup(gH, ev.subject_key)
            expected = lat.join(old, lat.join(lookup(gO, ev.target_key), lookup(gH, ev.target_key)))
            if len(ev.state_updates) != 1:
                complain(ev.step, "read reported %d history updates" % len(ev.state_updates),
                         "1", str(len(ev.state_updates)))
                continue
            key, reported_old, reported_new = ev.state_updates[0]
            if reported_old != old.name:
                complain(ev.step, "history of %s before the step" % key, old.name, reported_old)
            if reported_new != expected.name:
                complain(ev.step, "history of %s after the step" % key, expected.name, reported_new)
            if not lat.leq(old, expected):
                complain(ev.step, "history-monotone at %s" % key, "%s above %s" % (expected.name, old.name),
                         "decrease")
            gH[key] = expected
        elif ev.kind == "out":
            if len(ev.created_items) != 1:
                complain(ev.step, "out reported %d created items" % len(ev.created_items),
                         "1", str(len(ev.created_items)))
                continue
            created = ev.created_items[0]
            key = created["key"]
            expected = lat.join(lookup(gH, ev.target_key),
                                lat.join(lookup(gC, ev.subject_key), lookup(gH, ev.subject_key)))
            if created["state"]["gH"] != expected.name:
                complain(ev.step, "history of new tuple %s" % key, expected.name, created["state"]["gH"])
            for fieldname, table in (("gS", gS), ("gC", gC), ("gO", gO)):
                want = lookup(table, ev.target_key)
                if created["state"][fieldname] != want.name:
                    complain(ev.step, "%s of new tuple %s" % (fieldname, key), want.name,
                             created["state"][fieldname])
            gS[key] = lookup(gS, ev.target_key)
            gC[key] = lookup(gC, ev.target_key)
            gO[key] = lookup(gO, ev.target_key)
            gH[key] = expected
    return problems


# ---------------------------------------------------------------------------
# Preset lattices

def preset_lattice(kind: str) -> Lattice:
    if kind == "chain3":
        return chain(["L1", "L2", "L3"])
    if kind == "diamond":
        return Lattice(("Low", "E1", "E2", "High"),
                       (("Low", "E1"), ("Low", "E2"), ("E1", "High"), ("E2", "High")))
    raise ValueError("unknown lattice preset %r (expected chain3 or diamond)" % kind)


# ---------------------------------------------------------------------------
# Random nets for the lemma harness

_VALUES = ("a", "b", "c")


def random_net(rng: random.Random, lattice: Lattice) -> Net:
    """A small closed net under the preset policy: a few tuple locations
    and a few sequential processes aiming in, read and out at them.
    Histories start at bottom; processes are classified at their own
    clearance; current levels sit at or below clearance."""
    levels = [lattice.level(n) for n in lattice.level_names]
    pol = blp_policy()

    n_tuples = rng.randint(1, 2)
    n_procs = rng.randint(2, 3)
    items: list[LocatedItem] = []
    tuple_names: list[str] = []
    arity: dict[str, int] = {}
    values: dict[str, tuple[str, ...]] = {}

    for i in range(n_tuples):
        name = "T%d" % (i + 1)
        lv = rng.choice(levels)
        k = rng.randint(1, 2)
        vals = tuple(rng.choice(_VALUES) for _ in range(k))
        st = LocalizedState(lv, lv, lattice.bottom, lv)
        items.append(LocatedItem(name, st, pol, TupleBody(vals)))
        tuple_names.append(name)
        arity[name] = k
        values[name] = vals

    for i in range(n_procs):
        name = "P%d" % (i + 1)
        gS = rng.choice(levels)
        below = [lv for lv in levels if lattice.leq(lv, gS)]
        gC = rng.choice(below)
        st = LocalizedState(gS, gC, lattice.bottom, gS)
        body = _random_body(rng, lattice, tuple_names, arity, values)
        items.append(LocatedItem(name, st, pol, body))

    return Net(with_keys(items), lattice)


def _random_body(rng, lattice, tuple_names, arity, values):
    n_actions = rng.randint(1, 3)
    bound: list[str] = []
    actions: list[Action] = []
    binder_pool = iter("xyz")
    for _ in range(n_actions):
        kind = rng.choice((ActionKind.OUT, ActionKind.IN, ActionKind.READ))
        target = rng.choice(tuple_names)
        k = arity[target]
        if kind is ActionKind.OUT:
            args = tuple(
                Var(rng.choice(bound)) if bound and rng.random() < 0.25 else Lit(rng.choice(_VALUES))
                for _ in range(rng.randint(1, 2))
            )
        else:
            args = []
            for pos in range(k):
                roll = rng.random()
                if roll < 0.55:
                    args.append(Binder(next(binder_pool, "w")))
                elif roll < 0.9:
                    args.append(Lit(values[target][pos]))  # matches the declared tuple
                else:
                    args.append(Lit(rng.choice(_VALUES)))
            args = tuple(args)
            bound.extend(a.name for a in args if isinstance(a, Binder))
        actions.append(Action(kind, args, Lit(target)))
    body = Nil()
    for act in reversed(actions):
        body = Choice(((act, body),))
    return body


# ---------------------------------------------------------------------------
# The lemma harness

@dataclass
class HarnessReport:
    lattice_kind: str
    instances: int
    seed: int
    decisions: int = 0
    grants: int = 0
    denials: int = 0
    states_visited: int = 0
    truncated_instances: int = 0
    elapsed: float = 0.0
    counterexamples: list[dict] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.counterexamples

    def summary(self) -> str:
        return ("%s: %d nets, %d decisions (%d granted / %d denied), %d states, "
                "%d truncated, %d counterexamples, %.1fs"
                % (self.lattice_kind, self.instances, self.decisions, self.grants,
                   self.denials, self.states_visited, self.truncated_instances,
                   len(self.counterexamples), self.elapsed))


def _audit_net(net: Net, report: HarnessReport, scenario_text: str, max_nodes: int = 1500) -> None:
    """Explore every scheduling of one net, comparing each policy decision
    with the audit model's verdict on the candidate access."""
    start = normalize(net)
    stack: list[tuple[Net, GlobalState, tuple[str, ...]]] = [
        (start, initial_global_state(start), ())
    ]
    seen: set[tuple[str, frozenset]] = set()
    nodes = 0
    while stack:
        if nodes >= max_nodes:
            report.truncated_instances += 1
            return
        current, gs, path = stack.pop()
        marker = (canonical_key(current), frozenset(gs.accesses))
        if marker in seen:
            continue
        seen.add(marker)
        nodes += 1
        for r in enumerate_redexes(current):
            new_net, ev = apply(current, r, len(path))
            triples = candidate_triples(r)
            viols = candidate_violations(gs, triples)
            report.decisions += 1
            if ev.granted:
                report.grants += 1
            else:
                report.denials += 1
            if ev.granted == bool(viols):
                report.counterexamples.append({
                    "scenario": scenario_text,
                    "path": list(path),
                    "candidate": r.key,
                    "decision": ev.decision.value,
                    "violations": [v.rule for v in viols],
                    "expected": "denial" if viols else "grant",
                })
                continue
            if not ev.enabled:
                continue
            new_gs = gs
            if ev.granted:
                new_gs = gs.copy()
                for triple in triples:
                    new_gs.absorb(triple)
            stack.append((normalize(new_net), new_gs, path + (r.key,)))
    report.states_visited += nodes


def lemma_harness(instances: int, lattice_kind: str = "chain3", seed: int = 0,
                  max_nodes: int = 1500) -> HarnessReport:
    """Generate nets, explore them exhaustively, and demand that the
    policy denies exactly the accesses the audit model rejects."""
    lattice = preset_lattice(lattice_kind)
    report = HarnessReport(lattice_kind=lattice_kind, instances=instances, seed=seed)
    t0 = time.monotonic()
    for i in range(instances):
        rng = random.Random("%d:%s:%d" % (seed, lattice_kind, i))
        net = random_net(rng, lattice)
        _audit_net(net, report, render_scenario(net), max_nodes=max_nodes)
    report.elapsed = time.monotonic() - t0
    return report


# ---------------------------------------------------------------------------
# Shipped scenarios

def list_builtin_scenarios() -> list[str]:
    root = resources.files("aspectkb").joinpath("scenarios")
    return sorted(p.name[: -len(".akb")] for p in root.iterdir() if p.name.endswith(".akb"))


def builtin_scenario_text(name: str) -> str:
    path = resources.files("aspectkb").joinpath("scenarios", name + ".akb")
    if not path.is_file():
        raise KeyError("no builtin scenario %r; available: %s" % (name, ", ".join(list_builtin_scenarios())))
    return path.read_text()


def load_builtin_scenario(name: str) -> Net:
    return parse_scenario(builtin_scenario_text(name), filename=name + ".akb")
