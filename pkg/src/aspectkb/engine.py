"""Execution engine: redex enumeration, reaction steps, schedulers.

One step picks a located process item, one action-prefixed branch of
it, and a target item, then asks the combined policy of both ends for a
verdict.  The subject's and the target's policies are combined with
``(+)``; the step proceeds when the combined value is BOT or TT.

Effects of a granted step:

  read  - the branch's continuation runs under the match bindings and the
          subject's history absorbs the tuple's classification and history;
          the tuple stays.
  in    - like read, and the tuple item is removed.
  out   - a new tuple item appears at the target location; it copies the
          base item's clearance, current level and classification, and its
          history is the base history joined with the writer's current
          level and history.  The writer's own state does not change.

A denied step wipes the chosen item's whole choice (its body becomes
``0``); nothing else changes.  A granted in/read whose pattern does not
match the chosen tuple is recorded as a not-enabled event and changes
nothing.

Replication unfolds lazily: a ``*P`` item contributes the redexes of
one fresh copy of ``P``, and the copy materializes only when one of
those redexes is applied.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from typing import Optional

from .belnap import Four, grant, oplus
from .matcher import match, substitute
from .parser import render_policy, render_process
from .policy_eval import InteractionView, LevelBinding, eval_policy
from .syntax import (
    Action,
    Binder,
    Choice,
    Lit,
    LocalizedState,
    LocatedItem,
    Net,
    Nil,
    Parallel,
    Process,
    Replicate,
    TupleBody,
    Var,
)


class EngineError(Exception):
    pass


class StaleRedex(EngineError):
    def __init__(self) -> None:
        super().__init__("redex does not belong to this net; re-enumerate after every step")


class ScriptMismatch(EngineError):
    def __init__(self, key: str, available: list[str]):
        self.key = key
        self.available = available
        super().__init__("scripted redex %r is not enabled; available: %s" % (key, ", ".join(available) or "none"))


# ---------------------------------------------------------------------------
# Normal form

def split_process(proc: Process) -> list[Process]:
    if isinstance(proc, Parallel):
        out: list[Process] = []
        for p in proc.parts:
            out.extend(split_process(p))
        return out
    return [proc]


def normalize(net: Net) -> Net:
    """Split parallel compositions into separate items sharing name and
    annotation.  Inert items are kept; replication is not unfolded."""
    items: list[LocatedItem] = []
    for it in net.items:
        if isinstance(it.body, TupleBody) or not isinstance(it.body, Parallel):
            items.append(it)
            continue
        parts = split_process(it.body)
        for i, part in enumerate(parts):
            key = it.key if i == 0 else "%s~%d" % (it.key, i)
            items.append(LocatedItem(it.name, it.state, it.policy, part, it.declared, key))
    return Net(tuple(items), net.lattice)


# ---------------------------------------------------------------------------
# Redexes

@dataclass(frozen=True)
class Redex:
    subject_index: int
    subject: LocatedItem
    unfold: Optional[int]  # index into the split body of a replicated item
    branch: int
    action: Action
    continuation: Process
    target_index: int
    target: LocatedItem

    @property
    def key(self) -> str:
        core = "%s.%d" % (self.subject.key, self.branch)
        if self.unfold is not None:
            core = "%s*%d.%d" % (self.subject.key, self.unfold, self.branch)
        return "%s@%s" % (core, self.target.key)


def _branches(item: LocatedItem) -> list[tuple[Optional[int], int, Action, Process]]:
    body = item.body
    if isinstance(body, Choice):
        return [(None, i, a, cont) for i, (a, cont) in enumerate(body.branches)]
    if isinstance(body, Replicate):
        out = []
        for j, part in enumerate(split_process(body.body)):
            if isinstance(part, Choice):
                out.extend((j, i, a, cont) for i, (a, cont) in enumerate(part.branches))
        return out
    return []


def enumerate_redexes(net: Net) -> list[Redex]:
    """All candidate interactions of a net, in a deterministic order."""
    out: list[Redex] = []
    for si, item in enumerate(net.items):
        if isinstance(item.body, TupleBody):
            continue
        for unfold, branch, action, cont in _branches(item):
            tgt = action.target
            if not isinstance(tgt, Lit):
                continue  # unresolved target variable, nothing to fire at
            if action.kind.value == "out":
                base = next(
                    (ti for ti, cand in enumerate(net.items) if cand.name == tgt.name and cand.declared),
                    None,
                )
                if base is not None:
                    out.append(Redex(si, item, unfold, branch, action, cont, base, net.items[base]))
            else:
                arity = len(action.args)
                for ti, cand in enumerate(net.items):
                    if cand.name == tgt.name and isinstance(cand.body, TupleBody) and len(cand.body.values) == arity:
                        out.append(Redex(si, item, unfold, branch, action, cont, ti, cand))
    out.sort(key=lambda r: (r.subject.name, r.subject_index, r.unfold or 0, r.branch, r.target.name, r.target_index))
    return out


# ---------------------------------------------------------------------------
# Trace events

@dataclass(frozen=True)
class TraceEvent:
    step: int
    redex: str  # the key a FixedScript would use to replay this step
    subject: str
    subject_key: str
    kind: str
    args: str
    target: str
    target_key: str
    decision: Four
    granted: bool
    enabled: bool
    theta: Optional[dict]
    state_updates: tuple[tuple[str, str, str], ...]  # (item key, old gH, new gH)
    created_items: tuple[dict, ...]
    removed_items: tuple[dict, ...]

    def to_dict(self) -> dict:
        return {
            "step": self.step,
            "redex": self.redex,
            "subject": self.subject,
            "subject_key": self.subject_key,
            "kind": self.kind,
            "args": self.args,
            "target": self.target,
            "target_key": self.target_key,
            "decision": self.decision.value,
            "granted": self.granted,
            "enabled": self.enabled,
            "theta": self.theta,
            "state_updates": [list(u) for u in self.state_updates],
            "created_items": list(self.created_items),
            "removed_items": list(self.removed_items),
        }


@dataclass
class Trace:
    initial: Net
    events: list[TraceEvent] = field(default_factory=list)
    final: Optional[Net] = None

    def to_jsonl(self) -> str:
        return "".join(json.dumps(e.to_dict()) + "\n" for e in self.events)

    def to_text(self) -> str:
        lines = []
        for e in self.events:
            verdict = "granted" if e.granted else "denied"
            if not e.enabled:
                verdict = "not-enabled"
            lines.append(
                "%3d  %s %s(%s)@%s  decision=%s  %s"
                % (e.step, e.subject, e.kind, e.args, e.target, e.decision.value, verdict)
            )
        return "\n".join(lines) + ("\n" if lines else "")


def _item_summary(item: LocatedItem) -> dict:
    st = item.state
    body = list(item.body.values) if isinstance(item.body, TupleBody) else render_process(item.body)
    return {
        "key": item.key,
        "name": item.name,
        "body": body,
        "state": {"gS": st.gS.name, "gC": st.gC.name, "gH": st.gH.name, "gO": st.gO.name},
    }


def _render_args(action: Action) -> str:
    bits = []
    for a in action.args:
        if isinstance(a, Binder):
            bits.append("?%s" % a.name)
        elif isinstance(a, Var):
            bits.append(a.name)
        else:
            bits.append(a.name)
    return ", ".join(bits)


# ---------------------------------------------------------------------------
# One reaction step

def decide(net: Net, r: Redex) -> tuple[Four, LevelBinding]:
    """Combined policy verdict of the subject's and the target's policies."""
    ss, ts = r.subject.state, r.target.state
    levels = LevelBinding(gS=ss.gS, gC=ss.gC, gO=ts.gO, gHs=ss.gH, gHt=ts.gH)
    iv = InteractionView(r.subject.name, r.action, r.continuation, levels, net)
    d_s = eval_policy(r.subject.policy, iv)
    d_t = d_s if r.target.policy is r.subject.policy else eval_policy(r.target.policy, iv)
    return oplus(d_s, d_t), levels


def apply(net: Net, r: Redex, step: int = 0) -> tuple[Net, TraceEvent]:
    items = net.items
    if r.subject_index >= len(items) or items[r.subject_index] is not r.subject:
        raise StaleRedex()
    if r.target_index >= len(items) or items[r.target_index] is not r.target:
        raise StaleRedex()

    decision, levels = decide(net, r)
    granted = grant(decision)
    lat = net.lattice
    kind = r.action.kind.value

    def event(enabled=True, theta=None, updates=(), created=(), removed=()):
        return TraceEvent(
            step=step,
            redex=r.key,
            subject=r.subject.name,
            subject_key=r.subject.key,
            kind=kind,
            args=_render_args(r.action),
            target=r.target.name,
            target_key=r.target.key,
            decision=decision,
            granted=granted,
            enabled=enabled,
            theta=theta,
            state_updates=tuple(updates),
            created_items=tuple(created),
            removed_items=tuple(removed),
        )

    def replace_subject(new_body: Process, new_state: LocalizedState) -> list[LocatedItem]:
        """The subject item after the step, as a list (replication expands)."""
        s = r.subject
        if r.unfold is None:
            return [LocatedItem(s.name, new_state, s.policy, new_body, s.declared, s.key)]
        assert isinstance(s.body, Replicate)
        parts = split_process(s.body.body)
        out = []
        for j, part in enumerate(parts):
            body = new_body if j == r.unfold else part
            state = new_state if j == r.unfold else s.state
            out.append(LocatedItem(s.name, state, s.policy, body, False, "%s*%d.s%d" % (s.key, j, step)))
        out.append(s)  # the replicated item itself persists
        return out

    if not granted:
        # Denial discards the whole choice the action belonged to.
        new_items = list(items)
        new_items[r.subject_index : r.subject_index + 1] = replace_subject(Nil(), r.subject.state)
        return Net(tuple(new_items), lat), event()

    if kind == "out":
        values = tuple(a.name for a in r.action.args if isinstance(a, Lit))
        if len(values) != len(r.action.args):
            raise EngineError("out arguments must be ground at execution time")
        ts = r.target.state
        new_hist = lat.join(ts.gH, lat.join(levels.gC, levels.gHs))
        tuple_state = LocalizedState(ts.gS, ts.gC, new_hist, ts.gO)
        new_tuple = LocatedItem(
            r.target.name, tuple_state, r.target.policy, TupleBody(values), False, "%s#v%d" % (r.target.name, step)
        )
        new_items = list(items)
        new_items[r.subject_index : r.subject_index + 1] = replace_subject(r.continuation, r.subject.state)
        new_items.append(new_tuple)
        return Net(tuple(new_items), lat), event(created=[_item_summary(new_tuple)])

    # in / read
    assert isinstance(r.target.body, TupleBody)
    theta = match(r.action.args, r.target.body)
    if theta is None:
        return net, event(enabled=False)
    ss = r.subject.state
    ts = r.target.state
    new_hist = lat.join(ss.gH, lat.join(ts.gO, ts.gH))
    new_state = LocalizedState(ss.gS, ss.gC, new_hist, ss.gO)
    new_body = substitute(r.continuation, theta)
    updates = [(r.subject.key, ss.gH.name, new_hist.name)]
    removed = []
    new_items = list(items)
    new_items[r.subject_index : r.subject_index + 1] = replace_subject(new_body, new_state)
    if kind == "in":
        removed.append(_item_summary(r.target))
        new_items = [it for it in new_items if it is not r.target]
    rendered_theta = {k: v.name for k, v in theta.bindings.items()}
    return Net(tuple(new_items), lat), event(theta=rendered_theta, updates=updates, removed=removed)


# ---------------------------------------------------------------------------
# Schedulers and runs

class SeededRandom:
    """Uniform choice among enabled redexes, reproducible from the seed."""

    def __init__(self, seed: int):
        self.seed = seed
        self._rng = random.Random(seed)

    def choose(self, redexes: list[Redex]) -> Optional[Redex]:
        if not redexes:
            return None
        return redexes[self._rng.randrange(len(redexes))]


class FixedScript:
    """Follows a list of redex keys; a key that is not enabled is an error."""

    def __init__(self, keys: list[str]):
        self.keys = list(keys)
        self._pos = 0

    def choose(self, redexes: list[Redex]) -> Optional[Redex]:
        if self._pos >= len(self.keys):
            return None
        key = self.keys[self._pos]
        for r in redexes:
            if r.key == key:
                self._pos += 1
                return r
        raise ScriptMismatch(key, [r.key for r in redexes])


def run(net: Net, scheduler, max_steps: int = 1000) -> Trace:
    """Drive a net to quiescence, a scheduler stop, or the step bound."""
    current = normalize(net)
    trace = Trace(initial=current)
    for step in range(max_steps):
        redexes = enumerate_redexes(current)
        r = scheduler.choose(redexes)
        if r is None:
            break
        current, ev = apply(current, r, step)
        current = normalize(current)
        trace.events.append(ev)
    trace.final = current
    return trace


# ---------------------------------------------------------------------------
# Exhaustive exploration

def canonical_key(net: Net) -> str:
    """Content hash key: items of the normal form, rendered and sorted."""
    lines = []
    for it in normalize(net).items:
        st = it.state
        body = render_process(it.body) if not isinstance(it.body, TupleBody) else "<%s>" % ",".join(it.body.values)
        lines.append("%s|%s,%s,%s,%s|%s|%s" % (it.name, st.gS.name, st.gC.name, st.gH.name, st.gO.name,
                                               render_policy(it.policy), body))
    return "\n".join(sorted(lines))


@dataclass
class ReachGraph:
    states: list[Net]
    edges: list[tuple[int, int, TraceEvent]]
    truncated: bool

    @property
    def terminal(self) -> list[int]:
        sources = {src for src, dst, ev in self.edges if ev.enabled}
        return [i for i in range(len(self.states)) if i not in sources]


def explore(net: Net, max_depth: int = 100, max_states: int = 5000) -> ReachGraph:
    """Breadth-first reachability over canonical states."""
    start = normalize(net)
    states = [start]
    index = {canonical_key(start): 0}
    edges: list[tuple[int, int, TraceEvent]] = []
    frontier = [(0, 0)]
    truncated = False
    while frontier:
        next_frontier = []
        for si, depth in frontier:
            if depth >= max_depth:
                truncated = True
                continue
            state = states[si]
            for r in enumerate_redexes(state):
                new_net, ev = apply(state, r, depth)
                if not ev.enabled:
                    edges.append((si, si, ev))
                    continue
                new_net = normalize(new_net)
                key = canonical_key(new_net)
                di = index.get(key)
                if di is None:
                    if len(states) >= max_states:
                        truncated = True
                        continue
                    di = len(states)
                    index[key] = di
                    states.append(new_net)
                    next_frontier.append((di, depth + 1))
                edges.append((si, di, ev))
        frontier = next_frontier
    return ReachGraph(states, edges, truncated)
