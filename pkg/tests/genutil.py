"""Seeded random syntax trees for round-trip and property tests.

Plain random.Random driving small recursive builders.  Name pools stay
clear of keywords, level placeholders and the (x)/(+) operator spellings
so that rendered text is unambiguous by construction.
"""

from __future__ import annotations

import random

from aspectkb.lattice import Lattice, chain
from aspectkb.syntax import (
    ANY_ARGS,
    Action,
    ActionKind,
    Aspect,
    Bin,
    Binder,
    Choice,
    Const,
    Cut,
    Eq,
    Geq,
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
    PolicyOp,
    Present,
    Replicate,
    TupleBody,
    Var,
    Wildcard,
    with_keys,
)

LAT = chain(("lo", "mid", "hi"))

LOC_NAMES = ("alpha", "beta", "gamma", "store", "cache", "relay")
CUT_VARS = ("u", "v", "w")
BINDERS = ("p", "q", "r")
VALUES = ("a", "b", "doc", "key7", "high")
CONTS = ("P", "Q", "X")
KINDS = (ActionKind.OUT, ActionKind.IN, ActionKind.READ)
PLACEHOLDERS = ("Ss", "Cs", "Hs", "Ot", "Ht")

_FULL_OPS = (PolicyOp.PRIOR, PolicyOp.IMPLIES, PolicyOp.OPLUS, PolicyOp.OTIMES, PolicyOp.AND, PolicyOp.OR)
_REC_OPS = (PolicyOp.IMPLIES, PolicyOp.OPLUS, PolicyOp.OTIMES, PolicyOp.AND, PolicyOp.OR)
_COND_OPS = (PolicyOp.AND, PolicyOp.OR)


def gen_cut_ref(rng: random.Random):
    return Var(rng.choice(CUT_VARS)) if rng.random() < 0.5 else Lit(rng.choice(LOC_NAMES))


def gen_cut_arg(rng: random.Random):
    roll = rng.random()
    if roll < 0.3:
        return Lit(rng.choice(VALUES))
    if roll < 0.55:
        return Var(rng.choice(CUT_VARS))
    if roll < 0.8:
        return Binder(rng.choice(BINDERS))
    return Wildcard()


def gen_pattern_action(rng: random.Random) -> Action:
    if rng.random() < 0.3:
        args = ANY_ARGS
    else:
        args = tuple(gen_cut_arg(rng) for _ in range(rng.randint(0, 3)))
    return Action(rng.choice(KINDS), args, gen_cut_ref(rng))


def gen_cut(rng: random.Random) -> Cut:
    return Cut(gen_cut_ref(rng), gen_pattern_action(rng), rng.choice(CONTS))


def gen_lev_expr(rng: random.Random, lat: Lattice):
    if rng.random() < 0.6:
        return LevName(rng.choice(PLACEHOLDERS))
    return LevLit(lat.level(rng.choice(lat.level_names)))


def gen_rec(rng: random.Random, lat: Lattice, depth: int):
    if depth <= 0 or rng.random() < 0.4:
        roll = rng.random()
        if roll < 0.2:
            return Const(rng.random() < 0.5)
        if roll < 0.6:
            return Geq(gen_lev_expr(rng, lat), gen_lev_expr(rng, lat))
        if roll < 0.8:
            return Eq(gen_cut_ref(rng), gen_cut_ref(rng))
        return OccursIn(gen_pattern_action(rng), rng.choice(CONTS))
    if rng.random() < 0.2:
        return Not(gen_rec(rng, lat, depth - 1))
    return Bin(rng.choice(_REC_OPS), gen_rec(rng, lat, depth - 1), gen_rec(rng, lat, depth - 1))


def gen_cond(rng: random.Random, depth: int):
    if depth <= 0 or rng.random() < 0.4:
        roll = rng.random()
        if roll < 0.25:
            return Const(rng.random() < 0.5)
        if roll < 0.5:
            return Eq(gen_cut_ref(rng), gen_cut_ref(rng))
        if roll < 0.75:
            return OccursIn(gen_pattern_action(rng), rng.choice(CONTS))
        args = ANY_ARGS if rng.random() < 0.3 else tuple(gen_cut_arg(rng) for _ in range(rng.randint(0, 2)))
        return Present(args, gen_cut_ref(rng))
    if rng.random() < 0.2:
        return Not(gen_cond(rng, depth - 1))
    return Bin(rng.choice(_COND_OPS), gen_cond(rng, depth - 1), gen_cond(rng, depth - 1))


def gen_aspect(rng: random.Random, lat: Lattice, depth: int = 2) -> Aspect:
    return Aspect(gen_rec(rng, lat, depth), gen_cut(rng), gen_cond(rng, depth))


def gen_policy(rng: random.Random, lat: Lattice = LAT, depth: int = 3):
    if depth <= 0 or rng.random() < 0.35:
        if rng.random() < 0.3:
            return Const(rng.random() < 0.5)
        return gen_aspect(rng, lat, min(depth + 1, 2))
    if rng.random() < 0.15:
        return Not(gen_policy(rng, lat, depth - 1))
    return Bin(rng.choice(_FULL_OPS), gen_policy(rng, lat, depth - 1), gen_policy(rng, lat, depth - 1))


def gen_net_action(rng: random.Random, bound: tuple[str, ...]) -> tuple[Action, tuple[str, ...]]:
    kind = rng.choice(KINDS)
    args = []
    new = list(bound)
    for _ in range(rng.randint(0, 2)):
        roll = rng.random()
        if bound and roll < 0.25:
            args.append(Var(rng.choice(bound)))
        elif kind is not ActionKind.OUT and roll < 0.6:
            b = rng.choice(BINDERS)
            args.append(Binder(b))
            new.append(b)
        else:
            args.append(Lit(rng.choice(VALUES)))
    target = Var(rng.choice(bound)) if bound and rng.random() < 0.15 else Lit(rng.choice(LOC_NAMES))
    return Action(kind, tuple(args), target), tuple(new)


def gen_process(rng: random.Random, depth: int = 3, bound: tuple[str, ...] = ()):
    if depth <= 0 or rng.random() < 0.3:
        if rng.random() < 0.75:
            return Nil()
        action, inner = gen_net_action(rng, bound)
        return Choice(((action, Nil()),))
    roll = rng.random()
    if roll < 0.55:
        branches = []
        for _ in range(rng.randint(1, 3)):
            action, inner = gen_net_action(rng, bound)
            branches.append((action, gen_process(rng, depth - 1, inner)))
        return Choice(tuple(branches))
    if roll < 0.8:
        return Parallel(tuple(gen_process(rng, depth - 1, bound) for _ in range(rng.randint(2, 3))))
    return Replicate(gen_process(rng, depth - 1, bound))


def gen_lattice(rng: random.Random) -> Lattice:
    if rng.random() < 0.5:
        n = rng.randint(2, 4)
        return chain(["v%d" % i for i in range(1, n + 1)])
    return Lattice(("base", "left", "right", "peak"),
                   (("base", "left"), ("base", "right"), ("left", "peak"), ("right", "peak")))


def gen_scenario(rng: random.Random) -> Net:
    lat = gen_lattice(rng)
    levels = [lat.level(n) for n in lat.level_names]
    items = []
    for _ in range(rng.randint(1, 4)):
        name = rng.choice(LOC_NAMES)
        state = LocalizedState(*(rng.choice(levels) for _ in range(4)))
        policy = gen_policy(rng, lat, 2)
        if rng.random() < 0.4:
            body = TupleBody(tuple(rng.choice(VALUES) for _ in range(rng.randint(0, 3))))
        else:
            body = gen_process(rng, 2)
        items.append(LocatedItem(name, state, policy, body))
    return Net(with_keys(items), lat)
