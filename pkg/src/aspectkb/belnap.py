"""Four-valued policy logic.

Policies evaluate to one of four values: BOT (no opinion), TT (grant),
FF (deny), TOP (conflicting opinions).  The four values carry two
partial orders:

  knowledge:  BOT below TT and FF, both below TOP; TT and FF incomparable.
  truth:      FF below BOT and TOP, both below TT; BOT and TOP incomparable.

Conjunction and disjunction are meet and join in the truth order,
combine (``(+)``) and consensus (``(x)``) are join and meet in the
knowledge order.  All four operator tables are computed from the two
orders below rather than written out by hand.
"""

from __future__ import annotations

from enum import Enum


class Four(Enum):
    BOT = "bot"
    TT = "tt"
    FF = "ff"
    TOP = "top"

    def __repr__(self) -> str:
        return self.value


BOT, TT, FF, TOP = Four.BOT, Four.TT, Four.FF, Four.TOP

_VALUES = (BOT, TT, FF, TOP)

# The two orders, given as their covering edges and closed below.
_K_EDGES = ((BOT, TT), (BOT, FF), (TT, TOP), (FF, TOP))
_T_EDGES = ((FF, BOT), (FF, TOP), (BOT, TT), (TOP, TT))


def _closure(edges: tuple[tuple[Four, Four], ...]) -> frozenset[tuple[Four, Four]]:
    rel = {(v, v) for v in _VALUES}
    rel.update(edges)
    changed = True
    while changed:
        changed = False
        for a, b in list(rel):
            for c, d in list(rel):
                if b is c and (a, d) not in rel:
                    rel.add((a, d))
                    changed = True
    return frozenset(rel)


_K = _closure(_K_EDGES)
_T = _closure(_T_EDGES)


def leq_k(a: Four, b: Four) -> bool:
    return (a, b) in _K


def leq_t(a: Four, b: Four) -> bool:
    return (a, b) in _T


def _lub(rel: frozenset[tuple[Four, Four]], a: Four, b: Four) -> Four:
    ubs = [c for c in _VALUES if (a, c) in rel and (b, c) in rel]
    least = [c for c in ubs if all((c, d) in rel for d in ubs)]
    assert len(least) == 1, (a, b, least)
    return least[0]


def _glb(rel: frozenset[tuple[Four, Four]], a: Four, b: Four) -> Four:
    lbs = [c for c in _VALUES if (c, a) in rel and (c, b) in rel]
    greatest = [c for c in lbs if all((d, c) in rel for d in lbs)]
    assert len(greatest) == 1, (a, b, greatest)
    return greatest[0]


_AND = {(a, b): _glb(_T, a, b) for a in _VALUES for b in _VALUES}
_OR = {(a, b): _lub(_T, a, b) for a in _VALUES for b in _VALUES}
_OTIMES = {(a, b): _glb(_K, a, b) for a in _VALUES for b in _VALUES}
_OPLUS = {(a, b): _lub(_K, a, b) for a in _VALUES for b in _VALUES}


def band(a: Four, b: Four) -> Four:
    return _AND[(a, b)]


def bor(a: Four, b: Four) -> Four:
    return _OR[(a, b)]


def otimes(a: Four, b: Four) -> Four:
    return _OTIMES[(a, b)]


def oplus(a: Four, b: Four) -> Four:
    return _OPLUS[(a, b)]


def bnot(a: Four) -> Four:
    # Swaps the classical values, fixes the non-classical ones.
    if a is TT:
        return FF
    if a is FF:
        return TT
    return a


def implies(a: Four, b: Four) -> Four:
    # The consequent matters only when the antecedent is at most true
    # in the knowledge order; otherwise the implication holds vacuously.
    return b if leq_k(a, TT) else TT


def priority(a: Four, b: Four) -> Four:
    # First opinion wins unless it has nothing to say.
    return b if a is BOT else a


def grant(a: Four) -> bool:
    """An interaction proceeds when the policy value is at most true
    in the knowledge order, so on BOT and TT."""
    return leq_k(a, TT)


def parse_four(text: str) -> Four:
    return Four(text)
