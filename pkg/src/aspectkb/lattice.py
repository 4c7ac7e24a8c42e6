"""Finite join-semilattices of security levels.

A lattice is declared by naming its levels and listing order edges
(``low < high``).  The declared edges are closed reflexively and
transitively; the result must have a unique least upper bound for every
pair and a unique global bottom, otherwise construction fails.  Meets
are never taken anywhere in the toolkit, so their existence is not
validated.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable


class LatticeError(Exception):
    """Base class for lattice construction and usage errors."""


class NotALattice(LatticeError):
    def __init__(self, a: str, b: str, candidates: list[str]):
        self.pair = (a, b)
        self.candidates = candidates
        if candidates:
            what = "no unique least upper bound, minimal upper bounds are %s" % ", ".join(candidates)
        else:
            what = "no upper bound at all"
        super().__init__("levels %r and %r have %s" % (a, b, what))


class NoBottom(LatticeError):
    def __init__(self, minimal: list[str]):
        self.minimal = minimal
        super().__init__("order has no unique global bottom; minimal levels: %s" % ", ".join(minimal))


class CycleInOrder(LatticeError):
    def __init__(self, a: str, b: str):
        super().__init__("levels %r and %r lie on a cycle in the declared order" % (a, b))


class UnknownLevelName(LatticeError):
    def __init__(self, name: str):
        self.name = name
        super().__init__("unknown level name %r" % name)


class ForeignLevel(LatticeError):
    def __init__(self, name: str):
        self.name = name
        super().__init__("level %r does not belong to this lattice" % name)


@dataclass(frozen=True)
class Level:
    """A named security level.  Identity is the name; order lives in the lattice."""

    name: str

    def __repr__(self) -> str:
        return "Level(%s)" % self.name


class Lattice:
    """An immutable join-semilattice over a finite set of named levels."""

    def __init__(self, levels: Iterable[str], edges: Iterable[tuple[str, str]]):
        names = list(levels)
        if len(set(names)) != len(names):
            dup = sorted({n for n in names if names.count(n) > 1})
            raise UnknownLevelName("duplicate level declaration: %s" % ", ".join(dup))
        self._names: tuple[str, ...] = tuple(names)
        self._levels = {n: Level(n) for n in names}
        for lo, hi in edges:
            if lo not in self._levels:
                raise UnknownLevelName(lo)
            if hi not in self._levels:
                raise UnknownLevelName(hi)

        # Reflexive-transitive closure of the declared edges.
        reach: dict[str, set[str]] = {n: {n} for n in names}
        adj: dict[str, set[str]] = {n: set() for n in names}
        for lo, hi in edges:
            adj[lo].add(hi)
        for n in names:
            stack = list(adj[n])
            while stack:
                m = stack.pop()
                if m not in reach[n]:
                    reach[n].add(m)
                    stack.extend(adj[m])
        for a in names:
            for b in reach[a]:
                if a != b and a in reach[b]:
                    raise CycleInOrder(a, b)
        self._up = {n: frozenset(reach[n]) for n in names}
        self._leq = frozenset((a, b) for a in names for b in reach[a])

        minimal = [n for n in names if not any(n in reach[m] and m != n for m in names)]
        if len(minimal) != 1:
            raise NoBottom(sorted(minimal))
        self._bottom = self._levels[minimal[0]]

        # Joins by enumeration of minimal upper bounds; uniqueness is required.
        self._join: dict[tuple[str, str], Level] = {}
        for a in names:
            for b in names:
                ubs = [c for c in names if c in reach[a] and c in reach[b]]
                minimal_ubs = [c for c in ubs if not any(d != c and c in reach[d] for d in ubs)]
                if len(minimal_ubs) != 1:
                    raise NotALattice(a, b, sorted(minimal_ubs))
                self._join[(a, b)] = self._levels[minimal_ubs[0]]

    @property
    def bottom(self) -> Level:
        return self._bottom

    @property
    def level_names(self) -> tuple[str, ...]:
        return self._names

    def level(self, name: str) -> Level:
        try:
            return self._levels[name]
        except KeyError:
            raise UnknownLevelName(name) from None

    def __contains__(self, lv: Level) -> bool:
        return isinstance(lv, Level) and lv.name in self._levels

    def _check(self, lv: Level) -> None:
        if lv.name not in self._levels:
            raise ForeignLevel(lv.name)

    def leq(self, a: Level, b: Level) -> bool:
        self._check(a)
        self._check(b)
        return (a.name, b.name) in self._leq

    def join(self, a: Level, b: Level) -> Level:
        self._check(a)
        self._check(b)
        return self._join[(a.name, b.name)]

    def join_all(self, levels: Iterable[Level]) -> Level:
        """Least upper bound of a finite collection; the empty join is bottom."""
        acc = self._bottom
        for lv in levels:
            acc = self.join(acc, lv)
        return acc

    def rank(self, lv: Level) -> int:
        """Length of the longest chain strictly below ``lv`` (for plotting)."""
        self._check(lv)
        below = [n for n in self._names if n != lv.name and lv.name in self._up[n]]
        if not below:
            return 0
        return 1 + max(self.rank(self._levels[n]) for n in below)


def chain(names: Iterable[str]) -> Lattice:
    """Totally ordered lattice, lowest name first."""
    ns = list(names)
    return Lattice(ns, [(ns[i], ns[i + 1]) for i in range(len(ns) - 1)])
