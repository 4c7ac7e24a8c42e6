"""Four-valued evaluation of policies against a trapped interaction.

An aspect is evaluated in three stages, in this order: the cut is
aligned with the concrete action (no alignment means no opinion, BOT),
then the applicability condition is decided (false also means BOT), and
only then is the recommendation computed.  The recommendation sees the
cut's bindings and five concrete levels: the subject's clearance,
current level and history, and the target's classification and history.
"""

from __future__ import annotations

from dataclasses import dataclass

from . import belnap
from .belnap import BOT, FF, TT, Four
from .lattice import Level
from .matcher import Substitution, check, extract_action, extract_cut, occurs_in, subst_action
from .syntax import (
    Action,
    AnyArgs,
    Aspect,
    Bin,
    Binder,
    Const,
    Eq,
    Geq,
    LevLit,
    LevName,
    Lit,
    Net,
    Not,
    OccursIn,
    Policy,
    PolicyOp,
    Present,
    Process,
    TupleBody,
    Var,
    Wildcard,
)


class PolicyEvalError(Exception):
    pass


class UnresolvedVariable(PolicyEvalError):
    def __init__(self, name: str):
        self.name = name
        super().__init__("policy references variable %r, which the cut did not bind" % name)


@dataclass(frozen=True)
class LevelBinding:
    """Concrete levels substituted for the placeholders Ss, Cs, Ot, Hs, Ht."""

    gS: Level
    gC: Level
    gO: Level
    gHs: Level
    gHt: Level

    def resolve(self, which: str) -> Level:
        return {"Ss": self.gS, "Cs": self.gC, "Ot": self.gO, "Hs": self.gHs, "Ht": self.gHt}[which]


@dataclass(frozen=True)
class InteractionView:
    """Everything a policy may inspect about one candidate interaction.

    ``net`` is the net as it stands before the interaction fires, so
    presence tests cannot see the interaction's own effects.
    """

    subject: str
    action: Action
    continuation: Process
    levels: LevelBinding
    net: Net


_BINOPS = {
    PolicyOp.AND: belnap.band,
    PolicyOp.OR: belnap.bor,
    PolicyOp.OPLUS: belnap.oplus,
    PolicyOp.OTIMES: belnap.otimes,
    PolicyOp.IMPLIES: belnap.implies,
    PolicyOp.PRIOR: belnap.priority,
}


def eval_policy(pol: Policy, iv: InteractionView) -> Four:
    if isinstance(pol, Const):
        return TT if pol.value else FF
    if isinstance(pol, Not):
        return belnap.bnot(eval_policy(pol.operand, iv))
    if isinstance(pol, Bin):
        return _BINOPS[pol.op](eval_policy(pol.left, iv), eval_policy(pol.right, iv))
    if isinstance(pol, Aspect):
        return eval_aspect(pol, iv)
    raise PolicyEvalError("%r cannot appear at policy top level" % type(pol).__name__)


def eval_aspect(asp: Aspect, iv: InteractionView) -> Four:
    theta = check(extract_cut(asp.cut), extract_action(iv.subject, iv.action, iv.continuation))
    if theta is None:
        return BOT
    if not eval_cond(asp.cond, iv, theta):
        return BOT
    return eval_rec(asp.rec, iv, theta)


def _resolve_ref(ref, theta: Substitution):
    if isinstance(ref, Var):
        bound = theta.lookup(ref.name)
        if bound is None:
            raise UnresolvedVariable(ref.name)
        return bound
    return ref


def _resolve_lit(ref, theta: Substitution) -> str:
    ref = _resolve_ref(ref, theta)
    if isinstance(ref, Var):
        # The cut bound this variable to another variable (an input binder's
        # name); it has no literal value to compare.
        raise UnresolvedVariable(ref.name)
    return ref.name


def _continuation(name: str, theta: Substitution) -> Process:
    if name != theta.cont_name or theta.cont is None:
        raise UnresolvedVariable(name)
    return theta.cont


def eval_rec(rec: Policy, iv: InteractionView, theta: Substitution) -> Four:
    if isinstance(rec, Const):
        return TT if rec.value else FF
    if isinstance(rec, Not):
        return belnap.bnot(eval_rec(rec.operand, iv, theta))
    if isinstance(rec, Bin):
        return _BINOPS[rec.op](eval_rec(rec.left, iv, theta), eval_rec(rec.right, iv, theta))
    if isinstance(rec, Geq):
        return TT if iv.net.lattice.leq(_lev(rec.right, iv), _lev(rec.left, iv)) else FF
    if isinstance(rec, Eq):
        return TT if _resolve_lit(rec.left, theta) == _resolve_lit(rec.right, theta) else FF
    if isinstance(rec, OccursIn):
        pat = subst_action(rec.pat, theta.bindings)
        return TT if occurs_in(pat, _continuation(rec.cont, theta)) else FF
    raise PolicyEvalError("%r cannot appear in a recommendation" % type(rec).__name__)


def _lev(expr, iv: InteractionView) -> Level:
    if isinstance(expr, LevName):
        return iv.levels.resolve(expr.which)
    assert isinstance(expr, LevLit)
    return expr.level


def eval_cond(cond: Policy, iv: InteractionView, theta: Substitution) -> bool:
    if isinstance(cond, Const):
        return cond.value
    if isinstance(cond, Not):
        return not eval_cond(cond.operand, iv, theta)
    if isinstance(cond, Bin):
        if cond.op is PolicyOp.AND:
            return eval_cond(cond.left, iv, theta) and eval_cond(cond.right, iv, theta)
        if cond.op is PolicyOp.OR:
            return eval_cond(cond.left, iv, theta) or eval_cond(cond.right, iv, theta)
        raise PolicyEvalError("conditions only combine with /\\ and \\/")
    if isinstance(cond, Eq):
        return _resolve_lit(cond.left, theta) == _resolve_lit(cond.right, theta)
    if isinstance(cond, OccursIn):
        pat = subst_action(cond.pat, theta.bindings)
        return occurs_in(pat, _continuation(cond.cont, theta))
    if isinstance(cond, Present):
        return _present(cond, iv, theta)
    raise PolicyEvalError("%r cannot appear in a condition" % type(cond).__name__)


def _present(cond: Present, iv: InteractionView, theta: Substitution) -> bool:
    target = _resolve_lit(cond.target, theta)
    args = cond.args
    if isinstance(args, tuple):
        args = tuple(_resolve_ref(a, theta) if isinstance(a, Var) else a for a in args)
    for item in iv.net.items:
        if item.name != target or not isinstance(item.body, TupleBody):
            continue
        if _tuple_matches(args, item.body):
            return True
    return False


def _tuple_matches(args, tup: TupleBody) -> bool:
    if isinstance(args, AnyArgs):
        return True
    if len(args) != len(tup.values):
        return False
    for pat, value in zip(args, tup.values):
        if isinstance(pat, Lit):
            if pat.name != value:
                return False
        elif isinstance(pat, (Wildcard, Binder)):
            continue
        else:
            raise UnresolvedVariable(pat.name)
    return True
