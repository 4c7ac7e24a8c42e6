"""Alignment of policy cuts with concrete actions, tuple matching and
substitution.

Both cuts and actions are flattened into token lists of the shape

    [subject, keyword, arg1, ..., argN, target, continuation]

and compared position by position.  Cut variables bind whatever token
they align with (consistently on repetition), wildcards match one token
without binding, and the arity pattern ``_*`` swallows the whole
argument region.  Tuple matching is the run time counterpart: binders
bind tuple components, literals must coincide.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from typing import Optional, Union

from .syntax import (
    ANY_ARGS,
    Action,
    ActionKind,
    AnyArgs,
    Binder,
    Choice,
    Cut,
    Lit,
    Nil,
    Parallel,
    Pattern,
    Process,
    Replicate,
    TupleBody,
    Var,
    Wildcard,
)

# Token tags: ("lit", name) ("var", name) ("binder", name) ("wild",) ("star",)
# ("kw", kind) ("proc", Process) ("cont", name)
Token = tuple


class MatcherError(Exception):
    pass


class OpenVariableInPattern(MatcherError):
    def __init__(self, name: str):
        self.name = name
        super().__init__("variable %r is unbound at matching time" % name)


@dataclass
class Substitution:
    """Bindings produced by a cut (variables to literals or variable names)
    or by tuple matching (binders to data literals)."""

    bindings: dict[str, Union[Lit, Var]] = dc_field(default_factory=dict)
    cont: Optional[Process] = None
    cont_name: Optional[str] = None

    def lookup(self, name: str) -> Optional[Union[Lit, Var]]:
        return self.bindings.get(name)


def _ref_token(ref: Union[Lit, Var, Binder, Wildcard]) -> Token:
    if isinstance(ref, Lit):
        return ("lit", ref.name)
    if isinstance(ref, Var):
        return ("var", ref.name)
    if isinstance(ref, Binder):
        return ("binder", ref.name)
    return ("wild",)


def extract_action(subject: str, action: Action, continuation: Process) -> list[Token]:
    """Flatten a concrete action into its token list."""
    toks: list[Token] = [("lit", subject), ("kw", action.kind.value)]
    assert isinstance(action.args, tuple), "concrete actions have explicit argument lists"
    toks.extend(_ref_token(a) for a in action.args)
    toks.append(_ref_token(action.target))
    toks.append(("proc", continuation))
    return toks


def extract_cut(cut: Cut) -> list[Token]:
    """Flatten a cut into its token list, with ``_*`` kept as one token."""
    toks: list[Token] = [_ref_token(cut.subject), ("kw", cut.action.kind.value)]
    if isinstance(cut.action.args, AnyArgs):
        toks.append(("star",))
    else:
        toks.extend(_ref_token(a) for a in cut.action.args)
    toks.append(_ref_token(cut.action.target))
    toks.append(("cont", cut.cont))
    return toks


def _bind(bindings: dict, name: str, value: Union[Lit, Var]) -> bool:
    old = bindings.get(name)
    if old is None:
        bindings[name] = value
        return True
    return old == value


def _align_one(cut_tok: Token, act_tok: Token, bindings: dict) -> bool:
    tag = cut_tok[0]
    if tag == "kw":
        return act_tok[0] == "kw" and cut_tok[1] == act_tok[1]
    if tag == "wild":
        return act_tok[0] in ("lit", "var", "binder")
    if tag == "lit":
        return act_tok == cut_tok
    if tag == "var":
        if act_tok[0] == "lit":
            return _bind(bindings, cut_tok[1], Lit(act_tok[1]))
        if act_tok[0] in ("var", "binder"):
            # A cut variable aligned with an input binder picks up the bound
            # variable's name, so recommendations can talk about what the
            # trapped action is about to read.
            return _bind(bindings, cut_tok[1], Var(act_tok[1]))
        return False
    if tag == "binder":
        # A binder pattern stands for "an input that binds something";
        # the chosen name is a binding occurrence and does not matter.
        return act_tok[0] == "binder"
    return False


def check(cut_tokens: list[Token], act_tokens: list[Token]) -> Optional[Substitution]:
    """Align a cut's tokens with a concrete action's tokens.

    Returns the resulting substitution, or None when the action is not
    trapped (wrong keyword, wrong arity, literal clash, inconsistent
    repeated variable).
    """
    if len(act_tokens) < 4:
        return None
    bindings: dict[str, Union[Lit, Var]] = {}
    starred = any(t[0] == "star" for t in cut_tokens)
    if starred:
        if len(cut_tokens) != 5:
            return None
        head_pairs = zip(cut_tokens[:2], act_tokens[:2])
        tail_pairs = [(cut_tokens[3], act_tokens[-2])]
        pairs = list(head_pairs) + tail_pairs
    else:
        if len(cut_tokens) != len(act_tokens):
            return None
        pairs = list(zip(cut_tokens[:-1], act_tokens[:-1]))
    for ct, at in pairs:
        if not _align_one(ct, at, bindings):
            return None
    cont_tok = cut_tokens[-1]
    proc_tok = act_tokens[-1]
    assert cont_tok[0] == "cont" and proc_tok[0] == "proc"
    return Substitution(bindings, cont=proc_tok[1], cont_name=cont_tok[1])


def match(patterns: tuple[Pattern, ...], tup: TupleBody) -> Optional[Substitution]:
    """Match in/read argument patterns against a stored tuple.

    Literals must equal the component, binders bind it.  Repeated binders
    must agree.  A plain variable here means an earlier substitution never
    happened, which is an error rather than a mismatch.
    """
    if len(patterns) != len(tup.values):
        return None
    bindings: dict[str, Union[Lit, Var]] = {}
    for pat, value in zip(patterns, tup.values):
        if isinstance(pat, Lit):
            if pat.name != value:
                return None
        elif isinstance(pat, Binder):
            if not _bind(bindings, pat.name, Lit(value)):
                return None
        elif isinstance(pat, Var):
            raise OpenVariableInPattern(pat.name)
        else:
            raise MatcherError("wildcards cannot occur in executable actions")
    return Substitution(bindings)


# ---------------------------------------------------------------------------
# Syntactic occurrence search

def _pattern_matches_action(pat: Action, action: Action) -> bool:
    if pat.kind is not action.kind:
        return False
    assert isinstance(action.args, tuple)
    if isinstance(pat.args, AnyArgs):
        args_ok = True
    elif len(pat.args) != len(action.args):
        return False
    else:
        args_ok = all(_syntactic_match(p, a) for p, a in zip(pat.args, action.args))
    return args_ok and _syntactic_match(pat.target, action.target)


def _syntactic_match(pat: Pattern, tok: Pattern) -> bool:
    # Occurrence search is purely syntactic: variables only meet variables
    # of the same name, literals only the same literal.  Cut bindings have
    # already been substituted into the pattern by the time we run.
    if isinstance(pat, Wildcard):
        return True
    if isinstance(pat, Lit):
        return isinstance(tok, Lit) and pat.name == tok.name
    if isinstance(pat, Var):
        return isinstance(tok, Var) and pat.name == tok.name
    if isinstance(pat, Binder):
        return isinstance(tok, Binder)
    return False


def occurs_in(pat: Action, proc: Process) -> bool:
    """True when some action prefix anywhere in ``proc`` matches ``pat``.

    Every choice branch counts, whether or not it could ever be taken,
    and the search descends under parallel composition and replication.
    """
    if isinstance(proc, Nil):
        return False
    if isinstance(proc, Parallel):
        return any(occurs_in(pat, p) for p in proc.parts)
    if isinstance(proc, Replicate):
        return occurs_in(pat, proc.body)
    for action, cont in proc.branches:
        if _pattern_matches_action(pat, action):
            return True
        if occurs_in(pat, cont):
            return True
    return False


# ---------------------------------------------------------------------------
# Substitution into processes

def _subst_ref(ref, bindings: dict):
    if isinstance(ref, Var):
        repl = bindings.get(ref.name)
        if repl is not None:
            return repl
    return ref


def subst_action(action: Action, bindings: dict) -> Action:
    if isinstance(action.args, AnyArgs):
        args = action.args
    else:
        args = tuple(_subst_ref(a, bindings) for a in action.args)
    return Action(action.kind, args, _subst_ref(action.target, bindings))


def substitute(proc: Process, theta: Substitution) -> Process:
    """Apply a substitution to a process; binders shadow their variable."""
    return _subst(proc, dict(theta.bindings))


def _subst(proc: Process, bindings: dict) -> Process:
    if not bindings or isinstance(proc, Nil):
        return proc
    if isinstance(proc, Parallel):
        return Parallel(tuple(_subst(p, bindings) for p in proc.parts))
    if isinstance(proc, Replicate):
        return Replicate(_subst(proc.body, bindings))
    branches = []
    for action, cont in proc.branches:
        new_action = subst_action(action, bindings)
        inner = bindings
        if isinstance(action.args, tuple):
            shadowed = {a.name for a in action.args if isinstance(a, Binder)}
            if shadowed:
                inner = {k: v for k, v in bindings.items() if k not in shadowed}
        branches.append((new_action, _subst(cont, inner)))
    return Choice(tuple(branches))
