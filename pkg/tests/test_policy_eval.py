"""Aspect evaluation against hand-built interactions.

The expectations here were computed on paper from the three-stage rule:
no cut alignment gives the no-opinion value, a false condition gives the
no-opinion value, and only then is the recommendation's four-valued
result returned.
"""

from __future__ import annotations

import pytest

from aspectkb.belnap import Four
from aspectkb.lattice import chain
from aspectkb.parser import parse_policy
from aspectkb.policy_eval import (
    InteractionView,
    LevelBinding,
    PolicyEvalError,
    UnresolvedVariable,
    eval_policy,
)
from aspectkb.syntax import (
    Action,
    ActionKind,
    Binder,
    Choice,
    Const,
    Geq,
    LevName,
    Lit,
    LocalizedState,
    LocatedItem,
    Net,
    Nil,
    TupleBody,
    Var,
    with_keys,
)

LAT = chain(("1", "2", "3"))
L1, L2, L3 = (LAT.level(n) for n in ("1", "2", "3"))
READ, IN, OUT = ActionKind.READ, ActionKind.IN, ActionKind.OUT

DB = LocatedItem("AirlineDB", LocalizedState(L3, L3, L1, L3), Const(True),
                 TupleBody(("threatlevel", "high")))
NET = Net(with_keys([DB]), LAT)


def view(subject="D", action=None, cont=Nil(),
         gS=L3, gC=L2, gO=L2, gHs=L1, gHt=L1, net=NET):
    if action is None:
        action = Action(READ, (Binder("x"),), Lit("B"))
    return InteractionView(subject, action, cont,
                           LevelBinding(gS, gC, gO, gHs, gHt), net)


def pol(text):
    return parse_policy(text, LAT, presets={})


def test_constants():
    assert eval_policy(Const(True), view()) is Four.TT
    assert eval_policy(Const(False), view()) is Four.FF


def test_unmatched_cut_has_no_opinion():
    asp = pol("[ false if s :: out(_*)@t . X : true ]")
    assert eval_policy(asp, view()) is Four.BOT


def test_false_condition_has_no_opinion():
    asp = pol("[ false if s :: read(_*)@t . X : false ]")
    assert eval_policy(asp, view()) is Four.BOT


def test_level_comparison_reads_the_interaction_levels():
    asp = pol("[ Ss >= Ot if s :: read(_*)@t . X : true ]")
    assert eval_policy(asp, view(gS=L3, gO=L2)) is Four.TT
    assert eval_policy(asp, view(gS=L1, gO=L2)) is Four.FF
    assert eval_policy(asp, view(gS=L2, gO=L2)) is Four.TT


def test_all_five_placeholders_resolve():
    iv = view(gS=L3, gC=L2, gO=L1, gHs=L2, gHt=L3)
    for name, expected in (("Ss", L3), ("Cs", L2), ("Ot", L1), ("Hs", L2), ("Ht", L3)):
        asp = pol("[ %s >= 3 if s :: read(_*)@t . X : true ]" % name)
        assert eval_policy(asp, iv) is (Four.TT if expected is L3 else Four.FF)


def test_level_literal_in_recommendation():
    asp = pol("[ 2 >= Cs if s :: read(_*)@t . X : true ]")
    assert eval_policy(asp, view(gC=L2)) is Four.TT
    assert eval_policy(asp, view(gC=L3)) is Four.FF


def test_cut_bindings_feed_equality():
    asp = pol("[ d = 'doc' if s :: out(d)@t . X : true ]")
    out_doc = view(action=Action(OUT, (Lit("doc"),), Lit("A")))
    out_other = view(action=Action(OUT, (Lit("memo"),), Lit("A")))
    assert eval_policy(asp, out_doc) is Four.TT
    assert eval_policy(asp, out_other) is Four.FF


def test_subject_literal_in_cut_is_selective():
    asp = pol("[ false if 'Government' :: read(_*)@t . X : true ]")
    assert eval_policy(asp, view(subject="Government")) is Four.FF
    assert eval_policy(asp, view(subject="TravelAgency")) is Four.BOT


def test_occurrence_check_inspects_the_continuation():
    asp = pol("[ !(out(d)@'PressRelease' occurs-in P) "
              "if s :: read('pass', d)@t . P : true ]")
    leak = Choice(((Action(OUT, (Var("d"),), Lit("PressRelease")), Nil()),))
    clean = Choice(((Action(OUT, (Var("d"),), Lit("Archive")), Nil()),))
    rd = Action(READ, (Lit("pass"), Binder("d")), Lit("AirlineDB"))
    assert eval_policy(asp, view(action=rd, cont=leak)) is Four.FF
    assert eval_policy(asp, view(action=rd, cont=clean)) is Four.TT


def test_occurrence_check_substitutes_cut_bindings_first():
    # d is bound to the binder name used by the read, so the pattern
    # tracks whatever variable the continuation actually mentions
    asp = pol("[ !(out(d)@'PressRelease' occurs-in P) "
              "if s :: read('pass', d)@t . P : true ]")
    rd = Action(READ, (Lit("pass"), Binder("z")), Lit("AirlineDB"))
    leak_z = Choice(((Action(OUT, (Var("z"),), Lit("PressRelease")), Nil()),))
    leak_other = Choice(((Action(OUT, (Var("w"),), Lit("PressRelease")), Nil()),))
    assert eval_policy(asp, view(action=rd, cont=leak_z)) is Four.FF
    assert eval_policy(asp, view(action=rd, cont=leak_other)) is Four.TT


def test_presence_probe_sees_the_net_before_the_step():
    gate = pol("[ false if s :: read(_*)@t . X : test('threatlevel', 'high')@'AirlineDB' ]")
    assert eval_policy(gate, view()) is Four.FF
    quiet = Net(with_keys([
        LocatedItem("AirlineDB", LocalizedState(L3, L3, L1, L3), Const(True),
                    TupleBody(("threatlevel", "low"))),
    ]), LAT)
    assert eval_policy(gate, view(net=quiet)) is Four.BOT


def test_presence_probe_arity_pattern():
    gate = pol("[ false if s :: read(_*)@t . X : test(_*)@'AirlineDB' ]")
    assert eval_policy(gate, view()) is Four.FF
    empty = Net(with_keys([]), LAT)
    assert eval_policy(gate, view(net=empty)) is Four.BOT


def test_four_valued_connectives_compose():
    both = pol("[ Ss >= Ot if s :: read(_*)@t . X : true ] (+) "
               "[ Ot >= Cs if s :: read(_*)@t . X : true ]")
    # first grants, second denies: the join of tt and ff is the clash value
    assert eval_policy(both, view(gS=L3, gO=L2, gC=L3)) is Four.TOP


def test_priority_falls_through_on_no_opinion():
    layered = pol("[ false if 'Government' :: read(_*)@t . X : true ] > "
                  "[ Ss >= Ot if s :: read(_*)@t . X : true ]")
    assert eval_policy(layered, view(subject="Government")) is Four.FF
    assert eval_policy(layered, view(subject="Other", gS=L3, gO=L1)) is Four.TT
    assert eval_policy(layered, view(subject="Other", gS=L1, gO=L3)) is Four.FF


def test_negation_of_an_aspect():
    asp = pol("![ Ss >= Ot if s :: read(_*)@t . X : true ]")
    assert eval_policy(asp, view(gS=L3, gO=L1)) is Four.FF
    # an unmatched negated aspect still has no opinion
    assert eval_policy(asp, view(action=Action(OUT, (Lit("v"),), Lit("A")))) is Four.BOT


def test_unbound_policy_variable_is_an_error():
    asp = pol("[ d = 'doc' if s :: read(_*)@t . X : true ]")
    with pytest.raises(UnresolvedVariable):
        eval_policy(asp, view())


def test_unknown_continuation_name_is_an_error():
    asp = pol("[ out(_*)@'A' occurs-in Q if s :: read(_*)@t . P : true ]")
    with pytest.raises(UnresolvedVariable):
        eval_policy(asp, view(cont=Nil()))


def test_naked_level_comparison_is_rejected_at_top_level():
    with pytest.raises(PolicyEvalError):
        eval_policy(Geq(LevName("Ss"), LevName("Ot")), view())
