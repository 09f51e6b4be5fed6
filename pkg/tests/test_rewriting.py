import random

import pytest

from strew.errors import InstantiationError, NonTerminationError
from strew.matching import match_root
from strew.module import ConditionFragment
from strew.parser import parse_term
from strew.printer import print_term
from strew.rewriting import (RewriteCounter, apply_all, apply_rule,
                             check_condition, normalize)
from strew.terms import Subst, Var


def t(mod, text):
    return parse_term(text, mod)


def test_length(llist):
    assert print_term(normalize(llist, t(llist, 'length(a b c)'))) == '3'
    assert print_term(normalize(llist, t(llist, 'length(nil)'))) == '0'


def test_eval_strategy_restricts_tail(lazy):
    result = normalize(lazy, t(lazy, 'take(3, natsFrom(0))'))
    assert print_term(result) == '0 : take(2, natsFrom(0 + 1))'


def test_unrestricted_lazy_list_diverges(lazy_rls, lazy):
    # Without the evaluation strategy the equations run forever; the step
    # budget turns that into an error.  Build the term in the restricted
    # module and reduce it against a module lacking the strat annotation.
    text = 'take(1, natsFrom(0))'
    from strew.terms import OpDecl, Signature
    sig = Signature()
    for s in lazy.signature.sorts:
        sig.add_sort(s)
    for pair in sorted(lazy.signature.subsort_pairs):
        sig.add_subsort(*pair)
    for d in lazy.signature.ops:
        sig.add_op(OpDecl(d.name, d.arg_sorts, d.result_sort, d.ctor, d.assoc,
                          d.comm, d.identity, d.frozen_args, None, d.partial))
    sig.finalize()
    eager = lazy.copy_shell(name='EAGER', signature=sig)
    for eq in lazy.equations:
        eager.add_equation(eq)
    with pytest.raises(NonTerminationError):
        normalize(eager, t(lazy, text), RewriteCounter(5000))


def test_owise(ttt):
    assert print_term(normalize(ttt, t(ttt, 'hasHRow(X, empty)'))) == 'false'
    grid = t(ttt, '[1, 1, X] [2, 1, X] [1, 2, O]')
    assert print_term(normalize(ttt, ttt.signature.make_app(
        'hasHRow', [t(ttt, 'X'), grid]))) == 'false'
    row = t(ttt, '[1, 1, X] [2, 1, X] [3, 1, X] [1, 2, O]')
    assert print_term(normalize(ttt, ttt.signature.make_app(
        'hasHRow', [t(ttt, 'X'), row]))) == 'true'


def test_short_circuit_disjunction(ttt):
    row = t(ttt, '[1, 1, O] [2, 1, O] [3, 1, O]')
    assert print_term(normalize(ttt, ttt.signature.make_app(
        'hasWon', [t(ttt, 'O'), row]))) == 'true'


def test_normal_form_is_fixpoint(llist, ttt):
    rng = random.Random(3)
    for _ in range(100):
        words = [rng.choice('abc') for _ in range(rng.randint(1, 5))]
        term = llist.signature.make_app('length', [t(llist, ' '.join(words))])
        nf = normalize(llist, term)
        assert normalize(llist, nf) == nf


def test_normal_form_irreducible(llist):
    nf = normalize(llist, t(llist, 'length(a b c)'))
    plain, owise = llist.eqs_for_op(nf.op) if not nf.is_var() else ((), ())
    for eq in list(plain) + list(owise):
        assert not match_root(llist.signature, eq.lhs, nf)


def test_position_order_hook(llist, ttt, lazy):
    cases = [
        (llist, 'length(a b c d)'),
        (ttt, 'winningPos(X, [1, 1, X] [2, 1, X] [3, 1, -] [2, 2, O])'),
        (lazy, 'take(2, natsFrom(3))'),
    ]
    for mod, text in cases:
        term = t(mod, text)
        assert normalize(mod, term, order='lr') == normalize(mod, term, order='rl')


def test_check_condition_equality(llist):
    eq = ConditionFragment.equality(t(llist, 'length(a b)'), t(llist, '2'))
    assert check_condition(llist, [eq], Subst.EMPTY)
    bad = ConditionFragment.equality(t(llist, '0'), t(llist, '1'))
    assert check_condition(llist, [bad], Subst.EMPTY) == []
    assert check_condition(llist, [], Subst.EMPTY) == [Subst.EMPTY]


def test_check_condition_assignment_branches(ttt):
    # Two winning cells for O: the assignment fragment extends the
    # substitution in two ways
    grid = t(ttt, '[1, 1, O] [2, 1, O] [3, 1, -] [1, 2, O] [1, 3, -] [2, 2, -]')
    frag = ConditionFragment.assignment(
        t(ttt, '[I, J, -] R'),
        ttt.signature.make_app('winningPos', [t(ttt, 'O'), grid]))
    out = check_condition(ttt, [frag], Subst.EMPTY)
    cells = {(print_term(s.get(Var('I', 'Nat'))), print_term(s.get(Var('J', 'Nat'))))
             for s in out}
    assert cells == {('3', '1'), ('1', '3')}


def test_apply_rule_anywhere_dedup(llist):
    pop = llist.rules_for_label('pop')[0]
    out = apply_rule(llist, t(llist, 'a b c'), pop)
    assert [print_term(u) for u in out] == ['b c', 'a c', 'a b']


def test_apply_rule_top_with_init(llist):
    put = llist.rules_for_label('put')[0]
    init = Subst({Var('L', 'Letter'): t(llist, 'd')})
    out = apply_rule(llist, t(llist, 'a b'), put, init, top=True)
    assert [print_term(u) for u in out] == ['a b d']


def test_nonexec_underinstantiated(llist):
    put = llist.rules_for_label('put')[0]
    with pytest.raises(InstantiationError):
        apply_rule(llist, t(llist, 'a b'), put, top=True)


def test_apply_all(llist, foo):
    assert {print_term(u) for u in apply_all(llist, t(llist, 'a b c'))} == \
        {'a b', 'a c', 'b c'}
    assert {print_term(u) for u in apply_all(foo, t(foo, 'f(a, b)'))} == \
        {'f(b, a)', 'f(b, b)'}
    assert apply_all(foo, t(foo, 'b')) == []


def test_apply_all_excludes_nonexec(llist):
    # put is nonexec: only pop contributes
    out = apply_all(llist, t(llist, 'a b'))
    assert {print_term(u) for u in out} == {'a', 'b'}


def test_frozen_blocks_rule_positions(lazy_rls):
    term = t(lazy_rls, 'take(2, 0 : natsFrom(1))')
    out = apply_all(lazy_rls, term)
    # natsFrom sits under the frozen tail of the list constructor: only the
    # take rule fires
    assert {print_term(u) for u in out} == {'0 : take(1, natsFrom(1))'}
