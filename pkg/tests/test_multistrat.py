import math

import pytest

from strew.engine import srewrite
from strew.errors import StrewError
from strew.multistrat import (Freec, FreecBounded, MultiEngine, Turns,
                              ms_step, ms_successors, run_global)
from strew.parser import ExprParser, Tokens, parse_strategy, parse_term, tokenize
from strew.printer import print_term
from strew.rewriting import normalize


def t(mod, text):
    return parse_term(text, mod)


def s(mod, text):
    return parse_strategy(text, mod)


def gamma(mod, text):
    return ExprParser(Tokens(tokenize(text)), mod).parse_gamma()


def printed(terms):
    return [print_term(u) for u in terms]


def test_turns_single_interleaving(llist):
    out = run_global(t(llist, 'nil'), [s(llist, 'seq(a b)'), s(llist, 'seq(c d)')],
                     Turns(), llist)
    assert printed(out) == ['a c b d']


def test_concurrent_six_interleavings(llist):
    out = run_global(t(llist, 'nil'), [s(llist, 'seq(a b)'), s(llist, 'seq(c d)')],
                     Freec(), llist)
    assert sorted(printed(out)) == ['a b c d', 'a c b d', 'a c d b',
                                    'c a b d', 'c a d b', 'c d a b']


def test_bounded_zero_is_identity(llist):
    out = run_global(t(llist, 'a'), [s(llist, 'seq(b c)'), s(llist, 'seq(d)')],
                     FreecBounded(0), llist)
    assert printed(out) == ['a']


def test_bounded_counts_steps(llist):
    out = run_global(t(llist, 'nil'), [s(llist, 'seq(a b)'), s(llist, 'seq(c d)')],
                     FreecBounded(2), llist)
    assert sorted(printed(out)) == ['a b', 'a c', 'c a', 'c d']


def test_ms_step_unfolds_one_atomic_move(llist):
    me = MultiEngine(llist)
    ctx = me.initial_context(t(llist, 'nil'),
                             [s(llist, 'seq(a b)'), s(llist, 'seq(c d)')])
    succ = me.step(ctx, 0)
    assert len(succ) == 1
    label, nxt = succ[0]
    assert label == 'put'
    assert print_term(nxt.subject) == 'a'
    assert nxt.threads[1] == ctx.threads[1]
    assert ms_step(ctx, 1, llist)[0].subject == t(llist, 'c')


def test_exhausted_thread_has_no_step(llist):
    me = MultiEngine(llist)
    ctx = me.initial_context(t(llist, 'a'), [s(llist, 'idle'), s(llist, 'seq(b)')])
    assert me.step(ctx, 0) == []
    assert len(me.step(ctx, 1)) == 1


def test_choice_branches_both_ways(llist):
    me = MultiEngine(llist)
    ctx = me.initial_context(t(llist, 'nil'),
                             [s(llist, 'seq(a) | seq(b)')])
    succs = me.step(ctx, 0)
    assert {print_term(c.subject) for _, c in succs} == {'a', 'b'}


def test_invalid_thread_id(llist):
    me = MultiEngine(llist)
    ctx = me.initial_context(t(llist, 'nil'), [s(llist, 'idle')])
    with pytest.raises(StrewError):
        me.step(ctx, 3)


def test_subjects_shared_by_all_threads(llist):
    me = MultiEngine(llist)
    ctx = me.initial_context(t(llist, 'nil'),
                             [s(llist, 'seq(a b)'), s(llist, 'seq(c d)')])
    frontier = [ctx]
    seen = set()
    for _ in range(100):
        if not frontier:
            break
        current = frontier.pop()
        for n in range(len(current.threads)):
            for _, nxt in me.step(current, n):
                # the context construction keeps one subject for the context
                assert isinstance(nxt.subject, type(ctx.subject))
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)


def test_atomicity_subject_changes_once(llist, foo):
    # Across one atomic step the subject changes by exactly one atomic
    # strategy evaluation of the stepped thread; other threads are untouched
    me = MultiEngine(llist)
    ctx = me.initial_context(t(llist, 'nil'),
                             [s(llist, 'seq(a b)'), s(llist, 'seq(c d)')])
    for n in (0, 1):
        for _, nxt in me.step(ctx, n):
            other = 1 - n
            assert nxt.threads[other] == ctx.threads[other]


def test_interleaving_count_multinomial(llist):
    # Three threads of straight-line appends over distinct letters: the
    # number of distinct results is the multinomial coefficient
    strats = [s(llist, 'seq(a b)'), s(llist, 'seq(c d)'), s(llist, 'seq(e)')]
    out = run_global(t(llist, 'nil'), strats, Freec(), llist)
    expected = math.factorial(5) // (math.factorial(2) * math.factorial(2))
    assert len(out) == expected


def test_turns_single_thread_equals_srewrite(llist):
    strat = s(llist, 'seq(a b c)')
    direct = set(srewrite(t(llist, 'nil'), strat, llist))
    via_turns = set(run_global(t(llist, 'nil'), [strat], Turns(), llist))
    assert direct == via_turns


def test_ms_successors_labels(llist):
    ctx = MultiEngine(llist).initial_context(
        t(llist, 'nil'), [s(llist, 'seq(a)'), s(llist, 'seq(b)')])
    succs = ms_successors(ctx, Turns(), llist)
    assert [label for label, _ in succs] == [(0, 'put')]
    free = ms_successors(ctx, Freec(), llist)
    assert {label for label, _ in free} == {(0, 'put'), (1, 'put')}


def test_custom_step_sequence(llist):
    strats = [s(llist, 'seq(a b)'), s(llist, 'seq(c d)')]
    out = run_global(t(llist, 'nil'), strats,
                     gamma(llist, 'custom step(0) ; step(1) ; step(0) ; step(1)'),
                     llist)
    assert printed(out) == ['a c b d']


def test_custom_turns_and_freec_primitives(llist):
    strats = [s(llist, 'seq(a b)'), s(llist, 'seq(c d)')]
    assert printed(run_global(t(llist, 'nil'), strats,
                              gamma(llist, 'custom turns'), llist)) == ['a c b d']
    assert len(run_global(t(llist, 'nil'), strats,
                          gamma(llist, 'custom freec'), llist)) == 6
    assert printed(run_global(t(llist, 'nil'), strats,
                              gamma(llist, 'custom freec(2)'), llist)) == \
        printed(run_global(t(llist, 'nil'), strats, FreecBounded(2), llist))


def test_custom_star_and_cond(llist):
    strats = [s(llist, 'seq(a b)'), s(llist, 'seq(c d)')]
    # any number of steps of thread 0 only
    out = run_global(t(llist, 'nil'), strats, gamma(llist, 'custom step(0) *'),
                     llist)
    assert sorted(printed(out)) == ['a', 'a b', 'nil']
    # step thread 1 if possible, otherwise stay
    out2 = run_global(t(llist, 'nil'), strats,
                      gamma(llist, 'custom step(1) ? idle : fail'), llist)
    assert printed(out2) == ['c']


def test_tictactoe_first_moves(ttt, ttt_engine):
    me = MultiEngine(ttt, ttt_engine)
    initial = normalize(ttt, t(ttt, 'initial'))
    ctx = me.initial_context(initial, [s(ttt, 'perfectX'), s(ttt, 'randomO')])
    succs = me.step(ctx, 0)
    assert len(succs) == 1
    label, nxt = succs[0]
    assert label == 'perfect-step'
    assert '[2, 2, X]' in print_term(nxt.subject)
    replies = me.step(nxt, 1)
    assert len(replies) == 8
    assert {label for label, _ in replies} == {'putO'}
