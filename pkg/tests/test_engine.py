import random
from collections import deque

from strew import strategy as st
from strew.engine import CONTROL, SYSTEM, Engine, State, atomic_successors, run, srewrite
from strew.parser import parse_strategy, parse_term
from strew.printer import print_term
from strew.rewriting import apply_all, normalize
from strew.strategy import desugar
from strew.terms import Subst


def t(mod, text):
    return parse_term(text, mod)


def s(mod, text):
    return parse_strategy(text, mod)


def sols(mod, term_text, strat_text, depth_first=False):
    out = srewrite(t(mod, term_text), s(mod, strat_text), mod,
                   depth_first=depth_first)
    return {print_term(u) for u in out}


def test_paper_session(llist):
    assert sols(llist, 'a b c', 'top(pop) ; top(put[L <- d])') == {'a b d'}


def test_seq_strategy_unfolds(llist):
    assert sols(llist, 'nil', 'seq(a b)') == {'a b'}
    assert sols(llist, 'a', 'seq(b c d)') == {'a b c d'}


def test_idle_fail(llist):
    assert sols(llist, 'a b', 'idle') == {'a b'}
    assert sols(llist, 'a b', 'fail') == set()


def test_desugar():
    pop = st.Apply('pop', (), False)
    assert desugar(st.Try(pop)) == st.Cond(pop, st.IDLE, st.IDLE)
    assert desugar(st.Not(pop)) == st.Cond(pop, st.FAIL, st.IDLE)
    assert desugar(st.Test(pop)) == st.Cond(
        st.Cond(pop, st.FAIL, st.IDLE), st.FAIL, st.IDLE)
    assert desugar(st.OrElse(pop, st.IDLE)) == st.Cond(pop, st.IDLE, st.IDLE)


def test_star_and_bang(llist):
    assert sols(llist, 'a b', 'pop *') == {'a b', 'a', 'b', 'nil'}
    assert sols(llist, 'a b', 'pop !') == {'nil'}


def test_conditional(llist):
    assert sols(llist, 'a b', 'pop ? idle : put[L <- e]') == {'a', 'b'}
    assert sols(llist, 'nil', 'pop ? idle : top(put[L <- e])') == {'e'}


def test_one_picks_single_solution(llist):
    out = sols(llist, 'a b c', 'one(pop)')
    assert len(out) == 1
    assert out <= {'a b', 'a c', 'b c'}


def test_match_tests(llist, ttt):
    assert sols(llist, 'a b', 'match LS L') == {'a b'}
    assert sols(llist, 'nil', 'match L LS') == set()
    assert sols(ttt, '[1, 1, X] [2, 2, O]', 'amatch [2, 2, O]') == \
        {'[1, 1, X] [2, 2, O]'}
    assert sols(llist, 'a b', 'match LS s.t. length(LS) >= 3') == set()
    assert sols(llist, 'a b c', 'match LS s.t. length(LS) >= 3') == {'a b c'}


def test_matchrew_parallel_slots(foo):
    out = sols(foo, 'f(a, a)', 'matchrew f(X, Y) by X using next, Y using next')
    assert out == {'f(b, b)'}
    out2 = sols(foo, 'f(a, a)', 'matchrew f(X, Y) by X using try(next), Y using idle')
    assert out2 == {'f(b, a)'}


def test_matchrew_condition_binds_slot_env(ttt):
    grid = '[1, 1, O] [2, 1, O] [3, 1, -] [2, 2, -]'
    out = sols(ttt, grid,
               'matchrew G s.t. [I, J, -] R := winningPos(O, G) '
               'by G using putO[I <- I, J <- J]')
    assert out == {'[1, 1, O] [2, 1, O] [2, 2, -] [3, 1, O]'}


def test_amatchrew_rewrites_inside(foo):
    out = sols(foo, 'f(f(a, b), b)', 'amatchrew f(X, Y) s.t. Y = b by X using next')
    # Both f-nodes have second argument b; only positions whose X holds an
    # a-redex contribute
    assert out == {'f(f(b, b), b)'}


def test_call_with_condition(registry):
    # Conditional strategy definitions run only when their condition holds
    text = '''smod COND-TEST is
  protecting LLIST-M .
  var LS : List .
  strat shrink : List @ List .
  csd shrink(LS) := pop if length(LS) >= s 0 .
endsm'''
    from strew.parser import parse_module_text
    mods = parse_module_text(text, dict(registry))
    mod = mods[0]
    assert sols(mod, 'a b', 'shrink(c d)') == {'a', 'b'}
    assert sols(mod, 'a b', 'shrink(nil)') == set()


def test_call_selects_matching_definitions(ttt, ttt_engine):
    out = list(ttt_engine.rewrite(t(ttt, '[2, 2, -] [1, 1, X]'),
                                  s(ttt, 'put(O, 2, 2)')))
    assert [print_term(u) for u in out] == ['[1, 1, X] [2, 2, O]']
    assert not list(ttt_engine.rewrite(t(ttt, '[2, 2, X] [1, 1, -]'),
                                       s(ttt, 'put(O, 2, 2)')))


def test_search_orders_agree_on_sets(llist, foo):
    cases = [
        (llist, 'a b c', 'pop *'),
        (llist, 'nil', 'seq(a b) | seq(b a)'),
        (foo, 'f(a, b)', '(swap | next) *'),
        (foo, 'f(f(a, b), a)', 'all ; all'),
    ]
    for mod, term, strat in cases:
        assert sols(mod, term, strat) == sols(mod, term, strat, depth_first=True)


# ----------------------------------------------------------------------
# Algebraic laws on randomized strategies

def random_core_strategy(rng, depth):
    leaves = ['pop', 'idle', 'fail', 'all', 'match LS L', 'match L LS',
              'top(pop)', 'put[L <- a]', 'amatch b']
    if depth == 0:
        return rng.choice(leaves)
    a = random_core_strategy(rng, depth - 1)
    b = random_core_strategy(rng, depth - 1)
    return rng.choice([
        f'({a}) ; ({b})', f'({a}) | ({b})', f'({a}) ? ({b}) : idle',
        f'({a}) *', f'({a}) !', f'one({a})', f'try({a})', f'not({a})',
    ])


def random_subject(rng, mod):
    words = [rng.choice('abc') for _ in range(rng.randint(0, 4))]
    return t(mod, ' '.join(words) if words else 'nil')


def bounded_sols(mod, term, strat_text):
    """Solution set under a small state budget; None when the instance is
    too big (strategies with put under iteration grow without bound)."""
    from strew.errors import NonTerminationError, SearchLimitError
    engine = Engine(mod, state_limit=1200, step_limit=12000)
    try:
        return set(engine.rewrite(term, s(mod, strat_text)))
    except (SearchLimitError, NonTerminationError):
        return None


def test_choice_law(llist):
    rng = random.Random(41)
    for _ in range(120):
        a = random_core_strategy(rng, rng.randint(0, 2))
        b = random_core_strategy(rng, rng.randint(0, 2))
        u = random_subject(rng, llist)
        parts = [bounded_sols(llist, u, f'({a}) | ({b})'),
                 bounded_sols(llist, u, a), bounded_sols(llist, u, b)]
        if None in parts:
            continue
        assert parts[0] == parts[1] | parts[2], (a, b, print_term(u))


def test_seq_law(llist):
    rng = random.Random(43)
    for _ in range(100):
        a = random_core_strategy(rng, rng.randint(0, 1))
        b = random_core_strategy(rng, rng.randint(0, 1))
        u = random_subject(rng, llist)
        lhs = bounded_sols(llist, u, f'({a}) ; ({b})')
        mids = bounded_sols(llist, u, a)
        if lhs is None or mids is None:
            continue
        rhs = set()
        for mid in mids:
            part = bounded_sols(llist, mid, b)
            if part is None:
                rhs = None
                break
            rhs |= part
        if rhs is not None:
            assert lhs == rhs, (a, b, print_term(u))


def test_cond_law(llist):
    rng = random.Random(47)
    for _ in range(100):
        a = random_core_strategy(rng, rng.randint(0, 1))
        b = random_core_strategy(rng, rng.randint(0, 1))
        c = random_core_strategy(rng, rng.randint(0, 1))
        u = random_subject(rng, llist)
        lhs = bounded_sols(llist, u, f'({a}) ? ({b}) : ({c})')
        test_sols = bounded_sols(llist, u, a)
        if lhs is None or test_sols is None:
            continue
        rhs = bounded_sols(llist, u, f'({a}) ; ({b})') if test_sols \
            else bounded_sols(llist, u, c)
        if rhs is not None:
            assert lhs == rhs, (a, b, c, print_term(u))


def test_one_law(llist):
    rng = random.Random(53)
    for _ in range(60):
        a = random_core_strategy(rng, rng.randint(0, 2))
        u = random_subject(rng, llist)
        one = bounded_sols(llist, u, f'one({a})')
        full = bounded_sols(llist, u, a)
        if one is None or full is None:
            continue
        assert len(one) <= 1
        assert one <= full
        assert bool(one) == bool(full)


def test_bang_law(llist):
    rng = random.Random(59)
    for _ in range(100):
        a = random_core_strategy(rng, rng.randint(0, 1))
        u = random_subject(rng, llist)
        results = bounded_sols(llist, u, f'({a}) !')
        if results is None:
            continue
        for result in results:
            assert bounded_sols(llist, result, a) == set(), (a, print_term(u))


# ----------------------------------------------------------------------
# The classified step relation

def explore_states(engine, term, strat):
    mod = engine.mod
    start = State(normalize(mod, term), run(engine.prepare(strat), Subst.EMPTY, ()), ())
    seen = {start}
    frontier = deque((start,))
    transitions = []
    while frontier:
        state = frontier.popleft()
        for cls, label, nxt in engine.step(state):
            transitions.append((state, cls, label, nxt))
            if nxt not in seen:
                seen.add(nxt)
                frontier.append(nxt)
    solutions = {u.subject for u in seen if u.is_solution()}
    return transitions, solutions


def test_control_steps_preserve_subject(llist, foo):
    for mod, term, strat in [
        (llist, 'a b c', 'top(pop) ; top(put[L <- d])'),
        (llist, 'nil', 'seq(a b) | seq(c d)'),
        (llist, 'a b', '(pop | top(pop)) * ; match LS'),
        (foo, 'f(a, b)', '(swap ? next : all) !'),
    ]:
        engine = Engine(mod)
        transitions, _ = explore_states(engine, t(mod, term), s(mod, strat))
        for state, cls, label, nxt in transitions:
            if cls == CONTROL:
                assert nxt.subject == state.subject


def test_system_steps_are_single_rewrites(llist, foo):
    # Every subject change of a rule-application or all step is one of the
    # one-step rewrites of the source subject (with the same initial
    # substitution and focus)
    from strew.rewriting import apply_rule
    for mod, term, strat in [
        (llist, 'a b c', 'pop ; pop'),
        (llist, 'nil', 'seq(a b)'),
        (foo, 'f(a, b)', '(swap | next) *'),
        (foo, 'f(f(a, b), a)', 'all ; all'),
    ]:
        engine = Engine(mod)
        transitions, _ = explore_states(engine, t(mod, term), s(mod, strat))
        checked = 0
        for state, cls, label, nxt in transitions:
            if cls != SYSTEM:
                continue
            node = state.control[1]
            env, focus = state.control[2], state.control[3]
            if isinstance(node, st.All):
                assert nxt.subject in set(apply_all(mod, state.subject,
                                                    focus=focus))
                checked += 1
            elif isinstance(node, st.Apply):
                init = Subst({var: normalize(mod, env.apply(mod.signature, expr))
                              for var, expr in node.init})
                one_step = set()
                for rule in mod.rules_for_label(node.label):
                    one_step |= set(apply_rule(mod, state.subject, rule, init,
                                               top=node.top, focus=focus))
                assert nxt.subject in one_step
                checked += 1
        assert checked > 0


def test_step_closure_matches_srewrite(llist, foo):
    for mod, term, strat in [
        (llist, 'a b c', 'pop * ; match L'),
        (llist, 'nil', 'seq(a b)'),
        (foo, 'f(a, a)', '(next | swap) ; next'),
        (foo, 'f(a, b)', 'matchrew f(X, Y) by X using try(next), Y using idle'),
    ]:
        engine = Engine(mod)
        _, closure_solutions = explore_states(engine, t(mod, term), s(mod, strat))
        direct = set(srewrite(t(mod, term), s(mod, strat), mod))
        assert closure_solutions == direct


def test_atomic_successors(llist, foo):
    assert set(atomic_successors(t(llist, 'a b c'), s(llist, 'pop'), llist)) == \
        set(apply_all(llist, t(llist, 'a b c')))
    assert atomic_successors(t(foo, 'b'), s(foo, 'match a'), foo) == []
    mrew = s(foo, 'matchrew f(X, Y) by X using next, Y using idle')
    assert set(atomic_successors(t(foo, 'f(a, a)'), mrew, foo)) == \
        set(srewrite(t(foo, 'f(a, a)'), mrew, foo))


def test_visited_set_terminates_cycles(llist):
    # idle* has infinitely many executions but one result
    assert sols(llist, 'a', 'idle *') == {'a'}
    assert sols(llist, 'a b', '(match LS) *') == {'a b'}
