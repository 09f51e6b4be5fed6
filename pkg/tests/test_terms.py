import random

import pytest

from strew.errors import SortError
from strew.parser import parse_term
from strew.printer import print_term
from strew.terms import Seg, Subst, Var, replace_at, subterm_at


def t(mod, text):
    return parse_term(text, mod)


def test_assoc_flattening(llist):
    sig = llist.signature
    a, b, c = (t(llist, x) for x in 'abc')
    nested = sig.make_app('__', [sig.make_app('__', [a, b]), c])
    assert nested == t(llist, 'a b c')
    assert len(nested.children) == 3


def test_identity_erasure(llist):
    assert t(llist, 'nil a') == t(llist, 'a')
    assert t(llist, 'nil nil') == t(llist, 'nil')


def test_comm_canonical_order(ttt):
    one = t(ttt, '[3, 3, O] [1, 1, X]')
    two = t(ttt, '[1, 1, X] [3, 3, O]')
    assert one == two
    assert print_term(one) == '[1, 1, X] [3, 3, O]'


def test_canonicalize_idempotent_random(llist, ttt):
    rng = random.Random(7)
    letters = 'abcde'
    for _ in range(200):
        words = [rng.choice(letters) for _ in range(rng.randint(1, 6))]
        term = t(llist, ' '.join(words))
        assert llist.signature.canonicalize(term) == term
    for _ in range(60):
        cells = [f'[{rng.randint(1, 3)}, {rng.randint(1, 3)}, {rng.choice("OX-")}]'
                 for _ in range(rng.randint(1, 5))]
        term = t(ttt, ' '.join(cells))
        assert ttt.signature.canonicalize(term) == term


def test_least_sorts(llist):
    sig = llist.signature
    assert sig.least_sort(t(llist, 'a')) == 'Letter'
    assert sig.least_sort(t(llist, 'a b')) == 'List'
    assert sig.least_sort(t(llist, '3')) == 'NzNat'
    assert sig.least_sort(t(llist, '0')) == 'Zero'


def test_least_sort_kind_level(ttt):
    # opponent is declared at the kind level; an unreducible application
    # lives in the Player kind
    term = t(ttt, 'opponent(-)')
    assert ttt.signature.least_sort(term) == '[Player]'


def test_ill_sorted_application_rejected(llist):
    with pytest.raises(SortError):
        llist.signature.least_sort(
            llist.signature.make_app('length', [t(llist, '3')]))


def test_substitution_application(llist):
    sig = llist.signature
    x = Var('X', 'List')
    s = Subst({x: t(llist, 'a b')})
    assert s.apply(sig, x) == t(llist, 'a b')
    assert Subst.EMPTY.apply(sig, t(llist, 'a b')) == t(llist, 'a b')
    # non-linear duplication
    f = sig.make_app('__', [x, x])
    assert s.apply(sig, f) == t(llist, 'a b a b')


def test_replace_at_child(foo):
    term = t(foo, 'f(a, b)')
    b = t(foo, 'b')
    assert replace_at(foo.signature, term, (0,), b) == t(foo, 'f(b, b)')


def test_replace_segment_by_identity(llist):
    term = t(llist, 'a b c')
    nil = t(llist, 'nil')
    out = replace_at(llist.signature, term, (Seg('__', (0,)),), nil)
    assert out == t(llist, 'b c')


def test_replace_span_splices(llist):
    term = t(llist, 'a b c')
    out = replace_at(llist.signature, term, (Seg('__', (1, 2)),), t(llist, 'b'))
    assert out == t(llist, 'a b')
    grown = replace_at(llist.signature, term, (Seg('__', (1, 2)),),
                       t(llist, 'd e'))
    assert grown == t(llist, 'a d e')


def test_subterm_at_segment(llist):
    term = t(llist, 'a b c')
    assert subterm_at(llist.signature, term, (Seg('__', (0, 1)),)) == t(llist, 'a b')
    assert subterm_at(llist.signature, term, (Seg('__', ()),)) == t(llist, 'nil')
