import pytest

from strew.engine import Engine
from strew.parser import load_fixture


@pytest.fixture(scope='session')
def registry():
    return load_fixture(['llist.maude', 'foo.maude', 'lazylist.maude',
                         'tictactoe.maude'])


@pytest.fixture(scope='session')
def llist(registry):
    return registry['LLIST']


@pytest.fixture(scope='session')
def foo(registry):
    return registry['FOO']


@pytest.fixture(scope='session')
def lazy(registry):
    return registry['LAZY-LIST']


@pytest.fixture(scope='session')
def lazy_rls(registry):
    return registry['LAZY-LIST-RLS']


@pytest.fixture(scope='session')
def lazy_strat(registry):
    return registry['LAZY-LIST-STRAT']


@pytest.fixture(scope='session')
def ttt(registry):
    return registry['TICTACTOE-CHECK']


@pytest.fixture(scope='session')
def ttt_engine(ttt):
    # One engine for every tic-tac-toe test: its caches make the game
    # explorations share almost all of the work
    return Engine(ttt)
