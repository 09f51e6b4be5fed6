#
# Abstract syntax of the strategy language (core combinators, sugar, and
# the signature-dependent extension operators), with desugaring and some
# small analyses used by the execution engine.
#

from __future__ import annotations

from .terms import term_vars


class StratExpr:
    """Base class of strategy expressions.

    Nodes are immutable with structural equality and a cached hash, so
    they can appear in execution states and visited sets.
    """

    __slots__ = ('_hash',)

    def _fields(self):
        return tuple(getattr(self, f) for f in self.__slots__)

    def __eq__(self, other):
        return self is other or (type(self) is type(other)
                                 and self._hash == other._hash
                                 and self._fields() == other._fields())

    def __hash__(self):
        return self._hash

    def _seal(self):
        self._hash = hash((type(self).__name__,) + self._fields())
        return self


class Idle(StratExpr):
    __slots__ = ()

    def __init__(self):
        self._seal()


class Fail(StratExpr):
    __slots__ = ()

    def __init__(self):
        self._seal()


class All(StratExpr):
    __slots__ = ()

    def __init__(self):
        self._seal()


IDLE, FAIL, ALL = Idle(), Fail(), All()


class Apply(StratExpr):
    """Rule application by label, with an optional initial substitution and
    a flag restricting matching to the top of the subject."""

    __slots__ = ('label', 'init', 'top')

    def __init__(self, label, init=(), top=False):
        self.label = label
        self.init = tuple(init)      # pairs (rule variable, term)
        self.top = top
        self._seal()


class MatchTest(StratExpr):
    __slots__ = ('anywhere', 'pattern', 'condition')

    def __init__(self, anywhere, pattern, condition=()):
        self.anywhere = anywhere
        self.pattern = pattern
        self.condition = tuple(condition)
        self._seal()


class Seq(StratExpr):
    __slots__ = ('left', 'right')

    def __init__(self, left, right):
        self.left = left
        self.right = right
        self._seal()


class Choice(StratExpr):
    __slots__ = ('left', 'right')

    def __init__(self, left, right):
        self.left = left
        self.right = right
        self._seal()


class Star(StratExpr):
    __slots__ = ('body',)

    def __init__(self, body):
        self.body = body
        self._seal()


class Bang(StratExpr):
    __slots__ = ('body',)

    def __init__(self, body):
        self.body = body
        self._seal()


class Cond(StratExpr):
    __slots__ = ('test', 'then', 'other')

    def __init__(self, test, then, other):
        self.test = test
        self.then = then
        self.other = other
        self._seal()


class One(StratExpr):
    __slots__ = ('body',)

    def __init__(self, body):
        self.body = body
        self._seal()


class MatchRew(StratExpr):
    """Rewriting of selected subterms: each slot variable of the pattern is
    rewritten by its strategy and the results recombined."""

    __slots__ = ('anywhere', 'pattern', 'condition', 'slots')

    def __init__(self, anywhere, pattern, condition, slots):
        self.anywhere = anywhere
        self.pattern = pattern
        self.condition = tuple(condition)
        self.slots = tuple(slots)    # pairs (variable, strategy)
        self._seal()


class Call(StratExpr):
    __slots__ = ('name', 'args')

    def __init__(self, name, args=()):
        self.name = name
        self.args = tuple(args)
        self._seal()


# Sugared combinators, removed by desugar()

class Try(StratExpr):
    __slots__ = ('body',)

    def __init__(self, body):
        self.body = body
        self._seal()


class Not(StratExpr):
    __slots__ = ('body',)

    def __init__(self, body):
        self.body = body
        self._seal()


class Test(StratExpr):
    __slots__ = ('body',)

    def __init__(self, body):
        self.body = body
        self._seal()


class OrElse(StratExpr):
    __slots__ = ('left', 'right')

    def __init__(self, left, right):
        self.left = left
        self.right = right
        self._seal()


# Extension operators (translated to the core or run natively)

class Congruence(StratExpr):
    """Constructor homonym applying child strategies to the arguments of a
    matching top symbol."""

    __slots__ = ('op', 'args')

    def __init__(self, op, args):
        self.op = op
        self.args = tuple(args)
        self._seal()


class GtAll(StratExpr):
    __slots__ = ('body',)

    def __init__(self, body):
        self.body = body
        self._seal()


class GtOne(StratExpr):
    __slots__ = ('body',)

    def __init__(self, body):
        self.body = body
        self._seal()


class GtSome(StratExpr):
    __slots__ = ('body',)

    def __init__(self, body):
        self.body = body
        self._seal()


# ----------------------------------------------------------------------

def desugar(s: StratExpr) -> StratExpr:
    """Eliminate try/not/test/or-else; extension operators are kept."""
    if isinstance(s, Try):
        body = desugar(s.body)
        return Cond(body, IDLE, IDLE)
    if isinstance(s, Not):
        return Cond(desugar(s.body), FAIL, IDLE)
    if isinstance(s, Test):
        return Cond(Cond(desugar(s.body), FAIL, IDLE), FAIL, IDLE)
    if isinstance(s, OrElse):
        return Cond(desugar(s.left), IDLE, desugar(s.right))
    return map_children(s, desugar)


def map_children(s: StratExpr, f) -> StratExpr:
    """Rebuild a node applying f to its strategy children (identity on
    leaves); reuses the node when nothing changed."""
    if isinstance(s, Seq):
        l, r = f(s.left), f(s.right)
        return s if (l is s.left and r is s.right) else Seq(l, r)
    if isinstance(s, Choice):
        l, r = f(s.left), f(s.right)
        return s if (l is s.left and r is s.right) else Choice(l, r)
    if isinstance(s, OrElse):
        l, r = f(s.left), f(s.right)
        return s if (l is s.left and r is s.right) else OrElse(l, r)
    if isinstance(s, Star):
        b = f(s.body)
        return s if b is s.body else Star(b)
    if isinstance(s, Bang):
        b = f(s.body)
        return s if b is s.body else Bang(b)
    if isinstance(s, One):
        b = f(s.body)
        return s if b is s.body else One(b)
    if isinstance(s, (Try, Not, Test)):
        b = f(s.body)
        return s if b is s.body else type(s)(b)
    if isinstance(s, Cond):
        t, th, o = f(s.test), f(s.then), f(s.other)
        return s if (t is s.test and th is s.then and o is s.other) else Cond(t, th, o)
    if isinstance(s, MatchRew):
        slots = tuple((v, f(a)) for v, a in s.slots)
        if all(a is b for (_, a), (_, b) in zip(slots, s.slots)):
            return s
        return MatchRew(s.anywhere, s.pattern, s.condition, slots)
    if isinstance(s, Congruence):
        args = tuple(f(a) for a in s.args)
        return s if all(a is b for a, b in zip(args, s.args)) else Congruence(s.op, args)
    if isinstance(s, (GtAll, GtOne, GtSome)):
        b = f(s.body)
        return s if b is s.body else type(s)(b)
    return s


def has_extension_ops(s: StratExpr) -> bool:
    if isinstance(s, (Congruence, GtAll, GtOne, GtSome)):
        return True
    found = [False]

    def probe(child):
        if has_extension_ops(child):
            found[0] = True
        return child

    map_children(s, probe)
    return found[0]


def free_var_names(s: StratExpr) -> frozenset[str]:
    """Names of the term variables a strategy expression mentions; used to
    restrict environments when caching evaluation results."""
    names = set()

    def term_names(t):
        names.update(v.name for v in term_vars(t))

    def walk(e):
        if isinstance(e, Apply):
            for _, t in e.init:
                term_names(t)
        elif isinstance(e, (MatchTest, MatchRew)):
            term_names(e.pattern)
            for frag in e.condition:
                term_names(frag.lhs)
                if frag.rhs is not None:
                    term_names(frag.rhs)
            if isinstance(e, MatchRew):
                for _, a in e.slots:
                    walk(a)
        elif isinstance(e, Call):
            for t in e.args:
                term_names(t)
        map_children(e, lambda c: (walk(c), c)[1])

    walk(s)
    return frozenset(names)


def action_labels(s: StratExpr) -> frozenset[str]:
    """Rule labels and strategy names a step through s may report; used for
    the human-readable transition labels of interleaved executions."""
    if isinstance(s, Apply):
        return frozenset((s.label,))
    if isinstance(s, Call):
        return frozenset((s.name,))
    if isinstance(s, All):
        return frozenset(('all',))
    if isinstance(s, Seq):
        right = action_labels(s.right)
        return right or action_labels(s.left)
    if isinstance(s, (Choice, OrElse)):
        return action_labels(s.left) | action_labels(s.right)
    if isinstance(s, Cond):
        then = action_labels(s.then) or action_labels(s.test)
        return then | action_labels(s.other)
    if isinstance(s, MatchRew):
        out = frozenset()
        for _, a in s.slots:
            out |= action_labels(a)
        return out
    if isinstance(s, (Star, Bang, One, Try, Test, Not, GtAll, GtOne, GtSome)):
        return action_labels(s.body)
    if isinstance(s, Congruence):
        out = frozenset()
        for a in s.args:
            out |= action_labels(a)
        return out
    if isinstance(s, MatchTest):
        return frozenset(('match',))
    return frozenset()


def describe_action(s: StratExpr) -> str:
    labels = sorted(action_labels(s))
    if not labels:
        return 'step'
    return '|'.join(labels)
