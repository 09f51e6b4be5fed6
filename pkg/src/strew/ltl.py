#
# Explicit-state LTL model checking of interleaved strategy executions:
# proposition evaluation on subject terms, tableau construction of a Büchi
# automaton for the negated property, and a nested depth-first emptiness
# check of the product producing lasso counterexamples.
#

from __future__ import annotations

from .engine import Engine
from .errors import CheckError, PropositionError, SearchLimitError
from .module import ModuleDef
from .multistrat import GlobalExpr, MSContext, MultiEngine
from .rewriting import normalize
from .terms import ANY_SORT, App, Subst, Term, Var

DEFAULT_STATE_BUDGET = 10 ** 6


# ----------------------------------------------------------------------
# Formulas

class Formula:
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


class TrueF(Formula):
    __slots__ = ()

    def __init__(self):
        self._seal()

    def __repr__(self):
        return 'true'


class FalseF(Formula):
    __slots__ = ()

    def __init__(self):
        self._seal()

    def __repr__(self):
        return 'false'


TRUE, FALSE = TrueF(), FalseF()


class Prop(Formula):
    __slots__ = ('name',)

    def __init__(self, name):
        self.name = name
        self._seal()

    def __repr__(self):
        return self.name


class NotF(Formula):
    __slots__ = ('arg',)

    def __init__(self, arg):
        self.arg = arg
        self._seal()

    def __repr__(self):
        return f'~ {self.arg!r}'


class AndF(Formula):
    __slots__ = ('left', 'right')

    def __init__(self, left, right):
        self.left = left
        self.right = right
        self._seal()

    def __repr__(self):
        return f'({self.left!r} /\\ {self.right!r})'


class OrF(Formula):
    __slots__ = ('left', 'right')

    def __init__(self, left, right):
        self.left = left
        self.right = right
        self._seal()

    def __repr__(self):
        return f'({self.left!r} \\/ {self.right!r})'


class ImpliesF(Formula):
    __slots__ = ('left', 'right')

    def __init__(self, left, right):
        self.left = left
        self.right = right
        self._seal()

    def __repr__(self):
        return f'({self.left!r} -> {self.right!r})'


class NextF(Formula):
    __slots__ = ('arg',)

    def __init__(self, arg):
        self.arg = arg
        self._seal()

    def __repr__(self):
        return f'O {self.arg!r}'


class AlwaysF(Formula):
    __slots__ = ('arg',)

    def __init__(self, arg):
        self.arg = arg
        self._seal()

    def __repr__(self):
        return f'[] {self.arg!r}'


class EventuallyF(Formula):
    __slots__ = ('arg',)

    def __init__(self, arg):
        self.arg = arg
        self._seal()

    def __repr__(self):
        return f'<> {self.arg!r}'


class UntilF(Formula):
    __slots__ = ('left', 'right')

    def __init__(self, left, right):
        self.left = left
        self.right = right
        self._seal()

    def __repr__(self):
        return f'({self.left!r} U {self.right!r})'


class ReleaseF(Formula):
    """Dual of until; only used internally by the normal form."""

    __slots__ = ('left', 'right')

    def __init__(self, left, right):
        self.left = left
        self.right = right
        self._seal()

    def __repr__(self):
        return f'({self.left!r} R {self.right!r})'


def prop_names(f: Formula) -> set[str]:
    if isinstance(f, Prop):
        return {f.name}
    names = set()
    for field in f.__slots__:
        value = getattr(f, field)
        if isinstance(value, Formula):
            names |= prop_names(value)
    return names


def nnf(f: Formula, negated=False) -> Formula:
    """Negation normal form over literals, and/or, next, until, release."""
    if isinstance(f, TrueF):
        return FALSE if negated else TRUE
    if isinstance(f, FalseF):
        return TRUE if negated else FALSE
    if isinstance(f, Prop):
        return NotF(f) if negated else f
    if isinstance(f, NotF):
        return nnf(f.arg, not negated)
    if isinstance(f, AndF):
        cls = OrF if negated else AndF
        return cls(nnf(f.left, negated), nnf(f.right, negated))
    if isinstance(f, OrF):
        cls = AndF if negated else OrF
        return cls(nnf(f.left, negated), nnf(f.right, negated))
    if isinstance(f, ImpliesF):
        return nnf(OrF(NotF(f.left), f.right), negated)
    if isinstance(f, NextF):
        return NextF(nnf(f.arg, negated))
    if isinstance(f, EventuallyF):
        return nnf(UntilF(TRUE, f.arg), negated)
    if isinstance(f, AlwaysF):
        return nnf(ReleaseF(FALSE, f.arg), negated)
    if isinstance(f, UntilF):
        cls = ReleaseF if negated else UntilF
        return cls(nnf(f.left, negated), nnf(f.right, negated))
    if isinstance(f, ReleaseF):
        cls = UntilF if negated else ReleaseF
        return cls(nnf(f.left, negated), nnf(f.right, negated))
    raise CheckError(f'unknown formula {f!r}')


# ----------------------------------------------------------------------
# Tableau construction (Gerth-Peled-Vardi-Wolper) of a Büchi automaton

class Buchi:
    """Degeneralized Büchi automaton over proposition-set labels.

    states: ints; transitions: state -> list of (required, forbidden,
    target); initial: list of (required, forbidden, state) entry demands on
    the first label; accepting: set of states.
    """

    def __init__(self, initial, transitions, accepting):
        self.initial = initial
        self.transitions = transitions
        self.accepting = accepting

    def entry_states(self, labels):
        return [q for req, forb, q in self.initial
                if req <= labels and not (forb & labels)]

    def successors(self, q, labels):
        return [t for req, forb, t in self.transitions.get(q, ())
                if req <= labels and not (forb & labels)]


class _Node:
    __slots__ = ('nid', 'incoming', 'new', 'old', 'nxt')

    def __init__(self, nid, incoming, new, old, nxt):
        self.nid = nid
        self.incoming = incoming
        self.new = new
        self.old = old
        self.nxt = nxt


def _tableau(f: Formula):
    """Nodes of the tableau graph for an NNF formula (init marker = -1)."""
    nodes = []
    counter = [0]

    def new_id():
        counter[0] += 1
        return counter[0]

    def expand(node):
        if not node.new:
            for nd in nodes:
                if nd.old == node.old and nd.nxt == node.nxt:
                    nd.incoming |= node.incoming
                    return
            nodes.append(node)
            succ = _Node(new_id(), {node.nid}, set(node.nxt), set(), set())
            expand(succ)
            return
        eta = node.new.pop()
        if isinstance(eta, FalseF):
            return
        if isinstance(eta, TrueF):
            # Recorded so that acceptance sees trivial until right sides
            node.old.add(eta)
            expand(node)
            return
        if isinstance(eta, (Prop, NotF)):
            negation = eta.arg if isinstance(eta, NotF) else NotF(eta)
            if negation in node.old:
                return
            node.old.add(eta)
            expand(node)
            return
        if isinstance(eta, AndF):
            node.old.add(eta)
            for part in (eta.left, eta.right):
                if part not in node.old:
                    node.new.add(part)
            expand(node)
            return
        if isinstance(eta, NextF):
            node.old.add(eta)
            node.nxt.add(eta.arg)
            expand(node)
            return
        if isinstance(eta, (OrF, UntilF, ReleaseF)):
            node.old.add(eta)
            if isinstance(eta, OrF):
                first_new, first_next = {eta.left}, set()
                second_new = {eta.right}
            elif isinstance(eta, UntilF):
                first_new, first_next = {eta.left}, {eta}
                second_new = {eta.right}
            else:
                first_new, first_next = {eta.right}, {eta}
                second_new = {eta.left, eta.right}
            branch = _Node(new_id(), set(node.incoming),
                           node.new | (first_new - node.old),
                           set(node.old), node.nxt | first_next)
            node.new |= second_new - node.old
            expand(branch)
            expand(node)
            return
        raise CheckError(f'formula not in normal form: {eta!r}')

    root = _Node(new_id(), {-1}, {f}, set(), set())
    expand(root)
    return nodes


def _until_subformulas(f):
    out = set()

    def walk(g):
        if isinstance(g, UntilF):
            out.add(g)
        for field in g.__slots__:
            value = getattr(g, field)
            if isinstance(value, Formula):
                walk(value)

    walk(f)
    return sorted(out, key=repr)


def to_buchi(f: Formula) -> Buchi:
    """Büchi automaton accepting exactly the models of the formula (which
    is normalized internally).  Degeneralization uses a level counter over
    the acceptance sets of the until subformulas."""
    g = nnf(f)
    nodes = _tableau(g)
    untils = _until_subformulas(g)
    k = len(untils)

    def literal_sets(node):
        req = frozenset(lit.name for lit in node.old if isinstance(lit, Prop))
        forb = frozenset(lit.arg.name for lit in node.old
                         if isinstance(lit, NotF) and isinstance(lit.arg, Prop))
        return req, forb

    def in_accepting(node, j):
        u = untils[j]
        return u.right in node.old or u not in node.old

    def climb(node, level):
        base = 0 if level == k else level
        while base < k and in_accepting(node, base):
            base += 1
        return base

    initial, transitions = [], {}
    accepting = set()
    for node in nodes:
        req, forb = literal_sets(node)
        level0 = climb(node, 0)
        state0 = (node.nid, level0)
        if level0 == k:
            accepting.add(state0)
        if -1 in node.incoming:
            initial.append((req, forb, state0))
        for source in nodes:
            if source.nid not in node.incoming:
                continue
            for level in range(k + 1):
                nxt = climb(node, level)
                state = (node.nid, nxt)
                if nxt == k:
                    accepting.add(state)
                transitions.setdefault((source.nid, level), []).append(
                    (req, forb, state))
    return Buchi(initial, transitions, accepting)


# ----------------------------------------------------------------------
# Propositions and the Kripke view of a multistrategy execution

def eval_prop(name: str, t: Term, mod: ModuleDef, engine: Engine | None = None) -> bool:
    """Substitute t for the @ placeholder of the proposition's body and
    reduce; the result must be a Boolean constant."""
    prop = mod.prop(name)
    if prop is None:
        raise PropositionError(f'proposition {name} is not declared')
    counter = engine.counter if engine else None
    subst = Subst({Var('@', ANY_SORT): t})
    value = normalize(mod, subst.apply(mod.signature, prop.body), counter)
    if isinstance(value, App) and not value.children:
        if value.op == 'true':
            return True
        if value.op == 'false':
            return False
    raise PropositionError(
        f'proposition {name} did not reduce to a Boolean on the given state')


class KripkeView:
    """On-the-fly Kripke structure over scheduler nodes (context plus turn
    position), labeled through the subject term only; deadlocks are closed
    with a self-loop."""

    DEADLOCK = ('deadlock', None)

    def __init__(self, mod: ModuleDef, me: MultiEngine, g, ctx: MSContext,
                 props, state_limit=DEFAULT_STATE_BUDGET):
        self.mod = mod
        self.me = me
        self.g = g
        self.props = tuple(props)
        self.initial = me.scheduler_start(g, ctx)
        self.state_limit = state_limit
        self._succ_cache = {}
        self._label_cache = {}

    def successors(self, node):
        hit = self._succ_cache.get(node)
        if hit is None:
            succs = self.me.scheduler_successors(self.g, node)
            hit = tuple(succs) if succs else ((self.DEADLOCK, node),)
            self._succ_cache[node] = hit
            if len(self._succ_cache) > self.state_limit:
                raise SearchLimitError('model state budget exceeded')
        return hit

    def labels(self, node):
        subject = node[0].subject
        hit = self._label_cache.get(subject)
        if hit is None:
            hit = frozenset(p for p in self.props
                            if eval_prop(p, subject, self.mod, self.me.engine))
            self._label_cache[subject] = hit
        return hit


# ----------------------------------------------------------------------
# Verdicts

class CheckResult:
    holds = True

    def __repr__(self):
        return 'Holds'


HOLDS = CheckResult()


class Fails(CheckResult):
    """Lasso counterexample: steps are (label, node) pairs; the first
    prefix entry carries the initial node with a None label, and the cycle
    leads from the last prefix node back to itself."""

    holds = False

    def __init__(self, prefix, cycle):
        self.prefix = prefix
        self.cycle = cycle

    def __repr__(self):
        return f'Fails(prefix={len(self.prefix)}, cycle={len(self.cycle)})'


def check_model(kripke, f: Formula) -> CheckResult:
    """Emptiness check of the product of a Kripke structure (an object with
    initial, successors, labels) against the negated formula."""
    return _ndfs(kripke, to_buchi(NotF(f)))


def check(f: Formula, t: Term, strats, g, mod: ModuleDef,
          engine: Engine | None = None,
          state_limit=DEFAULT_STATE_BUDGET) -> CheckResult:
    """Model check an LTL property on the executions of the multistrategy
    from t under the global strategy g."""
    if isinstance(g, GlobalExpr):
        raise CheckError('model checking custom global strategies is not supported')
    me = MultiEngine(mod, engine)
    for name in sorted(prop_names(f)):
        if mod.prop(name) is None:
            raise PropositionError(f'proposition {name} is not declared')
    ctx = me.initial_context(t, strats)
    kripke = KripkeView(mod, me, g, ctx, sorted(prop_names(f)), state_limit)
    return check_model(kripke, f)


def _ndfs(kripke: KripkeView, automaton: Buchi) -> CheckResult:
    """Nested depth-first emptiness check of the product; returns a lasso
    counterexample when an accepting cycle is reachable."""
    init_labels = kripke.labels(kripke.initial)
    roots = [(kripke.initial, q) for q in automaton.entry_states(init_labels)]

    def product_successors(state):
        node, q = state
        out = []
        for label, nxt in kripke.successors(node):
            nxt_labels = kripke.labels(nxt)
            for q2 in automaton.successors(q, nxt_labels):
                out.append((label, (nxt, q2)))
        return out

    blue, red = set(), set()
    # Blue DFS with explicit stacks; red search seeded at accepting states
    # in post-order (classic nested DFS)
    for root in roots:
        if root in blue:
            continue
        stack = [(root, None, iter(product_successors(root)))]
        blue.add(root)
        path = [(None, root)]
        while stack:
            state, _, it = stack[-1]
            advanced = False
            for label, nxt in it:
                if nxt not in blue:
                    blue.add(nxt)
                    stack.append((nxt, label, iter(product_successors(nxt))))
                    path.append((label, nxt))
                    advanced = True
                    break
            if advanced:
                continue
            # Post-order: start the red search from accepting states
            if state[1] in automaton.accepting:
                cycle = _red_search(state, product_successors, red)
                if cycle is not None:
                    prefix = [(label, node) for label, (node, _) in path]
                    projected = [(label, node) for label, (node, _) in cycle]
                    return Fails(prefix, projected)
            stack.pop()
            path.pop()
    return HOLDS


def _red_search(seed, product_successors, red):
    """Depth-first search for a cycle back to the seed; returns the labeled
    cycle steps or None."""
    stack = [(seed, iter(product_successors(seed)))]
    steps = []
    local = set()
    while stack:
        state, it = stack[-1]
        advanced = False
        for label, nxt in it:
            if nxt == seed:
                steps.append((label, nxt))
                return steps
            if nxt not in red and nxt not in local:
                local.add(nxt)
                stack.append((nxt, iter(product_successors(nxt))))
                steps.append((label, nxt))
                advanced = True
                break
        if advanced:
            continue
        stack.pop()
        if steps:
            steps.pop()
    red.update(local)
    return None


def replay(result: Fails, kripke_successors) -> bool:
    """Check a counterexample against a successor function over nodes:
    every step must be reachable by its label and the cycle must close."""
    if not result.prefix:
        return False
    current = result.prefix[0][1]
    for label, nxt in result.prefix[1:]:
        if (label, nxt) not in kripke_successors(current):
            return False
        current = nxt
    anchor = current
    for label, nxt in result.cycle:
        if (label, nxt) not in kripke_successors(current):
            return False
        current = nxt
    return current == anchor
