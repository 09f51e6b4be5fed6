#
# Interleaved execution of several strategy threads over one subject term:
# the atomic step of one thread (exhaust its bookkeeping steps, then one
# system step), and the global strategies scheduling those steps (round
# robin, free interleaving, bounded interleaving, or a custom expression).
#

from __future__ import annotations

from collections import deque

from .engine import CONTROL, RET, Engine, State, run
from .errors import StrewError
from .module import ModuleDef
from .rewriting import normalize
from .terms import Subst, Term


class Thread:
    """One strategy thread: its pending work and continuation (the subject
    term lives in the enclosing context)."""

    __slots__ = ('control', 'stack', '_hash')

    def __init__(self, control, stack):
        self.control = control
        self.stack = stack
        self._hash = hash((control, stack))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other or (isinstance(other, Thread)
                                 and self.control == other.control
                                 and self.stack == other.stack)

    def exhausted(self):
        return self.control is RET and not self.stack


class MSContext:
    """Subject term plus the numbered strategy threads acting on it."""

    __slots__ = ('subject', 'threads', '_hash')

    def __init__(self, subject: Term, threads):
        self.subject = subject
        self.threads = tuple(threads)
        self._hash = hash((subject, self.threads))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other or (isinstance(other, MSContext)
                                 and self.subject == other.subject
                                 and self.threads == other.threads)

    def with_thread(self, n, subject, thread):
        threads = self.threads[:n] + (thread,) + self.threads[n + 1:]
        return MSContext(subject, threads)

    def __repr__(self):
        return f'MSContext({self.subject!r}, {len(self.threads)} threads)'


# Global strategies ----------------------------------------------------

class Turns:
    """Cyclic thread order; stops when the thread whose turn it is cannot
    take a step."""

    def __repr__(self):
        return 'turns'


class Freec:
    """Free interleaving; stops when no thread can take a step."""

    def __repr__(self):
        return 'concurrent'


class FreecBounded:
    """Free interleaving that also stops after exactly K steps."""

    def __init__(self, bound):
        self.bound = bound

    def __repr__(self):
        return f'steps {self.bound}'


class GlobalExpr:
    """Custom global strategies: combinator expressions over the scheduler
    primitives (see the Custom* node classes)."""

    def __repr__(self):
        return 'custom'


class GIdle(GlobalExpr):
    pass


class GFail(GlobalExpr):
    pass


class GControl(GlobalExpr):
    def __init__(self, thread):
        self.thread = thread


class GSystem(GlobalExpr):
    def __init__(self, thread):
        self.thread = thread


class GStep(GlobalExpr):
    """control(n) * ; system(n): the atomic step of one thread."""

    def __init__(self, thread):
        self.thread = thread


class GTurns(GlobalExpr):
    pass


class GFreec(GlobalExpr):
    def __init__(self, bound=None):
        self.bound = bound


class GSeq(GlobalExpr):
    def __init__(self, left, right):
        self.left = left
        self.right = right


class GChoice(GlobalExpr):
    def __init__(self, left, right):
        self.left = left
        self.right = right


class GStar(GlobalExpr):
    def __init__(self, body):
        self.body = body


class GBang(GlobalExpr):
    def __init__(self, body):
        self.body = body


class GCond(GlobalExpr):
    def __init__(self, test, then, other):
        self.test = test
        self.then = then
        self.other = other


# ----------------------------------------------------------------------

class MultiEngine:
    """Interleaving executor over one module (wraps a strategy Engine)."""

    def __init__(self, mod: ModuleDef, engine: Engine | None = None):
        self.mod = mod
        self.engine = engine or Engine(mod)

    # -- context construction  -------------------------------------------

    def initial_context(self, t: Term, strats) -> MSContext:
        subject = normalize(self.mod, t, self.engine.counter)
        threads = [Thread(run(self.engine.prepare(s), Subst.EMPTY, ()), ())
                   for s in strats]
        return MSContext(subject, threads)

    # -- the atomic step of one thread -------------------------------------

    def _thread_state(self, ctx: MSContext, n: int) -> State:
        th = ctx.threads[n]
        return State(ctx.subject, th.control, th.stack)

    def control_successors(self, ctx: MSContext, n: int):
        """Single bookkeeping steps of thread n (no subject change)."""
        state = self._thread_state(ctx, n)
        if state.is_solution() or self.engine.ms_ready(state):
            return []
        out = []
        for cls, _, nxt in self.engine.step(state, ms=True):
            assert cls == CONTROL and nxt.subject == ctx.subject
            out.append(ctx.with_thread(n, nxt.subject, Thread(nxt.control, nxt.stack)))
        return out

    def system_successors(self, ctx: MSContext, n: int):
        """Single atomic (system) steps of thread n, with labels."""
        state = self._thread_state(ctx, n)
        if state.is_solution() or not self.engine.ms_ready(state):
            return []
        out = []
        for _, label, nxt in self.engine.step(state, ms=True):
            out.append((label, ctx.with_thread(n, nxt.subject,
                                               Thread(nxt.control, nxt.stack))))
        return out

    def step(self, ctx: MSContext, n: int):
        """All contexts reachable by exhausting thread n's bookkeeping steps
        and then taking exactly one atomic step, labeled.  Empty when the
        thread cannot complete a step."""
        if not 0 <= n < len(ctx.threads):
            raise StrewError(f'no thread {n} in this context')
        start = self._thread_state(ctx, n)
        frontier = deque((start,))
        seen = {start}
        ready = []
        while frontier:
            state = frontier.popleft()
            if state.is_solution():
                continue
            if self.engine.ms_ready(state):
                ready.append(state)
                continue
            self.engine.charge()
            for cls, _, nxt in self.engine.step(state, ms=True):
                assert cls == CONTROL and nxt.subject == ctx.subject
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        out, emitted = [], set()
        for state in ready:
            for _, label, nxt in self.engine.step(state, ms=True):
                succ = ctx.with_thread(n, nxt.subject, Thread(nxt.control, nxt.stack))
                if succ not in emitted:
                    emitted.add(succ)
                    out.append((label, succ))
        return out

    # -- schedulers ---------------------------------------------------------

    def scheduler_start(self, g, ctx):
        if isinstance(g, Turns):
            return (ctx, 0)
        if isinstance(g, FreecBounded):
            return (ctx, 0)
        return (ctx, None)

    def scheduler_successors(self, g, node):
        """Labeled one-step successors under the global strategy; labels are
        (thread id, step description) pairs."""
        ctx, aux = node
        n_threads = len(ctx.threads)
        if isinstance(g, Turns):
            return [((aux, label), (nxt, (aux + 1) % n_threads))
                    for label, nxt in self.step(ctx, aux)]
        if isinstance(g, Freec):
            out = []
            for n in range(n_threads):
                out.extend(((n, label), (nxt, None))
                           for label, nxt in self.step(ctx, n))
            return out
        if isinstance(g, FreecBounded):
            if aux >= g.bound:
                return []
            out = []
            for n in range(n_threads):
                out.extend(((n, label), (nxt, aux + 1))
                           for label, nxt in self.step(ctx, n))
            return out
        raise StrewError('this global strategy has no step relation')

    def run_global(self, t: Term, strats, g) -> list[Term]:
        """Solution terms of the multistrategy under the global strategy,
        deduplicated in deterministic order."""
        ctx = self.initial_context(t, strats)
        if isinstance(g, GlobalExpr):
            return self._dedup_subjects(self.global_solutions(ctx, g))
        start = self.scheduler_start(g, ctx)
        frontier = deque((start,))
        seen = {start}
        solutions, emitted = [], set()
        while frontier:
            node = frontier.popleft()
            succs = self.scheduler_successors(g, node)
            if not succs:
                subject = node[0].subject
                if subject not in emitted:
                    emitted.add(subject)
                    solutions.append(subject)
                continue
            for _, nxt in succs:
                if nxt not in seen:
                    seen.add(nxt)
                    self.engine.charge()
                    frontier.append(nxt)
        return solutions

    def successors(self, ctx: MSContext, g):
        """One-step successor relation under g for external exploration
        (model checking): [(label, context)] from a bare context."""
        node = self.scheduler_start(g, ctx)
        return [(label, nxt[0]) for label, nxt in self.scheduler_successors(g, node)]

    # -- custom global strategies -------------------------------------------

    def global_solutions(self, ctx: MSContext, g: GlobalExpr) -> list[MSContext]:
        """Contexts resulting from a custom global strategy expression."""
        if isinstance(g, GIdle):
            return [ctx]
        if isinstance(g, GFail):
            return []
        if isinstance(g, GControl):
            return self.control_successors(ctx, self._check_tid(ctx, g.thread))
        if isinstance(g, GSystem):
            return [c for _, c in self.system_successors(ctx, self._check_tid(ctx, g.thread))]
        if isinstance(g, GStep):
            return [c for _, c in self.step(ctx, self._check_tid(ctx, g.thread))]
        if isinstance(g, GTurns):
            return self._scheduler_contexts(ctx, Turns())
        if isinstance(g, GFreec):
            sched = Freec() if g.bound is None else FreecBounded(g.bound)
            return self._scheduler_contexts(ctx, sched)
        if isinstance(g, GSeq):
            out, seen = [], set()
            for mid in self.global_solutions(ctx, g.left):
                for final in self.global_solutions(mid, g.right):
                    if final not in seen:
                        seen.add(final)
                        out.append(final)
            return out
        if isinstance(g, GChoice):
            out, seen = [], set()
            for branch in (g.left, g.right):
                for c in self.global_solutions(ctx, branch):
                    if c not in seen:
                        seen.add(c)
                        out.append(c)
            return out
        if isinstance(g, GStar):
            return self._closure(ctx, g.body, keep_all=True)
        if isinstance(g, GBang):
            return [c for c in self._closure(ctx, g.body, keep_all=True)
                    if not self.global_solutions(c, g.body)]
        if isinstance(g, GCond):
            mids = self.global_solutions(ctx, g.test)
            if not mids:
                return self.global_solutions(ctx, g.other)
            out, seen = [], set()
            for mid in mids:
                for final in self.global_solutions(mid, g.then):
                    if final not in seen:
                        seen.add(final)
                        out.append(final)
            return out
        raise StrewError(f'unknown global strategy node {type(g).__name__}')

    def _check_tid(self, ctx, n):
        if not 0 <= n < len(ctx.threads):
            raise StrewError(f'global strategy refers to missing thread {n}')
        return n

    def _closure(self, ctx, body, keep_all):
        frontier = deque((ctx,))
        seen = {ctx}
        order = [ctx]
        while frontier:
            c = frontier.popleft()
            for nxt in self.global_solutions(c, body):
                if nxt not in seen:
                    seen.add(nxt)
                    self.engine.charge()
                    order.append(nxt)
                    frontier.append(nxt)
        return order

    def _scheduler_contexts(self, ctx, sched):
        start = self.scheduler_start(sched, ctx)
        frontier = deque((start,))
        seen = {start}
        out, emitted = [], set()
        while frontier:
            node = frontier.popleft()
            succs = self.scheduler_successors(sched, node)
            if not succs:
                if node[0] not in emitted:
                    emitted.add(node[0])
                    out.append(node[0])
                continue
            for _, nxt in succs:
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)
        return out

    @staticmethod
    def _dedup_subjects(contexts):
        out, seen = [], set()
        for c in contexts:
            if c.subject not in seen:
                seen.add(c.subject)
                out.append(c.subject)
        return out


# ----------------------------------------------------------------------

def ms_step(ctx: MSContext, n: int, mod: ModuleDef,
            engine: Engine | None = None) -> list[MSContext]:
    """Atomic-step successors of one thread (unlabeled)."""
    me = MultiEngine(mod, engine)
    return [c for _, c in me.step(ctx, n)]


def ms_successors(ctx: MSContext, g, mod: ModuleDef,
                  engine: Engine | None = None):
    """Labeled successor relation under a global strategy."""
    return MultiEngine(mod, engine).successors(ctx, g)


def run_global(t: Term, strats, g, mod: ModuleDef,
               engine: Engine | None = None) -> list[Term]:
    """Execute a multistrategy and return the solution terms."""
    return MultiEngine(mod, engine).run_global(t, strats, g)
