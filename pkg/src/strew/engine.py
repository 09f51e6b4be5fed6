#
# Execution of strategy expressions: a small-step machine over states
# (subject, pending work, continuation stack) explored as a graph with a
# visited set, which gives the set-of-results commands, the classified
# control/system step relation, and the atomic-step evaluation used by the
# interleaving scheduler and the model checker.
#

from __future__ import annotations

from collections import deque

from . import strategy as st
from .errors import SearchLimitError, StrewError
from .matching import match_many, match_root, search
from .module import ModuleDef
from .rewriting import (DEFAULT_STEP_BUDGET, RewriteCounter, apply_all,
                        apply_rule, check_condition, normalize)
from .strategy import describe_action
from .terms import App, Subst, Term, compose_pos, replace_at, subterm_at
from .traversals import fresh_var, translate_extended

DEFAULT_STATE_BUDGET = 10 ** 6
MAX_COND_DEPTH = 120

CONTROL, SYSTEM = 'control', 'system'

RET = ('ret',)

# Strategies evaluated as one atomic step by the interleaving scheduler:
# rule applications, all, tests, whole (a)matchrew evaluations, traversal
# operators (matchrew-equivalent), and conditional-condition evaluations.
ATOMIC_NODES = (st.Apply, st.All, st.One, st.MatchTest, st.MatchRew,
                st.Cond, st.Bang, st.Congruence, st.GtAll, st.GtOne, st.GtSome)


class State:
    """Machine state: subject term, current work item, continuation stack.

    The work item is either RET (the current strategy finished) or a tuple
    ('run', strategy, environment, focus position into the subject).
    """

    __slots__ = ('subject', 'control', 'stack', '_hash')

    def __init__(self, subject, control, stack):
        self.subject = subject
        self.control = control
        self.stack = stack
        self._hash = hash((subject, control, stack))

    def __hash__(self):
        return self._hash

    def __eq__(self, other):
        return self is other or (isinstance(other, State)
                                 and self._hash == other._hash
                                 and self.subject == other.subject
                                 and self.control == other.control
                                 and self.stack == other.stack)

    def is_solution(self):
        return self.control is RET and not self.stack

    def __repr__(self):
        return f'State({self.subject!r}, {self.control!r}, depth={len(self.stack)})'


def run(s, env, focus):
    return ('run', s, env, focus)


class Engine:
    """Strategy evaluator bound to one module.

    Caches prepared strategies and atomic evaluation results, so reusing an
    engine across commands on the same module pays off.
    """

    def __init__(self, mod: ModuleDef, native_extended=False,
                 step_limit=DEFAULT_STEP_BUDGET, state_limit=DEFAULT_STATE_BUDGET):
        self.mod = mod
        self.sig = mod.signature
        self.native_extended = native_extended
        self.counter = RewriteCounter(step_limit)
        self.state_limit = state_limit
        self._prepared = {}    # id(node) -> (node, prepared)
        self._derived = {}     # (id(node), extra...) -> (node, derived)
        self._freevars = {}    # id(node) -> (node, frozenset of names)
        self._sols = {}        # (id(node), term, env) -> tuple of terms
        self._depth = 0
        self.work_used = 0

    def charge(self, amount=1):
        """Account exploration work against the state budget; shared by all
        nested searches of this engine so conditions cannot multiply it."""
        self.work_used += amount
        if self.work_used > self.state_limit:
            raise SearchLimitError(
                f'state budget of {self.state_limit} exceeded')

    # ------------------------------------------------------------------
    # Strategy preparation

    def prepare(self, s: st.StratExpr) -> st.StratExpr:
        hit = self._prepared.get(id(s))
        if hit is not None:
            return hit[1]
        out = s if self.native_extended else translate_extended(s, self.mod)
        out = st.desugar(out)
        self._prepared[id(s)] = (s, out)
        return out

    def prepared_def_body(self, d):
        hit = self._prepared.get(id(d))
        if hit is not None:
            return hit[1]
        out = st.desugar(d.body if self.native_extended
                         else translate_extended(d.body, self.mod))
        self._prepared[id(d)] = (d, out)
        return out

    def _derive(self, key, builder):
        hit = self._derived.get(key)
        if hit is not None:
            return hit[1]
        node = builder()
        self._derived[key] = (key, node)
        return node

    def _free_names(self, s):
        hit = self._freevars.get(id(s))
        if hit is not None:
            return hit[1]
        names = st.free_var_names(s)
        self._freevars[id(s)] = (s, names)
        return names

    # ------------------------------------------------------------------
    # Public evaluation entry points

    def rewrite(self, t: Term, s: st.StratExpr, depth_first=False):
        """All distinct result terms of executing s on t (lazy)."""
        t = normalize(self.mod, t, self.counter)
        yield from self._explore(t, self.prepare(s), Subst.EMPTY, depth_first)

    def solution_set(self, t: Term, s: st.StratExpr, env: Subst):
        """Cached full solution set of a prepared strategy on a term."""
        key = (id(s), t, env.restrict(self._free_names(s)))
        hit = self._sols.get(key)
        if hit is None:
            self._depth += 1
            if self._depth > MAX_COND_DEPTH:
                raise SearchLimitError('strategy evaluation nested too deeply')
            try:
                hit = tuple(self._explore(t, s, env, depth_first=False))
            finally:
                self._depth -= 1
            self._sols[key] = hit
        return hit

    def first_solution(self, t: Term, s: st.StratExpr, env: Subst):
        """First solution in deterministic depth-first order, or None."""
        sols = self.solution_set(t, s, env)
        if not sols:
            return None
        for u in self._explore(t, s, env, depth_first=True):
            return u
        return None

    # ------------------------------------------------------------------
    # Graph exploration

    def _explore(self, t, s, env, depth_first):
        start = State(t, run(s, env, ()), ())
        frontier = deque((start,))
        seen = {start}
        emitted = set()
        pop = frontier.pop if depth_first else frontier.popleft
        while frontier:
            state = pop()
            self.charge()
            if state.is_solution():
                if state.subject not in emitted:
                    emitted.add(state.subject)
                    yield state.subject
                continue
            succs = self.step(state)
            if depth_first:
                succs = reversed(succs)
            for _, _, nxt in succs:
                if nxt not in seen:
                    seen.add(nxt)
                    frontier.append(nxt)

    # ------------------------------------------------------------------
    # The step relation

    def ms_ready(self, state: State) -> bool:
        """Whether the next step of this state is an atomic (system) one
        under the interleaving granularity.  A conditional whose condition
        has no result is not: it dispatches to its else branch as a
        bookkeeping step (and the thread stalls if nothing follows)."""
        if state.control is RET:
            return False
        _, s, env, focus = state.control
        if not isinstance(s, ATOMIC_NODES):
            return False
        if isinstance(s, (st.Cond, st.Bang)):
            base = subterm_at(self.sig, state.subject, focus)
            test = s.test if isinstance(s, st.Cond) else s.body
            return bool(self.solution_set(base, test, env))
        return True

    def step(self, state: State, ms=False):
        """All one-step successors as (class, label, state) triples.

        With ms=True, tests, matchrews, traversal operators, and conditional
        condition evaluations are executed atomically as system steps (the
        interleaving granularity); otherwise they are decomposed and only
        rule applications change the subject term.
        """
        control = state.control
        if control is RET:
            return self._pop(state)
        _, s, env, focus = control
        subject, stack = state.subject, state.stack

        if isinstance(s, st.Idle):
            return [(CONTROL, None, State(subject, RET, stack))]
        if isinstance(s, st.Fail):
            return []
        if isinstance(s, st.Seq):
            frame = ('seq', s.right, env, focus)
            return [(CONTROL, None,
                     State(subject, run(s.left, env, focus), stack + (frame,)))]
        if isinstance(s, st.Choice):
            out = []
            for branch in (s.left, s.right):
                if not isinstance(branch, st.Fail):
                    out.append((CONTROL, None, State(subject, run(branch, env, focus), stack)))
            return out
        if isinstance(s, st.Star):
            unroll = State(subject, run(s.body, env, focus),
                           stack + (('seq', s, env, focus),))
            return [(CONTROL, None, State(subject, RET, stack)),
                    (CONTROL, None, unroll)]
        if isinstance(s, st.Call):
            return self._step_call(state, s, env, focus)
        if isinstance(s, st.Apply):
            return self._step_apply(state, s, env, focus)
        if isinstance(s, st.All):
            results = apply_all(self.mod, subject, self.counter, focus)
            return [(SYSTEM, 'all', State(u, RET, stack)) for u in results]
        if isinstance(s, st.One):
            base = subterm_at(self.sig, subject, focus)
            first = self.first_solution(base, s.body, env)
            if first is None:
                return []
            result = normalize(self.mod, replace_at(self.sig, subject, focus, first),
                               self.counter)
            return [(SYSTEM, describe_action(s.body), State(result, RET, stack))]
        if isinstance(s, st.Bang):
            equivalent = self._derive((id(s), 'bang'), lambda: st.Cond(s.body, s, st.IDLE))
            return self.step(State(subject, run(equivalent, env, focus), stack), ms)
        if isinstance(s, st.Cond):
            return self._step_cond(state, s, env, focus, ms)
        if isinstance(s, st.MatchTest):
            ok = self._test(subject, s, env, focus)
            cls = SYSTEM if ms else CONTROL
            return [(cls, 'match', State(subject, RET, stack))] if ok else []
        if isinstance(s, st.MatchRew):
            if ms:
                return self._atomic(state, s, env, focus)
            return self._step_matchrew(state, s, env, focus)
        if isinstance(s, (st.Congruence, st.GtAll, st.GtOne, st.GtSome)):
            if ms:
                return self._atomic(state, s, env, focus)
            return self._step_traversal(state, s, env, focus)
        raise StrewError(f'cannot execute strategy node {type(s).__name__}')

    def _pop(self, state):
        if not state.stack:
            return []
        frame = state.stack[-1]
        below = state.stack[:-1]
        if frame[0] == 'seq':
            _, strat, env, focus = frame
            return [(CONTROL, None, State(state.subject, run(strat, env, focus), below))]
        if frame[0] == 'mr':
            _, rest, env = frame
            focus, strat = rest[0]
            remaining = rest[1:]
            stack = below + (('mr', remaining, env),) if remaining else below
            return [(CONTROL, None, State(state.subject, run(strat, env, focus), stack))]
        raise StrewError(f'unknown continuation frame {frame[0]}')

    # -- rule application ------------------------------------------------

    def _step_apply(self, state, s, env, focus):
        init = {}
        for var, expr in s.init:
            init[var] = normalize(self.mod, env.apply(self.sig, expr), self.counter)
        init = Subst(init) if init else Subst.EMPTY
        out, seen = [], set()
        for rule in self.mod.rules_for_label(s.label):
            for u in apply_rule(self.mod, state.subject, rule, init, s.top,
                                self.counter, focus):
                if u not in seen:
                    seen.add(u)
                    out.append((SYSTEM, s.label, State(u, RET, state.stack)))
        return out

    # -- calls -------------------------------------------------------------

    def _step_call(self, state, s, env, focus):
        args = tuple(normalize(self.mod, env.apply(self.sig, a), self.counter)
                     for a in s.args)
        out = []
        for d in self.mod.strat_defs_for(s.name):
            if len(d.params) != len(args):
                continue
            for m in match_many(self.sig, d.params, args):
                for subst in check_condition(self.mod, d.condition, m.subst,
                                             self.counter):
                    body = self.prepared_def_body(d)
                    out.append((CONTROL, None,
                                State(state.subject, run(body, subst, focus),
                                      state.stack)))
        return out

    # -- tests and conditionals -------------------------------------------

    def _test(self, subject, s, env, focus):
        base = subterm_at(self.sig, subject, focus)
        pattern = env.apply(self.sig, s.pattern)
        if s.anywhere:
            pairs = search(self.sig, pattern, base)
        else:
            pairs = [((), m) for m in match_root(self.sig, pattern, base)]
        for _, m in pairs:
            if check_condition(self.mod, s.condition, env.union(m.subst),
                               self.counter):
                return True
        return False

    def _step_cond(self, state, s, env, focus, ms):
        base = subterm_at(self.sig, state.subject, state.control[3])
        if ms:
            # Atomic condition evaluation: branch to the then-continuation
            # per condition result; dispatching to the else branch when
            # there is none is mere bookkeeping
            label = describe_action(s.test)
            sols = self.solution_set(base, s.test, env)
            if not sols:
                return [(CONTROL, None,
                         State(state.subject, run(s.other, env, focus), state.stack))]
            out = []
            for u in sols:
                subject = normalize(self.mod,
                                    replace_at(self.sig, state.subject, focus, u),
                                    self.counter)
                out.append((SYSTEM, label,
                            State(subject, run(s.then, env, focus), state.stack)))
            return out
        if self.solution_set(base, s.test, env):
            chosen = self._derive((id(s), 'then'), lambda: st.Seq(s.test, s.then))
        else:
            chosen = s.other
        return [(CONTROL, None, State(state.subject, run(chosen, env, focus),
                                      state.stack))]

    # -- matchrew ----------------------------------------------------------

    def _step_matchrew(self, state, s, env, focus):
        subject = state.subject
        base = subterm_at(self.sig, subject, focus)
        pattern = env.apply(self.sig, s.pattern)
        slot_vars = frozenset(v.name for v, _ in s.slots)
        if s.anywhere:
            pairs = search(self.sig, pattern, base, track=slot_vars)
        else:
            pairs = [((), m) for m in match_root(self.sig, pattern, base, track=slot_vars)]
        out = []
        for pos, m in pairs:
            for subst in check_condition(self.mod, s.condition,
                                         env.union(m.subst), self.counter):
                at = compose_pos(self.sig, subject, focus, pos)
                slots = []
                for v, strat in s.slots:
                    rel = m.var_pos.get(v.name)
                    if rel is None:
                        raise StrewError(
                            f'matchrew variable {v.name} not bound by its pattern')
                    slots.append((compose_pos(self.sig, subject, at, rel), strat))
                self._check_slot_independence(slots)
                first_focus, first_strat = slots[0]
                rest = tuple(slots[1:])
                stack = state.stack + (('mr', rest, subst),) if rest else state.stack
                out.append((CONTROL, None,
                            State(subject, run(first_strat, subst, first_focus), stack)))
        return out

    def _check_slot_independence(self, slots):
        # In-place slot rewriting needs stable positions: selections inside a
        # commutative collection may shift when a sibling slot rewrites, so
        # several of them in one matchrew are not supported
        from .terms import Seg
        seg_slots = sum(1 for focus, _ in slots
                        if focus and isinstance(focus[-1], Seg)
                        and self.sig.axioms(focus[-1].op)[1])
        if seg_slots > 1 or (seg_slots == 1 and len(slots) > 1):
            raise StrewError('multiple rewriting slots inside a commutative '
                             'collection are not supported')

    # -- traversal / congruence operators (native semantics) ---------------

    def _step_traversal(self, state, s, env, focus):
        subject = state.subject
        base = subterm_at(self.sig, subject, focus)
        if isinstance(s, st.Congruence):
            node = self._congruence_matchrew(s)
            return self.step(State(subject, run(node, env, focus), state.stack))
        if not isinstance(base, App) or not self.sig.is_ctor(base.op):
            return []
        decls = [d for d in self.sig.ops_by_name[base.op] if d.ctor]
        if isinstance(s, st.GtAll):
            if not base.children:
                return [(CONTROL, None, State(subject, RET, state.stack))]
            node = self._derive((id(s), 'all', base.op), lambda: self._choice(
                [st.Congruence(d.name, (s.body,) * d.arity)
                 for d in decls if d.arity > 0]))
            return self.step(State(subject, run(node, env, focus), state.stack))
        if isinstance(s, st.GtOne):
            if not base.children:
                return []
            node = self._derive((id(s), 'one', base.op),
                                lambda: self._gt_one_chain(s.body, decls))
            return self.step(State(subject, run(node, env, focus), state.stack))
        # gt-some: apply the body to every child where it succeeds, and
        # require at least one such child
        arities = {d.arity for d in decls}
        if not base.children or len(base.children) not in arities:
            # Flattened collections go through the defining expansion
            node = self._derive((id(s), 'some'), lambda: st.desugar(
                st.Seq(st.Test(st.GtOne(s.body)), st.GtAll(st.Try(s.body)))))
            return self.step(State(subject, run(node, env, focus), state.stack))
        chosen = []
        for i, child in enumerate(base.children):
            if self.solution_set(child, s.body, env):
                chosen.append(i)
        if not chosen:
            return []
        slots = [(compose_pos(self.sig, subject, focus, (i,)), s.body) for i in chosen]
        first_focus, first_strat = slots[0]
        rest = tuple(slots[1:])
        stack = state.stack + (('mr', rest, env),) if rest else state.stack
        return [(CONTROL, None, State(subject, run(first_strat, env, first_focus), stack))]

    def _congruence_matchrew(self, s: st.Congruence):
        def build():
            decls = [d for d in self.sig.ops_by_name.get(s.op, ()) if d.ctor]
            branches = []
            for d in decls:
                if d.arity != len(s.args):
                    continue
                if d.arity == 0:
                    branches.append(st.MatchTest(False, self.sig.make_app(s.op, ())))
                    continue
                xs = [fresh_var(a) for a in d.arg_sorts]
                pattern = self.sig.make_app(s.op, xs)
                slots = tuple(zip(xs, s.args))
                branches.append(st.MatchRew(False, pattern, (), slots))
            if not branches:
                raise StrewError(f'{s.op} is not a constructor')
            return self._choice(branches)
        return self._derive((id(s), 'cong'), build)

    def _gt_one_chain(self, body, decls):
        branches = []
        for d in decls:
            if d.arity == 0:
                continue
            for i in range(d.arity):
                args = tuple(body if j == i else st.IDLE for j in range(d.arity))
                branches.append(st.Congruence(d.name, args))
        if not branches:
            return st.FAIL
        chain = branches[-1]
        for b in reversed(branches[:-1]):
            chain = st.Cond(b, st.IDLE, chain)
        return chain

    @staticmethod
    def _choice(branches):
        if not branches:
            return st.FAIL
        out = branches[-1]
        for b in reversed(branches[:-1]):
            out = st.Choice(b, out)
        return out

    # -- atomic evaluation (interleaving granularity) -----------------------

    def _atomic(self, state, s, env, focus):
        base = subterm_at(self.sig, state.subject, focus)
        out = []
        for u in self.solution_set(base, s, env):
            subject = normalize(self.mod,
                                replace_at(self.sig, state.subject, focus, u),
                                self.counter)
            out.append((SYSTEM, describe_action(s), State(subject, RET, state.stack)))
        return out


# ----------------------------------------------------------------------
# Module-level convenience entry points

def srewrite(t: Term, s: st.StratExpr, mod: ModuleDef, depth_first=False,
             native_extended=False, engine: Engine | None = None) -> list[Term]:
    """All distinct results of executing the strategy on the term, in
    breadth-first (or depth-first) exploration order."""
    eng = engine or Engine(mod, native_extended=native_extended)
    return list(eng.rewrite(t, s, depth_first))


def step_successors(state: State, mod: ModuleDef, engine: Engine | None = None):
    """Classified one-step successors of a machine state."""
    eng = engine or Engine(mod)
    return [(cls, nxt) for cls, _, nxt in eng.step(state)]


def atomic_successors(t: Term, s: st.StratExpr, mod: ModuleDef,
                      engine: Engine | None = None) -> list[Term]:
    """Full solution set of an atomic strategy run to completion."""
    eng = engine or Engine(mod)
    return list(eng.solution_set(normalize(mod, t, eng.counter),
                                 eng.prepare(s), Subst.EMPTY))
