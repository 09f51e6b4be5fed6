#
# Equational normalization honoring per-operator evaluation strategies and
# owise equations, condition checking, and one-step rule application.
#

from __future__ import annotations

from .errors import InstantiationError, NonTerminationError
from .matching import match_root, search
from .module import ConditionFragment, ModuleDef, Rule
from .terms import App, Subst, Term, Var, compose_pos, replace_at, subterm_at, term_vars

DEFAULT_STEP_BUDGET = 10 ** 6

TRUE_OP, FALSE_OP = 'true', 'false'
EQ_OP, NEQ_OP = '_==_', '_=/=_'


class RewriteCounter:
    """Shared rewrite-step budget for one command or search"""

    __slots__ = ('limit', 'count')

    def __init__(self, limit=DEFAULT_STEP_BUDGET):
        self.limit = limit
        self.count = 0

    def tick(self, n=1):
        self.count += n
        if self.count > self.limit:
            raise NonTerminationError(
                f'rewrite step budget of {self.limit} exceeded')


def normalize(mod: ModuleDef, t: Term, counter: RewriteCounter | None = None,
              order='lr') -> Term:
    """Normal form of t under the oriented equations, evaluating arguments
    innermost following each operator's evaluation strategy (default
    1 .. n 0); owise equations apply at a position only after the plain
    ones failed there.  order='rl' reverses the argument evaluation order
    (a test hook; equal results on confluent systems)."""
    if counter is None:
        counter = RewriteCounter()
    cache = mod._nf_cache.setdefault(order, {})
    try:
        return _nf(mod, t, counter, order, cache)
    except RecursionError:
        # Ever-growing reducts nest faster than they tick the budget
        raise NonTerminationError(
            'normalization produced unboundedly nested terms') from None


def _nf(mod, t, counter, order, cache):
    if isinstance(t, Var):
        return t
    hit = cache.get(t)
    if hit is not None:
        return hit
    sig = mod.signature
    strat = sig.eval_strategy_of(t.op)
    children = list(t.children)
    decls = sig.ops_by_name.get(t.op)
    decl_arity = decls[0].arity if decls else len(children)
    if strat is None or len(children) != decl_arity:
        indices = list(range(len(children)))
    else:
        indices = [i - 1 for i in strat]
    if order == 'rl':
        indices.reverse()
    for i in indices:
        children[i] = _nf(mod, children[i], counter, order, cache)
    current = sig.make_app(t.op, children)
    if isinstance(current, App):
        reduct = _apply_equation_at_top(mod, current, counter)
        if reduct is not None:
            counter.tick()
            current = _nf(mod, reduct, counter, order, cache)
    cache[t] = current
    if current is not t:
        cache[current] = current
    return current


def _apply_equation_at_top(mod, t, counter):
    sig = mod.signature
    if t.op in (EQ_OP, NEQ_OP) and len(t.children) == 2:
        equal = t.children[0] == t.children[1]
        value = equal if t.op == EQ_OP else not equal
        return sig.make_app(TRUE_OP if value else FALSE_OP, [])
    plain, owise = mod.eqs_for_op(t.op)
    for group in (plain, owise):
        for eq in group:
            for m in match_root(sig, eq.lhs, t):
                for subst in check_condition(mod, eq.condition, m.subst, counter):
                    return subst.apply(sig, eq.rhs)
    return None


def check_condition(mod: ModuleDef, fragments, subst: Subst,
                    counter: RewriteCounter | None = None) -> list[Subst]:
    """All extensions of subst satisfying every fragment left to right.
    Assignment fragments may branch; equalities compare canonical normal
    forms; sort tests compare least sorts."""
    if counter is None:
        counter = RewriteCounter()
    sig = mod.signature
    current = [subst]
    for frag in fragments:
        if not current:
            break
        new = []
        for s in current:
            if frag.kind == ConditionFragment.EQUALITY:
                lhs = normalize(mod, s.apply(sig, frag.lhs), counter)
                rhs = normalize(mod, s.apply(sig, frag.rhs), counter)
                if lhs == rhs:
                    new.append(s)
            elif frag.kind == ConditionFragment.ASSIGNMENT:
                rhs = normalize(mod, s.apply(sig, frag.rhs), counter)
                pattern = s.apply(sig, frag.lhs)
                for m in match_root(sig, pattern, rhs):
                    new.append(s.union(m.subst))
            else:
                value = normalize(mod, s.apply(sig, frag.lhs), counter)
                if sig.leq(sig.least_sort(value), frag.sort):
                    new.append(s)
        current = new
    return current


def rule_matches(mod: ModuleDef, t: Term, rule: Rule, init: Subst,
                 top: bool, focus=()):
    """(position, substitution) pairs for one rule on the subterm at focus,
    positions relative to the whole term t.  Respects frozen arguments
    within the focused subterm."""
    sig = mod.signature
    pattern = init.apply(sig, rule.lhs) if init else rule.lhs
    base = subterm_at(sig, t, focus) if focus else t
    if top:
        pairs = [((), m) for m in match_root(sig, pattern, base)]
    else:
        pairs = search(sig, pattern, base, frozen=sig.frozen_of)
    return [(compose_pos(sig, t, focus, pos), m) for pos, m in pairs]


def apply_rule(mod: ModuleDef, t: Term, rule: Rule, init: Subst = Subst.EMPTY,
               top: bool = False, counter: RewriteCounter | None = None,
               focus=()) -> list[Term]:
    """All one-step rewrites of t with the rule (restricted to the subterm
    at focus), each equationally normalized; duplicate-free, deterministic
    order.  Raises InstantiationError when right-hand side variables remain
    unbound after the initial substitution and matching."""
    if counter is None:
        counter = RewriteCounter()
    sig = mod.signature
    out, seen = [], set()
    for pos, m in rule_matches(mod, t, rule, init, top, focus):
        total = init.union(m.subst) if init else m.subst
        for subst in check_condition(mod, rule.condition, total, counter):
            rhs = subst.apply(sig, rule.rhs)
            free = term_vars(rhs)
            if free:
                names = ', '.join(sorted(v.name for v in free))
                raise InstantiationError(
                    f'rule {rule.label or "(unlabeled)"} applied with unbound '
                    f'right-hand side variables: {names}')
            counter.tick()
            result = normalize(mod, replace_at(sig, t, pos, rhs), counter)
            if result not in seen:
                seen.add(result)
                out.append(result)
    return out


def apply_all(mod: ModuleDef, t: Term, counter: RewriteCounter | None = None,
              focus=()) -> list[Term]:
    """Union of apply_rule over every executable rule, anywhere within the
    focused subterm, respecting frozen arguments; duplicate-free."""
    if counter is None:
        counter = RewriteCounter()
    out, seen = [], set()
    for rule in mod.executable_rules():
        for result in apply_rule(mod, t, rule, top=False, counter=counter,
                                 focus=focus):
            if result not in seen:
                seen.add(result)
                out.append(result)
    return out
