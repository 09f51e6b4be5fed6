#
# Context-sensitive rewriting: replacement maps derived from evaluation
# strategy and frozen annotations, rewriting restricted to replacing
# positions, and the module transformation generating the layered
# normalization strategies (norm-via-munorm, munorm, decomp).
#

from __future__ import annotations

from . import strategy as st
from .engine import Engine
from .errors import TransformError
from .matching import match_root
from .module import ModuleDef, Rule, StratDecl, StratDef
from .rewriting import RewriteCounter, check_condition
from .strategy import StratExpr
from .terms import OpDecl, Signature, Term, Var, replace_at, subterm_at

ANY_TERM_SORT = 'AnyTerm'
ENTRY_STRAT = 'norm-via-munorm'
MU_STRAT = 'munorm'
DECOMP_STRAT = 'decomp'


class ReplacementMap:
    """Per-operator set of argument indices where rewriting is allowed"""

    def __init__(self, table):
        self.table = dict(table)       # (name, arity) -> frozenset of 1-based indices

    def of(self, name, arity):
        hit = self.table.get((name, arity))
        if hit is not None:
            return hit
        return frozenset(range(1, arity + 1))

    def __eq__(self, other):
        return isinstance(other, ReplacementMap) and self.table == other.table

    def __repr__(self):
        inner = ', '.join(f'{n}/{a}: {sorted(v)}'
                          for (n, a), v in sorted(self.table.items()))
        return '{' + inner + '}'


def replacement_map(sig: Signature) -> ReplacementMap:
    """Replacing argument indices per operator: the evaluation strategy
    indices minus the frozen ones (full set by default; when both
    annotations appear the frozen indices still win)."""
    table = {}
    for decl in sig.ops:
        if decl.eval_strategy is None and not decl.frozen_args:
            continue
        allowed = set(decl.eval_strategy) if decl.eval_strategy is not None \
            else set(range(1, decl.arity + 1))
        allowed -= decl.frozen_args
        key = (decl.name, decl.arity)
        table[key] = table.get(key, frozenset()) | frozenset(allowed)
    return ReplacementMap(table)


def mu_positions(t: Term, mu: ReplacementMap) -> set[tuple]:
    """Replacing positions of a term: the root, plus the replacing argument
    positions recursively.  Flattened argument lists of associative
    operators use the declared indices directly when they fit, and allow
    every argument otherwise."""
    out = set()

    def walk(t, path):
        out.add(path)
        if isinstance(t, Var):
            return
        allowed = mu.of(t.op, len(t.children))
        for i, c in enumerate(t.children):
            if i + 1 in allowed:
                walk(c, path + (i,))

    walk(t, ())
    return out


def mu_normalize(t: Term, mod: ModuleDef,
                 counter: RewriteCounter | None = None) -> Term:
    """Exhaustive reduction at replacing positions only, applying equations
    and rules directly on the position-restricted term (independent of the
    strategy engine, which reproduces it through the generated module)."""
    if counter is None:
        counter = RewriteCounter()
    sig = mod.signature
    mu = replacement_map(sig)
    statements = [(eq.lhs, eq.rhs, eq.condition) for eq in mod.equations] + \
                 [(rl.lhs, rl.rhs, rl.condition) for rl in mod.executable_rules()]
    current = t
    while True:
        reduct = None
        for pos in sorted(mu_positions(current, mu), key=lambda p: (-len(p), p)):
            sub = subterm_at(sig, current, pos)
            for lhs, rhs, condition in statements:
                for m in match_root(sig, lhs, sub):
                    for subst in check_condition(mod, condition, m.subst, counter):
                        reduct = replace_at(sig, current, pos, subst.apply(sig, rhs))
                        break
                    if reduct is not None:
                        break
                if reduct is not None:
                    break
            if reduct is not None:
                break
        if reduct is None:
            return current
        counter.tick()
        current = reduct


def eqs_to_rules(equations) -> list[Rule]:
    """Orient every equation as an unlabeled rule (same conditions)."""
    return [Rule(None, eq.lhs, eq.rhs, eq.condition) for eq in equations]


def csr_transform(mod: ModuleDef) -> ModuleDef:
    """Strategy module <name>-CSR with the equations turned into rules,
    evaluation strategy attributes turned into frozen sets, and the layered
    normalization strategies declared and defined."""
    for eq in mod.equations:
        if eq.owise:
            raise TransformError(
                'cannot transform a module with owise equations')
    sig = mod.signature
    mu = replacement_map(sig)
    out_sig = Signature()
    out_sig.add_sort(ANY_TERM_SORT)
    for s in sig.sorts:
        out_sig.add_sort(s)
    for pair in sorted(sig.subsort_pairs):
        out_sig.add_subsort(*pair)
    for decl in sig.ops:
        frozen = frozenset(range(1, decl.arity + 1)) - mu.of(decl.name, decl.arity)
        out_sig.add_op(OpDecl(decl.name, decl.arg_sorts, decl.result_sort,
                              ctor=decl.ctor, assoc=decl.assoc, comm=decl.comm,
                              identity=decl.identity, frozen_args=frozen,
                              partial=decl.partial),
                       dedup=True)
    out = ModuleDef(f'{mod.name}-CSR', 'strategy', out_sig)
    out.var_table = dict(mod.var_table)
    for rl in mod.rules:
        out.add_rule(rl)
    for rl in eqs_to_rules(mod.equations):
        out.add_rule(rl)
    out.strat_decls = list(mod.strat_decls) + [
        StratDecl(ENTRY_STRAT, (), ANY_TERM_SORT),
        StratDecl(MU_STRAT, (), ANY_TERM_SORT),
        StratDecl(DECOMP_STRAT, (), ANY_TERM_SORT),
    ]
    out.strat_defs = list(mod.strat_defs) + [
        StratDef(ENTRY_STRAT, (), st.Seq(st.Call(MU_STRAT), st.Call(DECOMP_STRAT))),
        StratDef(MU_STRAT, (), st.Bang(st.One(st.ALL))),
        StratDef(DECOMP_STRAT, (), make_decomp(out_sig)),
    ]
    out.props = list(mod.props)
    return out


def make_decomp(sig: Signature) -> StratExpr:
    """Disjunction over the operator declarations resuming normalization in
    every argument: a matchrew over sequentially numbered variables per
    non-constant operator, and a match test per constant."""
    branch = st.FAIL
    for decl in reversed(sig.ops):
        if decl.arity == 0:
            test = st.MatchTest(False, sig.make_app(decl.name, ()))
            branch = st.Choice(test, branch)
        else:
            xs = [Var(f'X{i + 1}', sort) for i, sort in enumerate(decl.arg_sorts)]
            pattern = sig.make_app(decl.name, xs)
            slots = tuple((x, st.Call(ENTRY_STRAT)) for x in xs)
            branch = st.Choice(st.MatchRew(False, pattern, (), slots), branch)
    return branch


_transform_cache = {}


def transformed(mod: ModuleDef) -> ModuleDef:
    hit = _transform_cache.get(id(mod))
    if hit is None or hit[0] is not mod:
        hit = (mod, csr_transform(mod))
        _transform_cache[id(mod)] = hit
    return hit[1]


def layered_normalize(t: Term, mod: ModuleDef,
                      engine: Engine | None = None) -> list[Term]:
    """Results of the generated entry strategy in the transformed module
    (normalization via repeated inner-layer normalization)."""
    target = transformed(mod)
    eng = engine if engine is not None and engine.mod is target else Engine(target)
    return list(eng.rewrite(t, st.Call(ENTRY_STRAT)))
