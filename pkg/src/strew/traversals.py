#
# Signature-dependent strategy operators: congruence homonyms of the data
# constructors and the generic traversals gt-all/gt-one/gt-some, compiled
# away into the core language (the engine also interprets them natively;
# both routes are cross-checked in the tests).
#

from __future__ import annotations

import itertools

from . import strategy as st
from .errors import StrewError
from .module import ModuleDef
from .terms import Signature, Var

_fresh_counter = itertools.count(1)


def fresh_var(sort: str) -> Var:
    """Globally fresh variable; numbering is shared by every translation so
    nested generated binders never capture each other."""
    return Var(f'%X{next(_fresh_counter)}', sort)


def congruence_ops(sig: Signature) -> list[tuple[str, int]]:
    """(name, arity) of the strategy homonyms generated for the data
    constructors, deduplicated across overloads."""
    out, seen = [], set()
    for d in sig.ops:
        if d.ctor and (d.name, d.arity) not in seen:
            seen.add((d.name, d.arity))
            out.append((d.name, d.arity))
    return out


def ctor_decls(sig: Signature, name=None):
    if name is None:
        return [d for d in sig.ops if d.ctor]
    return [d for d in sig.ops_by_name.get(name, ()) if d.ctor]


def _choice(branches):
    if not branches:
        return st.FAIL
    out = branches[-1]
    for b in reversed(branches[:-1]):
        out = st.Choice(b, out)
    return out


def _orelse(branches):
    if not branches:
        return st.FAIL
    out = branches[-1]
    for b in reversed(branches[:-1]):
        out = st.OrElse(b, out)
    return out


def translate_extended(s: st.StratExpr, mod: ModuleDef) -> st.StratExpr:
    """Rewrite congruence and traversal operators into the core language.

    A congruence f(a1, ..., an) becomes a matchrew over a fresh-variable
    pattern f(x1, ..., xn) rewriting xi using ai (one branch per overloaded
    constructor declaration, joined as a disjunction; constants become
    match tests).  gt-all(a) becomes the disjunction of f(a, ..., a) over
    every constructor; gt-one(a) the disjunction over non-constant
    constructors of f(a, idle, ...) or-else ... or-else f(idle, ..., a);
    and gt-some(a) expands to test(gt-one(a)) ; gt-all(try(a)).
    """
    sig = mod.signature

    def tr(e):
        if isinstance(e, st.Congruence):
            args = tuple(tr(a) for a in e.args)
            decls = [d for d in ctor_decls(sig, e.op) if d.arity == len(args)]
            if not decls:
                raise StrewError(
                    f'{e.op}/{len(args)} is not a data constructor')
            branches = []
            for d in decls:
                if d.arity == 0:
                    branches.append(st.MatchTest(False, sig.make_app(e.op, ())))
                    continue
                xs = [fresh_var(sort) for sort in d.arg_sorts]
                pattern = sig.make_app(e.op, xs)
                branches.append(st.MatchRew(False, pattern, (), tuple(zip(xs, args))))
            return _choice(branches)
        if isinstance(e, st.GtAll):
            body = tr(e.body)
            branches = []
            for name, arity in congruence_ops(sig):
                if arity == 0:
                    branches.append(st.MatchTest(False, sig.make_app(name, ())))
                else:
                    branches.append(tr(st.Congruence(name, (body,) * arity)))
            return _choice(branches)
        if isinstance(e, st.GtOne):
            body = tr(e.body)
            branches = []
            for name, arity in congruence_ops(sig):
                if arity == 0:
                    continue
                alts = []
                for i in range(arity):
                    args = tuple(body if j == i else st.IDLE for j in range(arity))
                    alts.append(tr(st.Congruence(name, args)))
                branches.append(_orelse(alts))
            return _choice(branches)
        if isinstance(e, st.GtSome):
            return tr(st.Seq(st.Test(st.GtOne(e.body)),
                             st.GtAll(st.Try(e.body))))
        return st.map_children(e, tr)

    return tr(s)


def eval_extended_native(t, s, mod: ModuleDef, depth_first=False):
    """Execute a strategy with the built-in semantics of the extension
    operators (no translation step)."""
    from .engine import Engine
    eng = Engine(mod, native_extended=True)
    return list(eng.rewrite(t, s, depth_first))
