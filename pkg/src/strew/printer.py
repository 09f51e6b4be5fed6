#
# Pretty printing of terms and strategy expressions, close to the surface
# syntax the parser accepts (parse . print is the identity on ASTs).
#

from __future__ import annotations

from . import strategy as st
from .module import ConditionFragment
from .terms import App, Term, Var

# Binding strength of term forms (higher binds tighter)
JUXT_PREC = 60
CONS_PREC = 50
DEFAULT_INFIX_PREC = 45
ADD_PREC = 40
CMP_PREC = 30
PREFIX_PREC = 25
AND_PREC = 20
XOR_PREC = 18
OR_PREC = 16
ORELSE_PREC = 14

INFIX_PRECS = {
    ':': CONS_PREC, '+': ADD_PREC, 'rem': ADD_PREC,
    '==': CMP_PREC, '=/=': CMP_PREC, '>=': CMP_PREC, '>': CMP_PREC,
    '<=': CMP_PREC, '<': CMP_PREC,
    'and': AND_PREC, 'xor': XOR_PREC, 'or': OR_PREC,
    'or-else': ORELSE_PREC, 'and-then': ORELSE_PREC,
}


def infix_token(op):
    """The middle token of an operator written _tok_, or None."""
    if len(op) > 2 and op.startswith('_') and op.endswith('_'):
        inner = op[1:-1]
        if inner and '_' not in inner:
            return inner
    return None


def infix_prec(op):
    tok = infix_token(op)
    if tok is None:
        return None
    return INFIX_PRECS.get(tok, DEFAULT_INFIX_PREC)


def as_numeral(t: Term):
    """Collapse a ground Peano chain s_^n(0) to n, or None."""
    n = 0
    while isinstance(t, App) and t.op == 's_' and len(t.children) == 1:
        n += 1
        t = t.children[0]
    if isinstance(t, App) and t.op == '0' and not t.children:
        return n
    return None


def print_term(t: Term, prec: int = 0) -> str:
    if isinstance(t, Var):
        return t.name
    num = as_numeral(t)
    if num is not None:
        return str(num)
    op = t.op
    if not t.children:
        return op
    if op.startswith('[') and op.endswith(']') and set(op[1:-1]) <= {'_', ','}:
        return '[' + ', '.join(print_term(c) for c in t.children) + ']'
    if op == '__':
        body = ' '.join(print_term(c, JUXT_PREC + 1) for c in t.children)
        return f'({body})' if prec > JUXT_PREC else body
    tok = infix_token(op)
    if tok is not None and len(t.children) >= 2:
        p = INFIX_PRECS.get(tok, DEFAULT_INFIX_PREC)
        parts = [print_term(t.children[0], p + 1)]
        for c in t.children[1:]:
            parts.append(print_term(c, p))
        body = f' {tok} '.join(parts)
        return f'({body})' if prec > p else body
    if op.endswith('_') and '_' not in op[:-1] and len(t.children) == 1:
        body = f'{op[:-1]} {print_term(t.children[0], PREFIX_PREC + 1)}'
        return f'({body})' if prec > PREFIX_PREC else body
    return f'{op}({", ".join(print_term(c) for c in t.children)})'


def print_condition(fragments) -> str:
    parts = []
    for frag in fragments:
        if frag.kind == ConditionFragment.EQUALITY:
            if isinstance(frag.rhs, App) and frag.rhs.op == 'true' and not frag.rhs.children \
                    and not (isinstance(frag.lhs, App) and frag.lhs.op == 'true'):
                parts.append(print_term(frag.lhs))
            else:
                parts.append(f'{print_term(frag.lhs)} = {print_term(frag.rhs)}')
        elif frag.kind == ConditionFragment.ASSIGNMENT:
            parts.append(f'{print_term(frag.lhs)} := {print_term(frag.rhs)}')
        else:
            parts.append(f'{print_term(frag.lhs)} : {frag.sort}')
    return ' /\\ '.join(parts)


# Strategy precedences (higher binds tighter)
S_PRIMARY, S_POSTFIX, S_SEQ, S_CHOICE, S_ORELSE, S_COND = 100, 90, 70, 60, 55, 50


def print_strategy(s: st.StratExpr, prec: int = 0) -> str:
    def wrap(body, own):
        return f'({body})' if prec > own else body

    if isinstance(s, st.Idle):
        return 'idle'
    if isinstance(s, st.Fail):
        return 'fail'
    if isinstance(s, st.All):
        return 'all'
    if isinstance(s, st.Apply):
        body = s.label
        if s.init:
            inner = ', '.join(f'{v.name} <- {print_term(t)}' for v, t in s.init)
            body = f'{s.label}[{inner}]'
        return f'top({body})' if s.top else body
    if isinstance(s, st.MatchTest):
        kw = 'amatch' if s.anywhere else 'match'
        body = f'{kw} {print_term(s.pattern)}'
        if s.condition:
            body += f' s.t. {print_condition(s.condition)}'
        return wrap(body, S_COND)
    if isinstance(s, st.Seq):
        body = f'{print_strategy(s.left, S_SEQ)} ; {print_strategy(s.right, S_SEQ + 1)}'
        return wrap(body, S_SEQ)
    if isinstance(s, st.Choice):
        body = f'{print_strategy(s.left, S_CHOICE)} | {print_strategy(s.right, S_CHOICE + 1)}'
        return wrap(body, S_CHOICE)
    if isinstance(s, st.OrElse):
        body = f'{print_strategy(s.left, S_ORELSE)} or-else {print_strategy(s.right, S_ORELSE + 1)}'
        return wrap(body, S_ORELSE)
    if isinstance(s, st.Star):
        return wrap(f'{print_strategy(s.body, S_POSTFIX + 1)} *', S_POSTFIX)
    if isinstance(s, st.Bang):
        return wrap(f'{print_strategy(s.body, S_POSTFIX + 1)} !', S_POSTFIX)
    if isinstance(s, st.Cond):
        body = (f'{print_strategy(s.test, S_COND + 1)} ? {print_strategy(s.then, S_COND + 1)}'
                f' : {print_strategy(s.other, S_COND)}')
        return wrap(body, S_COND)
    if isinstance(s, st.One):
        return f'one({print_strategy(s.body)})'
    if isinstance(s, st.Try):
        return f'try({print_strategy(s.body)})'
    if isinstance(s, st.Not):
        return f'not({print_strategy(s.body)})'
    if isinstance(s, st.Test):
        return f'test({print_strategy(s.body)})'
    if isinstance(s, st.MatchRew):
        kw = 'amatchrew' if s.anywhere else 'matchrew'
        body = f'{kw} {print_term(s.pattern)}'
        if s.condition:
            body += f' s.t. {print_condition(s.condition)}'
        slots = ', '.join(f'{v.name} using {print_strategy(a, S_COND)}'
                          for v, a in s.slots)
        return wrap(f'{body} by {slots}', S_COND)
    if isinstance(s, st.Call):
        if not s.args:
            return s.name
        return f'{s.name}({", ".join(print_term(a) for a in s.args)})'
    if isinstance(s, st.Congruence):
        if not s.args:
            return s.op
        return f'{s.op}({", ".join(print_strategy(a) for a in s.args)})'
    if isinstance(s, st.GtAll):
        return f'gt-all({print_strategy(s.body)})'
    if isinstance(s, st.GtOne):
        return f'gt-one({print_strategy(s.body)})'
    if isinstance(s, st.GtSome):
        return f'gt-some({print_strategy(s.body)})'
    raise TypeError(f'cannot print {s!r}')
