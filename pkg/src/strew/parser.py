#
# Lexer and recursive-descent parsers for the module language, terms,
# strategy expressions, temporal formulas, and session commands.
#
# Tokens follow the usual algebraic-specification convention: the
# characters ( ) [ ] { } , are self-delimiting, everything else is
# whitespace-separated.  Statements end with a lone ` .` token.
#

from __future__ import annotations

import importlib.resources
import re

from . import ltl as lt
from . import multistrat as ms
from . import strategy as st
from .errors import ParseError
from .module import (FUNCTIONAL, STRATEGY, SYSTEM, ConditionFragment,
                     Equation, ModuleDef, PropDef, Rule, StratDecl, StratDef,
                     check_statement_vars)
from .printer import INFIX_PRECS, DEFAULT_INFIX_PREC, JUXT_PREC
from .terms import ANY_SORT, OpDecl, Signature, Term, Var

_TOKEN_RE = re.compile(r'[()\[\]{},]|[^\s()\[\]{},]+')

STAT_KEYWORDS = {
    'sort', 'sorts', 'subsort', 'subsorts', 'op', 'ops', 'var', 'vars',
    'eq', 'ceq', 'rl', 'crl', 'strat', 'strats', 'sd', 'csd', 'prop',
    'protecting', 'extending', 'including', 'mb', 'cmb',
}

ATTR_KEYWORDS = {'ctor', 'assoc', 'comm', 'id:', 'frozen', 'strat',
                 'nonexec', 'owise', ']'}

PREFIX_OPERAND_PREC = JUXT_PREC + 1


class Token:
    __slots__ = ('value', 'line', 'col')

    def __init__(self, value, line, col):
        self.value = value
        self.line = line
        self.col = col

    def __repr__(self):
        return self.value


def tokenize(text: str) -> list[Token]:
    out = []
    for lineno, line in enumerate(text.splitlines(), 1):
        cut = len(line)
        for marker in ('***', '---'):
            found = line.find(marker)
            if found != -1:
                cut = min(cut, found)
        for m in _TOKEN_RE.finditer(line, 0, cut):
            out.append(Token(m.group(), lineno, m.start() + 1))
    return out


class Tokens:
    """Cursor over a token list with error reporting"""

    def __init__(self, toks, pos=0):
        self.toks = toks
        self.pos = pos

    def peek(self, ahead=0):
        i = self.pos + ahead
        return self.toks[i].value if i < len(self.toks) else None

    def next(self):
        if self.pos >= len(self.toks):
            raise ParseError('unexpected end of input')
        tok = self.toks[self.pos]
        self.pos += 1
        return tok

    def at(self, value):
        return self.peek() == value

    def accept(self, value):
        if self.at(value):
            self.pos += 1
            return True
        return False

    def expect(self, value):
        tok = self.peek()
        if tok != value:
            self.error(f'expected {value!r}' + (f', found {tok!r}' if tok else ''))
        self.pos += 1

    def done(self):
        return self.pos >= len(self.toks)

    def error(self, message):
        if self.pos < len(self.toks):
            tok = self.toks[self.pos]
            raise ParseError(message, tok.line, tok.col)
        if self.toks:
            tok = self.toks[-1]
            raise ParseError(message + ' (at end of input)', tok.line, tok.col)
        raise ParseError(message)


# ----------------------------------------------------------------------
# Terms, strategies, conditions, formulas

class ExprParser:
    """Expression-level parsers bound to one module"""

    def __init__(self, tokens: Tokens, mod: ModuleDef, extended=True):
        self.ts = tokens
        self.mod = mod
        self.sig = mod.signature
        self.extended = extended
        self._infix = {}
        for name in self.sig.ops_by_name:
            if len(name) > 2 and name[0] == '_' and name[-1] == '_' \
                    and '_' not in name[1:-1]:
                self._infix[name[1:-1]] = name
        self._has_juxt = '__' in self.sig.ops_by_name

    # -- terms -----------------------------------------------------------

    def parse_term(self, min_prec=0) -> Term:
        left = self.parse_primary()
        while True:
            tok = self.ts.peek()
            if tok is None:
                return left
            if tok in self._infix or tok in ('==', '=/='):
                prec = INFIX_PRECS.get(tok, DEFAULT_INFIX_PREC)
                if prec < min_prec:
                    return left
                self.ts.next()
                right = self.parse_term(prec if tok == ':' else prec + 1)
                name = self._infix.get(tok, f'_{tok}_')
                left = self._build_app(name, [left, right])
                continue
            if self._has_juxt and JUXT_PREC >= min_prec and self._starts_primary(tok):
                right = self.parse_term(JUXT_PREC + 1)
                left = self._build_app('__', [left, right])
                continue
            return left

    def _starts_primary(self, tok):
        if tok == '[':
            # Distinguish bracket terms from trailing statement attributes
            return any(n.startswith('[') for n in self.sig.ops_by_name) \
                and self.ts.peek(1) not in ('nonexec', 'owise', 'metadata')
        if tok in ('(', '@'):
            return True
        if tok.isdigit():
            return True
        if tok in self.mod.var_table or self._inline_var(tok):
            return True
        if tok in self.sig.ops_by_name or tok + '_' in self.sig.ops_by_name:
            return True
        return False

    def _inline_var(self, tok):
        if ':' not in tok or tok.startswith(':') or tok.endswith(':'):
            return None
        name, _, sort = tok.rpartition(':')
        if sort in self.sig.sort_set or sort == ANY_SORT:
            return Var(name, sort)
        return None

    def parse_primary(self) -> Term:
        tok = self.ts.peek()
        if tok is None:
            self.ts.error('expected a term')
        if tok == '(':
            self.ts.next()
            t = self.parse_term(0)
            self.ts.expect(')')
            return t
        if tok == '[':
            return self._parse_bracket()
        if tok == '@':
            self.ts.next()
            return Var('@', ANY_SORT)
        if tok.isdigit():
            self.ts.next()
            return self._numeral(int(tok))
        inline = self._inline_var(tok)
        if inline is not None:
            self.ts.next()
            return inline
        if tok in self.mod.var_table:
            self.ts.next()
            return Var(tok, self.mod.var_table[tok])
        if tok in self.sig.ops_by_name or tok + '_' in self.sig.ops_by_name:
            self.ts.next()
            if self.ts.at('('):
                if not self._is_constant_only(tok):
                    self.ts.next()
                    args = [self.parse_term(0)]
                    while self.ts.accept(','):
                        args.append(self.parse_term(0))
                    self.ts.expect(')')
                    return self._resolve_call(tok, args)
            decls = self.sig.ops_by_name.get(tok)
            if decls and any(d.arity == 0 for d in decls):
                return self._build_app(tok, [])
            if tok + '_' in self.sig.ops_by_name:
                operand = self.parse_term(PREFIX_OPERAND_PREC)
                return self._build_app(tok + '_', [operand])
            self.ts.error(f'operator {tok} needs arguments')
        self.ts.error(f'unknown identifier {tok!r}')

    def _is_constant_only(self, tok):
        decls = self.sig.ops_by_name.get(tok)
        return bool(decls) and all(d.arity == 0 for d in decls) \
            and tok + '_' not in self.sig.ops_by_name

    def _resolve_call(self, tok, args):
        decls = self.sig.ops_by_name.get(tok, ())
        if any(d.arity == len(args) for d in decls):
            return self._build_app(tok, args)
        if len(args) == 1 and tok + '_' in self.sig.ops_by_name:
            return self._build_app(tok + '_', args)
        self.ts.error(f'no declaration of {tok} takes {len(args)} arguments')

    def _parse_bracket(self):
        self.ts.next()
        args = [self.parse_term(0)]
        while self.ts.accept(','):
            args.append(self.parse_term(0))
        self.ts.expect(']')
        name = '[' + '_' + ',_' * (len(args) - 1) + ']'
        if name not in self.sig.ops_by_name:
            self.ts.error(f'no bracket operator {name} declared')
        return self._build_app(name, args)

    def _numeral(self, n):
        if '0' not in self.sig.ops_by_name or 's_' not in self.sig.ops_by_name:
            self.ts.error('numeric literals need the naturals (import NAT)')
        t = self.sig.make_app('0', [])
        for _ in range(n):
            t = self.sig.make_app('s_', [t])
        return t

    def _build_app(self, name, children):
        try:
            t = self.sig.make_app(name, children)
            self.sig.least_sort(t)
        except Exception as exc:
            self.ts.error(str(exc))
        return t

    # -- conditions --------------------------------------------------------

    def parse_condition(self) -> list[ConditionFragment]:
        fragments = [self._parse_fragment()]
        while self.ts.accept('/\\'):
            fragments.append(self._parse_fragment())
        return fragments

    def _parse_fragment(self):
        lhs = self.parse_term(0)
        if self.ts.accept('='):
            return ConditionFragment.equality(lhs, self.parse_term(0))
        if self.ts.accept(':='):
            return ConditionFragment.assignment(lhs, self.parse_term(0))
        if self.ts.at(':') and self.ts.peek(1) in self.sig.sort_set:
            self.ts.next()
            sort = self.ts.next().value
            return ConditionFragment.sort_test(lhs, sort)
        if self.ts.accept('=>'):
            self.ts.error('rewriting conditions are not supported')
        return ConditionFragment.equality(lhs, self._build_app('true', []))

    # -- strategies ----------------------------------------------------------

    def parse_strategy(self) -> st.StratExpr:
        test = self._parse_orelse()
        if self.ts.accept('?'):
            then = self._parse_orelse()
            self.ts.expect(':')
            other = self.parse_strategy()
            return st.Cond(test, then, other)
        return test

    def _parse_orelse(self):
        left = self._parse_alt()
        while self.ts.accept('or-else'):
            left = st.OrElse(left, self._parse_alt())
        return left

    def _parse_alt(self):
        left = self._parse_seq()
        while self.ts.accept('|'):
            left = st.Choice(left, self._parse_seq())
        return left

    def _parse_seq(self):
        left = self._parse_postfix()
        while self.ts.accept(';'):
            left = st.Seq(left, self._parse_postfix())
        return left

    def _parse_postfix(self):
        s = self._parse_sprimary()
        while True:
            if self.ts.accept('*'):
                s = st.Star(s)
            elif self.ts.accept('!'):
                s = st.Bang(s)
            else:
                return s

    def _parse_sprimary(self):
        tok = self.ts.peek()
        if tok is None:
            self.ts.error('expected a strategy')
        if tok == '(':
            self.ts.next()
            s = self.parse_strategy()
            self.ts.expect(')')
            return s
        if tok == 'idle':
            self.ts.next()
            return st.IDLE
        if tok == 'fail':
            self.ts.next()
            return st.FAIL
        if tok == 'all':
            self.ts.next()
            return st.ALL
        if tok == 'top':
            self.ts.next()
            self.ts.expect('(')
            inner = self._parse_rule_app(top=True)
            self.ts.expect(')')
            return inner
        if tok == 'one':
            self.ts.next()
            self.ts.expect('(')
            s = self.parse_strategy()
            self.ts.expect(')')
            return st.One(s)
        if tok in ('try', 'not', 'test'):
            self.ts.next()
            self.ts.expect('(')
            s = self.parse_strategy()
            self.ts.expect(')')
            return {'try': st.Try, 'not': st.Not, 'test': st.Test}[tok](s)
        if tok in ('gt-all', 'gt-one', 'gt-some'):
            if not self.extended:
                self.ts.error(f'{tok} needs the extended strategy language')
            self.ts.next()
            self.ts.expect('(')
            s = self.parse_strategy()
            self.ts.expect(')')
            return {'gt-all': st.GtAll, 'gt-one': st.GtOne, 'gt-some': st.GtSome}[tok](s)
        if tok in ('match', 'amatch'):
            self.ts.next()
            pattern = self.parse_term(0)
            condition = self.parse_condition() if self.ts.accept('s.t.') else ()
            return st.MatchTest(tok == 'amatch', pattern, condition)
        if tok in ('matchrew', 'amatchrew'):
            return self._parse_matchrew(tok == 'amatchrew')
        return self._parse_named()

    def _parse_matchrew(self, anywhere):
        self.ts.next()
        pattern = self.parse_term(0)
        condition = self.parse_condition() if self.ts.accept('s.t.') else ()
        self.ts.expect('by')
        slots = [self._parse_slot(pattern)]
        while self.ts.accept(','):
            slots.append(self._parse_slot(pattern))
        return st.MatchRew(anywhere, pattern, condition, slots)

    def _parse_slot(self, pattern):
        tok = self.ts.next()
        var = self._inline_var(tok.value)
        if var is None:
            if tok.value not in self.mod.var_table:
                self.ts.error(f'{tok.value} is not a variable')
            var = Var(tok.value, self.mod.var_table[tok.value])
        occurrences = sum(1 for v in _var_occurrences(pattern) if v == var)
        if occurrences != 1:
            self.ts.error(f'matchrew variable {var.name} must occur exactly '
                          f'once in its pattern')
        self.ts.expect('using')
        return (var, self.parse_strategy())

    def _parse_rule_app(self, top=False):
        tok = self.ts.next()
        label = tok.value
        if not self.mod.rules_for_label(label):
            self.ts.error(f'unknown rule label {label}')
        init = []
        if self.ts.accept('['):
            init.append(self._parse_assignment())
            while self.ts.accept(','):
                init.append(self._parse_assignment())
            self.ts.expect(']')
        if self.ts.at('{'):
            self.ts.error('rule applications with condition strategies '
                          'are not supported')
        return st.Apply(label, init, top)

    def _parse_assignment(self):
        tok = self.ts.next()
        var = self._inline_var(tok.value)
        if var is None:
            if tok.value not in self.mod.var_table:
                self.ts.error(f'{tok.value} is not a variable')
            var = Var(tok.value, self.mod.var_table[tok.value])
        self.ts.expect('<-')
        return (var, self.parse_term(0))

    def _parse_named(self):
        tok = self.ts.peek()
        is_label = bool(self.mod.rules_for_label(tok))
        is_strat = self.mod.strat_decl(tok) is not None
        is_ctor = self.extended and self.sig.is_ctor(tok)
        if self.ts.peek(1) == '(' and (is_strat or is_ctor):
            self.ts.next()
            self.ts.next()
            if is_ctor:
                args = [self.parse_strategy()]
                while self.ts.accept(','):
                    args.append(self.parse_strategy())
                self.ts.expect(')')
                self._check_congruence(tok, len(args))
                return st.Congruence(tok, args)
            args = [self.parse_term(0)]
            while self.ts.accept(','):
                args.append(self.parse_term(0))
            self.ts.expect(')')
            if self.mod.strat_decl(tok, len(args)) is None:
                self.ts.error(f'strategy {tok} is not declared with '
                              f'{len(args)} arguments')
            return st.Call(tok, args)
        if is_label or self.ts.peek(1) == '[':
            return self._parse_rule_app()
        if is_strat:
            self.ts.next()
            if self.mod.strat_decl(tok, 0) is None:
                self.ts.error(f'strategy {tok} needs arguments')
            return st.Call(tok, ())
        if is_ctor:
            self.ts.next()
            self._check_congruence(tok, 0)
            return st.Congruence(tok, ())
        self.ts.error(f'unknown strategy {tok!r}')

    def _check_congruence(self, name, arity):
        decls = [d for d in self.sig.ops_by_name.get(name, ())
                 if d.ctor and d.arity == arity]
        if not decls:
            self.ts.error(f'no constructor {name} of arity {arity}')

    # -- temporal formulas ----------------------------------------------------

    def parse_ltl(self) -> lt.Formula:
        left = self._ltl_disj()
        if self.ts.accept('->'):
            return lt.ImpliesF(left, self.parse_ltl())
        return left

    def _ltl_disj(self):
        left = self._ltl_conj()
        while self.ts.accept('\\/'):
            left = lt.OrF(left, self._ltl_conj())
        return left

    def _ltl_conj(self):
        left = self._ltl_until()
        while self.ts.accept('/\\'):
            left = lt.AndF(left, self._ltl_until())
        return left

    def _ltl_until(self):
        left = self._ltl_unary()
        if self.ts.accept('U'):
            return lt.UntilF(left, self._ltl_until())
        return left

    def _ltl_unary(self):
        if self.ts.accept('~'):
            return lt.NotF(self._ltl_unary())
        if self.ts.at('[') and self.ts.peek(1) == ']':
            self.ts.next()
            self.ts.next()
            return lt.AlwaysF(self._ltl_unary())
        if self.ts.accept('<>'):
            return lt.EventuallyF(self._ltl_unary())
        if self.ts.accept('O'):
            return lt.NextF(self._ltl_unary())
        if self.ts.accept('('):
            f = self.parse_ltl()
            self.ts.expect(')')
            return f
        if self.ts.accept('true'):
            return lt.TRUE
        if self.ts.accept('false'):
            return lt.FALSE
        tok = self.ts.next()
        if self.mod.prop(tok.value) is None:
            self.ts.error(f'proposition {tok.value} is not declared')
        return lt.Prop(tok.value)

    # -- global strategies ------------------------------------------------------

    def parse_gamma(self):
        if self.ts.accept('turns'):
            return ms.Turns()
        if self.ts.accept('concurrent'):
            return ms.Freec()
        if self.ts.accept('steps'):
            tok = self.ts.next()
            if not tok.value.isdigit():
                self.ts.error('steps needs a number')
            return ms.FreecBounded(int(tok.value))
        if self.ts.accept('custom'):
            return self.parse_global_expr()
        self.ts.error('expected turns, concurrent, steps K, or custom')

    def parse_global_expr(self):
        test = self._gx_alt()
        if self.ts.accept('?'):
            then = self._gx_alt()
            self.ts.expect(':')
            other = self.parse_global_expr()
            return ms.GCond(test, then, other)
        return test

    def _gx_alt(self):
        left = self._gx_seq()
        while self.ts.accept('|'):
            left = ms.GChoice(left, self._gx_seq())
        return left

    def _gx_seq(self):
        left = self._gx_postfix()
        while self.ts.accept(';'):
            left = ms.GSeq(left, self._gx_postfix())
        return left

    def _gx_postfix(self):
        g = self._gx_primary()
        while True:
            if self.ts.accept('*'):
                g = ms.GStar(g)
            elif self.ts.accept('!'):
                g = ms.GBang(g)
            else:
                return g

    def _gx_primary(self):
        tok = self.ts.peek()
        if tok == '(':
            self.ts.next()
            g = self.parse_global_expr()
            self.ts.expect(')')
            return g
        if tok == 'idle':
            self.ts.next()
            return ms.GIdle()
        if tok == 'fail':
            self.ts.next()
            return ms.GFail()
        if tok == 'turns':
            self.ts.next()
            return ms.GTurns()
        if tok == 'freec':
            self.ts.next()
            if self.ts.accept('('):
                n = self.ts.next()
                self.ts.expect(')')
                return ms.GFreec(int(n.value))
            return ms.GFreec()
        if tok in ('control', 'system', 'step'):
            self.ts.next()
            self.ts.expect('(')
            n = self.ts.next()
            if not n.value.isdigit():
                self.ts.error('thread index expected')
            self.ts.expect(')')
            cls = {'control': ms.GControl, 'system': ms.GSystem,
                   'step': ms.GStep}[tok]
            return cls(int(n.value))
        self.ts.error(f'unknown global strategy {tok!r}')


def _var_occurrences(t):
    if isinstance(t, Var):
        yield t
    else:
        for c in t.children:
            yield from _var_occurrences(c)


# ----------------------------------------------------------------------
# Module files

def split_statements(ts: Tokens, end_keyword):
    """Token slices of the statements up to the module end keyword."""
    out = []
    current = []
    while True:
        if ts.done():
            ts.error(f'missing {end_keyword}')
        if not current and ts.at(end_keyword):
            ts.next()
            return out
        tok = ts.next()
        if tok.value == '.':
            out.append(current)
            current = []
        else:
            current.append(tok)
    return out


class ModuleBuilder:
    def __init__(self, name, kind, registry, extended):
        self.registry = registry
        self.extended = extended
        self.mod = ModuleDef(name, kind, Signature())
        self.pending_ids = []
        self.imported = set()

    def import_module(self, name, where):
        other = self.registry.get(name)
        if other is None:
            where.error(f'module {name} has not been loaded')
        if other.name in self.imported:
            return
        self.imported.add(other.name)
        sig = self.mod.signature
        for s in other.signature.sorts:
            sig.add_sort(s)
        for pair in sorted(other.signature.subsort_pairs):
            sig.add_subsort(*pair)
        for decl in other.signature.ops:
            sig.add_op(OpDecl(decl.name, decl.arg_sorts, decl.result_sort,
                              decl.ctor, decl.assoc, decl.comm, decl.identity,
                              decl.frozen_args, decl.eval_strategy,
                              decl.partial),
                       dedup=True)
        seen_eqs = {id(e) for e in self.mod.equations}
        for eq in other.equations:
            if id(eq) not in seen_eqs:
                self.mod.add_equation(eq)
        seen_rls = {id(r) for r in self.mod.rules}
        for rl in other.rules:
            if id(rl) not in seen_rls:
                self.mod.add_rule(rl)
        names = {d.name for d in self.mod.strat_decls}
        for d in other.strat_decls:
            if d.name not in names:
                self.mod.strat_decls.append(d)
        existing_defs = {id(d) for d in self.mod.strat_defs}
        for d in other.strat_defs:
            if id(d) not in existing_defs:
                self.mod.strat_defs.append(d)
        prop_names = {p.name for p in self.mod.props}
        for p in other.props:
            if p.name not in prop_names:
                self.mod.props.append(p)
        self.mod.var_table.update(other.var_table)

    # -- pass 1: syntax declarations --------------------------------------

    def declare(self, stmt):
        ts = Tokens(stmt)
        head = ts.next().value
        if head in ('protecting', 'extending', 'including'):
            self.import_module(ts.next().value, ts)
        elif head in ('sort', 'sorts'):
            while not ts.done():
                self.mod.signature.add_sort(ts.next().value)
        elif head in ('subsort', 'subsorts'):
            groups = [[]]
            while not ts.done():
                tok = ts.next().value
                if tok == '<':
                    groups.append([])
                else:
                    groups[-1].append(tok)
            if len(groups) < 2 or not all(groups):
                ts.error('malformed subsort declaration')
            for lower, upper in zip(groups, groups[1:]):
                for a in lower:
                    for b in upper:
                        try:
                            self.mod.signature.add_subsort(a, b)
                        except Exception as exc:
                            ts.error(str(exc))
        elif head in ('op', 'ops'):
            self._declare_op(ts, plural=head == 'ops')
        elif head in ('var', 'vars'):
            names = []
            while not ts.at(':'):
                names.append(ts.next().value)
            ts.expect(':')
            sort = ts.next().value
            for n in names:
                self.mod.var_table[n] = sort
        elif head in ('strat', 'strats'):
            names = []
            while not (ts.at(':') or ts.at('@')):
                names.append(ts.next().value)
            arg_sorts = []
            if ts.accept(':'):
                while not ts.at('@'):
                    arg_sorts.append(ts.next().value)
            ts.expect('@')
            subject = ts.next().value
            for n in names:
                self.mod.strat_decls.append(StratDecl(n, arg_sorts, subject))
        elif head in ('mb', 'cmb'):
            ts.error('membership axioms are not supported')
        else:
            return False
        return True

    def _declare_op(self, ts, plural):
        names = []
        if plural:
            while not ts.at(':'):
                names.append(ts.next().value)
        else:
            parts = []
            while not ts.at(':'):
                parts.append(ts.next().value)
            names.append(''.join(parts))
        ts.expect(':')
        arg_sorts = []
        while not (ts.at('->') or ts.at('~>')):
            arg_sorts.append(ts.next().value)
        partial = ts.next().value == '~>'
        result = ts.next().value
        attrs = {'ctor': False, 'assoc': False, 'comm': False,
                 'frozen': frozenset(), 'strat': None, 'id_toks': None}
        if ts.accept('['):
            self._parse_attrs(ts, attrs)
        for name in names:
            decl = OpDecl(name, arg_sorts, result, ctor=attrs['ctor'],
                          assoc=attrs['assoc'], comm=attrs['comm'],
                          frozen_args=attrs['frozen'],
                          eval_strategy=attrs['strat'], partial=partial)
            try:
                self.mod.signature.add_op(decl, dedup=True)
            except Exception as exc:
                ts.error(str(exc))
            if attrs['id_toks'] is not None:
                self.pending_ids.append((decl, attrs['id_toks']))

    def _parse_attrs(self, ts, attrs):
        while not ts.accept(']'):
            tok = ts.next().value
            if tok in ('ctor', 'assoc', 'comm'):
                attrs[tok] = True
            elif tok == 'id:':
                toks = []
                while ts.peek() not in ATTR_KEYWORDS:
                    toks.append(ts.next())
                attrs['id_toks'] = toks
            elif tok in ('frozen', 'strat'):
                ts.expect('(')
                indices = []
                while not ts.accept(')'):
                    indices.append(int(ts.next().value))
                if tok == 'frozen':
                    attrs['frozen'] = frozenset(indices)
                else:
                    if not indices or indices[-1] != 0 or 0 in indices[:-1]:
                        ts.error('evaluation strategies must be a list of '
                                 'argument indices ending in 0')
                    attrs['strat'] = tuple(indices[:-1])
            elif tok in ('nonexec', 'owise'):
                attrs[tok] = True
            else:
                ts.error(f'unknown attribute {tok}')

    def resolve_identities(self):
        for decl, toks in self.pending_ids:
            parser = ExprParser(Tokens(list(toks)), self.mod, self.extended)
            decl.identity = parser.parse_term(0)
        self.mod.signature.finalize()

    # -- pass 2: statements -------------------------------------------------

    def statement(self, stmt):
        ts = Tokens(stmt)
        head = ts.next().value
        ep = ExprParser(ts, self.mod, self.extended)
        if head in ('eq', 'ceq'):
            lhs = ep.parse_term(0)
            ts.expect('=')
            rhs = ep.parse_term(0)
            condition = ()
            if head == 'ceq':
                ts.expect('if')
                condition = ep.parse_condition()
            owise = self._statement_attrs(ts, {'owise'})
            eq = Equation(lhs, rhs, condition, owise='owise' in owise)
            bad = check_statement_vars(self.mod.signature, lhs, rhs, condition)
            if bad:
                names = ', '.join(sorted(v.name for v in bad))
                ts.error(f'unbound right-hand side variables: {names}')
            if lhs.is_var():
                ts.error('equation left-hand side cannot be a variable')
            self.mod.add_equation(eq)
        elif head in ('rl', 'crl'):
            label = None
            if ts.accept('['):
                label = ts.next().value
                ts.expect(']')
                ts.expect(':')
            lhs = ep.parse_term(0)
            ts.expect('=>')
            rhs = ep.parse_term(0)
            condition = ()
            if head == 'crl':
                ts.expect('if')
                condition = ep.parse_condition()
            flags = self._statement_attrs(ts, {'nonexec'})
            rule = Rule(label, lhs, rhs, condition, nonexec='nonexec' in flags)
            bad = check_statement_vars(self.mod.signature, lhs, rhs, condition,
                                       allow_free_rhs=rule.nonexec)
            if bad:
                names = ', '.join(sorted(v.name for v in bad))
                ts.error(f'unbound rule variables: {names} (use nonexec)')
            self.mod.add_rule(rule)
        elif head in ('sd', 'csd'):
            name_tok = ts.next()
            name = name_tok.value
            if self.mod.strat_decl(name) is None:
                ts.error(f'strategy {name} is not declared')
            params = []
            if ts.accept('('):
                params.append(ep.parse_term(0))
                while ts.accept(','):
                    params.append(ep.parse_term(0))
                ts.expect(')')
            if self.mod.strat_decl(name, len(params)) is None:
                ts.error(f'strategy {name} is not declared with '
                         f'{len(params)} arguments')
            ts.expect(':=')
            body = ep.parse_strategy()
            condition = ()
            if head == 'csd':
                ts.expect('if')
                condition = ep.parse_condition()
            if not ts.done():
                ts.error('trailing tokens after strategy definition')
            self.mod.strat_defs.append(StratDef(name, params, body, condition))
        elif head == 'prop':
            name = ts.next().value
            ts.expect('=')
            body = ep.parse_term(0)
            self.mod.props.append(PropDef(name, body))
        else:
            ts.pos = 0
            ts.error(f'unknown statement {head!r}')

    @staticmethod
    def _statement_attrs(ts, allowed):
        found = set()
        if ts.accept('['):
            while not ts.accept(']'):
                tok = ts.next()
                if tok.value in allowed or tok.value == 'metadata':
                    found.add(tok.value)
                else:
                    ts.error(f'unsupported statement attribute {tok.value}')
        if not ts.done():
            ts.error('trailing tokens in statement')
        return found


MODULE_KINDS = {'fmod': (FUNCTIONAL, 'endfm'), 'mod': (SYSTEM, 'endm'),
                'smod': (STRATEGY, 'endsm')}

PASS2_HEADS = {'eq', 'ceq', 'rl', 'crl', 'sd', 'csd', 'prop'}


def parse_module_text(text: str, registry: dict, extended=True) -> list[ModuleDef]:
    """Parse the modules of a source text, resolving imports against (and
    extending) the given registry; returns them in order."""
    ts = Tokens(tokenize(text))
    out = []
    while not ts.done():
        key = ts.next()
        if key.value == 'load':
            ts.error('nested load is only available as a session command')
        if key.value not in MODULE_KINDS:
            ts.error(f'expected a module, found {key.value!r}')
        kind, end_kw = MODULE_KINDS[key.value]
        name = ts.next().value
        ts.expect('is')
        stmts = split_statements(ts, end_kw)
        builder = ModuleBuilder(name, kind, registry, extended)
        if name != 'BOOL' and 'BOOL' in registry:
            builder.import_module('BOOL', ts)
        deferred = []
        for stmt in stmts:
            if not stmt:
                continue
            if stmt[0].value in PASS2_HEADS:
                deferred.append(stmt)
            elif not builder.declare(stmt):
                Tokens(stmt).error(f'unknown statement {stmt[0].value!r}')
        builder.resolve_identities()
        mixed = sorted(deferred, key=lambda s: s[0].value in ('sd', 'csd', 'prop'))
        for stmt in mixed:
            builder.statement(stmt)
        _validate_module(builder.mod)
        registry[name] = builder.mod
        out.append(builder.mod)
    return out


def _validate_module(mod: ModuleDef):
    for d in mod.strat_defs:
        if mod.strat_decl(d.name) is None:
            raise ParseError(f'strategy {d.name} defined but not declared '
                             f'in module {mod.name}')


_builtins = None


def builtin_registry() -> dict:
    """Fresh registry preloaded with the bundled prelude modules."""
    global _builtins
    if _builtins is None:
        source = importlib.resources.files('strew').joinpath(
            'fixtures/prelude.maude').read_text()
        registry = {}
        parse_module_text(source, registry)
        _builtins = registry
    return dict(_builtins)


def fixture_path(name: str):
    return importlib.resources.files('strew').joinpath(f'fixtures/{name}')


def load_fixture(names, registry=None, extended=True):
    """Load one or more bundled fixture files into a registry."""
    registry = builtin_registry() if registry is None else registry
    if isinstance(names, str):
        names = [names]
    for name in names:
        text = fixture_path(name).read_text()
        parse_module_text(text, registry, extended)
    return registry


def parse_term(text: str, mod: ModuleDef) -> Term:
    ts = Tokens(tokenize(text))
    term = ExprParser(ts, mod).parse_term(0)
    if not ts.done():
        ts.error('trailing tokens after term')
    return term


def parse_strategy(text: str, mod: ModuleDef, extended=True) -> st.StratExpr:
    ts = Tokens(tokenize(text))
    strat = ExprParser(ts, mod, extended).parse_strategy()
    if not ts.done():
        ts.error('trailing tokens after strategy')
    return strat


def parse_ltl(text: str, mod: ModuleDef) -> lt.Formula:
    ts = Tokens(tokenize(text))
    f = ExprParser(ts, mod).parse_ltl()
    if not ts.done():
        ts.error('trailing tokens after formula')
    return f
