#
# Flat module definitions: signature plus equations, rules, strategy
# declarations/definitions, and proposition definitions.
#

from __future__ import annotations

from .terms import Signature, term_vars

FUNCTIONAL, SYSTEM, STRATEGY = 'functional', 'system', 'strategy'


class ConditionFragment:
    """One fragment of an equational condition"""

    EQUALITY, ASSIGNMENT, SORT_TEST = 'eq', 'assign', 'sort'

    __slots__ = ('kind', 'lhs', 'rhs', 'sort')

    def __init__(self, kind, lhs, rhs=None, sort=None):
        self.kind = kind
        self.lhs = lhs
        self.rhs = rhs
        self.sort = sort

    @classmethod
    def equality(cls, l, r):
        return cls(cls.EQUALITY, l, r)

    @classmethod
    def assignment(cls, pattern, r):
        return cls(cls.ASSIGNMENT, pattern, r)

    @classmethod
    def sort_test(cls, t, sort):
        return cls(cls.SORT_TEST, t, sort=sort)

    def __eq__(self, other):
        return self is other or (isinstance(other, ConditionFragment)
                                 and self.kind == other.kind
                                 and self.lhs == other.lhs
                                 and self.rhs == other.rhs
                                 and self.sort == other.sort)

    def __hash__(self):
        return hash((self.kind, self.lhs, self.rhs, self.sort))

    def __repr__(self):
        if self.kind == self.EQUALITY:
            return f'{self.lhs!r} = {self.rhs!r}'
        if self.kind == self.ASSIGNMENT:
            return f'{self.lhs!r} := {self.rhs!r}'
        return f'{self.lhs!r} : {self.sort}'


class Equation:
    __slots__ = ('lhs', 'rhs', 'condition', 'owise')

    def __init__(self, lhs, rhs, condition=(), owise=False):
        self.lhs = lhs
        self.rhs = rhs
        self.condition = tuple(condition)
        self.owise = owise

    def __repr__(self):
        return f'eq {self.lhs!r} = {self.rhs!r}'


class Rule:
    __slots__ = ('label', 'lhs', 'rhs', 'condition', 'nonexec')

    def __init__(self, label, lhs, rhs, condition=(), nonexec=False):
        self.label = label
        self.lhs = lhs
        self.rhs = rhs
        self.condition = tuple(condition)
        self.nonexec = nonexec

    def __repr__(self):
        label = f'[{self.label}] ' if self.label else ''
        return f'rl {label}{self.lhs!r} => {self.rhs!r}'


class StratDecl:
    __slots__ = ('name', 'arg_sorts', 'subject_sort')

    def __init__(self, name, arg_sorts, subject_sort):
        self.name = name
        self.arg_sorts = tuple(arg_sorts)
        self.subject_sort = subject_sort


class StratDef:
    """sd/csd definition: head argument patterns, body, optional condition"""

    __slots__ = ('name', 'params', 'body', 'condition')

    def __init__(self, name, params, body, condition=()):
        self.name = name
        self.params = tuple(params)
        self.body = body
        self.condition = tuple(condition)


class PropDef:
    """Atomic proposition: a Boolean term over the @ placeholder"""

    __slots__ = ('name', 'body')

    def __init__(self, name, body):
        self.name = name
        self.body = body


class ModuleDef:
    """A flattened specification (imports already resolved)"""

    def __init__(self, name, kind, signature: Signature):
        self.name = name
        self.kind = kind
        self.signature = signature
        self.equations: list[Equation] = []
        self.rules: list[Rule] = []
        self.strat_decls: list[StratDecl] = []
        self.strat_defs: list[StratDef] = []
        self.props: list[PropDef] = []
        self.var_table: dict[str, str] = {}
        # Internal caches (not part of the module's value)
        self._eqs_by_op = None
        self._nf_cache = {}
        self._sd_by_name = None

    # ------------------------------------------------------------------

    def add_equation(self, eq: Equation):
        self.equations.append(eq)
        self._eqs_by_op = None

    def add_rule(self, rl: Rule):
        self.rules.append(rl)

    def executable_rules(self):
        return [r for r in self.rules if not r.nonexec]

    def rules_for_label(self, label):
        return [r for r in self.rules if r.label == label]

    def strat_decl(self, name, arity=None):
        for d in self.strat_decls:
            if d.name == name and (arity is None or len(d.arg_sorts) == arity):
                return d
        return None

    def strat_defs_for(self, name):
        if self._sd_by_name is None:
            self._sd_by_name = {}
            for d in self.strat_defs:
                self._sd_by_name.setdefault(d.name, []).append(d)
        return self._sd_by_name.get(name, ())

    def prop(self, name):
        for p in self.props:
            if p.name == name:
                return p
        return None

    def eqs_for_op(self, op):
        """Equations indexed by the top operator of their left-hand side,
        split into (plain, owise)."""
        if self._eqs_by_op is None:
            table = {}
            for eq in self.equations:
                top = eq.lhs.op if not eq.lhs.is_var() else None
                plain, owise = table.setdefault(top, ([], []))
                (owise if eq.owise else plain).append(eq)
            self._eqs_by_op = table
        return self._eqs_by_op.get(op, ((), ()))

    def clear_caches(self):
        self._eqs_by_op = None
        self._nf_cache.clear()
        self._sd_by_name = None

    def copy_shell(self, name=None, kind=None, signature=None):
        """New module sharing nothing mutable with this one."""
        out = ModuleDef(name or self.name, kind or self.kind,
                        signature or self.signature)
        out.var_table = dict(self.var_table)
        return out

    def __repr__(self):
        return f'ModuleDef({self.name})'


def check_statement_vars(sig, lhs, rhs, condition, allow_free_rhs=False):
    """Variables of the right-hand side and condition must occur in the
    left-hand side or be introduced by an earlier assignment pattern.
    Returns the set of offending variables (empty when fine)."""
    known = term_vars(lhs)
    offending = set()
    for frag in condition:
        if frag.kind == ConditionFragment.ASSIGNMENT:
            offending |= term_vars(frag.rhs) - known
            known |= term_vars(frag.lhs)
        elif frag.kind == ConditionFragment.EQUALITY:
            offending |= (term_vars(frag.lhs) | term_vars(frag.rhs)) - known
        else:
            offending |= term_vars(frag.lhs) - known
    if not allow_free_rhs:
        offending |= term_vars(rhs) - known
    return offending
