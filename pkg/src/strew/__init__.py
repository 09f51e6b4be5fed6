"""Term rewriting with programmable strategies.

The package implements sorted terms modulo structural axioms, equational
and rule rewriting, the strategy language and its execution engine,
context-sensitive (layered) normalization, congruence/traversal strategy
operators with their translation to the core language, interleaved
multistrategy execution, and an LTL model checker over strategy-controlled
executions, plus a small interactive/batch session frontend.
"""

from .csr import (ReplacementMap, csr_transform, layered_normalize,
                  mu_normalize, mu_positions, replacement_map)
from .engine import Engine, State, atomic_successors, srewrite, step_successors
from .errors import (CheckError, InstantiationError, NonTerminationError,
                     ParseError, PropositionError, SearchLimitError,
                     SortError, StrewError, TransformError)
from .ltl import CheckResult, Fails, check, eval_prop, to_buchi
from .matching import Match, match_root, matches, search
from .module import (ConditionFragment, Equation, ModuleDef, PropDef, Rule,
                     StratDecl, StratDef)
from .multistrat import (Freec, FreecBounded, MSContext, MultiEngine, Turns,
                         ms_step, ms_successors, run_global)
from .parser import (builtin_registry, load_fixture, parse_ltl,
                     parse_module_text, parse_strategy, parse_term)
from .printer import print_strategy, print_term
from .rewriting import apply_all, apply_rule, check_condition, normalize
from .strategy import desugar
from .terms import App, OpDecl, Seg, Signature, Subst, Term, Var
from .traversals import congruence_ops, eval_extended_native, translate_extended

__all__ = [name for name in dir() if not name.startswith('_')]
