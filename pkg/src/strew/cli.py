#
# Interactive and batch session frontend: load modules, reduce and rewrite
# terms, run strategies and multistrategies, transform modules, and model
# check temporal properties.
#

from __future__ import annotations

import argparse
import json
import sys

from .csr import transformed
from .engine import Engine
from .errors import StrewError
from .ltl import Fails, check
from .module import ModuleDef
from .multistrat import GlobalExpr, MultiEngine
from .parser import ExprParser, Tokens, builtin_registry, parse_module_text, tokenize
from .printer import print_strategy, print_term
from .rewriting import (DEFAULT_STEP_BUDGET, RewriteCounter, apply_all,
                        normalize)

BANNER = '** Strategy rewriting playground **'
PROMPT = 'StRew> '


class Session:
    """State of one interactive or batch session"""

    def __init__(self, extended=True, step_limit=DEFAULT_STEP_BUDGET,
                 state_limit=10 ** 6, json_mode=False, out=None):
        self.registry = builtin_registry()
        self.current: ModuleDef | None = None
        self.extended = extended
        self.step_limit = step_limit
        self.state_limit = state_limit
        self.json_mode = json_mode
        self.out = out if out is not None else sys.stdout
        self.last_check = None
        self.finished = False
        self._engines = {}

    # ------------------------------------------------------------------

    def engine(self, mod) -> Engine:
        key = (id(mod), self.extended)
        hit = self._engines.get(key)
        if hit is None or hit.mod is not mod:
            hit = Engine(mod, step_limit=self.step_limit,
                         state_limit=self.state_limit)
            self._engines[key] = hit
        return hit

    def emit(self, text):
        print(text, file=self.out)

    def emit_json(self, payload):
        print(json.dumps(payload), file=self.out)

    def need_module(self, ts):
        if self.current is None:
            ts.error('no module selected (use select <MOD> .)')
        return self.current

    # ------------------------------------------------------------------

    def run_command(self, text: str):
        """Execute one period-terminated command; errors are reported by the
        caller so a session survives them."""
        toks = tokenize(text)
        if not toks:
            return
        ts = Tokens(toks)
        head = ts.next().value
        handler = {
            'load': self._cmd_load, 'select': self._cmd_select,
            'red': self._cmd_red, 'reduce': self._cmd_red,
            'rew': self._cmd_rew, 'rewrite': self._cmd_rew,
            'srew': self._cmd_srew, 'srewrite': self._cmd_srew,
            'dsrew': self._cmd_dsrew, 'dsrewrite': self._cmd_dsrew,
            'check': self._cmd_check, 'transform': self._cmd_transform,
            'show': self._cmd_show, 'quit': self._cmd_quit, 'q': self._cmd_quit,
        }.get(head)
        if handler is None:
            ts.error(f'unknown command {head!r}')
        handler(ts)

    @staticmethod
    def _finish(ts):
        if not ts.accept('.'):
            ts.error("commands end with ' .'")
        if not ts.done():
            ts.error('trailing input after the command')

    def _cmd_quit(self, ts):
        self._finish(ts)
        self.finished = True

    def _cmd_load(self, ts):
        parts = []
        while not ts.at('.'):
            parts.append(ts.next().value)
        self._finish(ts)
        path = ' '.join(parts)
        with open(path, encoding='utf-8') as handle:
            mods = parse_module_text(handle.read(), self.registry, self.extended)
        for mod in mods:
            self.emit(f'Module {mod.name} loaded.')

    def _cmd_select(self, ts):
        name = ts.next().value
        self._finish(ts)
        mod = self.registry.get(name)
        if mod is None:
            ts.error(f'module {name} has not been loaded')
        self.current = mod
        self.emit(f'Module {name} is now the current module.')

    def _cmd_red(self, ts):
        mod = self.need_module(ts)
        ep = ExprParser(ts, mod, self.extended)
        term = ep.parse_term(0)
        self._finish(ts)
        counter = RewriteCounter(self.step_limit)
        result = normalize(mod, term, counter)
        if self.json_mode:
            self.emit_json({'command': 'reduce', 'result': print_term(result)})
        else:
            self.emit(f'result: {print_term(result)}')

    def _cmd_rew(self, ts):
        mod = self.need_module(ts)
        bound = None
        if ts.accept('['):
            bound = int(ts.next().value)
            ts.expect(']')
        ep = ExprParser(ts, mod, self.extended)
        term = ep.parse_term(0)
        self._finish(ts)
        counter = RewriteCounter(self.step_limit)
        term = normalize(mod, term, counter)
        steps = 0
        while bound is None or steps < bound:
            successors = apply_all(mod, term, counter)
            if not successors:
                break
            term = successors[0]
            steps += 1
        if self.json_mode:
            self.emit_json({'command': 'rewrite', 'result': print_term(term),
                            'steps': steps})
        else:
            self.emit(f'result: {print_term(term)}')

    def _parse_srew_parts(self, ts, mod):
        ep = ExprParser(ts, mod, self.extended)
        term = ep.parse_term(0)
        ts.expect('using')
        strategies = [ep.parse_strategy()]
        while ts.accept(','):
            strategies.append(ep.parse_strategy())
        gamma = None
        if ts.accept('by'):
            gamma = ep.parse_gamma()
        self._finish(ts)
        return term, strategies, gamma

    def _cmd_srew(self, ts, depth_first=False):
        mod = self.need_module(ts)
        term, strategies, gamma = self._parse_srew_parts(ts, mod)
        engine = self.engine(mod)
        if gamma is None:
            if len(strategies) != 1:
                ts.error('several strategies need a global strategy (by ...)')
            solutions = list(engine.rewrite(term, strategies[0], depth_first))
        else:
            if depth_first:
                ts.error('dsrew takes a single strategy')
            me = MultiEngine(mod, engine)
            solutions = me.run_global(term, strategies, gamma)
        self._emit_solutions(solutions)

    def _cmd_dsrew(self, ts):
        self._cmd_srew(ts, depth_first=True)

    def _emit_solutions(self, solutions):
        if self.json_mode:
            self.emit_json({'command': 'srewrite',
                            'solutions': [print_term(u) for u in solutions]})
            return
        for i, u in enumerate(solutions, 1):
            self.emit(f'Solution {i}: {print_term(u)}')
        self.emit('No more solutions.')

    def _cmd_check(self, ts):
        mod = self.need_module(ts)
        ep = ExprParser(ts, mod, self.extended)
        formula = ep.parse_ltl()
        ts.expect('from')
        term = ep.parse_term(0)
        ts.expect('using')
        strategies = [ep.parse_strategy()]
        while ts.accept(','):
            strategies.append(ep.parse_strategy())
        ts.expect('by')
        gamma = ep.parse_gamma()
        self._finish(ts)
        if isinstance(gamma, GlobalExpr):
            ts.error('check supports the turns, concurrent, and steps '
                     'global strategies')
        result = check(formula, term, strategies, gamma, mod,
                       engine=self.engine(mod), state_limit=self.state_limit)
        self.last_check = result
        if self.json_mode:
            self.emit_json(self._check_json(result))
        elif result.holds:
            self.emit('The property is satisfied.')
        else:
            self._emit_trace(result)

    @staticmethod
    def _step_label(label):
        if label is None:
            return None
        if label[0] == 'deadlock':
            return '(deadlock)'
        thread, desc = label
        return f'{thread} does {desc}'

    def _check_json(self, result):
        payload = {'command': 'check',
                   'verdict': 'holds' if result.holds else 'fails'}
        if isinstance(result, Fails):
            def steps(part):
                return [{'label': self._step_label(label),
                         'state': print_term(node[0].subject)}
                        for label, node in part]
            payload['counterexample'] = {'prefix': steps(result.prefix),
                                         'cycle': steps(result.cycle)}
        return payload

    def _emit_trace(self, result: Fails):
        for label, node in result.prefix:
            if label is not None:
                self.emit(f'v {self._step_label(label)}')
            self.emit(f'| {print_term(node[0].subject)}')
        stutter = (len(result.cycle) == 1
                   and result.cycle[0][0][0] == 'deadlock')
        if stutter:
            self.emit(f'X {print_term(result.cycle[0][1][0].subject)}')
            return
        self.emit('=== cycle ===')
        for label, node in result.cycle:
            self.emit(f'v {self._step_label(label)}')
            self.emit(f'X {print_term(node[0].subject)}')

    def _cmd_transform(self, ts):
        kind = ts.next().value
        if kind != 'csr':
            ts.error(f'unknown transformation {kind!r}')
        name = ts.next().value
        self._finish(ts)
        mod = self.registry.get(name)
        if mod is None:
            ts.error(f'module {name} has not been loaded')
        out = transformed(mod)
        self.registry[out.name] = out
        self.emit(f'Module {out.name} loaded.')

    def _cmd_show(self, ts):
        what = ts.next().value
        self._finish(ts)
        if what != 'module':
            ts.error("only 'show module .' is supported")
        mod = self.need_module(ts)
        lines = [f'{mod.kind} module {mod.name}',
                 f'  sorts: {" ".join(mod.signature.sorts)}']
        for decl in mod.signature.ops:
            attrs = []
            if decl.ctor:
                attrs.append('ctor')
            if decl.assoc:
                attrs.append('assoc')
            if decl.comm:
                attrs.append('comm')
            if decl.identity is not None:
                attrs.append(f'id: {print_term(decl.identity)}')
            if decl.frozen_args:
                attrs.append(f'frozen({" ".join(map(str, sorted(decl.frozen_args)))})')
            if decl.eval_strategy is not None:
                attrs.append(f'strat({" ".join(map(str, decl.eval_strategy))} 0)')
            suffix = f' [{" ".join(attrs)}]' if attrs else ''
            lines.append(f'  op {decl.name} : {" ".join(decl.arg_sorts)} '
                         f'-> {decl.result_sort}{suffix}')
        lines.append(f'  {len(mod.equations)} equations, {len(mod.rules)} rules')
        for d in mod.strat_decls:
            args = f' : {" ".join(d.arg_sorts)}' if d.arg_sorts else ''
            lines.append(f'  strat {d.name}{args} @ {d.subject_sort}')
        for d in mod.strat_defs:
            params = f'({", ".join(print_term(p) for p in d.params)})' if d.params else ''
            lines.append(f'  sd {d.name}{params} := {print_strategy(d.body)}')
        for p in mod.props:
            lines.append(f'  prop {p.name} = {print_term(p.body)}')
        self.emit('\n'.join(lines))


# ----------------------------------------------------------------------

def read_commands(stream):
    """Commands are terminated by a lone ' .' token; they may span lines."""
    pending = []
    for line in stream:
        pending.append(line)
        toks = tokenize('\n'.join(pending))
        if toks and toks[-1].value == '.':
            yield '\n'.join(pending)
            pending = []
    if pending and ''.join(pending).strip():
        yield '\n'.join(pending)


def run_session(session: Session, commands, interactive=False, err=None):
    err = err if err is not None else sys.stderr
    status = 0
    for command in commands:
        if not command.strip():
            continue
        try:
            session.run_command(command)
        except StrewError as exc:
            print(f'Error: {exc}', file=err)
            status = 1
            if not interactive:
                break
        if session.finished:
            break
    if session.last_check is not None:
        return 0 if session.last_check.holds else 2
    return status


def _interactive_commands(session):
    print(BANNER)
    buffer = []
    while not session.finished:
        try:
            line = input(PROMPT if not buffer else '> ')
        except EOFError:
            return
        buffer.append(line)
        toks = tokenize('\n'.join(buffer))
        if toks and toks[-1].value == '.':
            yield '\n'.join(buffer)
            buffer = []


def main(argv=None):
    parser = argparse.ArgumentParser(
        prog='strew',
        description='Strategy-controlled term rewriting and model checking')
    parser.add_argument('-f', '--file', help='batch script of commands')
    parser.add_argument('-c', '--command', action='append', default=[],
                        help='command to run (repeatable)')
    parser.add_argument('--extended', dest='extended', action='store_true',
                        default=True, help='enable the extended strategy '
                        'language (default)')
    parser.add_argument('--no-extended', dest='extended', action='store_false')
    parser.add_argument('--step-limit', type=int, default=DEFAULT_STEP_BUDGET)
    parser.add_argument('--state-limit', type=int, default=10 ** 6)
    parser.add_argument('--json', action='store_true',
                        help='machine-readable output')
    parser.add_argument('paths', nargs='*', help='module files to load first')
    args = parser.parse_args(argv)

    session = Session(extended=args.extended, step_limit=args.step_limit,
                      state_limit=args.state_limit, json_mode=args.json)
    try:
        for path in args.paths:
            session.run_command(f'load {path} .')
    except StrewError as exc:
        print(f'Error: {exc}', file=sys.stderr)
        return 1

    if args.file:
        try:
            with open(args.file, encoding='utf-8') as handle:
                return run_session(session, list(read_commands(handle)))
        except OSError as exc:
            print(f'Error: {exc}', file=sys.stderr)
            return 1
    if args.command:
        return run_session(session, args.command)
    return run_session(session, _interactive_commands(session), interactive=True)


if __name__ == '__main__':
    sys.exit(main())
