import io
import json

import pytest

from strew.cli import Session, main, read_commands, run_session
from strew.parser import fixture_path


def run_commands(commands, **kwargs):
    out = io.StringIO()
    err = io.StringIO()
    session = Session(out=out, **kwargs)
    code = run_session(session, commands, err=err)
    return code, out.getvalue(), err.getvalue()


def load_and(fixture, *commands):
    return [f'load {fixture_path(fixture)} .'] + list(commands)


def solutions_of(output):
    return {line.split(': ', 1)[1] for line in output.splitlines()
            if line.startswith('Solution')}


def test_reduce(capsys):
    code, out, _ = run_commands(load_and('llist.maude', 'select LLIST .',
                                         'red length(a b c) .'))
    assert code == 0
    assert 'result: 3' in out


def test_srewrite_session():
    code, out, _ = run_commands(load_and(
        'llist.maude', 'select LLIST .',
        'srew a b c using top(pop) ; top(put[L <- d]) .'))
    assert code == 0
    assert solutions_of(out) == {'a b d'}
    assert 'No more solutions.' in out


def test_multistrategy_commands():
    code, out, _ = run_commands(load_and(
        'llist.maude', 'select LLIST .',
        'srew nil using seq(a b), seq(c d) by turns .',
        'srew nil using seq(a b), seq(c d) by concurrent .',
        'srew nil using seq(a b), seq(c d) by steps 2 .',
        'srew nil using seq(a b), seq(c d) by custom step(0) ; step(1) .'))
    assert code == 0
    blocks = out.split('No more solutions.')
    assert solutions_of(blocks[0]) == {'a c b d'}
    assert len(solutions_of(blocks[1])) == 6
    assert solutions_of(blocks[2]) == {'a b', 'a c', 'c a', 'c d'}
    assert solutions_of(blocks[3]) == {'a c'}


def test_dsrew_same_set():
    _, bfs, _ = run_commands(load_and('llist.maude', 'select LLIST .',
                                      'srew a b c using pop * .'))
    _, dfs, _ = run_commands(load_and('llist.maude', 'select LLIST .',
                                      'dsrew a b c using pop * .'))
    assert solutions_of(bfs) == solutions_of(dfs)


def test_transform_and_run():
    code, out, _ = run_commands(load_and(
        'lazylist.maude',
        'transform csr LAZY-LIST .',
        'select LAZY-LIST-CSR .',
        'srew take(3, natsFrom(0)) using norm-via-munorm .'))
    assert code == 0
    assert 'Module LAZY-LIST-CSR loaded.' in out
    assert solutions_of(out) == {'0 : 1 : 2 : nil'}


def test_check_exit_codes():
    holds = load_and('tictactoe.maude', 'select TICTACTOE-CHECK .',
                     'check [] ~ Owins from initial using perfectX, randomO by turns .')
    code, out, _ = run_commands(holds)
    assert code == 0
    assert 'The property is satisfied.' in out
    fails = load_and('tictactoe.maude', 'select TICTACTOE-CHECK .',
                     'check [] ~ Owins from initial using betterX, randomO by turns .')
    code2, out2, _ = run_commands(fails)
    assert code2 == 2
    assert 'does' in out2 and out2.count('|') >= 2


def test_errors_do_not_kill_interactive_session():
    out = io.StringIO()
    err = io.StringIO()
    session = Session(out=out)
    code = run_session(session, ['bogus command .',
                                 f'load {fixture_path("llist.maude")} .',
                                 'select LLIST .', 'red length(a) .'],
                       interactive=True, err=err)
    assert 'Error:' in err.getvalue()
    assert 'result: 1' in out.getvalue()


def test_no_module_selected_error():
    code, out, err = run_commands(['red 3 .'])
    assert code == 1
    assert 'no module selected' in err


def test_quit():
    code, out, _ = run_commands(['quit .', 'red 3 .'])
    assert code == 0


def test_show_module():
    code, out, _ = run_commands(load_and('foo.maude', 'select FOO .',
                                         'show module .'))
    assert code == 0
    assert 'system module FOO' in out
    assert 'op f : Foo Foo -> Foo [ctor]' in out


def test_json_output():
    code, out, _ = run_commands(load_and(
        'llist.maude', 'select LLIST .',
        'red length(a b) .',
        'srew nil using seq(a b), seq(c d) by concurrent .'), json_mode=True)
    lines = [json.loads(line) for line in out.splitlines()
             if line.startswith('{')]
    reduced = next(p for p in lines if p['command'] == 'reduce')
    assert reduced['result'] == '2'
    srew = next(p for p in lines if p['command'] == 'srewrite')
    assert len(srew['solutions']) == 6


def test_json_check_counterexample():
    code, out, _ = run_commands(load_and(
        'tictactoe.maude', 'select TICTACTOE-CHECK .',
        'check <> Xwins from initial using perfectX, randomO by turns .'),
        json_mode=True)
    assert code == 2
    payload = json.loads(out.splitlines()[-1])
    assert payload['verdict'] == 'fails'
    assert payload['counterexample']['prefix']
    assert payload['counterexample']['cycle']


def test_rew_command():
    code, out, _ = run_commands(load_and('llist.maude', 'select LLIST .',
                                         'rew [1] a b c .', 'rew a b c .'))
    assert code == 0
    lines = [l for l in out.splitlines() if l.startswith('result')]
    assert lines[1] == 'result: nil'


def test_read_commands_multiline():
    text = 'select LLIST\n.\nred length(a)\n  .\n'
    chunks = list(read_commands(io.StringIO(text)))
    assert len(chunks) == 2


def test_main_entry_batch(tmp_path):
    script = tmp_path / 'script.strew'
    script.write_text(f'load {fixture_path("llist.maude")} .\n'
                      'select LLIST .\n'
                      'srew nil using seq(a) .\n'
                      'quit .\n')
    assert main(['-f', str(script)]) == 0
    assert main(['-c', 'quit .']) == 0


def test_main_command_check(capsys):
    code = main(['-c', f'load {fixture_path("tictactoe.maude")} .',
                 '-c', 'select TICTACTOE-CHECK .',
                 '-c', 'check [] (~ Owins /\\ ~ Xwins) from initial '
                       'using perfectX, perfectO by turns .'])
    out = capsys.readouterr().out
    assert code == 0
    assert 'The property is satisfied.' in out


# ----------------------------------------------------------------------
# Golden transcripts (solution sets compared order-insensitively)

GOLDEN = [
    ('llist.maude', 'LLIST',
     ['srew nil using seq(a b), seq(c d) by turns .'],
     [{'a c b d'}]),
    ('llist.maude', 'LLIST',
     ['srew nil using seq(a b), seq(c d) by concurrent .'],
     [{'a b c d', 'a c b d', 'a c d b', 'c a b d', 'c a d b', 'c d a b'}]),
    ('llist.maude', 'LLIST',
     ['srew a b c using pop ! .'],
     [{'nil'}]),
    ('foo.maude', 'FOO',
     ['srew f(f(a, b), f(a, a)) using f(swap, gt-all(next)) .'],
     [{'f(f(b, a), f(b, b))'}]),
]


@pytest.mark.parametrize('fixture,module,commands,expected', GOLDEN)
def test_golden_solution_sets(fixture, module, commands, expected):
    code, out, _ = run_commands(load_and(fixture, f'select {module} .', *commands))
    assert code == 0
    blocks = [b for b in out.split('No more solutions.') if 'Solution' in b]
    assert len(blocks) == len(expected)
    for block, want in zip(blocks, expected):
        got = solutions_of(block)
        assert got == want
        # counts are exact: every solution line is distinct
        count = sum(1 for line in block.splitlines() if line.startswith('Solution'))
        assert count == len(want)
