import csv
import io
import subprocess
import sys

import pytest

from hglkit.cli import main, parse_params, UsageError


def run(*argv):
    out = io.StringIO()
    code = main(list(argv), out)
    return code, out.getvalue()


def test_parse_params():
    assert parse_params(['w=8', 'name=abc', 'r=0.5', 'flag=True']) == \
        dict(w=8, name='abc', r=0.5, flag=True)
    with pytest.raises(UsageError):
        parse_params(['novalue'])


def test_run_vending_reports_ledger():
    code, text = run('run', 'vending', '--cycles', '40', '--seed', '3')
    assert code == 0
    assert 'example=vending\nseed=3\ncycles=40\n' in text
    assert 'failed=0' in text


def test_run_param_override_and_vcd(tmp_path):
    vcd = tmp_path / 'r.vcd'
    v = tmp_path / 'r.v'
    code, text = run('run', 'ripple', '--param', 'w=6', '--cycles', '10', '--seed', '1',
                     '--vcd', str(vcd), '--verilog', str(v))
    assert code == 0
    assert 'param.w=6' in text
    assert '$enddefinitions' in vcd.read_text()
    assert 'module RippleCarry' in v.read_text()


def test_run_is_deterministic(tmp_path):
    outs = []
    for i in range(2):
        p = tmp_path / f'{i}.vcd'
        code, text = run('run', 'dag', '--cycles', '8', '--seed', '5', '--vcd', str(p))
        outs.append((text, p.read_bytes()))
    assert outs[0] == outs[1]


def test_seed_from_environment(monkeypatch):
    monkeypatch.setenv('HGLKIT_SEED', '12')
    code, text = run('run', 'fulladder')
    assert 'seed=12' in text


def test_strategy_choice():
    a = run('run', 'wallace', '--cycles', '6', '--seed', '2', '--strategy', 'always_full')
    b = run('run', 'wallace', '--cycles', '6', '--seed', '2')
    assert a[0] == b[0] == 0
    # same checks, different counters
    assert a[1].split('checks=')[1] == b[1].split('checks=')[1]
    assert 'strategy=always_full' in a[1]


def test_bench_no_timing_is_deterministic():
    args = ('bench', '--width', '8', '--n-stimuli', '10', '--no-timing', '--seed', '4')
    a, b = run(*args), run(*args)
    assert a == b
    assert a[0] == 0
    lines = a[1].strip().splitlines()
    assert [ln.split()[0] for ln in lines] == ['strategy=optimized', 'strategy=always_full',
                                              'strategy=binary_only']
    assert 'seconds' not in a[1]


def test_bench_sweep_csv(tmp_path):
    path = tmp_path / 's.csv'
    code, text = run('bench', '--width', '4', '--n-stimuli', '5', '--x-ratio', 'sweep',
                     '--strategies', 'optimized,always_full', '--csv', str(path))
    assert code == 0
    rows = list(csv.DictReader(path.open()))
    assert len(rows) == 10
    assert {r['strategy'] for r in rows} == {'optimized', 'always_full'}
    assert text.count('binary_ratio=') == 10


def test_bench_binary_only_with_x_warns(capsys):
    code, text = run('bench', '--width', '4', '--n-stimuli', '5', '--x-ratio', '0.5',
                     '--strategies', 'binary_only', '--no-check', '--no-timing')
    assert code == 0
    assert 'unsound' in capsys.readouterr().err


@pytest.mark.parametrize('argv', [
    ('bench', '--x-ratio', '2'),
    ('bench', '--x-ratio', 'lots'),
    ('bench', '--strategies', 'quick'),
    ('bench', '--design', 'ripple'),
    ('run', 'nosuch'),
    ('run', 'ripple', '--param', 'w'),
])
def test_usage_errors(argv, capsys):
    code, _ = run(*argv)
    assert code == 2
    assert 'hglkit: error:' in capsys.readouterr().err


def test_emit_writes_files(tmp_path):
    code, text = run('emit', 'fulladder', '--out', str(tmp_path))
    assert code == 0
    assert (tmp_path / 'fulladder.v').read_text().startswith('module FullAdder')
    assert (tmp_path / 'fulladder.vcd').exists()
    assert 'lint:' not in text


def test_selftest():
    code, text = run('selftest', '--cycles', '6')
    assert code == 0
    assert text.rstrip().endswith('selftest passed')
    assert text.count('PASS ') == 6


def test_module_entry_point():
    r = subprocess.run([sys.executable, '-m', 'hglkit', 'run', 'fulladder'],
                       capture_output=True, text=True)
    assert r.returncode == 0
    assert 'example=fulladder' in r.stdout
