"""Command line: run the packaged examples, benchmark the strategies, emit
Verilog and waveforms, and self-check the installation.

    hglkit run vending --cycles 200
    hglkit run koggestone --param w=64 --seed 1 --vcd ks.vcd
    hglkit bench --width 32 --n-stimuli 200
    hglkit bench --x-ratio sweep --csv sweep.csv
    hglkit emit fulladder --out build/
    hglkit selftest
"""

from __future__ import annotations

import argparse
import ast
import csv
import os
import sys
import warnings
from typing import Dict, List, Optional, Sequence, TextIO

from .bench import UnsoundStrategyWarning, bench, sweep
from .builder import ParamTree
from .designs import EXAMPLES, ExampleSpec
from .session import Session, seed_from_env
from .sim import STRATEGIES

SWEEP_RATIOS = (0.0, 0.25, 0.5, 0.75, 1.0)


class UsageError(Exception):
    pass


def parse_params(items: Optional[Sequence[str]]) -> Dict[str, object]:
    out: Dict[str, object] = {}
    for item in items or ():
        key, sep, raw = item.partition('=')
        if not sep or not key:
            raise UsageError(f'--param expects key=value, got {item!r}')
        try:
            out[key] = ast.literal_eval(raw)
        except (ValueError, SyntaxError):
            out[key] = raw
    return out


def _example(name: str) -> ExampleSpec:
    try:
        return EXAMPLES[name]
    except KeyError:
        raise UsageError(f'unknown example {name!r}; choose from {", ".join(EXAMPLES)}') from None


def simulate(spec: ExampleSpec, params: Dict[str, object], cycles: int, seed: int,
             strategy: str = 'optimized', track: bool = False) -> Session:
    """ build and run one example; the returned session holds ledger and VCD """
    with Session(ParamTree(**params), seed=seed, strategy=strategy) as sess:
        dut, tasks = spec.setup(sess, params, cycles)
        sess.design = dut
        if track:
            sess.track(dut)
        sess.join(*tasks)
    return sess


#------------------
# commands
#------------------

def cmd_run(args, out: TextIO) -> int:
    spec = _example(args.example)
    params = dict(spec.params)
    params.update(parse_params(args.param))
    cycles = spec.cycles if args.cycles is None else args.cycles
    seed = seed_from_env() if args.seed is None else args.seed
    sess = simulate(spec, params, cycles, seed, args.strategy, track=bool(args.vcd))
    out.write(f'example={spec.name}\nseed={seed}\ncycles={cycles}\n')
    for k in sorted(params):
        out.write(f'param.{k}={params[k]}\n')
    out.write(sess.sim.stats_text())
    out.write(sess.report())
    if args.vcd:
        sess.dump_vcd(args.vcd)
    if args.verilog:
        sess.dump_verilog(args.verilog)
    return 0 if sess.ok else 1


def _table(rows, out: TextIO) -> None:
    head = ('strategy', 'x_ratio', 'cycles', 'events', 'fast', 'full', 'seconds', 'cps',
            'ns/gate')
    out.write('  '.join(f'{h:>11}' for h in head) + '\n')
    for r in rows:
        cells = (r.strategy, f'{r.x_ratio:g}', r.cycles, r.events, r.fast, r.full,
                 f'{r.seconds:.3f}', f'{r.cps:.1f}', f'{r.per_gate_ns:.0f}')
        out.write('  '.join(f'{c:>11}' for c in cells) + '\n')


def cmd_bench(args, out: TextIO) -> int:
    if args.design != 'wallace':
        raise UsageError('only the wallace design is benchmarked')
    strategies = [s.strip() for s in args.strategies.split(',') if s.strip()]
    for s in strategies:
        if s not in STRATEGIES:
            raise UsageError(f'unknown strategy {s!r}; choose from {", ".join(STRATEGIES)}')
    seed = seed_from_env() if args.seed is None else args.seed
    if args.x_ratio == 'sweep':
        results = sweep(SWEEP_RATIOS, strategies, args.width, args.n_stimuli, seed, args.repeat)
        rows = []
        for ratio, res in zip(SWEEP_RATIOS, results):
            for s in strategies:
                r = res[s]
                rows.append(r)
                line = r.counters() if args.no_timing else r.line()
                out.write(f'binary_ratio={ratio:g} {line}\n')
    else:
        try:
            x_ratio = float(args.x_ratio)
        except ValueError:
            raise UsageError(f'--x-ratio takes a number in [0, 1] or "sweep"') from None
        if not 0.0 <= x_ratio <= 1.0:
            raise UsageError('--x-ratio must lie in [0, 1]')
        res = bench(strategies, args.width, args.n_stimuli, x_ratio, seed, args.repeat,
                    check=not args.no_check)
        rows = [res[s] for s in strategies]
        for r in rows:
            out.write((r.counters() if args.no_timing else r.line()) + '\n')
    if not args.no_timing:
        out.write('\n')
        _table(rows, out)
    if args.csv:
        with open(args.csv, 'w', newline='') as f:
            w = csv.writer(f)
            w.writerow(['strategy', 'x_ratio', 'cycles', 'events', 'fast', 'full', 'seconds',
                        'cps', 'per_gate_ns'])
            for r in rows:
                w.writerow([r.strategy, r.x_ratio, r.cycles, r.events, r.fast, r.full,
                            f'{r.seconds:.6f}', f'{r.cps:.3f}', f'{r.per_gate_ns:.3f}'])
    return 0 if all(r.failed == 0 for r in rows) else 1


def cmd_emit(args, out: TextIO) -> int:
    spec = _example(args.example)
    params = dict(spec.params)
    params.update(parse_params(args.param))
    cycles = spec.cycles if args.cycles is None else args.cycles
    seed = seed_from_env() if args.seed is None else args.seed
    sess = simulate(spec, params, cycles, seed, track=True)
    os.makedirs(args.out, exist_ok=True)
    vpath = os.path.join(args.out, f'{spec.name}.v')
    wpath = os.path.join(args.out, f'{spec.name}.vcd')
    sess.dump_verilog(vpath)
    sess.dump_vcd(wpath)
    problems = sess.lint()
    out.write(f'wrote {vpath}\nwrote {wpath}\n')
    for p in problems:
        out.write(f'lint: {p}\n')
    return 0 if sess.ok and not problems else 1


def selftest_examples(out: TextIO, cycles: int = 20) -> bool:
    """ every example under optimized and always_full: checks pass, VCDs match,
    Verilog lints clean """
    ok = True
    for spec in EXAMPLES.values():
        a = simulate(spec, dict(spec.params), cycles, 0, 'optimized', track=True)
        b = simulate(spec, dict(spec.params), cycles, 0, 'always_full', track=True)
        same = a.vcd_text() == b.vcd_text()
        problems = a.lint()
        good = a.ok and b.ok and same and not problems
        ok &= good
        out.write(f'{"PASS" if good else "FAIL"} {spec.name}: checks '
                  f'{a.ledger.passed}/{a.ledger.passed + a.ledger.failed}, '
                  f'vcd {"identical" if same else "DIFFERS"}, lint {len(problems)} issue(s)\n')
    return ok


def cmd_selftest(args, out: TextIO) -> int:
    ok = selftest_examples(out, args.cycles)
    if args.pytest:
        import pytest
        here = os.path.dirname(os.path.abspath(__file__))
        tests = os.path.normpath(os.path.join(here, '..', '..', 'tests'))
        if not os.path.isdir(tests):
            out.write(f'no test directory at {tests}\n')
            return 1
        ok &= pytest.main(['-q', tests]) == 0
    out.write('selftest ' + ('passed' if ok else 'FAILED') + '\n')
    return 0 if ok else 1


#------------------
# entry
#------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog='hglkit', description=__doc__.split('\n')[0])
    sub = ap.add_subparsers(dest='command', required=True)

    def example_args(p):
        p.add_argument('example', help=f'one of: {", ".join(EXAMPLES)}')
        p.add_argument('--cycles', type=int, help='stimulus steps (per-example default)')
        p.add_argument('--seed', type=int, help='random seed (default: $HGLKIT_SEED or 0)')
        p.add_argument('--param', action='append', metavar='KEY=VALUE',
                       help='design parameter, repeatable')

    p = sub.add_parser('run', help='simulate an example and check it')
    example_args(p)
    p.add_argument('--strategy', choices=STRATEGIES, default='optimized')
    p.add_argument('--vcd', metavar='PATH', help='write a waveform of every named signal')
    p.add_argument('--verilog', metavar='PATH', help='also write the generated Verilog')
    p.set_defaults(func=cmd_run)

    p = sub.add_parser('bench', help='compare simulation strategies on the multiplier')
    p.add_argument('--design', default='wallace')
    p.add_argument('--width', type=int, default=32)
    p.add_argument('--n-stimuli', type=int, default=200)
    p.add_argument('--x-ratio', default='0',
                   help='chance that a stimulus word carries an X bit, or "sweep"')
    p.add_argument('--strategies', default=','.join(STRATEGIES))
    p.add_argument('--repeat', type=int, default=1, help='keep the best of N runs')
    p.add_argument('--seed', type=int)
    p.add_argument('--no-timing', action='store_true',
                   help='print only the deterministic counters')
    p.add_argument('--no-check', action='store_true', help='skip product checks')
    p.add_argument('--csv', metavar='PATH')
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser('emit', help='write Verilog and a VCD for an example')
    example_args(p)
    p.add_argument('--out', default='.', metavar='DIR')
    p.set_defaults(func=cmd_emit)

    p = sub.add_parser('selftest', help='run every example under two strategies')
    p.add_argument('--cycles', type=int, default=20)
    p.add_argument('--pytest', action='store_true', help='also run the repository tests')
    p.set_defaults(func=cmd_selftest)
    return ap


def main(argv: Optional[List[str]] = None, out: Optional[TextIO] = None) -> int:
    out = out or sys.stdout
    ap = build_parser()
    args = ap.parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter('always', UnsoundStrategyWarning)
            warnings.showwarning = _show_warning
            return args.func(args, out)
    except UsageError as e:
        ap.print_usage(sys.stderr)
        sys.stderr.write(f'hglkit: error: {e}\n')
        return 2


def _show_warning(message, category, filename, lineno, file=None, line=None):
    sys.stderr.write(f'warning: {message}\n')


if __name__ == '__main__':
    raise SystemExit(main())
