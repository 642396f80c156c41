import itertools
import os
import re

import pytest

from hglkit import (BitPat, Input, Logic, Module, Output, ParamTree, Session, UInt, case, switch,
                    when)
from hglkit.designs import EXAMPLES, FullAdder, KoggeStone, RippleCarry, VendingMachine
from hglkit.verilog import bitpat_literal, emit_units, lint, literal

GOLDEN = os.path.join(os.path.dirname(__file__), 'golden')


def emitted(design, **params):
    with Session(ParamTree(**params)) as sess:
        d = design()
    return sess, sess.verilog_text(d)


def golden(name):
    with open(os.path.join(GOLDEN, name)) as f:
        return f.read()


# ---------------------------------------------------------------- a tiny evaluator
#
# Enough of Verilog to run the combinational adders: continuous assigns over
# & | ^ ~, bit and part selects, concatenation, sized literals and module
# instances with named ports.

TOKEN = re.compile(r"\s*(\d+'[bdh][0-9a-fA-FxX_]+|\d+|[A-Za-z_][A-Za-z0-9_$]*|.)")


def tokenize(s):
    return [t for t in TOKEN.findall(s) if t.strip()]


class ExprParser:
    def __init__(self, toks, nets):
        self.toks, self.i, self.nets = toks, 0, nets

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else None

    def take(self, want=None):
        t = self.toks[self.i]
        if want is not None and t != want:
            raise SyntaxError(f'expected {want}, got {t}')
        self.i += 1
        return t

    def expr(self):
        return self.binary(0)

    OPS = ['|', '^', '&']

    def binary(self, level):
        if level == len(self.OPS):
            return self.unary()
        w, v = self.binary(level + 1)
        while self.peek() == self.OPS[level]:
            self.take()
            w2, v2 = self.binary(level + 1)
            w = max(w, w2)
            v = {'|': v | v2, '^': v ^ v2, '&': v & v2}[self.OPS[level]]
        return w, v

    def unary(self):
        if self.peek() == '~':
            self.take()
            w, v = self.unary()
            return w, ~v & ((1 << w) - 1)
        return self.primary()

    def primary(self):
        t = self.take()
        if t == '(':
            r = self.expr()
            self.take(')')
            return r
        if t == '{':
            parts = [self.expr()]
            while self.peek() == ',':
                self.take()
                parts.append(self.expr())
            self.take('}')
            w = v = 0
            for pw, pv in parts:
                w, v = w + pw, (v << pw) | pv
            return w, v
        m = re.fullmatch(r"(\d+)'([bdh])(.+)", t)
        if m:
            base = {'b': 2, 'd': 10, 'h': 16}[m.group(2)]
            return int(m.group(1)), int(m.group(3).replace('_', ''), base)
        w, v = self.nets[t]
        if self.peek() == '[':
            self.take()
            hi = int(self.take())
            lo = hi
            if self.peek() == ':':
                self.take()
                lo = int(self.take())
            self.take(']')
            return hi - lo + 1, (v >> lo) & ((1 << (hi - lo + 1)) - 1)
        return w, v


def parse_modules(text):
    mods = {}
    for m in re.finditer(r'module (\w+) \((.*?)\);(.*?)endmodule', text, re.S):
        name, ports_txt, body = m.groups()
        ports = []
        for p in ports_txt.split(','):
            pm = re.search(r'(input|output) logic (?:\[(\d+):0\] )?(\w+)', p)
            ports.append((pm.group(1), int(pm.group(2) or 0) + 1, pm.group(3)))
        decls = {n: int(h or 0) + 1 for h, n in re.findall(r'^\s*logic (?:\[(\d+):0\] )?(\w+);',
                                                             body, re.M)}
        assigns = re.findall(r'assign (\w+) = (.*?);', body)
        insts = []
        for im in re.finditer(r'^\s*(\w+) (\w+) \((.*?)\);', body, re.M | re.S):
            conns = dict(re.findall(r'\.(\w+)\((\w+)\)', im.group(3)))
            insts.append((im.group(1), conns))
        mods[name] = (ports, decls, assigns, insts)
    return mods


def run_module(mods, name, inputs):
    ports, decls, assigns, insts = mods[name]
    widths = {n: w for _, w, n in ports}
    widths.update(decls)
    nets = {n: (w, 0) for n, w in widths.items()}
    for n, v in inputs.items():
        nets[n] = (widths[n], v)
    # acyclic logic settles within as many passes as there are nets
    for _ in range(len(nets) + 1):
        before = dict(nets)
        for lhs, rhs in assigns:
            w, v = ExprParser(tokenize(rhs), nets).expr()
            nets[lhs] = (widths[lhs], v & ((1 << widths[lhs]) - 1))
        for mod, conns in insts:
            sub_ports = mods[mod][0]
            ins = {p: nets[conns[p]][1] for d, _, p in sub_ports if d == 'input'}
            outs = run_module(mods, mod, ins)
            for d, _, p in sub_ports:
                if d == 'output':
                    nets[conns[p]] = (widths[conns[p]], outs[p])
        if nets == before:
            break
    return {n: nets[n][1] for d, _, n in ports if d == 'output'}


# ---------------------------------------------------------------- goldens

@pytest.mark.parametrize('design, params, fname', [
    (FullAdder, {}, 'fulladder.v'),
    (RippleCarry, {'w': 8}, 'ripple8.v'),
    (VendingMachine, {}, 'vending.v'),
])
def test_golden(design, params, fname):
    _, text = emitted(design, **params)
    assert text == golden(fname)


def test_golden_fulladder_computes_addition():
    mods = parse_modules(golden('fulladder.v'))
    for a, b, c in itertools.product((0, 1), repeat=3):
        out = run_module(mods, 'FullAdder', dict(a=a, b=b, cin=c))
        assert out['s'] + 2 * out['cout'] == a + b + c


def test_golden_ripple8_computes_addition():
    mods = parse_modules(golden('ripple8.v'))
    assert set(mods) == {'FullAdder', 'RippleCarry'}
    for x, y in itertools.product(range(0, 256, 5), range(0, 256, 7)):
        out = run_module(mods, 'RippleCarry', dict(io_x=x, io_y=y))
        assert out['io_out'] == x + y


def test_koggestone_emission_computes_addition():
    _, text = emitted(KoggeStone, w=8)
    mods = parse_modules(text)
    top = [n for n in mods if n.startswith('KoggeStone')][0]
    for x, y in [(0, 0), (255, 1), (170, 85), (200, 100), (255, 255), (1, 127)]:
        out = run_module(mods, top, dict(io_x=x, io_y=y))
        assert out['io_out'] == x + y


def test_vending_golden_structure():
    text = golden('vending.v')
    assert 'always @(posedge clk or negedge rst_n)' in text
    assert re.search(r'localparam \[4:0\] sOk = 5\'d16;', text)
    # one-hot codes
    codes = re.findall(r"localparam \[4:0\] \w+ = 5'd(\d+);", text)
    assert sorted(int(c) for c in codes) == [1, 2, 4, 8, 16]


# ---------------------------------------------------------------- lint

@pytest.mark.parametrize('name', list(EXAMPLES))
def test_examples_lint_clean(name):
    spec = EXAMPLES[name]
    with Session(ParamTree(**spec.params)) as sess:
        dut, _ = spec.setup(sess, dict(spec.params), 2)
    assert sess.lint(dut) == []


def _unit(design, **params):
    with Session(ParamTree(**params)) as sess:
        d = design()
    sess.elaborate()
    units = emit_units(sess.state.circuit, [d])
    return dict(units)


def test_lint_catches_problems():
    units = _unit(FullAdder)
    u = units['FullAdder']
    assert lint(u) == []
    u.decls.append(u.decls[0])
    assert any('declared 2 times' in p for p in lint(u))
    u.decls.pop()
    u.blocks.append(u.blocks[0])
    assert any('drivers' in p for p in lint(u))


# ---------------------------------------------------------------- pieces

def test_literals():
    assert literal(Logic(4, 5)) == "4'd5"
    assert literal(Logic(1, 1)) == "1'b1"
    assert literal(Logic(4, 0b1001, 0b0100)) == "4'b1x01"
    assert literal(Logic(3, 0, 7)) == "3'bxxx"
    assert literal(Logic(8, 0, 255)) == "{8{1'bx}}"
    assert bitpat_literal(BitPat("3'b1?0")) == "3'b1?0"


def test_same_params_share_a_module():
    _, text = emitted(RippleCarry, w=8)
    assert text.count('module FullAdder') == 1


def test_different_params_get_distinct_modules():
    class Pair(Module):
        def build(self):
            self.a = Narrow()
            self.b = Wide()

    class Narrow(Module):
        def build(self):
            self.i = UInt[2](0) @ Input
            self.o = UInt[2](0) @ Output
            self.o <<= ~self.i

    class Wide(Module):
        def build(self):
            self.i = UInt[6](0) @ Input
            self.o = UInt[6](0) @ Output
            self.o <<= ~self.i

    _, text = emitted(Pair)
    names = re.findall(r'^module (\w+)', text, re.M)
    assert len(names) == len(set(names)) == 3
    assert text.index('module Narrow') < text.index('module Pair')


def test_when_chain_emits_if_else():
    class Pick(Module):
        def build(self):
            self.s = UInt[2](0) @ Input
            self.o = UInt[3](0) @ Output
            with when(self.s.eq(0)):
                self.o <<= 1
            with when(self.s.eq(1)):
                self.o <<= 2

    _, text = emitted(Pick)
    assert 'always @*' in text
    assert text.count('if (') == 2
    with Session() as sess:
        Pick()
    assert sess.lint() == []


def test_switch_with_bitpat():
    class Dec(Module):
        def build(self):
            self.s = UInt[3](0) @ Input
            self.o = UInt[1](0) @ Output
            with switch(self.s):
                with case(BitPat("3'b1??")):
                    self.o <<= 1

    _, text = emitted(Dec)
    assert 'casez' in text or '?' in text
