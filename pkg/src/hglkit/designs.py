"""Packaged example designs and the testbench tasks that exercise them."""

from __future__ import annotations

import random
from dataclasses import dataclass
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

from .builder import (Array, Bundle, Cat, EnumOnehot, Input, Module, Mux, Output, ParamTree,
                      PartRef, Reg, UInt, case, name, switch, when)
from .logic import (Logic, logic_add, logic_and, logic_cat, logic_eq, logic_merge, logic_not,
                    logic_or, logic_select, logic_xor, mask)
from .verify import Delay, task


#------------------
# adders
#------------------

def AdderIO(w: int) -> Array:
    return Bundle(
        x=UInt[w](0) @ Input,
        y=UInt[w](0) @ Input,
        out=UInt[w + 1](0) @ Output)


class FullAdder(Module):
    def build(self):
        self.a, self.b, self.cin = a, b, cin = UInt([0, 0, 0])
        self.p = p = a ^ b
        self.s = p ^ cin
        self.cout = a & b | p & cin


class RippleCarry(Module):
    def build(self):
        w = self.p.w
        self.io = io = AdderIO(w)
        self.adders = adders = Array(FullAdder() for _ in range(w))
        adders[:, 'a'] <<= io.x.split()
        adders[:, 'b'] <<= io.y.split()
        adders[:, 'cin'] <<= (0, *adders[:-1, 'cout'])
        io.out <<= Cat(*adders[:, 's'], adders[-1, 'cout'])


class KoggeStone(Module):
    def build(self):
        w = self.p.w
        self.io = io = AdderIO(w)
        p_odd = io.x ^ io.y
        P = list(p_odd.split())
        G = list((io.x & io.y).split())
        dist = 1
        while dist < w:
            for i in reversed(range(dist, w)):
                G[i] = G[i] | (P[i] & G[i - dist])
                if i >= dist * 2:
                    P[i] = P[i] & P[i - dist]
            dist *= 2
        io.out <<= Cat(0, *G) ^ p_odd


def adder_config(ripple_w: int = 32, kogge_w: int = 64) -> ParamTree:
    return ParamTree(RippleCarry=ParamTree(w=ripple_w), KoggeStone=ParamTree(w=kogge_w))


@task
def fulladder_tb(self, sess, dut, n: int = 8):
    """ walks the eight input combinations, ``n`` steps in total """
    for i in range(n):
        a, b, c = i & 1, (i >> 1) & 1, (i >> 2) & 1
        sess.setv([dut.a, dut.b, dut.cin], [a, b, c])
        yield self.clock_n()
        total = a + b + c
        self.assert_eq(sess.getv(dut.s), total & 1, f'sum of {a}{b}{c}')
        self.assert_eq(sess.getv(dut.cout), total >> 1, f'carry of {a}{b}{c}')


@task
def adder_tb(self, sess, dut, n: int):
    for _ in range(n):
        x, y = sess.setr(dut.io[['x', 'y']])
        yield self.clock_n()
        self.assert_eq(sess.getv(dut.io.out), x + y)


#------------------
# vending machine
#------------------

class VendingMachine(Module):
    """ accepts nickels and dimes; valid for one cycle once 20 cents are in """

    def build(self):
        self.nickel = nickel = UInt(0) @ Input
        self.dime = dime = UInt(0) @ Input
        self.valid = valid = UInt(0) @ Output
        self.s = s = Reg(EnumOnehot())
        with switch(s):
            with case('sIdle'):
                with when(nickel):
                    s <<= 's5'
                with when(dime):
                    s <<= 's10'
            with case('s5'):
                with when(nickel):
                    s <<= 's10'
                with when(dime):
                    s <<= 's15'
            with case('s10'):
                with when(nickel):
                    s <<= 's15'
                with when(dime):
                    s <<= 'sOk'
            with case('s15'):
                with when(nickel):
                    s <<= 'sOk'
                with when(dime):
                    s <<= 'sOk'
            with case('sOk'):
                s <<= 'sIdle'
                valid <<= 1


VENDING_STATES = ('sIdle', 's5', 's10', 's15', 'sOk')


def vending_step(state: str, nickel: int, dime: int) -> str:
    """ reference transition function (a later matching assignment wins) """
    amount = {'sIdle': 0, 's5': 5, 's10': 10, 's15': 15}
    if state == 'sOk':
        return 'sIdle'
    cents = amount[state]
    nxt = state
    if nickel:
        nxt = _cents_state(cents + 5)
    if dime:
        nxt = _cents_state(cents + 10)
    return nxt


def _cents_state(c: int) -> str:
    return 'sOk' if c >= 20 else f's{c}' if c else 'sIdle'


def vending_trace(coins: Sequence[Tuple[int, int]]) -> List[Tuple[str, int]]:
    """ (state, valid) after each clock edge for a coin sequence starting idle """
    st = 'sIdle'
    out = []
    for n, d in coins:
        st = vending_step(st, n, d)
        out.append((st, int(st == 'sOk')))
    return out


@task
def vending_tb(self, sess, dut, sequences: Sequence[Sequence[Tuple[int, int]]]):
    """ each sequence starts from idle; reset is pulsed in between """
    enum = dut.s.type
    rst = sess.reset_signal()
    for seq in sequences:
        sess.setv(rst, 0)
        sess.setv([dut.nickel, dut.dime], [0, 0])
        yield self.clock_n()
        sess.setv(rst, 1)
        self.assert_eq(sess.getv(dut.s), enum.code('sIdle'), 'reset to sIdle')
        for (n, d), (st, valid) in zip(seq, vending_trace(seq)):
            sess.setv([dut.nickel, dut.dime], [n, d])
            yield self.clock_n()
            got = sess.getv(dut.s)
            self.assert_eq(got, enum.code(st), f'state after {n},{d}: expected {st}')
            self.assert_eq(sess.getv(dut.valid), valid, f'valid in {st}')


def random_coins(rng: random.Random, n: int) -> List[Tuple[int, int]]:
    return [rng.choice(((0, 0), (1, 0), (0, 1), (1, 1))) for _ in range(n)]


#------------------
# wallace tree multiplier
#------------------

def _full_add(a, b, c):
    p = a ^ b
    return p ^ c, (a & b) | (p & c)


class Wallace(Module):
    """ w x w multiplier: AND partial products, full-adder column reduction, final add """

    def build(self):
        w = self.p.w
        self.a = a = UInt[w](0) @ Input
        self.b = b = UInt[w](0) @ Input
        self.out = out = UInt[2 * w](0) @ Output
        ab, bb = a.split(), b.split()
        cols: List[list] = [[] for _ in range(2 * w)]
        for i in range(w):
            for j in range(w):
                cols[i + j].append(ab[i] & bb[j])
        while any(len(c) > 2 for c in cols):
            nxt: List[list] = [[] for _ in range(2 * w + 1)]
            for k, c in enumerate(cols):
                i = 0
                while len(c) - i >= 3:
                    s, co = _full_add(c[i], c[i + 1], c[i + 2])
                    nxt[k].append(s)
                    nxt[k + 1].append(co)
                    i += 3
                nxt[k].extend(c[i:])
            cols = nxt[:2 * w]
        row0 = Cat(*[c[0] if c else 0 for c in cols])
        row1 = Cat(*[c[1] if len(c) > 1 else 0 for c in cols])
        out <<= row0 + row1


def random_stimulus(rng: random.Random, width: int, x_ratio: float) -> Logic:
    """ uniform binary word; with probability x_ratio one uniform bit is X """
    v = rng.getrandbits(width)
    if x_ratio > 0 and rng.random() < x_ratio:
        bit = 1 << rng.randrange(width)
        return Logic(width, v & ~bit, bit)
    return Logic(width, v)


@task
def wallace_tb(self, sess, dut, n: int, x_ratio: float = 0.0, check: bool = True):
    w = dut.a.width
    rng = sess.rng
    for _ in range(n):
        a = random_stimulus(rng, w, x_ratio)
        b = random_stimulus(rng, w, x_ratio)
        sess.setv(dut.a, a)
        sess.setv(dut.b, b)
        yield self.clock_n()
        if check:
            got = sess.getv(dut.out)
            if a.x or b.x:
                # every known output bit must hold for each binary filling
                known = mask(2 * w) & ~got.x
                bad = [p for p in _fillings(a) for q in _fillings(b)
                       if (p * q) & known != got.v]
                self.assert_eq(len(bad), 0, f'unsound product bits for {a} * {b}')
            else:
                self.assert_eq(got, a.v * b.v)


def _fillings(lg: Logic) -> List[int]:
    out = [lg.v]
    x = lg.x
    while x:
        bit = x & -x
        out += [v | bit for v in out]
        x ^= bit
    return out


#------------------
# random combinational DAG
#------------------

DAG_KINDS = ('and', 'or', 'xor', 'not', 'add', 'mux', 'eq', 'sel')


class RandomDag(Module):
    """ seeded random combinational network of ``n`` gates over small words

    ``recipe`` keeps every draw, (kind, a, b, c, lo) with node indexes where
    the inputs come first, so ``dag_reference`` can recompute the network.
    """

    def build(self):
        n, seed = self.p.n, self.p.seed
        w = self.p.get('w', 4)
        k = self.p.get('inputs', 4)
        rng = random.Random(seed)
        self.ins = ins = Array(UInt[w](0) @ Input for _ in range(k))
        nodes = list(ins)
        made = []
        self.recipe = recipe = []
        while len(made) < n:
            kind = rng.choice(DAG_KINDS)
            ia, ib, ic = (rng.randrange(len(nodes)) for _ in range(3))
            a, b, c = nodes[ia], nodes[ib], nodes[ic]
            lo = 0
            if kind == 'and':
                r = a & b
            elif kind == 'or':
                r = a | b
            elif kind == 'xor':
                r = a ^ b
            elif kind == 'not':
                r = ~a
            elif kind == 'add':
                r = (a + b)[0:w]
            elif kind == 'mux':
                r = Mux(c[0], a, b)
            elif kind == 'eq':
                r = Cat(a.eq(b), a[1:w])
            else:
                lo = rng.randrange(w)
                r = Cat(a[lo:w], b[0:lo]) if lo else a ^ b
            if isinstance(r, PartRef):
                r = r.value()
            name(r, f'n{len(made)}')
            recipe.append((kind, ia, ib, ic, lo))
            nodes.append(r)
            made.append(r)
        self.nodes = Array(made)
        self.outs = Array(made[-4:])


def dag_reference(recipe, inputs: Sequence[Logic], w: int) -> List[Logic]:
    """ values of every DAG node computed with the value-level functions """
    vals = list(inputs)
    out = []
    for kind, ia, ib, ic, lo in recipe:
        a, b, c = vals[ia], vals[ib], vals[ic]
        if kind == 'and':
            r = logic_and(a, b)
        elif kind == 'or':
            r = logic_or(a, b)
        elif kind == 'xor':
            r = logic_xor(a, b)
        elif kind == 'not':
            r = logic_not(a)
        elif kind == 'add':
            r = logic_select(logic_add(a, b), 0, w)
        elif kind == 'mux':
            sel = logic_select(c, 0, 1)
            r = logic_merge(a, b) if sel.x else (b if sel.v else a)
        elif kind == 'eq':
            r = logic_cat([logic_eq(a, b), logic_select(a, 1, w - 1)])
        elif lo:
            r = logic_cat([logic_select(a, lo, w - lo), logic_select(b, 0, lo)])
        else:
            r = logic_xor(a, b)
        vals.append(r)
        out.append(r)
    return out


def random_word(rng: random.Random, w: int, x_prob: float) -> Logic:
    """ uniform value; each bit is independently X with probability x_prob """
    v = rng.getrandbits(w)
    x = 0
    for i in range(w):
        if rng.random() < x_prob:
            x |= 1 << i
    return Logic(w, v & ~x, x)


@task
def dag_tb(self, sess, dut, n: int, x_prob: float = 0.2, settle: int = 120,
           check: bool = True):
    rng = sess.rng
    w = dut.ins[0].width
    for _ in range(n):
        words = [random_word(rng, w, x_prob) for _ in dut.ins]
        for s, val in zip(dut.ins, words):
            sess.setv(s, val)
        yield Delay(settle)
        if check:
            want = dag_reference(dut.recipe, words, w)
            got = [sess.getv(s) for s in dut.nodes]
            bad = [i for i, (g, e) in enumerate(zip(got, want)) if g != e]
            self.assert_eq(len(bad), 0, f'dag nodes differ from reference: {bad[:5]}')


#------------------
# registry used by the CLI
#------------------

def vending_sequences(rng: random.Random, cycles: int, max_len: int = 6):
    """ random coin sequences covering at least ``cycles`` clock cycles """
    out, used = [], 0
    while used < cycles:
        seq = random_coins(rng, rng.randint(1, max_len))
        out.append(seq)
        used += len(seq) + 1
    return out


@dataclass
class ExampleSpec:
    name: str
    params: Dict[str, Any]
    cycles: int
    about: str
    # (session, params, cycles) -> (design, [tasks])
    setup: Callable


def _setup_fulladder(sess, p, cycles):
    dut = FullAdder()
    return dut, [fulladder_tb(sess, dut, cycles)]


def _setup_ripple(sess, p, cycles):
    dut = RippleCarry()
    return dut, [adder_tb(sess, dut, cycles)]


def _setup_kogge(sess, p, cycles):
    dut = KoggeStone()
    return dut, [adder_tb(sess, dut, cycles)]


def _setup_vending(sess, p, cycles):
    dut = VendingMachine()
    return dut, [vending_tb(sess, dut, vending_sequences(sess.rng, cycles))]


def _setup_wallace(sess, p, cycles):
    dut = Wallace()
    return dut, [wallace_tb(sess, dut, cycles, float(p.get('x_ratio', 0.0)))]


def _setup_dag(sess, p, cycles):
    dut = RandomDag()
    return dut, [dag_tb(sess, dut, cycles, float(p.get('x_prob', 0.2)))]


EXAMPLES: Dict[str, ExampleSpec] = {e.name: e for e in (
    ExampleSpec('fulladder', {}, 8, 'one-bit full adder, exhaustive inputs', _setup_fulladder),
    ExampleSpec('ripple', {'w': 32}, 100, 'ripple-carry adder vs integer addition',
                _setup_ripple),
    ExampleSpec('koggestone', {'w': 64}, 100, 'Kogge-Stone adder vs integer addition',
                _setup_kogge),
    ExampleSpec('vending', {}, 200, 'coin FSM vs reference transition function',
                _setup_vending),
    ExampleSpec('wallace', {'w': 8, 'x_ratio': 0.1}, 100,
                'Wallace-tree multiplier with unknown stimuli', _setup_wallace),
    ExampleSpec('dag', {'n': 50, 'seed': 0, 'x_prob': 0.2}, 50,
                'random combinational network vs value-level reference', _setup_dag),
)}
