"""Reference models written independently of the package internals.

Values are handled here as msb-first strings over '0', '1', 'x' and patterns
are evaluated by enumerating every match over a whole trace, not step by
step.
"""

import itertools

from hglkit import Logic
from hglkit import verify as V


# ---------------------------------------------------------------- bits

def to_str(lg):
    out = []
    for i in reversed(range(lg.width)):
        if (lg.x >> i) & 1:
            out.append('x')
        else:
            out.append(str((lg.v >> i) & 1))
    return ''.join(out)


def from_str(s):
    v = x = 0
    for ch in s:
        v, x = v << 1, x << 1
        if ch == 'x':
            x |= 1
        elif ch == '1':
            v |= 1
    return Logic(len(s), v, x)


def all_words(width, symbols='01x'):
    for t in itertools.product(symbols, repeat=width):
        yield ''.join(t)


AND_TABLE = {('0', '0'): '0', ('0', '1'): '0', ('0', 'x'): '0',
             ('1', '0'): '0', ('1', '1'): '1', ('1', 'x'): 'x',
             ('x', '0'): '0', ('x', '1'): 'x', ('x', 'x'): 'x'}
OR_TABLE = {('0', '0'): '0', ('0', '1'): '1', ('0', 'x'): 'x',
            ('1', '0'): '1', ('1', '1'): '1', ('1', 'x'): '1',
            ('x', '0'): 'x', ('x', '1'): '1', ('x', 'x'): 'x'}
XOR_TABLE = {('0', '0'): '0', ('0', '1'): '1', ('0', 'x'): 'x',
             ('1', '0'): '1', ('1', '1'): '0', ('1', 'x'): 'x',
             ('x', '0'): 'x', ('x', '1'): 'x', ('x', 'x'): 'x'}
NOT_TABLE = {'0': '1', '1': '0', 'x': 'x'}


def bitwise(table, a, b):
    return ''.join(table[p] for p in zip(a, b))


def invert(a):
    return ''.join(NOT_TABLE[c] for c in a)


def completions(s):
    """ every binary word obtained by replacing each x with 0 or 1 """
    slots = [i for i, c in enumerate(s) if c == 'x']
    for fill in itertools.product('01', repeat=len(slots)):
        t = list(s)
        for i, c in zip(slots, fill):
            t[i] = c
        yield int(''.join(t), 2)


def refines(a, b):
    """ a is at least as defined as b: every known bit of b is the same in a """
    return all(cb == 'x' or ca == cb for ca, cb in zip(a, b))


def decided(results, width=1):
    """ collapse the set of binary outcomes: one value if unanimous, else X """
    results = set(results)
    if len(results) == 1:
        return format(results.pop(), f'0{width}b')
    return 'x' * width


def compare_by_enumeration(op, a, b):
    fn = {'eq': lambda p, q: p == q, 'ne': lambda p, q: p != q,
          'lt': lambda p, q: p < q, 'le': lambda p, q: p <= q,
          'gt': lambda p, q: p > q, 'ge': lambda p, q: p >= q}[op]
    return decided(int(fn(p, q)) for p in completions(a) for q in completions(b))


def arith_pessimistic(op, a, b):
    """ any unknown input bit makes the whole result unknown """
    w = len(a)
    out_w = 2 * w if op == 'mul' else w + 1
    if 'x' in a or 'x' in b:
        return 'x' * out_w
    p, q = int(a, 2), int(b, 2)
    r = {'add': p + q, 'sub': p - q, 'mul': p * q}[op]
    return format(r % (1 << out_w), f'0{out_w}b')


def select_bits(a, low, count):
    """ bits [low, low+count) of an msb-first string, out of range bits are x """
    lsb_first = a[::-1]
    got = [lsb_first[i] if i < len(lsb_first) else 'x' for i in range(low, low + count)]
    return ''.join(reversed(got))


# ---------------------------------------------------------------- patterns
#
# ends(p, trace, i, env) lists every (j, env') such that p, started on step i,
# has a match whose last step is j.

def _bit0(lg):
    if lg is None or lg.x & 1:
        return 'x'
    return str(lg.v & 1)


def _get(trace, i, sig):
    return trace[i][sig]


def _cmp_holds(op, a, b):
    w = max(a.width, b.width)
    sa = to_str(Logic(w, a.v, a.x))
    sb = to_str(Logic(w, b.v, b.x))
    return compare_by_enumeration(op, sa, sb) == '1'


def _check(p, trace, i, env):
    if isinstance(p, V.SignalTrue):
        return '1' in to_str(_get(trace, i, p.sig))
    if isinstance(p, (V.Rose, V.Fell)):
        prev = _bit0(_get(trace, i - 1, p.sig)) if i > 0 else 'x'
        cur = _bit0(_get(trace, i, p.sig))
        want = ('0', '1') if isinstance(p, V.Rose) else ('1', '0')
        return (prev, cur) == want
    if isinstance(p, V.Cmp):
        a = _get(trace, i, p.sig)
        rhs = p.rhs
        if isinstance(rhs, V.Captured):
            if rhs.name not in env:
                return False
            b = env[rhs.name]
        elif isinstance(rhs, Logic):
            b = rhs
        else:
            b = Logic(max(1, int(rhs).bit_length()), int(rhs))
        return _cmp_holds(p.op, a, b)
    raise TypeError(p)


def _uniq(pairs):
    out, seen = [], set()
    for j, e in pairs:
        k = (j, tuple(sorted((n, to_str(v)) for n, v in e.items())))
        if k not in seen:
            seen.add(k)
            out.append((j, e))
    return out


def ends(p, trace, i, env):
    n = len(trace)
    if i >= n:
        return []
    if isinstance(p, (V.SignalTrue, V.Rose, V.Fell, V.Cmp)):
        return [(i, env)] if _check(p, trace, i, env) else []
    if isinstance(p, V.WaitN):
        j = i + p.n - 1
        return [(j, env)] if j < n else []
    if isinstance(p, V.WaitRange):
        return [(i + k - 1, env) for k in range(p.m, p.n + 1) if i + k - 1 < n]
    if isinstance(p, V.Capture):
        e = dict(env)
        for name, s in p.items:
            e[name] = _get(trace, i, s)
        return [(i, e)]
    if isinstance(p, V.Until):
        for j in range(i, n):
            lg = _get(trace, j, p.sig)
            if lg.x == 0 and lg.v == p.value:
                return [(j, env)]
        return []
    if isinstance(p, V.EdgeOf):
        for j in range(max(i, 1), n):
            if _get(trace, j - 1, p.sig) != _get(trace, j, p.sig):
                return [(j, env)]
        return []
    if isinstance(p, V.Seq):
        return _uniq([m for j, e in ends(p.p, trace, i, env) for m in ends(p.q, trace, j + 1, e)])
    if isinstance(p, V.Fuse):
        return _uniq([m for j, e in ends(p.p, trace, i, env) for m in ends(p.q, trace, j, e)])
    if isinstance(p, V.Or):
        return _uniq(ends(p.p, trace, i, env) + ends(p.q, trace, i, env))
    if isinstance(p, V.And):
        out = []
        for j1, e1 in ends(p.p, trace, i, env):
            for j2, e2 in ends(p.q, trace, i, env):
                out.append((max(j1, j2), {**e1, **e2}))
        return _uniq(out)
    if isinstance(p, V.Repeat):
        cur = [(i - 1, env)]
        for _ in range(p.n):
            cur = _uniq([m for j, e in cur for m in ends(p.p, trace, j + 1, e)])
        return cur
    if isinstance(p, V.RepeatRange):
        out = []
        for k in range(p.m, p.n + 1):
            out += ends(V.Repeat(p.p, k), trace, i, env)
        return _uniq(out)
    if isinstance(p, V.Not):
        h = p.p.horizon()
        if i + h - 1 >= n or ends(p.p, trace, i, env):
            return []
        return [(i + h - 1, env)]
    raise TypeError(p)


def verdict(prop, trace, start=0):
    """ 'pass' / 'fail' / 'vacuous' for a trace long enough to decide """
    if isinstance(prop, V.Implies):
        ms = ends(prop.p, trace, start, {})
        if not ms:
            return 'vacuous'
        for j, e in ms:
            if not ends(prop.q, trace, j, e):
                return 'fail'
        return 'pass'
    return 'pass' if ends(prop, trace, start, {}) else 'fail'


def first_end(prop, trace, start=0):
    ms = ends(prop, trace, start, {})
    return min(j for j, _ in ms) if ms else None


# ---------------------------------------------------------------- vending FSM

def coin_value(nickel, dime):
    # both coins in one cycle: the dime assignment comes last and wins
    if dime:
        return 10
    return 5 if nickel else 0


def vending_oracle(coins):
    """ per cycle (cents_after, valid_after, state_name) from cumulative value """
    out = []
    cents = 0
    paid = False
    for n, d in coins:
        if paid:
            # one cycle with valid high, then back to idle whatever the coins
            cents, paid = 0, False
        else:
            cents += coin_value(n, d)
            paid = cents >= 20
        name = 'sOk' if paid else ('sIdle' if cents == 0 else f's{cents}')
        out.append((cents, int(paid), name))
    return out


# ---------------------------------------------------------------- adders

def add_oracle(x, y, w):
    return (x + y) & ((1 << (w + 1)) - 1)
