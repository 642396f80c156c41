"""Gate kinds and their two simulation functions.

``fast()`` evaluates the value plane assuming every input is binary and
returns the new value word of ``self.out``. ``full()`` evaluates both planes
with three-state semantics and returns ``(v, x)``. Either may return None
when the gate scheduled its own events or has nothing to drive.
"""

from __future__ import annotations

import itertools
from typing import List, Optional, Sequence, Tuple

from .ir import EnumType, Gate, NetlistError, SignalData
from .logic import (BitPat, Logic, and_planes, arith_planes, bitpat_planes,
                    compare_planes, divmod_planes, extend_planes, mask,
                    merge_planes, not_planes, or_planes, reduce_planes, sext,
                    select_planes, truth_planes, xor_planes, insert_planes)

# three-valued scalars used for conditions
F, T, X = 0, 1, 2


def _truth(s: SignalData) -> int:
    if s.v:
        return T
    return X if s.x else F


#------------------
# combinational
#------------------

class Not(Gate):
    kind = 'not'
    __slots__ = ('a', 'm')

    def __init__(self, a: SignalData, delay: int = 1) -> None:
        super().__init__(delay)
        self.a = a
        self.m = mask(a.width)

    def fast(self):
        return self.m & ~self.a.v

    def full(self):
        a = self.a
        return not_planes(a.v, a.x, self.m)


class _Binary(Gate):
    __slots__ = ('a', 'b', 'm')

    def __init__(self, a: SignalData, b: SignalData, delay: int = 1) -> None:
        super().__init__(delay)
        self.a, self.b = a, b
        self.m = mask(a.width)

    def prepare(self) -> None:
        self.m = mask(self.a.width)


class And(_Binary):
    kind = 'and'
    __slots__ = ()

    def fast(self):
        return self.a.v & self.b.v

    def full(self):
        a, b = self.a, self.b
        return and_planes(a.v, a.x, b.v, b.x, self.m)


class Or(_Binary):
    kind = 'or'
    __slots__ = ()

    def fast(self):
        return self.a.v | self.b.v

    def full(self):
        a, b = self.a, self.b
        return or_planes(a.v, a.x, b.v, b.x, self.m)


class Xor(_Binary):
    kind = 'xor'
    __slots__ = ()

    def fast(self):
        return self.a.v ^ self.b.v

    def full(self):
        a, b = self.a, self.b
        return xor_planes(a.v, a.x, b.v, b.x, self.m)


class Arith(_Binary):
    """ add/sub (width+1) and mul (2*width), optionally signed """

    __slots__ = ('op', 'signed', 'w', 'om')

    def __init__(self, op: str, a, b, signed: bool = False, delay: int = 1) -> None:
        super().__init__(a, b, delay)
        self.op, self.signed = op, signed
        self.prepare()

    @property
    def kind(self):
        return self.op

    def prepare(self) -> None:
        self.w = self.a.width
        self.om = mask(2 * self.w if self.op == 'mul' else self.w + 1)

    def fast(self):
        a, b = self.a.v, self.b.v
        if self.signed:
            ow = self.om.bit_length()
            a, b = sext(a, self.w, ow), sext(b, self.w, ow)
        op = self.op
        if op == 'add':
            return (a + b) & self.om
        if op == 'sub':
            return (a - b) & self.om
        return (a * b) & self.om

    def full(self):
        a, b = self.a, self.b
        return arith_planes(self.op, a.v, a.x, b.v, b.x, self.w, self.signed)

    def describe(self) -> str:
        return 'signed' if self.signed else ''


class Compare(_Binary):
    __slots__ = ('op', 'signed')

    def __init__(self, op: str, a, b, signed: bool = False, delay: int = 1) -> None:
        super().__init__(a, b, delay)
        if op not in ('eq', 'ne', 'lt', 'le', 'gt', 'ge'):
            raise NetlistError(f'unknown comparison {op!r}')
        self.op, self.signed = op, signed

    @property
    def kind(self):
        return self.op

    def fast(self):
        a, b = self.a.v, self.b.v
        op = self.op
        if op == 'eq':
            return int(a == b)
        if op == 'ne':
            return int(a != b)
        if self.signed:
            sb = 1 << (self.a.width - 1)
            a ^= sb
            b ^= sb
        if op == 'lt':
            return int(a < b)
        if op == 'le':
            return int(a <= b)
        if op == 'gt':
            return int(a > b)
        return int(a >= b)

    def full(self):
        a, b = self.a, self.b
        return compare_planes(self.op, a.v, a.x, b.v, b.x, a.width, self.signed)


class Reduce(Gate):
    __slots__ = ('a', 'op', 'm')

    def __init__(self, op: str, a: SignalData, delay: int = 1) -> None:
        super().__init__(delay)
        if op not in ('and', 'or', 'xor'):
            raise NetlistError(f'unknown reduction {op!r}')
        self.op, self.a = op, a
        self.m = mask(a.width)

    @property
    def kind(self):
        return f'reduce_{self.op}'

    def prepare(self) -> None:
        self.m = mask(self.a.width)

    def fast(self):
        v = self.a.v
        if self.op == 'and':
            return int(v == self.m)
        if self.op == 'or':
            return int(v != 0)
        return bin(v).count('1') & 1

    def full(self):
        a = self.a
        return reduce_planes(self.op, a.v, a.x, self.m)


class DivMod(Gate):
    """ two outputs: quotient then remainder; zero divisor yields X, so always full """

    kind = 'divmod'
    always_full = True
    __slots__ = ('a', 'b')

    def __init__(self, a: SignalData, b: SignalData, delay: int = 1) -> None:
        super().__init__(delay)
        self.a, self.b = a, b

    def fast(self):
        a, b = self.a.v, self.b.v
        q, r = (a // b, a % b) if b else (0, 0)
        sim = self.sim
        sim.post_v(self.delay, self.writers[0].signal, q)
        sim.post_v(self.delay, self.writers[1].signal, r)

    def full(self):
        a, b = self.a, self.b
        qv, qx, rv, rx = divmod_planes(a.v, a.x, b.v, b.x, a.width)
        sim = self.sim
        sim.post(self.delay, self.writers[0].signal, qv, qx)
        sim.post(self.delay, self.writers[1].signal, rv, rx)


class Cat(Gate):
    """ parts[0] lands in the low bits """

    kind = 'cat'
    __slots__ = ('parts', 'shifts')

    def __init__(self, parts: Sequence[SignalData], delay: int = 1) -> None:
        super().__init__(delay)
        self.parts = list(parts)
        self.prepare()

    def prepare(self) -> None:
        shifts, sh = [], 0
        for p in self.parts:
            shifts.append(sh)
            sh += p.width
        self.shifts = shifts

    def fast(self):
        v = 0
        for p, sh in zip(self.parts, self.shifts):
            v |= p.v << sh
        return v

    def full(self):
        v = x = 0
        for p, sh in zip(self.parts, self.shifts):
            v |= p.v << sh
            x |= p.x << sh
        return v, x


class Select(Gate):
    """ static part-select; out-of-range bits read X, such gates always run full """

    kind = 'select'
    __slots__ = ('a', 'low', 'count', 'm', 'always_full')

    def __init__(self, a: SignalData, low: int, count: int, delay: int = 1) -> None:
        super().__init__(delay)
        if count < 1 or low < 0:
            raise NetlistError(f'bad select [{low} +: {count}]')
        self.a, self.low, self.count = a, low, count
        self.m = mask(count)
        self.always_full = low + count > a.width

    def prepare(self) -> None:
        self.always_full = self.low + self.count > self.a.width

    def fast(self):
        return (self.a.v >> self.low) & self.m

    def full(self):
        a = self.a
        return select_planes(a.v, a.x, a.width, self.low, self.count)

    def describe(self) -> str:
        return f'[{self.low}+:{self.count}]'


class DynSelect(Gate):
    kind = 'dyn_select'
    always_full = True
    __slots__ = ('a', 'idx', 'count', 'm')

    def __init__(self, a: SignalData, idx: SignalData, count: int, delay: int = 1) -> None:
        super().__init__(delay)
        self.a, self.idx, self.count = a, idx, count
        self.m = mask(count)

    def fast(self):
        return (self.a.v >> self.idx.v) & self.m

    def full(self):
        idx = self.idx
        if idx.x:
            return 0, self.m
        a = self.a
        return select_planes(a.v, a.x, a.width, idx.v, self.count)

    def describe(self) -> str:
        return f'+:{self.count}'


class Ext(Gate):
    """ zero/sign extension or truncation to ``width`` """

    kind = 'ext'
    __slots__ = ('a', 'width', 'signed', 'm')

    def __init__(self, a: SignalData, width: int, signed: bool, delay: int = 1) -> None:
        super().__init__(delay)
        self.a, self.width, self.signed = a, width, signed
        self.m = mask(width)

    def fast(self):
        a = self.a
        if self.signed:
            return sext(a.v, a.width, self.width)
        return a.v & self.m

    def full(self):
        a = self.a
        return extend_planes(a.v, a.x, a.width, self.width, self.signed)

    def describe(self) -> str:
        return ('sext' if self.signed else 'zext') + str(self.width)


class Mux(Gate):
    """ sel ? b : a, with sel truthy when any bit is 1 """

    kind = 'mux'
    __slots__ = ('sel', 'a', 'b')

    def __init__(self, sel: SignalData, a: SignalData, b: SignalData, delay: int = 1) -> None:
        super().__init__(delay)
        self.sel, self.a, self.b = sel, a, b

    def fast(self):
        return self.b.v if self.sel.v else self.a.v

    def full(self):
        t = _truth(self.sel)
        a, b = self.a, self.b
        if t == T:
            return b.v, b.x
        if t == F:
            return a.v, a.x
        return merge_planes(a.v, a.x, b.v, b.x)


class Match(Gate):
    """ comparison against a BitPat """

    kind = 'match'
    __slots__ = ('a', 'pat')

    def __init__(self, a: SignalData, pat: BitPat, delay: int = 1) -> None:
        super().__init__(delay)
        self.a, self.pat = a, pat

    def fast(self):
        return int(not (self.a.v ^ self.pat.value) & self.pat.care)

    def full(self):
        a = self.a
        return bitpat_planes(self.pat.care, self.pat.value, a.v, a.x)

    def describe(self) -> str:
        return repr(self.pat)


#------------------
# conditions
#------------------

class WhenFrame:
    """ one when/elsewhen/otherwise chain; ``conds[k] is None`` marks otherwise """

    __slots__ = ('conds', 'closed', 'id')

    def __init__(self, fid: int) -> None:
        self.id = fid
        self.conds: List[Optional[SignalData]] = []
        self.closed = False

    def signals(self) -> List[SignalData]:
        return [c for c in self.conds if c is not None]

    def active_fast(self, k: int) -> bool:
        conds = self.conds
        for j in range(k):
            if conds[j].v:
                return False
        c = conds[k]
        return c is None or c.v != 0

    def active_full(self, k: int) -> int:
        r = T
        conds = self.conds
        for j in range(k):
            t = _truth(conds[j])
            if t == T:
                return F
            if t == X:
                r = X
        c = conds[k]
        if c is not None:
            t = _truth(c)
            if t == F:
                return F
            if t == X:
                r = X
        return r

    def choices(self) -> List[int]:
        """ branches that may be taken under some filling of the X bits; -1 is none """
        out = []
        sure = False
        for k, c in enumerate(self.conds):
            t = T if c is None else _truth(c)
            if t != F:
                out.append(k)
            if t == T:
                sure = True
                break
        if not sure:
            out.append(-1)
        return out


class SwitchFrame:
    """ switch over ``subject``; each branch holds labels, or None for default """

    __slots__ = ('subject', 'branches', 'unique', 'id', 'resolved', 'subject_type')

    def __init__(self, fid: int, subject: SignalData, unique: bool = False) -> None:
        self.id = fid
        self.subject = subject
        self.unique = unique
        self.branches: List[Optional[list]] = []
        self.resolved: List[Optional[list]] = []
        self.subject_type = subject.type

    def signals(self) -> List[SignalData]:
        return [self.subject]

    def prepare(self) -> None:
        """ turn enum state names into codes once widths are final """
        t = self.subject.type
        out = []
        for labels in self.branches:
            if labels is None:
                out.append(None)
                continue
            res = []
            for lab in labels:
                if isinstance(lab, str):
                    if not isinstance(t, EnumType):
                        raise NetlistError(f'state label {lab!r} on a non-enum subject')
                    res.append(t.code(lab))
                else:
                    res.append(lab)
            for lab in res:
                if lab.width != self.subject.width:
                    raise NetlistError(f'case label width {lab.width} != subject width '
                                       f'{self.subject.width}')
            out.append(res)
        self.resolved = out

    def _match_fast(self, k: int) -> bool:
        labels = self.resolved[k]
        v = self.subject.v
        for lab in labels:
            if isinstance(lab, BitPat):
                if not (v ^ lab.value) & lab.care:
                    return True
            elif lab.v == v:
                return True
        return False

    def _match_full(self, k: int) -> int:
        labels = self.resolved[k]
        s = self.subject
        r = F
        for lab in labels:
            if isinstance(lab, BitPat):
                mv, mx = bitpat_planes(lab.care, lab.value, s.v, s.x)
            else:
                mv, mx = compare_planes('eq', s.v, s.x, lab.v, lab.x, s.width, False)
            if mv:
                return T
            if mx:
                r = X
        return r

    def choices(self) -> List[int]:
        """ branches reachable under some filling of the subject's X bits; -1 is none """
        s = self.subject
        if bin(s.x).count('1') <= 6:
            out = set()
            xbits = [1 << i for i in range(s.width) if (s.x >> i) & 1]
            for n in range(1 << len(xbits)):
                v = s.v
                for i, b in enumerate(xbits):
                    if (n >> i) & 1:
                        v |= b
                out.add(self._pick(v))
            return sorted(out)
        labeled = [j for j, b in enumerate(self.resolved) if b is not None]
        m = {j: self._match_full(j) for j in labeled}
        out = [j for j in labeled if m[j] != F and
               (self.unique or all(m[i] != T for i in labeled if i < j))]
        if all(m[j] != T for j in labeled):
            dflt = [j for j, b in enumerate(self.resolved) if b is None]
            out.append(dflt[0] if dflt else -1)
        return out

    def _pick(self, v: int) -> int:
        dflt = -1
        for j, labels in enumerate(self.resolved):
            if labels is None:
                dflt = j
                continue
            for lab in labels:
                if isinstance(lab, BitPat):
                    if not (v ^ lab.value) & lab.care:
                        return j
                elif lab.v == v and not lab.x:
                    return j
        return dflt

    def active_fast(self, k: int) -> bool:
        if self.resolved[k] is None:
            return not any(self._match_fast(j) for j, b in enumerate(self.resolved)
                           if b is not None)
        if not self.unique:
            for j in range(k):
                if self.resolved[j] is not None and self._match_fast(j):
                    return False
        return self._match_fast(k)

    def active_full(self, k: int) -> int:
        res = self.resolved
        if res[k] is None:
            r = T
            others = [j for j, b in enumerate(res) if b is not None]
        else:
            r = self._match_full(k)
            if r == F:
                return F
            others = [] if self.unique else [j for j in range(k) if res[j] is not None]
        for j in others:
            t = self._match_full(j)
            if t == T:
                return F
            if t == X:
                r = X
        return r


class Assignment:
    """One recorded ``target[key] <== src`` under a condition stack.

    key is None (whole target), ('static', low, count) or ('dyn', idx, count).
    """

    __slots__ = ('stack', 'key', 'src', 'signed')

    def __init__(self, stack, key, src: SignalData, signed: bool) -> None:
        self.stack = stack
        self.key = key
        self.src = src
        self.signed = signed

    def width(self, target_w: int) -> int:
        return target_w if self.key is None else self.key[2]

    def apply_fast(self, v: int, w: int) -> int:
        src = self.src
        key = self.key
        n = w if key is None else key[2]
        sv = sext(src.v, src.width, n) if self.signed else src.v & mask(n)
        if key is None:
            return sv
        low = key[1] if key[0] == 'static' else key[1].v
        if low >= w:
            return v
        field = (mask(n) << low) & mask(w)
        return (v & ~field) | ((sv << low) & field)

    def apply_full(self, v: int, x: int, w: int) -> Tuple[int, int]:
        src = self.src
        key = self.key
        n = w if key is None else key[2]
        sv, sx = extend_planes(src.v, src.x, src.width, n, self.signed)
        if key is None:
            return sv, sx
        if key[0] == 'static':
            low = key[1]
        else:
            idx = key[1]
            if idx.x:
                return 0, mask(w)
            low = idx.v
        return insert_planes(v, x, w, low, n, sv, sx)

    def signals(self) -> List[SignalData]:
        out = [self.src]
        if self.key is not None and self.key[0] == 'dyn':
            out.append(self.key[1])
        return out


def cond_fast(stack) -> bool:
    for frame, k in stack:
        if not frame.active_fast(k):
            return False
    return True


def cond_full(stack) -> Tuple[int, bool]:
    """ (three-valued condition, whether a unique switch contributed an X) """
    r = T
    poison = False
    for frame, k in stack:
        t = frame.active_full(k)
        if t == F:
            return F, False
        if t == X:
            r = X
            if isinstance(frame, SwitchFrame) and frame.unique:
                poison = True
    return r, poison


#------------------
# netlists
#------------------

class Assignable(Gate):
    """Gate driving a netlist signal from its prioritized assignment list.

    Assignments are applied in recorded order, so a later matching assignment
    overrides an earlier one. An X condition merges the assigned and
    unassigned alternatives bit by bit.
    """

    netlist = 'wire'

    def __init__(self, target: SignalData, delay: int = 1) -> None:
        super().__init__(delay)
        self.target = target
        self.assigns: List[Assignment] = []

    def prepare(self) -> None:
        for f in self.frames():
            if isinstance(f, SwitchFrame):
                f.prepare()

    def frames(self) -> list:
        seen, out = set(), []
        for a in self.assigns:
            for f, _ in a.stack:
                if id(f) not in seen:
                    seen.add(id(f))
                    out.append(f)
        return out

    def resolve_fast(self, v: int) -> int:
        w = self.target.width
        for a in self.assigns:
            if a.stack and not cond_fast(a.stack):
                continue
            v = a.apply_fast(v, w)
        return v

    def resolve_full(self, v: int, x: int) -> Tuple[int, int]:
        w = self.target.width
        conds = []
        unsure = False
        for a in self.assigns:
            if a.stack:
                c, poison = cond_full(a.stack)
                if poison:
                    return 0, mask(w)
                unsure = unsure or c == X
            else:
                c = T
            conds.append(c)
        if not unsure:
            for a, c in zip(self.assigns, conds):
                if c == T:
                    v, x = a.apply_full(v, x, w)
            return v, x
        return self._resolve_forked(v, x)

    # more branch combinations than this fall back to merging one
    # assignment at a time, which is sound but coarser
    MAX_FORKS = 64

    def _resolve_forked(self, v: int, x: int) -> Tuple[int, int]:
        """X conditions: every frame takes exactly one of its possible branches.

        Each combination of branch choices is resolved with definite
        conditions and the outcomes are merged, so exclusive branches such as
        when/otherwise never mix with the value neither of them leaves.
        """
        w = self.target.width
        frames = self.frames()
        opts = [f.choices() for f in frames]
        n = 1
        for o in opts:
            n *= len(o)
        if n > self.MAX_FORKS:
            return self._resolve_sequential(v, x)
        index = {id(f): i for i, f in enumerate(frames)}
        out = None
        for pick in itertools.product(*opts):
            rv, rx = v, x
            for a in self.assigns:
                if all(pick[index[id(f)]] == k for f, k in a.stack):
                    rv, rx = a.apply_full(rv, rx, w)
            out = (rv, rx) if out is None else merge_planes(out[0], out[1], rv, rx)
        return out

    def _resolve_sequential(self, v: int, x: int) -> Tuple[int, int]:
        w = self.target.width
        poisoned = False
        for a in self.assigns:
            if a.stack:
                c, poison = cond_full(a.stack)
                if c == F:
                    continue
            else:
                c, poison = T, False
            nv, nx = a.apply_full(v, x, w)
            if c == T:
                v, x = nv, nx
            else:
                v, x = merge_planes(v, x, nv, nx)
                poisoned = poisoned or poison
        if poisoned:
            return 0, mask(w)
        return v, x

    def covered(self) -> bool:
        """ whether unconditional assignments drive every target bit """
        w = self.target.width
        bits = 0
        for a in self.assigns:
            if a.stack:
                continue
            if a.key is None:
                return True
            if a.key[0] == 'static':
                bits |= (mask(a.key[2]) << a.key[1]) & mask(w)
        return bits == mask(w)


class Wire(Assignable):
    """ combinational netlist; with no matching assignment it holds its init (or X) """

    kind = 'wire'
    __slots__ = ()

    def prepare(self) -> None:
        super().prepare()
        w = self.target.width
        init = self.target.init
        if init is None:
            self.default = (0, mask(w))
        else:
            self.default = (init.v, init.x)
        # an X default reachable from binary inputs breaks the binary-closure premise
        self.always_full = init is None and not self.covered()

    def fast(self):
        return self.resolve_fast(self.default[0])

    def full(self):
        return self.resolve_full(*self.default)


class Reg(Assignable):
    """ edge-triggered register, optional reset; holds its value between edges """

    kind = 'reg'
    netlist = 'reg'
    always_full = True

    def __init__(self, target: SignalData, clk: SignalData, edge: int = 1,
                 rst: Optional[SignalData] = None, rst_level: int = 1,
                 async_reset: bool = True, delay: int = 1) -> None:
        super().__init__(target, delay)
        self.clk, self.edge = clk, edge
        self.rst, self.rst_level, self.async_reset = rst, rst_level, async_reset
        self.last = (clk.v, clk.x)

    def prepare(self) -> None:
        super().prepare()
        init = self.target.init
        w = self.target.width
        self.init = (init.v, init.x) if init is not None else (0, mask(w))

    def sim_reset(self) -> None:
        self.last = (self.clk.v & 1, self.clk.x & 1)

    def _edge_fast(self) -> bool:
        c = self.clk.v & 1
        prev = self.last[0]
        self.last = (c, 0)
        return prev != c and c == self.edge

    def fast(self):
        edge = self._edge_fast()
        rst = self.rst
        if rst is not None and (self.async_reset or edge) and (rst.v & 1) == self.rst_level:
            return self.init[0]
        if edge:
            return self.resolve_fast(self.target.v)
        return None

    def _edge_full(self) -> int:
        c = (self.clk.v & 1, self.clk.x & 1)
        p = self.last
        self.last = c
        if c == p:
            return F
        P = X if p[1] else p[0]
        C = X if c[1] else c[0]
        act, idle = self.edge, 1 - self.edge
        if P == idle and C == act:
            return T
        if (P == idle and C == X) or (P == X and C == act):
            return X
        return F

    def full(self):
        edge = self._edge_full()
        q = self.target
        hold = (q.v, q.x)
        if edge == T:
            nxt = self.resolve_full(q.v, q.x)
        elif edge == X:
            lv, lx = self.resolve_full(q.v, q.x)
            nxt = merge_planes(q.v, q.x, lv, lx)
        else:
            nxt = None
        rst = self.rst
        if rst is not None and (self.async_reset or edge != F):
            r = X if rst.x & 1 else int((rst.v & 1) == self.rst_level)
            if r == T:
                return self.init
            if r == X:
                base = nxt if nxt is not None else hold
                return merge_planes(base[0], base[1], *self.init)
        return nxt


class Latch(Assignable):
    """ level-sensitive: transparent while enable is 1, holds otherwise """

    kind = 'latch'
    netlist = 'latch'
    always_full = True

    def __init__(self, target: SignalData, enable: SignalData, delay: int = 1) -> None:
        super().__init__(target, delay)
        self.enable = enable

    def fast(self):
        if self.enable.v:
            return self.resolve_fast(self.target.v)
        return None

    def full(self):
        t = _truth(self.enable)
        q = self.target
        if t == F:
            return None
        v, x = self.resolve_full(q.v, q.x)
        if t == T:
            return v, x
        return merge_planes(q.v, q.x, v, x)


class Wtri(Gate):
    """ tri-state driver: the wire reads all-X while enable is 0 """

    kind = 'wtri'
    always_full = True
    __slots__ = ('enable', 'driver', 'm')

    def __init__(self, enable: SignalData, driver: SignalData, delay: int = 1) -> None:
        super().__init__(delay)
        self.enable, self.driver = enable, driver
        self.m = mask(driver.width)

    def fast(self):
        return self.driver.v if self.enable.v else 0

    def full(self):
        t = _truth(self.enable)
        d = self.driver
        if t == T:
            return d.v, d.x
        return 0, self.m


class Clock(Gate):
    """ free-running clock: reads its own output and inverts it every half period """

    kind = 'clock'
    always_full = True
    __slots__ = ()

    def fast(self):
        return 1 - (self.out.v & 1)

    def full(self):
        o = self.out
        if o.x:
            return 0, 0
        return 1 - (o.v & 1), 0


#------------------
# memory ports
#------------------

class MemWrite(Gate):
    """ synchronous write port: on the clock edge with en=1, word[addr] <= data """

    kind = 'mem_write'
    always_full = True

    def __init__(self, words: List[SignalData], clk: SignalData, edge: int,
                 addr: SignalData, data: SignalData, en: SignalData, delay: int = 1) -> None:
        super().__init__(delay)
        self.words, self.clk, self.edge = words, clk, edge
        self.addr, self.data, self.en = addr, data, en
        self.last = (clk.v, clk.x)

    def sim_reset(self) -> None:
        self.last = (self.clk.v & 1, self.clk.x & 1)

    def fast(self):
        c = self.clk.v & 1
        prev = self.last[0]
        self.last = (c, 0)
        if prev != c and c == self.edge and self.en.v and self.addr.v < len(self.words):
            self.sim.post_v(self.delay, self.words[self.addr.v], self.data.v)

    def full(self):
        c = (self.clk.v & 1, self.clk.x & 1)
        p = self.last
        self.last = c
        if c == p:
            return None
        P = X if p[1] else p[0]
        C = X if c[1] else c[0]
        act, idle = self.edge, 1 - self.edge
        if P == idle and C == act:
            edge = T
        elif (P == idle and C == X) or (P == X and C == act):
            edge = X
        else:
            return None
        en = _truth(self.en)
        if en == F:
            return None
        d = self.data
        sure = edge == T and en == T
        if self.addr.x:
            targets = self.words
            sure = False
        elif self.addr.v < len(self.words):
            targets = [self.words[self.addr.v]]
        else:
            return None
        for w in targets:
            if sure:
                self.sim.post(self.delay, w, d.v, d.x)
            else:
                self.sim.post(self.delay, w, *merge_planes(w.v, w.x, d.v, d.x))
        return None


class MemRead(Gate):
    """ asynchronous read port; X or out-of-range address reads X """

    kind = 'mem_read'
    always_full = True

    def __init__(self, words: List[SignalData], addr: SignalData, delay: int = 1) -> None:
        super().__init__(delay)
        self.words, self.addr = words, addr
        self.m = mask(words[0].width)

    def fast(self):
        a = self.addr.v
        return self.words[a].v if a < len(self.words) else 0

    def full(self):
        a = self.addr
        if a.x or a.v >= len(self.words):
            return 0, self.m
        w = self.words[a.v]
        return w.v, w.x
