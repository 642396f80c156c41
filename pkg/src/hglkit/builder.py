"""Construction API: typed signals, operators, conditional assignment,
netlists, clock domains, modules, parameter trees and vectorized arrays.

Operators on ``Signal`` create gates in the current circuit. Assignment uses
``target <<= value`` (or ``target.assign(value)``) and is recorded on the
target's netlist gate together with the enclosing when/switch conditions.
"""

from __future__ import annotations

import fnmatch
import itertools
from typing import Any, Dict, Iterable, List, Optional, Tuple, Union

from . import gates as G
from .ir import (Circuit, EnumType, Gate, MemArrayType, NetlistError, SignalData,
                 SignalType, SIntType, StructType, UIntType, VectorType, _PendingState,
                 enum_intern)
from .logic import BitPat, Logic, LogicError, logic_from_text, mask

DEFAULT_DELAY = 1


#------------------
# builder state
#------------------

class BuildState:
    """ everything the builder needs while elaborating one circuit """

    def __init__(self, circuit: Optional[Circuit] = None, params: Optional[ParamTree] = None,
                 clock_period: int = 200) -> None:
        self.circuit = circuit or Circuit()
        self.modules: List[Module] = []
        self.tops: List[Module] = []
        self.conds: List[tuple] = []
        self.last_when: Dict[int, G.WhenFrame] = {}
        self.switches: List[G.SwitchFrame] = []
        self.domains: List[ClockDomain] = []
        self.default_domain: Optional[ClockDomain] = None
        self.clock_period = clock_period
        self.params = params if params is not None else ParamTree()
        self.consts: Dict[tuple, SignalData] = {}
        self.connects: List[Tuple[SignalData, SignalData]] = []
        self.frame_ids = itertools.count()
        self.elaborated = False

    @property
    def module(self) -> Optional[Module]:
        return self.modules[-1] if self.modules else None


_stack: List[BuildState] = []


def current() -> BuildState:
    if not _stack:
        _stack.append(BuildState())
    return _stack[-1]


def push_state(state: BuildState) -> BuildState:
    _stack.append(state)
    return state


def pop_state(state: BuildState) -> None:
    if _stack and _stack[-1] is state:
        _stack.pop()


class fresh_circuit:
    """ context giving a new, independent circuit to build into """

    def __init__(self, **kw) -> None:
        self.state = BuildState(**kw)

    def __enter__(self) -> BuildState:
        return push_state(self.state)

    def __exit__(self, *exc) -> None:
        pop_state(self.state)


def _check_open(st: BuildState) -> None:
    if st.elaborated:
        raise NetlistError('circuit already elaborated; no more construction is allowed')


#------------------
# signals
#------------------

class _Direction:
    def __init__(self, name: str) -> None:
        self.name = name

    def __repr__(self) -> str:
        return self.name.capitalize()


Input = _Direction('input')
Output = _Direction('output')


class Signal:
    """ a typed view of a SignalData; several views may share one data node """

    __slots__ = ('data', 'type')

    def __init__(self, data: SignalData, type: Optional[SignalType] = None) -> None:
        self.data = data
        self.type = type if type is not None else data.type

    @property
    def width(self) -> int:
        return self.data.width

    @property
    def name(self) -> str:
        return self.data.name

    @property
    def signed(self) -> bool:
        return self.type.signed

    def __repr__(self) -> str:
        return f'Signal({self.data.name or "_"}:{self.type!r})'

    def __bool__(self):
        raise TypeError('a Signal has no python truth value; use when() for conditions')

    def __hash__(self) -> int:
        return id(self.data)

    def __eq__(self, other) -> bool:
        # identity on the underlying node; use .eq() to build a comparator
        return isinstance(other, Signal) and other.data is self.data

    # ---- typing

    def as_sint(self) -> Signal:
        return Signal(self.data, SIntType(self.width))

    def as_uint(self) -> Signal:
        return Signal(self.data, UIntType(self.width))

    def __matmul__(self, direction: _Direction) -> Signal:
        if not isinstance(direction, _Direction):
            return NotImplemented
        self.data.direction = direction.name
        return self

    # ---- operators

    def __invert__(self):
        return _unary(G.Not, self)

    def __and__(self, o):
        if getattr(o, 'defers_signal_ops', False):
            return NotImplemented
        return binop('and', self, o)

    def __rand__(self, o):
        return binop('and', o, self)

    def __or__(self, o):
        if getattr(o, 'defers_signal_ops', False):
            return NotImplemented
        return binop('or', self, o)

    def __ror__(self, o):
        return binop('or', o, self)

    def __xor__(self, o):
        if getattr(o, 'defers_signal_ops', False):
            return NotImplemented
        return binop('xor', self, o)

    def __rxor__(self, o):
        return binop('xor', o, self)

    def __add__(self, o):
        if getattr(o, 'defers_signal_ops', False):
            return NotImplemented
        return binop('add', self, o)

    def __radd__(self, o):
        return binop('add', o, self)

    def __sub__(self, o):
        if getattr(o, 'defers_signal_ops', False):
            return NotImplemented
        return binop('sub', self, o)

    def __rsub__(self, o):
        return binop('sub', o, self)

    def __mul__(self, o):
        if getattr(o, 'defers_signal_ops', False):
            return NotImplemented
        return binop('mul', self, o)

    def __rmul__(self, o):
        return binop('mul', o, self)

    def __floordiv__(self, o):
        return binop('div', self, o)

    def __mod__(self, o):
        return binop('mod', self, o)

    def __lt__(self, o):
        return binop('lt', self, o)

    def __le__(self, o):
        return binop('le', self, o)

    def __gt__(self, o):
        return binop('gt', self, o)

    def __ge__(self, o):
        return binop('ge', self, o)

    def eq(self, o):
        if isinstance(o, BitPat):
            return _match(self, o)
        return binop('eq', self, o)

    def ne(self, o):
        return binop('ne', self, o)

    def __lshift__(self, n: int):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        return Cat(UInt[n](0), self) if n else self

    def __rshift__(self, n: int):
        if not isinstance(n, int) or n < 0:
            return NotImplemented
        if n >= self.width:
            return const(0, 1)
        return self[n:self.width]

    def any(self):
        return _reduce('or', self)

    def all(self):
        return _reduce('and', self)

    def parity(self):
        return _reduce('xor', self)

    # ---- selection

    def __getitem__(self, key) -> PartRef:
        return PartRef(self, key)

    def __setitem__(self, key, value) -> None:
        # reached after `sig[k] <<= v`; the assignment already happened
        if isinstance(value, PartRef) and value.parent.data is self.data:
            return
        PartRef(self, key).assign(value)

    def __getattr__(self, name: str):
        t = object.__getattribute__(self, 'type')
        if isinstance(t, StructType) and name in t.fields:
            return PartRef(self, name)
        raise AttributeError(name)

    def split(self) -> Array:
        """ one 1-bit signal per bit, bit 0 first """
        return Array([self[i] for i in range(self.width)])

    # ---- assignment

    def __ilshift__(self, value) -> Signal:
        assign(self, value)
        return self

    def assign(self, value) -> Signal:
        assign(self, value)
        return self


class PartRef:
    """Lazy part-select: a value when read, an assignment target when written.

    Keys: ``i`` (one bit), ``lo:hi`` (bits lo..hi-1), ``start::n`` (n bits from
    start; start may be a Signal), a Vector index or a Struct field name.
    """

    __slots__ = ('parent', 'key', 'type', '_sig')

    def __init__(self, parent: Signal, key) -> None:
        self.parent = parent
        self.key, self.type = _part_key(parent, key)
        self._sig: Optional[Signal] = None

    @property
    def width(self) -> int:
        return self.key[2]

    def value(self) -> Signal:
        if self._sig is None:
            kind, lo, n = self.key
            p = self.parent
            if kind == 'static':
                if lo == 0 and n == p.width:
                    self._sig = Signal(p.data, self.type)
                else:
                    g = G.Select(p.data, lo, n)
                    self._sig = _finish(g, [p], n, self.type)
            else:
                idx = lo
                g = G.DynSelect(p.data, idx.data, n)
                self._sig = _finish(g, [p, idx], n, self.type)
        return self._sig

    def __ilshift__(self, value) -> PartRef:
        self.assign(value)
        return self

    def assign(self, value) -> PartRef:
        kind, lo, n = self.key
        key = ('static', lo, n) if kind == 'static' else ('dyn', lo.data, n)
        if key == ('static', 0, self.parent.width):
            key = None
        _assign(self.parent, value, key, self.type)
        return self

    def __getattr__(self, name):
        if name.startswith('__'):
            raise AttributeError(name)
        return getattr(self.value(), name)

    def __getitem__(self, key):
        return self.value()[key]

    def __repr__(self) -> str:
        return f'PartRef({self.parent!r}, {self.key[:2]}, {self.key[2]})'

    def __bool__(self):
        raise TypeError('a PartRef has no python truth value')


def _forward(name):
    def f(self, *args):
        return getattr(self.value(), name)(*args)
    f.__name__ = name
    return f


for _op in ('__invert__', '__and__', '__rand__', '__or__', '__ror__', '__xor__', '__rxor__',
            '__add__', '__radd__', '__sub__', '__rsub__', '__mul__', '__rmul__',
            '__floordiv__', '__mod__', '__lt__', '__le__', '__gt__', '__ge__',
            '__lshift__', '__rshift__', '__matmul__'):
    setattr(PartRef, _op, _forward(_op))


def _part_key(parent: Signal, key):
    w = parent.width
    t = parent.type
    if isinstance(key, str):
        if not isinstance(t, StructType):
            raise NetlistError(f'field access {key!r} on non-struct {t!r}')
        lo, ft = t.field(key)
        return ('static', lo, ft.width), ft
    if isinstance(key, int):
        if isinstance(t, VectorType):
            lo, et = t.field(key if key >= 0 else key + t.length)
            return ('static', lo, et.width), et
        if key < 0:
            key += w
        if key < 0:
            raise NetlistError(f'bit index {key} out of range')
        return ('static', key, 1), UIntType(1)
    if isinstance(key, slice):
        if key.step is not None:
            n = key.step
            if not isinstance(n, int) or n < 1:
                raise NetlistError(f'part-select width must be a positive int, not {n!r}')
            start = key.start if key.start is not None else 0
            if isinstance(start, PartRef):
                start = start.value()
            if isinstance(start, Signal):
                return ('dyn', start, n), UIntType(n)
            if start < 0:
                raise NetlistError('negative part-select start')
            return ('static', start, n), UIntType(n)
        lo = 0 if key.start is None else key.start
        hi = w if key.stop is None else key.stop
        if lo < 0:
            lo += w
        if hi < 0:
            hi += w
        if hi <= lo:
            raise NetlistError(f'empty part-select [{key.start}:{key.stop}]')
        return ('static', lo, hi - lo), UIntType(hi - lo)
    if isinstance(key, (Signal, PartRef)):
        idx = key.value() if isinstance(key, PartRef) else key
        return ('dyn', idx, 1), UIntType(1)
    raise NetlistError(f'unsupported select key {key!r}')


#------------------
# declaring signals
#------------------

def _new_data(width: int, type: SignalType, name: str = '', init=None) -> SignalData:
    st = current()
    _check_open(st)
    s = st.circuit.add_signal(width, type, name, init)
    s.module = st.module
    if st.module is not None:
        st.module._signals.append(s)
    return s


def _init_logic(type: SignalType, init) -> Any:
    if init is None:
        return None
    if isinstance(type, EnumType):
        if isinstance(init, str):
            enum_intern(type, init)
            return _PendingState(type, init)
        raise NetlistError('enum signals take a state name as init')
    w = type.width
    if isinstance(init, Logic):
        if init.width != w:
            init = Logic(w, init.v, init.x) if init.width < w else _narrow(init, w)
        return init
    if isinstance(init, str):
        return _sized(logic_from_text(init), w)
    if isinstance(init, bool):
        init = int(init)
    if isinstance(init, int):
        if init >= 0 and init.bit_length() > w:
            raise NetlistError(f'init {init} does not fit in {w} bits')
        return Logic.from_int(init, w)
    raise NetlistError(f'unsupported init {init!r}')


def _narrow(lit: Logic, w: int) -> Logic:
    if (lit.v | lit.x) >> w:
        raise NetlistError(f'literal {lit} does not fit in {w} bits')
    return Logic(w, lit.v, lit.x)


def _sized(lit: Logic, w: int) -> Logic:
    return Logic(w, lit.v, lit.x) if lit.width <= w else _narrow(lit, w)


def declare(type: SignalType, init=None, name: str = ''):
    """ new signal of ``type``; undriven signals read their init or X """
    if isinstance(type, MemArrayType):
        return MemArray(type, init, name)
    if isinstance(init, (list, tuple)):
        return Array([declare(type, i) for i in init])
    data = _new_data(type.width, type, name, _init_logic(type, init))
    return Signal(data)


class _IntFactory:
    """ ``UInt[8]`` is a type, ``UInt[8](0)`` a signal, ``UInt(5)`` infers the width """

    def __init__(self, signed: bool) -> None:
        self.signed = signed

    def __getitem__(self, width: int) -> UIntType:
        return SIntType(width) if self.signed else UIntType(width)

    def __call__(self, init=None, name: str = '', width: Optional[int] = None):
        if isinstance(init, (list, tuple)) or _is_gen(init):
            return Array([self(i, width=width) for i in init])
        if width is None:
            if isinstance(init, Logic):
                width = init.width
            elif isinstance(init, str):
                width = logic_from_text(init).width
            elif isinstance(init, int):
                width = max(1, init.bit_length() + (1 if self.signed else 0))
                if self.signed and init < 0:
                    width = max(1, (~init).bit_length() + 1)
            else:
                width = 1
        return declare(self[width], init, name)

    def __repr__(self) -> str:
        return 'SInt' if self.signed else 'UInt'


def _is_gen(x) -> bool:
    return hasattr(x, '__next__')


UInt = _IntFactory(False)
SInt = _IntFactory(True)


def Vector(elem: SignalType, length: int) -> VectorType:
    return VectorType(elem, length)


def Struct(**fields: SignalType) -> StructType:
    return StructType(**fields)


def EnumBinary(*states: str) -> EnumType:
    return EnumType('binary', states)


def EnumOnehot(*states: str) -> EnumType:
    return EnumType('onehot', states)


def EnumGray(*states: str) -> EnumType:
    return EnumType('gray', states)


def MemArrayOf(elem: SignalType, *dims: int) -> MemArrayType:
    return MemArrayType(elem, *dims)


def const(value, width: Optional[int] = None, type: Optional[SignalType] = None) -> Signal:
    """ shared constant signal; constants are inlined on emission """
    st = current()
    if isinstance(type, EnumType):
        enum_intern(type, value)
        key = ('enum', id(type), value)
        s = st.consts.get(key)
        if s is None:
            s = st.circuit.add_signal(type.width, type, value, _PendingState(type, value))
            s.const = True
            st.consts[key] = s
        return Signal(s)
    if isinstance(value, str):
        lit = logic_from_text(value)
    elif isinstance(value, Logic):
        lit = value
    else:
        value = int(value)
        w = width if width is not None else max(1, value.bit_length())
        if value >= 0 and value.bit_length() > w:
            raise NetlistError(f'constant {value} does not fit in {w} bits')
        lit = Logic.from_int(value, w)
    if width is not None and lit.width != width:
        lit = _sized(lit, width)
    if type is None:
        type = UIntType(lit.width)
    key = (lit.width, lit.v, lit.x, type.signed)
    s = st.consts.get(key)
    if s is None:
        s = st.circuit.add_signal(lit.width, type, '', lit)
        s.const = True
        st.consts[key] = s
    return Signal(s)


#------------------
# operators
#------------------

def to_signal(x, width: Optional[int] = None) -> Signal:
    if isinstance(x, Signal):
        return x
    if isinstance(x, PartRef):
        return x.value()
    if isinstance(x, bool):
        x = int(x)
    if isinstance(x, int):
        if width is not None and (x < 0 or x.bit_length() <= width):
            return const(Logic.from_int(x, width))
        if x < 0:
            raise NetlistError(f'negative literal {x} needs a width')
        return const(x)
    if isinstance(x, Logic):
        return const(x)
    if isinstance(x, str):
        return const(x)
    raise NetlistError(f'cannot use {x!r} as a signal')


def _coerce_pair(a, b) -> Tuple[Signal, Signal]:
    if not isinstance(a, (Signal, PartRef)) and isinstance(b, (Signal, PartRef)):
        b = to_signal(b)
        return to_signal(a, b.width), b
    a = to_signal(a)
    return a, to_signal(b, a.width)


def _finish(g: Gate, ins: List[Signal], width: int, type: Optional[SignalType] = None,
            name: str = '') -> Signal:
    st = current()
    _check_open(st)
    c = st.circuit
    c.add_gate(g)
    g.module = st.module
    for s in ins:
        t = s.type if s.type.width == s.data.width else s.data.type
        c.connect(g, s.data, 'in', t)
    out = _new_data(width, type or UIntType(width), name)
    c.connect(g, out, 'out')
    return Signal(out)


def extend(a: Signal, width: int, signed: Optional[bool] = None) -> Signal:
    """ zero/sign-extend or truncate through an explicit Ext gate """
    if a.width == width:
        return a
    s = a.signed if signed is None else signed
    return _finish(G.Ext(a.data, width, s), [a], width, SIntType(width) if s else UIntType(width))


def _align(a: Signal, b: Signal) -> Tuple[Signal, Signal]:
    if a.width < b.width:
        a = extend(a, b.width)
    elif b.width < a.width:
        b = extend(b, a.width)
    return a, b


def binop(kind: str, a, b) -> Signal:
    a, b = _coerce_pair(a, b)
    if isinstance(a.type, EnumType) or isinstance(b.type, EnumType):
        return _enum_cmp(kind, a, b)
    a, b = _align(a, b)
    w = a.width
    signed = a.signed and b.signed
    rtype = (lambda n: SIntType(n)) if signed else (lambda n: UIntType(n))
    if kind in ('and', 'or', 'xor'):
        cls = {'and': G.And, 'or': G.Or, 'xor': G.Xor}[kind]
        return _finish(cls(a.data, b.data), [a, b], w, rtype(w))
    if kind in ('add', 'sub'):
        return _finish(G.Arith(kind, a.data, b.data, signed), [a, b], w + 1, rtype(w + 1))
    if kind == 'mul':
        return _finish(G.Arith('mul', a.data, b.data, signed), [a, b], 2 * w, rtype(2 * w))
    if kind in ('eq', 'ne', 'lt', 'le', 'gt', 'ge'):
        return _finish(G.Compare(kind, a.data, b.data, signed), [a, b], 1)
    if kind in ('div', 'mod'):
        q, r = divmod_(a, b)
        return q if kind == 'div' else r
    raise NetlistError(f'unknown operator kind {kind!r}')


def _enum_cmp(kind: str, a: Signal, b: Signal) -> Signal:
    if kind not in ('eq', 'ne'):
        raise NetlistError(f'enum signals only support eq/ne, not {kind}')
    if a.type is not b.type:
        raise NetlistError('comparing signals of different enum types')
    return _finish(G.Compare(kind, a.data, b.data), [a, b], 1)


def divmod_(a, b) -> Tuple[Signal, Signal]:
    a, b = _coerce_pair(a, b)
    a, b = _align(a, b)
    st = current()
    _check_open(st)
    g = G.DivMod(a.data, b.data)
    c = st.circuit
    c.add_gate(g)
    g.module = st.module
    c.connect(g, a.data, 'in')
    c.connect(g, b.data, 'in')
    q = _new_data(a.width, UIntType(a.width))
    r = _new_data(a.width, UIntType(a.width))
    c.connect(g, q, 'out')
    c.connect(g, r, 'out')
    return Signal(q), Signal(r)


def _unary(cls, a) -> Signal:
    a = to_signal(a)
    return _finish(cls(a.data), [a], a.width, a.type if not isinstance(a.type, EnumType)
                   else UIntType(a.width))


def _reduce(op: str, a) -> Signal:
    a = to_signal(a)
    return _finish(G.Reduce(op, a.data), [a], 1)


def _match(a, pat: BitPat) -> Signal:
    a = to_signal(a)
    if pat.width != a.width:
        raise NetlistError(f'pattern width {pat.width} != signal width {a.width}')
    return _finish(G.Match(a.data, pat), [a], 1)


def Cat(*parts) -> Signal:
    """ concatenate; the first part lands in the low bits """
    flat = []
    for p in parts:
        if isinstance(p, (Array, list, tuple)):
            flat.extend(_flatten(p))
        else:
            flat.append(p)
    if not flat:
        raise NetlistError('Cat of nothing')
    sigs = [to_signal(p) for p in flat]
    if len(sigs) == 1:
        return sigs[0]
    w = sum(s.width for s in sigs)
    return _finish(G.Cat([s.data for s in sigs]), sigs, w)


def Mux(sel, a, b) -> Signal:
    """ b when sel is true, else a """
    sel = to_signal(sel)
    a, b = _coerce_pair(a, b)
    a, b = _align(a, b)
    t = a.type if a.type == b.type else UIntType(a.width)
    return _finish(G.Mux(sel.data, a.data, b.data), [sel, a, b], a.width, t)


mux = Mux


def _flatten(x) -> list:
    out = []
    for e in x:
        if isinstance(e, (Array, list, tuple)):
            out.extend(_flatten(e))
        else:
            out.append(e)
    return out


#------------------
# conditions
#------------------

class when:
    """ ``with when(c): ...`` then optionally ``elsewhen(c)`` / ``otherwise()`` """

    _kind = 'when'

    def __init__(self, cond=None) -> None:
        self.cond = cond

    def __enter__(self):
        st = current()
        _check_open(st)
        depth = len(st.conds)
        if self._kind == 'when':
            frame = G.WhenFrame(next(st.frame_ids))
        else:
            frame = st.last_when.get(depth)
            if frame is None or frame.closed:
                raise NetlistError(f'{self._kind} without a preceding when')
        if self.cond is None:
            c = None
        else:
            s = to_signal(self.cond)
            c = s.data
        frame.conds.append(c)
        if c is None:
            frame.closed = True
        self.frame, self.depth = frame, depth
        st.conds.append((frame, len(frame.conds) - 1))
        return self

    def __exit__(self, *exc) -> None:
        st = current()
        st.conds.pop()
        if self.frame.closed:
            st.last_when.pop(self.depth, None)
        else:
            st.last_when[self.depth] = self.frame


class elsewhen(when):
    _kind = 'elsewhen'

    def __init__(self, cond) -> None:
        super().__init__(cond)


class otherwise(when):
    _kind = 'otherwise'

    def __init__(self) -> None:
        super().__init__(None)


class switch:
    """ ``with switch(subject): with case(label, ...): ...`` """

    def __init__(self, subject, unique: bool = False) -> None:
        self.subject = to_signal(subject)
        self.unique = unique

    def __enter__(self):
        st = current()
        _check_open(st)
        self.frame = G.SwitchFrame(next(st.frame_ids), self.subject.data, self.unique)
        self.frame.subject_type = self.subject.type
        st.switches.append(self.frame)
        return self

    def __exit__(self, *exc) -> None:
        current().switches.pop()


class case:

    def __init__(self, *labels) -> None:
        if not labels:
            raise NetlistError('case needs at least one label; use default() otherwise')
        self.labels = labels

    def _labels(self, frame: G.SwitchFrame) -> Optional[list]:
        subj = frame.subject
        t = frame.subject_type
        out = []
        for lab in self.labels:
            if isinstance(lab, str) and isinstance(t, EnumType):
                enum_intern(t, lab)
                out.append(lab)
                continue
            if isinstance(lab, str):
                lab = BitPat(lab) if '?' in lab else logic_from_text(lab)
            elif isinstance(lab, bool):
                lab = Logic(subj.width, int(lab))
            elif isinstance(lab, int):
                if lab < 0 or lab.bit_length() > subj.width:
                    raise NetlistError(f'case label {lab} does not fit in {subj.width} bits')
                lab = Logic(subj.width, lab)
            if not isinstance(lab, (Logic, BitPat)):
                raise NetlistError(f'unsupported case label {lab!r}')
            if lab.width != subj.width:
                raise NetlistError(f'case label width {lab.width} != subject width {subj.width}')
            out.append(lab)
        return out

    def __enter__(self):
        st = current()
        if not st.switches:
            raise NetlistError('case outside of a switch')
        frame = st.switches[-1]
        frame.branches.append(self._labels(frame) if self.labels is not None else None)
        st.conds.append((frame, len(frame.branches) - 1))
        return self

    def __exit__(self, *exc) -> None:
        current().conds.pop()


class default(case):
    def __init__(self) -> None:
        self.labels = None


#------------------
# assignment and netlists
#------------------

def _netlist_of(target: Signal) -> G.Assignable:
    d = target.data
    if d.const:
        raise NetlistError('cannot assign to a constant')
    st = current()
    w = d.writer
    if w is None:
        g = G.Wire(d)
        st.circuit.add_gate(g)
        g.module = st.module
        st.circuit.connect(g, d, 'out')
        g._read = set()
        return g
    g = w.gate
    if not isinstance(g, G.Assignable):
        raise NetlistError(f'cannot assign to the output of a {g.kind} gate '
                           f'({d.name or d.id}); only netlist signals take assignments')
    return g


def _module_lca(a, b):
    if a is None or b is None:
        return None
    pa = []
    m = a
    while m is not None:
        pa.append(m)
        m = m._parent
    m = b
    while m is not None:
        if any(m is x for x in pa):
            return m
        m = m._parent
    return None


def _value_for(target: Signal, value, width: int, ttype: SignalType) -> Signal:
    if isinstance(ttype, EnumType) and isinstance(value, str):
        return const(value, type=ttype)
    if isinstance(value, PartRef):
        return value.value()
    if isinstance(value, Signal):
        return value
    if isinstance(value, (Array, list, tuple)):
        raise NetlistError('cannot assign a collection to a single signal')
    if isinstance(value, str):
        return const(_sized(logic_from_text(value), width))
    if isinstance(value, Logic):
        return const(_sized(value, width))
    if isinstance(value, (int, bool)):
        # literals are truncated or wrapped to the target width
        return const(Logic.from_int(int(value), width))
    raise NetlistError(f'cannot assign {value!r}')


def assign(target, value) -> None:
    if isinstance(target, PartRef):
        target.assign(value)
    elif isinstance(target, Array):
        target <<= value
    else:
        _assign(target, value, None, target.type)


def _assign(target: Signal, value, key, ttype: SignalType) -> None:
    st = current()
    _check_open(st)
    g = _netlist_of(target)
    n = target.width if key is None else key[2]
    if key is not None and key[0] == 'dyn' and n > target.width:
        raise NetlistError(f'dynamic part width {n} exceeds target width {target.width}')
    src = _value_for(target, value, n, ttype)
    stack = tuple(st.conds)
    a = G.Assignment(stack, key, src.data, ttype.signed)
    g.assigns.append(a)
    reads = [src.data]
    if key is not None and key[0] == 'dyn':
        reads.append(key[1])
    for frame, _ in stack:
        reads.extend(frame.signals())
    sensitive = not isinstance(g, G.Reg)
    for s in reads:
        if id(s) not in g._read:
            g._read.add(id(s))
            st.circuit.connect(g, s, 'in', sensitive=sensitive)
    if len(g.assigns) == 1 and isinstance(g, G.Wire):
        g.module = st.module
    else:
        g.module = _module_lca(g.module, st.module)


class ClockDomain:
    """ clock=(signal, active edge), reset=(signal, active level) or None """

    def __init__(self, clock=None, reset=None, async_reset: bool = True) -> None:
        if clock is None:
            raise NetlistError('ClockDomain needs a clock')
        clk, edge = clock if isinstance(clock, tuple) else (clock, 1)
        self.clock = to_signal(clk)
        if self.clock.width != 1:
            raise NetlistError('clock signal must be 1 bit wide')
        self.edge = int(edge)
        if reset is not None:
            rst, level = reset if isinstance(reset, tuple) else (reset, 1)
            self.reset = to_signal(rst)
            self.reset_level = int(level)
        else:
            self.reset, self.reset_level = None, 1
        self.async_reset = async_reset

    def __enter__(self) -> ClockDomain:
        current().domains.append(self)
        return self

    def __exit__(self, *exc) -> None:
        current().domains.pop()


def default_domain() -> ClockDomain:
    """ the ambient domain: innermost ``with ClockDomain`` or the circuit default """
    st = current()
    if st.domains:
        return st.domains[-1]
    if st.default_domain is None:
        saved = st.modules
        st.modules = []
        try:
            clk = Signal(_new_data(1, UIntType(1), 'clk', Logic(1, 0)))
            g = G.Clock(max(1, st.clock_period // 2))
            st.circuit.add_gate(g)
            st.circuit.connect(g, clk.data, 'in')
            st.circuit.connect(g, clk.data, 'out')
            rst = Signal(_new_data(1, UIntType(1), 'rst_n', Logic(1, 1)))
        finally:
            st.modules = saved
        st.default_domain = ClockDomain((clk, 1), (rst, 0))
    return st.default_domain


def _attach(target: Signal, gate: G.Assignable, reads: List[Tuple[SignalData, bool]]) -> Signal:
    st = current()
    _check_open(st)
    d = target.data
    if d.writer is not None:
        raise NetlistError(f'signal {d.name or d.id} already has a driver')
    st.circuit.add_gate(gate)
    gate.module = st.module
    gate._read = set()
    for s, sens in reads:
        gate._read.add(id(s))
        st.circuit.connect(gate, s, 'in', sensitive=sens)
    st.circuit.connect(gate, d, 'out')
    return target


def _netlist_target(x) -> Optional[Signal]:
    """ signal to attach a netlist to; types and literals get a fresh signal """
    if isinstance(x, Signal):
        return x
    if isinstance(x, EnumType):
        d = _new_data(x.width, x, '', _PendingState(x, None))
        return Signal(d)
    if isinstance(x, SignalType):
        return declare(x)
    if isinstance(x, (int, Logic, str)):
        return UInt(x)
    return None


def Reg(x=None, domain: Optional[ClockDomain] = None, delay: int = 1):
    """ edge-triggered register; a signal argument becomes the register output """
    if isinstance(x, (Array, list, tuple)):
        return Array([Reg(e, domain, delay) for e in x])
    dom = domain or default_domain()
    t = _netlist_target(0 if x is None else x)
    g = G.Reg(t.data, dom.clock.data, dom.edge,
              dom.reset.data if dom.reset is not None else None, dom.reset_level,
              dom.async_reset, delay)
    reads = [(dom.clock.data, True)]
    if dom.reset is not None:
        reads.append((dom.reset.data, dom.async_reset))
    return _attach(t, g, reads)


def Latch(x=None, enable=None, delay: int = 1):
    """ transparent while ``enable`` is 1 """
    if isinstance(x, (Array, list, tuple)):
        return Array([Latch(e, enable, delay) for e in x])
    if enable is None:
        raise NetlistError('Latch needs an enable')
    en = to_signal(enable)
    t = _netlist_target(0 if x is None else x)
    return _attach(t, G.Latch(t.data, en.data, delay), [(en.data, True)])


def Wtri(enable, driver, delay: int = 1) -> Signal:
    """ drives ``driver`` while enable is 1; otherwise the wire reads X """
    en = to_signal(enable)
    d = to_signal(driver)
    g = G.Wtri(en.data, d.data, delay)
    return _finish(g, [en, d], d.width, d.type)


def Wire(x=None):
    """ explicit combinational netlist; plain assignment creates these implicitly """
    if isinstance(x, (Array, list, tuple)):
        return Array([Wire(e) for e in x])
    t = _netlist_target(0 if x is None else x)
    d = t.data
    if d.writer is None:
        g = G.Wire(d)
        _attach(t, g, [])
    return t


#------------------
# memories
#------------------

class MemArray:
    """ unpacked words with an async read port and clocked write ports """

    def __init__(self, type: MemArrayType, init=None, name: str = '') -> None:
        self.type = type
        self.name = name
        w = type.elem.width
        self.words = [declare(type.elem, init if init is not None else None,
                              f'{name}_{i}' if name else '') for i in range(type.depth)]
        self._wport = None

    def __getitem__(self, addr) -> Signal:
        a = to_signal(addr)
        g = G.MemRead([w.data for w in self.words], a.data)
        return _finish(g, [a] + self.words, self.type.elem.width, self.type.elem)

    def write(self, addr, data, en=1, domain: Optional[ClockDomain] = None) -> None:
        if self._wport is not None:
            raise NetlistError('only one write port per memory')
        dom = domain or default_domain()
        a = to_signal(addr)
        d = to_signal(data, self.type.elem.width)
        e = to_signal(en, 1)
        st = current()
        g = G.MemWrite([w.data for w in self.words], dom.clock.data, dom.edge,
                       a.data, d.data, e.data)
        st.circuit.add_gate(g)
        g.module = st.module
        st.circuit.connect(g, dom.clock.data, 'in')
        for s in (a, d, e):
            st.circuit.connect(g, s.data, 'in', sensitive=False)
        for w in self.words:
            st.circuit.connect(g, w.data, 'out')
        self._wport = g


#------------------
# arrays
#------------------

class Array:
    """Tree container of signals, modules or values with optional names.

    Indexing accepts ints, names, slices, lists of keys and tuples that map
    the remaining keys over each selected element (``arr[:, 'a']``). Operators
    apply elementwise with scalar broadcast.
    """

    def __init__(self, items: Iterable = (), keys: Optional[List[Optional[str]]] = None) -> None:
        items = list(items)
        object.__setattr__(self, '_items', [Array(e) if isinstance(e, list) else e for e in items])
        if keys is None:
            keys = [None] * len(items)
        object.__setattr__(self, '_keys', list(keys))
        object.__setattr__(self, '_assigned', False)

    # ---- structure

    def __len__(self) -> int:
        return len(self._items)

    def __iter__(self):
        return iter(self._items)

    @property
    def shape(self) -> tuple:
        if not self._items:
            return (0,)
        first = self._items[0]
        inner = first.shape if isinstance(first, Array) else ()
        return (len(self._items),) + inner

    def keys(self) -> list:
        return list(self._keys)

    def items(self):
        return zip(self._keys, self._items)

    def _index(self, key) -> int:
        if isinstance(key, str):
            try:
                return self._keys.index(key)
            except ValueError:
                raise KeyError(key) from None
        return key

    def __getitem__(self, key):
        if isinstance(key, tuple):
            if not key:
                return self
            head, rest = key[0], key[1:]
            sub = self[head]
            if not rest:
                return sub
            if isinstance(head, (slice, list)):
                return Array([_get(e, rest) for e in sub], sub._keys)
            return _get(sub, rest)
        if isinstance(key, slice):
            return Array(self._items[key], self._keys[key])
        if isinstance(key, list):
            idx = [self._index(k) for k in key]
            return Array([self._items[i] for i in idx], [self._keys[i] for i in idx])
        return self._items[self._index(key)]

    def __setitem__(self, key, value) -> None:
        if isinstance(value, Array) and value._assigned:
            object.__setattr__(value, '_assigned', False)
            return
        if isinstance(key, (tuple, slice, list)):
            self[key] <<= value
            return
        i = self._index(key)
        cur = self._items[i]
        if cur is value or (isinstance(value, PartRef) and isinstance(cur, PartRef)
                            and value is cur):
            return
        self._items[i] = value

    def __getattr__(self, name: str):
        keys = object.__getattribute__(self, '_keys')
        if name in keys:
            return self._items[keys.index(name)]
        raise AttributeError(name)

    def __setattr__(self, name, value) -> None:
        if name in self._keys:
            self[name] = value
        else:
            raise AttributeError(f'Array has no field {name!r}')

    def __repr__(self) -> str:
        if any(k is not None for k in self._keys):
            inner = ', '.join(f'{k}={v!r}' for k, v in zip(self._keys, self._items))
        else:
            inner = ', '.join(repr(v) for v in self._items)
        return f'Array({inner})'

    def map(self, fn) -> Array:
        return Array([e.map(fn) if isinstance(e, Array) else fn(e) for e in self._items],
                     self._keys)

    def __matmul__(self, direction):
        for e in self._items:
            e @ direction
        return self

    def __ilshift__(self, value) -> Array:
        if isinstance(value, (tuple, list, Array, _GenType)):
            vals = list(value)
            if len(vals) != len(self._items):
                raise NetlistError(f'assigning {len(vals)} values to {len(self._items)} targets')
        else:
            vals = [value] * len(self._items)
        for t, v in zip(self._items, vals):
            if isinstance(t, Array):
                t <<= v
            else:
                assign(t, v)
        object.__setattr__(self, '_assigned', True)
        return self

    def assign(self, value) -> Array:
        self <<= value
        object.__setattr__(self, '_assigned', False)
        return self

    def split(self):
        return self.map(lambda s: s.split())


_GenType = type(x for x in ())


def _get(elem, rest: tuple):
    if isinstance(elem, Array):
        return elem[rest]
    key = rest[0]
    if isinstance(elem, Module) and isinstance(key, str):
        val = getattr(elem, key)
    elif isinstance(elem, (Signal, PartRef)):
        val = elem[key]
    else:
        raise NetlistError(f'cannot index {elem!r} with {key!r}')
    return _get(val, rest[1:]) if len(rest) > 1 else val


def _broadcast(fn):
    def op(a, b):
        if isinstance(a, Array) or isinstance(b, Array):
            la = a if isinstance(a, Array) else None
            lb = b if isinstance(b, Array) else None
            if la is not None and lb is not None and len(la) != len(lb):
                raise NetlistError(f'shape mismatch: {la.shape} vs {lb.shape}')
            n = len(la if la is not None else lb)
            keys = (la if la is not None else lb)._keys
            return Array([op(la[i] if la is not None else a, lb[i] if lb is not None else b)
                          for i in range(n)], keys)
        return fn(a, b)
    return op


def vectorize(fn):
    """ lift ``fn`` to map over Array arguments elementwise """
    def wrapped(*args):
        arrays = [a for a in args if isinstance(a, Array)]
        if not arrays:
            return fn(*args)
        n = len(arrays[0])
        if any(len(a) != n for a in arrays):
            raise NetlistError('shape mismatch in vectorized call')
        return Array([wrapped(*[a[i] if isinstance(a, Array) else a for a in args])
                      for i in range(n)], arrays[0]._keys)
    wrapped.__name__ = getattr(fn, '__name__', 'vectorized')
    return wrapped


for _name, _f in [('__and__', lambda a, b: a & b), ('__or__', lambda a, b: a | b),
                  ('__xor__', lambda a, b: a ^ b), ('__add__', lambda a, b: a + b),
                  ('__sub__', lambda a, b: a - b), ('__mul__', lambda a, b: a * b)]:
    setattr(Array, _name, _broadcast(_f))
for _name, _f in [('__rand__', lambda a, b: b & a), ('__ror__', lambda a, b: b | a),
                  ('__rxor__', lambda a, b: b ^ a), ('__radd__', lambda a, b: b + a),
                  ('__rsub__', lambda a, b: b - a), ('__rmul__', lambda a, b: b * a)]:
    setattr(Array, _name, _broadcast(_f))
Array.__invert__ = lambda self: self.map(lambda s: ~s)


def Bundle(**fields) -> Array:
    return Array(list(fields.values()), list(fields))


def _as_array(x) -> Array:
    return x if isinstance(x, Array) else Array(list(x))


#------------------
# connect
#------------------

def connect(a, b) -> None:
    """ nondirectional link; the single driver is picked at elaboration """
    if isinstance(a, (Array, list, tuple)) or isinstance(b, (Array, list, tuple)):
        la, lb = _as_array(a), _as_array(b)
        if len(la) != len(lb):
            raise NetlistError('connect: shape mismatch')
        for x, y in zip(la, lb):
            connect(x, y)
        return
    sa, sb = to_signal(a), to_signal(b)
    if sa.width != sb.width:
        raise NetlistError(f'connect: width {sa.width} != {sb.width}')
    current().connects.append((sa.data, sb.data))


def resolve_connects(st: BuildState) -> None:
    parent: Dict[int, SignalData] = {}
    byid: Dict[int, SignalData] = {}

    def find(s):
        while parent.get(id(s), s) is not s:
            s = parent[id(s)]
        return s

    for a, b in st.connects:
        byid[id(a)] = a
        byid[id(b)] = b
        ra, rb = find(a), find(b)
        if ra is not rb:
            if ra.id > rb.id:
                ra, rb = rb, ra
            parent[id(rb)] = ra
    groups: Dict[int, List[SignalData]] = {}
    for s in byid.values():
        groups.setdefault(id(find(s)), []).append(s)
    for members in sorted(groups.values(), key=lambda m: min(s.id for s in m)):
        members.sort(key=lambda s: s.id)
        drivers = [s for s in members if s.writer is not None or s.const]
        if len(drivers) != 1:
            names = ', '.join(s.name or f's{s.id}' for s in members)
            raise NetlistError(f'connected group [{names}] has {len(drivers)} drivers; '
                               'exactly one is required')
        src = drivers[0]
        for s in members:
            if s is src:
                continue
            saved = st.modules
            st.modules = [_module_lca(src.module, s.module)] if src.module and s.module else []
            try:
                _assign(Signal(s), Signal(src), None, s.type)
            finally:
                st.modules = saved
    st.connects.clear()


#------------------
# parameters and modules
#------------------

class ParamTree:
    """Nested parameters; a ParamTree value is a matcher applied to modules
    whose name matches its key (fnmatch), inherited by their descendants.
    """

    def __init__(self, **entries) -> None:
        self.values = {k: v for k, v in entries.items() if not isinstance(v, ParamTree)}
        self.matchers = [(k, v) for k, v in entries.items() if isinstance(v, ParamTree)]

    def __repr__(self) -> str:
        return f'ParamTree(values={self.values}, matchers={[k for k, _ in self.matchers]})'


class _ParamScope:
    def __init__(self, values: dict, matchers: list) -> None:
        self.values = values
        self.matchers = matchers

    def enter(self, module_name: str) -> _ParamScope:
        values = dict(self.values)
        matchers = list(self.matchers)
        for pattern, sub in self.matchers:
            if fnmatch.fnmatchcase(module_name, pattern):
                values.update(sub.values)
                matchers.extend(sub.matchers)
        return _ParamScope(values, matchers)


def root_scope(tree: Optional[ParamTree]) -> _ParamScope:
    tree = tree or ParamTree()
    return _ParamScope(dict(tree.values), list(tree.matchers))


def param_resolve(tree: ParamTree, path: List[str], key: str, default=None):
    """ value of ``key`` seen by the module at ``path`` (list of module names) """
    scope = root_scope(tree)
    for name in path:
        scope = scope.enter(name)
    return scope.values.get(key, default)


class Params:
    """ ``self.p.w``: explicit keyword arguments first, then the parameter tree """

    def __init__(self, kwargs: dict, scope: _ParamScope) -> None:
        self._kw = kwargs
        self._scope = scope

    def __getattr__(self, key: str):
        if key.startswith('_'):
            raise AttributeError(key)
        if key in self._kw:
            return self._kw[key]
        if key in self._scope.values:
            return self._scope.values[key]
        raise AttributeError(f'no parameter {key!r}')

    def get(self, key: str, default=None):
        try:
            return getattr(self, key)
        except AttributeError:
            return default

    def as_dict(self) -> dict:
        d = dict(self._scope.values)
        d.update(self._kw)
        return d


class Module:
    """Subclass and implement ``build(self)``. Keyword arguments become
    parameters available as ``self.p``; signals created during ``build`` are
    owned by the instance, and attributes set on ``self`` give them names.
    """

    def __init__(self, name: Optional[str] = None, **params) -> None:
        st = current()
        _check_open(st)
        parent = st.module
        sa = object.__setattr__
        sa(self, '_parent', parent)
        sa(self, '_children', [])
        sa(self, '_signals', [])
        sa(self, '_inst', name)
        sa(self, '_state', st)
        scope = parent._scope if parent is not None else root_scope(st.params)
        sa(self, '_scope', scope.enter(self.module_name))
        sa(self, 'p', Params(params, self._scope))
        if parent is None:
            st.tops.append(self)
        else:
            parent._children.append(self)
        st.modules.append(self)
        try:
            self.build()
        finally:
            st.modules.pop()

    @property
    def module_name(self) -> str:
        return type(self).__name__

    def build(self) -> None:
        pass

    @property
    def inst_name(self) -> str:
        if self._inst:
            return self._inst
        sibs = self._parent._children if self._parent is not None else self._state.tops
        same = [m for m in sibs if type(m) is type(self)]
        base = self.module_name.lower()
        return base if len(same) == 1 else f'{base}{same.index(self)}'

    @property
    def path(self) -> str:
        if self._parent is None:
            return self.inst_name
        return f'{self._parent.path}.{self.inst_name}'

    def __setattr__(self, key: str, value) -> None:
        if key not in self.__dict__ or self.__dict__[key] is not value:
            _name_tree(value, key, self)
        object.__setattr__(self, key, value)

    def walk(self):
        """ this module and all descendants, depth first in creation order """
        yield self
        for c in self._children:
            yield from c.walk()

    def signals(self) -> List[SignalData]:
        return list(self._signals)

    def __repr__(self) -> str:
        return f'<{self.module_name} {self.inst_name}>'


def _name_tree(value, prefix: str, owner: Module) -> None:
    if isinstance(value, PartRef):
        value = value._sig
    if isinstance(value, Signal):
        d = value.data
        if not d.name and not d.const:
            d.name = prefix
    elif isinstance(value, Module):
        if value._inst is None and value._parent is owner:
            object.__setattr__(value, '_inst', prefix)
    elif isinstance(value, MemArray):
        if not value.name:
            value.name = prefix
            for i, w in enumerate(value.words):
                if not w.data.name:
                    w.data.name = f'{prefix}_{i}'
    elif isinstance(value, (Array, list, tuple)):
        keys = value._keys if isinstance(value, Array) else [None] * len(value)
        for i, (k, v) in enumerate(zip(keys, value)):
            _name_tree(v, f'{prefix}_{k if k is not None else i}', owner)


def name(value, hint: str):
    """ give a name-hint to a signal (or tree of signals) outside a module attribute """
    st = current()
    _name_tree(value, hint, st.module)
    return value


#------------------
# elaboration
#------------------

def _subtree(m: Module) -> set:
    return {id(x) for x in m.walk()}


def elaborate(st: Optional[BuildState] = None) -> Circuit:
    """ resolve connects and freeze the circuit; construction ends here """
    st = st or current()
    if st.elaborated:
        return st.circuit
    resolve_connects(st)
    st.circuit.freeze()
    st.elaborated = True
    return st.circuit


def infer_ports(m: Module) -> List[Tuple[SignalData, str]]:
    """Ports of ``m`` by the subtree boundary rule.

    A signal is a port when it is touched both inside and outside the
    subtree of ``m``: Output when its writer is inside, Input otherwise.
    Undriven signals count as written from outside. Explicit marks on
    signals owned by ``m`` always make ports and fix the direction.
    """
    inside = _subtree(m)
    top = m._parent is None
    touched: Dict[int, SignalData] = {}
    for sub in m.walk():
        for s in sub._signals:
            touched[id(s)] = s
    circuit = m._state.circuit
    for g in circuit.gates:
        if id(g.module) in inside:
            for r in g.readers:
                touched[id(r.signal)] = r.signal
            for w in g.writers:
                touched[id(w.signal)] = w.signal
    ports = []
    for s in sorted(touched.values(), key=lambda s: s.id):
        if s.const:
            continue
        wg = s.writer.gate if s.writer is not None else None
        w_in = wg is not None and id(wg.module) in inside
        r_in = any(id(r.gate.module) in inside for r in s.readers)
        r_out = any(id(r.gate.module) not in inside for r in s.readers)
        mark = s.direction if s.module is m else None
        if mark is not None:
            if mark == 'input' and w_in:
                raise NetlistError(f'{s.name} is marked Input but driven inside {m!r}')
            if mark == 'output' and wg is not None and not w_in:
                raise NetlistError(f'{s.name} is marked Output but driven outside {m!r}')
            ports.append((s, mark))
            continue
        if w_in:
            if r_out or (top and not s.readers and s.name):
                ports.append((s, 'output'))
        elif r_in:
            ports.append((s, 'input'))
        elif wg is not None and r_out and id(s.module) in inside:
            raise NetlistError(
                f'signal {s.name or s.id} of {m!r} is written and read only outside the '
                'module; mark it Input or Output')
    return ports
