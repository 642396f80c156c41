"""Circuit graph: SignalData and Gate nodes joined by Reader/Writer edges.

Every edge carries a SignalType, so the same SignalData can be read as UInt
through one edge and as SInt through another. A SignalData has at most one
Writer.
"""

from __future__ import annotations

from typing import Any, Dict, List, Optional, Tuple

from .logic import Logic, LogicError, mask


class NetlistError(Exception):
    pass


class MultipleDriverError(NetlistError):
    pass


#------------------
# signal types
#------------------

class SignalType:
    """ base of all types; ``width`` may change only for enums before freeze """

    signed = False

    @property
    def width(self) -> int:
        raise NotImplementedError

    def __call__(self, init: Any = None, name: str = ''):
        from .builder import declare
        return declare(self, init, name)

    def zeros(self, *shape: int):
        from .builder import Array
        if len(shape) == 1:
            return Array([self(0) for _ in range(shape[0])])
        return Array([self.zeros(*shape[1:]) for _ in range(shape[0])])

    def __eq__(self, other) -> bool:
        return type(self) is type(other) and self._key() == other._key()

    def __hash__(self) -> int:
        return hash((type(self).__name__, self._key()))

    def _key(self):
        return id(self)


class UIntType(SignalType):

    def __init__(self, width: int) -> None:
        if width < 1:
            raise NetlistError(f'width must be >= 1, got {width}')
        self._width = width

    @property
    def width(self) -> int:
        return self._width

    def _key(self):
        return self._width

    def __repr__(self) -> str:
        return f'UInt[{self._width}]'


class SIntType(UIntType):

    signed = True

    def __repr__(self) -> str:
        return f'SInt[{self._width}]'


class VectorType(SignalType):
    """ packed array of ``length`` elements, element 0 in the low bits """

    def __init__(self, elem: SignalType, length: int) -> None:
        self.elem = elem
        self.length = length

    @property
    def width(self) -> int:
        return self.elem.width * self.length

    def field(self, i: int) -> Tuple[int, SignalType]:
        if not 0 <= i < self.length:
            raise IndexError(i)
        return i * self.elem.width, self.elem

    def _key(self):
        return (self.elem._key(), type(self.elem).__name__, self.length)

    def __repr__(self) -> str:
        return f'Vector[{self.elem!r}, {self.length}]'


class StructType(SignalType):
    """ named bit fields, first field in the low bits """

    def __init__(self, **fields: SignalType) -> None:
        self.fields: Dict[str, Tuple[int, SignalType]] = {}
        lo = 0
        for name, t in fields.items():
            self.fields[name] = (lo, t)
            lo += t.width
        self._width = lo

    @property
    def width(self) -> int:
        return self._width

    def field(self, name: str) -> Tuple[int, SignalType]:
        return self.fields[name]

    def _key(self):
        return tuple((k, lo, t._key()) for k, (lo, t) in self.fields.items())

    def __repr__(self) -> str:
        inner = ', '.join(f'{k}={t!r}' for k, (_, t) in self.fields.items())
        return f'Struct({inner})'


class EnumType(SignalType):
    """State enumeration whose codes are assigned as names are first seen.

    The width grows with the number of states until ``freeze()``.
    """

    ENCODINGS = ('binary', 'onehot', 'gray')

    def __init__(self, encoding: str = 'binary', states: Tuple[str, ...] = ()) -> None:
        if encoding not in self.ENCODINGS:
            raise NetlistError(f'unknown enum encoding {encoding!r}')
        self.encoding = encoding
        self.states: Dict[str, int] = {}
        self.frozen = False
        self._frozen_width: Optional[int] = None
        for s in states:
            enum_intern(self, s)

    @property
    def width(self) -> int:
        if self._frozen_width is not None:
            return self._frozen_width
        n = max(len(self.states), 1)
        if self.encoding == 'onehot':
            return n
        return max((n - 1).bit_length(), 1)

    def code_int(self, name: str) -> int:
        i = self.states[name]
        if self.encoding == 'onehot':
            return 1 << i
        if self.encoding == 'gray':
            return i ^ (i >> 1)
        return i

    def code(self, name: str) -> Logic:
        return Logic(self.width, self.code_int(name))

    def name_of(self, value: int) -> Optional[str]:
        for name in self.states:
            if self.code_int(name) == value:
                return name
        return None

    def freeze(self) -> None:
        if not self.frozen:
            self._frozen_width = self.width
            self.frozen = True

    def __repr__(self) -> str:
        return f'Enum[{self.encoding}]({", ".join(self.states)})'


def enum_intern(enum: EnumType, name: str) -> Logic:
    if name in enum.states:
        return enum.code(name)
    if enum.frozen:
        raise NetlistError(f'cannot add state {name!r} to a frozen enum')
    enum.states[name] = len(enum.states)
    return enum.code(name)


class MemArrayType(SignalType):
    """ unpacked array of words; each word is its own SignalData """

    def __init__(self, elem: SignalType, *dims: int) -> None:
        self.elem = elem
        self.dims = dims

    @property
    def width(self) -> int:
        return self.elem.width

    @property
    def depth(self) -> int:
        n = 1
        for d in self.dims:
            n *= d
        return n

    def _key(self):
        return (self.elem._key(), self.dims)

    def __repr__(self) -> str:
        return f'MemArray[{self.elem!r}, {self.dims}]'


#------------------
# nodes and edges
#------------------

class SignalData:

    __slots__ = ('id', 'width', 'v', 'x', 'writer', 'readers', 'fanout', 'name',
                 'module', 'type', 'init', 'const', 'tracked', 'direction', '__weakref__')

    def __init__(self, sid: int, width: int, type: SignalType, name: str = '',
                 init: Optional[Logic] = None) -> None:
        self.id = sid
        self.width = width
        self.type = type
        self.name = name
        self.init = init
        if init is None:
            self.v, self.x = 0, mask(width)
        else:
            self.v, self.x = init.v, init.x
        self.writer: Optional[Writer] = None
        self.readers: List[Reader] = []
        # gates triggered by a change of this signal
        self.fanout: List[Gate] = []
        self.module = None
        self.const = False
        self.tracked = False
        # explicit port mark: 'input' | 'output' | None
        self.direction: Optional[str] = None

    @property
    def value(self) -> Logic:
        return Logic(self.width, self.v, self.x)

    def reset(self) -> None:
        if self.init is None:
            self.v, self.x = 0, mask(self.width)
        else:
            self.v, self.x = self.init.v, self.init.x

    def __repr__(self) -> str:
        return f'<s{self.id} {self.name or "_"}:{self.width}>'


class Reader:
    """ edge from a signal into a gate """

    __slots__ = ('gate', 'signal', 'type', 'sensitive', 'edge')

    def __init__(self, gate: Gate, signal: SignalData, type: SignalType,
                 sensitive: bool = True, edge: str = 'level') -> None:
        self.gate = gate
        self.signal = signal
        self.type = type
        self.sensitive = sensitive
        self.edge = edge


class Writer:
    """ edge from a gate to the signal it drives """

    __slots__ = ('gate', 'signal', 'type')

    def __init__(self, gate: Gate, signal: SignalData, type: SignalType) -> None:
        self.gate = gate
        self.signal = signal
        self.type = type


class Gate:
    """Base gate.

    Subclasses provide ``fast()``, the binary-only evaluation returning the
    new value word of ``self.out``, and ``full()`` returning ``(v, x)``. Gates
    with several outputs or side effects schedule their own events and
    return None.
    """

    kind = 'gate'
    always_full = False

    # ``xs`` packs the unknown-input counter and the changed flag into one
    # word (counter << 1 | flag) so the scheduler tests both with one load
    __slots__ = ('id', 'readers', 'writers', 'module', 'delay', 'xs',
                 'waiting', 'out', 'sim', '__dict__')

    def __init__(self, delay: int = 1) -> None:
        self.id = -1
        self.readers: List[Reader] = []
        self.writers: List[Writer] = []
        self.module = None
        self.delay = delay
        self.xs = 1
        self.waiting = False
        self.out: Optional[SignalData] = None
        self.sim = None

    @property
    def x_count(self) -> int:
        return self.xs >> 1

    @x_count.setter
    def x_count(self, n: int) -> None:
        self.xs = (n << 1) | (self.xs & 1)

    @property
    def x_changed(self) -> bool:
        return bool(self.xs & 1)

    @x_changed.setter
    def x_changed(self, flag: bool) -> None:
        self.xs = (self.xs & ~1) | int(bool(flag))

    def prepare(self) -> None:
        """ hook run once the graph is frozen, before simulation """

    def fast(self):
        v, _ = self.full()
        return v

    def full(self):
        raise NotImplementedError(type(self).__name__)

    @property
    def inputs(self) -> List[SignalData]:
        return [r.signal for r in self.readers]

    def describe(self) -> str:
        return ''

    def __repr__(self) -> str:
        return f'<g{self.id} {self.kind}>'


#------------------
# graph
#------------------

class Circuit:
    """ owns every signal and gate; ids are dense and creation-ordered """

    def __init__(self) -> None:
        self.signals: List[SignalData] = []
        self.gates: List[Gate] = []
        self.enums: List[EnumType] = []
        self.frozen = False

    def add_signal(self, width: int, type: Optional[SignalType] = None, name: str = '',
                   init: Optional[Logic] = None) -> SignalData:
        if width is None or width < 1:
            raise NetlistError(f'signal width must be >= 1, got {width}')
        if type is None:
            type = UIntType(width)
        if init is not None and init.width != width:
            raise NetlistError(f'init width {init.width} != signal width {width}')
        s = SignalData(len(self.signals), width, type, name, init)
        self.signals.append(s)
        if isinstance(type, EnumType) and type not in self.enums:
            self.enums.append(type)
        return s

    def add_gate(self, gate: Gate) -> Gate:
        gate.id = len(self.gates)
        self.gates.append(gate)
        return gate

    def connect(self, gate: Gate, signal: SignalData, direction: str,
                type: Optional[SignalType] = None, sensitive: bool = True,
                edge: str = 'level'):
        if type is None:
            type = signal.type
        if direction == 'in':
            r = Reader(gate, signal, type, sensitive, edge)
            gate.readers.append(r)
            signal.readers.append(r)
            if sensitive:
                signal.fanout.append(gate)
            return r
        if direction == 'out':
            if signal.writer is not None:
                raise MultipleDriverError(
                    f'signal {signal.name or signal.id!r} driven by both '
                    f'{signal.writer.gate!r} and {gate!r}')
            w = Writer(gate, signal, type)
            gate.writers.append(w)
            signal.writer = w
            if gate.out is None:
                gate.out = signal
            return w
        raise NetlistError(f'direction must be "in" or "out", not {direction!r}')

    def freeze(self) -> None:
        """ fix enum widths and resize enum-typed signals exactly once """
        if self.frozen:
            return
        for e in self.enums:
            e.freeze()
        for s in self.signals:
            t = s.type
            if isinstance(t, EnumType):
                s.width = t.width
                if isinstance(s.init, _PendingState):
                    s.init = s.init.resolve()
                elif s.init is not None:
                    s.init = Logic(t.width, s.init.v, s.init.x)
                s.reset()
        for g in self.gates:
            g.prepare()
        self.frozen = True

    def audit(self, check_counters: bool = False) -> List[str]:
        """ structural invariant violations, empty when the graph is sound """
        bad: List[str] = []
        sig_ids = {id(s) for s in self.signals}
        gate_ids = {id(g) for g in self.gates}
        for s in self.signals:
            if s.writer is not None:
                if id(s.writer.gate) not in gate_ids:
                    bad.append(f'{s!r}: writer gate not in circuit')
                elif s.writer not in s.writer.gate.writers:
                    bad.append(f'{s!r}: dangling writer edge')
            for r in s.readers:
                if id(r.gate) not in gate_ids or r not in r.gate.readers:
                    bad.append(f'{s!r}: dangling reader edge')
            if s.v & s.x or (s.v | s.x) >> s.width:
                bad.append(f'{s!r}: non-canonical value')
        for g in self.gates:
            for w in g.writers:
                s = w.signal
                if id(s) not in sig_ids:
                    bad.append(f'{g!r}: writes a signal outside the circuit')
                elif s.writer is not w:
                    bad.append(f'{s!r}: multiple drivers ({g!r} and '
                               f'{s.writer.gate if s.writer else None!r})')
                if self.frozen and w.type.width != s.width:
                    bad.append(f'{g!r}: writer type width {w.type.width} != {s.width}')
            for r in g.readers:
                s = r.signal
                if id(s) not in sig_ids:
                    bad.append(f'{g!r}: reads a signal outside the circuit')
                elif r not in s.readers:
                    bad.append(f'{g!r}: dangling reader edge')
                if self.frozen and r.type.width != s.width:
                    bad.append(f'{g!r}: reader type width {r.type.width} != {s.width}')
            if check_counters and g.x_count < FORCE_FULL:
                n = sum(1 for r in g.readers if r.sensitive and r.signal.x)
                if g.x_count != n:
                    bad.append(f'{g!r}: X_count {g.x_count} != {n}')
        return bad

    def dump(self) -> str:
        """ deterministic text listing, sorted by id """
        lines = []
        for s in self.signals:
            w = f'g{s.writer.gate.id}' if s.writer else '-'
            rd = ','.join(f'g{r.gate.id}' for r in s.readers) or '-'
            lines.append(f's{s.id} {s.name or "_"} {s.type!r} = {s.value} writer={w} readers={rd}')
        for g in self.gates:
            ins = ','.join(f's{r.signal.id}' + ('' if r.sensitive else '~') for r in g.readers)
            outs = ','.join(f's{w.signal.id}' for w in g.writers)
            extra = g.describe()
            lines.append(f'g{g.id} {g.kind} in={ins or "-"} out={outs or "-"} delay={g.delay}'
                         + (f' {extra}' if extra else ''))
        return '\n'.join(lines) + '\n'


class _PendingState:
    """ enum state used as an init value before codes are final; name None
    stands for whichever state ends up first """

    def __init__(self, enum: EnumType, name: Optional[str]) -> None:
        self.enum = enum
        self.name = name
        self.width = enum.width
        self.v = enum.code_int(name) if name is not None else 0
        self.x = 0

    def resolve(self) -> Logic:
        e = self.enum
        if self.name is not None:
            return e.code(self.name)
        if not e.states:
            raise NetlistError('enum register has no states')
        return e.code(next(iter(e.states)))


# added to X_count of gates that must always run the three-state function
FORCE_FULL = 1 << 30

__all__ = [
    'NetlistError', 'MultipleDriverError', 'SignalType', 'UIntType', 'SIntType', 'VectorType',
    'StructType', 'EnumType', 'MemArrayType', 'enum_intern', 'SignalData', 'Reader', 'Writer',
    'Gate', 'Circuit', 'FORCE_FULL', 'LogicError',
]
