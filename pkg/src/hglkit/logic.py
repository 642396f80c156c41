"""Three-state (0, 1, X) bit vectors.

A value is stored as two integer planes of equal width::

    v  x
    0  0  -> 0
    1  0  -> 1
    0  1  -> X

The encoding ``v=1, x=1`` is never produced: wherever an unknown bit is set,
the value bit is cleared, so two values are equal iff their planes are equal.

The ``*_planes`` helpers work on raw ``(v, x)`` integers and are what the
simulator's gates call; the ``logic_*`` functions wrap them for ``Logic``.
"""

from __future__ import annotations

import re
from typing import Sequence, Tuple


class LogicError(ValueError):
    pass


def mask(width: int) -> int:
    return (1 << width) - 1


#------------------
# plane primitives
#------------------

def not_planes(v: int, x: int, m: int) -> Tuple[int, int]:
    return m & ~v & ~x, x


def and_planes(v1: int, x1: int, v2: int, x2: int, m: int) -> Tuple[int, int]:
    # 0 dominates
    zero = (~v1 & ~x1) | (~v2 & ~x2)
    one = v1 & v2
    return one, m & ~(zero | one)


def or_planes(v1: int, x1: int, v2: int, x2: int, m: int) -> Tuple[int, int]:
    # 1 dominates
    one = v1 | v2
    zero = ~(v1 | x1) & ~(v2 | x2)
    return one, m & ~(zero | one)


def xor_planes(v1: int, x1: int, v2: int, x2: int, m: int) -> Tuple[int, int]:
    x = x1 | x2
    return (v1 ^ v2) & ~x, x


def merge_planes(v1: int, x1: int, v2: int, x2: int) -> Tuple[int, int]:
    """ bits on which both alternatives agree keep their value, others become X """
    x = x1 | x2 | (v1 ^ v2)
    return v1 & ~x, x


def reduce_planes(kind: str, v: int, x: int, m: int) -> Tuple[int, int]:
    if kind == 'and':
        if m & ~v & ~x:
            return 0, 0
        return (0, 1) if x else (1, 0)
    if kind == 'or':
        if v:
            return 1, 0
        return (0, 1) if x else (0, 0)
    if kind == 'xor':
        if x:
            return 0, 1
        return bin(v).count('1') & 1, 0
    raise LogicError(f'unknown reduction {kind!r}')


def truth_planes(v: int, x: int) -> Tuple[int, int]:
    """ truthiness of a condition: 1 if any bit is known 1, 0 if all bits are known 0 """
    if v:
        return 1, 0
    return (0, 1) if x else (0, 0)


def sext(v: int, width: int, new_width: int) -> int:
    if new_width <= width:
        return v & mask(new_width)
    if (v >> (width - 1)) & 1:
        return v | (mask(new_width) & ~mask(width))
    return v


def extend_planes(v: int, x: int, width: int, new_width: int, signed: bool) -> Tuple[int, int]:
    """ zero/sign extension or truncation; an X sign bit extends as X """
    if new_width <= width:
        m = mask(new_width)
        return v & m, x & m
    if not signed:
        return v, x
    return sext(v, width, new_width), sext(x, width, new_width)


def compare_planes(op: str, v1: int, x1: int, v2: int, x2: int, width: int, signed: bool) -> Tuple[int, int]:
    """ 1-bit comparison; definite whenever every X assignment gives the same answer """
    if op in ('eq', 'ne'):
        if (v1 ^ v2) & ~(x1 | x2):
            r = 0
        elif x1 | x2:
            return 0, 1
        else:
            r = 1
        return (r if op == 'eq' else 1 - r), 0
    if signed:
        # flipping the sign bit maps two's complement order onto unsigned order
        sb = 1 << (width - 1)
        v1 ^= sb & ~x1
        v2 ^= sb & ~x2
    lo1, hi1 = v1, v1 | x1
    lo2, hi2 = v2, v2 | x2
    if op == 'lt':
        yes, no = hi1 < lo2, lo1 >= hi2
    elif op == 'le':
        yes, no = hi1 <= lo2, lo1 > hi2
    elif op == 'gt':
        yes, no = lo1 > hi2, hi1 <= lo2
    elif op == 'ge':
        yes, no = lo1 >= hi2, hi1 < lo2
    else:
        raise LogicError(f'unknown comparison {op!r}')
    if yes:
        return 1, 0
    if no:
        return 0, 0
    return 0, 1


def arith_planes(op: str, v1: int, x1: int, v2: int, x2: int, width: int, signed: bool) -> Tuple[int, int]:
    """ add/sub -> width+1 bits, mul -> 2*width bits; any X operand bit poisons the result """
    out_w = 2 * width if op == 'mul' else width + 1
    m = mask(out_w)
    if x1 | x2:
        return 0, m
    if signed:
        v1 = sext(v1, width, out_w)
        v2 = sext(v2, width, out_w)
    if op == 'add':
        r = v1 + v2
    elif op == 'sub':
        r = v1 - v2
    elif op == 'mul':
        r = v1 * v2
    else:
        raise LogicError(f'unknown arithmetic op {op!r}')
    return r & m, 0


def divmod_planes(v1: int, x1: int, v2: int, x2: int, width: int) -> Tuple[int, int, int, int]:
    """ unsigned (q_v, q_x, r_v, r_x); zero divisor or any X -> both all-X """
    if x1 | x2 or v2 == 0:
        m = mask(width)
        return 0, m, 0, m
    q, r = divmod(v1, v2)
    return q, 0, r, 0


def select_planes(v: int, x: int, width: int, low: int, count: int) -> Tuple[int, int]:
    """ static part-select; bits past the source width read as X """
    if low < 0:
        raise LogicError('negative select index')
    m = mask(count)
    rv = (v >> low) & m
    rx = (x >> low) & m
    avail = width - low
    if avail < count:
        oor = m & ~mask(max(avail, 0))
        rx |= oor
        rv &= ~oor
    return rv, rx


def insert_planes(v: int, x: int, width: int, low: int, count: int,
                  nv: int, nx: int) -> Tuple[int, int]:
    """ replace bits [low, low+count) with the new word; bits past width are dropped """
    if low >= width:
        return v, x
    field = (mask(count) << low) & mask(width)
    v = (v & ~field) | ((nv << low) & field)
    x = (x & ~field) | ((nx << low) & field)
    return v, x


#------------------
# Logic
#------------------

_LIT = re.compile(r"^\s*(\d+)'([sS]?)([bBhHdD])([0-9a-fA-FxX_?]+)\s*$")


class Logic:
    """Immutable three-state value of a fixed width."""

    __slots__ = ('width', 'v', 'x')

    def __init__(self, width: int, v: int = 0, x: int = 0) -> None:
        if width < 1:
            raise LogicError(f'width must be >= 1, got {width}')
        m = mask(width)
        x &= m
        object.__setattr__(self, 'width', width)
        object.__setattr__(self, 'x', x)
        object.__setattr__(self, 'v', v & m & ~x)

    def __setattr__(self, name, value):
        raise AttributeError('Logic is immutable')

    @classmethod
    def from_text(cls, text: str) -> Logic:
        return logic_from_text(text)

    @classmethod
    def from_int(cls, value: int, width: int) -> Logic:
        """ two's complement wrap of any python int """
        return cls(width, value & mask(width))

    @classmethod
    def unknown(cls, width: int) -> Logic:
        return cls(width, 0, mask(width))

    @property
    def is_binary(self) -> bool:
        return self.x == 0

    def to_int(self, signed: bool = False):
        """ python int, or None if any bit is X """
        if self.x:
            return None
        if signed:
            return self.v - (1 << self.width) if self.v >> (self.width - 1) else self.v
        return self.v

    def bits(self) -> str:
        """ msb first, e.g. '1x10' """
        out = []
        for i in reversed(range(self.width)):
            if (self.x >> i) & 1:
                out.append('x')
            else:
                out.append('1' if (self.v >> i) & 1 else '0')
        return ''.join(out)

    def __str__(self) -> str:
        return f"{self.width}'b{self.bits()}"

    def __repr__(self) -> str:
        return f'Logic({self})'

    def __eq__(self, other) -> bool:
        if isinstance(other, str):
            other = logic_from_text(other)
        if not isinstance(other, Logic):
            return NotImplemented
        return (self.width, self.v, self.x) == (other.width, other.v, other.x)

    def __hash__(self) -> int:
        return hash((self.width, self.v, self.x))

    def __bool__(self):
        raise TypeError('Logic has no python truth value; use to_int()')

    def __invert__(self) -> Logic:
        return logic_not(self)

    def __and__(self, other: Logic) -> Logic:
        return logic_and(self, other)

    def __or__(self, other: Logic) -> Logic:
        return logic_or(self, other)

    def __xor__(self, other: Logic) -> Logic:
        return logic_xor(self, other)


def _as_logic(a) -> Logic:
    return logic_from_text(a) if isinstance(a, str) else a


def logic_from_text(text: str) -> Logic:
    """Parse ``<width>'<base><digits>`` with base b, h or d.

    >>> str(logic_from_text("4'b10x0"))
    "4'b10x0"
    """
    mt = _LIT.match(text)
    if mt is None:
        raise LogicError(f'malformed literal {text!r}')
    width = int(mt.group(1))
    base = mt.group(3).lower()
    digits = mt.group(4).replace('_', '')
    if width < 1 or not digits or '?' in digits:
        raise LogicError(f'malformed literal {text!r}')
    v = x = 0
    if base == 'd':
        if not digits.isdigit():
            raise LogicError(f'X or non-decimal digit in decimal literal {text!r}')
        v = int(digits)
    else:
        bits_per = 1 if base == 'b' else 4
        for ch in digits:
            v <<= bits_per
            x <<= bits_per
            if ch in 'xX':
                x |= mask(bits_per)
            else:
                try:
                    d = int(ch, 2 if base == 'b' else 16)
                except ValueError:
                    raise LogicError(f'bad digit {ch!r} in {text!r}') from None
                v |= d
    if (v | x) >> width:
        raise LogicError(f'literal {text!r} does not fit in {width} bits')
    return Logic(width, v, x)


def _same_width(a: Logic, b: Logic) -> None:
    if a.width != b.width:
        raise LogicError(f'width mismatch: {a.width} vs {b.width}')


def logic_not(a: Logic) -> Logic:
    a = _as_logic(a)
    return Logic(a.width, *not_planes(a.v, a.x, mask(a.width)))


def logic_and(a: Logic, b: Logic) -> Logic:
    a, b = _as_logic(a), _as_logic(b)
    _same_width(a, b)
    return Logic(a.width, *and_planes(a.v, a.x, b.v, b.x, mask(a.width)))


def logic_or(a: Logic, b: Logic) -> Logic:
    a, b = _as_logic(a), _as_logic(b)
    _same_width(a, b)
    return Logic(a.width, *or_planes(a.v, a.x, b.v, b.x, mask(a.width)))


def logic_xor(a: Logic, b: Logic) -> Logic:
    a, b = _as_logic(a), _as_logic(b)
    _same_width(a, b)
    return Logic(a.width, *xor_planes(a.v, a.x, b.v, b.x, mask(a.width)))


def logic_reduce(a: Logic, kind: str) -> Logic:
    a = _as_logic(a)
    return Logic(1, *reduce_planes(kind, a.v, a.x, mask(a.width)))


def logic_add(a: Logic, b: Logic, signed: bool = False) -> Logic:
    a, b = _as_logic(a), _as_logic(b)
    _same_width(a, b)
    return Logic(a.width + 1, *arith_planes('add', a.v, a.x, b.v, b.x, a.width, signed))


def logic_sub(a: Logic, b: Logic, signed: bool = False) -> Logic:
    a, b = _as_logic(a), _as_logic(b)
    _same_width(a, b)
    return Logic(a.width + 1, *arith_planes('sub', a.v, a.x, b.v, b.x, a.width, signed))


def logic_mul(a: Logic, b: Logic, signed: bool = False) -> Logic:
    a, b = _as_logic(a), _as_logic(b)
    _same_width(a, b)
    return Logic(2 * a.width, *arith_planes('mul', a.v, a.x, b.v, b.x, a.width, signed))


def logic_divmod(a: Logic, b: Logic) -> Tuple[Logic, Logic]:
    a, b = _as_logic(a), _as_logic(b)
    _same_width(a, b)
    qv, qx, rv, rx = divmod_planes(a.v, a.x, b.v, b.x, a.width)
    return Logic(a.width, qv, qx), Logic(a.width, rv, rx)


def logic_compare(op: str, a: Logic, b: Logic, signed: bool = False) -> Logic:
    a, b = _as_logic(a), _as_logic(b)
    _same_width(a, b)
    return Logic(1, *compare_planes(op, a.v, a.x, b.v, b.x, a.width, signed))


def logic_eq(a: Logic, b: Logic) -> Logic:
    return logic_compare('eq', a, b)


def logic_lt(a: Logic, b: Logic, signed: bool = False) -> Logic:
    return logic_compare('lt', a, b, signed)


def logic_gt(a: Logic, b: Logic, signed: bool = False) -> Logic:
    return logic_compare('gt', a, b, signed)


def logic_cat(parts: Sequence[Logic]) -> Logic:
    """ first part lands in the least significant bits """
    parts = [_as_logic(p) for p in parts]
    if not parts:
        raise LogicError('cat of no parts')
    v = x = shift = 0
    for p in parts:
        v |= p.v << shift
        x |= p.x << shift
        shift += p.width
    return Logic(shift, v, x)


def logic_select(a: Logic, low: int, count: int) -> Logic:
    a = _as_logic(a)
    if count < 1:
        raise LogicError('select count must be >= 1')
    return Logic(count, *select_planes(a.v, a.x, a.width, low, count))


def logic_dyn_select(a: Logic, idx: Logic, count: int) -> Logic:
    a, idx = _as_logic(a), _as_logic(idx)
    if idx.x:
        return Logic.unknown(count)
    return logic_select(a, idx.v, count)


def logic_merge(a: Logic, b: Logic) -> Logic:
    a, b = _as_logic(a), _as_logic(b)
    _same_width(a, b)
    return Logic(a.width, *merge_planes(a.v, a.x, b.v, b.x))


def logic_extend(a: Logic, width: int, signed: bool = False) -> Logic:
    a = _as_logic(a)
    return Logic(width, *extend_planes(a.v, a.x, a.width, width, signed))


#------------------
# BitPat
#------------------

class BitPat:
    """ 0/1/don't-care pattern, only usable in comparisons, e.g. BitPat("4'b1??0") """

    __slots__ = ('width', 'care', 'value')

    def __init__(self, text: str) -> None:
        mt = _LIT.match(text)
        if mt is None or mt.group(3).lower() != 'b':
            raise LogicError(f'malformed bit pattern {text!r}')
        width = int(mt.group(1))
        digits = mt.group(4).replace('_', '')
        if len(digits) > width or any(c in 'xX' for c in digits):
            raise LogicError(f'malformed bit pattern {text!r}')
        care = value = 0
        for ch in digits.rjust(width, '0'):
            care <<= 1
            value <<= 1
            if ch != '?':
                care |= 1
                value |= int(ch)
        self.width, self.care, self.value = width, care, value

    def bits(self) -> str:
        return ''.join('?' if not (self.care >> i) & 1 else str((self.value >> i) & 1)
                       for i in reversed(range(self.width)))

    def __repr__(self) -> str:
        return f"BitPat({self.width}'b{self.bits()})"


def bitpat_planes(care: int, value: int, v: int, x: int) -> Tuple[int, int]:
    if (v ^ value) & care & ~x:
        return 0, 0
    if x & care:
        return 0, 1
    return 1, 0


def bitpat_match(p: BitPat, a: Logic) -> Logic:
    a = _as_logic(a)
    if p.width != a.width:
        raise LogicError(f'width mismatch: {p.width} vs {a.width}')
    return Logic(1, *bitpat_planes(p.care, p.value, a.v, a.x))

