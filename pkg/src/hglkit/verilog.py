"""Verilog emission and a structural lint over the emitted units.

Each module instance becomes one Verilog module; instances whose text is
identical share a definition. Combinational gates become continuous
assigns, conditional netlists become ``always`` blocks whose if/case tree
mirrors the recorded assignment order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Set, Tuple

from . import gates as G
from .ir import EnumType, Gate, NetlistError, SignalData
from .logic import BitPat, Logic, mask

KEYWORDS = set('''
always and assign automatic begin buf case casex casez cell config deassign default
defparam design disable edge else end endcase endconfig endfunction endgenerate endmodule
endprimitive endspecify endtable endtask event for force forever fork function generate
genvar if ifnone initial inout input instance integer join large liblist library
localparam logic macromodule medium module nand negedge nmos none nor not notif0 notif1
or output parameter pmos posedge primitive pull0 pull1 pulldown pullup rcmos real
realtime reg release repeat rnmos rpmos rtran rtranif0 rtranif1 scalared signed small
specify specparam strong0 strong1 supply0 supply1 table task time tran tranif0 tranif1
tri tri0 tri1 triand trior trireg unique unsigned use vectored wait wand weak0 weak1
while wire wor xnor xor bit byte int shortint longint
'''.split())

_BITWISE = (G.Not, G.And, G.Or, G.Xor)
# readers that accept an arbitrary operand expression
_EXPR_READERS = _BITWISE + (G.Cat, G.Compare, G.Arith, G.Mux)


class EmitError(NetlistError):
    pass


#------------------
# structured units
#------------------

@dataclass
class Expr:
    text: str
    width: int
    refs: Set[str] = field(default_factory=set)
    atomic: bool = True
    # a bare identifier, which alone may take a part-select
    ident: bool = False

    def paren(self) -> str:
        return self.text if self.atomic else f'({self.text})'


@dataclass
class Assign:
    """ one assignment inside an always block or a continuous assign """
    lhs: str
    width: int
    rhs: Expr
    index: Optional[Expr] = None


@dataclass
class Block:
    kind: str                 # 'assign' | 'comb' | 'ff' | 'latch' | 'inst'
    lines: List[str]
    targets: List[str]
    assigns: List[Assign]
    refs: Set[str] = field(default_factory=set)


@dataclass
class VerilogUnit:
    name: str
    ports: List[Tuple[str, int, str]]          # (direction, width, name)
    decls: List[Tuple[int, str]]
    params: List[Tuple[int, str, str]]         # (width, name, literal)
    blocks: List[Block]

    def render(self, name: Optional[str] = None) -> str:
        name = name or self.name
        out = []
        if self.ports:
            out.append(f'module {name} (')
            plist = [f'    {d} logic {_range(w)}{n}' for d, w, n in self.ports]
            out.append(',\n'.join(plist))
            out.append(');')
        else:
            out.append(f'module {name};')
        for w, n, lit in self.params:
            out.append(f'    localparam {_range(w)}{n} = {lit};')
        for w, n in self.decls:
            out.append(f'    logic {_range(w)}{n};')
        for b in self.blocks:
            out.extend('    ' + ln for ln in b.lines)
        out.append('endmodule')
        return '\n'.join(out) + '\n'


def _range(w: int) -> str:
    return f'[{w - 1}:0] ' if w > 1 else ''


def literal(lit: Logic) -> str:
    w = lit.width
    if lit.x:
        if lit.x == mask(w):
            return f"{w}'b" + 'x' * w if w <= 4 else f"{{{w}{{1'bx}}}}"
        bits = ''.join('x' if (lit.x >> i) & 1 else str((lit.v >> i) & 1)
                       for i in reversed(range(w)))
        return f"{w}'b{bits}"
    if w == 1:
        return f"1'b{lit.v}"
    return f"{w}'d{lit.v}"


def bitpat_literal(p: BitPat) -> str:
    bits = ''.join(('1' if (p.value >> i) & 1 else '0') if (p.care >> i) & 1 else '?'
                   for i in reversed(range(p.width)))
    return f"{p.width}'b{bits}"


def _ident(hint: str) -> str:
    s = re.sub(r'[^A-Za-z0-9_]', '_', hint)
    if not s or s[0].isdigit():
        s = '_' + s
    if s in KEYWORDS:
        s += '_'
    return s


#------------------
# per-module generation
#------------------

class _Namespace:
    def __init__(self) -> None:
        self.used: Set[str] = set()

    def take(self, hint: str) -> str:
        base = _ident(hint)
        name, k = base, 0
        while name in self.used:
            k += 1
            name = f'{base}_{k}'
        self.used.add(name)
        return name


class _ModuleGen:

    def __init__(self, emitter: Emitter, m) -> None:
        self.em = emitter
        self.m = m
        self.ports = emitter.ports[id(m)]
        self.port_ids = {id(s) for s, _ in self.ports}
        self.gates = [g for g in emitter.circuit.gates if g.module is m]
        self.children = list(m._children)
        self.ns = _Namespace()
        self.names: Dict[int, str] = {}
        self.params: Dict[Tuple[int, str], Tuple[int, str, str]] = {}
        self.inline: Dict[int, Gate] = {}
        self.referenced: Dict[int, SignalData] = {}

    # ---- naming

    def _collect(self) -> None:
        child_port_ids = set()
        for c in self.children:
            for s, _ in self.em.ports[id(c)]:
                child_port_ids.add(id(s))
                self.referenced[id(s)] = s
        for g in self.gates:
            for r in g.readers:
                self.referenced[id(r.signal)] = r.signal
            for w in g.writers:
                self.referenced[id(w.signal)] = w.signal
        for s, _ in self.ports:
            self.referenced[id(s)] = s
        mine = {id(g) for g in self.gates}
        for s in self.referenced.values():
            if s.name or s.const or id(s) in self.port_ids or id(s) in child_port_ids:
                continue
            wg = s.writer.gate if s.writer is not None else None
            if wg is None or id(wg) not in mine or len(s.readers) != 1:
                continue
            rg = s.readers[0].gate
            if id(rg) in mine and self._inlinable(wg, rg, s):
                self.inline[id(s)] = wg
        # enum state constants first so that signals yield on collisions
        enums = []
        for s in sorted(self.referenced.values(), key=lambda s: s.id):
            if isinstance(s.type, EnumType) and s.type not in enums:
                enums.append(s.type)
        for g in self.gates:
            if isinstance(g, G.Assignable):
                for f in g.frames():
                    if isinstance(f, G.SwitchFrame) and isinstance(f.subject.type, EnumType) \
                            and f.subject.type not in enums:
                        enums.append(f.subject.type)
        for e in enums:
            for st in e.states:
                n = self.ns.take(st)
                self.params[(id(e), st)] = (e.width, n, literal(e.code(st)))
        for s, _ in self.ports:
            self.names[id(s)] = self.ns.take(s.name or f's{s.id}')
        owner = {}
        for c in self.children:
            for s, _ in self.em.ports[id(c)]:
                owner.setdefault(id(s), c)
        tmp = 0
        for s in sorted(self.referenced.values(), key=lambda s: s.id):
            k = id(s)
            if k in self.names or s.const or k in self.inline:
                continue
            if s.name:
                c = owner.get(k)
                if c is not None and s.module is not self.m and s.module is not None \
                        and _within(s.module, c):
                    hint = f'{c.inst_name}_{s.name}'
                else:
                    hint = s.name
            else:
                hint = f't{tmp}'
                tmp += 1
            self.names[k] = self.ns.take(hint)

    @staticmethod
    def _inlinable(wg: Gate, rg: Gate, s: SignalData) -> bool:
        """ anonymous single-use bitwise ops, selects and concatenations fold
        into their reader when the reader needs no identifier """
        whole = (isinstance(rg, G.Wire) and len(rg.assigns) == 1 and not rg.assigns[0].stack
                 and rg.assigns[0].key is None and rg.target.width == s.width)
        if isinstance(wg, _BITWISE):
            return isinstance(rg, _BITWISE) or whole
        if isinstance(wg, G.Cat) or (isinstance(wg, G.Select)
                                     and wg.low + wg.count <= wg.a.width):
            return isinstance(rg, _EXPR_READERS) or whole
        return False

    # ---- expressions

    def ref(self, s: SignalData) -> Expr:
        if s.const:
            init = s.init
            if isinstance(s.type, EnumType) and s.type.name_of(init.v) is not None:
                key = (id(s.type), s.type.name_of(init.v))
                p = self.params.get(key)
                if p is not None:
                    return Expr(p[1], s.width, {p[1]}, True, True)
            return Expr(literal(init), s.width)
        k = id(s)
        if k in self.inline:
            return self.gate_expr(self.inline[k])
        n = self.names[k]
        return Expr(n, s.width, {n}, True, True)

    def adapt(self, s: SignalData, n: int, signed: bool = False) -> Expr:
        """ reference to ``s`` truncated or extended to ``n`` bits """
        w = s.width
        if s.const and w != n:
            init = s.init
            v, x = init.v, init.x
            if signed and w < n and ((v | x) >> (w - 1)) & 1:
                ext = mask(n) & ~mask(w)
                if (x >> (w - 1)) & 1:
                    x |= ext
                else:
                    v |= ext
            return Expr(literal(Logic(n, v & mask(n), x & mask(n))), n)
        e = self.ref(s)
        if w == n:
            return e
        if w > n:
            if not e.ident:
                raise EmitError('cannot truncate an inlined expression')
            sel = f'{e.text}[0]' if n == 1 else f'{e.text}[{n - 1}:0]'
            return Expr(sel, n, e.refs)
        k = n - w
        if signed:
            top = e.text if w == 1 else f'{e.text}[{w - 1}]'
            fill = f'{{{k}{{{top}}}}}'
        else:
            fill = f"{k}'d0" if k > 1 else "1'b0"
        return Expr(f'{{{fill}, {e.text}}}', n, e.refs)

    def gate_expr(self, g: Gate) -> Expr:
        if isinstance(g, G.Not):
            a = self.ref(g.a)
            return Expr(f'~{a.paren()}', g.out.width, a.refs, False)
        if isinstance(g, (G.And, G.Or, G.Xor)):
            op = {'and': '&', 'or': '|', 'xor': '^'}[g.kind]
            a, b = self.ref(g.a), self.ref(g.b)
            return Expr(f'{a.paren()} {op} {b.paren()}', g.out.width, a.refs | b.refs, False)
        if isinstance(g, G.Arith):
            op = {'add': '+', 'sub': '-', 'mul': '*'}[g.op]
            a, b = self.ref(g.a), self.ref(g.b)
            at, bt = a.paren(), b.paren()
            if g.signed:
                at, bt = f'$signed({a.text})', f'$signed({b.text})'
            return Expr(f'{at} {op} {bt}', g.out.width, a.refs | b.refs, False)
        if isinstance(g, G.Compare):
            op = {'eq': '==', 'ne': '!=', 'lt': '<', 'le': '<=', 'gt': '>', 'ge': '>='}[g.op]
            a, b = self.ref(g.a), self.ref(g.b)
            at, bt = a.paren(), b.paren()
            if g.signed:
                at, bt = f'$signed({a.text})', f'$signed({b.text})'
            return Expr(f'{at} {op} {bt}', 1, a.refs | b.refs, False)
        if isinstance(g, G.Reduce):
            op = {'and': '&', 'or': '|', 'xor': '^'}[g.op]
            a = self.ref(g.a)
            return Expr(f'{op}{a.paren()}', 1, a.refs, False)
        if isinstance(g, G.Cat):
            parts = [self.ref(p) for p in reversed(g.parts)]
            refs = set().union(*(p.refs for p in parts))
            return Expr('{' + ', '.join(p.text for p in parts) + '}', g.out.width, refs)
        if isinstance(g, G.Select):
            return self._select(g.a, g.low, g.count)
        if isinstance(g, G.DynSelect):
            a, i = self.ref(g.a), self.ref(g.idx)
            if not a.ident:
                raise EmitError('dynamic select needs a named source')
            return Expr(f'{a.text}[{i.text} +: {g.count}]', g.count, a.refs | i.refs)
        if isinstance(g, G.Ext):
            return self.adapt(g.a, g.width, g.signed)
        if isinstance(g, G.Mux):
            s, a, b = self.ref(g.sel), self.ref(g.a), self.ref(g.b)
            cond = s.paren() if g.sel.width == 1 else f'|{s.paren()}'
            return Expr(f'{cond} ? {b.paren()} : {a.paren()}', g.out.width,
                        s.refs | a.refs | b.refs, False)
        if isinstance(g, G.Match):
            a = self.ref(g.a)
            p = g.pat
            w = p.width
            return Expr(f'({a.paren()} & {literal(Logic(w, p.care))}) == '
                        f'{literal(Logic(w, p.value))}', 1, a.refs, False)
        if isinstance(g, G.Wtri):
            en, d = self.ref(g.enable), self.ref(g.driver)
            cond = en.paren() if g.enable.width == 1 else f'|{en.paren()}'
            return Expr(f"{cond} ? {d.paren()} : {g.out.width}'bz" if g.out.width == 1 else
                        f"{cond} ? {d.paren()} : {{{g.out.width}{{1'bz}}}}",
                        g.out.width, en.refs | d.refs, False)
        raise EmitError(f'unsupported gate kind {g.kind!r}')

    def _select(self, a_sig: SignalData, low: int, count: int) -> Expr:
        w = a_sig.width
        if a_sig.const:
            init = a_sig.init
            v, x = init.v >> low, init.x >> low
            if low + count > w:
                x |= mask(count) & ~mask(max(0, w - low))
            return Expr(literal(Logic(count, v & mask(count), x & mask(count))), count)
        a = self.ref(a_sig)
        if not a.ident:
            raise EmitError('part-select needs a named source')
        if count == 1:
            return Expr(f'{a.text}[{low}]', 1, a.refs)
        return Expr(f'{a.text}[{low + count - 1}:{low}]', count, a.refs)

    # ---- blocks

    def build(self) -> VerilogUnit:
        self._collect()
        blocks: List[Block] = []
        for g in self.gates:
            blocks.extend(self._gate_blocks(g))
        for c in self.children:
            blocks.append(self._instance(c))
        ports = [(d, s.width, self.names[id(s)]) for s, d in self.ports]
        port_names = {n for _, _, n in ports}
        decls = []
        for s in sorted(self.referenced.values(), key=lambda s: s.id):
            k = id(s)
            if s.const or k in self.inline:
                continue
            n = self.names[k]
            if n in port_names:
                continue
            decls.append((s.width, n))
        params = list(self.params.values())
        return VerilogUnit(self.m.module_name, ports, decls, params, blocks)

    def _gate_blocks(self, g: Gate) -> List[Block]:
        if isinstance(g, G.Wire):
            return [self._wire(g)]
        if isinstance(g, G.Reg):
            return [self._reg(g)]
        if isinstance(g, G.Latch):
            return [self._latch(g)]
        if isinstance(g, G.DivMod):
            q, r = g.writers[0].signal, g.writers[1].signal
            a, b = self.ref(g.a), self.ref(g.b)
            out = []
            for s, op in ((q, '/'), (r, '%')):
                e = Expr(f'{a.paren()} {op} {b.paren()}', s.width, a.refs | b.refs, False)
                out.append(self._cont(s, e))
            return out
        if isinstance(g, G.MemRead):
            return [self._mem_read(g)]
        if isinstance(g, G.MemWrite):
            return [self._mem_write(g)]
        if isinstance(g, G.Clock):
            raise EmitError('a free-running clock cannot be emitted inside a module')
        if id(g.out) in self.inline:
            return []
        return [self._cont(g.out, self.gate_expr(g))]

    def _cont(self, s: SignalData, e: Expr) -> Block:
        n = self.names[id(s)]
        return Block('assign', [f'assign {n} = {e.text};'], [n], [Assign(n, s.width, e)],
                     set(e.refs))

    def _wire(self, g: G.Wire) -> Block:
        t = g.target
        n = self.names[id(t)]
        a = g.assigns
        if len(a) == 1 and not a[0].stack and a[0].key is None:
            e = self.adapt(a[0].src, t.width, a[0].signed)
            return self._cont(t, e)
        lines = ['always @* begin']
        assigns: List[Assign] = []
        refs: Set[str] = set()
        if not g.covered():
            init = t.init if t.init is not None else Logic(t.width, 0, mask(t.width))
            e = self.ref_literal(t, init)
            lines.append(f'    {n} = {e.text};')
            assigns.append(Assign(n, t.width, e))
        lines += self._tree(g, list(a), 0, 1, '=', assigns, refs)
        lines.append('end')
        return Block('comb', lines, [n], assigns, refs)

    def ref_literal(self, t: SignalData, init: Logic) -> Expr:
        if isinstance(t.type, EnumType) and not init.x:
            st = t.type.name_of(init.v)
            p = self.params.get((id(t.type), st)) if st is not None else None
            if p is not None:
                return Expr(p[1], t.width, {p[1]})
        return Expr(literal(init), t.width)

    def _reg(self, g: G.Reg) -> Block:
        t = g.target
        n = self.names[id(t)]
        clk = self.ref(g.clk)
        edge = 'posedge' if g.edge == 1 else 'negedge'
        assigns: List[Assign] = []
        refs: Set[str] = set(clk.refs)
        sens = f'{edge} {clk.text}'
        lines = []
        body_indent = 1
        if g.rst is not None:
            r = self.ref(g.rst)
            refs |= r.refs
            if g.async_reset:
                sens += f" or {'posedge' if g.rst_level else 'negedge'} {r.text}"
            lines.append(f'always @({sens}) begin')
            cond = r.text if g.rst_level else f'!{r.text}'
            init = t.init if t.init is not None else Logic(t.width, 0, mask(t.width))
            e = self.ref_literal(t, init)
            lines.append(f'    if ({cond}) begin')
            lines.append(f'        {n} <= {e.text};')
            lines.append('    end')
            lines.append('    else begin')
            assigns.append(Assign(n, t.width, e))
            body_indent = 2
            lines += self._tree(g, list(g.assigns), 0, body_indent, '<=', assigns, refs)
            lines.append('    end')
        else:
            lines.append(f'always @({sens}) begin')
            lines += self._tree(g, list(g.assigns), 0, body_indent, '<=', assigns, refs)
        lines.append('end')
        return Block('ff', lines, [n], assigns, refs)

    def _latch(self, g: G.Latch) -> Block:
        t = g.target
        n = self.names[id(t)]
        en = self.ref(g.enable)
        assigns: List[Assign] = []
        refs: Set[str] = set(en.refs)
        lines = ['always @* begin', f'    if ({en.text}) begin']
        lines += self._tree(g, list(g.assigns), 0, 2, '<=', assigns, refs)
        lines += ['    end', 'end']
        return Block('latch', lines, [n], assigns, refs)

    def _mem_read(self, g: G.MemRead) -> Block:
        n = self.names[id(g.out)]
        a = self.ref(g.addr)
        w = g.out.width
        lines = ['always @* begin', f'    case ({a.text})']
        assigns, refs = [], set(a.refs)
        for i, word in enumerate(g.words):
            e = self.ref(word)
            refs |= e.refs
            lines.append(f'        {i}: {n} = {e.text};')
            assigns.append(Assign(n, w, e))
        x = Expr(literal(Logic(w, 0, mask(w))), w)
        lines.append(f'        default: {n} = {x.text};')
        assigns.append(Assign(n, w, x))
        lines += ['    endcase', 'end']
        return Block('comb', lines, [n], assigns, refs)

    def _mem_write(self, g: G.MemWrite) -> Block:
        clk, a, d, en = self.ref(g.clk), self.ref(g.addr), self.ref(g.data), self.ref(g.en)
        edge = 'posedge' if g.edge == 1 else 'negedge'
        lines = [f'always @({edge} {clk.text}) begin', f'    if ({en.text}) begin',
                 f'        case ({a.text})']
        assigns, targets = [], []
        for i, word in enumerate(g.words):
            wn = self.names[id(word)]
            targets.append(wn)
            lines.append(f'            {i}: {wn} <= {d.text};')
            assigns.append(Assign(wn, word.width, d))
        lines += ['        endcase', '    end', 'end']
        return Block('ff', lines, targets, assigns, clk.refs | a.refs | d.refs | en.refs)

    def _tree(self, g: G.Assignable, assigns: list, depth: int, ind: int, op: str,
              out: List[Assign], refs: Set[str]) -> List[str]:
        t = g.target
        n = self.names[id(t)]
        pad = '    ' * ind
        lines: List[str] = []
        i = 0
        while i < len(assigns):
            a = assigns[i]
            if len(a.stack) == depth:
                lines.append(pad + self._assign_line(t, n, a, op, out, refs))
                i += 1
                continue
            frame = a.stack[depth][0]
            j = i
            branches: Dict[int, list] = {}
            while j < len(assigns) and len(assigns[j].stack) > depth \
                    and assigns[j].stack[depth][0] is frame:
                branches.setdefault(assigns[j].stack[depth][1], []).append(assigns[j])
                j += 1
            if isinstance(frame, G.WhenFrame):
                lines += self._when(g, frame, branches, depth, ind, op, out, refs)
            else:
                lines += self._switch(g, frame, branches, depth, ind, op, out, refs)
            i = j
        return lines

    def _assign_line(self, t: SignalData, n: str, a: G.Assignment, op: str,
                     out: List[Assign], refs: Set[str]) -> str:
        key = a.key
        w = a.width(t.width)
        e = self.adapt(a.src, w, a.signed)
        refs |= e.refs
        if key is None:
            out.append(Assign(n, w, e))
            return f'{n} {op} {e.text};'
        if key[0] == 'static':
            lo = key[1]
            lhs = f'{n}[{lo}]' if w == 1 else f'{n}[{lo + w - 1}:{lo}]'
            out.append(Assign(n, w, e))
            return f'{lhs} {op} {e.text};'
        idx = self.ref(key[1])
        refs |= idx.refs
        out.append(Assign(n, w, e, idx))
        return f'{n}[{idx.text} +: {w}] {op} {e.text};'

    def _when(self, g, frame: G.WhenFrame, branches, depth, ind, op, out, refs) -> List[str]:
        pad = '    ' * ind
        lines = []
        last = max(branches)
        for k in range(last + 1):
            c = frame.conds[k]
            if c is None:
                head = 'else begin'
            else:
                e = self.ref(c)
                refs |= e.refs
                head = f'if ({e.text}) begin' if k == 0 else f'else if ({e.text}) begin'
            lines.append(pad + head)
            lines += self._tree(g, branches.get(k, []), depth + 1, ind + 1, op, out, refs)
            lines.append(pad + 'end')
        return lines

    def _switch(self, g, frame: G.SwitchFrame, branches, depth, ind, op, out, refs) -> List[str]:
        pad = '    ' * ind
        subj = self.ref(frame.subject)
        refs |= subj.refs
        res = frame.resolved
        wild = any(isinstance(lab, BitPat) for labs in res if labs for lab in labs)
        kw = ('unique ' if frame.unique else '') + ('casez' if wild else 'case')
        lines = [pad + f'{kw} ({subj.text})']
        present = set(branches)
        for k, labs in enumerate(res):
            if k not in present:
                if labs is None or frame.unique or not self._shadows(res, k, present):
                    continue
            if labs is None:
                head = 'default'
            else:
                head = ', '.join(self._label(frame, k, i, lab, refs) for i, lab in enumerate(labs))
            lines.append(pad + f'    {head}: begin')
            lines += self._tree(g, branches.get(k, []), depth + 1, ind + 2, op, out, refs)
            lines.append(pad + '    end')
        lines.append(pad + 'endcase')
        return lines

    @staticmethod
    def _shadows(res, k: int, present) -> bool:
        """ whether absent branch k could take a value from a later present branch """
        for j in present:
            if j <= k or res[j] is None:
                continue
            for a in res[k]:
                for b in res[j]:
                    if isinstance(a, BitPat) or isinstance(b, BitPat) or a == b:
                        return True
        return False

    def _label(self, frame: G.SwitchFrame, k: int, i: int, lab, refs: Set[str]) -> str:
        if isinstance(lab, BitPat):
            return bitpat_literal(lab)
        raw = frame.branches[k][i]
        t = frame.subject.type
        if isinstance(raw, str) and isinstance(t, EnumType):
            p = self.params.get((id(t), raw))
            if p is not None:
                refs.add(p[1])
                return p[1]
        return literal(lab)

    def _instance(self, c) -> Block:
        tname = self.em.type_names[id(c)]
        iname = self.ns.take(c.inst_name)
        conns = []
        refs: Set[str] = set()
        targets = []
        child_names = self.em.port_names[id(c)]
        for s, d in self.em.ports[id(c)]:
            e = self.ref(s)
            refs |= e.refs
            conns.append(f'.{child_names[id(s)]}({e.text})')
            if d == 'output':
                targets.append(e.text)
        lines = [f'{tname} {iname} (']
        lines.append(',\n'.join('    ' + x for x in conns))
        lines.append(');')
        lines = '\n'.join(lines).split('\n')
        return Block('inst', lines, targets, [], refs)


def _within(m, root) -> bool:
    while m is not None:
        if m is root:
            return True
        m = m._parent
    return False


#------------------
# driver
#------------------

class Emitter:

    def __init__(self, circuit, tops: Sequence) -> None:
        from .builder import infer_ports
        if not circuit.frozen:
            raise EmitError('the circuit must be elaborated before emission')
        self.circuit = circuit
        self.tops = list(tops)
        self.ports: Dict[int, list] = {}
        self.port_names: Dict[int, Dict[int, str]] = {}
        self.type_names: Dict[int, str] = {}
        self.units: List[Tuple[str, VerilogUnit]] = []
        self._by_text: Dict[str, str] = {}
        self._taken: Dict[str, int] = {}
        for t in self.tops:
            for m in t.walk():
                self.ports[id(m)] = infer_ports(m)
        inside = set(self.ports)
        for g in circuit.gates:
            if g.module is None and not isinstance(g, G.Clock):
                raise EmitError(f'gate {g!r} was built outside of any module')
            if g.module is not None and id(g.module) not in inside:
                raise EmitError(f'gate {g!r} belongs to a module outside the emitted tops')

    def run(self) -> str:
        for t in self.tops:
            self._emit(t)
        return ''.join(u.render(name) for name, u in self.units)

    def _emit(self, m) -> None:
        for c in m._children:
            self._emit(c)
        gen = _ModuleGen(self, m)
        unit = gen.build()
        self.port_names[id(m)] = {id(s): gen.names[id(s)] for s, _ in gen.ports}
        text = unit.render('\0')
        name = self._by_text.get(text)
        if name is None:
            base = _ident(unit.name)
            k = self._taken.get(base, 0)
            name = base if k == 0 else f'{base}_{k}'
            self._taken[base] = k + 1
            self._by_text[text] = name
            self.units.append((name, unit))
        self.type_names[id(m)] = name


def emit_verilog(circuit, tops: Sequence) -> str:
    return Emitter(circuit, tops).run()


def emit_units(circuit, tops: Sequence) -> List[Tuple[str, VerilogUnit]]:
    em = Emitter(circuit, tops)
    em.run()
    return em.units


#------------------
# lint
#------------------

def lint(unit: VerilogUnit) -> List[str]:
    """ structural problems in one unit; empty when clean """
    bad: List[str] = []
    declared: Dict[str, int] = {}
    for _, w, n in unit.ports:
        declared[n] = declared.get(n, 0) + 1
    for w, n in unit.decls:
        declared[n] = declared.get(n, 0) + 1
    for w, n, _ in unit.params:
        declared[n] = declared.get(n, 0) + 1
    for n, c in declared.items():
        if c > 1:
            bad.append(f'{unit.name}: {n} declared {c} times')
    widths = {n: w for _, w, n in unit.ports}
    widths.update({n: w for w, n in unit.decls})
    inputs = {n for d, _, n in unit.ports if d == 'input'}
    drivers: Dict[str, int] = {}
    for b in unit.blocks:
        for r in b.refs:
            if r not in declared:
                bad.append(f'{unit.name}: {r} used but not declared')
        for t in set(b.targets):
            if t not in declared:
                bad.append(f'{unit.name}: {t} driven but not declared')
            drivers[t] = drivers.get(t, 0) + 1
        for a in b.assigns:
            full = widths.get(a.lhs)
            if full is not None and a.width > full and a.index is None:
                bad.append(f'{unit.name}: {a.lhs} is {full} bits, assignment writes {a.width}')
            if a.rhs.width != a.width:
                bad.append(f'{unit.name}: width mismatch on {a.lhs}: '
                           f'{a.width} <- {a.rhs.width}')
    for n, c in drivers.items():
        if c > 1:
            bad.append(f'{unit.name}: {n} has {c} drivers')
        if n in inputs:
            bad.append(f'{unit.name}: input {n} is driven inside')
    return bad


def lint_all(units) -> List[str]:
    out = []
    for name, u in units:
        out.extend(lint(u))
    return out
