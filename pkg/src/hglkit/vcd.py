"""Value change dump recording.

A watcher on every tracked signal marks it dirty; once a time is complete
the dirty signals whose value differs from the last dumped one are written.
Same-time rounds therefore collapse into one change record per time.
"""

from __future__ import annotations

import io
from typing import Dict, List, Optional, Sequence, Tuple

from .ir import SignalData
from .sim import Simulator, Watcher


def id_code(n: int) -> str:
    """ short printable identifier, base 94 over '!'..'~' """
    out = []
    n += 1
    while n:
        n, r = divmod(n - 1, 94)
        out.append(chr(33 + r))
    return ''.join(out)


def vcd_value(s: SignalData) -> str:
    w = s.width
    if w == 1:
        return 'x' if s.x & 1 else str(s.v & 1)
    bits = []
    v, x = s.v, s.x
    for i in reversed(range(w)):
        if (x >> i) & 1:
            bits.append('x')
        else:
            bits.append('1' if (v >> i) & 1 else '0')
    return 'b' + ''.join(bits) + ' '


class VcdRecorder:
    """Records tracked signals from a simulator.

    ``signals`` is a list of (scope path tuple, name, SignalData).
    """

    def __init__(self, sim: Simulator, signals: Sequence[Tuple[Tuple[str, ...], str, SignalData]],
                 timescale: str = '1ns', date: str = '') -> None:
        self.sim = sim
        self.timescale = timescale
        self.date = date
        seen = set()
        entries = []
        for scope, name, s in signals:
            if id(s) in seen:
                continue
            seen.add(id(s))
            entries.append((scope, name, s))
        entries.sort(key=lambda e: e[2].id)
        self.entries = entries
        self.codes: Dict[int, str] = {id(s): id_code(i) for i, (_, _, s) in enumerate(entries)}
        self.last: Dict[int, str] = {}
        self.dirty: Dict[int, SignalData] = {}
        self.body: List[str] = []
        self.started = False
        self.stamped = -1
        for _, _, s in entries:
            Watcher(s, self._mark)
        sim.time_hooks.append(self.flush)

    def _mark(self, s: SignalData) -> None:
        self.dirty[id(s)] = s

    def flush(self, t: int) -> None:
        if not self.started:
            self.started = True
            self.body.append(f'#{t}\n$dumpvars\n')
            for _, _, s in self.entries:
                val = vcd_value(s)
                self.last[id(s)] = val
                self.body.append(f'{val}{self.codes[id(s)]}\n')
            self.body.append('$end\n')
            self.stamped = t
            self.dirty.clear()
            return
        if not self.dirty:
            return
        changes = []
        for s in sorted(self.dirty.values(), key=lambda s: s.id):
            val = vcd_value(s)
            k = id(s)
            if self.last.get(k) != val:
                self.last[k] = val
                changes.append(f'{val}{self.codes[k]}\n')
        self.dirty.clear()
        if changes:
            # a time can be revisited when tasks are spawned mid-run
            if self.stamped != t:
                self.body.append(f'#{t}\n')
                self.stamped = t
            self.body.extend(changes)

    def header(self) -> str:
        out = io.StringIO()
        if self.date:
            out.write(f'$date {self.date} $end\n')
        out.write('$version hglkit $end\n')
        out.write(f'$timescale {self.timescale} $end\n')
        tree: dict = {}
        for scope, name, s in self.entries:
            node = tree
            for part in scope:
                node = node.setdefault(part, {})
            node.setdefault(None, []).append((name, s))
        self._scope(out, tree)
        out.write('$enddefinitions $end\n')
        return out.getvalue()

    def _scope(self, out, node: dict) -> None:
        used: Dict[str, int] = {}
        for name, s in node.get(None, []):
            n = name
            if n in used:
                used[n] += 1
                n = f'{name}_{used[name]}'
            else:
                used[n] = 0
            rng = f' [{s.width - 1}:0]' if s.width > 1 else ''
            out.write(f'$var wire {s.width} {self.codes[id(s)]} {n}{rng} $end\n')
        for k in sorted(x for x in node if x is not None):
            out.write(f'$scope module {k} $end\n')
            self._scope(out, node[k])
            out.write('$upscope $end\n')

    def text(self) -> str:
        return self.header() + ''.join(self.body)
