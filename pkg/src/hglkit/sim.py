"""Event-driven three-state simulator.

Events are ``(signal, is_unknown_plane, word)`` tuples kept in per-time FIFO
lists. Each round has an update phase followed by an execute phase; a gate
runs at most once per round. With the ``optimized`` strategy a gate runs its
binary function unless one of its sensitive inputs holds or just changed an
unknown bit.
"""

from __future__ import annotations

import heapq
from typing import Callable, Dict, List, Optional

from .ir import FORCE_FULL, Circuit, Gate, MultipleDriverError, SignalData
from .logic import Logic, mask

STRATEGIES = ('optimized', 'always_full', 'binary_only')


class SimError(Exception):
    pass


class Watcher(Gate):
    """Pseudo-gate placed in a signal's fanout list to observe its changes.

    Watchers are not part of the circuit; they always take the three-state
    path so the X bookkeeping never needs to include them.
    """

    kind = 'watcher'
    always_full = True

    def __init__(self, signal: SignalData, callback: Callable[[SignalData], None]) -> None:
        super().__init__(0)
        self.signal = signal
        self.callback = callback
        self.x_count = FORCE_FULL
        signal.fanout.append(self)

    def full(self):
        self.callback(self.signal)

    fast = full

    def detach(self) -> None:
        try:
            self.signal.fanout.remove(self)
        except ValueError:
            pass


class Simulator:

    def __init__(self, circuit: Circuit, strategy: str = 'optimized',
                 instrument: bool = False, audit: bool = False) -> None:
        self.circuit = circuit
        self.now = 0
        self.queue: Dict[int, list] = {}
        self.times: List[int] = []
        self.delta: Optional[list] = None
        self.started = False
        self.instrument = instrument or audit
        self.audit = audit
        self.stats = dict(slots=0, rounds=0, events=0, updates=0, fast=0, full=0)
        self.counters = dict(plane_branches=0, exec_checks=0, max_exec_per_round=0,
                             fast_x_events=0, audit_failures=0)
        self.audit_log: List[str] = []
        # called after every round with the current time; returns True when it
        # queued more work for the same time
        self.round_hooks: List[Callable[[int], bool]] = []
        # called once a time is complete
        self.time_hooks: List[Callable[[int], None]] = []
        self._in_fast = False
        self.strategy = ''
        self.set_strategy(strategy)

    #------------------
    # scheduling
    #------------------

    def _slot(self, t: int) -> list:
        lst = self.queue.get(t)
        if lst is None:
            lst = self.queue[t] = []
            heapq.heappush(self.times, t)
        return lst

    def _slot_after(self, delay: int) -> list:
        if delay == 0 and self.delta is not None:
            return self.delta
        return self._slot(self.now + delay)

    def schedule(self, t: int, sig: SignalData, v: int, x: int = 0) -> None:
        """ schedule both planes of ``sig`` at absolute time ``t`` """
        if t < self.now:
            raise SimError(f'cannot schedule at {t}, current time is {self.now}')
        if t == self.now and self.delta is not None:
            lst = self.delta
        else:
            lst = self._slot(t)
        m = mask(sig.width)
        x &= m
        v &= m & ~x
        lst.append((sig, True, x))
        lst.append((sig, False, v))

    def post(self, delay: int, sig: SignalData, v: int, x: int) -> None:
        lst = self._slot_after(delay)
        lst.append((sig, True, x))
        lst.append((sig, False, v))
        if self._in_fast and x:
            self.counters['fast_x_events'] += 1

    def post_v(self, delay: int, sig: SignalData, v: int) -> None:
        self._slot_after(delay).append((sig, False, v))

    def setv(self, sig: SignalData, value, delay: int = 0) -> None:
        """ drive an undriven signal from outside the circuit """
        if sig.writer is not None:
            raise MultipleDriverError(
                f'signal {sig.name or sig.id!r} is driven by {sig.writer.gate!r}; '
                'it cannot also be set by a task')
        if sig.const:
            raise SimError(f'cannot drive constant {sig!r}')
        val = to_logic(value, sig.width)
        self.schedule(self.now + delay, sig, val.v, val.x)

    #------------------
    # strategy
    #------------------

    def set_strategy(self, mode: str) -> None:
        if mode not in STRATEGIES:
            raise SimError(f'unknown strategy {mode!r}; expected one of {STRATEGIES}')
        self.strategy = mode
        if mode == 'optimized':
            self._round = self._round_instr if self.instrument else self._round_opt
            if self.started:
                self.recount()
        elif mode == 'always_full':
            self._round = self._round_full
        else:
            self._round = self._round_bin

    def recount(self) -> None:
        """ recompute X_count of every gate from the live signal values """
        for g in self.circuit.gates:
            if g.always_full:
                g.x_count = FORCE_FULL
            else:
                g.x_count = sum(1 for r in g.readers if r.sensitive and r.signal.x)

    #------------------
    # rounds
    #------------------

    def _round_opt(self, events: list) -> None:
        gt = []
        for sig, isx, val in events:
            if isx:
                old = sig.x
                if old != val:
                    sig.x = val
                    d = ((val != 0) - (old != 0)) << 1
                    fo = sig.fanout
                    for g in fo:
                        g.xs = (g.xs + d) | 1
                        g.waiting = True
                    gt += fo
            elif sig.v != val:
                sig.v = val
                fo = sig.fanout
                for g in fo:
                    g.waiting = True
                gt += fo
        nxt = []
        app = nxt.append
        nfast = nfull = 0
        for g in gt:
            if g.waiting:
                g.waiting = False
                if g.xs:
                    g.xs &= -2
                    nfull += 1
                    r = g.full()
                    if r is not None:
                        out = g.out
                        if g.delay == 1:
                            app((out, True, r[1]))
                            app((out, False, r[0]))
                        else:
                            lst = self._slot_after(g.delay)
                            lst.append((out, True, r[1]))
                            lst.append((out, False, r[0]))
                else:
                    nfast += 1
                    v = g.fast()
                    if v is not None:
                        if g.delay == 1:
                            app((g.out, False, v))
                        else:
                            self._slot_after(g.delay).append((g.out, False, v))
        if nxt:
            self._slot(self.now + 1).extend(nxt)
        st = self.stats
        st['events'] += len(events)
        st['fast'] += nfast
        st['full'] += nfull

    def _round_full(self, events: list) -> None:
        gt = []
        for sig, isx, val in events:
            if isx:
                if sig.x != val:
                    sig.x = val
                    fo = sig.fanout
                    for g in fo:
                        g.waiting = True
                    gt += fo
            elif sig.v != val:
                sig.v = val
                fo = sig.fanout
                for g in fo:
                    g.waiting = True
                gt += fo
        nxt = []
        app = nxt.append
        nfull = 0
        for g in gt:
            if g.waiting:
                g.waiting = False
                nfull += 1
                r = g.full()
                if r is not None:
                    out = g.out
                    if g.delay == 1:
                        app((out, True, r[1]))
                        app((out, False, r[0]))
                    else:
                        lst = self._slot_after(g.delay)
                        lst.append((out, True, r[1]))
                        lst.append((out, False, r[0]))
        if nxt:
            self._slot(self.now + 1).extend(nxt)
        st = self.stats
        st['events'] += len(events)
        st['full'] += nfull

    def _round_bin(self, events: list) -> None:
        # X events still land so waveforms show them, but every gate runs binary
        gt = []
        for sig, isx, val in events:
            if isx:
                if sig.x != val:
                    sig.x = val
                    fo = sig.fanout
                    for g in fo:
                        g.waiting = True
                    gt += fo
            elif sig.v != val:
                sig.v = val
                fo = sig.fanout
                for g in fo:
                    g.waiting = True
                gt += fo
        nxt = []
        app = nxt.append
        nfast = 0
        for g in gt:
            if g.waiting:
                g.waiting = False
                nfast += 1
                v = g.fast()
                if v is not None:
                    if g.delay == 1:
                        app((g.out, False, v))
                    else:
                        self._slot_after(g.delay).append((g.out, False, v))
        if nxt:
            self._slot(self.now + 1).extend(nxt)
        st = self.stats
        st['events'] += len(events)
        st['fast'] += nfast

    def _round_instr(self, events: list) -> None:
        """ optimized round with code-path counters; slow, used by tests """
        c = self.counters
        gt = []
        for sig, isx, val in events:
            c['plane_branches'] += 1
            if isx:
                old = sig.x
                if old != val:
                    sig.x = val
                    self.stats['updates'] += 1
                    d = ((val != 0) - (old != 0)) << 1
                    for g in sig.fanout:
                        g.xs = (g.xs + d) | 1
                        g.waiting = True
                        gt.append(g)
            elif sig.v != val:
                sig.v = val
                self.stats['updates'] += 1
                for g in sig.fanout:
                    g.waiting = True
                    gt.append(g)
        runs: Dict[int, int] = {}
        for g in gt:
            if g.waiting:
                runs[id(g)] = runs.get(id(g), 0) + 1
                c['exec_checks'] += 1
                if g.xs:
                    g.xs &= -2
                    self.stats['full'] += 1
                    r = g.full()
                    if r is not None:
                        self.post(g.delay, g.out, r[0], r[1])
                else:
                    self.stats['fast'] += 1
                    self._in_fast = True
                    try:
                        v = g.fast()
                        if v is not None:
                            self.post_v(g.delay, g.out, v)
                    finally:
                        self._in_fast = False
                g.waiting = False
        if runs:
            c['max_exec_per_round'] = max(c['max_exec_per_round'], max(runs.values()))
        self.stats['events'] += len(events)
        if self.audit:
            bad = self.circuit.audit(check_counters=True)
            if bad:
                c['audit_failures'] += len(bad)
                self.audit_log.extend(f't={self.now}: {b}' for b in bad[:5])

    #------------------
    # driving time
    #------------------

    def start(self) -> None:
        """ evaluate every gate once at time 0 with the three-state function """
        if self.started:
            return
        if not self.circuit.frozen:
            self.circuit.freeze()
        self.recount()
        for g in self.circuit.gates:
            g.sim = self
            g.waiting = False
            g.x_changed = True
            if hasattr(g, 'sim_reset'):
                g.sim_reset()
        self.started = True
        self.now = 0
        self.delta = []
        if self.strategy == 'binary_only':
            # a two-valued simulator has no unknowns to start from
            for s in self.circuit.signals:
                s.x = 0
            for g in self.circuit.gates:
                v = g.fast()
                if v is not None:
                    self.post_v(g.delay, g.out, v)
            self.stats['fast'] += len(self.circuit.gates)
        else:
            for g in self.circuit.gates:
                g.x_changed = False
                r = g.full()
                if r is not None:
                    self.post(g.delay, g.out, r[0], r[1])
            self.stats['full'] += len(self.circuit.gates)
        self.stats['rounds'] += 1
        pending = self.delta + self.queue.pop(0, [])
        self.delta = None
        self._finish_time(0, pending)

    def _finish_time(self, t: int, events: list) -> None:
        """ run rounds at time ``t`` until no same-time work remains """
        self.now = t
        hooks = self.round_hooks
        while True:
            self.delta = []
            if events:
                self._round(events)
            self.stats['rounds'] += 1
            more = False
            for h in hooks:
                if h(t):
                    more = True
            events = self.delta
            if not events and not more:
                break
        self.delta = None
        self.stats['slots'] += 1
        for h in self.time_hooks:
            h(t)

    def step_slot(self) -> bool:
        """ process the next scheduled time; False when nothing is scheduled """
        if not self.started:
            self.start()
            return True
        times = self.times
        while times:
            t = heapq.heappop(times)
            events = self.queue.pop(t, None)
            if events is None:
                continue
            self._finish_time(t, events)
            return True
        return False

    def next_time(self) -> Optional[int]:
        times = self.times
        while times and times[0] not in self.queue:
            heapq.heappop(times)
        return times[0] if times else None

    def run_until(self, t_end: int) -> int:
        """ process every time ≤ t_end; returns the number of times processed """
        n = 0
        if not self.started:
            self.start()
            n += 1
        while True:
            t = self.next_time()
            if t is None or t > t_end:
                break
            self.step_slot()
            n += 1
        # time moves on to t_end even when nothing happened there
        if t_end > self.now:
            self.now = t_end
        return n

    def run_events(self, n: int) -> int:
        done = 0
        while done < n and self.step_slot():
            done += 1
        return done

    def run_while(self, cond: Callable[[], bool], limit: Optional[int] = None) -> int:
        n = 0
        if not self.started:
            self.start()
            n += 1
        while cond():
            t = self.next_time()
            if t is None or (limit is not None and t > limit):
                break
            self.step_slot()
            n += 1
        return n

    def stats_text(self) -> str:
        keys = ('strategy', 'time', 'slots', 'rounds', 'events', 'fast', 'full')
        vals = dict(self.stats, strategy=self.strategy, time=self.now)
        return ''.join(f'{k}={vals[k]}\n' for k in keys)


def to_logic(value, width: int) -> Logic:
    if isinstance(value, Logic):
        if value.width == width:
            return value
        return Logic(width, value.v, value.x)
    if isinstance(value, bool):
        value = int(value)
    if isinstance(value, int):
        return Logic.from_int(value, width)
    if isinstance(value, str):
        lit = Logic.from_text(value)
        return Logic(width, lit.v, lit.x)
    raise TypeError(f'cannot convert {value!r} to a {width}-bit value')
