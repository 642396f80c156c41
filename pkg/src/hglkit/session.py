"""Session: build, simulate, verify and emit one design.

    with Session(config) as sess:
        dut = RippleCarry()
        sess.track(dut)
        sess.join(tb(dut, 100))
        sess.dump_vcd('adder.vcd')
"""

from __future__ import annotations

import os
import random
from typing import List, Optional, Sequence

from .builder import (Array, BuildState, Module, ParamTree, PartRef, Signal, default_domain,
                      elaborate, pop_state, push_state, to_signal)
from .ir import SignalData
from .logic import Logic
from .sim import Simulator
from .vcd import VcdRecorder
from .verify import Assertion, Ledger, TaskError, TaskHandle, TaskRunner
from .verilog import emit_units, emit_verilog, lint_all

_sessions: List[Session] = []


def seed_from_env(default: int = 0) -> int:
    val = os.environ.get('HGLKIT_SEED')
    if val is None or val == '':
        return default
    return int(val)


class Session:

    def __init__(self, config: Optional[ParamTree] = None, seed: Optional[int] = None,
                 strategy: str = 'optimized', clock_period: int = 200,
                 instrument: bool = False, audit: bool = False) -> None:
        self.state = BuildState(params=config, clock_period=clock_period)
        self.seed = seed_from_env() if seed is None else seed
        self.rng = random.Random(self.seed)
        self.strategy = strategy
        self.instrument = instrument
        self.audit = audit
        self.ledger = Ledger()
        self.sim: Optional[Simulator] = None
        self.runner: Optional[TaskRunner] = None
        self.recorder: Optional[VcdRecorder] = None
        self.assertions: List[Assertion] = []
        self._tracked: List[tuple] = []
        self._tracked_ids = set()

    # ---- context

    def __enter__(self) -> Session:
        push_state(self.state)
        _sessions.append(self)
        return self

    def __exit__(self, *exc) -> None:
        pop_state(self.state)
        if _sessions and _sessions[-1] is self:
            _sessions.pop()

    @property
    def circuit(self):
        return self.state.circuit

    @property
    def tops(self) -> List[Module]:
        return list(self.state.tops)

    # ---- tracking

    def track(self, *items) -> None:
        """ record signals, or every named signal of the given modules, in the VCD """
        if self.sim is not None and self.sim.started:
            raise TaskError('track() must be called before the simulation starts')
        for it in items:
            self._track(it)

    def _track(self, it) -> None:
        if isinstance(it, Module):
            for m in it.walk():
                scope = tuple(m.path.split('.'))
                for s in m._signals:
                    if s.name and not s.const:
                        self._add_track(scope, s.name, s)
            # clock, reset and other module-less inputs read inside the tree
            for s in self.state.circuit.signals:
                if s.module is None and s.name and not s.const and \
                        any(r.gate.module is not None and _in_tree(r.gate.module, it)
                            for r in s.readers):
                    self._add_track((it.path.split('.')[0],), s.name, s)
            return
        if isinstance(it, (Array, list, tuple)):
            for e in it:
                self._track(e)
            return
        s = _data(it)
        if s.module is not None:
            scope = tuple(s.module.path.split('.'))
        else:
            scope = ('top',)
        self._add_track(scope, s.name or f's{s.id}', s)

    def _add_track(self, scope, name: str, s: SignalData) -> None:
        if id(s) in self._tracked_ids:
            return
        self._tracked_ids.add(id(s))
        s.tracked = True
        self._tracked.append((scope, name, s))

    # ---- simulation

    def elaborate(self):
        return elaborate(self.state)

    def _build_sim(self) -> Simulator:
        if self.sim is None:
            # purely combinational designs elaborated early have no clock
            st = self.state
            dom = st.default_domain if st.elaborated else self.domain()
            self.elaborate()
            sim = Simulator(self.state.circuit, self.strategy, self.instrument, self.audit)
            self.sim = sim
            self.runner = TaskRunner(sim, self.ledger)
            self.runner.domain = dom
            for a in self.assertions:
                a.attach(sim, self.ledger)
            if self._tracked:
                self.recorder = VcdRecorder(sim, self._tracked)
        return self.sim

    def start(self) -> Simulator:
        """ build the simulator and settle time 0; tasks spawned before run there """
        sim = self._build_sim()
        if not sim.started:
            sim.start()
        elif self.runner.ready:
            # resume freshly spawned tasks at the current time
            sim._slot(sim.now)
            sim.step_slot()
        return sim

    def _register_assertion(self, a: Assertion) -> None:
        if self.sim is not None:
            raise TaskError('assertions must be declared before the simulation starts')
        if a not in self.assertions:
            self.assertions.append(a)

    def assertion(self, trigger=None, disable='default', name: str = 'assert') -> Assertion:
        """ assertion context; defaults to the rising edge of the default clock,
        disabled while the default reset is asserted """
        push_state(self.state)
        try:
            if trigger is None or disable == 'default':
                dom = default_domain()
            if trigger is None:
                trigger = (dom.clock, dom.edge)
            if disable == 'default':
                disable = (dom.reset, dom.reset_level) if dom.reset is not None else None
        finally:
            pop_state(self.state)
        return Assertion(trigger, disable, session=self, name=name)

    def domain(self):
        """ the default clock domain, created on first use """
        if self.state.elaborated:
            if self.state.default_domain is None:
                raise TaskError('the design has no default clock domain')
            return self.state.default_domain
        push_state(self.state)
        try:
            return default_domain()
        finally:
            pop_state(self.state)

    def clock_signal(self) -> Signal:
        return self.domain().clock

    def reset_signal(self) -> Signal:
        return self.domain().reset

    def spawn(self, *tasks: TaskHandle) -> List[TaskHandle]:
        self._build_sim()
        return [self.runner.spawn(t) for t in tasks]

    def join(self, *tasks: TaskHandle, limit: Optional[int] = None) -> None:
        """ run the simulation until every given task has finished """
        self._build_sim()
        for t in tasks:
            if t.joined:
                raise TaskError(f'task {t.name} joined twice')
            t.joined = True
            self.runner.spawn(t)
        sim = self.start()
        sim.run_while(lambda: not all(t.done for t in tasks), limit)
        if not all(t.done for t in tasks):
            pending = [t.name for t in tasks if not t.done]
            raise TaskError(f'simulation ran out of events before {pending} finished')

    def run(self, duration: int) -> None:
        """ advance the simulation by ``duration`` time units """
        sim = self.start()
        sim.run_until(sim.now + duration)

    def run_until(self, t: int) -> None:
        self.start().run_until(t)

    # ---- stimulus

    def setv(self, sig, value) -> None:
        sim = self._build_sim()
        if isinstance(sig, (Array, list, tuple)):
            vals = list(value) if isinstance(value, (Array, list, tuple)) else [value] * len(sig)
            for s, v in zip(sig, vals):
                self.setv(s, v)
            return
        sim.setv(_data(sig), value)

    def setr(self, sig):
        """ drive uniformly random binary values; returns what was drawn """
        if isinstance(sig, (Array, list, tuple)):
            return [self.setr(s) for s in sig]
        d = _data(sig)
        v = self.rng.getrandbits(d.width)
        self.setv(sig, v)
        return v

    def getv(self, sig):
        if isinstance(sig, (Array, list, tuple)):
            return [self.getv(s) for s in sig]
        if isinstance(sig, PartRef) and sig._sig is not None:
            return sig._sig.data.value
        if isinstance(sig, PartRef):
            # no select gate exists; slice the parent value directly
            kind, lo, n = sig.key
            pv = sig.parent.data.value
            if kind == 'static':
                from .logic import logic_select
                return logic_select(pv, lo, n)
            from .logic import logic_dyn_select
            return logic_dyn_select(pv, lo.data.value, n)
        return _data(sig).value

    # ---- output

    def vcd_text(self) -> str:
        if self.recorder is None:
            raise TaskError('nothing was tracked')
        return self.recorder.text()

    def dump_vcd(self, path: str) -> None:
        with open(path, 'w') as f:
            f.write(self.vcd_text())

    def verilog_text(self, *tops: Module) -> str:
        self.elaborate()
        return emit_verilog(self.state.circuit, tops or self.state.tops)

    def dump_verilog(self, path: str, *tops: Module) -> None:
        with open(path, 'w') as f:
            f.write(self.verilog_text(*tops))

    def lint(self, *tops: Module) -> List[str]:
        self.elaborate()
        return lint_all(emit_units(self.state.circuit, tops or self.state.tops))

    def report(self) -> str:
        out = [self.ledger.report()]
        for a in self.assertions:
            out.append(a.summary())
        return ''.join(out)

    @property
    def ok(self) -> bool:
        return self.ledger.ok


def _in_tree(m, root) -> bool:
    while m is not None:
        if m is root:
            return True
        m = m._parent
    return False


def _data(x) -> SignalData:
    if isinstance(x, SignalData):
        return x
    if isinstance(x, PartRef):
        if x.key[0] == 'static' and x.key[1] == 0 and x.key[2] == x.parent.width:
            return x.parent.data
        raise TaskError('cannot drive or read a part-select; use the whole signal')
    return to_signal(x).data


def current_session() -> Session:
    if not _sessions:
        raise TaskError('no active Session')
    return _sessions[-1]


def setv(sig, value) -> None:
    current_session().setv(sig, value)


def setr(sig):
    return current_session().setr(sig)


def getv(sig):
    return current_session().getv(sig)
