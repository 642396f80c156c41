"""Simulation tasks, stimulus helpers, the result ledger and temporal assertions.

Tasks are generators. They yield triggers (``Delay``, ``Edge``,
``ClockCycles``, ``Join`` or another task) and resume after the round in
which the trigger fired, in spawn order.

Assertions sample signal values as they were at the start of the trigger
time (before that time's updates). Each trigger starts one attempt per
property; attempts advance one step per trigger.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Iterable, List, Optional, Tuple

from .builder import Array, PartRef, Signal, to_signal
from .ir import SignalData
from .logic import Logic, compare_planes, extend_planes, mask
from .sim import Simulator, Watcher


class TaskError(Exception):
    pass


class PatternError(Exception):
    pass


#------------------
# triggers
#------------------

class Trigger:
    pass


@dataclass
class Delay(Trigger):
    n: int = 0


@dataclass
class Edge(Trigger):
    signal: Any
    kind: str = 'pos'

    def __post_init__(self):
        if self.kind not in ('pos', 'neg', 'any'):
            raise TaskError(f'edge kind must be pos, neg or any, not {self.kind!r}')


@dataclass
class ClockCycles(Trigger):
    signal: Any
    n: int = 1
    kind: str = 'pos'


class Join(Trigger):
    def __init__(self, *tasks) -> None:
        # Join(a, b) or Join([a, b])
        if len(tasks) == 1 and isinstance(tasks[0], (list, tuple)):
            tasks = tuple(tasks[0])
        self.tasks = list(tasks)


def _edge_hit(kind: str, prev: Tuple[int, int], cur: Tuple[int, int]) -> bool:
    pv = 2 if prev[1] & 1 else prev[0] & 1
    cv = 2 if cur[1] & 1 else cur[0] & 1
    if pv == cv:
        return False
    pos = (pv == 0 and cv != 0) or (pv == 2 and cv == 1)
    neg = (pv == 1 and cv != 1) or (pv == 2 and cv == 0)
    if kind == 'pos':
        return pos
    if kind == 'neg':
        return neg
    return True


#------------------
# ledger
#------------------

@dataclass
class Entry:
    time: int
    source: str
    ok: bool
    message: str


class Ledger:
    """ pass/fail records; failures never stop the simulation """

    def __init__(self) -> None:
        self.entries: List[Entry] = []

    def record(self, ok: bool, message: str, source: str = '', time: int = 0) -> None:
        self.entries.append(Entry(time, source, ok, message))

    @property
    def passed(self) -> int:
        return sum(1 for e in self.entries if e.ok)

    @property
    def failed(self) -> int:
        return sum(1 for e in self.entries if not e.ok)

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def failures(self) -> List[Entry]:
        return [e for e in self.entries if not e.ok]

    def report(self, max_failures: int = 10) -> str:
        lines = [f'checks={len(self.entries)} passed={self.passed} failed={self.failed}']
        for e in self.failures()[:max_failures]:
            lines.append(f'FAIL t={e.time} {e.source}: {e.message}')
        return '\n'.join(lines) + '\n'


def _as_logic(v, width: Optional[int] = None) -> Logic:
    if isinstance(v, (Signal, PartRef)):
        d = to_signal(v).data
        return d.value
    if isinstance(v, SignalData):
        return v.value
    if isinstance(v, Logic):
        return v
    if isinstance(v, str):
        return Logic.from_text(v)
    if isinstance(v, bool):
        v = int(v)
    if isinstance(v, int):
        if width is None:
            width = max(1, v.bit_length())
        return Logic.from_int(v, max(width, v.bit_length(), 1))
    raise TaskError(f'cannot compare {v!r}')


def values_equal(actual, expected) -> bool:
    """X bits compare equal only to X bits at the same positions."""
    if isinstance(expected, int) and not isinstance(expected, bool) and expected < 0:
        a = _as_logic(actual)
        return a.x == 0 and a.v == expected & mask(a.width)
    a = _as_logic(actual)
    e = _as_logic(expected, a.width)
    return a.v == e.v and a.x == e.x


#------------------
# tasks
#------------------

class TaskHandle:
    """A resumable verification process.

    ``fn(self, *args)`` must be a generator function; ``self`` is this handle,
    which offers ``clock_n`` and ``assert_eq``.
    """

    def __init__(self, fn: Callable, args: tuple = (), kwargs: Optional[dict] = None,
                 name: str = '') -> None:
        self.fn = fn
        self.args = args
        self.kwargs = kwargs or {}
        self.name = name or getattr(fn, '__name__', 'task')
        self.state = 'new'
        self.gen = None
        self.order = -1
        self.runner: Optional[TaskRunner] = None
        self.result = None
        self.joined = False
        self.waiters: List[TaskHandle] = []

    @property
    def done(self) -> bool:
        return self.state == 'done'

    def clock_n(self, n: int = 1) -> ClockCycles:
        """ trigger for ``n`` inactive (falling) edges of the default clock """
        r = self.runner
        dom = r.domain if r is not None and r.domain is not None else None
        if dom is None:
            from .builder import default_domain
            dom = default_domain()
        kind = 'neg' if dom.edge == 1 else 'pos'
        return ClockCycles(dom.clock, n, kind)

    def assert_eq(self, actual, expected, message: str = '') -> bool:
        ok = values_equal(actual, expected)
        a = _as_logic(actual)
        msg = message or f'got {a} expected {expected}'
        r = self.runner
        r.ledger.record(ok, msg, self.name, r.sim.now)
        return ok

    def __repr__(self) -> str:
        return f'<task {self.name} {self.state}>'


def task(fn: Callable) -> Callable[..., TaskHandle]:
    """ decorator: calling the result builds a TaskHandle (not yet started) """
    def make(*args, **kwargs) -> TaskHandle:
        return TaskHandle(fn, args, kwargs)
    make.__name__ = fn.__name__
    make.__doc__ = fn.__doc__
    return make


class _EdgeWait:
    __slots__ = ('task', 'kind', 'remaining')

    def __init__(self, task, kind, remaining) -> None:
        self.task, self.kind, self.remaining = task, kind, remaining


class TaskRunner:
    """ cooperative scheduler for tasks, driven by simulator round hooks """

    def __init__(self, sim: Simulator, ledger: Ledger) -> None:
        self.sim = sim
        self.ledger = ledger
        self.tasks: List[TaskHandle] = []
        self.ready: List[TaskHandle] = []
        self.next_round: List[TaskHandle] = []
        self.timers: Dict[int, List[TaskHandle]] = {}
        self.edge_waits: Dict[int, List[_EdgeWait]] = {}
        self.last: Dict[int, Tuple[int, int]] = {}
        self.watchers: Dict[int, Watcher] = {}
        self.fired: List[_EdgeWait] = []
        self.current: Optional[TaskHandle] = None
        # clock domain used by clock_n
        self.domain = None
        sim.round_hooks.append(self.on_round)

    def spawn(self, t: TaskHandle) -> TaskHandle:
        if t.state != 'new':
            return t
        t.runner = self
        t.order = len(self.tasks)
        self.tasks.append(t)
        t.gen = t.fn(t, *t.args, **t.kwargs)
        if not hasattr(t.gen, 'send'):
            raise TaskError(f'task {t.name} is not a generator function')
        t.state = 'ready'
        self.ready.append(t)
        return t

    # ---- waiting

    def _watch(self, sig: SignalData) -> None:
        if id(sig) in self.watchers:
            return
        self.last[id(sig)] = (sig.v, sig.x)
        self.watchers[id(sig)] = Watcher(sig, self._changed)

    def _changed(self, sig: SignalData) -> None:
        prev = self.last[id(sig)]
        cur = (sig.v, sig.x)
        self.last[id(sig)] = cur
        for w in self.edge_waits.get(id(sig), ()):
            if _edge_hit(w.kind, prev, cur):
                w.remaining -= 1
                if w.remaining == 0:
                    self.fired.append(w)
        if self.fired:
            waits = self.edge_waits[id(sig)]
            self.edge_waits[id(sig)] = [w for w in waits if w.remaining > 0]

    def _wait(self, t: TaskHandle, trig) -> None:
        sim = self.sim
        if isinstance(trig, TaskHandle):
            trig = Join(trig)
        if trig is None:
            trig = Delay(0)
        if isinstance(trig, int) and not isinstance(trig, bool):
            trig = Delay(trig)
        t.state = 'waiting'
        if isinstance(trig, Delay):
            if trig.n < 0:
                raise TaskError('negative delay')
            if trig.n == 0:
                self.next_round.append(t)
            else:
                at = sim.now + trig.n
                self.timers.setdefault(at, []).append(t)
                sim._slot(at)
        elif isinstance(trig, (Edge, ClockCycles)):
            sig = to_signal(trig.signal).data
            n = trig.n if isinstance(trig, ClockCycles) else 1
            if n < 1:
                self.next_round.append(t)
                return
            self._watch(sig)
            self.edge_waits.setdefault(id(sig), []).append(_EdgeWait(t, trig.kind, n))
        elif isinstance(trig, Join):
            pending = []
            for c in trig.tasks:
                if c.joined:
                    raise TaskError(f'task {c.name} joined twice')
                c.joined = True
                self.spawn(c)
                if not c.done:
                    pending.append(c)
            t.result = None
            if not pending:
                self.next_round.append(t)
            else:
                t._join_pending = set(id(c) for c in pending)
                for c in pending:
                    c.waiters.append(t)
        else:
            raise TaskError(f'task {t.name} yielded unsupported trigger {trig!r}')

    def _finish(self, t: TaskHandle) -> None:
        t.state = 'done'
        for w in t.waiters:
            w._join_pending.discard(id(t))
            if not w._join_pending:
                self.ready.append(w)
        t.waiters = []

    # ---- hook

    def on_round(self, now: int) -> bool:
        ready = self.ready
        self.ready = []
        ready.extend(self.timers.pop(now, ()))
        ready.extend(w.task for w in self.fired)
        self.fired = []
        ready.extend(self.next_round)
        self.next_round = []
        while ready:
            ready.sort(key=lambda t: t.order)
            batch, ready = ready, []
            for t in batch:
                if t.state == 'done':
                    continue
                self._resume(t)
            ready.extend(self.ready)
            self.ready = []
        return bool(self.next_round)

    def _resume(self, t: TaskHandle) -> None:
        self.current = t
        t.state = 'running'
        try:
            trig = t.gen.send(None)
        except StopIteration as stop:
            t.result = stop.value
            self._finish(t)
            return
        finally:
            self.current = None
        self._wait(t, trig)

    @property
    def all_done(self) -> bool:
        return all(t.done for t in self.tasks)


#------------------
# patterns
#------------------

class Pattern:
    """ base of the assertion pattern algebra """

    # signal operators hand mixed expressions over to the pattern algebra
    defers_signal_ops = True

    def __rshift__(self, other) -> Pattern:
        return Seq(self, as_pattern(other))

    def __rrshift__(self, other) -> Pattern:
        return Seq(as_pattern(other), self)

    def __and__(self, other) -> Pattern:
        return And(self, as_pattern(other))

    def __rand__(self, other) -> Pattern:
        return And(as_pattern(other), self)

    def __or__(self, other) -> Pattern:
        return Or(self, as_pattern(other))

    def __ror__(self, other) -> Pattern:
        return Or(as_pattern(other), self)

    def __invert__(self) -> Pattern:
        return Not(self)

    def __pow__(self, n) -> Pattern:
        if isinstance(n, (list, tuple)):
            return RepeatRange(self, n[0], n[1])
        return Repeat(self, n)

    def implies(self, other) -> Implies:
        return Implies(self, as_pattern(other))

    def horizon(self) -> Optional[int]:
        """ most steps a match can span, None if unbounded """
        raise NotImplementedError

    def signals(self) -> List[SignalData]:
        return []


def _sig(s) -> SignalData:
    if isinstance(s, SignalData):
        return s
    return to_signal(s).data


@dataclass(frozen=True)
class SignalTrue(Pattern):
    sig: SignalData

    def horizon(self):
        return 1

    def signals(self):
        return [self.sig]


@dataclass(frozen=True)
class Captured:
    name: str


@dataclass(frozen=True)
class Cmp(Pattern):
    op: str
    sig: SignalData
    rhs: Any

    def horizon(self):
        return 1

    def signals(self):
        return [self.sig]


@dataclass(frozen=True)
class Rose(Pattern):
    sig: SignalData

    def horizon(self):
        return 1

    def signals(self):
        return [self.sig]


@dataclass(frozen=True)
class Fell(Pattern):
    sig: SignalData

    def horizon(self):
        return 1

    def signals(self):
        return [self.sig]


@dataclass(frozen=True)
class WaitN(Pattern):
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise PatternError('wait count must be >= 1')

    def horizon(self):
        return self.n


@dataclass(frozen=True)
class WaitRange(Pattern):
    m: int
    n: int

    def __post_init__(self):
        if not 1 <= self.m <= self.n:
            raise PatternError(f'bad wait range [{self.m}, {self.n}]')

    def horizon(self):
        return self.n


@dataclass(frozen=True)
class EdgeOf(Pattern):
    sig: SignalData

    def horizon(self):
        return None

    def signals(self):
        return [self.sig]


@dataclass(frozen=True)
class Until(Pattern):
    sig: SignalData
    value: int

    def horizon(self):
        return None

    def signals(self):
        return [self.sig]


@dataclass(frozen=True)
class Capture(Pattern):
    items: Tuple[Tuple[str, SignalData], ...]

    def horizon(self):
        return 1

    def signals(self):
        return [s for _, s in self.items]


@dataclass(frozen=True)
class _Binary(Pattern):
    p: Pattern
    q: Pattern

    def signals(self):
        return self.p.signals() + self.q.signals()


@dataclass(frozen=True)
class Seq(_Binary):
    """ q starts the step after p ends """

    def horizon(self):
        a, b = self.p.horizon(), self.q.horizon()
        return None if a is None or b is None else a + b


@dataclass(frozen=True)
class Fuse(_Binary):
    """ q starts on the step where p ends """

    def horizon(self):
        a, b = self.p.horizon(), self.q.horizon()
        return None if a is None or b is None else a + b - 1


@dataclass(frozen=True)
class And(_Binary):
    """ both run in lockstep from the same step; ends when the later one does """

    def horizon(self):
        a, b = self.p.horizon(), self.q.horizon()
        return None if a is None or b is None else max(a, b)


@dataclass(frozen=True)
class Or(_Binary):

    def horizon(self):
        a, b = self.p.horizon(), self.q.horizon()
        return None if a is None or b is None else max(a, b)


@dataclass(frozen=True)
class Not(Pattern):
    """ matches, over p's full horizon, when p has no match """

    p: Pattern

    def __post_init__(self):
        if isinstance(self.p, Implies) or self.p.horizon() is None:
            raise PatternError('Not needs a bounded pattern')

    def horizon(self):
        return self.p.horizon()

    def signals(self):
        return self.p.signals()


@dataclass(frozen=True)
class Repeat(Pattern):
    p: Pattern
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise PatternError('repeat count must be >= 1')

    def horizon(self):
        h = self.p.horizon()
        return None if h is None else h * self.n

    def signals(self):
        return self.p.signals()


@dataclass(frozen=True)
class RepeatRange(Pattern):
    p: Pattern
    m: int
    n: int

    def __post_init__(self):
        if not 1 <= self.m <= self.n:
            raise PatternError(f'bad repeat range [{self.m}, {self.n}]')

    def horizon(self):
        h = self.p.horizon()
        return None if h is None else h * self.n

    def signals(self):
        return self.p.signals()


@dataclass(frozen=True)
class Implies(Pattern):
    """ property: every match of p must be followed by a match of q starting
    on p's last step; no match of p is a vacuous pass """

    p: Pattern
    q: Pattern

    def horizon(self):
        return None

    def signals(self):
        return self.p.signals() + self.q.signals()


@dataclass(frozen=True)
class _NotRun(Pattern):
    states: frozenset
    remaining: int

    def horizon(self):
        return self.remaining


def as_pattern(x) -> Pattern:
    if isinstance(x, Pattern):
        return x
    if isinstance(x, bool):
        raise PatternError('booleans are not patterns')
    if isinstance(x, int):
        return WaitN(x)
    if isinstance(x, list) and len(x) == 2:
        return WaitRange(x[0], x[1])
    if isinstance(x, dict):
        return Capture(tuple((k, _sig(v)) for k, v in x.items()))
    if isinstance(x, tuple):
        if not x:
            raise PatternError('empty tuple pattern')
        parts = [as_pattern(e) for e in x]
        p = parts[0]
        for q in parts[1:]:
            p = Fuse(p, q)
        return p
    if isinstance(x, (Signal, PartRef)):
        return SignalTrue(_sig(x))
    raise PatternError(f'cannot make a pattern from {x!r}')


def implies(p, q) -> Implies:
    return Implies(as_pattern(p), as_pattern(q))


def seq(*parts) -> Pattern:
    ps = [as_pattern(p) for p in parts]
    out = ps[0]
    for q in ps[1:]:
        out = Seq(out, q)
    return out


#------------------
# stepping
#------------------

class Sample:
    """ sampled values at one trigger, plus the previous trigger's sample """

    __slots__ = ('values', 'prev', 'time')

    def __init__(self, values: Dict[int, Tuple[int, int, int]], prev: Optional[Sample],
                 time: int = 0) -> None:
        self.values = values
        self.prev = prev
        self.time = time

    def get(self, sig: SignalData) -> Logic:
        v, x, w = self.values[id(sig)]
        return Logic(w, v, x)


def _bit0(lg: Optional[Logic]) -> int:
    """ 0, 1, or 2 for X """
    if lg is None:
        return 2
    if lg.x & 1:
        return 2
    return lg.v & 1


def _cmp(op: str, a: Logic, b: Logic, signed: bool = False) -> bool:
    w = max(a.width, b.width)
    av, ax = extend_planes(a.v, a.x, a.width, w, False)
    bv, bx = extend_planes(b.v, b.x, b.width, w, False)
    v, x = compare_planes(op, av, ax, bv, bx, w, signed)
    return v == 1 and x == 0


def check_step(p: Pattern, smp: Sample, env: dict) -> bool:
    """ evaluate a single-step check pattern """
    if isinstance(p, SignalTrue):
        return smp.get(p.sig).v != 0
    if isinstance(p, Cmp):
        a = smp.get(p.sig)
        rhs = p.rhs
        if isinstance(rhs, Captured):
            if rhs.name not in env:
                return False
            b = env[rhs.name]
        elif isinstance(rhs, Logic):
            b = rhs
        else:
            b = Logic.from_int(int(rhs), max(a.width, int(rhs).bit_length(), 1))
        return _cmp(p.op, a, b)
    if isinstance(p, Rose):
        prev = smp.prev.get(p.sig) if smp.prev is not None else None
        return _bit0(prev) == 0 and _bit0(smp.get(p.sig)) == 1
    if isinstance(p, Fell):
        prev = smp.prev.get(p.sig) if smp.prev is not None else None
        return _bit0(prev) == 1 and _bit0(smp.get(p.sig)) == 0
    raise PatternError(f'not a check: {p!r}')


_CHECKS = (SignalTrue, Cmp, Rose, Fell)


def step(p: Pattern, smp: Sample, env: dict) -> List[Tuple[Optional[Pattern], dict]]:
    """Advance ``p`` by one sample.

    Returns (residual, env) pairs: a residual of None means a match ended at
    this step; otherwise the residual continues at the next step.
    """
    if isinstance(p, _CHECKS):
        return [(None, env)] if check_step(p, smp, env) else []
    if isinstance(p, WaitN):
        return [(None, env)] if p.n == 1 else [(WaitN(p.n - 1), env)]
    if isinstance(p, WaitRange):
        out = []
        for k in range(p.m, p.n + 1):
            out.extend(step(WaitN(k), smp, env))
        return out
    if isinstance(p, Capture):
        e = dict(env)
        for name, s in p.items:
            e[name] = smp.get(s)
        return [(None, e)]
    if isinstance(p, Until):
        lg = smp.get(p.sig)
        hit = lg.x == 0 and lg.v == p.value & mask(lg.width)
        return [(None, env)] if hit else [(p, env)]
    if isinstance(p, EdgeOf):
        if smp.prev is not None and smp.prev.get(p.sig) != smp.get(p.sig):
            return [(None, env)]
        return [(p, env)]
    if isinstance(p, Seq):
        out = []
        for r, e in step(p.p, smp, env):
            out.append((p.q if r is None else Seq(r, p.q), e))
        return out
    if isinstance(p, Fuse):
        out = []
        for r, e in step(p.p, smp, env):
            if r is None:
                out.extend(step(p.q, smp, e))
            else:
                out.append((Fuse(r, p.q), e))
        return out
    if isinstance(p, Or):
        return step(p.p, smp, env) + step(p.q, smp, env)
    if isinstance(p, And):
        out = []
        left = step(p.p, smp, env)
        if not left:
            return []
        right = step(p.q, smp, env)
        for rp, ep in left:
            for rq, eq in right:
                e = {**ep, **eq}
                if rp is None:
                    out.append((rq, e))
                elif rq is None:
                    out.append((rp, e))
                else:
                    out.append((And(rp, rq), e))
        return out
    if isinstance(p, Repeat):
        if p.n == 1:
            return step(p.p, smp, env)
        return step(Seq(p.p, Repeat(p.p, p.n - 1)), smp, env)
    if isinstance(p, RepeatRange):
        out = []
        for k in range(p.m, p.n + 1):
            out.extend(step(Repeat(p.p, k), smp, env))
        return out
    if isinstance(p, Not):
        return _not_step(p.p, [(p.p, env)], p.p.horizon(), smp, env)
    if isinstance(p, _NotRun):
        return _not_step(None, [(r, dict(ek)) for r, ek in p.states], p.remaining, smp, env)
    if isinstance(p, Implies):
        raise PatternError('implication is only allowed at the top of a property')
    raise PatternError(f'unknown pattern {p!r}')


def _env_key(env: dict) -> tuple:
    return tuple(sorted(env.items(), key=lambda kv: kv[0]))


def _not_step(_p, states, remaining: int, smp: Sample, env: dict):
    nxt = set()
    for r, e in states:
        for r2, e2 in step(r, smp, e):
            if r2 is None:
                return []
            nxt.add((r2, _env_key(e2)))
    if remaining <= 1:
        return [(None, env)]
    return [(_NotRun(frozenset(nxt), remaining - 1), env)]


def _dedupe(pairs) -> List[Tuple[Pattern, dict]]:
    seen = set()
    out = []
    for r, e in pairs:
        k = (r, _env_key(e))
        if k not in seen:
            seen.add(k)
            out.append((r, e))
    return out


class Attempt:
    """ one evaluation of a property started at a given trigger """

    __slots__ = ('prop', 'start', 'threads', 'obligations', 'matched', 'verdict')

    def __init__(self, prop: Pattern, start: int) -> None:
        self.prop = prop
        self.start = start
        self.matched = False
        self.verdict = 'running'
        if isinstance(prop, Implies):
            self.threads = [(prop.p, {})]
            self.obligations: List[list] = []
        else:
            self.threads = [(prop, {})]
            self.obligations = []

    def feed(self, smp: Sample) -> str:
        if self.verdict != 'running':
            return self.verdict
        prop = self.prop
        if not isinstance(prop, Implies):
            outs = []
            for r, e in self.threads:
                outs.extend(step(r, smp, e))
            if any(r is None for r, _ in outs):
                self.verdict = 'pass'
            else:
                self.threads = _dedupe(outs)
                if not self.threads:
                    self.verdict = 'fail'
            return self.verdict
        # implication: advance open obligations, then the antecedent
        keep = []
        for ob in self.obligations:
            outs = []
            for r, e in ob:
                outs.extend(step(r, smp, e))
            if any(r is None for r, _ in outs):
                continue
            outs = _dedupe(outs)
            if not outs:
                self.verdict = 'fail'
                return self.verdict
            keep.append(outs)
        outs = []
        for r, e in self.threads:
            outs.extend(step(r, smp, e))
        residual = []
        for r, e in outs:
            if r is not None:
                residual.append((r, e))
                continue
            self.matched = True
            qs = step(prop.q, smp, e)
            if any(r2 is None for r2, _ in qs):
                continue
            qs = _dedupe(qs)
            if not qs:
                self.verdict = 'fail'
                return self.verdict
            keep.append(qs)
        self.obligations = keep
        self.threads = _dedupe(residual)
        if not self.threads and not self.obligations:
            self.verdict = 'pass' if self.matched else 'vacuous'
        return self.verdict


def evaluate(prop, samples: List[Dict[SignalData, Logic]], start: int = 0) -> Tuple[str, int]:
    """Run one attempt of ``prop`` over ``samples`` beginning at ``start``.

    Each sample maps SignalData to Logic. Returns (verdict, index of the
    deciding step); 'running' when the trace ends first.
    """
    prop = as_pattern(prop) if not isinstance(prop, Pattern) else prop
    att = Attempt(prop, start)
    prev = None
    chain = []
    for i, s in enumerate(samples):
        smp = Sample({id(k): (v.v, v.x, v.width) for k, v in s.items()}, prev, i)
        chain.append(smp)
        prev = smp
    for i in range(start, len(chain)):
        v = att.feed(chain[i])
        if v != 'running':
            return v, i
    return 'running', len(chain) - 1


#------------------
# assertion context
#------------------

class _Sampler:
    """ keeps the value a signal had at the start of the current time """

    __slots__ = ('sig', 'cur', 'pre', 't', 'sim')

    def __init__(self, sig: SignalData, sim: Simulator) -> None:
        self.sig = sig
        self.sim = sim
        self.cur = (sig.v, sig.x)
        self.pre = self.cur
        self.t = -1

    def changed(self, sig: SignalData) -> None:
        now = self.sim.now
        if self.t != now:
            self.pre = self.cur
            self.t = now
        self.cur = (sig.v, sig.x)

    def preponed(self, now: int) -> Tuple[int, int]:
        return self.pre if self.t == now else self.cur


@dataclass
class PropertyStats:
    name: str
    passed: int = 0
    vacuous: int = 0
    failed: int = 0
    disabled: int = 0
    failures: List[Tuple[int, int]] = field(default_factory=list)


class Assertion:
    """Concurrent assertions triggered on a clock edge.

    ``trigger=(clk, 1)`` samples on rising edges; ``disable=(rst, 0)`` kills
    attempts (without failing them) whenever rst samples as 0.
    """

    def __init__(self, trigger, disable=None, session=None, name: str = 'assert') -> None:
        clk, edge = trigger if isinstance(trigger, tuple) else (trigger, 1)
        self.clock = _sig(clk)
        self.edge = 'pos' if int(edge) == 1 else 'neg'
        if disable is not None:
            ds, lvl = disable if isinstance(disable, tuple) else (disable, 1)
            self.disable = (_sig(ds), int(lvl))
        else:
            self.disable = None
        self.session = session
        self.name = name
        self.props: List[Tuple[str, Pattern]] = []
        self.stats: Dict[str, PropertyStats] = {}
        self.attempts: List[Tuple[str, Attempt]] = []
        self.samplers: Dict[int, _Sampler] = {}
        self.prev_sample: Optional[Sample] = None
        self.triggers = 0
        self._pending = False
        self.sim: Optional[Simulator] = None
        self.ledger: Optional[Ledger] = None

    def __enter__(self) -> Assertion:
        return self

    def __exit__(self, *exc) -> None:
        pass

    # ---- pattern helpers

    def rose(self, s) -> Rose:
        return Rose(_sig(s))

    def fell(self, s) -> Fell:
        return Fell(_sig(s))

    def get(self, name: str) -> Captured:
        return Captured(name)

    def eq(self, s, v) -> Cmp:
        return Cmp('eq', _sig(s), v)

    def ne(self, s, v) -> Cmp:
        return Cmp('ne', _sig(s), v)

    def lt(self, s, v) -> Cmp:
        return Cmp('lt', _sig(s), v)

    def gt(self, s, v) -> Cmp:
        return Cmp('gt', _sig(s), v)

    def edge_of(self, s) -> EdgeOf:
        return EdgeOf(_sig(s))

    def until(self, s, v: int) -> Until:
        return Until(_sig(s), v)

    def check(self, *props, **named) -> None:
        items = [(f'p{len(self.props) + i + 1}', p) for i, p in enumerate(props)]
        items += list(named.items())
        for name, p in items:
            p = as_pattern(p) if not isinstance(p, Pattern) else p
            if isinstance(p, Pattern) and not isinstance(p, Implies):
                p.horizon()
            self.props.append((name, p))
            self.stats[name] = PropertyStats(name)
        if self.session is not None:
            self.session._register_assertion(self)

    # ---- runtime

    def attach(self, sim: Simulator, ledger: Ledger) -> None:
        self.sim = sim
        self.ledger = ledger
        sigs = [self.clock]
        if self.disable is not None:
            sigs.append(self.disable[0])
        for _, p in self.props:
            sigs.extend(p.signals())
        for s in sigs:
            if id(s) not in self.samplers:
                sm = _Sampler(s, sim)
                self.samplers[id(s)] = sm
        self._clk_last = (self.clock.v, self.clock.x)
        for sm in self.samplers.values():
            Watcher(sm.sig, sm.changed)
        Watcher(self.clock, self._clock_changed)
        sim.round_hooks.append(self.on_round)

    def _clock_changed(self, sig: SignalData) -> None:
        cur = (sig.v, sig.x)
        if _edge_hit(self.edge, self._clk_last, cur):
            self._pending = True
        self._clk_last = cur

    def on_round(self, now: int) -> bool:
        if not self._pending:
            return False
        self._pending = False
        self.triggers += 1
        vals = {}
        for k, sm in self.samplers.items():
            v, x = sm.preponed(now)
            vals[k] = (v, x, sm.sig.width)
        smp = Sample(vals, self.prev_sample, now)
        self.prev_sample = smp
        if self.disable is not None:
            ds, lvl = self.disable
            v, x, _ = vals[id(ds)]
            if not x & 1 and (v & 1) == lvl:
                for name, _ in self.attempts:
                    self.stats[name].disabled += 1
                self.attempts = []
                return False
        for name, p in self.props:
            self.attempts.append((name, Attempt(p, now)))
        live = []
        for name, att in self.attempts:
            verdict = att.feed(smp)
            st = self.stats[name]
            if verdict == 'running':
                live.append((name, att))
            elif verdict == 'pass':
                st.passed += 1
            elif verdict == 'vacuous':
                st.vacuous += 1
            else:
                st.failed += 1
                st.failures.append((att.start, now))
                if self.ledger is not None:
                    self.ledger.record(False, f'property {name} started at t={att.start} failed',
                                       self.name, now)
        self.attempts = live
        return False

    def summary(self) -> str:
        lines = []
        for name, _ in self.props:
            s = self.stats[name]
            lines.append(f'{name}: pass={s.passed} vacuous={s.vacuous} fail={s.failed} '
                         f'disabled={s.disabled} running='
                         f'{sum(1 for n, _ in self.attempts if n == name)}')
        return '\n'.join(lines) + '\n'
