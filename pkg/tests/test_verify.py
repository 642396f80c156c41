import itertools

import pytest
from hypothesis import given, strategies as st

from hglkit import (Circuit, Delay, Edge, Join, Logic, Session, TaskError, UInt, evaluate,
                    implies, seq, task)
from hglkit.ir import MultipleDriverError
from hglkit import verify as V

import oracles as O

circ = Circuit()
A = circ.add_signal(1, name='a')
B = circ.add_signal(1, name='b')
W = circ.add_signal(1, name='w')
ADDR = circ.add_signal(4, name='addr')

ONE, ZERO, X = Logic(1, 1), Logic(1, 0), Logic(1, 0, 1)
BIT = {'0': ZERO, '1': ONE, 'x': X}


def trace_of(**cols):
    """ trace_of(a='0110', b='1x00') -> list of samples """
    n = len(next(iter(cols.values())))
    sigs = {'a': A, 'b': B, 'w': W}
    return [{sigs[k]: BIT[v[i]] for k, v in cols.items()} for i in range(n)]


# ------------------------------------------------------------ hand examples

def test_repeat_fails_on_third_step():
    p = V.Repeat(V.SignalTrue(A), 3)
    assert evaluate(p, trace_of(a='110')) == ('fail', 2)
    assert evaluate(p, trace_of(a='111')) == ('pass', 2)


def test_wait_range_takes_the_matching_alternative():
    p = V.Seq(V.WaitRange(1, 3), V.SignalTrue(A))
    # pulse two steps after the wait begins its last step
    assert evaluate(p, trace_of(a='0010'))[0] == 'pass'
    assert O.verdict(p, trace_of(a='0010')) == 'pass'
    assert evaluate(p, trace_of(a='00000'))[0] == 'fail'


def test_seq_versus_fuse_versus_and():
    a, b = V.SignalTrue(A), V.SignalTrue(B)
    tr = trace_of(a='10', b='01')
    assert evaluate(V.Seq(a, b), tr) == ('pass', 1)
    assert evaluate(V.Fuse(a, b), tr)[0] == 'fail'
    assert evaluate(V.And(a, b), tr)[0] == 'fail'
    tr = trace_of(a='1', b='1')
    assert evaluate(V.Fuse(a, b), tr) == ('pass', 0)
    assert evaluate(V.And(a, V.WaitN(1)), tr) == ("pass", 0)


def test_and_ends_with_the_later_side():
    p = V.And(V.SignalTrue(A), V.Seq(V.WaitN(2), V.SignalTrue(B)))
    assert evaluate(p, trace_of(a='100', b='001')) == ('pass', 2)


def test_or_first_success_wins():
    p = V.Or(V.Seq(V.WaitN(3), V.SignalTrue(A)), V.SignalTrue(B))
    assert evaluate(p, trace_of(a='0000', b='1000')) == ('pass', 0)


def test_not_needs_bounded_pattern():
    with pytest.raises(V.PatternError):
        V.Not(V.Until(A, 1))
    with pytest.raises(V.PatternError):
        V.Not(V.EdgeOf(A))


def test_not_inverts_over_the_horizon():
    p = V.Not(V.Seq(V.SignalTrue(A), V.SignalTrue(A)))
    assert evaluate(p, trace_of(a='10')) == ('pass', 1)
    assert evaluate(p, trace_of(a='11'))[0] == 'fail'


def test_until_and_edge():
    assert evaluate(V.Until(A, 1), trace_of(a='0001')) == ('pass', 3)
    assert evaluate(V.Until(A, 1), trace_of(a='000'))[0] == 'running'
    assert evaluate(V.EdgeOf(A), trace_of(a='0001'), start=1) == ('pass', 3)
    assert evaluate(V.Until(A, 1), trace_of(a='0x01')) == ('pass', 3)


def test_rose_and_fell_use_previous_sample():
    assert evaluate(V.Rose(A), trace_of(a='01'), start=1) == ('pass', 1)
    assert evaluate(V.Rose(A), trace_of(a='11'), start=1)[0] == 'fail'
    assert evaluate(V.Rose(A), trace_of(a='x1'), start=1)[0] == 'fail'
    assert evaluate(V.Rose(A), trace_of(a='1'))[0] == 'fail'
    assert evaluate(V.Fell(A), trace_of(a='10'), start=1) == ('pass', 1)


def test_x_is_not_true():
    assert evaluate(V.SignalTrue(A), trace_of(a='x'))[0] == 'fail'


def test_implication_verdicts():
    p = V.Implies(V.SignalTrue(A), V.Seq(V.WaitN(1), V.SignalTrue(B)))
    assert evaluate(p, trace_of(a='10', b='01'))[0] == 'pass'
    assert evaluate(p, trace_of(a='10', b='00'))[0] == 'fail'
    assert evaluate(p, trace_of(a='00', b='00'))[0] == 'vacuous'
    with pytest.raises(V.PatternError):
        V.step(V.Seq(p, V.WaitN(1)), None, {})


def test_pattern_sugar():
    a = V.SignalTrue(A)
    assert V.as_pattern(2) == V.WaitN(2)
    assert V.as_pattern([1, 3]) == V.WaitRange(1, 3)
    assert isinstance(V.as_pattern({'k': A}), V.Capture)
    assert V.as_pattern((a, a)) == V.Fuse(a, a)
    assert a >> 1 == V.Seq(a, V.WaitN(1))
    assert 1 >> a == V.Seq(V.WaitN(1), a)
    assert a ** 2 == V.Repeat(a, 2)
    assert a ** [1, 2] == V.RepeatRange(a, 1, 2)
    assert ~a == V.Not(a)
    assert seq(a, 1, a) == V.Seq(V.Seq(a, V.WaitN(1)), a)
    assert implies(a, 1) == V.Implies(a, V.WaitN(1))
    with pytest.raises(V.PatternError):
        V.as_pattern(True)
    with pytest.raises(V.PatternError):
        V.WaitN(0)


# ------------------------------------------------------------ write-write-read property

def _rose(s):
    return V.Rose(s)


def write_twice_read_once():
    """ a write at an address is followed two steps later by another write
    and two more steps later by a read, all at the same address """
    get = V.Captured('addr')
    en = A
    same = V.Cmp('eq', ADDR, get)
    ante = V.And(V.And(_rose(en), V.SignalTrue(W)), V.Capture((('addr', ADDR),)))
    second = V.Seq(V.WaitN(2), V.And(V.And(_rose(en), V.SignalTrue(W)), same))
    third = V.Seq(V.WaitN(2), V.And(V.And(_rose(en), V.Not(V.SignalTrue(W))), same))
    return V.Implies(ante, V.Fuse(second, third))


def bus_trace(steps):
    """ steps: (en, w, addr) per step """
    return [{A: Logic(1, e), W: Logic(1, w), ADDR: Logic(4, ad)} for e, w, ad in steps]


WWR_OK = [(0, 0, 0), (1, 1, 5), (0, 0, 0), (1, 1, 5), (0, 0, 0), (1, 0, 5), (0, 0, 0)]


def test_wwr_hand_traces():
    p = write_twice_read_once()
    assert evaluate(p, bus_trace(WWR_OK), start=1)[0] == 'pass'
    bad_addr = list(WWR_OK)
    bad_addr[5] = (1, 0, 6)
    assert evaluate(p, bus_trace(bad_addr), start=1)[0] == 'fail'
    no_read = list(WWR_OK)
    no_read[5] = (1, 1, 5)
    assert evaluate(p, bus_trace(no_read), start=1)[0] == 'fail'
    late = list(WWR_OK)
    late[3] = (0, 0, 0)
    assert evaluate(p, bus_trace(late), start=1)[0] == 'fail'
    # a read first is no antecedent match
    assert evaluate(p, bus_trace([(0, 0, 0), (1, 0, 5), (0, 0, 0)]), start=1)[0] == 'vacuous'
    for tr in (WWR_OK, bad_addr, no_read, late):
        assert evaluate(p, bus_trace(tr), start=1)[0] == O.verdict(p, bus_trace(tr), 1)


def en_rose_then_fell():
    return V.Implies(V.Rose(A), V.Seq(V.WaitN(1), V.Fell(A)))


def test_rose_then_fell_hand_traces():
    p = en_rose_then_fell()
    assert evaluate(p, trace_of(a='010'), start=1)[0] == 'pass'
    assert evaluate(p, trace_of(a='011'), start=1)[0] == 'fail'
    assert evaluate(p, trace_of(a='01'), start=1)[0] == 'running'
    assert evaluate(p, trace_of(a='001'), start=1)[0] == 'vacuous'
    assert evaluate(p, trace_of(a='000'), start=1)[0] == 'vacuous'


# ------------------------------------------------------------ oracle agreement

def leaves(sigs):
    out = []
    for s in sigs:
        out += [V.SignalTrue(s), V.Rose(s), V.Fell(s), V.Not(V.SignalTrue(s)),
                V.Cmp('eq', s, 0), V.Cmp('ne', s, 1)]
    return st.sampled_from(out + [V.WaitN(1), V.WaitN(2)])


def linear_patterns(sigs, ranges=False):
    def extend(children):
        ops = [st.builds(V.Seq, children, children), st.builds(V.Fuse, children, children),
               st.builds(V.And, children, children), st.builds(V.Or, children, children),
               st.builds(V.Not, children), st.builds(V.Repeat, children, st.integers(1, 2))]
        if ranges:
            ops += [st.builds(lambda p, m, k: V.RepeatRange(p, m, m + k), children,
                              st.integers(1, 2), st.integers(0, 1)),
                    st.builds(lambda m, k: V.Seq(V.WaitRange(m, m + k), V.SignalTrue(sigs[0])),
                              st.integers(1, 2), st.integers(0, 2))]
        return st.one_of(*ops)
    return st.recursive(leaves(sigs), extend, max_leaves=5).filter(lambda p: p.horizon() <= 8)


def _engine(p, tr, start):
    v, i = evaluate(p, tr, start)
    return v, i


def _check_agrees(p, tr, start):
    v, i = _engine(p, tr, start)
    want = O.verdict(p, tr, start)
    assert v == want, (p, [''.join(O.to_str(s[k]) for k in s) for s in tr], start)
    if v == 'pass' and not isinstance(p, V.Implies):
        assert i == O.first_end(p, tr, start)


@given(linear_patterns([A]))
def test_engine_matches_oracle_exhaustive_one_bit(p):
    h = p.horizon()
    for start in (0, 1):
        n = start + h
        for bits in itertools.product('01', repeat=n):
            _check_agrees(p, trace_of(a=''.join(bits)), start)


@given(linear_patterns([A], ranges=True))
def test_range_patterns_exhaustive_one_bit(p):
    h = p.horizon()
    for bits in itertools.product('01', repeat=h + 1):
        _check_agrees(p, trace_of(a=''.join(bits)), 1)


@given(linear_patterns([A, B], ranges=True), st.data())
def test_engine_matches_oracle_with_unknowns(p, data):
    h = p.horizon()
    n = h + 1
    a = data.draw(st.text(alphabet='01x', min_size=n, max_size=n))
    b = data.draw(st.text(alphabet='01x', min_size=n, max_size=n))
    _check_agrees(p, trace_of(a=a, b=b), 1)


@given(linear_patterns([A, B]), linear_patterns([A, B]), st.data())
def test_implication_matches_oracle(p, q, data):
    prop = V.Implies(p, q)
    n = 1 + p.horizon() + q.horizon()
    a = data.draw(st.text(alphabet='01', min_size=n, max_size=n))
    b = data.draw(st.text(alphabet='01', min_size=n, max_size=n))
    _check_agrees(prop, trace_of(a=a, b=b), 1)


IMPLICATIONS = [
    en_rose_then_fell(),
    V.Implies(V.SignalTrue(A), V.SignalTrue(A)),
    V.Implies(V.SignalTrue(A), V.Seq(V.WaitN(1), V.Not(V.SignalTrue(A)))),
    V.Implies(V.Seq(V.SignalTrue(A), V.SignalTrue(A)), V.Seq(V.WaitRange(1, 3), V.Fell(A))),
    V.Implies(V.Repeat(V.Rose(A), 1), V.Repeat(V.Seq(V.WaitN(1), V.SignalTrue(A)), 2)),
    V.Implies(V.RepeatRange(V.SignalTrue(A), 1, 3), V.Seq(V.WaitN(1), V.Not(V.SignalTrue(A)))),
]


@pytest.mark.parametrize('prop', IMPLICATIONS, ids=range(len(IMPLICATIONS)))
def test_vacuous_rule_exhaustive_twelve_steps(prop):
    """ an implication succeeds iff its antecedent fails or both sides match;
    antecedent failure is reported as vacuous """
    for n in range(1, 13):
        for bits in itertools.product('01', repeat=n):
            tr = trace_of(a=''.join(bits))
            v, _ = evaluate(prop, tr, 1 if n > 1 else 0)
            start = 1 if n > 1 else 0
            ante = O.ends(prop.p, tr, start, {})
            if v == 'running':
                # too short to decide: some obligation or antecedent runs off the end
                continue
            if not ante:
                assert v == 'vacuous'
            else:
                both = all(O.ends(prop.q, tr, j, e) for j, e in ante)
                assert v == ('pass' if both else 'fail'), (bits,)
            assert v == O.verdict(prop, tr, start)
        if n == 12:
            # every 12-step trace decides these properties
            tr = trace_of(a='0' * 12)
            assert evaluate(prop, tr, 1)[0] != 'running'


# ------------------------------------------------------------ assertions in simulation

def _bus_session(values, disable_at=()):
    with Session(seed=0) as sess:
        en = UInt(0, name='en')
        w = UInt(0, name='w')
        addr = UInt[4](0, name='addr')
        rst = sess.reset_signal()
        a = sess.assertion()
        p1 = implies(a.rose(en), 1 >> a.fell(en))
        p2 = implies(a.rose(en) & w & {'addr': addr},
                     (2 >> (a.rose(en) & w & a.eq(addr, a.get('addr'))),
                      2 >> (a.rose(en) & ~w & a.eq(addr, a.get('addr')))))
        a.check(p1, p2)

        @task
        def drive(self):
            for i, (e, wr, ad) in enumerate(values):
                sess.setv(rst, 0 if i in disable_at else 1)
                sess.setv([en, w, addr], [e, wr, ad])
                yield self.clock_n()
            sess.setv(rst, 1)
            sess.setv(en, 0)
            yield self.clock_n(2)

        sess.join(drive())
    return sess, a


def test_assertion_context_write_write_read():
    sess, a = _bus_session(WWR_OK)
    st2 = a.stats['p2']
    # the first write completes the pattern; the second write is itself an
    # antecedent match (attempts overlap) and finds no write two steps later
    assert st2.passed == 1 and st2.failed == 1
    first_write, second_write = 300, 700
    assert st2.failures[0][0] == second_write
    assert a.stats['p1'].passed == 3 and a.stats['p1'].failed == 0
    # verdict per attempt equals the oracle on the sampled trace
    tr = bus_trace(WWR_OK + [(0, 0, 0)] * 3)
    prop = write_twice_read_once()
    assert O.verdict(prop, tr, 1) == 'pass'
    assert O.verdict(prop, tr, 3) == 'fail'


def test_assertion_context_reports_failure():
    steps = list(WWR_OK)
    steps[5] = (1, 0, 9)
    sess, a = _bus_session(steps)
    assert [f[0] for f in a.stats['p2'].failures] == [300, 700]
    assert a.stats['p2'].passed == 0
    assert not sess.ok
    assert 'property p2' in sess.report()


def test_rose_held_high_fails():
    sess, a = _bus_session([(0, 0, 0), (1, 0, 0), (1, 0, 0), (0, 0, 0)])
    assert a.stats['p1'].failed == 1


def test_disable_kills_attempts_without_failing():
    steps = [(0, 0, 0), (1, 0, 0), (1, 0, 0), (0, 0, 0)]
    sess, a = _bus_session(steps, disable_at={2})
    assert a.stats['p1'].failed == 0
    assert a.stats['p1'].disabled >= 1


def test_assertions_after_start_are_rejected():
    with Session() as sess:
        en = UInt(0, name='en')
        sess.run(10)
        a = sess.assertion()
        with pytest.raises(TaskError):
            a.check(a.rose(en))


# ------------------------------------------------------------ tasks

def test_delay_zero_resumes_same_time_and_sees_new_value():
    seen = []
    with Session() as sess:
        s = UInt[4](0, name='s')
        o = s + 1

        @task
        def t(self):
            yield Delay(5)
            sess.setv(s, 3)
            seen.append((sess.sim.now, sess.getv(s)))
            yield Delay(0)
            seen.append((sess.sim.now, sess.getv(s)))
            yield Delay(1)
            seen.append((sess.sim.now, sess.getv(o)))

        sess.join(t())
    assert seen[0] == (5, Logic(4, 0))
    assert seen[1] == (5, Logic(4, 3))
    assert seen[2] == (6, Logic(5, 4))


def test_same_edge_resumes_in_spawn_order():
    order = []
    with Session() as sess:
        clk = sess.clock_signal()

        @task
        def t(self, tag):
            for _ in range(3):
                yield Edge(clk, 'pos')
                order.append(tag)

        sess.join(t('a'), t('b'), t('c'))
    assert order == ['a', 'b', 'c'] * 3


def test_join_waits_for_children_and_returns():
    log = []
    with Session() as sess:

        @task
        def child(self, n):
            yield Delay(n)
            log.append(n)
            return n

        @task
        def parent(self):
            kids = [child(30), child(10)]
            yield Join(kids)
            log.append('parent')
            assert [k.result for k in kids] == [30, 10]

        sess.join(parent())
    assert log == [10, 30, 'parent']


def test_join_twice_is_an_error():
    with Session() as sess:

        @task
        def child(self):
            yield Delay(1)

        c = child()
        sess.join(c)
        with pytest.raises(TaskError):
            sess.join(c)


def test_setv_on_driven_signal_is_rejected():
    with Session() as sess:
        a = UInt[2](0, name='a')
        b = a + 1
        sess.start()
        with pytest.raises(MultipleDriverError):
            sess.setv(b, 1)


def test_setr_is_seeded():
    def draws(seed):
        with Session(seed=seed) as sess:
            x, y = UInt[32](0), UInt[32](0)
            sess.start()
            return [sess.setr([x, y]) for _ in range(3)]
    assert draws(5) == draws(5)
    assert draws(5) != draws(6)


def test_assert_eq_and_ledger():
    with Session() as sess:
        s = UInt[2](0, name='s')

        @task
        def t(self):
            sess.setv(s, Logic(2, 0, 1))
            yield Delay(1)
            self.assert_eq(sess.getv(s), 0)
            self.assert_eq(sess.getv(s), "2'b0x")
            self.assert_eq(sess.getv(s), Logic(2, 0, 1), 'explicit unknown')

        sess.join(t())
    led = sess.ledger
    assert (led.passed, led.failed) == (2, 1)
    assert len(led.entries) == led.passed + led.failed
    assert led.report().startswith('checks=3 passed=2 failed=1')


def test_non_generator_task_is_rejected():
    with Session() as sess:
        @task
        def bad(self):
            return 1
        with pytest.raises(TaskError):
            sess.join(bad())
