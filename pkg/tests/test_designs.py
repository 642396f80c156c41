import itertools
import random

import pytest

from hglkit import Logic, ParamTree, Session
from hglkit.designs import (EXAMPLES, FullAdder, KoggeStone, RandomDag, RippleCarry, Wallace,
                            adder_config, adder_tb, dag_reference, fulladder_tb, random_stimulus,
                            random_word, vending_trace)

from harness import observe_vending
from oracles import add_oracle, completions, to_str, vending_oracle

COINS = [(0, 0), (1, 0), (0, 1), (1, 1)]


def test_fulladder_tb():
    with Session() as sess:
        dut = FullAdder()
        sess.join(fulladder_tb(sess, dut, 16))
    assert sess.ledger.failed == 0 and sess.ledger.passed == 32


@pytest.mark.parametrize('design', [RippleCarry, KoggeStone])
@pytest.mark.parametrize('w', [5, 7, 13, 16])
def test_adders_random(design, w):
    with Session(ParamTree(w=w), seed=w) as sess:
        dut = design()
        sess.join(adder_tb(sess, dut, 60))
    assert sess.ok and sess.ledger.passed == 60


def test_adder_config_scopes_widths():
    with Session(adder_config(ripple_w=6, kogge_w=10)) as sess:
        r = RippleCarry()
        k = KoggeStone()
    assert r.io.out.width == 7 and k.io.out.width == 11


def test_vending_reference_agrees_with_oracle():
    # the package's transition function against the cumulative-value model
    for n in range(1, 7):
        for seq in itertools.product(COINS, repeat=n):
            want = [(name, valid) for _, valid, name in vending_oracle(seq)]
            assert vending_trace(seq) == want, seq


def test_vending_sim_random_sequences():
    rng = random.Random(2)
    seqs = [[rng.choice(COINS) for _ in range(rng.randint(1, 9))] for _ in range(150)]
    got = observe_vending(seqs)
    for seq, row in zip(seqs, got):
        assert row == [(name, valid) for _, valid, name in vending_oracle(seq)], seq


def test_vending_valid_one_cycle_then_idle():
    got = observe_vending([[(0, 1), (0, 1), (1, 1), (1, 1)]])[0]
    assert got == [('s10', 0), ('sOk', 1), ('sIdle', 0), ('s10', 0)]


def _mult_session(w, strategy='optimized'):
    sess = Session(ParamTree(w=w), strategy=strategy)
    with sess:
        dut = Wallace()
    sess.start()
    return sess, dut


def test_wallace_exhaustive_small():
    sess, dut = _mult_session(4)
    for a, b in itertools.product(range(16), repeat=2):
        sess.setv(dut.a, a)
        sess.setv(dut.b, b)
        sess.run(100)
        assert sess.getv(dut.out) == Logic(8, a * b)


def test_wallace_x_is_sound():
    sess, dut = _mult_session(4)
    rng = random.Random(8)
    for _ in range(300):
        a = random_stimulus(rng, 4, 0.5)
        b = random_stimulus(rng, 4, 0.5)
        sess.setv(dut.a, a)
        sess.setv(dut.b, b)
        sess.run(100)
        got = to_str(sess.getv(dut.out))
        for p in completions(to_str(a)):
            for q in completions(to_str(b)):
                prod = format(p * q, '08b')
                assert all(g == 'x' or g == c for g, c in zip(got, prod)), (a, b, got)


def test_wallace_zero_operand_masks_x():
    sess, dut = _mult_session(4)
    sess.setv(dut.a, Logic(4, 0b0001, 0b0100))
    sess.setv(dut.b, 0)
    sess.run(100)
    assert sess.getv(dut.out) == Logic(8, 0)


def test_dag_matches_reference():
    with Session(ParamTree(n=50, seed=4, w=4)) as sess:
        dut = RandomDag()
    sess.start()
    rng = random.Random(4)
    for _ in range(40):
        words = [random_word(rng, 4, 0.25) for _ in dut.ins]
        for s, v in zip(dut.ins, words):
            sess.setv(s, v)
        sess.run(120)
        want = dag_reference(dut.recipe, words, 4)
        assert [sess.getv(s) for s in dut.nodes] == want


def test_dag_binary_inputs_give_binary_nodes():
    with Session(ParamTree(n=30, seed=1)) as sess:
        dut = RandomDag()
    sess.start()
    rng = random.Random(1)
    for _ in range(20):
        for s in dut.ins:
            sess.setv(s, rng.getrandbits(4))
        sess.run(120)
        assert all(sess.getv(s).x == 0 for s in dut.nodes)


def test_dag_is_seed_deterministic():
    recipes = []
    for _ in range(2):
        with Session(ParamTree(n=20, seed=7)) as sess:
            recipes.append(RandomDag().recipe)
    assert recipes[0] == recipes[1]


@pytest.mark.parametrize('name', list(EXAMPLES))
def test_examples_pass_their_own_checks(name):
    spec = EXAMPLES[name]
    with Session(ParamTree(**spec.params), seed=3) as sess:
        dut, tasks = spec.setup(sess, dict(spec.params), 12)
        sess.join(*tasks)
    assert sess.ok and sess.ledger.passed > 0


def test_add_oracle_matches_python():
    for x, y in itertools.product(range(8), repeat=2):
        assert add_oracle(x, y, 3) == x + y
