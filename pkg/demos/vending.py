"""Drive the vending machine with random coins and write a waveform."""

import random
import sys

from hglkit import Session
from hglkit.designs import VendingMachine, random_coins, vending_tb

out = sys.argv[1] if len(sys.argv) > 1 else 'vending.vcd'
rng = random.Random(1)
with Session(seed=1) as sess:
    dut = VendingMachine()
    sess.track(dut)
    sess.join(vending_tb(sess, dut, [random_coins(rng, 5) for _ in range(8)]))

with open(out, 'w') as f:
    f.write(sess.vcd_text())
print('checks', 'ok' if sess.ok else 'FAILED', '->', out)
