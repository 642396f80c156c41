"""Build a ripple-carry adder, simulate it with a few X inputs, print Verilog."""

from hglkit import Logic, ParamTree, Session
from hglkit.designs import RippleCarry

with Session(ParamTree(w=8)) as sess:
    dut = RippleCarry()

sess.start()
for x, y in [(3, 4), (200, 100), (Logic.from_text("8'b0000_1x01"), 2)]:
    sess.setv([dut.io.x, dut.io.y], [x, y])
    sess.run(20)
    print(f'{x} + {y} = {sess.getv(dut.io.out)}')

print(sess.verilog_text(dut))
