"""Per-gate time of the 32-bit multiplier as the share of binary stimuli grows."""

from hglkit.bench import sweep

ratios = (0.0, 0.25, 0.5, 0.75, 1.0)
rows = sweep(ratios, ('optimized', 'always_full'), width=32, stimuli=20, seed=0, repeat=3)
print('binary  optimized_ns  always_full_ns')
for r, row in zip(ratios, rows):
    print(f'{r:6.2f}  {row["optimized"].per_gate_ns:12.0f}  {row["always_full"].per_gate_ns:14.0f}')
