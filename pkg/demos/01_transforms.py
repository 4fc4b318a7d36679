"""Reference frames: a balanced three-phase set seen in the stationary and
rotating frames.

A balanced current of 10 A peak at electrical angle theta becomes a fixed
vector of length 10 A in alpha-beta, and a constant (d, q) pair once we rotate
with the rotor. Run: python demos/01_transforms.py
"""

import math

from focsim.transforms import AbcVector, abc_to_dq, clarke, dq_to_abc

amp, phase = 10.0, math.radians(30)
print(f"{'theta deg':>9} {'alpha':>8} {'beta':>8} {'d':>8} {'q':>8}")
for deg in range(0, 360, 45):
    th = math.radians(deg)
    i = AbcVector(*(amp * math.cos(th + phase - k * 2 * math.pi / 3) for k in range(3)))
    ab = clarke(i)
    dq = abc_to_dq(i, th)
    print(f"{deg:9d} {ab.alpha:8.3f} {ab.beta:8.3f} {dq.d:8.3f} {dq.q:8.3f}")

# the amplitude-invariant scaling keeps the peak: |dq| equals the phase peak
back = dq_to_abc(dq, th)
print(f"\n|i_dq| = {math.hypot(dq.d, dq.q):.6f} A, round trip error on phase a = {abs(back.a - i.a):.2e} A")
