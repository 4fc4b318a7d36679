"""Discontinuous PWM: each phase is parked on a DC rail for a third of the
electrical period, which saves switching transitions.

The script samples the modified references over one period and reports how
long each phase spends clamped. Run: python demos/03_dpwm.py
"""

import math

import numpy as np

from focsim.modulation import dpwm_modified_refs
from focsim.transforms import AbcVector

m = 0.8
angles = np.linspace(0, 2 * math.pi, 3600, endpoint=False)
refs = np.array([
    tuple(dpwm_modified_refs(AbcVector(*(m * math.cos(a - k * 2 * math.pi / 3) for k in range(3))), a))
    for a in angles
])
clamped = np.abs(refs) >= 1 - 1e-12
print(f"modulation index {m}")
for k, name in enumerate("abc"):
    print(f"phase {name}: clamped {100 * clamped[:, k].mean():.1f}% of the period")
print("\nphase a reference every 30 deg:")
for deg in range(0, 360, 30):
    print(f"  {deg:3d} deg  {refs[deg * 10, 0]:+.3f}")
