"""Space-vector dwell times around one electrical revolution.

For a reference of fixed magnitude, the two active vectors of each sector
share the PWM period with the zero vectors. The script prints the dwell times
at a few angles and shows the extra DC-link utilisation over sine-triangle
PWM. Run: python demos/02_svpwm.py
"""

import math

from focsim.modulation import linear_range_limit, svpwm_segments, svpwm_times
from focsim.transforms import AlphaBetaVector

V_dc, T_s = 400.0, 100e-6
mag = 200.0
print(f"reference {mag} V peak, V_dc {V_dc} V, T_s {T_s * 1e6:.0f} us\n")
print(f"{'angle':>6} {'sector':>6} {'T1 us':>7} {'T2 us':>7} {'T0 us':>7}")
for deg in range(0, 360, 30):
    th = math.radians(deg + 10)
    t = svpwm_times(AlphaBetaVector(mag * math.cos(th), mag * math.sin(th)), V_dc, T_s)
    print(f"{deg + 10:6d} {t.sector:6d} {t.T1 * 1e6:7.2f} {t.T2 * 1e6:7.2f} {t.T0 * 1e6:7.2f}")

print("\nsymmetric switching sequence at 40 deg:")
t = svpwm_times(AlphaBetaVector(mag * math.cos(0.7), mag * math.sin(0.7)), V_dc, T_s)
for state, dur in svpwm_segments(t):
    print(f"  {state}  {dur * 1e6:6.2f} us")

sv, sp = linear_range_limit("svpwm", V_dc), linear_range_limit("spwm", V_dc)
print(f"\nlinear range: SVPWM {sv:.2f} V, SPWM {sp:.2f} V, ratio {sv / sp:.4f}")
