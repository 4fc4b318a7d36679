"""Induction-motor torque against slip from the per-phase equivalent circuit.

Torque rises almost linearly at small slip, peaks, then falls toward
standstill where no mechanical power is delivered. Run: python demos/06_imcurve.py
"""

import numpy as np

from focsim.machines import ImParams, im_torque_slip_curve

p = ImParams(R=0.5, R_r=0.4, L_ls=2e-3, L_lr=2e-3, L_m=80e-3, pole_pairs=2)
rows = im_torque_slip_curve(p, 230.0, 2 * np.pi * 50, np.linspace(0.01, 1.0, 100))
peak = max(rows, key=lambda r: r.T_e)
scale = 50 / peak.T_e
for r in rows[::6] + [rows[-1]]:
    print(f"S={r.S:5.2f} T={r.T_e:8.2f} N m  P={r.P_out:9.1f} W  |I|={r.I_mag:6.1f} A  " + "#" * int(r.T_e * scale))
print(f"\npeak torque {peak.T_e:.2f} N m at slip {peak.S:.2f}")
