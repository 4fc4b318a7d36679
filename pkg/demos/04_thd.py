"""Total harmonic distortion from a windowed spectrum.

Two textbook signals check the estimator: a square wave (THD about 48.3%)
and a sine carrying a 5% fifth harmonic. Run: python demos/04_thd.py
"""

import numpy as np

from focsim.analysis import dft, thd, thd_at_window
from focsim.simcore import TimeSeries

f1, spc = 50.0, 1024
fs = f1 * spc
t = (np.arange(10 * spc) + 0.5) / fs
square = TimeSeries("square", 1 / fs, 0.0, np.sign(np.sin(2 * np.pi * f1 * t)))
spec = dft(square)
print(f"square wave: THD {100 * thd(spec, f1, n_harmonics=spc // 2):.2f}%  (ideal 48.34%)")
for n in (1, 3, 5, 7):
    k = round(n * f1 / spec.f0)
    print(f"  harmonic {n}: {spec.magnitudes[k]:.4f}  (ideal {4 / (np.pi * n):.4f})")

fs = 1e6
t = np.arange(int(0.3 * fs)) / fs
sig = TimeSeries("i_a", 1 / fs, 0.0, np.sin(2 * np.pi * f1 * t) + 0.05 * np.sin(2 * np.pi * 5 * f1 * t))
print(f"\nsine + 5% fifth: THD {100 * thd_at_window(sig, 0.3, f1, n_cycles=10):.3f}%")
