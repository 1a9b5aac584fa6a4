#!/usr/bin/env python3
"""Power-law band and decay-exponent scan for the subordinated lattice walk."""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))
import numpy as np
from jumpiso.lattice import (gradient_decay, on_diagonal_decay, p1_kernel,
                             power_law_band, torus_semigroup)
from jumpiso.numerics import loglog_slope

R = 128
for n in (1, 2):
    for alpha in (0.5, 1.0, 1.5):
        K = 10 * n * (R // 2) ** 2
        win, tail = p1_kernel(n, alpha, K, R, method="exact")
        band = power_law_band(win, n + alpha, 2.0, R / 2.0)
        print(f"n={n} alpha={alpha}: p1 slope {band['slope']:+.3f} "
              f"(target {-(n+alpha):+.2f}) band {band['band_ratio']:.2f}")
for n, alpha, Rg in [(1, 0.5, 16384), (1, 1.0, 2048), (2, 1.0, 512)]:
    ts = np.geomspace(1.0, 64.0, 9)
    rows = torus_semigroup(n, alpha, Rg, ts, K1=8000)
    t, diag = on_diagonal_decay(rows)
    _, grad = gradient_decay(rows)
    print(f"n={n} alpha={alpha}: diag slope {loglog_slope(t, diag):+.3f} "
          f"(target {-n/alpha:+.2f}) grad slope {loglog_slope(t, grad):+.3f} "
          f"(target {-1/alpha:+.2f})")
