#!/usr/bin/env python3
"""Cone-function scaling exponents and the gauge sharpness dichotomy."""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))
import numpy as np
from jumpiso.numerics import loglog_slope
from jumpiso.radial import radial_l1_energy, sharpness_profile
from jumpiso.young import builtin

n, a1, a2 = 1, 0.5, 1.5
s_lo = np.geomspace(1e-7, 1e-5, 12)
s_hi = np.geomspace(1e5, 1e7, 12)
for mode in ("min_kernel", "max_kernel", "truncated"):
    lo = loglog_slope(s_lo, [radial_l1_energy(n, a1, a2, mode, s) for s in s_lo])
    hi = loglog_slope(s_hi, [radial_l1_energy(n, a1, a2, mode, s) for s in s_hi])
    print(f"{mode}: slope(s->0) {lo:.4f}  slope(s->inf) {hi:.4f}")
N = builtin("pow_min", n=n, alpha1=a1, alpha2=a2)
prof = sharpness_profile(n, a1, a2, N, np.geomspace(1e-3, 1e3, 61))
print("critical profile end slopes:", prof["slope_low"], prof["slope_high"])
