#!/usr/bin/env python3
"""Growth-threshold classification for the weighted stable-like family."""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))
from jumpiso.perturbed import example_threshold

for alpha in (0.5, 1.0, 1.5):
    rep = example_threshold(2, alpha, [alpha / 4, alpha / 2, alpha])
    for row in rep["rows"]:
        print(f"alpha={alpha} eps={row['eps']:.3f}: {row['class']:5s} "
              f"phi_slope={row['phi_slope']:+.4f} ratio_slope={row['ratio_slope']:+.4f}")
