#!/usr/bin/env python3
"""Batch-verify the finite-space theorem engines on seeded random instances.

Usage: python scripts/run_theorem_batch.py [count] [seed] [outdir]
"""
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parents[1] / "src"))
from jumpiso.cli import main

count = int(sys.argv[1]) if len(sys.argv) > 1 else 10
seed = int(sys.argv[2]) if len(sys.argv) > 2 else 7
out = sys.argv[3] if len(sys.argv) > 3 else "out/theorem_batch"
manifest = Path(out) / "manifest.json"
manifest.parent.mkdir(parents=True, exist_ok=True)
manifest.write_text(
    '{"kind": "theorem-batch", "seed": %d,'
    ' "generate": {"count": %d, "m_range": [3, 8], "gamma": true},'
    ' "theorems": ["thm20", "lemma2", "thm21", "thm41", "thm42"]}'
    % (seed, count))
sys.exit(main(["verify", "--manifest", str(manifest), "--out", out]))
