"""Minimum modulus traces for a few small operators.

Run: python3 demos/01_minimum_modulus.py
"""

from pathlib import Path

import numpy as np
import scipy.linalg

from minmod import operators as ops
from minmod.modulus import SolverConfig, brute_force_min, min_modulus
from minmod.spaces import Lp

SPECS = Path(__file__).parent / "specs"
cfg = SolverConfig(trunc_levels=(2, 4, 8))

for f in sorted(SPECS.glob("*.json")):
    op = ops.load_operator(f)
    rep = min_modulus(op, cfg)
    trace = ", ".join(f"m_{lv.N}={lv.m:.6g} ({lv.method})" for lv in rep.levels)
    print(f"{f.name:24s} {trace}")

# the iterative solver against an independent SVD on a Hilbert pair
A = np.random.default_rng(42).normal(size=(10, 10))
T = ops.matrix(Lp(2.0), Lp(2.0), A)
ms = min_modulus(T, SolverConfig(trunc_levels=(10,), method="multistart")).m
print(f"\nrandom 10x10 on ell_2: multistart {ms:.12f}  svd {scipy.linalg.svdvals(A)[-1]:.12f}")

# and against a brute-force sphere scan on ell_1^3 -> ell_2^3
B = np.random.default_rng(7).normal(size=(3, 3))
S = ops.matrix(Lp(1.0), Lp(2.0), B)
print(f"random 3x3 ell_1 -> ell_2: solver {min_modulus(S, SolverConfig(trunc_levels=(3,))).m:.6f}"
      f"  brute force {brute_force_min(S, 1000, dim=3):.6f}")
