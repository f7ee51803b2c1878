"""A compact perturbation that lifts the minimum modulus on ell_1 from 1 to 3.

Run: python3 demos/03_l1_compact_perturbation.py
"""

from minmod import operators as ops, spaces as sp
from minmod.modulus import SolverConfig, min_modulus

T, K = ops.make_example("ex-3.4-T"), ops.make_example("ex-3.4-K")
cfg = SolverConfig(trunc_levels=(4, 8, 16, 24, 32))
rt, rk = min_modulus(T, cfg), min_modulus(T + K, cfg)

print(" N   m_N(T)              m_N(T+K)   gap")
for a, b in zip(rt.levels, rk.levels):
    print(f"{a.N:3d}  {a.m:.15f}   {b.m:.6f}   {b.m - a.m:.9f}")

print("\nthe witness (2/3) e_1 + (1/3) e_n drives ||T x|| down to 1:")
for n in (2, 4, 8, 16):
    x = sp.vector(T.domain, {1: 2 / 3, n: 1 / 3})
    print(f"  n={n:2d}  ||T x_n|| = {sp.norm(ops.apply(T, x)):.12f}  (1 + 2^-n = {1 + 2.0 ** -n:.12f})")

e1 = sp.basis(T.domain, 1)
print(f"\n(T+K) e_1 = {ops.apply(T + K, e1).coeffs}, certificate at N=32: {rk.levels[-1].certificate.coeffs}")
