"""The p-sum lift value 2^((p-q)/(pq)) and the asymptotic moduli catalog.

Run: python3 demos/04_psum_and_moduli.py
"""

from minmod import moduli, operators as ops, spaces as sp
from minmod.modulus import SolverConfig, min_modulus, psum_closed_form

for p, q in ((1, 2), (2, 3), (1.5, 4)):
    S = ops.make_example("psum-identity", p=p, q=q)
    m = min_modulus(S, SolverConfig(trunc_levels=(64,))).m
    pm = psum_closed_form(1.0, p, q)
    print(f"p={p:<4} q={q:<3} m_64(S)={m:.12f}  closed form {pm.value:.12f} at lambda={pm.lam:.6f}")

print()
for text in ("lp:1", "lp:2", "lp:3", "c0", "sum(lp:2,lp:3;outer=3)", "james"):
    S = sp.parse_space(text)
    for kind in ("delta", "rho"):
        try:
            c = moduli.modulus_curve(S, kind)
        except Exception as exc:
            print(f"{text:24s} {kind:5s} not in catalog ({exc.__class__.__name__})")
            continue
        print(f"{text:24s} {kind:5s} t=1: {c(1.0):.10f}   {c.describe()}")

x = sp.basis(sp.parse_space("lp:2"), 1)
print(f"\nnumeric delta on ell_2 at t=1, N=8: {moduli.delta_numeric(x.space, x, 1.0, 8):.12f}")

X, Y = sp.parse_space("sum(lp:2,lp:3;outer=3)"), sp.parse_space("sum(lp:2,lp:1.5;outer=1.5)")
v = moduli.wmp_via_moduli(X, Y)
print(f"WmP for ({X}, {Y}) via moduli: {v.wmp}")
for line in v.chain:
    print(f"  {line}")
