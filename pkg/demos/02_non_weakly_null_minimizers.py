"""Operators whose minimizing sequences cannot be chosen weakly null.

For each operator a minimizing family is evaluated against the truncated
minimum modulus, and its weak-null status is read off symbolically.

Run: python3 demos/02_non_weakly_null_minimizers.py
"""

from minmod import operators as ops, sequences as seq, spaces as sp
from minmod.modulus import SolverConfig, attainment_check

cfg = SolverConfig(trunc_levels=(8, 16, 32))

cases = []
T1 = ops.make_example("ex-3.2.1")
cases.append(("ell_1 -> ell_2, e_n -> 2^-n e_n", T1, seq.BasisTail(T1.domain)))
T2 = ops.make_example("ex-3.2.2", p=2)
cases.append(("c0 -> ell_2, partial sums", T2, seq.PartialSums(T2.domain)))
T3 = ops.make_example("ex-3.2.3")
x = sp.vector(T3.domain, {1: 0.5})
cases.append(("c0 -> c0, diag(2, 1+1/n)", T3, seq.FixedPlusBasisTail(T3.domain, x, 1.0, offset=0)))

for title, op, fam in cases:
    r = seq.minimizing_check(op, fam, 32, cfg)
    head = ", ".join(f"{v:.4g}" for v in r.values[:4])
    print(f"{title}\n  ||T x_n||: {head}, ..., {r.values[-1]:.6g}")
    print(f"  m estimate {r.m_estimate:.6g}, minimizing={r.minimizing}, "
          f"weak null: {r.weak_null.status} ({r.weak_null.rule})")
    att = attainment_check(op, cfg)
    print(f"  attainment: {att.status}\n")
