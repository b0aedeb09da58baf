# A walk through the smallest interesting cell: GL(2), p = 3, level m = 1.
# Run with: python3 demos/01_gl2_cell.py

from fractions import Fraction

import numpy as np

from glkloosterman import CellSpec, PrimeContext
from glkloosterman.bounds import weil_bound
from glkloosterman.kloosterman import (enumerate_cell, kloosterman_sum, s2_restricted,
                                       s2_twisted_decomposition)

# %% the cell torus diag(3 v1, 3^-1 v2) with v = (1, -1)
spec = CellSpec(p=3, n=2, m=1, a=(1,), units=(1, -1))
print("feasible:", spec.feasible, " root order:", spec.root_order)

# each point of X(wc) comes with its u' (on the residue grid) and the u recovered from wc u'
for x in enumerate_cell(spec):
    print("u' =", x.uprime.to_fractions(), " u =", x.u.to_fractions())

# %% the sum itself is an exact cyclotomic integer
kl = kloosterman_sum(spec)
print("Kl =", kl.terms(), "at order", kl.order)  # -3 - 3 z^9, i.e. 3 zeta_3^2
print("as a complex number:", np.round(kl.value(), 12), " |Kl| =", kl.magnitude())

# %% the same number as a restricted two-variable sum
v1, v2 = spec.units
s2 = s2_restricted(Fraction(1, v1), -v2, 1, 1, spec.ctx)
print("matches S_2:", s2 == kl)

# %% summing over the characters mod p^m recovers S_2 again, one level up in the cyclotomic tower
for ell in range(4):
    ctx = PrimeContext.for_cell(3, 2, ell, 2)
    a = s2_restricted(1, 1, ell, 2, ctx)
    b = s2_twisted_decomposition(1, 1, ell, 2, ctx)
    print(f"ell={ell}: twisted == restricted: {a == b},  |S_2| = {a.magnitude():.4f}"
          f"  <=  {weil_bound(1, 1, ell, 2, 3):.4f}")
