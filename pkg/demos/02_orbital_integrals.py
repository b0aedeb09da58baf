# Unipotent orbital integrals at torus points: the coroot-decomposition formula
# against a direct count of cosets.
# Run with: python3 demos/02_orbital_integrals.py

import itertools

from glkloosterman.group_geometry import TorusDiag
from glkloosterman.orbital import (decomposition_count_R, enumerate_decompositions,
                                   orbital_bruteforce, orbital_integral_DR, r_estimate)

# %% one small point in detail
a = TorusDiag(2, (1, 0, -1), (1, 1, 1))
for d in enumerate_decompositions(a.exponents):
    print("decomposition", d.as_dict())
print("formula:", orbital_integral_DR(a), " count:", orbital_bruteforce(a))

# %% all decomposable cocharacters of small height for GL(3)
print(f"{'lambda':>14} {'p':>2} {'formula':>8} {'count':>6} {'R':>3} {'R bound':>8}")
for p in (2, 3):
    for lam in itertools.product(range(-2, 3), repeat=3):
        if sum(lam) or not enumerate_decompositions(lam):
            continue
        a = TorusDiag(p, lam, (1, 1, 1))
        dr, bf = orbital_integral_DR(a), orbital_bruteforce(a)
        flag = "" if dr == bf else "  <-- mismatch"
        print(f"{str(lam):>14} {p:>2} {str(dr):>8} {bf:>6} {decomposition_count_R(a):>3}"
              f" {r_estimate(a):>8}{flag}")

# %% a GL(4) point
a = TorusDiag(3, (1, 0, 0, -1), (1, 1, 1, 1))
print("GL(4), p=3:", orbital_integral_DR(a), orbital_bruteforce(a))
