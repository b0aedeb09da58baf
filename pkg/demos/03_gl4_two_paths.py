# GL(4): the closed-form parametrisation against the generic enumeration,
# and the explicit bound for the longest Weyl element.
# Run with: python3 demos/03_gl4_two_paths.py

import time

from glkloosterman.bounds import bound_thm_w8_exact
from glkloosterman.gl4_fast import accepted_params, kloosterman_gl4_fast
from glkloosterman.kloosterman import CellSpec, kloosterman_sum_and_size

points = [
    (2, (1, 1, 1), (1, 1, 1, 1)),
    (2, (1, 2, 1), (1, 1, 1, 1)),
    (3, (1, 2, 1), (1, 1, -1, -1)),
    (3, (2, 2, 2), (1, 1, 1, 1)),
]

for p, a, units in points:
    spec = CellSpec(p, 4, 1, a, units)
    t0 = time.perf_counter()
    generic, size = kloosterman_sum_and_size(spec)
    t1 = time.perf_counter()
    fast = kloosterman_gl4_fast(spec)
    t2 = time.perf_counter()
    n_fast = sum(1 for _ in accepted_params(spec))
    best, b_min, b_78 = bound_thm_w8_exact(spec, forms=True)
    print(f"p={p} a={a}: |X|={size} (fast path {n_fast}), equal={generic == fast}, "
          f"|Kl|={generic.magnitude():.3f}")
    print(f"    generic {1000 * (t1 - t0):.0f} ms, closed form {1000 * (t2 - t1):.0f} ms")
    print(f"    log_p of the bound: min-form {b_min.log_p():.2f}, 7/8-form {b_78.log_p():.2f}")
