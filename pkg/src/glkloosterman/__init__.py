"""Exact evaluation of p-adic GL(n) Kloosterman sums, orbital integrals and their bounds."""

from .errors import *  # noqa: F401,F403
from .padic_core import CycloSum, PadicScaled, PrimeContext, padic, xi_of
from .group_geometry import PMatrix, RelevantWeyl, TorusDiag, UpperUnipotent, WeylPerm
from .kloosterman import (CellSpec, cell_size, kloosterman_sum, kloosterman_sum_and_size,
                          orbit_decompose, s2_restricted, s2_twisted_decomposition,
                          stevens_identity_check)
from .orbital import (GermValue, germ_longest, germ_relevant, orbital_bruteforce,
                      orbital_integral_DR)
from .bounds import (bound_general_nu, bound_thm_w8, bound_thm_wn, germ_decay_sweep, run_sweep,
                     weil_bound)

__version__ = "0.1.0"
