"""Minimum modulus of operators between classical sequence spaces."""

from . import classifier, gallery, moduli, modulus, operators, sequences, spaces
from .classifier import PairQuery, Verdict, classify, explain, list_rules
from .errors import (FunctionalNotFound, InvalidInput, MinModError, NonConvergent,
                     NotInCatalog, UnknownExample)
from .gallery import run_all, run_example
from .moduli import (delta_closed, delta_numeric, modulus_curve, premise_m, premise_o,
                     rho_closed, rho_numeric, wmp_via_moduli)
from .modulus import (MinModReport, SolverConfig, attainify, attainment_check,
                      brute_force_min, min_modulus, norming_functional, psum_closed_form)
from .operators import OperatorSpec, apply, make_example, truncate
from .sequences import (BasisTail, Explicit, FixedPlusBasisTail, PartialSums, asymptotic_norm,
                        basis_lower_bound_check, minimizing_check, weak_null_classify)
from .spaces import FinVector, basis, norm, parse_space, parse_vector, vector

__version__ = "0.1.0"
