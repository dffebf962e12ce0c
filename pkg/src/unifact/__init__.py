"""Unipotent factorization of special automorphisms of rank-2 bundles on sampled domains."""

from .bundle import Chart, ChartBundle, NilpotentPair, Replica, SectionPair, build_pair, replica_eval, standard_pair
from .elimination import (EliminationQuad, eliminate_four, eliminate_four_divisible, whitehead_diag,
                          whitehead_printed, whitehead_standard)
from .fields import GridDomain, HomotopyField, MatrixField, ScalarField, make_cutoff
from .identities import (fiber_check, gradient_singularity_check, identity_report, psi_eval, q_expand,
                         q_mod_f3_check, reduced_equation, solve_boundary_vars)
from .pipeline import (FactorizationCertificate, Problem, RunConfig, exponentialize, factor_automorphism,
                       verify_certificate)
from .polynomial import Polynomial, divide_exact
from .splitting import split_general, split_two, upgrade_divisibility

__version__ = "0.1.0"
