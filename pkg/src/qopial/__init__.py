"""Numerical q-calculus on geometric lattices and verification of q-Opial inequalities."""

from .backend import EXACT, FLOAT, DomainError, get_backend
from .explore import (
    Counterexample,
    GeneratorConfig,
    SearchResult,
    hypothesis_necessity_probe,
    random_pair,
    random_q_decreasing,
    ratio_search,
    violating_function,
)
from .inequalities import (
    HypothesisViolation,
    InequalityId,
    VerificationReport,
    am_gm_margin,
    opial_chain,
    telescoping_residual,
    verify,
    verify_discrete_holder_step,
    verify_opial_general,
    verify_opial_p1,
    verify_two_function,
    verify_wirtinger,
    verify_young_pair,
    young_scalar_margin,
)
from .lattice import (
    ConvergenceError,
    LatticeDerivative,
    LatticeFunction,
    PartitionMismatch,
    QLatticePartition,
    TabulationError,
    is_q_decreasing,
    is_q_increasing,
    jackson_integral_ab,
    jackson_integral_zero,
    make_partition,
    q_derivative,
    q_derivative_at,
    q_natural,
    restricted_integral,
    tabulate,
)

__version__ = "0.1.0"
