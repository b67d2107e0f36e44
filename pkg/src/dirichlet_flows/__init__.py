"""Truncated Dirichlet series, semigroups of Gordon-Hedenmalm symbols, Koenigs functions
and composition-operator diagnostics."""

from .dirichlet_core import (
    LambdaSet,
    MultiIndex,
    TruncatedDirichletSeries,
    convolve,
    differentiate,
    evaluate,
    exp_series,
    h2_norm,
    helson_lhs,
    hp_norm_mc,
)
from .gh_symbol import GHSymbol, compose, eval_symbol, power_pullback, pullback
from .hardy_operator import (
    OperatorMatrix,
    assemble_matrix,
    compression_norm,
    eval_functional_norm,
    generator_unboundedness_check,
    nonunivalence_witness,
    strong_continuity_probe,
)
from .koenigs import (
    Dynamics,
    KoenigsFunction,
    classify_dynamics,
    eval_koenigs,
    invert_series,
    koenigs_from_generator,
    verify_abel,
)
from .semigroup_flow import (
    FlowState,
    Generator,
    estimate_generator,
    integrate_flow,
    picard_construct,
    verify_semigroup,
)

__version__ = "0.1.0"
