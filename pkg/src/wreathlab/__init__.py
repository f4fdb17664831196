"""Computational laboratory for marked groups built on a ternary-tree
automaton group: wreath extensions, Chabauty-style ball comparison, and
exact/Monte-Carlo random-walk statistics."""

__version__ = "0.1.0"

from .errors import BudgetExceededError, InvalidConfigError, WreathlabError
from .words import FreeWord, fp_abelianize, fp_inv, fp_make, fp_mul, reduce_free_word
from .trees import Portrait, is_trivial_in_G, portrait_mul, portrait_of_word, vertex_action
from .schreier import SchreierGraph, build_schreier, schreier_distance
from .wreath import WreathElem, eval_word_in_gamma, gamma_generators, tau_lift, wreath_mul
from .marked import (
    Ball,
    DiagonalMarked,
    FGGroupMarked,
    FreeAbelianMarked,
    FreeGroupMarked,
    GammaNMarked,
    MarkedGroup,
    MarkingSearchResult,
    agreement_radius,
    ball,
    diagonal_product,
    lift_marking,
    parse_group_spec,
    search_markings,
    verify_quotient,
)
from .walkstats import (
    DistributionTable,
    StepDistribution,
    entropy_profile,
    exact_convolution,
    fundamental_inequality_report,
    growth_profile,
    kernel_conditional_measure,
    make_step_distribution,
    quotient_comparison_report,
    spectral_radius_profile,
    speed_estimate,
)
from .cli import run_cli
