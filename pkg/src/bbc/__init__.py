"""Bounded binary circuits: equational rewriting, variants, and deduction."""

from .ac import (
    MatchResult, UnifierSet, canonical_mod, equal_mod, match_mod, subsumes_mod,
    unify_mod,
)
from .checks import (
    CheckReport, check_completeness, check_confluence_sampling,
    check_normal_form_catalog, check_sort_decreasing_termination, check_soundness,
)
from .protocol import (
    Derivation, ExperimentFailed, KnowledgeState, SecrecyQuery, deduce_closure,
    run_paper_experiment,
)
from .rewriting import (
    DerivationTrace, RewriteStep, StepCapExceeded, is_normal_form, normal_form,
    normalize, rewrite_once,
)
from .semantics import (
    AtomLimit, TruthTable, UnboundAtom, classify_normal_form, evaluate,
    logically_equivalent, truth_table,
)
from .syntax import ParseError, format_term, load_rule_system, parse_term
from .terms import (
    AC, BIT, CIRCUIT, COMM_ONLY, FREE, FRESH, MSG, App, Decomposition, FreshVars,
    IllSorted, InvalidRule, RewriteRule, RuleSystem, Signature, Substitution,
    Term, Var, apply_substitution, as_bit, bit, canonical, circ,
    compose_substitutions, disj, enumerate_circuits, in_language, neg, rank,
    sort_of, top, variables,
)
from .theories import all_theories, theory
from .variants import (
    FuelExhausted, Variant, VariantSet, narrow_one_step, variant_complexity,
    variant_unify, variants_of,
)

__all__ = [name for name in dir() if not name.startswith("_")]
