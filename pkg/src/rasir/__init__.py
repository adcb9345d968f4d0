"""Stochastic DPO graph rewriting: rule algebra, moment analysis and CRN synthesis."""

from .algebra import (
    BudgetExceeded,
    ConstraintSet,
    RuleAlgebraElement,
    commutator,
    product,
    reduce,
    superposition,
)
from .crn import Crn, Reaction, SsaConfig, check_dmb, estimate_emgf, export_crn, simulate
from .dpo import LinearRule, apply_rule, compose_rules, discrete_rule, enumerate_rule_matches, pushout, pushout_complement
from .graph import ColorSignature, Graph, Morphism, canonical_form, count_monos, enumerate_monos
from .model import ModelError, ModelFile, load_model
from .moments import (
    ClosedFormOracle,
    DifferentialOperator,
    analyze_adjoint,
    check_polynomial_jump_closure,
    derive_differential_operator,
    eval_oracle,
    integrate_odes,
    moment_odes,
)
from .state import (
    Hamiltonian,
    Observable,
    State,
    build_hamiltonian,
    connected_decomposition,
    evaluate_observable,
    jump_closure,
    project,
    represent,
)

__all__ = [name for name in dir() if not name.startswith("_")]
