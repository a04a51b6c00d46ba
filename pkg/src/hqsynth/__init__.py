"""Exact synthesis and evaluation for quality-graded temporal specifications."""

from .formulas import (
    Atom,
    FALSE,
    Factor,
    Formula,
    LassoWord,
    Max,
    Min,
    Next,
    Not,
    TRUE,
    Until,
    WAvg,
    candidate_values,
    conj,
    disj,
    eval_lasso,
    eventually,
    globally,
    implies,
    is_boolean,
    parse,
    values,
)
from .booleanize import AtLeast, EqualTo, GreaterThan, booleanize
from .automata import determinize, dpw_for, ltl_to_nbw, run_lasso
from .common import (
    InternalConsistencyError,
    StateLimitExceeded,
    all_letters,
    format_fraction,
    parse_fraction,
)
from .mdp import (
    DistributionMDP,
    MarkovChain,
    ParityMDP,
    PreMDP,
    RewardMDP,
    Strategy,
    almost_sure_parity,
    cwr_states,
    induced_chain,
    induced_pre_mdp,
    induced_pre_mdp_dist,
    max_end_components,
    mc_ergodic_analysis,
    solve_mean_payoff,
)
from .transducers import (
    Transducer,
    computation_lasso,
    exec_inputs,
    load_transducer,
    save_transducer,
    transducer_from_json,
    transducer_to_dot,
    transducer_to_json,
)
from .evaluation import (
    AssumptionHasZeroProbability,
    almost_sure_value,
    conditional_almost_sure_floor,
    conditional_expected_value,
    expected_value,
    simulate,
    worst_case_value,
    worst_case_witness,
)
from .synthesis import (
    SynthesisResult,
    SynthesisSpec,
    Unrealizable,
    achievability_mdp,
    prob_of_assumption,
    synth,
    synth_assume,
    synth_assume_threshold,
    synth_threshold,
    synthesize,
)

__all__ = [
    "Atom",
    "AtLeast",
    "AssumptionHasZeroProbability",
    "DistributionMDP",
    "EqualTo",
    "FALSE",
    "Factor",
    "Formula",
    "GreaterThan",
    "InternalConsistencyError",
    "LassoWord",
    "MarkovChain",
    "Max",
    "Min",
    "Next",
    "Not",
    "ParityMDP",
    "PreMDP",
    "RewardMDP",
    "StateLimitExceeded",
    "Strategy",
    "SynthesisResult",
    "SynthesisSpec",
    "TRUE",
    "Transducer",
    "Unrealizable",
    "Until",
    "WAvg",
    "achievability_mdp",
    "all_letters",
    "almost_sure_parity",
    "almost_sure_value",
    "booleanize",
    "candidate_values",
    "computation_lasso",
    "conditional_almost_sure_floor",
    "conditional_expected_value",
    "conj",
    "cwr_states",
    "determinize",
    "disj",
    "dpw_for",
    "eval_lasso",
    "eventually",
    "exec_inputs",
    "expected_value",
    "format_fraction",
    "globally",
    "implies",
    "induced_chain",
    "induced_pre_mdp",
    "induced_pre_mdp_dist",
    "is_boolean",
    "load_transducer",
    "ltl_to_nbw",
    "max_end_components",
    "mc_ergodic_analysis",
    "parse",
    "parse_fraction",
    "prob_of_assumption",
    "run_lasso",
    "save_transducer",
    "simulate",
    "solve_mean_payoff",
    "synth",
    "synth_assume",
    "synth_assume_threshold",
    "synth_threshold",
    "synthesize",
    "transducer_from_json",
    "transducer_to_dot",
    "transducer_to_json",
    "values",
    "worst_case_value",
    "worst_case_witness",
]
