//! Cost-aware fairness analysis for two-party exchange protocols.
//!
//! A protocol is a finite game tree whose edges carry attributes: item shares
//! released to each party, the mover's cost, escrow deposits and compensation
//! payouts. On top of that model the crate offers strategy enumeration,
//! payoff evaluation, fairness solvers, a random protocol generator and a
//! small text format.

pub mod codec;
pub mod fairness;
pub mod generator;
pub mod model;
pub mod rational;
pub mod semantics;
pub mod strategies;

pub use fairness::{
    asokan_fairness, check_predictions, full_cost_fairness, partial_cost_fairness,
    partial_cost_fairness_bruteforce, partial_cost_fairness_induction, theorem_premises,
    Counterexample, FairnessVerdict, FullCostFairness, Method, Predicate, PredictionCheck, Secured,
    SecuredValue, TheoremReport,
};
pub use generator::{generate, generate_draft, GeneratorConfig, GeneratorError};
pub use model::{
    outgoing_edges, validate_protocol, value_of, Edge, EdgeId, EdgeKind, ExchangeProtocol, Issue,
    IssueKind, Item, ModelError, MoveAttributes, Player, ProtocolDraft, Strategy, StrategyError,
    ValidationReport, Valuation, ValueCurve, Vertex, VertexId,
};
pub use num_bigint::BigInt;
pub use num_rational::BigRational;
pub use rational::{parse_rational, Money, RationalParseError, Share};
pub use semantics::{
    classify_outcome, escrow_trace, payoff, payoff_of_path, play, released_shares,
    terminal_payoffs, EscrowTrace, Outcome, OutcomeKind, PayoffPair, PlayError, PlayOut,
};
pub use strategies::{
    can_leave_at_any_time, count_strategies, enumerate_strategies, environment_report,
    has_nonnegligible_cost, is_faithful_strategy, EnumerationOverflow, EnvironmentReport,
    StrategyKind, StrategySet, DEFAULT_ENUMERATION_CAP,
};
