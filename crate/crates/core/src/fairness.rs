//! Cost fairness and all-or-nothing fairness checks.
//!
//! "Partial cost fairness in favor of P" asks whether, whatever the opponent
//! does, P has some faithful strategy that ends with a non-negative payoff.
//! Two solvers decide it:
//!
//! * [`Method::BruteForce`] enumerates reduced strategies of both players and
//!   evaluates `min over opponent strategies of max over faithful responses`
//!   pair by pair;
//! * [`Method::Induction`] runs one backward pass over the tree (max over
//!   faithful edges at P's vertices, min over all edges at the opponent's).
//!
//! Both share the terminal evaluation, so they can be cross-checked on any
//! instance small enough for the brute force. Terminals are ranked by the
//! objective first, then by the opponent's payoff (the opponent prefers more
//! of it, P prefers less), then by P's payoff. The refined order is still a
//! total order of a zero-sum game, so both solvers settle on terminals with
//! the same payoff pair and their counterexamples agree. The same machinery with a
//! boolean objective decides the complete-or-void fairness notion.

use std::cmp::Reverse;
use std::fmt;

use rayon::prelude::*;

use crate::model::{EdgeId, ExchangeProtocol, Player, Strategy, VertexId};
use crate::rational::Money;
use crate::semantics::{classify_outcome, payoff_of_path, terminal_payoffs, PayoffPair};
use crate::strategies::{
    enumerate_strategies, environment_report, EnumerationOverflow, EnvironmentReport, StrategyKind,
};

/// A guaranteed value, or the absence of any faithful continuation (ranked below every value).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Secured<V> {
    NoFaithfulResponse,
    Value(V),
}

pub type SecuredValue = Secured<Money>;

impl fmt::Display for Secured<Money> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Secured::NoFaithfulResponse => f.write_str("-inf (no faithful response)"),
            Secured::Value(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Predicate {
    PartialCostFairness(Player),
    FullCostFairness,
    /// Complete-or-void outcome guaranteed to the protected player.
    AsokanFairness(Player),
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Predicate::PartialCostFairness(p) => write!(f, "partial-cf:{p}"),
            Predicate::FullCostFairness => f.write_str("full-cf"),
            Predicate::AsokanFairness(p) => write!(f, "fairness:{p}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    BruteForce,
    Induction,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::BruteForce => "bruteforce",
            Method::Induction => "induction",
        })
    }
}

/// The opponent strategy that defeats the favored party, with its best faithful reply.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counterexample {
    pub adversary: Strategy,
    /// `None` when the favored party has no faithful reply at all.
    pub response: Option<Strategy>,
    /// Realized path of `(adversary, response)`; without a response, the
    /// path up to the vertex where no faithful move exists.
    pub path: Vec<EdgeId>,
    pub payoff: Option<PayoffPair>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FairnessVerdict {
    pub predicate: Predicate,
    pub method: Method,
    pub holds: bool,
    /// Worst case over opponent strategies of the favored party's best
    /// faithful payoff. Not set for the complete-or-void check.
    pub worst_case: Option<SecuredValue>,
    pub counterexample: Option<Counterexample>,
    pub reason: Option<String>,
}

struct Solved<V> {
    value: Secured<V>,
    adversary: Strategy,
    response: Option<Strategy>,
    path: Vec<EdgeId>,
}

/// Backward induction over the tree for an arbitrary ordered terminal objective.
fn solve_induction<V: Ord + Clone>(
    protocol: &ExchangeProtocol,
    favored: Player,
    leaf: &[Option<V>],
) -> Solved<V> {
    let n = protocol.vertices().len();
    let mut value: Vec<Option<Secured<V>>> = vec![None; n];
    let mut best: Vec<Option<EdgeId>> = vec![None; n];
    for &v in protocol.preorder().iter().rev() {
        let child_value = |e: EdgeId| {
            value[protocol.edge(e).to.0]
                .clone()
                .expect("children are solved before parents")
        };
        let (val, arg) = match protocol.owner(v) {
            None => (
                Secured::Value(leaf[v.0].clone().expect("terminal has a value")),
                None,
            ),
            Some(owner) if owner == favored => {
                let mut acc: Option<(Secured<V>, EdgeId)> = None;
                for &e in protocol.children(v) {
                    if !protocol.edge(e).is_faithful() {
                        continue;
                    }
                    let cv = child_value(e);
                    if acc.as_ref().is_none_or(|(b, _)| cv > *b) {
                        acc = Some((cv, e));
                    }
                }
                match acc {
                    Some((val, e)) => (val, Some(e)),
                    None => (Secured::NoFaithfulResponse, None),
                }
            }
            Some(_) => {
                let mut acc: Option<(Secured<V>, EdgeId)> = None;
                for &e in protocol.children(v) {
                    let cv = child_value(e);
                    if acc.as_ref().is_none_or(|(b, _)| cv < *b) {
                        acc = Some((cv, e));
                    }
                }
                let (val, e) = acc.expect("inner vertices have outgoing edges");
                (val, Some(e))
            }
        };
        value[v.0] = Some(val);
        best[v.0] = arg;
    }

    let adversary = {
        let mut choices = Vec::new();
        let mut stack = vec![protocol.root()];
        while let Some(v) = stack.pop() {
            match protocol.owner(v) {
                None => {}
                Some(o) if o == favored => {
                    stack.extend(protocol.children(v).iter().map(|&e| protocol.edge(e).to))
                }
                Some(_) => {
                    let e = best[v.0].expect("opponent vertices always have a choice");
                    choices.push((v, e));
                    stack.push(protocol.edge(e).to);
                }
            }
        }
        Strategy::new(favored.opponent(), choices, true)
    };

    let response = {
        let mut choices = Vec::new();
        let mut stack = vec![protocol.root()];
        let mut complete = true;
        while let Some(v) = stack.pop() {
            match protocol.owner(v) {
                None => {}
                Some(o) if o == favored => match best[v.0] {
                    Some(e) => {
                        choices.push((v, e));
                        stack.push(protocol.edge(e).to);
                    }
                    None => {
                        complete = false;
                        break;
                    }
                },
                Some(_) => stack.extend(protocol.children(v).iter().map(|&e| protocol.edge(e).to)),
            }
        }
        complete.then(|| Strategy::new(favored, choices, true))
    };

    let mut path = Vec::new();
    let mut v = protocol.root();
    while let Some(e) = best[v.0] {
        path.push(e);
        v = protocol.edge(e).to;
    }

    Solved {
        value: value[protocol.root().0].clone().expect("root solved"),
        adversary,
        response,
        path,
    }
}

fn walk(
    protocol: &ExchangeProtocol,
    favored: Player,
    response: &Strategy,
    adversary: &Strategy,
) -> (VertexId, Vec<EdgeId>) {
    let mut v = protocol.root();
    let mut path = Vec::new();
    while let Some(owner) = protocol.owner(v) {
        let s = if owner == favored {
            response
        } else {
            adversary
        };
        let e = s
            .choice(v)
            .expect("reduced strategies cover every vertex reached with any opponent");
        path.push(e);
        v = protocol.edge(e).to;
    }
    (v, path)
}

fn terminal_of(
    protocol: &ExchangeProtocol,
    favored: Player,
    response: &Strategy,
    adversary: &Strategy,
) -> VertexId {
    let mut v = protocol.root();
    while let Some(owner) = protocol.owner(v) {
        let s = if owner == favored {
            response
        } else {
            adversary
        };
        let e = s
            .choice(v)
            .expect("reduced strategies cover every vertex reached with any opponent");
        v = protocol.edge(e).to;
    }
    v
}

/// Explicit min over opponent strategies of max over faithful responses.
/// Ties go to the earliest strategy in enumeration order.
fn solve_bruteforce<V: Ord + Clone + Send + Sync>(
    protocol: &ExchangeProtocol,
    favored: Player,
    leaf: &[Option<V>],
    cap: u128,
) -> Result<Solved<V>, EnumerationOverflow> {
    let adversaries =
        enumerate_strategies(protocol, favored.opponent(), StrategyKind::All, true, cap)?;
    let responses = enumerate_strategies(protocol, favored, StrategyKind::Faithful, true, cap)?;

    // The inner loop compares ranks of terminal values instead of the values.
    let mut distinct: Vec<&V> = leaf.iter().flatten().collect();
    distinct.sort();
    distinct.dedup();
    let rank: Vec<u32> = leaf
        .iter()
        .map(|v| {
            v.as_ref()
                .map_or(0, |v| distinct.binary_search(&v).unwrap_or(0) as u32)
        })
        .collect();

    let per_adversary: Vec<(Secured<u32>, Option<usize>)> = adversaries
        .strategies
        .par_iter()
        .map(|adv| {
            let mut best: Option<(u32, usize)> = None;
            for (j, resp) in responses.strategies.iter().enumerate() {
                let r = rank[terminal_of(protocol, favored, resp, adv).0];
                if best.is_none_or(|(b, _)| r > b) {
                    best = Some((r, j));
                }
            }
            match best {
                Some((r, j)) => (Secured::Value(r), Some(j)),
                None => (Secured::NoFaithfulResponse, None),
            }
        })
        .collect();

    let mut worst: Option<usize> = None;
    for (i, (val, _)) in per_adversary.iter().enumerate() {
        if worst.is_none_or(|w| *val < per_adversary[w].0) {
            worst = Some(i);
        }
    }
    let worst = worst.expect("the opponent always has at least one strategy");
    let (value, response_idx) = match per_adversary[worst] {
        (Secured::Value(r), j) => (Secured::Value(distinct[r as usize].clone()), j),
        (Secured::NoFaithfulResponse, j) => (Secured::NoFaithfulResponse, j),
    };
    let adversary = adversaries.strategies[worst].clone();
    let response = response_idx.map(|j| responses.strategies[j].clone());
    let path = match &response {
        Some(r) => walk(protocol, favored, r, &adversary).1,
        None => Vec::new(),
    };
    Ok(Solved {
        value,
        adversary,
        response,
        path,
    })
}

/// Terminal ranking: the objective, then the opponent's payoff reversed,
/// then the favored party's own payoff.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
struct Keyed<V> {
    objective: V,
    opponent: Reverse<Money>,
    own: Money,
}

fn keyed_leaves<V>(
    protocol: &ExchangeProtocol,
    favored: Player,
    objective: impl Fn(VertexId, &PayoffPair) -> V,
) -> Vec<Option<Keyed<V>>> {
    terminal_payoffs(protocol)
        .into_iter()
        .enumerate()
        .map(|(i, p)| {
            p.map(|p| Keyed {
                objective: objective(VertexId(i), &p),
                opponent: Reverse(p.of(favored.opponent()).clone()),
                own: p.of(favored).clone(),
            })
        })
        .collect()
}

fn payoff_leaves(protocol: &ExchangeProtocol, favored: Player) -> Vec<Option<Keyed<Money>>> {
    keyed_leaves(protocol, favored, |_, p| p.of(favored).clone())
}

fn all_or_nothing_leaves(protocol: &ExchangeProtocol, favored: Player) -> Vec<Option<Keyed<bool>>> {
    keyed_leaves(protocol, favored, |v, _| {
        classify_outcome(protocol, &protocol.path_to(v)).is_all_or_nothing()
    })
}

fn objective<V>(value: Secured<Keyed<V>>) -> Secured<V> {
    match value {
        Secured::Value(k) => Secured::Value(k.objective),
        Secured::NoFaithfulResponse => Secured::NoFaithfulResponse,
    }
}

fn no_faithful_reason(favored: Player) -> String {
    format!("no faithful strategy of {favored} covers every opponent behavior")
}

fn cost_verdict(
    protocol: &ExchangeProtocol,
    favored: Player,
    method: Method,
    solved: Solved<Keyed<Money>>,
) -> FairnessVerdict {
    let value = objective(solved.value);
    let holds = matches!(&value, Secured::Value(v) if !v.is_negative());
    let reason = match &value {
        Secured::NoFaithfulResponse => Some(no_faithful_reason(favored)),
        Secured::Value(v) if v.is_negative() => Some(format!(
            "{} can force a payoff of {v} for {}",
            favored.opponent(),
            favored
        )),
        _ => None,
    };
    let counterexample = (!holds).then(|| Counterexample {
        payoff: solved
            .response
            .as_ref()
            .map(|_| payoff_of_path(protocol, &solved.path)),
        adversary: solved.adversary,
        response: solved.response,
        path: solved.path,
    });
    FairnessVerdict {
        predicate: Predicate::PartialCostFairness(favored),
        method,
        holds,
        worst_case: Some(value),
        counterexample,
        reason,
    }
}

pub fn partial_cost_fairness_bruteforce(
    protocol: &ExchangeProtocol,
    favored: Player,
    cap: u128,
) -> Result<FairnessVerdict, EnumerationOverflow> {
    let leaves = payoff_leaves(protocol, favored);
    let solved = solve_bruteforce(protocol, favored, &leaves, cap)?;
    Ok(cost_verdict(protocol, favored, Method::BruteForce, solved))
}

pub fn partial_cost_fairness_induction(
    protocol: &ExchangeProtocol,
    favored: Player,
) -> FairnessVerdict {
    let leaves = payoff_leaves(protocol, favored);
    let solved = solve_induction(protocol, favored, &leaves);
    cost_verdict(protocol, favored, Method::Induction, solved)
}

pub fn partial_cost_fairness(
    protocol: &ExchangeProtocol,
    favored: Player,
    method: Method,
    cap: u128,
) -> Result<FairnessVerdict, EnumerationOverflow> {
    match method {
        Method::BruteForce => partial_cost_fairness_bruteforce(protocol, favored, cap),
        Method::Induction => Ok(partial_cost_fairness_induction(protocol, favored)),
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FullCostFairness {
    pub favoring_a: FairnessVerdict,
    pub favoring_b: FairnessVerdict,
}

impl FullCostFairness {
    pub fn holds(&self) -> bool {
        self.favoring_a.holds && self.favoring_b.holds
    }

    pub fn favoring(&self, player: Player) -> &FairnessVerdict {
        match player {
            Player::A => &self.favoring_a,
            Player::B => &self.favoring_b,
        }
    }
}

pub fn full_cost_fairness(
    protocol: &ExchangeProtocol,
    method: Method,
    cap: u128,
) -> Result<FullCostFairness, EnumerationOverflow> {
    Ok(FullCostFairness {
        favoring_a: partial_cost_fairness(protocol, Player::A, method, cap)?,
        favoring_b: partial_cost_fairness(protocol, Player::B, method, cap)?,
    })
}

/// Whether `protected`, playing faithfully, can always end in a complete or void outcome.
///
/// Gradual-release protocols with partial shares therefore fail by construction.
pub fn asokan_fairness(
    protocol: &ExchangeProtocol,
    protected: Player,
    method: Method,
    cap: u128,
) -> Result<FairnessVerdict, EnumerationOverflow> {
    let leaves = all_or_nothing_leaves(protocol, protected);
    let solved = match method {
        Method::BruteForce => solve_bruteforce(protocol, protected, &leaves, cap)?,
        Method::Induction => solve_induction(protocol, protected, &leaves),
    };
    let value = objective(solved.value);
    let holds = value == Secured::Value(true);
    let reason = match value {
        Secured::NoFaithfulResponse => Some(no_faithful_reason(protected)),
        Secured::Value(false) => Some(format!(
            "{} can force an unbalanced outcome against {}",
            protected.opponent(),
            protected
        )),
        Secured::Value(true) => None,
    };
    let counterexample = (!holds).then(|| Counterexample {
        payoff: solved
            .response
            .as_ref()
            .map(|_| payoff_of_path(protocol, &solved.path)),
        adversary: solved.adversary,
        response: solved.response,
        path: solved.path,
    });
    Ok(FairnessVerdict {
        predicate: Predicate::AsokanFairness(protected),
        method,
        holds,
        worst_case: None,
        counterexample,
        reason,
    })
}

/// Premises of the two impossibility results, evaluated on one protocol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TheoremReport {
    pub environment: EnvironmentReport,
    /// Moves in a game tree are always sequential.
    pub sequential_moves: bool,
    /// Complete-or-void fairness holds for both parties.
    pub fair_exchange: bool,
    /// Non-negligible cost, an initializer X, and X's opponent can leave at any time.
    pub theorem1_premises_hold: bool,
    /// Non-negligible cost, someone initializes, and both can leave at any time.
    pub theorem2_premises_hold: bool,
    /// Predicates that the premises say must fail.
    pub predicted_failures: Vec<Predicate>,
}

pub fn theorem_premises(protocol: &ExchangeProtocol) -> TheoremReport {
    let env = environment_report(protocol);
    let theorem1 = env.nonnegligible_cost
        && env
            .initializer
            .is_some_and(|x| env.can_leave_any_time(x.opponent()));
    let theorem2 = env.nonnegligible_cost
        && env.initializer.is_some()
        && env.can_leave_any_time_a
        && env.can_leave_any_time_b;
    let mut predicted_failures = Vec::new();
    if let (true, Some(x)) = (theorem1 || theorem2, env.initializer) {
        predicted_failures.push(Predicate::PartialCostFairness(x));
    }
    if theorem2 {
        predicted_failures.push(Predicate::FullCostFairness);
    }
    let fair_exchange = Player::BOTH.iter().all(|&p| {
        asokan_fairness(protocol, p, Method::Induction, 0)
            .map(|v| v.holds)
            .unwrap_or(false)
    });
    TheoremReport {
        environment: env,
        sequential_moves: true,
        fair_exchange,
        theorem1_premises_hold: theorem1,
        theorem2_premises_hold: theorem2,
        predicted_failures,
    }
}

/// A predicted failure compared with the solver's verdict.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredictionCheck {
    pub predicate: Predicate,
    pub verdict_holds: bool,
    /// The predicate fails, as predicted.
    pub agrees: bool,
}

pub fn check_predictions(
    protocol: &ExchangeProtocol,
    report: &TheoremReport,
    method: Method,
    cap: u128,
) -> Result<Vec<PredictionCheck>, EnumerationOverflow> {
    report
        .predicted_failures
        .iter()
        .map(|&predicate| {
            let verdict_holds = match predicate {
                Predicate::PartialCostFairness(p) => {
                    partial_cost_fairness(protocol, p, method, cap)?.holds
                }
                Predicate::FullCostFairness => full_cost_fairness(protocol, method, cap)?.holds(),
                Predicate::AsokanFairness(p) => asokan_fairness(protocol, p, method, cap)?.holds,
            };
            Ok(PredictionCheck {
                predicate,
                verdict_holds,
                agrees: !verdict_holds,
            })
        })
        .collect()
}
