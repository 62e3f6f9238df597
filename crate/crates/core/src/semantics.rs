//! Executing strategy pairs: play-outs, escrow accounting, payoffs and
//! outcome classification.

use std::fmt;

use thiserror::Error;

use crate::model::{EdgeId, ExchangeProtocol, Player, Strategy, VertexId};
use crate::rational::{Money, Share};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlayError {
    #[error("strategy of {player} has no choice at reached vertex `{vertex}`")]
    Undefined { player: Player, vertex: String },
    #[error("strategy of {player} picks `{edge}` which does not leave vertex `{vertex}`")]
    Foreign {
        player: Player,
        vertex: String,
        edge: String,
    },
    #[error("strategy passed for {got} where {expected} was expected")]
    WrongPlayer { expected: Player, got: Player },
}

/// A realized root-to-terminal run and who conducted which move.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlayOut {
    pub path: Vec<EdgeId>,
    pub moves_a: Vec<EdgeId>,
    pub moves_b: Vec<EdgeId>,
    pub terminal: VertexId,
}

impl PlayOut {
    pub fn moves_of(&self, player: Player) -> &[EdgeId] {
        match player {
            Player::A => &self.moves_a,
            Player::B => &self.moves_b,
        }
    }
}

/// Walks from the root, letting the owner of each vertex pick its edge.
pub fn play(
    protocol: &ExchangeProtocol,
    strategy_a: &Strategy,
    strategy_b: &Strategy,
) -> Result<PlayOut, PlayError> {
    for (expected, s) in [(Player::A, strategy_a), (Player::B, strategy_b)] {
        if s.player != expected {
            return Err(PlayError::WrongPlayer {
                expected,
                got: s.player,
            });
        }
    }
    let mut out = PlayOut {
        path: Vec::new(),
        moves_a: Vec::new(),
        moves_b: Vec::new(),
        terminal: protocol.root(),
    };
    let mut v = protocol.root();
    while let Some(owner) = protocol.owner(v) {
        let strategy = match owner {
            Player::A => strategy_a,
            Player::B => strategy_b,
        };
        let e = strategy.choice(v).ok_or_else(|| PlayError::Undefined {
            player: owner,
            vertex: protocol.vertex(v).id.clone(),
        })?;
        if protocol.edge(e).from != v {
            return Err(PlayError::Foreign {
                player: owner,
                vertex: protocol.vertex(v).id.clone(),
                edge: protocol.edge(e).id.clone(),
            });
        }
        out.path.push(e);
        match owner {
            Player::A => out.moves_a.push(e),
            Player::B => out.moves_b.push(e),
        }
        v = protocol.edge(e).to;
    }
    out.terminal = v;
    Ok(out)
}

/// `(p_A, p_B)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PayoffPair {
    pub a: Money,
    pub b: Money,
}

impl PayoffPair {
    pub fn zero() -> Self {
        PayoffPair {
            a: Money::zero(),
            b: Money::zero(),
        }
    }

    pub fn of(&self, player: Player) -> &Money {
        match player {
            Player::A => &self.a,
            Player::B => &self.b,
        }
    }
}

impl fmt::Display for PayoffPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.a, self.b)
    }
}

/// Total share of each item released along `path`: `(Σρ^A, Σρ^B)`.
pub fn released_shares(protocol: &ExchangeProtocol, path: &[EdgeId]) -> (Share, Share) {
    let mut to_a = Share::zero();
    let mut to_b = Share::zero();
    for &e in path {
        let attrs = &protocol.edge(e).attributes;
        to_a = to_a + &attrs.share_to_a;
        to_b = to_b + &attrs.share_to_b;
    }
    (to_a, to_b)
}

/// Payoffs of the run along `path` (which must start at the root).
///
/// For each player: value of the opponent's item share received, minus the
/// value of the own item share handed over, plus compensations received from
/// anyone's moves, minus deposits and costs of the player's own moves.
pub fn payoff_of_path(protocol: &ExchangeProtocol, path: &[EdgeId]) -> PayoffPair {
    let (to_a, to_b) = released_shares(protocol, path);
    let value = |player: Player, item_of: Player, share: &Share| {
        protocol
            .curve(player, item_of)
            .value_at(share)
            .expect("validated protocols release at most the whole item")
    };
    let mut a = value(Player::A, Player::B, &to_a) - value(Player::A, Player::A, &to_b);
    let mut b = value(Player::B, Player::A, &to_b) - value(Player::B, Player::B, &to_a);
    for &e in path {
        let edge = protocol.edge(e);
        let attrs = &edge.attributes;
        a += &attrs.comp_to_a;
        b += &attrs.comp_to_b;
        let actor = match protocol.owner(edge.from) {
            Some(Player::A) => &mut a,
            Some(Player::B) => &mut b,
            None => unreachable!("edges leave owned vertices"),
        };
        *actor -= &attrs.deposit;
        *actor -= &attrs.cost;
    }
    PayoffPair { a, b }
}

pub fn payoff(
    protocol: &ExchangeProtocol,
    strategy_a: &Strategy,
    strategy_b: &Strategy,
) -> Result<PayoffPair, PlayError> {
    let out = play(protocol, strategy_a, strategy_b)?;
    Ok(payoff_of_path(protocol, &out.path))
}

/// Payoff labelling every terminal vertex; `None` for inner vertices.
pub fn terminal_payoffs(protocol: &ExchangeProtocol) -> Vec<Option<PayoffPair>> {
    protocol
        .vertex_ids()
        .map(|v| {
            protocol
                .is_terminal(v)
                .then(|| payoff_of_path(protocol, &protocol.path_to(v)))
        })
        .collect()
}

/// Running escrow pool balance after each move of a path.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EscrowTrace {
    pub balances: Vec<Money>,
    /// Index of the first move after which the pool is negative.
    pub first_negative: Option<usize>,
}

impl EscrowTrace {
    /// Every prefix keeps the pool non-negative.
    pub fn prefix_closed(&self) -> bool {
        self.first_negative.is_none()
    }

    /// Only the completed run is considered: total compensation paid out does
    /// not exceed the deposits left in the pool.
    pub fn terminal_closed(&self) -> bool {
        self.balances.last().is_none_or(|b| !b.is_negative())
    }

    pub fn final_balance(&self) -> Money {
        self.balances.last().cloned().unwrap_or_default()
    }
}

pub fn escrow_trace(protocol: &ExchangeProtocol, path: &[EdgeId]) -> EscrowTrace {
    let mut balance = Money::zero();
    let mut balances = Vec::with_capacity(path.len());
    let mut first_negative = None;
    for (i, &e) in path.iter().enumerate() {
        balance += &protocol.edge(e).attributes.escrow_delta();
        if first_negative.is_none() && balance.is_negative() {
            first_negative = Some(i);
        }
        balances.push(balance.clone());
    }
    EscrowTrace {
        balances,
        first_negative,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum OutcomeKind {
    /// Both parties received the whole item they asked for.
    Complete,
    /// Nothing was released to anyone.
    Void,
    Unbalanced,
}

impl fmt::Display for OutcomeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutcomeKind::Complete => "complete",
            OutcomeKind::Void => "void",
            OutcomeKind::Unbalanced => "unbalanced",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub kind: OutcomeKind,
    pub received_by_a: Share,
    pub received_by_b: Share,
}

impl Outcome {
    /// All-or-nothing: complete or void.
    pub fn is_all_or_nothing(&self) -> bool {
        self.kind != OutcomeKind::Unbalanced
    }
}

pub fn classify_outcome(protocol: &ExchangeProtocol, path: &[EdgeId]) -> Outcome {
    let (to_a, to_b) = released_shares(protocol, path);
    let kind = if to_a.is_one() && to_b.is_one() {
        OutcomeKind::Complete
    } else if to_a.is_zero() && to_b.is_zero() {
        OutcomeKind::Void
    } else {
        OutcomeKind::Unbalanced
    };
    Outcome {
        kind,
        received_by_a: to_a,
        received_by_b: to_b,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_protocol, EdgeKind, MoveAttributes, ProtocolDraft};
    use Player::*;

    fn draft() -> ProtocolDraft {
        ProtocolDraft::new("t", "unit")
            .item("x", A)
            .item("y", B)
            .linear(A, A, 80)
            .linear(A, B, 0)
            .linear(B, A, 100)
            .linear(B, B, 0)
    }

    #[test]
    fn single_move_payoff_matches_hand_evaluation() {
        // a(e) = ((0, 1), 50, 0, (0, 0)) conducted by A.
        let p = validate_protocol(
            &draft()
                .vertex("v0", Some(A))
                .vertex("t", None)
                .edge(
                    "give",
                    "v0",
                    "t",
                    EdgeKind::Faithful,
                    MoveAttributes::default()
                        .with_shares(Share::zero(), Share::one())
                        .with_cost(Money::from_integer(50)),
                )
                .root("v0"),
        )
        .unwrap();
        let sa = Strategy::parse(&p, A, "v0=give").unwrap();
        let pay = payoff(&p, &sa, &Strategy::empty(B)).unwrap();
        // p_A = 0 - 80 - 50, p_B = 100 - 0
        assert_eq!(pay.a, Money::from_integer(-130));
        assert_eq!(pay.b, Money::from_integer(100));
    }

    #[test]
    fn empty_game_has_zero_payoff_and_void_outcome() {
        let p = validate_protocol(&draft().vertex("v0", None).root("v0")).unwrap();
        let out = play(&p, &Strategy::empty(A), &Strategy::empty(B)).unwrap();
        assert!(out.path.is_empty());
        assert_eq!(payoff_of_path(&p, &out.path), PayoffPair::zero());
        assert_eq!(classify_outcome(&p, &out.path).kind, OutcomeKind::Void);
        assert!(escrow_trace(&p, &out.path).balances.is_empty());
        assert!(escrow_trace(&p, &out.path).prefix_closed());
    }

    #[test]
    fn escrow_trace_of_deposit_and_withdrawal_sequence() {
        let m = Money::from_integer;
        let p = validate_protocol(
            &draft()
                .vertex("v0", Some(A))
                .vertex("v1", Some(B))
                .vertex("v2", Some(A))
                .vertex("t", None)
                .edge(
                    "dep_a",
                    "v0",
                    "v1",
                    EdgeKind::Faithful,
                    MoveAttributes::default().with_deposit(m(100)),
                )
                .edge(
                    "dep_b",
                    "v1",
                    "v2",
                    EdgeKind::Faithful,
                    MoveAttributes::default().with_deposit(m(150)),
                )
                .edge(
                    "settle",
                    "v2",
                    "t",
                    EdgeKind::Faithful,
                    MoveAttributes::default()
                        .with_deposit(m(-100))
                        .with_comps(m(150), m(0)),
                )
                .root("v0"),
        )
        .unwrap();
        let path = p.path_to(p.vertex_id("t").unwrap());
        let trace = escrow_trace(&p, &path);
        assert_eq!(trace.balances, vec![m(100), m(250), m(0)]);
        assert!(trace.prefix_closed() && trace.terminal_closed());
    }

    #[test]
    fn play_reports_missing_choice() {
        let p = validate_protocol(
            &draft()
                .vertex("v0", Some(A))
                .vertex("t", None)
                .edge(
                    "go",
                    "v0",
                    "t",
                    EdgeKind::Faithful,
                    MoveAttributes::default(),
                )
                .root("v0"),
        )
        .unwrap();
        let err = play(&p, &Strategy::empty(A), &Strategy::empty(B)).unwrap_err();
        assert!(matches!(err, PlayError::Undefined { player: A, .. }));
        let err = play(&p, &Strategy::empty(B), &Strategy::empty(B)).unwrap_err();
        assert!(matches!(err, PlayError::WrongPlayer { .. }));
    }

    #[test]
    fn one_sided_release_is_unbalanced() {
        let p = validate_protocol(
            &draft()
                .vertex("v0", Some(A))
                .vertex("t", None)
                .edge(
                    "give",
                    "v0",
                    "t",
                    EdgeKind::Faithful,
                    MoveAttributes::default().with_shares(Share::zero(), Share::one()),
                )
                .root("v0"),
        )
        .unwrap();
        let o = classify_outcome(&p, &p.path_to(p.vertex_id("t").unwrap()));
        assert_eq!(o.kind, OutcomeKind::Unbalanced);
        assert_eq!(o.received_by_b, Share::one());
    }
}
