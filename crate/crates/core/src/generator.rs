//! Seeded random protocol generator.
//!
//! Trees alternate owners; a player who took a leave edge owns nothing below
//! it. Deposits and payouts are drawn against the running escrow balance of
//! the path so every prefix stays non-negative. With `enforce_fair_exchange`
//! the only item transfer is a single atomic swap of both full items, made
//! once both parties have already acted, so every outcome is complete or void.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::model::{
    validate_protocol, EdgeKind, ExchangeProtocol, MoveAttributes, Player, ProtocolDraft,
    ValidationReport,
};
use crate::rational::{Money, Share};

/// Chance that a move below the root ends the game early; keeps trees small
/// enough for exhaustive strategy enumeration.
const STOP_CHANCE: f64 = 0.45;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeneratorConfig {
    /// Maximum number of moves on any path.
    pub depth: u32,
    /// Outgoing edges per inner vertex, leave edges included.
    pub branching: u32,
    pub seed: u64,
    /// Positive costs everywhere and a leave edge at every vertex of the
    /// initializer's opponent.
    pub enforce_theorem1_premises: bool,
    /// Positive costs everywhere and leave edges for both parties.
    pub enforce_theorem2_premises: bool,
    pub enforce_fair_exchange: bool,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        GeneratorConfig {
            depth: 3,
            branching: 2,
            seed: 0,
            enforce_theorem1_premises: false,
            enforce_theorem2_premises: false,
            enforce_fair_exchange: true,
        }
    }
}

impl GeneratorConfig {
    pub fn new(depth: u32, branching: u32, seed: u64) -> Self {
        GeneratorConfig {
            depth,
            branching,
            seed,
            ..Default::default()
        }
    }

    fn premises(&self) -> bool {
        self.enforce_theorem1_premises || self.enforce_theorem2_premises
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeneratorError {
    #[error("infeasible generator config: {0}")]
    Infeasible(String),
    #[error("generated protocol failed validation: {0}")]
    Invalid(ValidationReport),
}

#[derive(Clone)]
struct PathState {
    escrow: i64,
    moved: [bool; 2],
    left: [bool; 2],
    swapped: bool,
    remaining_to: [Share; 2],
}

struct Builder {
    rng: ChaCha8Rng,
    config: GeneratorConfig,
    leavers: [bool; 2],
    draft: ProtocolDraft,
    inner: usize,
    terminals: usize,
    edges: usize,
}

impl Builder {
    fn terminal(&mut self) -> String {
        let id = format!("t{}", self.terminals);
        self.terminals += 1;
        self.draft = std::mem::take(&mut self.draft).vertex(&id, None);
        id
    }

    fn edge_id(&mut self, prefix: &str) -> String {
        let id = format!("{prefix}{}", self.edges);
        self.edges += 1;
        id
    }

    fn cost(&mut self) -> Money {
        if self.config.premises() {
            Money::new(self.rng.gen_range(1..=40), 2)
        } else if self.rng.gen_bool(0.25) {
            Money::zero()
        } else {
            Money::from_integer(self.rng.gen_range(1..=20))
        }
    }

    fn attributes(&mut self, mover: Player, first: bool, state: &mut PathState) -> MoveAttributes {
        let mut attrs = MoveAttributes::default().with_cost(self.cost());
        match self.rng.gen_range(0..4) {
            0 => {
                let amount = self.rng.gen_range(1..=30);
                attrs.deposit = Money::from_integer(amount);
                state.escrow += amount;
            }
            1 if state.escrow > 0 => {
                let amount = self.rng.gen_range(1..=state.escrow);
                if self.rng.gen_bool(0.5) {
                    attrs.comp_to_a = Money::from_integer(amount);
                } else {
                    attrs.comp_to_b = Money::from_integer(amount);
                }
                state.escrow -= amount;
            }
            2 if state.escrow > 0 => {
                let amount = self.rng.gen_range(1..=state.escrow);
                attrs.deposit = Money::from_integer(-amount);
                state.escrow -= amount;
            }
            _ => {}
        }
        if self.config.enforce_fair_exchange {
            let eligible = !state.swapped && state.moved[0] && state.moved[1];
            let chance = if first { 0.5 } else { 0.25 };
            if eligible && self.rng.gen_bool(chance) {
                attrs.share_to_a = Share::one();
                attrs.share_to_b = Share::one();
                state.swapped = true;
            }
        } else {
            for p in Player::BOTH {
                let remaining = state.remaining_to[p.index()].clone();
                if remaining.is_zero() || !self.rng.gen_bool(1.0 / 3.0) {
                    continue;
                }
                let released = if self.rng.gen_bool(0.5) {
                    remaining.clone()
                } else {
                    &remaining * &Share::new(1, 2)
                };
                state.remaining_to[p.index()] = remaining - released.clone();
                match p {
                    Player::A => attrs.share_to_a = released,
                    Player::B => attrs.share_to_b = released,
                }
            }
        }
        state.moved[mover.index()] = true;
        attrs
    }

    /// Target vertex after a move; `next` is the preferred owner there.
    fn child(&mut self, next: Player, depth_left: u32, state: PathState) -> String {
        let owner = if !state.left[next.index()] {
            Some(next)
        } else if !state.left[next.opponent().index()] {
            Some(next.opponent())
        } else {
            None
        };
        match owner {
            Some(owner) if depth_left > 0 && !self.rng.gen_bool(STOP_CHANCE) => {
                self.inner_vertex(owner, depth_left, state)
            }
            _ => self.terminal(),
        }
    }

    fn inner_vertex(&mut self, owner: Player, depth_left: u32, state: PathState) -> String {
        let id = format!("v{}", self.inner);
        self.inner += 1;
        self.draft = std::mem::take(&mut self.draft).vertex(&id, Some(owner));

        let branching = self.config.branching;
        let with_leave = branching >= 2
            && (self.leavers[owner.index()] || (!self.config.premises() && self.rng.gen_bool(0.5)));
        let moves = if with_leave { branching - 1 } else { branching };
        for i in 0..moves {
            let kind = if i == 0 || self.rng.gen_bool(0.6) {
                EdgeKind::Faithful
            } else {
                EdgeKind::Unfaithful
            };
            let mut next_state = state.clone();
            let attrs = self.attributes(owner, i == 0, &mut next_state);
            let edge = self.edge_id(if kind.is_faithful() { "f" } else { "u" });
            let to = self.child(owner.opponent(), depth_left - 1, next_state);
            self.draft = std::mem::take(&mut self.draft).edge(&edge, &id, &to, kind, attrs);
        }
        if with_leave {
            let mut next_state = state;
            next_state.left[owner.index()] = true;
            let edge = self.edge_id("leave");
            let to = self.child(owner.opponent(), depth_left - 1, next_state);
            self.draft = std::mem::take(&mut self.draft).leave(&edge, &id, &to);
        }
        id
    }
}

/// Builds the unvalidated description; see [`generate`].
pub fn generate_draft(config: &GeneratorConfig) -> Result<ProtocolDraft, GeneratorError> {
    if config.depth < 1 || config.branching < 1 {
        return Err(GeneratorError::Infeasible(
            "depth and branching must be at least 1".into(),
        ));
    }
    if config.premises() && config.branching < 2 {
        return Err(GeneratorError::Infeasible(
            "leave edges next to a faithful move need branching of at least 2".into(),
        ));
    }
    if config.premises() && config.depth < 2 {
        return Err(GeneratorError::Infeasible(
            "the leaving party needs a vertex after the first move, so depth must be at least 2"
                .into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let initializer = if rng.gen_bool(0.5) {
        Player::A
    } else {
        Player::B
    };
    let mut leavers = [false; 2];
    if config.enforce_theorem1_premises {
        leavers[initializer.opponent().index()] = true;
    }
    if config.enforce_theorem2_premises {
        leavers = [true; 2];
    }

    let mut draft = ProtocolDraft::new(
        format!(
            "generated-s{}-d{}-b{}",
            config.seed, config.depth, config.branching
        ),
        "unit",
    )
    .item("item_a", Player::A)
    .item("item_b", Player::B);
    for p in Player::BOTH {
        let own = rng.gen_range(1..=50);
        let other = rng.gen_range(own + 1..=100);
        draft = draft.linear(p, p, own).linear(p, p.opponent(), other);
    }

    let mut builder = Builder {
        rng,
        config: config.clone(),
        leavers,
        draft,
        inner: 0,
        terminals: 0,
        edges: 0,
    };
    let state = PathState {
        escrow: 0,
        moved: [false; 2],
        left: [false; 2],
        swapped: false,
        remaining_to: [Share::one(), Share::one()],
    };
    let root = builder.inner_vertex(initializer, config.depth, state);
    Ok(builder.draft.root(&root))
}

/// Deterministic in the whole config, seed included.
pub fn generate(config: &GeneratorConfig) -> Result<ExchangeProtocol, GeneratorError> {
    let draft = generate_draft(config)?;
    validate_protocol(&draft).map_err(GeneratorError::Invalid)
}
