//! Hand-built reference protocols.
//!
//! * `fairswap-eth`: cost skeleton of the FairSwap file sale on Ethereum
//!   (init, accept, reveal, confirm or complain), in Gas.
//! * `figure2-naive`: pay-or-deliver-first exchange without any third party.
//! * `shoplifter`: a shop and a customer who may steal and then cannot walk away.
//! * `deposit-compensated`: the initializer escrows a deposit that pays the
//!   other side if the initializer aborts.
//! * `free-deposit`: both sides escrow a deposit with zero-cost deposit and
//!   withdrawal moves; the only variant here that is fully cost fair.
//! * `empty`: a single terminal vertex.

use thiserror::Error;

use crate::model::{
    validate_protocol, EdgeKind, ExchangeProtocol, MoveAttributes, Player, ProtocolDraft,
};
use crate::rational::{Money, Share};

pub const BUILTIN_NAMES: [&str; 6] = [
    "fairswap-eth",
    "figure2-naive",
    "shoplifter",
    "deposit-compensated",
    "free-deposit",
    "empty",
];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown built-in protocol `{0}` (known: {known})", known = BUILTIN_NAMES.join(", "))]
pub struct UnknownBuiltin(pub String);

/// Model parameters of `fairswap-eth`, all in Gas.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FairSwapParams {
    /// Price of the file; both parties value the payment at this amount.
    pub price: i64,
    pub seller_data_value: i64,
    pub buyer_data_value: i64,
    pub init_cost: i64,
    pub accept_cost: i64,
    pub reveal_cost: i64,
    pub confirm_cost: i64,
    pub complain_cost: i64,
    pub finalize_cost: i64,
    pub refund_cost: i64,
}

impl Default for FairSwapParams {
    fn default() -> Self {
        FairSwapParams {
            price: 3_000_000,
            seller_data_value: 500_000,
            buyer_data_value: 4_000_000,
            init_cost: 1_050_000,
            accept_cost: 45_000,
            reveal_cost: 60_000,
            confirm_cost: 35_000,
            complain_cost: 120_000,
            finalize_cost: 40_000,
            refund_cost: 30_000,
        }
    }
}

fn cost(c: i64) -> MoveAttributes {
    MoveAttributes::default().with_cost(Money::from_integer(c))
}

fn releases(a: MoveAttributes, to_a: i64, to_b: i64) -> MoveAttributes {
    a.with_shares(Share::new(to_a, 1), Share::new(to_b, 1))
}

fn deposit(a: MoveAttributes, amount: i64) -> MoveAttributes {
    a.with_deposit(Money::from_integer(amount))
}

const F: EdgeKind = EdgeKind::Faithful;
const U: EdgeKind = EdgeKind::Unfaithful;

pub fn fairswap_draft(params: &FairSwapParams) -> ProtocolDraft {
    use Player::*;
    ProtocolDraft::new("fairswap-eth", "Gas")
        .roles("seller", "buyer")
        .item("data", A)
        .item("payment", B)
        .linear(A, A, params.seller_data_value)
        .linear(A, B, params.price)
        .linear(B, A, params.buyer_data_value)
        .linear(B, B, params.price)
        .vertex("v0", Some(A))
        .vertex("v1", Some(B))
        .vertex("t_refused", None)
        .vertex("t_grief", None)
        .vertex("v2", Some(A))
        .vertex("v2x", Some(B))
        .vertex("t_refunded", None)
        .vertex("t_stuck", None)
        .vertex("v3", Some(B))
        .vertex("t_confirmed", None)
        .vertex("v3c", Some(A))
        .vertex("t_judged", None)
        .vertex("t_judged_unclaimed", None)
        .vertex("v3x", Some(A))
        .vertex("t_finalized", None)
        .vertex("t_unclaimed", None)
        .edge("init", "v0", "v1", F, cost(params.init_cost))
        .leave("refuse", "v0", "t_refused")
        .edge("accept", "v1", "v2", F, cost(params.accept_cost))
        .leave("leave", "v1", "t_grief")
        .edge(
            "reveal",
            "v2",
            "v3",
            F,
            releases(cost(params.reveal_cost), 0, 1),
        )
        .leave("abort", "v2", "v2x")
        .edge("refund", "v2x", "t_refunded", F, cost(params.refund_cost))
        .leave("leave_refund", "v2x", "t_stuck")
        .edge(
            "confirm",
            "v3",
            "t_confirmed",
            F,
            releases(cost(params.confirm_cost), 1, 0),
        )
        .edge("complain", "v3", "v3c", U, cost(params.complain_cost))
        .leave("leave_confirm", "v3", "v3x")
        .edge(
            "finalize_after_complaint",
            "v3c",
            "t_judged",
            F,
            releases(cost(params.finalize_cost), 1, 0),
        )
        .leave("leave_c", "v3c", "t_judged_unclaimed")
        .edge(
            "finalize",
            "v3x",
            "t_finalized",
            F,
            releases(cost(params.finalize_cost), 1, 0),
        )
        .leave("leave_x", "v3x", "t_unclaimed")
        .root("v0")
}

fn figure2_draft() -> ProtocolDraft {
    use Player::*;
    ProtocolDraft::new("figure2-naive", "EUR")
        .roles("buyer", "seller")
        .item("money", A)
        .item("data", B)
        .linear(A, A, 100)
        .linear(A, B, 150)
        .linear(B, A, 100)
        .linear(B, B, 30)
        .vertex("v0", Some(A))
        .vertex("v1", Some(B))
        .vertex("t_paid_delivered", None)
        .vertex("t_paid_kept", None)
        .vertex("v2", Some(B))
        .vertex("t_nothing", None)
        .vertex("v3", Some(A))
        .vertex("t_delivered_paid", None)
        .vertex("t_delivered_unpaid", None)
        .edge(
            "pay",
            "v0",
            "v1",
            F,
            releases(MoveAttributes::default(), 0, 1),
        )
        .edge("wait", "v0", "v2", U, MoveAttributes::default())
        .edge(
            "deliver",
            "v1",
            "t_paid_delivered",
            F,
            releases(MoveAttributes::default(), 1, 0),
        )
        .edge("keep", "v1", "t_paid_kept", U, MoveAttributes::default())
        .edge("refuse", "v2", "t_nothing", F, MoveAttributes::default())
        .edge(
            "deliver_first",
            "v2",
            "v3",
            U,
            releases(MoveAttributes::default(), 1, 0),
        )
        .edge(
            "pay_late",
            "v3",
            "t_delivered_paid",
            F,
            releases(MoveAttributes::default(), 0, 1),
        )
        .edge(
            "run",
            "v3",
            "t_delivered_unpaid",
            U,
            MoveAttributes::default(),
        )
        .root("v0")
}

fn shoplifter_draft() -> ProtocolDraft {
    use Player::*;
    ProtocolDraft::new("shoplifter", "EUR")
        .roles("shop", "customer")
        .item("goods", A)
        .item("cash", B)
        .linear(A, A, 8)
        .linear(A, B, 10)
        .linear(B, A, 12)
        .linear(B, B, 10)
        .vertex("v0", Some(A))
        .vertex("v1", Some(B))
        .vertex("t_bought", None)
        .vertex("v2", Some(B))
        .vertex("t_confessed", None)
        .vertex("t_convicted", None)
        .vertex("t_left", None)
        .edge("open", "v0", "v1", F, cost(1))
        .edge("buy", "v1", "t_bought", F, releases(cost(1), 1, 1))
        .edge("steal", "v1", "v2", U, releases(cost(1), 0, 1))
        .leave("leave", "v1", "t_left")
        .edge("confess", "v2", "t_confessed", F, releases(cost(20), 1, 0))
        .edge("not_confess", "v2", "t_convicted", U, cost(50))
        .root("v0")
}

fn deposit_compensated_draft() -> ProtocolDraft {
    use Player::*;
    ProtocolDraft::new("deposit-compensated", "Gas")
        .roles("provider", "client")
        .item("service", A)
        .item("fee", B)
        .linear(A, A, 40)
        .linear(A, B, 70)
        .linear(B, A, 100)
        .linear(B, B, 60)
        .vertex("v0", Some(A))
        .vertex("t_refused", None)
        .vertex("v1", Some(B))
        .vertex("v1x", Some(A))
        .vertex("t_withdrawn_early", None)
        .vertex("t_abandoned_early", None)
        .vertex("v2", Some(A))
        .vertex("v2x", Some(B))
        .vertex("t_compensated", None)
        .vertex("t_unclaimed", None)
        .vertex("v3", Some(B))
        .vertex("v3x", Some(A))
        .vertex("t_unpaid", None)
        .vertex("t_unpaid_abandoned", None)
        .vertex("v4", Some(A))
        .vertex("t_done", None)
        .vertex("t_done_abandoned", None)
        .edge("init", "v0", "v1", F, deposit(cost(10), 30))
        .leave("refuse", "v0", "t_refused")
        .edge("join", "v1", "v2", F, cost(10))
        .leave("leave", "v1", "v1x")
        .edge(
            "withdraw",
            "v1x",
            "t_withdrawn_early",
            F,
            deposit(cost(5), -30),
        )
        .leave("leave_x1", "v1x", "t_abandoned_early")
        .edge("deliver", "v2", "v3", F, releases(cost(5), 0, 1))
        .leave("abort", "v2", "v2x")
        .edge(
            "claim",
            "v2x",
            "t_compensated",
            F,
            cost(5).with_comps(Money::zero(), Money::from_integer(30)),
        )
        .leave("leave_x2", "v2x", "t_unclaimed")
        .edge("pay", "v3", "v4", F, releases(cost(5), 1, 0))
        .leave("leave_pay", "v3", "v3x")
        .edge(
            "withdraw_unpaid",
            "v3x",
            "t_unpaid",
            F,
            deposit(cost(5), -30),
        )
        .leave("leave_x3", "v3x", "t_unpaid_abandoned")
        .edge("withdraw_final", "v4", "t_done", F, deposit(cost(5), -30))
        .leave("leave_final", "v4", "t_done_abandoned")
        .root("v0")
}

/// `free-deposit` with a configurable cost on the first deposit move.
pub fn free_deposit_draft(first_deposit_cost: Money) -> ProtocolDraft {
    use Player::*;
    let d = 100;
    ProtocolDraft::new("free-deposit", "Gas")
        .roles("seller", "buyer")
        .item("goods", A)
        .item("money", B)
        .linear(A, A, 40)
        .linear(A, B, 60)
        .linear(B, A, 80)
        .linear(B, B, 60)
        .vertex("v0", Some(A))
        .vertex("t_refused", None)
        .vertex("v1", Some(B))
        .vertex("v1x", Some(A))
        .vertex("t_withdrawn_early", None)
        .vertex("t_abandoned_early", None)
        .vertex("v2", Some(A))
        .vertex("v2x", Some(B))
        .vertex("t_claimed_b", None)
        .vertex("t_unclaimed_b", None)
        .vertex("v3", Some(B))
        .vertex("v3x", Some(A))
        .vertex("t_claimed_a", None)
        .vertex("t_unclaimed_a", None)
        .vertex("v4", Some(A))
        .vertex("v5", Some(B))
        .vertex("t_done", None)
        .vertex("t_done_b_left", None)
        .vertex("v4x", Some(B))
        .vertex("t_done_a_left", None)
        .vertex("t_both_left", None)
        .edge(
            "deposit_a",
            "v0",
            "v1",
            F,
            MoveAttributes::default()
                .with_cost(first_deposit_cost)
                .with_deposit(Money::from_integer(d)),
        )
        .leave("refuse", "v0", "t_refused")
        .edge("deposit_b", "v1", "v2", F, deposit(cost(0), d))
        .leave("leave", "v1", "v1x")
        .edge(
            "withdraw_a_early",
            "v1x",
            "t_withdrawn_early",
            F,
            deposit(cost(0), -d),
        )
        .leave("leave_x1", "v1x", "t_abandoned_early")
        .edge("deliver", "v2", "v3", F, releases(cost(5), 0, 1))
        .leave("abort", "v2", "v2x")
        .edge(
            "claim_b",
            "v2x",
            "t_claimed_b",
            F,
            deposit(cost(5), -d).with_comps(Money::zero(), Money::from_integer(10)),
        )
        .leave("leave_x2", "v2x", "t_unclaimed_b")
        .edge("pay", "v3", "v4", F, releases(cost(5), 1, 0))
        .leave("leave_pay", "v3", "v3x")
        .edge(
            "claim_a",
            "v3x",
            "t_claimed_a",
            F,
            deposit(cost(5), -d).with_comps(Money::from_integer(60), Money::zero()),
        )
        .leave("leave_x3", "v3x", "t_unclaimed_a")
        .edge("withdraw_a", "v4", "v5", F, deposit(cost(0), -d))
        .leave("leave_final", "v4", "v4x")
        .edge("withdraw_b", "v5", "t_done", F, deposit(cost(0), -d))
        .leave("leave_x5", "v5", "t_done_b_left")
        .edge(
            "withdraw_b_alone",
            "v4x",
            "t_done_a_left",
            F,
            deposit(cost(0), -d),
        )
        .leave("leave_x4", "v4x", "t_both_left")
        .root("v0")
}

fn empty_draft() -> ProtocolDraft {
    use Player::*;
    ProtocolDraft::new("empty", "unit")
        .item("nothing_a", A)
        .item("nothing_b", B)
        .linear(A, A, 0)
        .linear(A, B, 0)
        .linear(B, A, 0)
        .linear(B, B, 0)
        .vertex("v0", None)
        .root("v0")
}

pub fn builtin_draft(name: &str) -> Result<ProtocolDraft, UnknownBuiltin> {
    Ok(match name {
        "fairswap-eth" => fairswap_draft(&FairSwapParams::default()),
        "figure2-naive" => figure2_draft(),
        "shoplifter" => shoplifter_draft(),
        "deposit-compensated" => deposit_compensated_draft(),
        "free-deposit" => free_deposit_draft(Money::zero()),
        "empty" => empty_draft(),
        other => return Err(UnknownBuiltin(other.to_string())),
    })
}

/// A validated built-in protocol.
pub fn builtin(name: &str) -> Result<ExchangeProtocol, UnknownBuiltin> {
    let draft = builtin_draft(name)?;
    Ok(validate_protocol(&draft).expect("built-in protocols are valid"))
}
