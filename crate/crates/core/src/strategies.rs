//! Strategy enumeration, faithfulness classification and the environment
//! predicates used as theorem premises.

use thiserror::Error;

use crate::model::{EdgeId, ExchangeProtocol, Player, Strategy, VertexId};

/// Enumeration size limit used when none is configured.
pub const DEFAULT_ENUMERATION_CAP: u128 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StrategyKind {
    All,
    Faithful,
    Unfaithful,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{player} has {count} {kind:?} strategies, above the enumeration cap of {cap}")]
pub struct EnumerationOverflow {
    pub player: Player,
    pub kind: StrategyKind,
    /// Saturates at `u128::MAX`.
    pub count: u128,
    pub cap: u128,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StrategySet {
    pub player: Player,
    pub kind: StrategyKind,
    pub reduced: bool,
    pub strategies: Vec<Strategy>,
}

impl StrategySet {
    pub fn len(&self) -> usize {
        self.strategies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.strategies.is_empty()
    }
}

/// Number of strategies without materializing them.
pub fn count_strategies(
    protocol: &ExchangeProtocol,
    player: Player,
    kind: StrategyKind,
    reduced: bool,
) -> u128 {
    let count = |faithful_only| {
        if reduced {
            count_reduced(protocol, player, faithful_only, protocol.root())
        } else {
            count_complete(protocol, player, faithful_only)
        }
    };
    match kind {
        StrategyKind::All => count(false),
        StrategyKind::Faithful => count(true),
        // Saturation only happens far above any usable cap.
        StrategyKind::Unfaithful => count(false).saturating_sub(count(true)),
    }
}

fn allowed<'p>(
    protocol: &'p ExchangeProtocol,
    v: VertexId,
    faithful_only: bool,
) -> impl Iterator<Item = EdgeId> + 'p {
    protocol
        .children(v)
        .iter()
        .copied()
        .filter(move |&e| !faithful_only || protocol.edge(e).is_faithful())
}

fn count_complete(protocol: &ExchangeProtocol, player: Player, faithful_only: bool) -> u128 {
    protocol
        .owned_by(player)
        .map(|v| allowed(protocol, v, faithful_only).count() as u128)
        .fold(1u128, u128::saturating_mul)
}

fn count_reduced(
    protocol: &ExchangeProtocol,
    player: Player,
    faithful_only: bool,
    v: VertexId,
) -> u128 {
    let child = |e: EdgeId| count_reduced(protocol, player, faithful_only, protocol.edge(e).to);
    match protocol.owner(v) {
        None => 1,
        Some(owner) if owner == player => allowed(protocol, v, faithful_only)
            .map(child)
            .fold(0u128, u128::saturating_add),
        Some(_) => protocol
            .children(v)
            .iter()
            .map(|&e| child(e))
            .fold(1u128, u128::saturating_mul),
    }
}

/// All strategies of `player` of the requested kind, in a deterministic order.
///
/// Complete strategies assign an edge at every owned vertex (odometer over
/// owned vertices in declaration order, last vertex fastest). Reduced
/// strategies only assign the owned vertices their own choices keep
/// reachable; at own vertices edges are tried in declaration order, and
/// branches at opponent vertices are combined with the first child outermost.
pub fn enumerate_strategies(
    protocol: &ExchangeProtocol,
    player: Player,
    kind: StrategyKind,
    reduced: bool,
    cap: u128,
) -> Result<StrategySet, EnumerationOverflow> {
    let count = count_strategies(protocol, player, kind, reduced);
    if count > cap {
        return Err(EnumerationOverflow {
            player,
            kind,
            count,
            cap,
        });
    }
    let faithful_only = kind == StrategyKind::Faithful;
    // Unfaithful = all minus faithful; the full set must fit as well.
    if kind == StrategyKind::Unfaithful {
        let all = count_strategies(protocol, player, StrategyKind::All, reduced);
        if all > cap {
            return Err(EnumerationOverflow {
                player,
                kind: StrategyKind::All,
                count: all,
                cap,
            });
        }
    }
    let raw = if reduced {
        reduced_choices(protocol, player, faithful_only, protocol.root())
    } else {
        complete_choices(protocol, player, faithful_only)
    };
    let mut strategies: Vec<Strategy> = raw
        .into_iter()
        .map(|choices| Strategy::new(player, choices, reduced))
        .collect();
    if kind == StrategyKind::Unfaithful {
        strategies.retain(|s| !is_faithful_strategy(protocol, s));
    }
    Ok(StrategySet {
        player,
        kind,
        reduced,
        strategies,
    })
}

fn complete_choices(
    protocol: &ExchangeProtocol,
    player: Player,
    faithful_only: bool,
) -> Vec<Vec<(VertexId, EdgeId)>> {
    let options: Vec<(VertexId, Vec<EdgeId>)> = protocol
        .owned_by(player)
        .map(|v| (v, allowed(protocol, v, faithful_only).collect()))
        .collect();
    if options.iter().any(|(_, edges)| edges.is_empty()) {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut digits = vec![0usize; options.len()];
    loop {
        out.push(
            options
                .iter()
                .zip(&digits)
                .map(|((v, edges), &d)| (*v, edges[d]))
                .collect(),
        );
        let mut pos = options.len();
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            digits[pos] += 1;
            if digits[pos] < options[pos].1.len() {
                break;
            }
            digits[pos] = 0;
        }
    }
}

fn reduced_choices(
    protocol: &ExchangeProtocol,
    player: Player,
    faithful_only: bool,
    v: VertexId,
) -> Vec<Vec<(VertexId, EdgeId)>> {
    match protocol.owner(v) {
        None => vec![Vec::new()],
        Some(owner) if owner == player => {
            let mut out = Vec::new();
            for e in allowed(protocol, v, faithful_only) {
                for mut rest in
                    reduced_choices(protocol, player, faithful_only, protocol.edge(e).to)
                {
                    rest.push((v, e));
                    out.push(rest);
                }
            }
            out
        }
        Some(_) => {
            let mut acc: Vec<Vec<(VertexId, EdgeId)>> = vec![Vec::new()];
            for &e in protocol.children(v) {
                let branch = reduced_choices(protocol, player, faithful_only, protocol.edge(e).to);
                if branch.is_empty() {
                    return Vec::new();
                }
                let mut next = Vec::with_capacity(acc.len() * branch.len());
                for prefix in &acc {
                    for tail in &branch {
                        let mut combined = prefix.clone();
                        combined.extend_from_slice(tail);
                        next.push(combined);
                    }
                }
                acc = next;
            }
            acc
        }
    }
}

/// Every edge the strategy may pick is faithful.
pub fn is_faithful_strategy(protocol: &ExchangeProtocol, strategy: &Strategy) -> bool {
    strategy
        .choices()
        .iter()
        .all(|&(_, e)| protocol.edge(e).is_faithful())
}

/// Structural form of "can unfaithfully leave at any time": every vertex the
/// player owns offers a leave edge, and below each of the player's leave
/// edges the player owns nothing (the other side may still act there).
pub fn can_leave_at_any_time(protocol: &ExchangeProtocol, player: Player) -> bool {
    protocol.owned_by(player).all(|v| {
        let leaves: Vec<EdgeId> = protocol
            .children(v)
            .iter()
            .copied()
            .filter(|&e| protocol.edge(e).is_leave())
            .collect();
        !leaves.is_empty()
            && leaves
                .iter()
                .all(|&e| !owns_in_subtree(protocol, player, protocol.edge(e).to))
    })
}

fn owns_in_subtree(protocol: &ExchangeProtocol, player: Player, v: VertexId) -> bool {
    let mut stack = vec![v];
    while let Some(v) = stack.pop() {
        if protocol.owner(v) == Some(player) {
            return true;
        }
        stack.extend(protocol.children(v).iter().map(|&e| protocol.edge(e).to));
    }
    false
}

/// Every move other than a leave carries a strictly positive cost.
pub fn has_nonnegligible_cost(protocol: &ExchangeProtocol) -> bool {
    protocol
        .edges()
        .iter()
        .filter(|e| !e.is_leave())
        .all(|e| e.attributes.cost.is_positive())
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EnvironmentReport {
    pub nonnegligible_cost: bool,
    pub can_leave_any_time_a: bool,
    pub can_leave_any_time_b: bool,
    /// Owner of the root; `None` when the root is terminal.
    pub initializer: Option<Player>,
}

impl EnvironmentReport {
    pub fn can_leave_any_time(&self, player: Player) -> bool {
        match player {
            Player::A => self.can_leave_any_time_a,
            Player::B => self.can_leave_any_time_b,
        }
    }
}

pub fn environment_report(protocol: &ExchangeProtocol) -> EnvironmentReport {
    EnvironmentReport {
        nonnegligible_cost: has_nonnegligible_cost(protocol),
        can_leave_any_time_a: can_leave_at_any_time(protocol, Player::A),
        can_leave_any_time_b: can_leave_at_any_time(protocol, Player::B),
        initializer: protocol.owner(protocol.root()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{validate_protocol, EdgeKind, MoveAttributes, ProtocolDraft};
    use crate::rational::Money;
    use Player::*;

    fn skeleton() -> ProtocolDraft {
        ProtocolDraft::new("t", "unit")
            .item("x", A)
            .item("y", B)
            .linear(A, A, 1)
            .linear(A, B, 1)
            .linear(B, A, 1)
            .linear(B, B, 1)
    }

    fn cost(c: i64) -> MoveAttributes {
        MoveAttributes::default().with_cost(Money::from_integer(c))
    }

    /// A at root (2 edges), B at both children (2 edges each), then terminals.
    fn depth_two() -> ExchangeProtocol {
        let f = EdgeKind::Faithful;
        validate_protocol(
            &skeleton()
                .vertex("r", Some(A))
                .vertex("b1", Some(B))
                .vertex("b2", Some(B))
                .vertex("t1", None)
                .vertex("t2", None)
                .vertex("t3", None)
                .vertex("t4", None)
                .edge("l", "r", "b1", f, cost(1))
                .edge("r_", "r", "b2", EdgeKind::Unfaithful, cost(1))
                .edge("x1", "b1", "t1", f, cost(1))
                .edge("y1", "b1", "t2", f, cost(1))
                .edge("x2", "b2", "t3", f, cost(1))
                .edge("y2", "b2", "t4", EdgeKind::Unfaithful, cost(1))
                .root("r"),
        )
        .unwrap()
    }

    #[test]
    fn counts_match_enumeration_and_partition() {
        let p = depth_two();
        for reduced in [false, true] {
            for player in Player::BOTH {
                let all =
                    enumerate_strategies(&p, player, StrategyKind::All, reduced, 100).unwrap();
                let f =
                    enumerate_strategies(&p, player, StrategyKind::Faithful, reduced, 100).unwrap();
                let u = enumerate_strategies(&p, player, StrategyKind::Unfaithful, reduced, 100)
                    .unwrap();
                assert_eq!(all.len(), f.len() + u.len());
                assert_eq!(
                    all.len() as u128,
                    count_strategies(&p, player, StrategyKind::All, reduced)
                );
                assert!(f.strategies.iter().all(|s| is_faithful_strategy(&p, s)));
                assert!(u.strategies.iter().all(|s| !is_faithful_strategy(&p, s)));
            }
        }
        // A: 2 either way. B: complete 2×2 = 4, reduced also 4 (B never chooses between branches).
        assert_eq!(count_strategies(&p, A, StrategyKind::All, true), 2);
        assert_eq!(count_strategies(&p, B, StrategyKind::All, false), 4);
        assert_eq!(count_strategies(&p, B, StrategyKind::Faithful, false), 2);
    }

    #[test]
    fn reduced_strategies_drop_unreachable_own_vertices() {
        // A at r: go to a2 (A again) or stop. Complete: 2 × 2 = 4, reduced: 1 + 2 = 3.
        let f = EdgeKind::Faithful;
        let p = validate_protocol(
            &skeleton()
                .vertex("r", Some(A))
                .vertex("a2", Some(A))
                .vertex("t0", None)
                .vertex("t1", None)
                .vertex("t2", None)
                .edge("stop", "r", "t0", f, cost(1))
                .edge("go", "r", "a2", f, cost(1))
                .edge("x", "a2", "t1", f, cost(1))
                .edge("y", "a2", "t2", f, cost(1))
                .root("r"),
        )
        .unwrap();
        let red = enumerate_strategies(&p, A, StrategyKind::All, true, 10).unwrap();
        let rendered: Vec<_> = red
            .strategies
            .iter()
            .map(|s| s.render(&p).join(","))
            .collect();
        assert_eq!(rendered, ["r=stop", "r=go,a2=x", "r=go,a2=y"]);
        assert_eq!(
            enumerate_strategies(&p, A, StrategyKind::All, false, 10)
                .unwrap()
                .len(),
            4
        );
    }

    #[test]
    fn player_without_vertices_has_exactly_the_empty_strategy() {
        let p = validate_protocol(
            &skeleton()
                .vertex("r", Some(A))
                .vertex("t", None)
                .edge("go", "r", "t", EdgeKind::Faithful, cost(1))
                .root("r"),
        )
        .unwrap();
        for reduced in [false, true] {
            let set = enumerate_strategies(&p, B, StrategyKind::All, reduced, 10).unwrap();
            assert_eq!(set.len(), 1);
            assert!(set.strategies[0].choices().is_empty());
        }
        assert!(can_leave_at_any_time(&p, B));
    }

    #[test]
    fn overflow_is_an_error() {
        let p = depth_two();
        let err = enumerate_strategies(&p, B, StrategyKind::All, false, 3).unwrap_err();
        assert_eq!(err.count, 4);
        assert_eq!(err.cap, 3);
    }

    #[test]
    fn leave_and_cost_predicates() {
        let p = validate_protocol(
            &skeleton()
                .vertex("r", Some(A))
                .vertex("b", Some(B))
                .vertex("t0", None)
                .vertex("t1", None)
                .vertex("a", Some(A))
                .vertex("t2", None)
                .edge("init", "r", "b", EdgeKind::Faithful, cost(5))
                .edge("go", "b", "t0", EdgeKind::Faithful, cost(1))
                .leave("quit", "b", "a")
                .edge("refund", "a", "t1", EdgeKind::Faithful, cost(0))
                .leave("quit_a", "a", "t2")
                .root("r"),
        )
        .unwrap();
        assert!(can_leave_at_any_time(&p, B));
        assert!(!can_leave_at_any_time(&p, A)); // no leave at the root
        assert!(!has_nonnegligible_cost(&p)); // refund is free
        let env = environment_report(&p);
        assert_eq!(env.initializer, Some(A));
        assert!(env.can_leave_any_time(B));
    }

    #[test]
    fn leaver_must_not_act_below_its_leave() {
        let p = validate_protocol(
            &skeleton()
                .vertex("b", Some(B))
                .vertex("b2", Some(B))
                .vertex("t0", None)
                .vertex("t1", None)
                .leave("quit", "b", "b2")
                .leave("quit2", "b2", "t0")
                .edge("go", "b", "t1", EdgeKind::Faithful, cost(1))
                .root("b"),
        )
        .unwrap();
        assert!(!can_leave_at_any_time(&p, B));
    }

    #[test]
    fn only_leave_edges_is_vacuously_costly_and_empty_game_has_no_initializer() {
        let p = validate_protocol(
            &skeleton()
                .vertex("r", Some(A))
                .vertex("t", None)
                .leave("quit", "r", "t")
                .root("r"),
        )
        .unwrap();
        assert!(has_nonnegligible_cost(&p));
        let empty = validate_protocol(&skeleton().vertex("r", None).root("r")).unwrap();
        assert_eq!(environment_report(&empty).initializer, None);
    }
}
