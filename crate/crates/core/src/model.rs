//! Attribute-annotated extensive games describing two-party exchange protocols.
//!
//! A protocol is first assembled as a [`ProtocolDraft`] (from a file, a
//! built-in definition or the random generator) and then checked by
//! [`validate_protocol`], which produces an immutable [`ExchangeProtocol`].
//! Everything downstream (play-outs, strategy enumeration, fairness solvers)
//! works on validated protocols only.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::rational::{Money, Share};

/// One of the two parties of an exchange.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Player {
    A,
    B,
}

impl Player {
    pub const BOTH: [Player; 2] = [Player::A, Player::B];

    pub fn opponent(self) -> Player {
        match self {
            Player::A => Player::B,
            Player::B => Player::A,
        }
    }

    pub fn index(self) -> usize {
        match self {
            Player::A => 0,
            Player::B => 1,
        }
    }
}

impl fmt::Display for Player {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Player::A => "A",
            Player::B => "B",
        })
    }
}

impl FromStr for Player {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "A" | "a" => Ok(Player::A),
            "B" | "b" => Ok(Player::B),
            other => Err(ModelError::UnknownPlayer(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("unknown player `{0}` (expected A or B)")]
    UnknownPlayer(String),
    #[error("unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("share {0} outside [0, 1]")]
    ShareOutOfRange(Share),
}

/// The good a player brings into the exchange.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Item {
    pub id: String,
    pub owner: Player,
}

/// Shape of a player's value function for one item.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ValueCurve {
    /// `share × full_value`.
    Linear { full_value: Money },
    /// Piecewise-linear through `(0, 0)` and the listed breakpoints.
    /// Breakpoints are strictly increasing in share and end at share 1.
    Table { points: Vec<(Share, Money)> },
}

impl ValueCurve {
    pub fn linear(full_value: Money) -> Self {
        ValueCurve::Linear { full_value }
    }

    /// Value of holding `share` of the item. `None` if `share` is outside `[0, 1]`.
    pub fn value_at(&self, share: &Share) -> Option<Money> {
        if !share.in_unit_interval() {
            return None;
        }
        match self {
            ValueCurve::Linear { full_value } => Some(full_value.scale(share)),
            ValueCurve::Table { points } => {
                let mut prev = (Share::zero(), Money::zero());
                for (s, v) in points {
                    if share <= s {
                        if s == &prev.0 {
                            return Some(v.clone());
                        }
                        let span = Share(&s.0 - &prev.0 .0);
                        let offset = Share(&share.0 - &prev.0 .0);
                        let slope = Money((&v.0 - &prev.1 .0) / &span.0);
                        return Some(prev.1.clone() + slope.scale(&offset));
                    }
                    prev = (s.clone(), v.clone());
                }
                // Validated tables end at share 1, so this is unreachable for them.
                Some(prev.1)
            }
        }
    }

    fn check(&self) -> Result<(), String> {
        match self {
            ValueCurve::Linear { full_value } => {
                if full_value.is_negative() {
                    return Err(format!("linear full value {full_value} is negative"));
                }
            }
            ValueCurve::Table { points } => {
                let mut prev = (Share::zero(), Money::zero());
                for (i, (s, v)) in points.iter().enumerate() {
                    if !s.in_unit_interval() {
                        return Err(format!("breakpoint share {s} outside [0, 1]"));
                    }
                    if s.is_zero() {
                        if !v.is_zero() {
                            return Err(format!("value at share 0 must be 0, got {v}"));
                        }
                        if i > 0 {
                            return Err("breakpoint shares must be strictly increasing".into());
                        }
                        continue;
                    }
                    if i > 0 && s <= &prev.0 {
                        return Err("breakpoint shares must be strictly increasing".into());
                    }
                    if v < &prev.1 {
                        return Err(format!("value decreases at share {s}"));
                    }
                    prev = (s.clone(), v.clone());
                }
                if !prev.0.is_one() {
                    return Err("table must include share 1".into());
                }
            }
        }
        Ok(())
    }
}

/// How `player` values the item initially held by `item_of`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Valuation {
    pub player: Player,
    pub item_of: Player,
    pub curve: ValueCurve,
}

/// `v_P(ι, share)`, rejecting shares outside `[0, 1]`.
pub fn value_of(valuation: &Valuation, share: &Share) -> Result<Money, ModelError> {
    valuation
        .curve
        .value_at(share)
        .ok_or_else(|| ModelError::ShareOutOfRange(share.clone()))
}

/// Financial and item effects of one move.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct MoveAttributes {
    /// Portion of B's item released to A.
    pub share_to_a: Share,
    /// Portion of A's item released to B.
    pub share_to_b: Share,
    /// Fee paid by the acting party to the trusted third party.
    pub cost: Money,
    /// Funds the acting party deposits (positive) or retracts (negative).
    pub deposit: Money,
    pub comp_to_a: Money,
    pub comp_to_b: Money,
}

impl MoveAttributes {
    pub fn is_zero(&self) -> bool {
        self.share_to_a.is_zero()
            && self.share_to_b.is_zero()
            && self.cost.is_zero()
            && self.deposit.is_zero()
            && self.comp_to_a.is_zero()
            && self.comp_to_b.is_zero()
    }

    /// Share released to `player` by this move.
    pub fn share_to(&self, player: Player) -> &Share {
        match player {
            Player::A => &self.share_to_a,
            Player::B => &self.share_to_b,
        }
    }

    pub fn comp_to(&self, player: Player) -> &Money {
        match player {
            Player::A => &self.comp_to_a,
            Player::B => &self.comp_to_b,
        }
    }

    /// Net effect on the escrow pool: `deposit − comp_to_a − comp_to_b`.
    pub fn escrow_delta(&self) -> Money {
        &(&self.deposit - &self.comp_to_a) - &self.comp_to_b
    }

    pub fn with_cost(mut self, cost: Money) -> Self {
        self.cost = cost;
        self
    }

    pub fn with_deposit(mut self, deposit: Money) -> Self {
        self.deposit = deposit;
        self
    }

    pub fn with_shares(mut self, to_a: Share, to_b: Share) -> Self {
        self.share_to_a = to_a;
        self.share_to_b = to_b;
        self
    }

    pub fn with_comps(mut self, to_a: Money, to_b: Money) -> Self {
        self.comp_to_a = to_a;
        self.comp_to_b = to_b;
        self
    }
}

/// Protocol label of a move.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum EdgeKind {
    Faithful,
    Unfaithful,
    /// Unfaithful abandonment: zero attributes, nothing else happens for the leaver.
    Leave,
}

impl EdgeKind {
    pub fn is_faithful(self) -> bool {
        self == EdgeKind::Faithful
    }

    pub fn is_leave(self) -> bool {
        self == EdgeKind::Leave
    }

    pub fn keyword(self) -> &'static str {
        match self {
            EdgeKind::Faithful => "faithful",
            EdgeKind::Unfaithful => "unfaithful",
            EdgeKind::Leave => "leave",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub usize);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub usize);

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vertex {
    pub id: String,
    /// `None` exactly for terminal vertices.
    pub owner: Option<Player>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Edge {
    pub id: String,
    pub from: VertexId,
    pub to: VertexId,
    pub attributes: MoveAttributes,
    pub kind: EdgeKind,
}

impl Edge {
    pub fn is_faithful(&self) -> bool {
        self.kind.is_faithful()
    }

    pub fn is_leave(&self) -> bool {
        self.kind.is_leave()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DraftVertex {
    pub id: String,
    pub owner: Option<Player>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DraftEdge {
    pub id: String,
    pub from: String,
    pub to: String,
    pub kind: EdgeKind,
    pub attributes: MoveAttributes,
}

/// Unvalidated protocol description, in declaration order.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ProtocolDraft {
    pub name: String,
    pub currency: String,
    /// Display roles for A and B, e.g. `seller`/`buyer`. May be empty.
    pub roles: [String; 2],
    pub items: Vec<Item>,
    pub valuations: Vec<Valuation>,
    pub vertices: Vec<DraftVertex>,
    pub edges: Vec<DraftEdge>,
    pub root: Option<String>,
}

impl ProtocolDraft {
    pub fn new(name: impl Into<String>, currency: impl Into<String>) -> Self {
        ProtocolDraft {
            name: name.into(),
            currency: currency.into(),
            ..Default::default()
        }
    }

    pub fn roles(mut self, a: &str, b: &str) -> Self {
        self.roles = [a.to_string(), b.to_string()];
        self
    }

    pub fn item(mut self, id: &str, owner: Player) -> Self {
        self.items.push(Item {
            id: id.to_string(),
            owner,
        });
        self
    }

    pub fn linear(mut self, player: Player, item_of: Player, full_value: i64) -> Self {
        self.valuations.push(Valuation {
            player,
            item_of,
            curve: ValueCurve::linear(Money::from_integer(full_value)),
        });
        self
    }

    pub fn valuation(mut self, valuation: Valuation) -> Self {
        self.valuations.push(valuation);
        self
    }

    pub fn vertex(mut self, id: &str, owner: Option<Player>) -> Self {
        self.vertices.push(DraftVertex {
            id: id.to_string(),
            owner,
        });
        self
    }

    pub fn edge(
        mut self,
        id: &str,
        from: &str,
        to: &str,
        kind: EdgeKind,
        attributes: MoveAttributes,
    ) -> Self {
        self.edges.push(DraftEdge {
            id: id.to_string(),
            from: from.to_string(),
            to: to.to_string(),
            kind,
            attributes,
        });
        self
    }

    pub fn leave(self, id: &str, from: &str, to: &str) -> Self {
        self.edge(id, from, to, EdgeKind::Leave, MoveAttributes::default())
    }

    pub fn root(mut self, id: &str) -> Self {
        self.root = Some(id.to_string());
        self
    }

    pub fn find_edge_mut(&mut self, id: &str) -> Option<&mut DraftEdge> {
        self.edges.iter_mut().find(|e| e.id == id)
    }
}

/// Category of a validation failure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IssueKind {
    MissingRoot,
    InvalidId,
    DuplicateId,
    UnknownVertex,
    TreeShape,
    Ownership,
    ItemSetup,
    MissingValuation,
    InvalidValuation,
    InvalidAttribute,
    LeaveAttributes,
    ShareOverflow,
    NegativeEscrow,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Issue {
    pub kind: IssueKind,
    /// Offending vertex, edge, item or valuation id.
    pub subject: String,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

/// Every invariant violation found in a draft.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ValidationReport {
    pub issues: Vec<Issue>,
}

impl ValidationReport {
    pub fn has(&self, kind: IssueKind) -> bool {
        self.issues.iter().any(|i| i.kind == kind)
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "protocol is invalid ({} issue(s))", self.issues.len())?;
        for issue in &self.issues {
            write!(f, "\n  - {issue}")?;
        }
        Ok(())
    }
}

/// A validated, immutable exchange protocol.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExchangeProtocol {
    name: String,
    currency: String,
    roles: [String; 2],
    /// Indexed by owner.
    items: [Item; 2],
    /// `valuations[player][item_of]`.
    valuations: [[ValueCurve; 2]; 2],
    vertices: Vec<Vertex>,
    edges: Vec<Edge>,
    root: VertexId,
    children: Vec<Vec<EdgeId>>,
    parent: Vec<Option<EdgeId>>,
    vertex_index: HashMap<String, VertexId>,
    edge_index: HashMap<String, EdgeId>,
    warnings: Vec<String>,
}

impl ExchangeProtocol {
    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn currency(&self) -> &str {
        &self.currency
    }

    pub fn role(&self, player: Player) -> &str {
        &self.roles[player.index()]
    }

    /// `A (seller)` or just `A` when no role is set.
    pub fn player_label(&self, player: Player) -> String {
        match self.role(player) {
            "" => player.to_string(),
            role => format!("{player} ({role})"),
        }
    }

    /// The item initially held by `owner`.
    pub fn item(&self, owner: Player) -> &Item {
        &self.items[owner.index()]
    }

    pub fn curve(&self, player: Player, item_of: Player) -> &ValueCurve {
        &self.valuations[player.index()][item_of.index()]
    }

    pub fn valuation(&self, player: Player, item_of: Player) -> Valuation {
        Valuation {
            player,
            item_of,
            curve: self.curve(player, item_of).clone(),
        }
    }

    pub fn root(&self) -> VertexId {
        self.root
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex(&self, id: VertexId) -> &Vertex {
        &self.vertices[id.0]
    }

    pub fn edge(&self, id: EdgeId) -> &Edge {
        &self.edges[id.0]
    }

    pub fn owner(&self, id: VertexId) -> Option<Player> {
        self.vertices[id.0].owner
    }

    pub fn is_terminal(&self, id: VertexId) -> bool {
        self.children[id.0].is_empty()
    }

    /// Outgoing edges in declaration order.
    pub fn children(&self, id: VertexId) -> &[EdgeId] {
        &self.children[id.0]
    }

    /// Incoming edge; `None` for the root.
    pub fn parent(&self, id: VertexId) -> Option<EdgeId> {
        self.parent[id.0]
    }

    pub fn vertex_id(&self, name: &str) -> Option<VertexId> {
        self.vertex_index.get(name).copied()
    }

    pub fn edge_id(&self, name: &str) -> Option<EdgeId> {
        self.edge_index.get(name).copied()
    }

    pub fn warnings(&self) -> &[String] {
        &self.warnings
    }

    pub fn vertex_ids(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertices.len()).map(VertexId)
    }

    pub fn terminals(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertex_ids().filter(|&v| self.is_terminal(v))
    }

    /// Vertices owned by `player`, in declaration order.
    pub fn owned_by(&self, player: Player) -> impl Iterator<Item = VertexId> + '_ {
        self.vertex_ids()
            .filter(move |&v| self.vertices[v.0].owner == Some(player))
    }

    /// Edges from the root down to `vertex`.
    pub fn path_to(&self, vertex: VertexId) -> Vec<EdgeId> {
        let mut path = Vec::new();
        let mut cur = vertex;
        while let Some(e) = self.parent[cur.0] {
            path.push(e);
            cur = self.edges[e.0].from;
        }
        path.reverse();
        path
    }

    /// Vertices in depth-first pre-order from the root, children in declaration order.
    pub fn preorder(&self) -> Vec<VertexId> {
        let mut order = Vec::with_capacity(self.vertices.len());
        let mut stack = vec![self.root];
        while let Some(v) = stack.pop() {
            order.push(v);
            stack.extend(self.children[v.0].iter().rev().map(|e| self.edges[e.0].to));
        }
        order
    }

    /// Converts back to an editable description that validates to an equal protocol.
    pub fn to_draft(&self) -> ProtocolDraft {
        let mut valuations = Vec::with_capacity(4);
        for player in Player::BOTH {
            for item_of in Player::BOTH {
                valuations.push(self.valuation(player, item_of));
            }
        }
        ProtocolDraft {
            name: self.name.clone(),
            currency: self.currency.clone(),
            roles: self.roles.clone(),
            items: self.items.to_vec(),
            valuations,
            vertices: self
                .vertices
                .iter()
                .map(|v| DraftVertex {
                    id: v.id.clone(),
                    owner: v.owner,
                })
                .collect(),
            edges: self
                .edges
                .iter()
                .map(|e| DraftEdge {
                    id: e.id.clone(),
                    from: self.vertices[e.from.0].id.clone(),
                    to: self.vertices[e.to.0].id.clone(),
                    kind: e.kind,
                    attributes: e.attributes.clone(),
                })
                .collect(),
            root: Some(self.vertices[self.root.0].id.clone()),
        }
    }
}

/// Outgoing edges of the vertex named `vertex`, in declaration order.
pub fn outgoing_edges<'p>(
    protocol: &'p ExchangeProtocol,
    vertex: &str,
) -> Result<Vec<&'p Edge>, ModelError> {
    let v = protocol
        .vertex_id(vertex)
        .ok_or_else(|| ModelError::UnknownVertex(vertex.to_string()))?;
    Ok(protocol
        .children(v)
        .iter()
        .map(|&e| protocol.edge(e))
        .collect())
}

/// Identifiers are non-empty runs of ASCII letters, digits, `_`, `-` and `.`.
pub fn is_valid_id(id: &str) -> bool {
    !id.is_empty()
        && id
            .bytes()
            .all(|b| b.is_ascii_alphanumeric() || matches!(b, b'_' | b'-' | b'.'))
}

struct Issues(Vec<Issue>);

impl Issues {
    fn push(&mut self, kind: IssueKind, subject: &str, message: String) {
        self.0.push(Issue {
            kind,
            subject: subject.to_string(),
            message,
        });
    }
}

/// Checks every protocol invariant and builds the validated protocol.
///
/// All violations are collected into one report. Path-level checks (share
/// totals, escrow prefixes) only run once the tree shape itself is sound.
pub fn validate_protocol(draft: &ProtocolDraft) -> Result<ExchangeProtocol, ValidationReport> {
    let mut issues = Issues(Vec::new());

    for (what, id) in [
        ("protocol name", &draft.name),
        ("currency", &draft.currency),
    ] {
        if !is_valid_id(id) {
            issues.push(IssueKind::InvalidId, id, format!("invalid {what} `{id}`"));
        }
    }
    for (player, role) in Player::BOTH.iter().zip(&draft.roles) {
        if !role.is_empty() && !is_valid_id(role) {
            issues.push(
                IssueKind::InvalidId,
                role,
                format!("invalid role `{role}` for player {player}"),
            );
        }
    }

    // Items: exactly one per player.
    let mut items: [Option<Item>; 2] = [None, None];
    for item in &draft.items {
        if !is_valid_id(&item.id) {
            issues.push(
                IssueKind::InvalidId,
                &item.id,
                format!("invalid item id `{}`", item.id),
            );
        }
        let slot = &mut items[item.owner.index()];
        if slot.is_some() {
            issues.push(
                IssueKind::ItemSetup,
                &item.id,
                format!("player {} owns more than one item", item.owner),
            );
        } else {
            *slot = Some(item.clone());
        }
    }
    if items[0].is_some() && items[0].as_ref().map(|i| &i.id) == items[1].as_ref().map(|i| &i.id) {
        let id = items[0].as_ref().unwrap().id.clone();
        issues.push(
            IssueKind::DuplicateId,
            &id,
            format!("duplicate item id `{id}`"),
        );
    }
    for player in Player::BOTH {
        if items[player.index()].is_none() {
            issues.push(
                IssueKind::ItemSetup,
                &player.to_string(),
                format!("player {player} has no item"),
            );
        }
    }

    // Valuations: all four (player × item) present, each well-formed.
    let mut valuations: [[Option<ValueCurve>; 2]; 2] = Default::default();
    for val in &draft.valuations {
        let subject = format!("{}/{}", val.player, val.item_of);
        if let Err(msg) = val.curve.check() {
            issues.push(
                IssueKind::InvalidValuation,
                &subject,
                format!(
                    "valuation of player {} for item of {}: {msg}",
                    val.player, val.item_of
                ),
            );
        }
        let slot = &mut valuations[val.player.index()][val.item_of.index()];
        if slot.is_some() {
            issues.push(
                IssueKind::InvalidValuation,
                &subject,
                format!(
                    "duplicate valuation of player {} for item of {}",
                    val.player, val.item_of
                ),
            );
        } else {
            *slot = Some(val.curve.clone());
        }
    }
    for player in Player::BOTH {
        for item_of in Player::BOTH {
            if valuations[player.index()][item_of.index()].is_none() {
                issues.push(
                    IssueKind::MissingValuation,
                    &format!("{player}/{item_of}"),
                    format!("missing valuation of player {player} for the item of {item_of}"),
                );
            }
        }
    }

    // Vertices.
    let mut vertex_index: HashMap<String, VertexId> = HashMap::new();
    for (i, v) in draft.vertices.iter().enumerate() {
        if !is_valid_id(&v.id) {
            issues.push(
                IssueKind::InvalidId,
                &v.id,
                format!("invalid vertex id `{}`", v.id),
            );
        }
        if vertex_index.insert(v.id.clone(), VertexId(i)).is_some() {
            issues.push(
                IssueKind::DuplicateId,
                &v.id,
                format!("duplicate vertex id `{}`", v.id),
            );
        }
    }

    // Edges.
    let n = draft.vertices.len();
    let mut children: Vec<Vec<EdgeId>> = vec![Vec::new(); n];
    let mut parent: Vec<Option<EdgeId>> = vec![None; n];
    let mut edges: Vec<Edge> = Vec::with_capacity(draft.edges.len());
    let mut edge_index: HashMap<String, EdgeId> = HashMap::new();
    let mut shape_ok = true;
    for (i, e) in draft.edges.iter().enumerate() {
        if !is_valid_id(&e.id) {
            issues.push(
                IssueKind::InvalidId,
                &e.id,
                format!("invalid edge id `{}`", e.id),
            );
        }
        if edge_index.insert(e.id.clone(), EdgeId(i)).is_some() {
            issues.push(
                IssueKind::DuplicateId,
                &e.id,
                format!("duplicate edge id `{}`", e.id),
            );
        }
        check_attributes(&mut issues, e);
        let from = vertex_index.get(&e.from).copied();
        let to = vertex_index.get(&e.to).copied();
        for (end, found) in [(&e.from, from), (&e.to, to)] {
            if found.is_none() {
                shape_ok = false;
                issues.push(
                    IssueKind::UnknownVertex,
                    &e.id,
                    format!("edge `{}` references unknown vertex `{end}`", e.id),
                );
            }
        }
        let (Some(from), Some(to)) = (from, to) else {
            continue;
        };
        if let Some(prev) = parent[to.0] {
            shape_ok = false;
            issues.push(
                IssueKind::TreeShape,
                &e.id,
                format!(
                    "vertex `{}` has more than one incoming edge (`{}` and `{}`)",
                    e.to, draft.edges[prev.0].id, e.id
                ),
            );
        } else {
            parent[to.0] = Some(EdgeId(i));
        }
        children[from.0].push(EdgeId(i));
        edges.push(Edge {
            id: e.id.clone(),
            from,
            to,
            attributes: e.attributes.clone(),
            kind: e.kind,
        });
    }

    // Root, reachability, ownership.
    let root = match &draft.root {
        None => {
            issues.push(IssueKind::MissingRoot, "", "missing root".to_string());
            None
        }
        Some(r) => match vertex_index.get(r) {
            Some(&v) => Some(v),
            None => {
                issues.push(
                    IssueKind::MissingRoot,
                    r,
                    format!("root `{r}` is not a declared vertex"),
                );
                None
            }
        },
    };
    if let Some(root) = root {
        if let Some(e) = parent[root.0] {
            shape_ok = false;
            issues.push(
                IssueKind::TreeShape,
                &draft.edges[e.0].id,
                format!(
                    "root `{}` has an incoming edge `{}`",
                    draft.vertices[root.0].id, draft.edges[e.0].id
                ),
            );
        }
        if shape_ok {
            let mut seen = vec![false; n];
            let mut stack = vec![root];
            while let Some(v) = stack.pop() {
                if std::mem::replace(&mut seen[v.0], true) {
                    continue;
                }
                stack.extend(children[v.0].iter().map(|e| edges[e.0].to));
            }
            for (i, reached) in seen.iter().enumerate() {
                if !reached {
                    shape_ok = false;
                    issues.push(
                        IssueKind::TreeShape,
                        &draft.vertices[i].id,
                        format!(
                            "vertex `{}` is not reachable from the root",
                            draft.vertices[i].id
                        ),
                    );
                }
            }
        }
    }
    for (i, v) in draft.vertices.iter().enumerate() {
        match (v.owner, children[i].is_empty()) {
            (Some(p), true) => issues.push(
                IssueKind::Ownership,
                &v.id,
                format!("vertex `{}` is owned by {p} but has no outgoing edge", v.id),
            ),
            (None, false) => issues.push(
                IssueKind::Ownership,
                &v.id,
                format!("non-terminal vertex `{}` has no owner", v.id),
            ),
            _ => {}
        }
    }

    if shape_ok {
        if let Some(root) = root {
            check_paths(&mut issues, &edges, &children, root);
        }
    }

    if !issues.0.is_empty() {
        return Err(ValidationReport { issues: issues.0 });
    }

    let root = root.expect("root checked above");
    let [Some(item_a), Some(item_b)] = items else {
        unreachable!("items checked above")
    };
    let [[Some(aa), Some(ab)], [Some(ba), Some(bb)]] = valuations else {
        unreachable!("valuations checked above")
    };
    let vertices: Vec<Vertex> = draft
        .vertices
        .iter()
        .map(|v| Vertex {
            id: v.id.clone(),
            owner: v.owner,
        })
        .collect();
    let mut protocol = ExchangeProtocol {
        name: draft.name.clone(),
        currency: draft.currency.clone(),
        roles: draft.roles.clone(),
        items: [item_a, item_b],
        valuations: [[aa, ab], [ba, bb]],
        vertices,
        edges,
        root,
        children,
        parent,
        vertex_index,
        edge_index,
        warnings: Vec::new(),
    };
    protocol.warnings = faithfulness_warnings(&protocol);
    Ok(protocol)
}

fn check_attributes(issues: &mut Issues, e: &DraftEdge) {
    let a = &e.attributes;
    for (name, share) in [("share_a", &a.share_to_a), ("share_b", &a.share_to_b)] {
        if !share.in_unit_interval() {
            issues.push(
                IssueKind::InvalidAttribute,
                &e.id,
                format!("edge `{}`: {name} {share} outside [0, 1]", e.id),
            );
        }
    }
    for (name, value) in [
        ("cost", &a.cost),
        ("comp_a", &a.comp_to_a),
        ("comp_b", &a.comp_to_b),
    ] {
        if value.is_negative() {
            issues.push(
                IssueKind::InvalidAttribute,
                &e.id,
                format!("edge `{}`: {name} {value} is negative", e.id),
            );
        }
    }
    if e.kind.is_leave() && !a.is_zero() {
        issues.push(
            IssueKind::LeaveAttributes,
            &e.id,
            format!("leave edge `{}` has non-zero attributes", e.id),
        );
    }
}

/// Share totals and escrow prefixes along every root path. Reports the first
/// offending edge per path and does not repeat it for descendants.
fn check_paths(issues: &mut Issues, edges: &[Edge], children: &[Vec<EdgeId>], root: VertexId) {
    struct Frame {
        vertex: VertexId,
        share_a: Share,
        share_b: Share,
        escrow: Money,
        share_reported: bool,
        escrow_reported: bool,
    }
    let mut stack = vec![Frame {
        vertex: root,
        share_a: Share::zero(),
        share_b: Share::zero(),
        escrow: Money::zero(),
        share_reported: false,
        escrow_reported: false,
    }];
    while let Some(f) = stack.pop() {
        for &eid in &children[f.vertex.0] {
            let e = &edges[eid.0];
            let share_a = f.share_a.clone() + &e.attributes.share_to_a;
            let share_b = f.share_b.clone() + &e.attributes.share_to_b;
            let escrow = f.escrow.clone() + e.attributes.escrow_delta();
            let mut share_reported = f.share_reported;
            let mut escrow_reported = f.escrow_reported;
            if !share_reported && (!share_a.in_unit_interval() || !share_b.in_unit_interval()) {
                share_reported = true;
                issues.push(
                    IssueKind::ShareOverflow,
                    &e.id,
                    format!(
                        "share overflow at edge {}: released shares reach ({share_a}, {share_b})",
                        e.id
                    ),
                );
            }
            if !escrow_reported && escrow.is_negative() {
                escrow_reported = true;
                issues.push(
                    IssueKind::NegativeEscrow,
                    &e.id,
                    format!("escrow prefix negative at edge {} (balance {escrow})", e.id),
                );
            }
            stack.push(Frame {
                vertex: e.to,
                share_a,
                share_b,
                escrow,
                share_reported,
                escrow_reported,
            });
        }
    }
}

fn faithfulness_warnings(p: &ExchangeProtocol) -> Vec<String> {
    p.vertex_ids()
        .filter(|&v| !p.is_terminal(v))
        .filter(|&v| !p.children(v).iter().any(|&e| p.edge(e).is_faithful()))
        .map(|v| {
            format!(
                "vertex `{}` owned by {} has no faithful outgoing edge",
                p.vertex(v).id,
                p.owner(v).map(|o| o.to_string()).unwrap_or_default()
            )
        })
        .collect()
}

/// A choice function for one player: the edge taken at each vertex in its domain.
///
/// A *complete* strategy covers every vertex the player owns; a *reduced* one
/// covers exactly the owned vertices that stay reachable under its own choices.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Strategy {
    pub player: Player,
    /// Sorted by vertex.
    choices: Vec<(VertexId, EdgeId)>,
    pub reduced: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrategyError {
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error("malformed choice `{0}` (expected vertex=edge)")]
    Syntax(String),
    #[error("edge `{edge}` does not leave vertex `{vertex}`")]
    NotOutgoing { vertex: String, edge: String },
    #[error("vertex `{vertex}` is not owned by {player}")]
    NotOwned { vertex: String, player: Player },
    #[error("vertex `{0}` is assigned twice")]
    Duplicate(String),
}

impl Strategy {
    pub fn new(player: Player, mut choices: Vec<(VertexId, EdgeId)>, reduced: bool) -> Self {
        choices.sort_unstable();
        Strategy {
            player,
            choices,
            reduced,
        }
    }

    pub fn empty(player: Player) -> Self {
        Strategy::new(player, Vec::new(), true)
    }

    pub fn choice(&self, vertex: VertexId) -> Option<EdgeId> {
        self.choices
            .binary_search_by_key(&vertex, |&(v, _)| v)
            .ok()
            .map(|i| self.choices[i].1)
    }

    pub fn choices(&self) -> &[(VertexId, EdgeId)] {
        &self.choices
    }

    /// Checks that every assignment picks an outgoing edge of a vertex the player owns.
    pub fn check(&self, protocol: &ExchangeProtocol) -> Result<(), StrategyError> {
        let mut seen = HashSet::new();
        for &(v, e) in &self.choices {
            let vertex = &protocol.vertex(v).id;
            if !seen.insert(v) {
                return Err(StrategyError::Duplicate(vertex.clone()));
            }
            if protocol.owner(v) != Some(self.player) {
                return Err(StrategyError::NotOwned {
                    vertex: vertex.clone(),
                    player: self.player,
                });
            }
            if protocol.edge(e).from != v {
                return Err(StrategyError::NotOutgoing {
                    vertex: vertex.clone(),
                    edge: protocol.edge(e).id.clone(),
                });
            }
        }
        Ok(())
    }

    /// Parses `v0=init,v2=reveal`; whitespace is ignored, an empty string is the empty strategy.
    pub fn parse(
        protocol: &ExchangeProtocol,
        player: Player,
        text: &str,
    ) -> Result<Strategy, StrategyError> {
        let mut choices = Vec::new();
        for part in text.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let (v, e) = part
                .split_once('=')
                .ok_or_else(|| StrategyError::Syntax(part.to_string()))?;
            let (v, e) = (v.trim(), e.trim());
            let vid = protocol
                .vertex_id(v)
                .ok_or_else(|| ModelError::UnknownVertex(v.to_string()))?;
            let eid = protocol
                .edge_id(e)
                .ok_or_else(|| ModelError::UnknownEdge(e.to_string()))?;
            choices.push((vid, eid));
        }
        let strategy = Strategy::new(player, choices, false);
        strategy.check(protocol)?;
        Ok(strategy)
    }

    /// `vertex=edge` assignments in vertex order.
    pub fn render(&self, protocol: &ExchangeProtocol) -> Vec<String> {
        self.choices
            .iter()
            .map(|&(v, e)| format!("{}={}", protocol.vertex(v).id, protocol.edge(e).id))
            .collect()
    }
}
