//! The `.xproto` text format.
//!
//! ```text
//! format_version 1
//! name fairswap-eth
//! currency Gas
//!
//! [players]
//! A seller
//! B buyer
//!
//! [items]
//! data A
//! payment B
//!
//! [valuations]
//! A data linear 500000
//! B data table 1/2:1000000 1:4000000
//!
//! [nodes]
//! v0 A
//! t0 -
//!
//! [edges]
//! init v0 -> t0 faithful cost=1050000
//!
//! [root]
//! v0
//! ```
//!
//! Blank lines and `#` comments are ignored. Edge attributes are
//! `share_a`, `share_b`, `cost`, `deposit`, `comp_a` and `comp_b`; omitted
//! ones are zero. Node and edge order matters: outgoing edges are ordered as
//! declared.

use std::collections::HashSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::model::{
    validate_protocol, EdgeKind, ExchangeProtocol, Item, MoveAttributes, Player, ProtocolDraft,
    ValidationReport, Valuation, ValueCurve,
};
use crate::rational::{Money, Share};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("line {line}: unknown field `{field}`")]
    UnknownField { line: usize, field: String },
    #[error("line {line}: duplicate id `{id}`")]
    DuplicateId { line: usize, id: String },
    #[error("{0}")]
    Missing(String),
    #[error("unsupported format_version {0} (expected {FORMAT_VERSION})")]
    UnsupportedVersion(String),
    #[error("invalid protocol: {0}")]
    Invalid(ValidationReport),
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Section {
    Header,
    Players,
    Items,
    Valuations,
    Nodes,
    Edges,
    Root,
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        message: message.into(),
    }
}

fn player(line: usize, s: &str) -> Result<Player, ParseError> {
    match s {
        "A" => Ok(Player::A),
        "B" => Ok(Player::B),
        _ => Err(syntax(line, format!("expected player A or B, found `{s}`"))),
    }
}

fn money(line: usize, field: &str, s: &str) -> Result<Money, ParseError> {
    s.parse()
        .map_err(|e| syntax(line, format!("field `{field}`: {e}")))
}

fn share(line: usize, field: &str, s: &str) -> Result<Share, ParseError> {
    s.parse()
        .map_err(|e| syntax(line, format!("field `{field}`: {e}")))
}

/// Parses a document and validates the protocol it describes.
pub fn parse_protocol(text: &str) -> Result<ExchangeProtocol, ParseError> {
    let draft = parse_draft(text)?;
    validate_protocol(&draft).map_err(ParseError::Invalid)
}

/// Structural parse only, without protocol validation.
pub fn parse_draft(text: &str) -> Result<ProtocolDraft, ParseError> {
    let mut draft = ProtocolDraft::default();
    let mut version: Option<String> = None;
    let mut section = Section::Header;
    let mut seen_sections = HashSet::new();
    let mut item_ids = HashSet::new();
    let mut vertex_ids = HashSet::new();
    let mut edge_ids = HashSet::new();
    // Valuations name items by id; resolve once all items are known.
    let mut pending_valuations: Vec<(usize, Player, String, ValueCurve)> = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = match name.trim() {
                "players" => Section::Players,
                "items" => Section::Items,
                "valuations" => Section::Valuations,
                "nodes" => Section::Nodes,
                "edges" => Section::Edges,
                "root" => Section::Root,
                other => {
                    return Err(ParseError::UnknownField {
                        line,
                        field: format!("[{other}]"),
                    })
                }
            };
            if !seen_sections.insert(name.trim().to_string()) {
                return Err(syntax(line, format!("section [{}] repeated", name.trim())));
            }
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        match section {
            Section::Header => {
                let [key, value] = tokens[..] else {
                    return Err(syntax(line, "expected `key value`"));
                };
                match key {
                    "format_version" => version = Some(value.to_string()),
                    "name" => draft.name = value.to_string(),
                    "currency" => draft.currency = value.to_string(),
                    _ => {
                        return Err(ParseError::UnknownField {
                            line,
                            field: key.to_string(),
                        })
                    }
                }
            }
            Section::Players => {
                let (p, role) = match tokens[..] {
                    [p] => (p, ""),
                    [p, role] => (p, role),
                    _ => return Err(syntax(line, "expected `A|B [role]`")),
                };
                draft.roles[player(line, p)?.index()] = role.to_string();
            }
            Section::Items => {
                let [id, owner] = tokens[..] else {
                    return Err(syntax(line, "expected `item_id A|B`"));
                };
                if !item_ids.insert(id.to_string()) {
                    return Err(ParseError::DuplicateId {
                        line,
                        id: id.to_string(),
                    });
                }
                draft.items.push(Item {
                    id: id.to_string(),
                    owner: player(line, owner)?,
                });
            }
            Section::Valuations => {
                if tokens.len() < 4 {
                    return Err(syntax(
                        line,
                        "expected `A|B item_id linear V` or `A|B item_id table s:v ...`",
                    ));
                }
                let who = player(line, tokens[0])?;
                let curve = match tokens[2] {
                    "linear" => {
                        if tokens.len() != 4 {
                            return Err(syntax(line, "linear takes exactly one value"));
                        }
                        ValueCurve::linear(money(line, "linear", tokens[3])?)
                    }
                    "table" => {
                        let mut points = Vec::new();
                        for point in &tokens[3..] {
                            let (s, v) = point.split_once(':').ok_or_else(|| {
                                syntax(line, format!("table point `{point}` is not `share:value`"))
                            })?;
                            points.push((share(line, "table", s)?, money(line, "table", v)?));
                        }
                        ValueCurve::Table { points }
                    }
                    other => {
                        return Err(ParseError::UnknownField {
                            line,
                            field: other.to_string(),
                        })
                    }
                };
                pending_valuations.push((line, who, tokens[1].to_string(), curve));
            }
            Section::Nodes => {
                let [id, owner] = tokens[..] else {
                    return Err(syntax(line, "expected `node_id A|B|-`"));
                };
                if !vertex_ids.insert(id.to_string()) {
                    return Err(ParseError::DuplicateId {
                        line,
                        id: id.to_string(),
                    });
                }
                let owner = match owner {
                    "-" => None,
                    p => Some(player(line, p)?),
                };
                draft = draft.vertex(id, owner);
            }
            Section::Edges => {
                if tokens.len() < 5 || tokens[2] != "->" {
                    return Err(syntax(
                        line,
                        "expected `edge_id from -> to kind [key=value ...]`",
                    ));
                }
                let id = tokens[0];
                if !edge_ids.insert(id.to_string()) {
                    return Err(ParseError::DuplicateId {
                        line,
                        id: id.to_string(),
                    });
                }
                let kind = match tokens[4] {
                    "faithful" => EdgeKind::Faithful,
                    "unfaithful" => EdgeKind::Unfaithful,
                    "leave" => EdgeKind::Leave,
                    other => {
                        return Err(syntax(
                            line,
                            format!(
                                "edge kind must be faithful, unfaithful or leave, found `{other}`"
                            ),
                        ))
                    }
                };
                let mut attrs = MoveAttributes::default();
                let mut seen = HashSet::new();
                for field in &tokens[5..] {
                    let (key, value) = field.split_once('=').ok_or_else(|| {
                        syntax(line, format!("attribute `{field}` is not `key=value`"))
                    })?;
                    if !seen.insert(key) {
                        return Err(syntax(line, format!("attribute `{key}` repeated")));
                    }
                    match key {
                        "share_a" => attrs.share_to_a = share(line, key, value)?,
                        "share_b" => attrs.share_to_b = share(line, key, value)?,
                        "cost" => attrs.cost = money(line, key, value)?,
                        "deposit" => attrs.deposit = money(line, key, value)?,
                        "comp_a" => attrs.comp_to_a = money(line, key, value)?,
                        "comp_b" => attrs.comp_to_b = money(line, key, value)?,
                        _ => {
                            return Err(ParseError::UnknownField {
                                line,
                                field: key.to_string(),
                            })
                        }
                    }
                }
                draft = draft.edge(id, tokens[1], tokens[3], kind, attrs);
            }
            Section::Root => {
                let [id] = tokens[..] else {
                    return Err(syntax(line, "expected a single node id"));
                };
                if draft.root.is_some() {
                    return Err(syntax(line, "root given twice"));
                }
                draft.root = Some(id.to_string());
            }
        }
    }

    if draft.root.is_none() {
        return Err(ParseError::Missing("missing root".into()));
    }
    match version.as_deref() {
        None => return Err(ParseError::Missing("missing format_version".into())),
        Some(v) if v != FORMAT_VERSION.to_string() => {
            return Err(ParseError::UnsupportedVersion(v.to_string()))
        }
        Some(_) => {}
    }
    for (line, who, item, curve) in pending_valuations {
        let owner = draft
            .items
            .iter()
            .find(|i| i.id == item)
            .map(|i| i.owner)
            .ok_or_else(|| syntax(line, format!("valuation names unknown item `{item}`")))?;
        draft.valuations.push(Valuation {
            player: who,
            item_of: owner,
            curve,
        });
    }
    Ok(draft)
}

fn write_curve(out: &mut String, curve: &ValueCurve) {
    match curve {
        ValueCurve::Linear { full_value } => {
            let _ = write!(out, "linear {full_value}");
        }
        ValueCurve::Table { points } => {
            out.push_str("table");
            for (s, v) in points {
                let _ = write!(out, " {s}:{v}");
            }
        }
    }
}

/// Canonical text of a validated protocol. Byte-stable: equal protocols give equal text.
pub fn serialize_protocol(protocol: &ExchangeProtocol) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "format_version {FORMAT_VERSION}");
    let _ = writeln!(out, "name {}", protocol.name());
    let _ = writeln!(out, "currency {}", protocol.currency());

    out.push_str("\n[players]\n");
    for p in Player::BOTH {
        match protocol.role(p) {
            "" => {
                let _ = writeln!(out, "{p}");
            }
            role => {
                let _ = writeln!(out, "{p} {role}");
            }
        }
    }

    out.push_str("\n[items]\n");
    for p in Player::BOTH {
        let _ = writeln!(out, "{} {p}", protocol.item(p).id);
    }

    out.push_str("\n[valuations]\n");
    for p in Player::BOTH {
        for item_of in Player::BOTH {
            let _ = write!(out, "{p} {} ", protocol.item(item_of).id);
            write_curve(&mut out, protocol.curve(p, item_of));
            out.push('\n');
        }
    }

    out.push_str("\n[nodes]\n");
    for v in protocol.vertices() {
        let owner = v.owner.map_or("-".to_string(), |p| p.to_string());
        let _ = writeln!(out, "{} {owner}", v.id);
    }

    out.push_str("\n[edges]\n");
    for e in protocol.edges() {
        let _ = write!(
            out,
            "{} {} -> {} {}",
            e.id,
            protocol.vertex(e.from).id,
            protocol.vertex(e.to).id,
            e.kind.keyword()
        );
        let a = &e.attributes;
        let shares = [("share_a", &a.share_to_a), ("share_b", &a.share_to_b)];
        for (key, value) in shares {
            if !value.is_zero() {
                let _ = write!(out, " {key}={value}");
            }
        }
        let amounts = [
            ("cost", &a.cost),
            ("deposit", &a.deposit),
            ("comp_a", &a.comp_to_a),
            ("comp_b", &a.comp_to_b),
        ];
        for (key, value) in amounts {
            if !value.is_zero() {
                let _ = write!(out, " {key}={value}");
            }
        }
        out.push('\n');
    }

    out.push_str("\n[root]\n");
    let _ = writeln!(out, "{}", protocol.vertex(protocol.root()).id);
    out
}
