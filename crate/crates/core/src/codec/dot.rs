//! Graphviz export of protocol trees.

use std::fmt::Write as _;

use crate::model::{EdgeKind, ExchangeProtocol, MoveAttributes};
use crate::semantics::terminal_payoffs;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DotOptions {
    /// Label terminals with the payoff pair of their path.
    pub payoffs: bool,
    /// Style edges by kind: solid faithful, dashed unfaithful, dotted leave.
    pub faithfulness: bool,
    /// Print non-zero move attributes on edge labels.
    pub attributes: bool,
}

impl Default for DotOptions {
    fn default() -> Self {
        DotOptions {
            payoffs: true,
            faithfulness: true,
            attributes: true,
        }
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""))
}

fn attribute_lines(a: &MoveAttributes) -> Vec<String> {
    let mut lines = Vec::new();
    if !a.share_to_a.is_zero() || !a.share_to_b.is_zero() {
        lines.push(format!("shares=({}, {})", a.share_to_a, a.share_to_b));
    }
    let amounts = [
        ("cost", &a.cost),
        ("deposit", &a.deposit),
        ("comp_a", &a.comp_to_a),
        ("comp_b", &a.comp_to_b),
    ];
    for (key, value) in amounts {
        if !value.is_zero() {
            lines.push(format!("{key}={value}"));
        }
    }
    lines
}

pub fn export_dot(protocol: &ExchangeProtocol, options: DotOptions) -> String {
    let payoffs = terminal_payoffs(protocol);
    let mut out = String::new();
    let _ = writeln!(out, "digraph {} {{", quote(protocol.name()));
    out.push_str(
        "  rankdir=TB;\n  node [fontname=\"Helvetica\"];\n  edge [fontname=\"Helvetica\"];\n",
    );
    for (i, v) in protocol.vertices().iter().enumerate() {
        let (label, shape) = match v.owner {
            Some(p) => (format!("{}\n{}", v.id, protocol.player_label(p)), "ellipse"),
            None => {
                let mut label = v.id.clone();
                if options.payoffs {
                    if let Some(pair) = &payoffs[i] {
                        let _ = write!(label, "\n{pair}");
                    }
                }
                (label, "box")
            }
        };
        let _ = writeln!(
            out,
            "  {} [label={}, shape={shape}];",
            quote(&v.id),
            quote(&label)
        );
    }
    for e in protocol.edges() {
        let mut label = e.id.clone();
        if options.attributes {
            for line in attribute_lines(&e.attributes) {
                let _ = write!(label, "\n{line}");
            }
        }
        let mut props = format!("label={}", quote(&label));
        if options.faithfulness {
            let style = match e.kind {
                EdgeKind::Faithful => "solid",
                EdgeKind::Unfaithful => "dashed",
                EdgeKind::Leave => "dotted",
            };
            let _ = write!(props, ", style={style}");
        }
        let _ = writeln!(
            out,
            "  {} -> {} [{props}];",
            quote(&protocol.vertex(e.from).id),
            quote(&protocol.vertex(e.to).id)
        );
    }
    out.push_str("}\n");
    out
}
