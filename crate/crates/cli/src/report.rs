//! Analysis report: one serde structure, rendered either as JSON or as text.
//!
//! Both renderings are produced from the same value so they carry the same
//! facts. Wall-clock timings live in their own `timings` field; everything
//! else is deterministic.

use std::fmt::Write as _;

use costfair_core::{
    Counterexample, EnvironmentReport, ExchangeProtocol, FairnessVerdict, Player, TheoremReport,
};
use serde::Serialize;

pub const ANALYSIS_SCHEMA: &str = "costfair.analysis.v1";
pub const PAYOFF_SCHEMA: &str = "costfair.payoff.v1";

#[derive(Debug, Clone, Serialize)]
pub struct PlayerInfo {
    pub player: String,
    pub role: String,
    pub item: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct ProtocolInfo {
    pub name: String,
    pub source: String,
    pub currency: String,
    pub players: Vec<PlayerInfo>,
    pub vertices: usize,
    pub edges: usize,
    pub warnings: Vec<String>,
}

impl ProtocolInfo {
    pub fn new(protocol: &ExchangeProtocol, source: &str) -> Self {
        ProtocolInfo {
            name: protocol.name().to_string(),
            source: source.to_string(),
            currency: protocol.currency().to_string(),
            players: Player::BOTH
                .iter()
                .map(|&p| PlayerInfo {
                    player: p.to_string(),
                    role: protocol.role(p).to_string(),
                    item: protocol.item(p).id.clone(),
                })
                .collect(),
            vertices: protocol.vertices().len(),
            edges: protocol.edges().len(),
            warnings: protocol.warnings().to_vec(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EnvironmentInfo {
    pub nonnegligible_cost: bool,
    pub can_leave_any_time_a: bool,
    pub can_leave_any_time_b: bool,
    pub initializer: Option<String>,
}

impl From<&EnvironmentReport> for EnvironmentInfo {
    fn from(env: &EnvironmentReport) -> Self {
        EnvironmentInfo {
            nonnegligible_cost: env.nonnegligible_cost,
            can_leave_any_time_a: env.can_leave_any_time_a,
            can_leave_any_time_b: env.can_leave_any_time_b,
            initializer: env.initializer.map(|p| p.to_string()),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct ClosedSystemInfo {
    pub holds: bool,
    /// Terminals whose path ever drives the escrow balance below zero.
    pub violations: Vec<String>,
    /// Terminals that end with funds still held in escrow, as `terminal=balance`.
    pub residual_escrow: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PayoffInfo {
    pub a: String,
    pub b: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CounterexampleInfo {
    /// `vertex=edge` along the realized path.
    pub path: Vec<String>,
    pub adversary_strategy: Vec<String>,
    pub response_strategy: Option<Vec<String>>,
    pub payoff: Option<PayoffInfo>,
}

impl CounterexampleInfo {
    pub fn new(protocol: &ExchangeProtocol, cx: &Counterexample) -> Self {
        CounterexampleInfo {
            path: cx
                .path
                .iter()
                .map(|&e| {
                    let edge = protocol.edge(e);
                    format!("{}={}", protocol.vertex(edge.from).id, edge.id)
                })
                .collect(),
            adversary_strategy: cx.adversary.render(protocol),
            response_strategy: cx.response.as_ref().map(|s| s.render(protocol)),
            payoff: cx.payoff.as_ref().map(|p| PayoffInfo {
                a: p.a.to_string(),
                b: p.b.to_string(),
            }),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VerdictInfo {
    pub check: String,
    pub method: String,
    pub holds: bool,
    pub worst_case: Option<String>,
    pub reason: Option<String>,
    pub counterexample: Option<CounterexampleInfo>,
    /// Per-side verdicts of `full-cf`.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub components: Vec<VerdictInfo>,
}

impl VerdictInfo {
    pub fn new(protocol: &ExchangeProtocol, v: &FairnessVerdict) -> Self {
        VerdictInfo {
            check: v.predicate.to_string(),
            method: v.method.to_string(),
            holds: v.holds,
            worst_case: v.worst_case.as_ref().map(|w| w.to_string()),
            reason: v.reason.clone(),
            counterexample: v
                .counterexample
                .as_ref()
                .map(|c| CounterexampleInfo::new(protocol, c)),
            components: Vec::new(),
        }
    }

    /// The facts two solvers must agree on.
    pub fn agreement_key(
        &self,
    ) -> (
        bool,
        Option<String>,
        Option<Option<PayoffInfo>>,
        Vec<String>,
    ) {
        let component_keys = self
            .components
            .iter()
            .map(|c| format!("{:?}", c.agreement_key()))
            .collect();
        (
            self.holds,
            self.worst_case.clone(),
            self.counterexample.as_ref().map(|c| c.payoff.clone()),
            component_keys,
        )
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PredictionInfo {
    pub predicate: String,
    pub method: String,
    pub verdict_holds: bool,
    pub agrees: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremInfo {
    pub sequential_moves: bool,
    pub fair_exchange: bool,
    pub theorem1_premises_hold: bool,
    pub theorem2_premises_hold: bool,
    pub predicted_failures: Vec<String>,
    pub predictions: Vec<PredictionInfo>,
}

impl TheoremInfo {
    pub fn new(report: &TheoremReport) -> Self {
        TheoremInfo {
            sequential_moves: report.sequential_moves,
            fair_exchange: report.fair_exchange,
            theorem1_premises_hold: report.theorem1_premises_hold,
            theorem2_premises_hold: report.theorem2_premises_hold,
            predicted_failures: report
                .predicted_failures
                .iter()
                .map(|p| p.to_string())
                .collect(),
            predictions: Vec::new(),
        }
    }

    pub fn holds(&self) -> bool {
        self.predictions.iter().all(|p| p.agrees)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Timing {
    pub check: String,
    pub method: Option<String>,
    pub millis: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalysisReport {
    pub schema: &'static str,
    pub protocol: ProtocolInfo,
    pub environment: Option<EnvironmentInfo>,
    pub closed_system: Option<ClosedSystemInfo>,
    pub verdicts: Vec<VerdictInfo>,
    pub theorems: Option<TheoremInfo>,
    pub solver_disagreements: Vec<String>,
    pub all_hold: bool,
    pub timings: Vec<Timing>,
}

fn yes(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

fn holds(b: bool) -> &'static str {
    if b {
        "HOLDS"
    } else {
        "FAILS"
    }
}

fn render_verdict(out: &mut String, v: &VerdictInfo, currency: &str, indent: &str) {
    let _ = write!(
        out,
        "{indent}{} [{}]: {}",
        v.check,
        v.method,
        holds(v.holds)
    );
    if let Some(w) = &v.worst_case {
        let _ = write!(out, ", worst case {w} {currency}");
    }
    out.push('\n');
    if let Some(reason) = &v.reason {
        let _ = writeln!(out, "{indent}  reason: {reason}");
    }
    if let Some(cx) = &v.counterexample {
        let _ = writeln!(out, "{indent}  counterexample path: {}", list(&cx.path));
        let _ = writeln!(
            out,
            "{indent}  opponent strategy: {}",
            list(&cx.adversary_strategy)
        );
        match &cx.response_strategy {
            Some(r) => {
                let _ = writeln!(out, "{indent}  best faithful reply: {}", list(r));
            }
            None => {
                let _ = writeln!(out, "{indent}  best faithful reply: none");
            }
        }
        if let Some(p) = &cx.payoff {
            let _ = writeln!(out, "{indent}  payoff: ({}, {})", p.a, p.b);
        }
    }
    for c in &v.components {
        render_verdict(out, c, currency, &format!("{indent}  "));
    }
}

fn list(items: &[String]) -> String {
    if items.is_empty() {
        "(empty)".to_string()
    } else {
        items.join(", ")
    }
}

impl AnalysisReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let p = &self.protocol;
        let _ = writeln!(
            out,
            "protocol {} ({}): {} vertices, {} edges, currency {}",
            p.name, p.source, p.vertices, p.edges, p.currency
        );
        for info in &p.players {
            let role = if info.role.is_empty() {
                "-"
            } else {
                &info.role
            };
            let _ = writeln!(out, "  {}: role {}, item {}", info.player, role, info.item);
        }
        for w in &p.warnings {
            let _ = writeln!(out, "  warning: {w}");
        }
        if let Some(env) = &self.environment {
            let _ = writeln!(
                out,
                "environment: non-negligible cost {}, A can leave at any time {}, B can leave at any time {}, initializer {}",
                yes(env.nonnegligible_cost),
                yes(env.can_leave_any_time_a),
                yes(env.can_leave_any_time_b),
                env.initializer.as_deref().unwrap_or("none")
            );
        }
        if let Some(cs) = &self.closed_system {
            let _ = writeln!(out, "closed-system: {}", holds(cs.holds));
            if !cs.violations.is_empty() {
                let _ = writeln!(
                    out,
                    "  negative escrow on paths to: {}",
                    list(&cs.violations)
                );
            }
            if !cs.residual_escrow.is_empty() {
                let _ = writeln!(out, "  funds left in escrow: {}", list(&cs.residual_escrow));
            }
        }
        for v in &self.verdicts {
            render_verdict(&mut out, v, &p.currency, "");
        }
        if let Some(t) = &self.theorems {
            let _ = writeln!(
                out,
                "theorems: sequential moves {}, fair exchange {}, theorem 1 premises {}, theorem 2 premises {}",
                yes(t.sequential_moves),
                yes(t.fair_exchange),
                yes(t.theorem1_premises_hold),
                yes(t.theorem2_premises_hold)
            );
            if t.predicted_failures.is_empty() {
                out.push_str("  no failure predicted\n");
            }
            for pr in &t.predictions {
                let _ = writeln!(
                    out,
                    "  predicted failure of {} [{}]: verdict {}, {}",
                    pr.predicate,
                    pr.method,
                    holds(pr.verdict_holds),
                    if pr.agrees {
                        "as predicted"
                    } else {
                        "CONTRADICTS PREDICTION"
                    }
                );
            }
        }
        for d in &self.solver_disagreements {
            let _ = writeln!(out, "solver disagreement: {d}");
        }
        let _ = writeln!(
            out,
            "result: {}",
            if self.all_hold {
                "all requested checks hold"
            } else {
                "at least one requested check fails"
            }
        );
        for t in &self.timings {
            let method = t
                .method
                .as_deref()
                .map(|m| format!(" [{m}]"))
                .unwrap_or_default();
            let _ = writeln!(out, "time {}{method}: {:.3} ms", t.check, t.millis);
        }
        out
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct PayoffReport {
    pub schema: &'static str,
    pub protocol: String,
    pub path: Vec<String>,
    pub terminal: String,
    pub payoff: PayoffInfo,
    pub outcome: String,
    pub escrow_balances: Vec<String>,
}

impl PayoffReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "path: {}", list(&self.path));
        let _ = writeln!(out, "terminal: {}", self.terminal);
        let _ = writeln!(out, "payoff: ({}, {})", self.payoff.a, self.payoff.b);
        let _ = writeln!(out, "outcome: {}", self.outcome);
        let _ = writeln!(
            out,
            "escrow balances: [{}]",
            self.escrow_balances.join(", ")
        );
        out
    }
}
