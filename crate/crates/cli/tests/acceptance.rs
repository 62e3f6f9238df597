//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.
//!
//! Oracles used here (the literal double loop over complete strategies and
//! the term-by-term payoff evaluator) are written independently of the
//! library's solvers.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use costfair_core::codec::ParseError;
use costfair_core::codec::{
    builtin, free_deposit_draft, parse_protocol, serialize_protocol, BUILTIN_NAMES,
};
use costfair_core::{
    escrow_trace, full_cost_fairness, generate, partial_cost_fairness,
    partial_cost_fairness_bruteforce, partial_cost_fairness_induction, payoff, theorem_premises,
    validate_protocol, BigRational, EdgeId, ExchangeProtocol, FairnessVerdict, GeneratorConfig,
    IssueKind, Method, Money, Player, Secured, Strategy, ValueCurve, VertexId,
    DEFAULT_ENUMERATION_CAP,
};

const SEEDS: std::ops::RangeInclusive<u64> = 1..=1000;
const LAB_BUDGET: Duration = Duration::from_secs(60);
const FAIRSWAP_BUDGET: Duration = Duration::from_secs(1);
const FEE_BUDGET: Duration = Duration::from_millis(100);
const COLLAPSE_INSTANCES: usize = 200;
/// Upper bound on opponent × own complete strategy pairs for the literal loop.
const COLLAPSE_PAIR_LIMIT: usize = 20_000;

type Criterion<'a> = Box<dyn Fn() -> Outcome + 'a>;

struct Outcome {
    pass: bool,
    detail: String,
}

fn pass(detail: impl Into<String>) -> Outcome {
    Outcome {
        pass: true,
        detail: detail.into(),
    }
}

fn fail(detail: impl Into<String>) -> Outcome {
    Outcome {
        pass: false,
        detail: detail.into(),
    }
}

/// Depth 2..=5 and branching 2..=3, spread over the seeds.
fn corpus_config(seed: u64) -> GeneratorConfig {
    GeneratorConfig::new(2 + (seed % 4) as u32, 2 + ((seed / 4) % 2) as u32, seed)
}

fn theorem1_config(seed: u64) -> GeneratorConfig {
    GeneratorConfig {
        enforce_theorem1_premises: true,
        ..corpus_config(seed)
    }
}

fn theorem2_config(seed: u64) -> GeneratorConfig {
    GeneratorConfig {
        enforce_theorem2_premises: true,
        ..corpus_config(seed)
    }
}

fn cli(args: &[&str]) -> (i32, String, String) {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["costfair"];
    argv.extend_from_slice(args);
    let code = costfair_cli::run(argv, &mut out, &mut err);
    (
        code,
        String::from_utf8(out).unwrap(),
        String::from_utf8(err).unwrap(),
    )
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let (code, out, err) = cli(&[
        "analyze",
        "--builtin",
        "fairswap-eth",
        "--check",
        "partial-cf:A",
        "--method",
        "both",
        "--report",
        "json",
    ]);
    let elapsed = start.elapsed();
    if code != 1 {
        return fail(format!("exit code {code}, stderr {err}"));
    }
    let json: serde_json::Value = serde_json::from_str(&out).unwrap();
    let verdicts = json["verdicts"].as_array().unwrap();
    if verdicts.len() != 2 {
        return fail(format!("expected two verdicts, got {}", verdicts.len()));
    }
    for v in verdicts {
        let method = v["method"].as_str().unwrap();
        if v["holds"] != false || v["worst_case"] != "-1050000" {
            return fail(format!(
                "{method}: holds {} worst case {}",
                v["holds"], v["worst_case"]
            ));
        }
        let cx = &v["counterexample"];
        if cx["adversary_strategy"] != serde_json::json!(["v1=leave"])
            || cx["path"] != serde_json::json!(["v0=init", "v1=leave"])
        {
            return fail(format!("{method}: counterexample {cx}"));
        }
        if cx["payoff"] != serde_json::json!({"a": "-1050000", "b": "0"}) {
            return fail(format!("{method}: payoff {}", cx["payoff"]));
        }
    }
    if elapsed >= FAIRSWAP_BUDGET {
        return fail(format!("took {elapsed:?}"));
    }
    pass(format!(
        "worst case -1050000 Gas, buyer leaves at v1, both solvers, {elapsed:?}"
    ))
}

fn criterion_2() -> Outcome {
    for (gas, expected) in [("1500000", "349.20\n"), ("1050000", "244.44\n")] {
        let start = Instant::now();
        let (code, out, _) = cli(&[
            "fee-convert",
            "--gas",
            gas,
            "--gas-price",
            "60",
            "--rate",
            "3880",
        ]);
        let elapsed = start.elapsed();
        if code != 0 || out != expected {
            return fail(format!("{gas} Gas printed {out:?} (exit {code})"));
        }
        if elapsed >= FEE_BUDGET {
            return fail(format!("{gas} Gas took {elapsed:?}"));
        }
    }
    pass("1500000 Gas -> 349.20, 1050000 Gas -> 244.44")
}

fn criterion_3() -> Outcome {
    let start = Instant::now();
    let mut exceptions = Vec::new();
    let mut instances = 0;
    for seed in SEEDS {
        let p = generate(&theorem1_config(seed)).unwrap();
        let report = theorem_premises(&p);
        if !report.theorem1_premises_hold || !report.fair_exchange {
            exceptions.push(format!("seed {seed}: premises not met"));
            continue;
        }
        instances += 1;
        let x = report.environment.initializer.unwrap();
        if partial_cost_fairness_induction(&p, x).holds {
            exceptions.push(format!("seed {seed}: partial-cf:{x} holds"));
        }
    }
    let elapsed = start.elapsed();
    if !exceptions.is_empty() {
        return fail(format!(
            "{} exceptions, first: {}",
            exceptions.len(),
            exceptions[0]
        ));
    }
    if elapsed >= LAB_BUDGET {
        return fail(format!("took {elapsed:?}"));
    }
    pass(format!(
        "{instances}/{instances} instances fail partial cost fairness for the initializer, {elapsed:?}"
    ))
}

fn criterion_4() -> Outcome {
    let start = Instant::now();
    let mut exceptions = Vec::new();
    let mut instances = 0;
    for seed in SEEDS {
        let p = generate(&theorem2_config(seed)).unwrap();
        let report = theorem_premises(&p);
        if !report.theorem2_premises_hold || !report.fair_exchange {
            exceptions.push(format!("seed {seed}: premises not met"));
            continue;
        }
        instances += 1;
        if full_cost_fairness(&p, Method::Induction, 0)
            .unwrap()
            .holds()
        {
            exceptions.push(format!("seed {seed}: full-cf holds"));
        }
    }
    let elapsed = start.elapsed();
    if !exceptions.is_empty() {
        return fail(format!(
            "{} exceptions, first: {}",
            exceptions.len(),
            exceptions[0]
        ));
    }
    if elapsed >= LAB_BUDGET {
        return fail(format!("took {elapsed:?}"));
    }
    pass(format!(
        "{instances}/{instances} instances fail full cost fairness, {elapsed:?}"
    ))
}

fn agreement(b: &FairnessVerdict, i: &FairnessVerdict) -> bool {
    b.holds == i.holds
        && b.worst_case == i.worst_case
        && b.counterexample.as_ref().map(|c| &c.payoff)
            == i.counterexample.as_ref().map(|c| &c.payoff)
}

fn criterion_5(corpus: &[(String, ExchangeProtocol)]) -> Outcome {
    let mut compared = 0;
    for (label, p) in corpus {
        for pl in Player::BOTH {
            let b = match partial_cost_fairness_bruteforce(p, pl, DEFAULT_ENUMERATION_CAP) {
                Ok(v) => v,
                Err(e) => return fail(format!("{label}: {e}")),
            };
            let i = partial_cost_fairness_induction(p, pl);
            if !agreement(&b, &i) {
                return fail(format!(
                    "{label} favoring {pl}: bruteforce {:?} vs induction {:?}",
                    b.worst_case, i.worst_case
                ));
            }
            compared += 1;
        }
    }
    pass(format!("{compared} verdicts identical across both solvers"))
}

/// Every complete strategy of `player`: one edge at every owned vertex.
fn complete_strategies(
    p: &ExchangeProtocol,
    player: Player,
    faithful_only: bool,
) -> Vec<HashMap<VertexId, EdgeId>> {
    let owned: Vec<VertexId> = p
        .vertex_ids()
        .filter(|&v| p.owner(v) == Some(player))
        .collect();
    let options: Vec<Vec<EdgeId>> = owned
        .iter()
        .map(|&v| {
            p.children(v)
                .iter()
                .copied()
                .filter(|&e| !faithful_only || p.edge(e).is_faithful())
                .collect()
        })
        .collect();
    let mut result = vec![HashMap::new()];
    for (v, opts) in owned.iter().zip(&options) {
        let mut next = Vec::with_capacity(result.len() * opts.len());
        for partial in &result {
            for &e in opts {
                let mut s = partial.clone();
                s.insert(*v, e);
                next.push(s);
            }
        }
        result = next;
    }
    result
}

fn complete_count(p: &ExchangeProtocol, player: Player, faithful_only: bool) -> usize {
    p.vertex_ids()
        .filter(|&v| p.owner(v) == Some(player))
        .map(|v| {
            p.children(v)
                .iter()
                .filter(|&&e| !faithful_only || p.edge(e).is_faithful())
                .count()
        })
        .fold(1usize, |acc, n| acc.saturating_mul(n))
}

fn walk(
    p: &ExchangeProtocol,
    a: &HashMap<VertexId, EdgeId>,
    b: &HashMap<VertexId, EdgeId>,
) -> Vec<EdgeId> {
    let mut v = p.root();
    let mut path = Vec::new();
    while let Some(owner) = p.owner(v) {
        let e = if owner == Player::A { a[&v] } else { b[&v] };
        path.push(e);
        v = p.edge(e).to;
    }
    path
}

/// For every opponent strategy some faithful strategy reaches the value: the
/// literal quantifier order, over complete strategies.
fn double_loop(p: &ExchangeProtocol, favored: Player) -> Secured<Money> {
    let opponents = complete_strategies(p, favored.opponent(), false);
    let own = complete_strategies(p, favored, true);
    let mut worst: Option<Secured<Money>> = None;
    for o in &opponents {
        let mut best = Secured::NoFaithfulResponse;
        for s in &own {
            let (a, b) = if favored == Player::A { (s, o) } else { (o, s) };
            let (pa, pb) = naive_payoff(p, &walk(p, a, b));
            let value = Secured::Value(if favored == Player::A { pa } else { pb });
            if value > best {
                best = value;
            }
        }
        if worst.as_ref().is_none_or(|w| best < *w) {
            worst = Some(best);
        }
    }
    worst.unwrap()
}

fn criterion_6() -> Outcome {
    let mut checked = 0;
    let mut seed = 0u64;
    while checked < COLLAPSE_INSTANCES {
        seed += 1;
        if seed > 100_000 {
            return fail(format!("only {checked} small instances found"));
        }
        let config = GeneratorConfig {
            enforce_fair_exchange: seed.is_multiple_of(2),
            enforce_theorem1_premises: seed.is_multiple_of(3),
            ..GeneratorConfig::new(2 + (seed % 3) as u32, 2 + ((seed / 3) % 2) as u32, seed)
        };
        let p = generate(&config).unwrap();
        let small = Player::BOTH.iter().all(|&pl| {
            complete_count(&p, pl.opponent(), false)
                .saturating_mul(complete_count(&p, pl, true).max(1))
                <= COLLAPSE_PAIR_LIMIT
        });
        if !small {
            continue;
        }
        for pl in Player::BOTH {
            let literal = double_loop(&p, pl);
            let minmax = partial_cost_fairness(&p, pl, Method::BruteForce, DEFAULT_ENUMERATION_CAP)
                .unwrap()
                .worst_case
                .unwrap();
            let induction = partial_cost_fairness_induction(&p, pl).worst_case.unwrap();
            if literal != minmax || literal != induction {
                return fail(format!(
                    "seed {seed} favoring {pl}: double loop {literal:?}, min-max {minmax:?}, induction {induction:?}"
                ));
            }
        }
        checked += 1;
    }
    pass(format!(
        "{checked} protocols, both players, values identical"
    ))
}

const ESCROW_DOC: &str = "\
format_version 1
name escrow-example
currency unit
[items]
x A
y B
[valuations]
A x linear 1
A y linear 1
B x linear 1
B y linear 1
[nodes]
v0 A
v1 B
v2 A
t -
[edges]
first v0 -> v1 faithful deposit=100
second v1 -> v2 faithful deposit=150
third v2 -> t faithful deposit=-100 comp_b=150
[root]
v0
";

fn criterion_7() -> Outcome {
    let p = parse_protocol(ESCROW_DOC).unwrap();
    let t = p.vertex_id("t").unwrap();
    let trace = escrow_trace(&p, &p.path_to(t));
    let expected: Vec<Money> = [100, 250, 0].into_iter().map(Money::from_integer).collect();
    if trace.balances != expected || !trace.prefix_closed() {
        return fail(format!("balances {:?}", trace.balances));
    }
    let no_deposit = ESCROW_DOC
        .replace("deposit=100", "")
        .replace("deposit=150", "")
        .replace("deposit=-100 comp_b=150", "comp_b=150");
    match parse_protocol(&no_deposit) {
        Err(ParseError::Invalid(report)) if report.has(IssueKind::NegativeEscrow) => {}
        other => return fail(format!("compensation without deposit accepted: {other:?}")),
    }
    pass("prefix balances [100, 250, 0]; payout without deposit rejected")
}

fn criterion_8() -> Outcome {
    let p = builtin("free-deposit").unwrap();
    let full = full_cost_fairness(&p, Method::BruteForce, DEFAULT_ENUMERATION_CAP).unwrap();
    if !full.holds() {
        return fail("free-deposit is not fully cost fair");
    }
    for delta in [
        Money::new(1, 1000),
        Money::from_integer(1),
        Money::new(7, 3),
        Money::from_integer(1_050_000),
    ] {
        let costly = validate_protocol(&free_deposit_draft(delta.clone())).unwrap();
        let v = full_cost_fairness(&costly, Method::BruteForce, DEFAULT_ENUMERATION_CAP).unwrap();
        if v.holds() {
            return fail(format!("deposit cost {delta} still fully cost fair"));
        }
    }
    pass("holds at zero deposit cost; fails for deposit costs 1/1000, 1, 7/3, 1050000")
}

fn criterion_9(corpus: &[(String, ExchangeProtocol)]) -> Outcome {
    for (label, p) in corpus {
        let text = serialize_protocol(p);
        if serialize_protocol(p) != text {
            return fail(format!("{label}: serialization not byte-stable"));
        }
        match parse_protocol(&text) {
            Ok(back) if &back == p && serialize_protocol(&back) == text => {}
            Ok(_) => return fail(format!("{label}: round trip changed the protocol")),
            Err(e) => return fail(format!("{label}: {e}")),
        }
    }
    pass(format!("{} protocols round-trip exactly", corpus.len()))
}

fn value(curve: &ValueCurve, share: &BigRational) -> BigRational {
    match curve {
        ValueCurve::Linear { full_value } => &full_value.0 * share,
        ValueCurve::Table { points } => {
            let (mut s0, mut v0) = (
                BigRational::from_integer(0.into()),
                BigRational::from_integer(0.into()),
            );
            for (s, v) in points {
                if share <= &s.0 {
                    if s.0 == s0 {
                        return v.0.clone();
                    }
                    return &v0 + (&v.0 - &v0) * (share - &s0) / (&s.0 - &s0);
                }
                s0 = s.0.clone();
                v0 = v.0.clone();
            }
            v0
        }
    }
}

/// Term-by-term payoff: item values received minus given, plus own payouts
/// minus own deposits and costs, plus payouts triggered by the other side.
fn naive_payoff(p: &ExchangeProtocol, path: &[EdgeId]) -> (Money, Money) {
    let zero = || BigRational::from_integer(0.into());
    let (mut to_a, mut to_b) = (zero(), zero());
    let (mut pa, mut pb) = (zero(), zero());
    for &e in path {
        let edge = p.edge(e);
        let at = &edge.attributes;
        to_a += &at.share_to_a.0;
        to_b += &at.share_to_b.0;
        match p.owner(edge.from).unwrap() {
            Player::A => {
                pa += &at.comp_to_a.0 - &at.deposit.0 - &at.cost.0;
                pb += &at.comp_to_b.0;
            }
            Player::B => {
                pb += &at.comp_to_b.0 - &at.deposit.0 - &at.cost.0;
                pa += &at.comp_to_a.0;
            }
        }
    }
    pa += value(p.curve(Player::A, Player::B), &to_a) - value(p.curve(Player::A, Player::A), &to_b);
    pb += value(p.curve(Player::B, Player::A), &to_b) - value(p.curve(Player::B, Player::B), &to_a);
    (Money(pa), Money(pb))
}

fn criterion_10(corpus: &[(String, ExchangeProtocol)]) -> Outcome {
    let mut terminals = 0;
    for (label, p) in corpus {
        for t in p.terminals() {
            let path = p.path_to(t);
            let mut choices = [Vec::new(), Vec::new()];
            for &e in &path {
                let from = p.edge(e).from;
                choices[p.owner(from).unwrap().index()].push((from, e));
            }
            let [ca, cb] = choices;
            let sa = Strategy::new(Player::A, ca, true);
            let sb = Strategy::new(Player::B, cb, true);
            let lib = payoff(p, &sa, &sb).unwrap();
            let (na, nb) = naive_payoff(p, &path);
            if lib.a != na || lib.b != nb {
                return fail(format!(
                    "{label} terminal {}: library ({}, {}) vs oracle ({na}, {nb})",
                    p.vertex(t).id,
                    lib.a,
                    lib.b
                ));
            }
            terminals += 1;
        }
    }
    pass(format!("{terminals} terminal payoffs identical"))
}

fn main() {
    let builtins: Vec<(String, ExchangeProtocol)> = BUILTIN_NAMES
        .iter()
        .map(|n| (format!("builtin {n}"), builtin(n).unwrap()))
        .collect();
    let theorem1_corpus: Vec<(String, ExchangeProtocol)> = SEEDS
        .map(|s| {
            (
                format!("theorem1 seed {s}"),
                generate(&theorem1_config(s)).unwrap(),
            )
        })
        .collect();
    let theorem2_corpus: Vec<(String, ExchangeProtocol)> = SEEDS
        .map(|s| {
            (
                format!("theorem2 seed {s}"),
                generate(&theorem2_config(s)).unwrap(),
            )
        })
        .collect();
    let unconstrained: Vec<(String, ExchangeProtocol)> = SEEDS
        .map(|s| {
            let config = GeneratorConfig {
                enforce_fair_exchange: false,
                ..corpus_config(s)
            };
            (format!("free seed {s}"), generate(&config).unwrap())
        })
        .collect();

    let oracle_corpus: Vec<_> = builtins.iter().chain(&theorem1_corpus).cloned().collect();
    let full_corpus: Vec<_> = builtins
        .iter()
        .chain(&theorem1_corpus)
        .chain(&theorem2_corpus)
        .chain(&unconstrained)
        .cloned()
        .collect();

    let criteria: Vec<(&str, Criterion)> = vec![
        ("1 fairswap regression", Box::new(criterion_1)),
        ("2 fee figure", Box::new(criterion_2)),
        ("3 theorem 1 lab", Box::new(criterion_3)),
        ("4 theorem 2 lab", Box::new(criterion_4)),
        (
            "5 solver oracle equivalence",
            Box::new(|| criterion_5(&oracle_corpus)),
        ),
        ("6 quantifier collapse", Box::new(criterion_6)),
        ("7 escrow prefix balances", Box::new(criterion_7)),
        ("8 free deposit construction", Box::new(criterion_8)),
        ("9 round trip", Box::new(|| criterion_9(&full_corpus))),
        ("10 payoff oracle", Box::new(|| criterion_10(&full_corpus))),
    ];

    let mut failures = 0;
    for (name, check) in &criteria {
        let outcome = check();
        if !outcome.pass {
            failures += 1;
        }
        println!(
            "criterion {name}: {} ({})",
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail
        );
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
