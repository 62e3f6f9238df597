//! Fixtures shared by the solver benchmarks.

use costfair_core::{generate, ExchangeProtocol, GeneratorConfig};

/// Generated protocols satisfying the single-leaver premises, one per seed.
pub fn theorem1_corpus(
    depth: u32,
    branching: u32,
    seeds: std::ops::Range<u64>,
) -> Vec<ExchangeProtocol> {
    seeds
        .map(|seed| {
            let config = GeneratorConfig {
                enforce_theorem1_premises: true,
                ..GeneratorConfig::new(depth, branching, seed)
            };
            generate(&config).expect("premises are feasible for depth and branching >= 2")
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_has_one_protocol_per_seed() {
        assert_eq!(theorem1_corpus(3, 2, 0..5).len(), 5);
    }
}
