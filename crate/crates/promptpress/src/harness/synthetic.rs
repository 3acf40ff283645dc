//! Deterministic synthetic multi-document prompts for benchmarks and retrieval tests.
//!
//! One document (the gold one) contains the question phrase verbatim; the others are
//! filler. In `distractor_terms` mode every distractor contains the same question terms —
//! same multiset, so term-frequency retrieval cannot separate them — but scattered with at
//! least one filler token between any two, so no question-order bigram survives. Word lists
//! are disjoint from each other and from the restrictive statement, keeping the scoring
//! margins clean.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Filler vocabulary: landscape nouns, never used as question terms.
pub const FILLER: &[&str] = &[
    "amber", "basin", "cedar", "dune", "ember", "fjord", "grove", "harbor", "inlet", "juniper",
    "knoll", "lagoon", "meadow", "nectar", "orchid", "pebble", "quarry", "ridge", "summit",
    "thicket", "umber", "valley", "willow", "xylem", "yonder", "zephyr", "arbor", "bluff",
    "cairn", "eddy", "fen", "glen", "heath", "isle", "jetty", "kelp", "loch", "marsh", "niche",
    "oasis", "prairie", "quay", "reef", "shoal", "tarn", "upland", "vale", "wharf", "atoll",
    "bayou", "cliff", "dell", "floe", "gulch", "hollow", "islet", "karst", "ledge", "mesa",
    "notch", "osier", "pike", "rill", "scree",
];

/// Content vocabulary: instrument nouns the question phrase is drawn from.
pub const CONTENT: &[&str] = &[
    "accordion", "barometer", "catalyst", "dynamo", "enzyme", "flywheel", "gyroscope",
    "hydraulic", "isotope", "javelin", "kinetics", "lattice", "magnet", "neutron", "oscillator",
    "pendulum", "quartz", "resistor", "solenoid", "turbine", "ultraviolet", "voltmeter",
    "wavelength", "xenon", "yttrium", "zirconium", "ammeter", "bearing", "compressor", "diode",
    "electrode", "filament", "generator", "hygrometer", "inductor", "joule", "kelvin", "lumen",
    "manometer", "nozzle", "ohmmeter", "piston", "radiator", "stator", "thermistor", "valve",
    "watt", "zinc",
];

#[derive(Debug, Clone)]
pub struct SynthConfig {
    pub num_docs: usize,
    /// Whitespace tokens per document.
    pub doc_tokens: usize,
    /// Length of the question phrase.
    pub question_terms: usize,
    /// Fixed gold slot; `None` draws one uniformly.
    pub gold_position: Option<usize>,
    /// Give every distractor the same question-term multiset, scattered non-adjacently.
    pub distractor_terms: bool,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            num_docs: 20,
            doc_tokens: 100,
            question_terms: 4,
            gold_position: None,
            distractor_terms: false,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCase {
    pub instruction: String,
    pub documents: Vec<String>,
    pub question: String,
    pub gold_doc_index: usize,
    pub answers: Vec<String>,
}

/// `n` positions in `0..len`, sorted, no two adjacent. Uses the shift bijection from
/// combinations of `0..len-n+1`, so placement is exact rather than rejection-sampled.
fn scattered_positions(rng: &mut ChaCha8Rng, len: usize, n: usize) -> Vec<usize> {
    assert!(len >= 2 * n.saturating_sub(1) + 1, "document too short to scatter {n} terms");
    let m = len - n + 1;
    let mut picks: Vec<usize> = rand::seq::index::sample(rng, m, n).into_vec();
    picks.sort_unstable();
    picks.iter().enumerate().map(|(i, &y)| y + i).collect()
}

fn build_doc(rng: &mut ChaCha8Rng, len: usize, terms: &[&str], mode: DocKind) -> Vec<String> {
    let mut words: Vec<String> =
        (0..len).map(|_| (*FILLER.choose(rng).unwrap()).to_string()).collect();
    match mode {
        DocKind::Filler => {}
        DocKind::Gold => {
            let start = rng.gen_range(0..=len - terms.len());
            for (i, t) in terms.iter().enumerate() {
                words[start + i] = (*t).to_string();
            }
        }
        DocKind::Scattered => {
            for (pos, t) in scattered_positions(rng, len, terms.len()).into_iter().zip(terms) {
                words[pos] = (*t).to_string();
            }
        }
    }
    words
}

#[derive(Clone, Copy)]
enum DocKind {
    Filler,
    Gold,
    Scattered,
}

pub fn generate(cfg: &SynthConfig) -> SyntheticCase {
    generate_with_lengths(cfg, &vec![cfg.doc_tokens; cfg.num_docs])
}

/// Generate with an explicit per-document token length (used to hit exact corpus sizes).
fn generate_with_lengths(cfg: &SynthConfig, lengths: &[usize]) -> SyntheticCase {
    assert!(!lengths.is_empty(), "at least one document required");
    assert!(cfg.question_terms >= 1 && cfg.question_terms <= CONTENT.len());

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let terms: Vec<&str> =
        CONTENT.choose_multiple(&mut rng, cfg.question_terms).copied().collect();
    let gold = cfg.gold_position.unwrap_or_else(|| rng.gen_range(0..lengths.len()));
    let gold = gold.min(lengths.len() - 1);

    let documents: Vec<String> = lengths
        .iter()
        .enumerate()
        .map(|(i, &len)| {
            let kind = if i == gold {
                DocKind::Gold
            } else if cfg.distractor_terms {
                DocKind::Scattered
            } else {
                DocKind::Filler
            };
            build_doc(&mut rng, len, &terms, kind).join(" ")
        })
        .collect();

    let phrase = terms.join(" ");
    SyntheticCase {
        instruction: "Read every passage and reply with the phrase requested below.".to_string(),
        documents,
        question: phrase.clone(),
        gold_doc_index: gold,
        answers: vec![phrase],
    }
}

/// Generate a case whose `instruction + documents + question` total exactly `total_tokens`
/// whitespace tokens. Document lengths differ by at most one.
pub fn generate_with_total(cfg: &SynthConfig, total_tokens: usize) -> SyntheticCase {
    let probe = generate(cfg);
    let count = |s: &str| s.split_whitespace().count();
    let fixed = count(&probe.instruction) + count(&probe.question);
    let doc_total = total_tokens
        .checked_sub(fixed)
        .expect("total_tokens smaller than instruction + question");
    let base = doc_total / cfg.num_docs;
    let extra = doc_total % cfg.num_docs;
    let lengths: Vec<usize> =
        (0..cfg.num_docs).map(|i| base + usize::from(i < extra)).collect();
    let floor = 2 * (cfg.question_terms - 1) + 1;
    assert!(
        lengths.iter().all(|&l| l >= floor.max(cfg.question_terms)),
        "documents too short for the phrase"
    );
    generate_with_lengths(cfg, &lengths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::prompt::DEFAULT_RESTRICT;
    use std::collections::HashSet;

    #[test]
    fn word_lists_are_disjoint_and_avoid_the_restrictive_statement() {
        let filler: HashSet<&str> = FILLER.iter().copied().collect();
        let content: HashSet<&str> = CONTENT.iter().copied().collect();
        assert_eq!(filler.len(), FILLER.len());
        assert_eq!(content.len(), CONTENT.len());
        assert!(filler.is_disjoint(&content));
        for word in DEFAULT_RESTRICT.split_whitespace() {
            let w = word.trim_matches('.').to_ascii_lowercase();
            assert!(!filler.contains(w.as_str()), "filler collides with restrict word {w}");
            assert!(!content.contains(w.as_str()), "content collides with restrict word {w}");
        }
    }

    #[test]
    fn same_seed_same_case() {
        let cfg = SynthConfig { seed: 41, distractor_terms: true, ..Default::default() };
        assert_eq!(generate(&cfg), generate(&cfg));
        let other = SynthConfig { seed: 42, ..cfg };
        assert_ne!(generate(&other), generate(&cfg));
    }

    #[test]
    fn gold_document_contains_the_phrase_verbatim() {
        for seed in 0..30 {
            let cfg = SynthConfig { seed, distractor_terms: true, ..Default::default() };
            let case = generate(&cfg);
            let gold = &case.documents[case.gold_doc_index];
            assert!(gold.contains(&case.question), "seed {seed}: phrase not contiguous");
        }
    }

    #[test]
    fn distractors_carry_the_terms_but_never_adjacent_pairs() {
        let cfg = SynthConfig { seed: 7, distractor_terms: true, ..Default::default() };
        let case = generate(&cfg);
        let terms: Vec<&str> = case.question.split(' ').collect();
        let term_set: HashSet<&str> = terms.iter().copied().collect();
        for (i, doc) in case.documents.iter().enumerate() {
            if i == case.gold_doc_index {
                continue;
            }
            let words: Vec<&str> = doc.split(' ').collect();
            for t in &terms {
                assert_eq!(words.iter().filter(|w| *w == t).count(), 1, "doc {i} term {t}");
            }
            for pair in words.windows(2) {
                assert!(
                    !(term_set.contains(pair[0]) && term_set.contains(pair[1])),
                    "doc {i} has adjacent terms {pair:?}"
                );
            }
        }
    }

    #[test]
    fn filler_distractors_have_no_terms_at_all() {
        let cfg = SynthConfig { seed: 3, distractor_terms: false, ..Default::default() };
        let case = generate(&cfg);
        let term_set: HashSet<&str> = case.question.split(' ').collect();
        for (i, doc) in case.documents.iter().enumerate() {
            if i == case.gold_doc_index {
                continue;
            }
            assert!(doc.split(' ').all(|w| !term_set.contains(w)), "doc {i} leaks a term");
        }
    }

    #[test]
    fn documents_have_equal_token_counts() {
        let cfg = SynthConfig { seed: 11, distractor_terms: true, ..Default::default() };
        let case = generate(&cfg);
        for doc in &case.documents {
            assert_eq!(doc.split(' ').count(), cfg.doc_tokens);
        }
    }

    #[test]
    fn sized_generation_hits_the_exact_total() {
        let cfg = SynthConfig { seed: 5, distractor_terms: true, ..Default::default() };
        let case = generate_with_total(&cfg, 2946);
        let count = |s: &str| s.split_whitespace().count();
        let total = count(&case.instruction)
            + case.documents.iter().map(|d| count(d)).sum::<usize>()
            + count(&case.question);
        assert_eq!(total, 2946);
    }

    #[test]
    fn scattered_positions_are_sorted_and_gapped() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..200 {
            let pos = scattered_positions(&mut rng, 20, 6);
            assert_eq!(pos.len(), 6);
            assert!(pos.windows(2).all(|w| w[1] >= w[0] + 2), "{pos:?}");
            assert!(*pos.last().unwrap() < 20);
        }
    }
}
