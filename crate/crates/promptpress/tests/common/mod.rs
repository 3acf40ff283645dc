//! Brute-force recovery oracle shared by the fuzz suite and the acceptance gate.
//!
//! Re-implements the recovery contract with nothing but string comparison and linear
//! scans: greedy leftmost-longest matching of response tokens against each section's
//! retained tokens, window expansion across interior gaps, and reassembly with the
//! response's own separator bytes.

use rand::rngs::StdRng;
use rand::seq::SliceRandom;
use rand::Rng;

use promptpress::token::{tokenize_with, WhitespaceScheme};
use promptpress::{SectionId, TokenSequence};

const WORDS: &[&str] =
    &["ash", "birch", "cedar", "dune", "elm", "fern", "grove", "heath", "ash", "fern"];

pub struct Case {
    pub sections: Vec<(TokenSequence, Vec<usize>)>,
    pub response: TokenSequence,
    pub min_match: usize,
}

pub fn random_case(rng: &mut StdRng) -> Case {
    let n_sections = rng.gen_range(1..=3u32);
    let mut sections = Vec::new();
    for slot in 0..n_sections {
        let len = rng.gen_range(1..=24);
        let words: Vec<&str> = (0..len).map(|_| *WORDS.choose(rng).unwrap()).collect();
        let seq = tokenize_with(&WhitespaceScheme, &words.join(" "), SectionId::Document(slot));
        let mut retained: Vec<usize> = (0..len).filter(|_| rng.gen_bool(0.55)).collect();
        if retained.is_empty() && rng.gen_bool(0.7) {
            retained.push(rng.gen_range(0..len));
        }
        sections.push((seq, retained));
    }

    // response tokens: vocabulary noise, splices of actually-retained runs, and OOV
    let mut tokens: Vec<String> = Vec::new();
    let target_len = rng.gen_range(0..=12);
    while tokens.len() < target_len {
        match rng.gen_range(0..100) {
            0..=54 => tokens.push((*WORDS.choose(rng).unwrap()).to_string()),
            55..=84 => {
                let (seq, retained) = &sections[rng.gen_range(0..sections.len())];
                if retained.is_empty() {
                    continue;
                }
                let k = rng.gen_range(0..retained.len());
                let run = rng.gen_range(1..=4.min(retained.len() - k));
                tokens.extend(retained[k..k + run].iter().map(|&i| seq.token(i).to_string()));
            }
            _ => tokens.push(format!("zzq{}", rng.gen_range(0..4))),
        }
    }
    tokens.truncate(target_len);

    // fabricated separators, including empty ones that fuse neighbours in the text
    let gaps = ["", " ", "  ", ", "];
    let mut text = String::new();
    let mut spans = Vec::new();
    for (i, tok) in tokens.iter().enumerate() {
        if i > 0 {
            text.push_str(gaps[rng.gen_range(0..gaps.len())]);
        }
        let start = text.len() as u32;
        text.push_str(tok);
        spans.push((start, text.len() as u32));
    }
    let response =
        TokenSequence::from_parts(text, spans, SectionId::Custom("response".into()), "whitespace")
            .unwrap();

    Case { sections, response, min_match: rng.gen_range(1..=3) }
}

/// (section slot, index into that section's retained list) of the leftmost occurrence of
/// the longest prefix of `resp[start..]` that runs contiguously through retained tokens.
fn oracle_best_match(
    sections: &[(TokenSequence, Vec<usize>)],
    resp: &[String],
    start: usize,
) -> (usize, Option<(usize, usize)>) {
    let mut best_len = 0usize;
    let mut best = None;
    for (slot, (seq, retained)) in sections.iter().enumerate() {
        for k in 0..retained.len() {
            let mut l = 0usize;
            while k + l < retained.len()
                && start + l < resp.len()
                && seq.token(retained[k + l]) == resp[start + l]
            {
                l += 1;
            }
            if l > best_len {
                best_len = l;
                best = Some((slot, k));
            }
        }
    }
    (best_len, best)
}

pub struct OracleSegment {
    pub response_range: (usize, usize),
    pub origin: Option<(SectionId, usize, usize)>,
    pub text: String,
}

pub fn oracle_recover(case: &Case) -> (String, Vec<OracleSegment>) {
    let resp: Vec<String> = case.response.tokens().map(str::to_string).collect();
    let mut segments = Vec::new();
    let mut i = 0usize;
    while i < resp.len() {
        let (len, best) = oracle_best_match(&case.sections, &resp, i);
        if len >= case.min_match {
            let (slot, k) = best.unwrap();
            let (seq, retained) = &case.sections[slot];
            let o_first = retained[k];
            let o_last = retained[k + len - 1];
            // a window that skips dropped tokens extends right through the trailing
            // dropped run, up to just before the next retained token
            let o_end = if o_last - o_first + 1 > len {
                match retained.iter().find(|&&r| r > o_last) {
                    Some(&next_retained) => next_retained - 1,
                    None => seq.len() - 1,
                }
            } else {
                o_last
            };
            let (a, _) = seq.span(o_first);
            let (_, b) = seq.span(o_end);
            segments.push(OracleSegment {
                response_range: (i, i + len - 1),
                origin: Some((seq.section().clone(), o_first, o_end)),
                text: seq.text()[a as usize..b as usize].to_string(),
            });
            i += len;
        } else {
            segments.push(OracleSegment {
                response_range: (i, i),
                origin: None,
                text: resp[i].clone(),
            });
            i += 1;
        }
    }

    let mut text = String::new();
    for (n, seg) in segments.iter().enumerate() {
        if n > 0 {
            let prev_last = segments[n - 1].response_range.1;
            let (_, gap_from) = case.response.span(prev_last);
            let (gap_to, _) = case.response.span(seg.response_range.0);
            text.push_str(&case.response.text()[gap_from as usize..gap_to as usize]);
        }
        text.push_str(&seg.text);
    }
    (text, segments)
}

/// Run `rounds` random cases and panic on the first divergence from the oracle.
pub fn fuzz_against_oracle(seed: u64, rounds: usize) {
    use rand::SeedableRng;
    let mut rng = StdRng::seed_from_u64(seed);
    for round in 0..rounds {
        let case = random_case(&mut rng);
        let index =
            promptpress::RecoveryIndex::from_sections(case.sections.clone(), case.min_match)
                .unwrap();
        let got = index.recover(&case.response).unwrap();
        let (want_text, want_segments) = oracle_recover(&case);

        assert_eq!(got.text, want_text, "round {round}: text diverged");
        assert_eq!(
            got.segments.len(),
            want_segments.len(),
            "round {round}: segment count diverged"
        );
        for (g, w) in got.segments.iter().zip(&want_segments) {
            assert_eq!(g.response_range, w.response_range, "round {round}");
            assert_eq!(g.origin, w.origin, "round {round}");
            assert_eq!(g.text, w.text, "round {round}");
        }
    }
}
