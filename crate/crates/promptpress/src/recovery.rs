//! Entity recovery: map spans of a model response back to the original prompt text.
//!
//! Compression can fuse subword neighbours ("Wilhelm" + "rad" from a pruned
//! "Wilhelm Conrad Röntgen"), and the model will echo the fused form. The index holds every
//! retained token with its provenance; response spans that match retained runs are replaced
//! by the covering original window, so dropped tokens reappear.
//!
//! Matching runs over a suffix automaton of the retained-token stream. Per-section sentinel
//! symbols separate sections so a match can never stitch two sections together. Each
//! automaton state carries the end position of its first occurrence, which makes ties
//! resolve to the leftmost occurrence deterministically.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::prompt::{CompressedPrompt, StructuredPrompt};
use crate::token::{Scheme, SectionId, TokenSequence, tokenize_with};

/// One section of the original prompt plus the indices compression retained from it.
#[derive(Debug, Clone)]
struct OriginalSection {
    seq: TokenSequence,
    retained: Vec<usize>,
}

/// One piece of a recovered response: either a literal run of response tokens or a span
/// replaced by an original window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecoveredSegment {
    /// Inclusive range of response token indices this piece covers.
    pub response_range: (usize, usize),
    /// Replacement provenance: section and the inclusive original token window. `None`
    /// means the response tokens passed through untouched.
    pub origin: Option<(SectionId, usize, usize)>,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recovered {
    pub text: String,
    pub segments: Vec<RecoveredSegment>,
}

struct SamState {
    len: usize,
    link: isize,
    /// End position (in the indexed stream) of this state's first occurrence.
    first_end: usize,
    next: HashMap<u32, usize>,
}

struct Sam {
    states: Vec<SamState>,
    last: usize,
}

impl Sam {
    fn new() -> Self {
        Sam {
            states: vec![SamState { len: 0, link: -1, first_end: usize::MAX, next: HashMap::new() }],
            last: 0,
        }
    }

    fn extend(&mut self, sym: u32, pos: usize) {
        let cur = self.states.len();
        let cur_len = self.states[self.last].len + 1;
        self.states.push(SamState { len: cur_len, link: -1, first_end: pos, next: HashMap::new() });

        let mut p = self.last as isize;
        while p >= 0 && !self.states[p as usize].next.contains_key(&sym) {
            self.states[p as usize].next.insert(sym, cur);
            p = self.states[p as usize].link;
        }
        if p < 0 {
            self.states[cur].link = 0;
        } else {
            let q = self.states[p as usize].next[&sym];
            if self.states[p as usize].len + 1 == self.states[q].len {
                self.states[cur].link = q as isize;
            } else {
                // split: the clone inherits q's transitions and, crucially, q's first
                // occurrence — its strings occurred wherever q's longest did.
                let clone = self.states.len();
                let clone_state = SamState {
                    len: self.states[p as usize].len + 1,
                    link: self.states[q].link,
                    first_end: self.states[q].first_end,
                    next: self.states[q].next.clone(),
                };
                self.states.push(clone_state);
                while p >= 0 && self.states[p as usize].next.get(&sym) == Some(&q) {
                    self.states[p as usize].next.insert(sym, clone);
                    p = self.states[p as usize].link;
                }
                self.states[q].link = clone as isize;
                self.states[cur].link = clone as isize;
            }
        }
        self.last = cur;
    }
}

/// Provenance-indexed view of one compression run.
pub struct RecoveryIndex {
    scheme: Option<String>,
    sections: Vec<OriginalSection>,
    /// Interned retained tokens with per-section sentinels between sections.
    stream: Vec<u32>,
    /// Parallel to `stream`: `(section slot, original token index)`, `None` on sentinels.
    origins: Vec<Option<(usize, usize)>>,
    ids: HashMap<String, u32>,
    sam: Sam,
    min_match_tokens: usize,
}

impl RecoveryIndex {
    /// Index a compression run. Sections appear in the compressed prompt's emission order.
    pub fn build(
        original: &StructuredPrompt,
        compressed: &CompressedPrompt,
        min_match_tokens: usize,
    ) -> Result<Self> {
        let mut sections = Vec::with_capacity(compressed.sections.len());
        for retention in &compressed.sections {
            let seq = original.section(&retention.section).ok_or_else(|| {
                Error::InvalidTokens(format!("unknown section {}", retention.section))
            })?;
            sections.push((seq.clone(), retention.retained.clone()));
        }
        Self::from_sections(sections, min_match_tokens)
    }

    pub fn from_sections(
        sections: Vec<(TokenSequence, Vec<usize>)>,
        min_match_tokens: usize,
    ) -> Result<Self> {
        let mut scheme: Option<String> = None;
        for (seq, retained) in &sections {
            match &scheme {
                None => scheme = Some(seq.scheme().to_string()),
                Some(s) if s != seq.scheme() => {
                    return Err(Error::SchemeMismatch {
                        left: s.clone(),
                        right: seq.scheme().to_string(),
                    })
                }
                Some(_) => {}
            }
            let mut prev: Option<usize> = None;
            for &i in retained {
                if i >= seq.len() || prev.is_some_and(|p| p >= i) {
                    return Err(Error::InvalidTokens(format!(
                        "retention for {} not strictly increasing in bounds",
                        seq.section()
                    )));
                }
                prev = Some(i);
            }
        }

        let mut ids: HashMap<String, u32> = HashMap::new();
        let mut stream = Vec::new();
        let mut origins = Vec::new();
        let sections: Vec<OriginalSection> = sections
            .into_iter()
            .map(|(seq, retained)| OriginalSection { seq, retained })
            .collect();

        for (slot, section) in sections.iter().enumerate() {
            for &i in &section.retained {
                let n = ids.len() as u32;
                let id = *ids.entry(section.seq.token(i).to_string()).or_insert(n);
                stream.push(id);
                origins.push(Some((slot, i)));
            }
            // sentinel: unique per section, unreachable from response tokens
            stream.push(u32::MAX - slot as u32);
            origins.push(None);
        }
        debug_assert!(ids.len() < (u32::MAX / 2) as usize);

        let mut sam = Sam::new();
        for (pos, &sym) in stream.iter().enumerate() {
            sam.extend(sym, pos);
        }

        Ok(RecoveryIndex {
            scheme,
            sections,
            stream,
            origins,
            ids,
            sam,
            min_match_tokens: min_match_tokens.max(1),
        })
    }

    /// Longest run of `ids[start..]` present in the indexed stream, with the automaton
    /// state reached. Walking transitions lands in the state holding that exact run.
    fn longest_match_from(&self, ids: &[Option<u32>], start: usize) -> (usize, usize) {
        let mut state = 0usize;
        let mut len = 0usize;
        for id in &ids[start..] {
            let Some(id) = id else { break };
            let Some(&next) = self.sam.states[state].next.get(id) else { break };
            state = next;
            len += 1;
        }
        (len, state)
    }

    /// Map one matched stream span back to original text. The window covers the matched
    /// origins; if any origin inside was dropped, the window extends right through the
    /// trailing dropped run up to the next retained token (or the section's end).
    fn expand(&self, p0: usize, p1: usize) -> (SectionId, usize, usize, String) {
        let (slot, o_first) = self.origins[p0].expect("match cannot cover a sentinel");
        let (slot1, o_last) = self.origins[p1].expect("match cannot cover a sentinel");
        debug_assert_eq!(slot, slot1, "sentinels keep matches within one section");
        let section = &self.sections[slot];

        let match_len = p1 - p0 + 1;
        let ext_last = if o_last - o_first + 1 > match_len {
            let after = section.retained.partition_point(|&r| r <= o_last);
            match section.retained.get(after) {
                Some(&next_retained) => next_retained - 1,
                None => section.seq.len() - 1,
            }
        } else {
            o_last
        };
        let text = section.seq.window_text(o_first, ext_last).to_string();
        (section.seq.section().clone(), o_first, ext_last, text)
    }

    /// Rewrite a response: greedy leftmost-longest matches against the retained stream are
    /// replaced by their covering original windows, everything else passes through with the
    /// response's own separator bytes.
    pub fn recover(&self, response: &TokenSequence) -> Result<Recovered> {
        if let Some(scheme) = &self.scheme {
            if response.scheme() != scheme {
                return Err(Error::SchemeMismatch {
                    left: scheme.clone(),
                    right: response.scheme().to_string(),
                });
            }
        }

        let ids: Vec<Option<u32>> =
            response.tokens().map(|t| self.ids.get(t).copied()).collect();

        let mut segments: Vec<RecoveredSegment> = Vec::new();
        let mut i = 0;
        while i < ids.len() {
            let (len, state) = self.longest_match_from(&ids, i);
            if len >= self.min_match_tokens {
                let end = self.sam.states[state].first_end;
                let start = end + 1 - len;
                debug_assert!(self.stream[start..=end]
                    .iter()
                    .zip(&ids[i..i + len])
                    .all(|(s, r)| Some(*s) == *r));
                let (section, o_first, o_last, text) = self.expand(start, end);
                segments.push(RecoveredSegment {
                    response_range: (i, i + len - 1),
                    origin: Some((section, o_first, o_last)),
                    text,
                });
                i += len;
            } else {
                segments.push(RecoveredSegment {
                    response_range: (i, i),
                    origin: None,
                    text: response.token(i).to_string(),
                });
                i += 1;
            }
        }

        let mut text = String::new();
        for (n, seg) in segments.iter().enumerate() {
            if n > 0 {
                // segments tile the response, so the gap before this one is the response's
                // own separator after the previous segment's last token
                text.push_str(response.gap_after(segments[n - 1].response_range.1));
            }
            text.push_str(&seg.text);
        }
        Ok(Recovered { text, segments })
    }

    /// Tokenize `text` with `scheme` and recover. The scheme must be the one the index was
    /// built over.
    pub fn recover_text(&self, text: &str, scheme: &dyn Scheme) -> Result<Recovered> {
        let response = tokenize_with(scheme, text, SectionId::Custom("response".into()));
        self.recover(&response)
    }

    /// Provenance-free fallback: find the shortest original window containing the response
    /// tokens (those present in the section at all) as a subsequence; leftmost window wins
    /// ties, earlier sections win across sections. Returns the response verbatim when no
    /// section shares a token with it.
    pub fn recover_by_window_search(&self, response: &TokenSequence) -> Result<Recovered> {
        if let Some(scheme) = &self.scheme {
            if response.scheme() != scheme {
                return Err(Error::SchemeMismatch {
                    left: scheme.clone(),
                    right: response.scheme().to_string(),
                });
            }
        }

        let mut best: Option<(usize, usize, usize)> = None; // (window len, slot, start)
        for (slot, section) in self.sections.iter().enumerate() {
            let vocab: std::collections::HashSet<&str> = section.seq.tokens().collect();
            let needle: Vec<&str> =
                response.tokens().filter(|t| vocab.contains(t)).collect();
            if needle.is_empty() {
                continue;
            }
            if let Some((start, end)) = min_window_subsequence(&section.seq, &needle) {
                let len = end - start + 1;
                if best.is_none_or(|(blen, _, _)| len < blen) {
                    best = Some((len, slot, start));
                }
            }
        }

        match best {
            Some((len, slot, start)) => {
                let section = &self.sections[slot];
                let end = start + len - 1;
                let text = section.seq.window_text(start, end).to_string();
                let last = response.len().saturating_sub(1);
                Ok(Recovered {
                    text: text.clone(),
                    segments: vec![RecoveredSegment {
                        response_range: (0, last),
                        origin: Some((section.seq.section().clone(), start, end)),
                        text,
                    }],
                })
            }
            None => {
                let last = response.len().saturating_sub(1);
                Ok(Recovered {
                    text: response.text().to_string(),
                    segments: if response.is_empty() {
                        Vec::new()
                    } else {
                        vec![RecoveredSegment {
                            response_range: (0, last),
                            origin: None,
                            text: response.text().to_string(),
                        }]
                    },
                })
            }
        }
    }
}

/// Shortest window of `haystack` containing `needle` as a subsequence (inclusive token
/// indices), leftmost on ties. O(n·m) scan, fine at prompt scale.
pub fn min_window_subsequence(
    haystack: &TokenSequence,
    needle: &[&str],
) -> Option<(usize, usize)> {
    if needle.is_empty() {
        return None;
    }
    let mut best: Option<(usize, usize)> = None;
    for start in 0..haystack.len() {
        if haystack.token(start) != needle[0] {
            continue;
        }
        let mut j = 0;
        let mut end = start;
        for k in start..haystack.len() {
            if haystack.token(k) == needle[j] {
                j += 1;
                end = k;
                if j == needle.len() {
                    break;
                }
            }
        }
        if j == needle.len()
            && best.is_none_or(|(bs, be)| end - start < be - bs)
        {
            best = Some((start, end));
        }
    }
    best
}
