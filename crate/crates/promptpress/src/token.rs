//! Tokenization model shared by every stage: byte-offset token sequences over immutable
//! source text, pluggable tokenization schemes, and section identities.
//!
//! Invariants carried by [`TokenSequence`]: spans are non-empty, strictly increasing,
//! non-overlapping, aligned to UTF-8 boundaries, and in-bounds. Concatenating the covered
//! spans plus the inter-token gaps reproduces the source text byte-for-byte.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Where a token sequence came from inside a structured prompt.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum SectionId {
    Instruction,
    Document(u32),
    Question,
    /// The restrictive statement appended to the question for document ranking.
    /// Never emitted into compressed output.
    Restrict,
    /// Free-form source (raw text files fed to recovery, test fixtures).
    Custom(String),
}

impl fmt::Display for SectionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SectionId::Instruction => write!(f, "ins"),
            SectionId::Document(k) => write!(f, "doc:{k}"),
            SectionId::Question => write!(f, "que"),
            SectionId::Restrict => write!(f, "restrict"),
            SectionId::Custom(s) => write!(f, "{s}"),
        }
    }
}

impl FromStr for SectionId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "ins" => SectionId::Instruction,
            "que" => SectionId::Question,
            "restrict" => SectionId::Restrict,
            _ => match s.strip_prefix("doc:") {
                Some(k) => SectionId::Document(
                    k.parse()
                        .map_err(|_| Error::InvalidTokens(format!("bad section id `{s}`")))?,
                ),
                None => SectionId::Custom(s.to_string()),
            },
        })
    }
}

impl Serialize for SectionId {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SectionId {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Tokenized text with byte spans into the original source.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenSequence {
    source: String,
    spans: Vec<(u32, u32)>,
    section: SectionId,
    scheme: String,
}

impl TokenSequence {
    /// Build from pre-computed spans, validating every sequence invariant.
    pub fn from_parts(
        source: String,
        spans: Vec<(u32, u32)>,
        section: SectionId,
        scheme: impl Into<String>,
    ) -> Result<Self> {
        let mut prev_end = 0u32;
        for &(s, e) in &spans {
            if s < prev_end || e <= s || e as usize > source.len() {
                return Err(Error::InvalidTokens(format!(
                    "span ({s},{e}) out of order or out of bounds (len {})",
                    source.len()
                )));
            }
            if !source.is_char_boundary(s as usize) || !source.is_char_boundary(e as usize) {
                return Err(Error::InvalidTokens(format!(
                    "span ({s},{e}) not aligned to a character boundary"
                )));
            }
            prev_end = e;
        }
        Ok(TokenSequence { source, spans, section, scheme: scheme.into() })
    }

    /// Build from bare token strings; the source text becomes the single-space join.
    pub fn from_tokens(
        tokens: impl IntoIterator<Item = impl AsRef<str>>,
        section: SectionId,
    ) -> Self {
        let mut source = String::new();
        let mut spans = Vec::new();
        for t in tokens {
            let t = t.as_ref();
            if !source.is_empty() {
                source.push(' ');
            }
            let start = source.len() as u32;
            source.push_str(t);
            spans.push((start, source.len() as u32));
        }
        TokenSequence { source, spans, section, scheme: "tokens".into() }
    }

    pub fn empty(section: SectionId) -> Self {
        TokenSequence { source: String::new(), spans: Vec::new(), section, scheme: "tokens".into() }
    }

    pub fn len(&self) -> usize {
        self.spans.len()
    }

    pub fn is_empty(&self) -> bool {
        self.spans.is_empty()
    }

    pub fn section(&self) -> &SectionId {
        &self.section
    }

    pub fn scheme(&self) -> &str {
        &self.scheme
    }

    /// The full source text this sequence was tokenized from.
    pub fn text(&self) -> &str {
        &self.source
    }

    pub fn token(&self, i: usize) -> &str {
        let (s, e) = self.spans[i];
        &self.source[s as usize..e as usize]
    }

    pub fn span(&self, i: usize) -> (u32, u32) {
        self.spans[i]
    }

    pub fn tokens(&self) -> impl Iterator<Item = &str> {
        self.spans.iter().map(move |&(s, e)| &self.source[s as usize..e as usize])
    }

    pub fn to_vec(&self) -> Vec<String> {
        self.tokens().map(str::to_string).collect()
    }

    /// Source bytes between token `i` and token `i + 1` (empty for the last token).
    pub fn gap_after(&self, i: usize) -> &str {
        let end = self.spans[i].1 as usize;
        match self.spans.get(i + 1) {
            Some(&(next, _)) => &self.source[end..next as usize],
            None => "",
        }
    }

    /// Source slice covering tokens `first..=last` including interior gaps.
    pub fn window_text(&self, first: usize, last: usize) -> &str {
        let s = self.spans[first].0 as usize;
        let e = self.spans[last].1 as usize;
        &self.source[s..e]
    }

    /// True when token `i + 1` starts exactly where token `i` ends in the source.
    pub fn adjacent(&self, i: usize) -> bool {
        match (self.spans.get(i), self.spans.get(i + 1)) {
            (Some(&(_, e)), Some(&(s, _))) => e == s,
            _ => false,
        }
    }
}

/// A tokenization scheme: deterministic text → spans.
pub trait Scheme: Send + Sync {
    fn name(&self) -> &str;
    fn spans(&self, text: &str) -> Vec<(u32, u32)>;
}

/// Unicode-whitespace split with every punctuation/symbol character detached as its own token.
/// Alphanumeric runs stay together, so `2019` is one token but `don't` is three.
pub struct WhitespaceScheme;

impl Scheme for WhitespaceScheme {
    fn name(&self) -> &str {
        "whitespace"
    }

    fn spans(&self, text: &str) -> Vec<(u32, u32)> {
        let mut spans = Vec::new();
        let mut run_start: Option<usize> = None;
        for (i, ch) in text.char_indices() {
            if ch.is_alphanumeric() {
                if run_start.is_none() {
                    run_start = Some(i);
                }
                continue;
            }
            if let Some(s) = run_start.take() {
                spans.push((s as u32, i as u32));
            }
            if !ch.is_whitespace() {
                spans.push((i as u32, (i + ch.len_utf8()) as u32));
            }
        }
        if let Some(s) = run_start {
            spans.push((s as u32, text.len() as u32));
        }
        spans
    }
}

/// Every non-whitespace character is a token. Used by recovery fixtures that need
/// digit-level granularity.
pub struct CharScheme;

impl Scheme for CharScheme {
    fn name(&self) -> &str {
        "char"
    }

    fn spans(&self, text: &str) -> Vec<(u32, u32)> {
        text.char_indices()
            .filter(|(_, ch)| !ch.is_whitespace())
            .map(|(i, ch)| (i as u32, (i + ch.len_utf8()) as u32))
            .collect()
    }
}

/// External subword vocabulary: greedy longest-match inside whitespace-delimited segments,
/// falling back to single characters. Vocabularies are consumed, never produced.
pub struct VocabScheme {
    name: String,
    vocab: HashMap<String, ()>,
    max_chars: usize,
}

impl VocabScheme {
    pub fn new(name: impl Into<String>, entries: impl IntoIterator<Item = impl Into<String>>) -> Self {
        let vocab: HashMap<String, ()> =
            entries.into_iter().map(|e| (e.into(), ())).filter(|(e, _)| !e.is_empty()).collect();
        let max_chars = vocab.keys().map(|e| e.chars().count()).max().unwrap_or(1);
        VocabScheme { name: name.into(), vocab, max_chars }
    }

    pub fn from_file(name: impl Into<String>, path: &str) -> Result<Self> {
        let body = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Ok(Self::new(name, body.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from)))
    }
}

impl Scheme for VocabScheme {
    fn name(&self) -> &str {
        &self.name
    }

    fn spans(&self, text: &str) -> Vec<(u32, u32)> {
        let mut spans = Vec::new();
        // Segment boundaries come from whitespace; matching never crosses them.
        let mut seg_start = None;
        let flush = |start: usize, end: usize, spans: &mut Vec<(u32, u32)>| {
            let seg = &text[start..end];
            let chars: Vec<usize> = seg
                .char_indices()
                .map(|(i, _)| i)
                .chain(std::iter::once(seg.len()))
                .collect();
            let mut ci = 0;
            while ci + 1 < chars.len() {
                let remaining = chars.len() - 1 - ci;
                let mut matched = 1;
                for take in (1..=self.max_chars.min(remaining)).rev() {
                    if self.vocab.contains_key(&seg[chars[ci]..chars[ci + take]]) {
                        matched = take;
                        break;
                    }
                }
                spans.push(((start + chars[ci]) as u32, (start + chars[ci + matched]) as u32));
                ci += matched;
            }
        };
        for (i, ch) in text.char_indices() {
            if ch.is_whitespace() {
                if let Some(s) = seg_start.take() {
                    flush(s, i, &mut spans);
                }
            } else if seg_start.is_none() {
                seg_start = Some(i);
            }
        }
        if let Some(s) = seg_start {
            flush(s, text.len(), &mut spans);
        }
        spans
    }
}

/// Registry of tokenization schemes, preloaded with the builtins.
#[derive(Clone)]
pub struct SchemeRegistry {
    schemes: HashMap<String, Arc<dyn Scheme>>,
}

impl Default for SchemeRegistry {
    fn default() -> Self {
        let mut reg = SchemeRegistry { schemes: HashMap::new() };
        reg.register(Arc::new(WhitespaceScheme));
        reg.register(Arc::new(CharScheme));
        reg
    }
}

impl SchemeRegistry {
    pub fn register(&mut self, scheme: Arc<dyn Scheme>) {
        self.schemes.insert(scheme.name().to_string(), scheme);
    }

    pub fn get(&self, id: &str) -> Result<Arc<dyn Scheme>> {
        self.schemes.get(id).cloned().ok_or_else(|| Error::UnknownScheme(id.to_string()))
    }

    pub fn tokenize(&self, text: &str, scheme_id: &str, section: SectionId) -> Result<TokenSequence> {
        let scheme = self.get(scheme_id)?;
        let spans = scheme.spans(text);
        TokenSequence::from_parts(text.to_string(), spans, section, scheme.name())
    }
}

/// Tokenize with a scheme instance directly (no registry lookup).
pub fn tokenize_with(scheme: &dyn Scheme, text: &str, section: SectionId) -> TokenSequence {
    TokenSequence::from_parts(text.to_string(), scheme.spans(text), section, scheme.name())
        .expect("scheme produced invalid spans")
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    #[test]
    fn offsets_cover_words_exactly() {
        let ts = tokenize_with(&WhitespaceScheme, "Nobel Prize 1901", SectionId::Question);
        assert_eq!(ts.to_vec(), ["Nobel", "Prize", "1901"]);
        assert_eq!(ts.span(0), (0, 5));
        assert_eq!(ts.span(1), (6, 11));
        assert_eq!(ts.span(2), (12, 16));
    }

    #[test]
    fn empty_input_empty_output() {
        let ts = tokenize_with(&WhitespaceScheme, "", SectionId::Instruction);
        assert!(ts.is_empty());
        assert_eq!(ts.text(), "");
    }

    #[test]
    fn punctuation_is_detached() {
        let ts = tokenize_with(&WhitespaceScheme, "don't stop.", SectionId::Question);
        assert_eq!(ts.to_vec(), ["don", "'", "t", "stop", "."]);
        // adjacency is visible through the spans: `don` and `'` touch, `t` and `stop` do not
        assert!(ts.adjacent(0));
        assert!(!ts.adjacent(2));
    }

    #[test]
    fn char_scheme_splits_digits() {
        let ts = tokenize_with(&CharScheme, "209", SectionId::Custom("resp".into()));
        assert_eq!(ts.to_vec(), ["2", "0", "9"]);
    }

    #[test]
    fn unknown_scheme_is_an_error() {
        let reg = SchemeRegistry::default();
        assert!(matches!(
            reg.tokenize("x", "nope", SectionId::Question),
            Err(Error::UnknownScheme(_))
        ));
    }

    #[test]
    fn vocab_scheme_greedy_longest_match() {
        let scheme = VocabScheme::new("v", ["Wilhelm", "Con", "rad"]);
        let ts = tokenize_with(&scheme, "Wilhelmrad Conrad", SectionId::Custom("t".into()));
        assert_eq!(ts.to_vec(), ["Wilhelm", "rad", "Con", "rad"]);
    }

    // Covered spans plus inter-token gaps must reproduce the input byte-for-byte, across
    // random ASCII inputs (spec: 1,000 strings).
    #[test]
    fn roundtrip_random_ascii() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..1000 {
            let len = rng.gen_range(0..60);
            let text: String = (0..len)
                .map(|_| {
                    let c = rng.gen_range(32u8..127) as char;
                    c
                })
                .collect();
            for scheme in [&WhitespaceScheme as &dyn Scheme, &CharScheme] {
                let ts = tokenize_with(scheme, &text, SectionId::Question);
                // leading bytes before the first token
                let mut rebuilt = match ts.len() {
                    0 => text.clone(),
                    _ => text[..ts.span(0).0 as usize].to_string(),
                };
                for i in 0..ts.len() {
                    rebuilt.push_str(ts.token(i));
                    rebuilt.push_str(ts.gap_after(i));
                }
                if ts.len() > 0 {
                    rebuilt.push_str(&text[ts.span(ts.len() - 1).1 as usize..]);
                }
                assert_eq!(rebuilt, text, "scheme {}", scheme.name());
            }
        }
    }

    #[test]
    fn from_parts_rejects_bad_spans() {
        assert!(TokenSequence::from_parts("abc".into(), vec![(0, 2), (1, 3)], SectionId::Question, "t").is_err());
        assert!(TokenSequence::from_parts("abc".into(), vec![(0, 0)], SectionId::Question, "t").is_err());
        assert!(TokenSequence::from_parts("abc".into(), vec![(0, 9)], SectionId::Question, "t").is_err());
        // mid-codepoint boundary
        assert!(TokenSequence::from_parts("é".into(), vec![(0, 1)], SectionId::Question, "t").is_err());
    }

    #[test]
    fn section_id_string_forms() {
        for (id, s) in [
            (SectionId::Instruction, "ins"),
            (SectionId::Document(3), "doc:3"),
            (SectionId::Question, "que"),
            (SectionId::Restrict, "restrict"),
        ] {
            assert_eq!(id.to_string(), s);
            assert_eq!(s.parse::<SectionId>().unwrap(), id);
        }
    }
}
