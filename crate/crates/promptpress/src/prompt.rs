//! Prompt containers: the structured input (instruction / documents / question / restrictive
//! statement) and the compressed output with its provenance map.

use serde::de::{SeqAccess, Visitor};
use serde::ser::SerializeTuple;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::token::{SchemeRegistry, SectionId, TokenSequence};

/// Default restrictive statement appended after the question when ranking documents.
pub const DEFAULT_RESTRICT: &str =
    "We can get the answer to this question in the given documents.";

/// A prompt split into the sections the compressor treats differently.
/// The restrictive statement participates in document ranking only; it is never emitted.
#[derive(Debug, Clone)]
pub struct StructuredPrompt {
    pub instruction: TokenSequence,
    pub documents: Vec<TokenSequence>,
    pub question: TokenSequence,
    pub restrict: TokenSequence,
}

impl StructuredPrompt {
    pub fn from_texts(
        registry: &SchemeRegistry,
        scheme_id: &str,
        instruction: &str,
        documents: &[impl AsRef<str>],
        question: &str,
        restrict: &str,
    ) -> Result<Self> {
        Ok(StructuredPrompt {
            instruction: registry.tokenize(instruction, scheme_id, SectionId::Instruction)?,
            documents: documents
                .iter()
                .enumerate()
                .map(|(k, d)| registry.tokenize(d.as_ref(), scheme_id, SectionId::Document(k as u32)))
                .collect::<Result<_>>()?,
            question: registry.tokenize(question, scheme_id, SectionId::Question)?,
            restrict: registry.tokenize(restrict, scheme_id, SectionId::Restrict)?,
        })
    }

    /// Token count of everything that can appear in output (restrict excluded).
    pub fn original_tokens(&self) -> usize {
        self.instruction.len()
            + self.documents.iter().map(TokenSequence::len).sum::<usize>()
            + self.question.len()
    }

    pub fn section(&self, id: &SectionId) -> Option<&TokenSequence> {
        match id {
            SectionId::Instruction => Some(&self.instruction),
            SectionId::Question => Some(&self.question),
            SectionId::Restrict => Some(&self.restrict),
            SectionId::Document(k) => self.documents.get(*k as usize),
            SectionId::Custom(_) => None,
        }
    }

    /// All section texts joined by newlines — the corpus the builtin scorer fits itself to
    /// when none is configured.
    pub fn corpus_text(&self) -> String {
        let mut out = String::from(self.instruction.text());
        for d in &self.documents {
            out.push('\n');
            out.push_str(d.text());
        }
        out.push('\n');
        out.push_str(self.question.text());
        out.push('\n');
        out.push_str(self.restrict.text());
        out
    }
}

/// One emitted token's position in the original prompt.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct OriginRef {
    pub section: SectionId,
    pub index: usize,
}

// Serialized as a compact `["doc:3", 17]` pair in the JSONL output.
impl Serialize for OriginRef {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        let mut t = ser.serialize_tuple(2)?;
        t.serialize_element(&self.section)?;
        t.serialize_element(&self.index)?;
        t.end()
    }
}

impl<'de> Deserialize<'de> for OriginRef {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = OriginRef;
            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("[section, index] pair")
            }
            fn visit_seq<A: SeqAccess<'de>>(self, mut seq: A) -> std::result::Result<OriginRef, A::Error> {
                let section: SectionId =
                    seq.next_element()?.ok_or_else(|| serde::de::Error::custom("missing section"))?;
                let index: usize =
                    seq.next_element()?.ok_or_else(|| serde::de::Error::custom("missing index"))?;
                Ok(OriginRef { section, index })
            }
        }
        de.deserialize_tuple(2, V)
    }
}

/// Which token indices of one section survived compression, in emission order.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SectionRetention {
    pub section: SectionId,
    pub retained: Vec<usize>,
}

/// Compressed prompt: per-section retentions in emission order, the rendered text, and a
/// provenance entry per emitted token.
#[derive(Debug, Clone)]
pub struct CompressedPrompt {
    pub sections: Vec<SectionRetention>,
    rendered: String,
    origin_map: Vec<OriginRef>,
}

impl CompressedPrompt {
    /// Assemble from `(section tokens, retained indices)` pairs in emission order.
    ///
    /// Rendering is deterministic: sections that retain at least one token are joined with a
    /// single newline; inside a section, tokens that were adjacent in the original keep their
    /// original separator bytes, anything else is joined with one space. Full retention therefore
    /// reproduces the original section text exactly.
    pub fn assemble(parts: &[(&TokenSequence, Vec<usize>)]) -> Result<Self> {
        let mut rendered = String::new();
        let mut origin_map = Vec::new();
        let mut sections = Vec::with_capacity(parts.len());

        for (seq, retained) in parts {
            let mut prev: Option<usize> = None;
            for &i in retained {
                if i >= seq.len() || prev.is_some_and(|p| p >= i) {
                    return Err(Error::InvalidTokens(format!(
                        "retention for {} not strictly increasing in bounds",
                        seq.section()
                    )));
                }
                match prev {
                    None => {
                        if !rendered.is_empty() {
                            rendered.push('\n');
                        }
                    }
                    Some(p) if p + 1 == i => rendered.push_str(seq.gap_after(p)),
                    Some(_) => rendered.push(' '),
                }
                rendered.push_str(seq.token(i));
                origin_map.push(OriginRef { section: seq.section().clone(), index: i });
                prev = Some(i);
            }
            sections.push(SectionRetention { section: seq.section().clone(), retained: retained.clone() });
        }

        Ok(CompressedPrompt { sections, rendered, origin_map })
    }

    pub fn render(&self) -> &str {
        &self.rendered
    }

    pub fn origin_map(&self) -> &[OriginRef] {
        &self.origin_map
    }

    /// Number of emitted tokens.
    pub fn token_count(&self) -> usize {
        self.origin_map.len()
    }

    /// Reconstruct a compressed prompt from a rendered string, origin map, and the original
    /// prompt (the shape the CLI round-trips through JSONL).
    pub fn from_origin_map(
        original: &StructuredPrompt,
        rendered: String,
        origin_map: Vec<OriginRef>,
    ) -> Result<Self> {
        let mut sections: Vec<SectionRetention> = Vec::new();
        for entry in &origin_map {
            let seq = original
                .section(&entry.section)
                .ok_or_else(|| Error::InvalidTokens(format!("unknown section {}", entry.section)))?;
            if entry.index >= seq.len() {
                return Err(Error::InvalidTokens(format!(
                    "origin index {} out of bounds for {}",
                    entry.index, entry.section
                )));
            }
            match sections.last_mut() {
                Some(last) if last.section == entry.section => {
                    if last.retained.last().is_some_and(|&p| p >= entry.index) {
                        return Err(Error::InvalidTokens(
                            "origin map not strictly increasing within a section".into(),
                        ));
                    }
                    last.retained.push(entry.index);
                }
                _ => sections.push(SectionRetention {
                    section: entry.section.clone(),
                    retained: vec![entry.index],
                }),
            }
        }
        Ok(CompressedPrompt { sections, rendered, origin_map })
    }
}
