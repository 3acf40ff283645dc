//! Tokenization schemes and byte-exact span bookkeeping.
//!
//! Every token knows its byte range in the source, so any subset of tokens can be
//! rendered back with the original separators — the property the recovery stage leans on.
//!
//! ```sh
//! cargo run --example tokenize_roundtrip
//! ```

use promptpress::token::{tokenize_with, CharScheme, VocabScheme};
use promptpress::{SchemeRegistry, SectionId};

fn main() -> promptpress::Result<()> {
    let registry = SchemeRegistry::default();
    let text = "X-ray imaging, discovered in 1895, reshaped medicine.";

    let seq = registry.tokenize(text, "whitespace", SectionId::Document(0))?;
    println!("whitespace scheme — {} tokens:", seq.len());
    for i in 0..seq.len() {
        let (a, b) = seq.span(i);
        println!("  [{a:>2}..{b:>2}] {:?}", seq.token(i));
    }

    // A token subset renders with the bytes that separated it in the source.
    println!("\nwindow [4..=6]: {:?}", seq.window_text(4, 6));
    println!("gap after token 2: {:?}", seq.gap_after(2));

    let chars = tokenize_with(&CharScheme, "1895", SectionId::Question);
    println!("\nchar scheme over \"1895\": {:?}", chars.to_vec());

    // Custom vocabularies match greedily, longest first, one char as fallback.
    let vocab = VocabScheme::new("subword", ["X", "-", "ray", "imag", "ing"]);
    let sub = tokenize_with(&vocab, "X-ray imaging", SectionId::Instruction);
    println!("subword scheme over \"X-ray imaging\": {:?}", sub.to_vec());

    Ok(())
}
