//! Recovering original text from a response written against a compressed prompt.
//!
//! Compression can fuse subword pieces of different words into strings that never
//! existed ("Wilhelmrad"), and a model answering over that prompt will echo them. The
//! recovery index matches response spans against the retained token stream and widens
//! each match across the dropped tokens between its endpoints, restoring the original
//! entity.
//!
//! ```sh
//! cargo run --example recover_entities
//! ```

use promptpress::token::{tokenize_with, VocabScheme};
use promptpress::{RecoveryIndex, SectionId};

fn main() -> promptpress::Result<()> {
    // original passage under a subword vocabulary
    let vocab = VocabScheme::new(
        "subword",
        ["Wilhelm", "Con", "rad", "Rönt", "gen", ",", "of", "who", "discovered", "X", "-", "rays"],
    );
    let original = tokenize_with(
        &vocab,
        "Wilhelm Conrad Röntgen, of who discovered X-rays",
        SectionId::Document(0),
    );
    println!("original tokens: {:?}", original.to_vec());

    // pruning kept a gapped subset; the rendered prompt fuses "Wilhelm" with "rad"
    let retained = vec![0usize, 2, 5, 6, 7, 8];
    let kept: Vec<&str> = retained.iter().map(|&i| original.token(i)).collect();
    println!("retained:        {kept:?}");

    let index = RecoveryIndex::from_sections(vec![(original, retained)], 1)?;

    for response in ["Wilhelmrad", "Wilhelmrad discovered", "who discovered"] {
        let recovered = index.recover_text(response, &vocab)?;
        println!("\nresponse  {response:?}\nrecovered {:?}", recovered.text);
        for seg in &recovered.segments {
            if let Some((section, first, last)) = &seg.origin {
                println!("  span {:?} came from {section} tokens {first}..={last}", seg.response_range);
            }
        }
    }
    Ok(())
}
