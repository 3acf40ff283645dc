//! Budget arithmetic: from a global token target to one keep-rate per document.
//!
//! Three steps, each visible below:
//!   1. reserve instruction/question tokens at their own keep rates, and spread what is
//!      left of the target across the retained documents' tokens (the base rate);
//!   2. tilt that base rate by coarse rank — earlier documents keep more, later ones
//!      less, on a linear ladder;
//!   3. rescale all rates by one scalar so the per-segment ceil quotas actually land on
//!      the document budget (ceils round up, so the raw schedule overshoots).
//!
//! ```sh
//! cargo run --example budget_schedule
//! ```

use promptpress::budget::{base_budget, dynamic_tau, fit_doc_taus, scheduled_quota};
use promptpress::fine::SegmentPlan;

fn main() -> promptpress::Result<()> {
    // 468-token target over a 100-token instruction, 20-token question, 1000 document tokens
    let target = 468;
    let (n_ins, n_que) = (100, 20);
    let doc_tokens = 1000;
    let base = base_budget(target, n_ins, n_que, 0.85, 0.9, doc_tokens)?;
    println!("base document keep rate: {base:.3}");

    let kept = 4;
    println!("\nrank tilt (delta 0.3) across {kept} retained documents:");
    let taus: Vec<f64> = (0..kept).map(|k| dynamic_tau(k, kept, base, 0.3)).collect();
    for (k, tau) in taus.iter().enumerate() {
        println!("  rank {k}: tau = {tau:.3}");
    }

    let plan = SegmentPlan::new(200);
    let lens = vec![250usize; kept];
    let doc_budget = target - 85 - 18; // reserved instruction/question tokens
    println!("\nraw schedule quota: {} tokens (budget {doc_budget})", scheduled_quota(&taus, &lens, &plan));

    let fitted = fit_doc_taus(&taus, &lens, &plan, doc_budget);
    println!("fitted quota:       {} tokens", scheduled_quota(&fitted, &lens, &plan));
    for (k, (raw, fit)) in taus.iter().zip(&fitted).enumerate() {
        println!("  rank {k}: {raw:.3} -> {fit:.3}");
    }
    Ok(())
}
