//! Token-budget arithmetic: how many tokens each section may keep.
//!
//! The instruction and question reserve their share first (they compress under fixed high
//! ratios); whatever remains of the target is spread over the retained documents. Document
//! ratios are then skewed by coarse rank — the best-ranked document keeps more, the worst
//! keeps less — and finally rescaled by a scalar so the summed segment quotas land on the
//! budget as tightly as ceil arithmetic allows.

use crate::error::{Error, Result};
use crate::fine::SegmentPlan;

/// Tokens reserved by one section compressed at ratio `tau`: the single-segment quota.
pub fn reserved(tau: f64, len: usize) -> usize {
    SegmentPlan::quota(tau, len)
}

/// Base retention ratio for document tokens once the instruction and question reservations
/// are taken out of the target. Errors when those reservations alone meet or exceed the
/// target — no document token could survive. Zero when no document tokens were retained
/// by the coarse stage.
pub fn base_budget(
    target_tokens: usize,
    n_ins: usize,
    n_que: usize,
    tau_ins: f64,
    tau_que: f64,
    retained_doc_tokens: usize,
) -> Result<f64> {
    let r = reserved(tau_ins, n_ins) + reserved(tau_que, n_que);
    if r >= target_tokens {
        return Err(Error::InfeasibleBudget { reserved: r, target: target_tokens });
    }
    if retained_doc_tokens == 0 {
        return Ok(0.0);
    }
    Ok(((target_tokens - r) as f64 / retained_doc_tokens as f64).clamp(0.0, 1.0))
}

/// Rank-scheduled retention ratio for the document at coarse rank `rank_index` (0 = most
/// relevant) among `retained_count` kept documents:
///
/// ```text
/// tau_k = clamp((1 - 2·rank/count)·delta + tau_doc, 0, 1)
/// ```
///
/// The schedule is linear in rank, spans ±delta around `tau_doc`, and sums (unclamped) to
/// `count·tau_doc + delta` — the skew redistributes budget, it does not conserve it exactly.
pub fn dynamic_tau(rank_index: usize, retained_count: usize, tau_doc: f64, delta_tau: f64) -> f64 {
    if retained_count == 0 {
        return tau_doc.clamp(0.0, 1.0);
    }
    let skew = 1.0 - 2.0 * rank_index as f64 / retained_count as f64;
    (skew * delta_tau + tau_doc).clamp(0.0, 1.0)
}

/// Total tokens the fine stage would retain across documents with per-doc ratios `taus`
/// and lengths `lens`, given the segment plan's per-segment ceil quotas.
pub fn scheduled_quota(taus: &[f64], lens: &[usize], plan: &SegmentPlan) -> usize {
    debug_assert_eq!(taus.len(), lens.len());
    taus.iter()
        .zip(lens)
        .map(|(&tau, &len)| {
            plan.split(len).into_iter().map(|r| SegmentPlan::quota(tau, r.len())).sum::<usize>()
        })
        .sum()
}

/// Largest scalar `alpha` such that compressing every document at `clamp(alpha·tau_k, 0, 1)`
/// retains at most `budget` tokens. Per-segment ceils make the exact sum unreachable in
/// general; bisection against the monotone quota total lands on the tightest feasible point.
pub fn fit_scale(taus: &[f64], lens: &[usize], plan: &SegmentPlan, budget: usize) -> f64 {
    let total = |alpha: f64| -> usize {
        let scaled = apply_scale(taus, alpha);
        scheduled_quota(&scaled, lens, plan)
    };
    let mut hi = 1e12;
    if total(hi) <= budget {
        return hi;
    }
    let mut lo = 0.0;
    debug_assert!(total(lo) <= budget);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if total(mid) <= budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

pub fn apply_scale(taus: &[f64], alpha: f64) -> Vec<f64> {
    taus.iter().map(|&t| (alpha * t).clamp(0.0, 1.0)).collect()
}

/// Convenience: rescaled per-document ratios that fit `budget`.
pub fn fit_doc_taus(taus: &[f64], lens: &[usize], plan: &SegmentPlan, budget: usize) -> Vec<f64> {
    apply_scale(taus, fit_scale(taus, lens, plan, budget))
}
