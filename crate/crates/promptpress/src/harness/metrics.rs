//! Tiny metric helpers shared by benches and tests.

/// 1.0 when `gold` appears in the first `k` entries of `ranking`, else 0.0.
pub fn recall_at_k(ranking: &[usize], gold: usize, k: usize) -> f64 {
    if ranking.iter().take(k).any(|&i| i == gold) {
        1.0
    } else {
        0.0
    }
}

pub fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        0.0
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

/// Case-insensitive containment of any reference answer in the response.
pub fn contains_answer(response: &str, answers: &[String]) -> bool {
    let lower = response.to_lowercase();
    answers.iter().any(|a| !a.is_empty() && lower.contains(&a.to_lowercase()))
}
