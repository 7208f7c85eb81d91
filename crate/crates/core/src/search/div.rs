//! Dataset distance and level-wise diversification.

use crate::bitmap::StateBitmap;
use crate::measures::TestLog;
use crate::skyline::Occupant;

fn cosine(a: &StateBitmap, b: &StateBitmap) -> f64 {
    let (na, nb) = (a.count_ones(), b.count_ones());
    if na == 0 || nb == 0 {
        return 0.0;
    }
    a.and_count(b) as f64 / ((na * nb) as f64).sqrt()
}

/// Blend of bitmap cosine dissimilarity and performance distance scaled by
/// the log's largest pairwise distance, in [0, 1].
pub fn dis_score(a: &Occupant, b: &Occupant, alpha: f64, log: &TestLog) -> f64 {
    let euc = crate::measures::euclid(&a.values, &b.values);
    let scale = log.diameter().unwrap_or((a.values.len() as f64).sqrt());
    let perf = if scale > 0.0 { (euc / scale).min(1.0) } else { 0.0 };
    let d = alpha * (1.0 - cosine(&a.bitmap, &b.bitmap)) / 2.0 + (1.0 - alpha) * perf;
    d.clamp(0.0, 1.0)
}

/// Sum of pairwise distances.
pub fn div_score(set: &[&Occupant], alpha: f64, log: &TestLog) -> f64 {
    let mut s = 0.0;
    for i in 0..set.len() {
        for j in i + 1..set.len() {
            s += dis_score(set[i], set[j], alpha, log);
        }
    }
    s
}

/// Picks at most `k` members of `level` (returned as indices, ascending).
///
/// Seeds with the first `k` states in bitmap order, then streams the others
/// in that order: each replaces the member whose swap raises the score the
/// most, when some swap raises it at all.
pub fn diversify_level(level: &[Occupant], k: usize, alpha: f64, log: &TestLog) -> Vec<usize> {
    if level.len() <= k {
        return (0..level.len()).collect();
    }
    let mut order: Vec<usize> = (0..level.len()).collect();
    order.sort_by(|&a, &b| level[a].bitmap.cmp(&level[b].bitmap).then(a.cmp(&b)));
    let mut chosen: Vec<usize> = order[..k].to_vec();

    // Pairwise distances among the level, computed once.
    let n = level.len();
    let mut dis = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let d = dis_score(&level[i], &level[j], alpha, log);
            dis[i * n + j] = d;
            dis[j * n + i] = d;
        }
    }
    let contrib = |x: usize, set: &[usize], skip: usize| -> f64 {
        set.iter()
            .enumerate()
            .filter(|&(slot, _)| slot != skip)
            .map(|(_, &y)| dis[x * n + y])
            .sum()
    };

    for &cand in &order[k..] {
        let mut best: Option<(usize, f64)> = None;
        for slot in 0..k {
            let gain = contrib(cand, &chosen, slot) - contrib(chosen[slot], &chosen, slot);
            if gain > 1e-12 && best.is_none_or(|(_, g)| gain > g) {
                best = Some((slot, gain));
            }
        }
        if let Some((slot, _)) = best {
            chosen[slot] = cand;
        }
    }
    chosen.sort_unstable();
    chosen
}
