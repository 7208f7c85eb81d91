//! Brute-force verification: exhaustive enumeration, ε-cover checks and the
//! diversification bound. Dominance is re-implemented here on purpose so the
//! checks do not lean on the code they check.

use serde::Serialize;

use crate::bitmap::StateBitmap;
use crate::error::{Error, Result};
use crate::measures::{valuate, Estimator, MeasureSet, TestLog};
use crate::operators::Materializer;
use crate::search::div_score;
use crate::skyline::{Occupant, SkylineGrid};
use crate::tabular::UniversalTable;

pub const DEFAULT_MAX_BITS: usize = 20;
pub const MAX_DIV_GROUND: usize = 14;

/// Strict Pareto dominance, written independently of the skyline module.
pub fn naive_dominates(a: &[f64], b: &[f64]) -> bool {
    let mut le = 0;
    let mut lt = 0;
    for i in 0..a.len() {
        if a[i] <= b[i] {
            le += 1;
        }
        if a[i] < b[i] {
            lt += 1;
        }
    }
    le == a.len() && lt > 0
}

/// ε-dominance, written independently of the skyline module.
pub fn naive_eps_dominates(a: &[f64], b: &[f64], eps: f64) -> bool {
    let within = (0..a.len()).filter(|&i| a[i] <= b[i] * (1.0 + eps)).count();
    let no_worse = (0..a.len()).filter(|&i| a[i] <= b[i]).count();
    within == a.len() && no_worse >= 1
}

/// Every non-degenerate state with its normalized vector.
#[derive(Debug, Clone)]
pub struct Enumeration {
    pub states: Vec<Occupant>,
    pub degenerate: usize,
    pub total: usize,
}

/// Valuates all `2^bits` bitmaps, skipping degenerate ones. Refuses when
/// the bitmap is longer than `max_bits`. Entries already in `log` are reused
/// and new ones appended.
pub fn enumerate_all(
    u: &UniversalTable,
    measures: &MeasureSet,
    est: &dyn Estimator,
    log: &mut TestLog,
    max_bits: usize,
) -> Result<Enumeration> {
    let bits = u.bit_count();
    if bits > max_bits {
        return Err(Error::EnumerationCap {
            bits,
            cap: max_bits,
            states: 1u128 << bits.min(127),
        });
    }
    let m = Materializer::with_cache_size(u, 1);
    let mut states = Vec::new();
    let mut degenerate = 0;
    for code in 0u64..(1u64 << bits) {
        let b = StateBitmap::from_bits(&(0..bits).map(|i| code >> (bits - 1 - i) & 1 == 1).collect::<Vec<_>>());
        if m.is_degenerate(&b) {
            degenerate += 1;
            continue;
        }
        let (values, _) = valuate(&m, est, measures, log, &b)?;
        states.push(Occupant { bitmap: b, values });
    }
    Ok(Enumeration {
        total: 1usize << bits,
        states,
        degenerate,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub bitmap: String,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnumerationReport {
    pub total_states: usize,
    pub degenerate: usize,
    pub exact_front: Vec<String>,
    pub eps_cover_violations: Vec<Violation>,
    pub pruned_validated: usize,
}

impl EnumerationReport {
    pub fn passed(&self) -> bool {
        self.eps_cover_violations.is_empty()
    }
}

/// States of `all` that are not dominated by another member of `all`
/// (first of identical vectors kept), by the O(n²) definition.
pub fn naive_front(all: &[Occupant]) -> Vec<usize> {
    (0..all.len())
        .filter(|&i| {
            !(0..all.len()).any(|j| {
                naive_dominates(&all[j].values, &all[i].values) || (j < i && all[j].values == all[i].values)
            })
        })
        .collect()
}

/// Checks that every in-bounds state of `all` (each value within
/// `[pl, pu]`) is ε-dominated by some grid occupant. The exact front is
/// taken over in-bounds states.
pub fn check_eps_cover(grid: &SkylineGrid, all: &[Occupant], eps: f64) -> EnumerationReport {
    check_cover(&grid.occupants().cloned().collect::<Vec<_>>(), grid.measures(), all, eps)
}

/// `check_eps_cover` against an explicit occupant list.
pub fn check_cover(occupants: &[Occupant], measures: &MeasureSet, all: &[Occupant], eps: f64) -> EnumerationReport {
    let in_bounds: Vec<Occupant> = all
        .iter()
        .filter(|s| s.values.iter().zip(measures.specs()).all(|(v, sp)| sp.pl <= *v && *v <= sp.pu))
        .cloned()
        .collect();
    let mut violations = Vec::new();
    for s in &in_bounds {
        if !occupants.iter().any(|o| naive_eps_dominates(&o.values, &s.values, eps)) {
            violations.push(Violation {
                bitmap: s.bitmap.to_hex(),
                reason: format!("{:?} is not {eps}-dominated by any occupant", s.values),
            });
        }
    }
    EnumerationReport {
        total_states: all.len(),
        degenerate: 0,
        exact_front: naive_front(&in_bounds)
            .into_iter()
            .map(|i| in_bounds[i].bitmap.to_hex())
            .collect(),
        eps_cover_violations: violations,
        pruned_validated: 0,
    }
}

/// Ratio of `div(chosen)` to the best `div` over all k-subsets of `ground`.
pub fn check_div_bound(chosen: &[Occupant], ground: &[Occupant], k: usize, alpha: f64, log: &TestLog) -> Result<f64> {
    if k > ground.len() {
        return Err(Error::Argument(format!("k = {k} exceeds ground set of {}", ground.len())));
    }
    if ground.len() > MAX_DIV_GROUND {
        return Err(Error::Argument(format!(
            "ground set of {} exceeds the enumeration limit {MAX_DIV_GROUND}",
            ground.len()
        )));
    }
    let mut best: f64 = 0.0;
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        let set: Vec<&Occupant> = idx.iter().map(|&i| &ground[i]).collect();
        best = best.max(div_score(&set, alpha, log));
        // next combination
        let mut i = k;
        while i > 0 && idx[i - 1] == ground.len() - k + i - 1 {
            i -= 1;
        }
        if i == 0 {
            break;
        }
        idx[i - 1] += 1;
        for j in i..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
    let got = div_score(&chosen.iter().collect::<Vec<_>>(), alpha, log);
    Ok(if best <= 0.0 { 1.0 } else { got / best })
}
