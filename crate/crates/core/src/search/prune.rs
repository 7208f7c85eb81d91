//! Parameterized ε-dominance and the sandwich pruning rule.

use std::collections::VecDeque;

use crate::bitmap::StateBitmap;
use crate::measures::{estimate_bounds, CorrelationGraph, MeasureSet, PerfEntry, PerfVector, TestLog};

/// Most recent validated pairs kept for pruning checks.
pub const MAX_PAIRS: usize = 256;

/// ε-dominance over possibly interval-valued vectors: for every measure,
/// the upper end for `a` is within `1 + eps` of the lower end for `b`.
/// Unknown entries make the answer false.
pub fn param_eps_dominates(a: &PerfVector, b: &PerfVector, eps: f64) -> bool {
    a.len() == b.len()
        && a.0.iter().zip(&b.0).all(|(x, y)| match (x, y) {
            (PerfEntry::Unvaluated, _) | (_, PerfEntry::Unvaluated) => false,
            _ => x.upper().unwrap() <= (1.0 + eps) * y.lower().unwrap(),
        })
}

/// Validated (forward, backward) pairs: the backward state is contained in
/// the forward one and parameterized-ε-dominates it.
#[derive(Debug, Clone, Default)]
pub struct PrunedRegion {
    pairs: VecDeque<(StateBitmap, StateBitmap)>,
}

impl PrunedRegion {
    pub fn record(&mut self, fwd: StateBitmap, bwd: StateBitmap) {
        if self.pairs.len() == MAX_PAIRS {
            self.pairs.pop_front();
        }
        self.pairs.push_back((fwd, bwd));
    }

    pub fn pairs(&self) -> impl Iterator<Item = &(StateBitmap, StateBitmap)> {
        self.pairs.iter()
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// First pair that lets `mid` be skipped.
    pub fn pruning_pair(
        &self,
        mid: &StateBitmap,
        eps: f64,
        graph: &CorrelationGraph,
        log: &TestLog,
        measures: &MeasureSet,
    ) -> Option<&(StateBitmap, StateBitmap)> {
        if !graph.has_edges() {
            return None;
        }
        let mut bounds = None;
        self.pairs.iter().find(|(f, b)| {
            if !(b.is_subset_of(mid) && mid.is_subset_of(f)) {
                return false;
            }
            let est = bounds.get_or_insert_with(|| estimate_mid(mid, graph, log, measures));
            prunes(est, f, b, eps, log)
        })
    }
}

fn estimate_mid(mid: &StateBitmap, graph: &CorrelationGraph, log: &TestLog, measures: &MeasureSet) -> PerfVector {
    let known = vec![None; measures.len()];
    estimate_bounds(&known, mid.count_ones(), graph, log, measures)
}

fn prunes(mid: &PerfVector, f: &StateBitmap, b: &StateBitmap, eps: f64, log: &TestLog) -> bool {
    let Some(lows) = mid.0.iter().map(PerfEntry::lower).collect::<Option<Vec<f64>>>() else {
        return false;
    };
    [f, b].into_iter().any(|end| {
        let Some(e) = log.get(end) else { return false };
        let near = e.values.iter().zip(&lows).all(|(x, l)| *x <= (1.0 + eps) * l);
        let no_worse = e.values.iter().zip(&lows).any(|(x, l)| x <= l);
        near && no_worse
    })
}

/// Whether `mid`, sandwiched between a validated pair `(fwd, bwd)`, can be
/// skipped: using lower bounds estimated from the log, one endpoint must
/// ε-dominate it. Never prunes without correlation edges.
pub fn can_prune(
    mid: &StateBitmap,
    fwd: &StateBitmap,
    bwd: &StateBitmap,
    eps: f64,
    graph: &CorrelationGraph,
    log: &TestLog,
    measures: &MeasureSet,
) -> bool {
    if !graph.has_edges() || !(bwd.is_subset_of(mid) && mid.is_subset_of(fwd)) {
        return false;
    }
    let (Some(f), Some(b)) = (log.get(fwd), log.get(bwd)) else {
        return false;
    };
    if !param_eps_dominates(&PerfVector::valuated(&b.values), &PerfVector::valuated(&f.values), eps) {
        return false;
    }
    prunes(&estimate_mid(mid, graph, log, measures), fwd, bwd, eps, log)
}
