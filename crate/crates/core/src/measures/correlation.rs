//! Rank correlation between measures and bound estimation from it.

use super::{MeasureSet, PerfEntry, PerfVector, TestLog};

/// Name of the pseudo-node carrying a state's literal count. It is known for
/// every state without valuation, so it can bracket any correlated measure.
pub const SUPPORT_NODE: &str = "support";

const MIN_SUPPORT: usize = 3;
const THETA_SLACK: f64 = 1e-12;

/// Spearman coefficient with average ranks for ties. `None` when either
/// sequence is constant or the inputs are unusable.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return None;
    }
    pearson(&ranks(xs), &ranks(ys))
}

fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut r = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

fn pearson(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(b) {
        sab += (x - ma) * (y - mb);
        saa += (x - ma) * (x - ma);
        sbb += (y - mb) * (y - mb);
    }
    if saa <= 0.0 || sbb <= 0.0 {
        return None;
    }
    Some((sab / (saa * sbb).sqrt()).clamp(-1.0, 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub rho: f64,
}

/// Undirected graph over the measures plus the support node (index = number
/// of measures). Edges join pairs with |rho| >= theta.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationGraph {
    nodes: Vec<String>,
    edges: Vec<Edge>,
    theta: f64,
    built_from: usize,
}

impl CorrelationGraph {
    pub fn empty(measures: &MeasureSet, theta: f64) -> Self {
        let mut nodes = measures.names();
        nodes.push(SUPPORT_NODE.to_string());
        CorrelationGraph {
            nodes,
            edges: Vec::new(),
            theta,
            built_from: 0,
        }
    }

    pub fn build(log: &TestLog, measures: &MeasureSet, theta: f64) -> Self {
        let mut g = Self::empty(measures, theta);
        g.built_from = log.len();
        if log.len() < MIN_SUPPORT {
            return g;
        }
        let n = log.len();
        let cols: Vec<Vec<f64>> = (0..g.nodes.len())
            .map(|node| (0..n).map(|id| log.node_value(id, node)).collect())
            .collect();
        for a in 0..cols.len() {
            for b in a + 1..cols.len() {
                if let Some(rho) = spearman(&cols[a], &cols[b]) {
                    if rho.abs() >= theta - THETA_SLACK {
                        g.edges.push(Edge { a, b, rho });
                    }
                }
            }
        }
        g
    }

    pub fn nodes(&self) -> &[String] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn has_edges(&self) -> bool {
        !self.edges.is_empty()
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    /// Log size the graph was computed from.
    pub fn built_from(&self) -> usize {
        self.built_from
    }

    pub fn edge(&self, a: usize, b: usize) -> Option<&Edge> {
        self.edges
            .iter()
            .find(|e| (e.a == a && e.b == b) || (e.a == b && e.b == a))
    }

    /// Neighbour of `node` with the largest |rho| among those `usable`.
    fn strongest(&self, node: usize, usable: impl Fn(usize) -> bool) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for e in &self.edges {
            let other = if e.a == node {
                e.b
            } else if e.b == node {
                e.a
            } else {
                continue;
            };
            if usable(other) && best.is_none_or(|(o, r)| e.rho.abs() > r || (e.rho.abs() == r && other < o)) {
                best = Some((other, e.rho.abs()));
            }
        }
        best.map(|(o, _)| o)
    }
}

/// Fills in the unknown measures of a state from the log.
///
/// A missing measure takes the range of its values over the log entries that
/// most tightly bracket the state on its strongest correlated known quantity
/// (a valuated measure or the support count). Without such a bracket the
/// range falls back to the measure's declared `[pl, pu]`.
pub fn estimate_bounds(
    known: &[Option<f64>],
    support: usize,
    graph: &CorrelationGraph,
    log: &TestLog,
    measures: &MeasureSet,
) -> PerfVector {
    let m = measures.len();
    let value_of = |node: usize| if node == m { Some(support as f64) } else { known[node] };
    PerfVector(
        (0..m)
            .map(|p| {
                if let Some(v) = known[p] {
                    return PerfEntry::Valuated(v);
                }
                let spec = &measures.specs()[p];
                let fallback = PerfEntry::Bounded {
                    lo: spec.pl,
                    hi: spec.pu,
                };
                let Some(q) = graph.strongest(p, |o| value_of(o).is_some()) else {
                    return fallback;
                };
                let Some((below, above)) = log.bracket(q, value_of(q).unwrap()) else {
                    return fallback;
                };
                let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                for &id in below.iter().chain(above) {
                    let v = log.entries()[id].values[p];
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                PerfEntry::Bounded {
                    lo: lo.clamp(spec.pl, spec.pu),
                    hi: hi.clamp(spec.pl, spec.pu),
                }
            })
            .collect(),
    )
}
