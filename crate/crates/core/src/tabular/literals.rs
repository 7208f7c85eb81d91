//! Value clustering that turns active domains into equality literals.

use std::collections::HashMap;

use crate::value::Value;

pub const DEFAULT_MAX_CLUSTERS: usize = 30;

const LLOYD_TOL: f64 = 1e-9;
const LLOYD_MAX_ITERS: usize = 10_000;

/// Representatives of an attribute's clusters and the cluster of every
/// clustered value. Values absent from `assignment` have no literal.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Clustering {
    pub representatives: Vec<Value>,
    pub assignment: HashMap<Value, usize>,
}

/// 1-D k-means over the sorted distinct values, seeded at quantiles.
pub(crate) fn cluster_numeric(adom: &[Value], max_clusters: usize) -> Clustering {
    let xs: Vec<f64> = adom.iter().map(|v| v.as_f64().expect("numeric adom")).collect();
    let n = xs.len();
    let k = max_clusters.min(n);
    if k == 0 {
        return Clustering {
            representatives: Vec::new(),
            assignment: HashMap::new(),
        };
    }
    let groups = kmeans_1d(&xs, k);

    let mut representatives = Vec::new();
    let mut assignment = HashMap::new();
    for members in groups.into_iter().filter(|g| !g.is_empty()) {
        let centroid = members.iter().map(|&i| xs[i]).sum::<f64>() / members.len() as f64;
        let rep = *members
            .iter()
            .min_by(|&&a, &&b| (xs[a] - centroid).abs().total_cmp(&(xs[b] - centroid).abs()))
            .unwrap();
        let id = representatives.len();
        representatives.push(adom[rep].clone());
        for i in members {
            assignment.insert(adom[i].clone(), id);
        }
    }
    Clustering {
        representatives,
        assignment,
    }
}

/// Returns member index lists per cluster, clusters in ascending centroid order.
pub(crate) fn kmeans_1d(xs: &[f64], k: usize) -> Vec<Vec<usize>> {
    let n = xs.len();
    let mut centroids: Vec<f64> = (0..k).map(|i| xs[((i as f64 + 0.5) * n as f64 / k as f64) as usize]).collect();
    let mut labels = vec![0usize; n];
    for _ in 0..LLOYD_MAX_ITERS {
        for (i, &x) in xs.iter().enumerate() {
            labels[i] = nearest(&centroids, x);
        }
        let mut sum = vec![0.0; k];
        let mut cnt = vec![0usize; k];
        for (i, &x) in xs.iter().enumerate() {
            sum[labels[i]] += x;
            cnt[labels[i]] += 1;
        }
        let mut shift: f64 = 0.0;
        for j in 0..k {
            if cnt[j] > 0 {
                let c = sum[j] / cnt[j] as f64;
                shift = shift.max((c - centroids[j]).abs());
                centroids[j] = c;
            }
        }
        if shift < LLOYD_TOL {
            break;
        }
    }
    for (i, &x) in xs.iter().enumerate() {
        labels[i] = nearest(&centroids, x);
    }
    let mut groups = vec![Vec::new(); k];
    for (i, &l) in labels.iter().enumerate() {
        groups[l].push(i);
    }
    groups
}

fn nearest(centroids: &[f64], x: f64) -> usize {
    let mut best = 0;
    for j in 1..centroids.len() {
        if (x - centroids[j]).abs() < (x - centroids[best]).abs() {
            best = j;
        }
    }
    best
}

/// One cluster per distinct value, keeping the `max_clusters` most frequent
/// (ties broken by value order). Literals come out in value order.
pub(crate) fn cluster_categorical(
    adom: &[Value],
    counts: &HashMap<Value, u64>,
    max_clusters: usize,
) -> Clustering {
    let mut ranked: Vec<&Value> = adom.iter().collect();
    ranked.sort_by(|a, b| counts[*b].cmp(&counts[*a]).then_with(|| a.cmp(b)));
    ranked.truncate(max_clusters);
    ranked.sort();
    let representatives: Vec<Value> = ranked.into_iter().cloned().collect();
    let assignment = representatives
        .iter()
        .enumerate()
        .map(|(i, v)| (v.clone(), i))
        .collect();
    Clustering {
        representatives,
        assignment,
    }
}
