use std::cmp::Ordering;

/// Indices (ascending) of the non-dominated vectors. Among identical vectors
/// only the first is kept.
///
/// Vectors are visited in lexicographic order, so anything that dominates a
/// vector is visited before it; each one is then checked against the front
/// built so far.
pub fn exact_pareto(vectors: &[Vec<f64>]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..vectors.len()).collect();
    order.sort_by(|&a, &b| lex(&vectors[a], &vectors[b]).then(a.cmp(&b)));
    let mut front: Vec<usize> = Vec::new();
    for i in order {
        let v = &vectors[i];
        let covered = front
            .iter()
            .any(|&j| vectors[j].iter().zip(v).all(|(x, y)| x <= y));
        if !covered {
            front.push(i);
        }
    }
    front.sort_unstable();
    front
}

fn lex(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => {}
            o => return o,
        }
    }
    Ordering::Equal
}
