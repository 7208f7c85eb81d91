//! Seeded synthetic instances for benchmarks and verification sweeps.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::bitmap::StateBitmap;
use crate::measures::{FnEstimator, LogEntry, MeasureSet, MeasureSpec, TestLog};
use crate::search::{Algorithm, SearchConfig};
use crate::tabular::{Relation, UniversalTable};
use crate::value::Value;

/// Small table with `attrs` integer columns `a0..`; column `i` takes exactly
/// `literals[i]` distinct values, so it gets that many literals. About one
/// cell in ten outside the first column is null.
pub fn small_table(seed: u64, literals: &[usize], rows: usize) -> UniversalTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let schema: Vec<String> = (0..literals.len()).map(|i| format!("a{i}")).collect();
    let rows = rows.max(literals.iter().copied().max().unwrap_or(1));
    let data = (0..rows)
        .map(|r| {
            literals
                .iter()
                .enumerate()
                .map(|(c, &n)| {
                    // The first rows walk every value so each domain is complete.
                    if r < n {
                        Value::Int(r as i64)
                    } else if c > 0 && rng.gen_bool(0.1) {
                        Value::Null
                    } else {
                        Value::Int(rng.gen_range(0..n as i64))
                    }
                })
                .collect()
        })
        .collect();
    let rel = Relation::new("synthetic", schema, data).expect("well-formed");
    UniversalTable::from_relation(rel).with_literals(30).expect("k >= 1")
}

/// Random shape within `max_attrs` attributes (at least two) and
/// `max_literals` literals each.
pub fn random_table(seed: u64, max_attrs: usize, max_literals: usize) -> UniversalTable {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
    let attrs = rng.gen_range(2..=max_attrs.max(2));
    let lits: Vec<usize> = (0..attrs).map(|_| rng.gen_range(1..=max_literals.max(1))).collect();
    let rows = rng.gen_range(6..=24);
    small_table(seed, &lits, rows)
}

/// `n` unit-range minimize measures with bounds `[pl, pu]`, last decisive.
pub fn unit_measures(n: usize, pl: f64, pu: f64) -> MeasureSet {
    let specs = (1..=n).map(|i| MeasureSpec::unit(&format!("p{i}"), pl, pu)).collect();
    MeasureSet::new(specs, None).expect("valid bounds")
}

fn mix(mut x: u64) -> u64 {
    x ^= x >> 30;
    x = x.wrapping_mul(0xbf58476d1ce4e5b9);
    x ^= x >> 27;
    x = x.wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

fn bitmap_key(b: &StateBitmap) -> u64 {
    b.ones().fold(0xcbf29ce484222325, |h, i| mix(h ^ (i as u64 + 1)))
}

/// Values drawn uniformly from `[lo, hi]` per (bitmap, measure), fixed by `seed`.
pub type BoxedEstimator = FnEstimator<Box<dyn Fn(&StateBitmap) -> Vec<f64> + Send + Sync>>;

pub fn uniform_estimator(seed: u64, measures: &MeasureSet, lo: f64, hi: f64) -> BoxedEstimator {
    let m = measures.len();
    FnEstimator::new(
        measures.names(),
        Box::new(move |b: &StateBitmap| {
            let mut rng = ChaCha8Rng::seed_from_u64(mix(seed) ^ bitmap_key(b));
            (0..m).map(|_| rng.gen_range(lo..=hi)).collect()
        }),
    )
}

/// Each measure is a strictly monotone function of the bitmap's literal
/// count, rising or falling at random, with values in `[lo, hi]`.
pub fn correlated_estimator(seed: u64, measures: &MeasureSet, bits: usize, lo: f64, hi: f64) -> BoxedEstimator {
    let mut rng = ChaCha8Rng::seed_from_u64(mix(seed ^ 0xc0ffee));
    let curves: Vec<Vec<f64>> = (0..measures.len())
        .map(|_| {
            let mut ys: Vec<f64> = (0..=bits).map(|_| rng.gen_range(lo..=hi)).collect();
            ys.sort_by(f64::total_cmp);
            // Spread ties so the curve is strictly monotone.
            for i in 1..ys.len() {
                if ys[i] <= ys[i - 1] {
                    ys[i] = ys[i - 1] + 1e-9;
                }
            }
            if rng.gen_bool(0.5) {
                ys.reverse();
            }
            ys
        })
        .collect();
    FnEstimator::new(
        measures.names(),
        Box::new(move |b: &StateBitmap| curves.iter().map(|c| c[b.count_ones()]).collect()),
    )
}

/// Regression table: `features` discrete numeric columns `x1..` with a few
/// levels each and some nulls, plus a continuous target `y`.
pub fn regression_table(seed: u64, rows: usize, features: usize) -> Relation {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let levels: Vec<i64> = (0..features).map(|_| rng.gen_range(3..=6)).collect();
    let coef: Vec<f64> = (0..features).map(|_| rng.gen_range(-2.0..2.0)).collect();
    let mut schema: Vec<String> = (1..=features).map(|i| format!("x{i}")).collect();
    schema.push("y".into());
    let data = (0..rows)
        .map(|_| {
            let xs: Vec<i64> = levels.iter().map(|&l| rng.gen_range(0..l)).collect();
            let y: f64 = xs.iter().zip(&coef).map(|(x, c)| *x as f64 * c).sum::<f64>() + rng.gen_range(-0.5..0.5);
            let mut row: Vec<Value> = xs
                .into_iter()
                .map(|x| if rng.gen_bool(0.02) { Value::Null } else { Value::Int(x) })
                .collect();
            row.push(Value::Float((y * 1000.0).round() / 1000.0));
            row
        })
        .collect();
    Relation::new("regression", schema, data).expect("well-formed")
}

/// Cross product of string domains, one row per combination. Every
/// non-empty bitmap that keeps at least one literal of each present
/// attribute is non-degenerate.
pub fn product_table(domains: &[(&str, &[&str])]) -> UniversalTable {
    let schema: Vec<String> = domains.iter().map(|(a, _)| a.to_string()).collect();
    let mut rows: Vec<Vec<Value>> = vec![Vec::new()];
    for (_, values) in domains {
        rows = rows
            .into_iter()
            .flat_map(|r| {
                values.iter().map(move |v| {
                    let mut r = r.clone();
                    r.push(Value::Str(v.to_string()));
                    r
                })
            })
            .collect();
    }
    let rel = Relation::new("product", schema, rows).expect("well-formed");
    UniversalTable::from_relation(rel).with_literals(30).expect("k >= 1")
}

/// A small hand-built instance with known answers.
pub struct Fixture {
    pub table: UniversalTable,
    pub measures: MeasureSet,
    pub estimator: BoxedEstimator,
    pub prior: TestLog,
    pub config: SearchConfig,
}

fn vector_estimator(measures: &MeasureSet, f: impl Fn(&StateBitmap) -> Vec<f64> + Send + Sync + 'static) -> BoxedEstimator {
    FnEstimator::new(measures.names(), Box::new(f))
}

fn prior_log(measures: usize, entries: &[(&str, [f64; 3])]) -> TestLog {
    let mut log = TestLog::new(measures);
    for (bits, v) in entries {
        log.append(LogEntry {
            bitmap: StateBitmap::from_binary(bits).expect("binary"),
            values: v.to_vec(),
            raw: v.to_vec(),
        })
        .expect("distinct bitmaps");
    }
    log
}

/// Bitmaps of the sandwich pruning instance: features `a1 a2 b1 b2`, then the
/// single target literal `t`.
pub const SANDWICH_U: &str = "11111";
pub const SANDWICH_S1: &str = "11101";
pub const SANDWICH_S2: &str = "10011";
pub const SANDWICH_S3: &str = "01001";
pub const SANDWICH_B: &str = "00001";
pub const SANDWICH_S4: &str = "11001";
pub const SANDWICH_S5: &str = "01101";

const SANDWICH_LOG: [(&str, [f64; 3]); 5] = [
    (SANDWICH_U, [0.42, 0.18, 0.9]),
    (SANDWICH_S1, [0.4, 0.17, 0.1]),
    (SANDWICH_S2, [0.5, 0.22, 0.3]),
    (SANDWICH_S3, [0.45, 0.20, 0.12]),
    (SANDWICH_B, [0.6, 0.4, 0.3]),
];

/// True vector of any sandwich-instance state. Unlogged states depend only
/// on their literal count, so the first two measures fall as the dataset
/// grows.
pub fn sandwich_truth(b: &StateBitmap) -> Vec<f64> {
    let bits = b.to_binary();
    if let Some((_, v)) = SANDWICH_LOG.iter().find(|(s, _)| *s == bits) {
        return v.to_vec();
    }
    let by_support = [
        [1.0, 1.0, 1.0],
        [0.6, 0.4, 0.3],
        [0.55, 0.3, 0.25],
        [0.48, 0.21, 0.3],
        [0.41, 0.175, 0.8],
        [0.42, 0.18, 0.9],
    ];
    by_support[b.count_ones()].to_vec()
}

/// Preloaded log over two attributes plus a target where the states
/// `SANDWICH_S4` and `SANDWICH_S5` sit between validated pairs and are
/// ε-dominated by `SANDWICH_S3` (ε = 0.3, θ = 0.8).
pub fn sandwich_fixture() -> Fixture {
    let table = product_table(&[("A", &["a1", "a2"]), ("B", &["b1", "b2"]), ("T", &["t"])]);
    let measures = unit_measures(3, 0.1, 1.0);
    Fixture {
        estimator: vector_estimator(&measures, sandwich_truth),
        prior: prior_log(3, &SANDWICH_LOG),
        measures,
        table,
        config: SearchConfig {
            algorithm: Algorithm::Bi,
            epsilon: 0.3,
            theta: 0.8,
            budget: 1000,
            target: Some("T".into()),
            ..SearchConfig::default()
        },
    }
}

/// Four literals whose full state is out of bounds. Valuated in order, the
/// children of the full state go: `1111 -> 0111` lands in a fresh cell,
/// `1011` in another, `1101` displaces `0111`, and `1110` loses to `1011` on
/// the decisive measure. With a budget of five the grid ends as
/// `{1011, 1101}`.
pub fn budget_fixture() -> Fixture {
    let table = product_table(&[("A", &["a1", "a2"]), ("B", &["b1", "b2"])]);
    let measures = unit_measures(3, 0.1, 0.95);
    let estimator = vector_estimator(&measures, |b: &StateBitmap| {
        match b.to_binary().as_str() {
            "1111" => vec![0.99, 0.9, 0.99],
            "0111" => vec![0.26, 0.15, 0.40],
            "1011" => vec![0.5, 0.3, 0.3],
            "1101" => vec![0.27, 0.16, 0.37],
            "1110" => vec![0.52, 0.31, 0.39],
            _ => vec![0.2, 0.2, 0.2],
        }
    });
    Fixture {
        estimator,
        prior: TestLog::new(3),
        measures,
        table,
        config: SearchConfig {
            algorithm: Algorithm::Apx,
            epsilon: 0.3,
            budget: 5,
            ..SearchConfig::default()
        },
    }
}
