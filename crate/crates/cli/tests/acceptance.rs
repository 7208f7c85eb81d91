//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails. Tolerances are the constants below.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use skyforge_cli::manifest::termination_name;
use skyforge_cli::{prepare, RunConfig};
use skyforge_core::measures::{valuate, LogEntry, MeasureSpec, RidgeConfig, RidgeEstimator};
use skyforge_core::oracle::{check_div_bound, check_eps_cover, enumerate_all, naive_eps_dominates};
use skyforge_core::search::{dis_score, div_score, diversify_level, run};
use skyforge_core::skyline::{dominates, exact_pareto, Occupant};
use skyforge_core::synth::{self, correlated_estimator, random_table, uniform_estimator, unit_measures};
use skyforge_core::{
    Algorithm, Direction, Materializer, MeasureSet, SearchConfig, SearchOutcome, StateBitmap, TestLog,
    UniversalTable,
};

const C1_MAX_SECONDS: f64 = 1e-3;
const SWEEP_SEEDS: u64 = 50;
const SWEEP_EPSILONS: [f64; 3] = [0.05, 0.2, 0.5];
const SWEEP_MAX_SECONDS: f64 = 60.0;
const ALGORITHMS: [Algorithm; 4] = [Algorithm::Apx, Algorithm::Bi, Algorithm::Nobi, Algorithm::Div];
const CORRELATED_SEEDS: u64 = 200;
const DIV_FIXTURES: u64 = 30;
const DIV_MAX_GROUND: usize = 12;
const DIV_MIN_RATIO: f64 = 0.25;
const DIV_SUBSET_GROUND: usize = 8;
const C7_ROWS: usize = 4000;
const C7_FEATURES: usize = 11;
const C7_BUDGET: usize = 500;
const C7_EPSILON: f64 = 0.2;
const C7_APX_MAX_SECONDS: f64 = 60.0;
const C7_REPEATS: usize = 3;

struct Suite {
    failed: Vec<&'static str>,
}

impl Suite {
    fn report(&mut self, id: &'static str, title: &str, ok: bool, detail: String) {
        println!("{} {id:<3} {title}: {detail}", if ok { "PASS" } else { "FAIL" });
        if !ok {
            self.failed.push(id);
        }
    }
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name).join("config.json")
}

fn sweep_config(algorithm: Algorithm, epsilon: f64, u: &UniversalTable) -> SearchConfig {
    SearchConfig {
        algorithm,
        epsilon,
        budget: usize::MAX,
        k: 3,
        target: u.schema().last().cloned(),
        ..SearchConfig::default()
    }
}

fn submitted(out: &SearchOutcome) -> Vec<Occupant> {
    out.stats
        .submitted
        .iter()
        .map(|b| Occupant {
            bitmap: b.clone(),
            values: out.log.get(b).expect("logged").values.clone(),
        })
        .collect()
}

fn c1(s: &mut Suite) {
    let p = prepare(RunConfig::load(&fixture("worked")).expect("fixture config")).expect("fixture loads");
    let m = Materializer::new(&p.table);
    let order = ["f", "7", "b", "d", "e"];
    let mut log = TestLog::new(p.measures.len());
    let mut vectors = Vec::new();
    for h in order {
        let b = StateBitmap::from_hex(h, p.table.bit_count()).unwrap();
        vectors.push(valuate(&m, p.estimator.as_ref(), &p.measures, &mut log, &b).unwrap().0);
    }
    let started = Instant::now();
    let front = exact_pareto(&vectors);
    let d = |a: usize, b: usize| dominates(&vectors[a], &vectors[b]).unwrap();
    let relations = d(1, 0) && d(2, 1) && d(4, 3) && !d(2, 4) && !d(4, 2);
    let took = started.elapsed().as_secs_f64();
    let names: Vec<&str> = front.iter().map(|&i| order[i]).collect();
    s.report(
        "C1",
        "worked example front and dominance",
        front == [2, 4] && relations && took < C1_MAX_SECONDS,
        format!("front {names:?} (expected [\"b\", \"e\"]), relations hold = {relations}, {:.1} us", took * 1e6),
    );
}

struct SweepTotals {
    runs: usize,
    cover_violations: usize,
    front_checks: usize,
    front_violations: usize,
    other_front_misses: Vec<String>,
    grid_overflows: usize,
    uniform_pruned: usize,
    uniform_unsound: usize,
    div_ratios: Vec<f64>,
    seconds: f64,
}

/// Criteria 2, 3 and 6 share one sweep over random instances.
fn sweep() -> SweepTotals {
    let mut t = SweepTotals {
        runs: 0,
        cover_violations: 0,
        front_checks: 0,
        front_violations: 0,
        other_front_misses: Vec::new(),
        grid_overflows: 0,
        uniform_pruned: 0,
        uniform_unsound: 0,
        div_ratios: Vec::new(),
        seconds: 0.0,
    };
    let started = Instant::now();
    for seed in 0..SWEEP_SEEDS {
        let u = random_table(seed, 5, 3);
        let ms = unit_measures(3, 0.05, 0.9);
        let est = uniform_estimator(seed, &ms, 0.02, 1.0);
        let mut full_log = TestLog::new(3);
        let all = enumerate_all(&u, &ms, &est, &mut full_log, 20).expect("within cap");
        let in_bounds: Vec<Occupant> = all.states.iter().filter(|o| o.values.iter().all(|&v| (0.05..=0.9).contains(&v))).cloned().collect();
        let vectors: Vec<Vec<f64>> = in_bounds.iter().map(|o| o.values.clone()).collect();
        let oracle_front: Vec<&Occupant> = exact_pareto(&vectors).into_iter().map(|i| &in_bounds[i]).collect();
        for algorithm in ALGORITHMS {
            for eps in SWEEP_EPSILONS {
                let cfg = sweep_config(algorithm, eps, &u);
                let out = run(&u, &ms, &cfg, &est, None).expect("valid sweep config");
                assert!(out.failure.is_none());
                t.runs += 1;
                t.cover_violations += check_eps_cover(&out.grid, &submitted(&out), eps).eps_cover_violations.len();
                if (out.grid.len() as u128) > out.grid.capacity_bound() {
                    t.grid_overflows += 1;
                }
                let missed = oracle_front
                    .iter()
                    .filter(|f| !out.grid.occupants().any(|o| naive_eps_dominates(&o.values, &f.values, eps)))
                    .count();
                if algorithm == Algorithm::Apx {
                    t.front_checks += 1;
                    t.front_violations += missed;
                } else if missed > 0 {
                    t.other_front_misses.push(format!("{}/{}", algorithm.as_str(), termination_name(out.stats.termination)));
                }
                if algorithm == Algorithm::Bi {
                    for x in &out.stats.pruned {
                        t.uniform_pruned += 1;
                        let v = &full_log.get(&x.bitmap).expect("enumerated").values;
                        if !out.log.entries().iter().any(|e| naive_eps_dominates(&e.values, v, eps)) {
                            t.uniform_unsound += 1;
                        }
                    }
                }
                if algorithm == Algorithm::Div {
                    let ground: Vec<Occupant> = out.grid.front().into_iter().cloned().collect();
                    let chosen = out.diversified.as_ref().expect("div selects");
                    let picked: Vec<Occupant> = ground.iter().filter(|o| chosen.contains(&o.bitmap)).cloned().collect();
                    if picked.len() == cfg.k && ground.len() <= DIV_MAX_GROUND {
                        t.div_ratios.push(check_div_bound(&picked, &ground, cfg.k, cfg.alpha, &out.log).unwrap());
                    }
                }
            }
        }
    }
    t.seconds = started.elapsed().as_secs_f64();
    t
}

fn c4(s: &mut Suite, t: &SweepTotals) {
    // Worked pruning instance.
    let f = synth::sandwich_fixture();
    let out = run(&f.table, &f.measures, &f.config, &f.estimator, Some(f.prior.clone())).unwrap();
    let pruned: BTreeSet<String> = out.stats.pruned.iter().map(|x| x.bitmap.to_binary()).collect();
    let named = pruned.contains(synth::SANDWICH_S4) && pruned.contains(synth::SANDWICH_S5);
    let eps = f.config.epsilon;
    let m = Materializer::new(&f.table);
    let mut forced = out.log.clone();
    let mut unsound = 0;
    for x in &out.stats.pruned {
        let v = valuate(&m, &f.estimator, &f.measures, &mut forced, &x.bitmap).unwrap().0;
        if !out.log.entries().iter().any(|e| naive_eps_dominates(&e.values, &v, eps)) {
            unsound += 1;
        }
    }

    // Random instances whose measures follow the literal count.
    let (mut swept, mut swept_unsound, mut pruning_seeds) = (0, 0, 0);
    for seed in 0..CORRELATED_SEEDS {
        let u = random_table(seed, 5, 3);
        let ms = unit_measures(3, 0.05, 1.0);
        let est = correlated_estimator(seed, &ms, u.bit_count(), 0.06, 0.95);
        let cfg = SearchConfig {
            theta: 0.6,
            ..sweep_config(Algorithm::Bi, 0.2, &u)
        };
        let out = run(&u, &ms, &cfg, &est, None).unwrap();
        let m = Materializer::new(&u);
        let mut forced = out.log.clone();
        pruning_seeds += !out.stats.pruned.is_empty() as usize;
        for x in &out.stats.pruned {
            swept += 1;
            let v = valuate(&m, &est, &ms, &mut forced, &x.bitmap).unwrap().0;
            if !out.log.entries().iter().any(|e| naive_eps_dominates(&e.values, &v, cfg.epsilon)) {
                swept_unsound += 1;
            }
        }
    }
    s.report(
        "C4",
        "pruning soundness",
        named && unsound == 0 && swept_unsound == 0 && swept > 0,
        format!(
            "worked instance pruned {pruned:?} (s4 and s5 included = {named}), {unsound} unsound; \
             correlated sweep pruned {swept} states over {pruning_seeds}/{CORRELATED_SEEDS} seeds, {swept_unsound} unsound"
        ),
    );
    println!(
        "INFO C4  uncorrelated sweep (bi, uniform random measures): {} pruned, {} not ε-dominated by a valuated state",
        t.uniform_pruned, t.uniform_unsound
    );
}

fn random_ground(rng: &mut ChaCha8Rng, n: usize) -> (Vec<Occupant>, TestLog) {
    let bits = 10;
    let mut log = TestLog::new(3);
    let mut ground: Vec<Occupant> = Vec::new();
    while ground.len() < n {
        let b = StateBitmap::from_bits(&(0..bits).map(|_| rng.gen_bool(0.5)).collect::<Vec<_>>());
        if b.count_ones() == 0 || ground.iter().any(|o| o.bitmap == b) {
            continue;
        }
        let values: Vec<f64> = (0..3).map(|_| rng.gen_range(0.05..1.0)).collect();
        log.append(LogEntry {
            bitmap: b.clone(),
            values: values.clone(),
            raw: values.clone(),
        })
        .unwrap();
        ground.push(Occupant { bitmap: b, values });
    }
    (ground, log)
}

fn c5(s: &mut Suite, t: &SweepTotals) {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut ratios = Vec::new();
    for _ in 0..DIV_FIXTURES {
        let n = rng.gen_range(5..=DIV_MAX_GROUND);
        let (ground, log) = random_ground(&mut rng, n);
        let alpha = rng.gen_range(0.0..=1.0);
        for k in [2, 3, 4] {
            let chosen: Vec<Occupant> = diversify_level(&ground, k, alpha, &log).into_iter().map(|i| ground[i].clone()).collect();
            ratios.push(check_div_bound(&chosen, &ground, k, alpha, &log).unwrap());
        }
    }
    ratios.extend(&t.div_ratios);
    let worst = ratios.iter().copied().fold(f64::INFINITY, f64::min);

    let (mut sym_bad, mut self_bad, mut mono_bad) = (0, 0, 0);
    for _ in 0..DIV_FIXTURES {
        let (ground, log) = random_ground(&mut rng, DIV_SUBSET_GROUND);
        let alpha = rng.gen_range(0.0..=1.0);
        for a in &ground {
            self_bad += (dis_score(a, a, alpha, &log) != 0.0) as usize;
            for b in &ground {
                sym_bad += (dis_score(a, b, alpha, &log) != dis_score(b, a, alpha, &log)) as usize;
            }
        }
        let subset = |mask: u32| -> Vec<&Occupant> { (0..ground.len()).filter(|i| mask >> i & 1 == 1).map(|i| &ground[i]).collect() };
        for x in 0u32..1 << ground.len() {
            let dx = div_score(&subset(x), alpha, &log);
            for i in 0..ground.len() {
                if x >> i & 1 == 1 && div_score(&subset(x & !(1 << i)), alpha, &log) > dx {
                    mono_bad += 1;
                }
            }
        }
    }
    s.report(
        "C5",
        "diversification bound",
        worst >= DIV_MIN_RATIO && sym_bad + self_bad + mono_bad == 0,
        format!(
            "min ratio {worst:.3} over {} selections (bound {DIV_MIN_RATIO}); dis asymmetries {sym_bad}, \
             nonzero self-distances {self_bad}, monotonicity breaks {mono_bad}",
            ratios.len()
        ),
    );
}

fn ridge_measures(rows: f64) -> MeasureSet {
    let spec = |name: &str, hi: f64| MeasureSpec {
        name: name.into(),
        direction: Direction::Minimize,
        raw_low: 0.0,
        raw_high: hi,
        pl: 0.01,
        pu: 1.0,
        decisive: false,
    };
    MeasureSet::new(
        vec![
            spec("train_error", 10.0),
            spec("holdout_error", 10.0),
            spec("train_cost", rows),
            spec("model_size", 12.0),
        ],
        None,
    )
    .unwrap()
}

fn c7(s: &mut Suite) {
    let rel = synth::regression_table(7, C7_ROWS, C7_FEATURES);
    let u = UniversalTable::from_relation(rel)
        .with_literals(skyforge_core::tabular::DEFAULT_MAX_CLUSTERS)
        .and_then(|u| u.compress_rows())
        .unwrap();
    let est = RidgeEstimator::new(
        &u,
        &RidgeConfig {
            target: "y".into(),
            lambda: 1e-8,
        },
    )
    .unwrap();
    let ms = ridge_measures(C7_ROWS as f64);
    let time = |algorithm: Algorithm| -> (f64, usize) {
        let cfg = SearchConfig {
            algorithm,
            epsilon: C7_EPSILON,
            budget: C7_BUDGET,
            target: Some("y".into()),
            ..SearchConfig::default()
        };
        let mut best = f64::INFINITY;
        let mut valuations = 0;
        for _ in 0..C7_REPEATS {
            let started = Instant::now();
            let out = run(&u, &ms, &cfg, &est, None).unwrap();
            best = best.min(started.elapsed().as_secs_f64());
            valuations = out.stats.valuations;
        }
        (best, valuations)
    };
    let (apx, apx_n) = time(Algorithm::Apx);
    let (bi, bi_n) = time(Algorithm::Bi);
    s.report(
        "C7",
        "efficiency smoke test",
        apx < C7_APX_MAX_SECONDS && bi <= apx,
        format!(
            "{} columns x {C7_ROWS} rows ({} compressed, {} bits); apx {apx:.3}s ({apx_n} valuations, limit {C7_APX_MAX_SECONDS}s), \
             bi {bi:.3}s ({bi_n} valuations); best of {C7_REPEATS}",
            u.schema().len(),
            u.relation().row_count(),
            u.bit_count()
        ),
    );
}

fn fingerprint(o: &SearchOutcome) -> String {
    let cells: Vec<String> = o.grid.cells().map(|(p, x)| format!("{:?}:{}:{:?}", p.0, x.bitmap, x.values)).collect();
    let pruned: Vec<String> = o.stats.pruned.iter().map(|x| x.bitmap.to_hex()).collect();
    format!("{cells:?}|{:?}|{pruned:?}|{:?}|{:?}", o.stats.submitted, o.diversified, o.stats.termination)
}

fn strip_timing(path: &Path) -> String {
    std::fs::read_to_string(path.join("manifest.json"))
        .unwrap()
        .lines()
        .filter(|l| !l.contains("wall_seconds"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn c8(s: &mut Suite) {
    let mut mismatches = Vec::new();
    let mut checked = 0;
    for seed in 0..10 {
        let u = random_table(seed, 5, 3);
        let ms = unit_measures(3, 0.05, 0.9);
        let est = uniform_estimator(seed, &ms, 0.02, 1.0);
        for algorithm in ALGORITHMS {
            let cfg = sweep_config(algorithm, 0.2, &u);
            let a = run(&u, &ms, &cfg, &est, None).unwrap();
            let b = run(&u, &ms, &SearchConfig { workers: 4, ..cfg.clone() }, &est, None).unwrap();
            checked += 1;
            if fingerprint(&a) != fingerprint(&b) {
                mismatches.push(format!("{}:{seed}", algorithm.as_str()));
            }
        }
    }
    let tmp = tempfile::TempDir::new().unwrap();
    let mut manifests_equal = true;
    for name in ["worked", "sandwich", "ridge"] {
        let outs: Vec<PathBuf> = (0..2).map(|i| tmp.path().join(format!("{name}{i}"))).collect();
        for o in &outs {
            let status = Command::new(env!("CARGO_BIN_EXE_skyforge"))
                .args(["run", "--config", fixture(name).to_str().unwrap(), "--output", o.to_str().unwrap()])
                .output()
                .unwrap()
                .status;
            manifests_equal &= status.success();
        }
        manifests_equal &= strip_timing(&outs[0]) == strip_timing(&outs[1]);
    }
    s.report(
        "C8",
        "determinism and replay",
        mismatches.is_empty() && manifests_equal,
        format!(
            "{checked} searches identical across 1 and 4 workers (mismatches {mismatches:?}); \
             CLI reruns byte-identical apart from timing = {manifests_equal}"
        ),
    );
    println!(
        "N/A  C8  not reproducible here: accuracy and F1 on the Kaggle, OpenData and HuggingFace corpora, \
         learned-estimator quality and the case studies need external data and trained models"
    );
}

fn main() {
    let mut s = Suite { failed: Vec::new() };
    c1(&mut s);

    let t = sweep();
    s.report(
        "C2",
        "ε-cover of valuated states",
        t.cover_violations == 0 && t.seconds < SWEEP_MAX_SECONDS,
        format!(
            "{} runs ({SWEEP_SEEDS} seeds x 4 algorithms x ε {SWEEP_EPSILONS:?}), {} violations, sweep {:.1}s (limit {SWEEP_MAX_SECONDS}s)",
            t.runs, t.cover_violations, t.seconds
        ),
    );
    s.report(
        "C3",
        "oracle front coverage",
        t.front_violations == 0 && t.front_checks > 0,
        format!(
            "apx with unlimited budget: {} runs, {} exact-front members left uncovered",
            t.front_checks, t.front_violations
        ),
    );
    let tally: std::collections::BTreeMap<&str, usize> = t.other_front_misses.iter().fold(Default::default(), |mut m, x| {
        *m.entry(x.as_str()).or_default() += 1;
        m
    });
    println!(
        "INFO C3  bi/nobi/div stop where the frontiers meet and div keeps k states per level, so they need not cover \
         the whole front: {} of {} runs miss some member, by algorithm/termination {tally:?}",
        t.other_front_misses.len(),
        t.runs - t.front_checks,
    );
    c4(&mut s, &t);
    c5(&mut s, &t);
    s.report(
        "C6",
        "grid cell bound",
        t.grid_overflows == 0,
        format!("{} runs checked, {} above the cell bound", t.runs, t.grid_overflows),
    );
    c7(&mut s);
    c8(&mut s);

    if s.failed.is_empty() {
        println!("acceptance: all criteria passed");
    } else {
        println!("acceptance: failed {:?}", s.failed);
        std::process::exit(1);
    }
}
