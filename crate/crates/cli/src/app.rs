//! The `run` and `verify` pipelines.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;
use skyforge_core::measures::{
    LogEntry, LookupEstimator, LookupTable, RawMeasures, RidgeConfig, RidgeEstimator, SubprocessEstimator,
};
use skyforge_core::oracle::{
    check_div_bound, check_eps_cover, enumerate_all, naive_eps_dominates, EnumerationReport, Violation,
    DEFAULT_MAX_BITS, MAX_DIV_GROUND,
};
use skyforge_core::search::{run, SearchOutcome, Termination};
use skyforge_core::skyline::Occupant;
use skyforge_core::tabular::{build_universal, read_csv, JoinSpec};
use skyforge_core::{Algorithm, Error, Estimator, Materializer, MeasureSet, StateBitmap, TestLog, UniversalTable};

use crate::config::{EstimatorConfig, RunConfig};
use crate::manifest::{
    literal_entries, provenance, termination_name, DatasetEntry, Manifest, MeasureValue, Metadata, PrunedEntry,
    Timing,
};
use crate::CliError;

/// Everything a search needs, loaded from a validated config.
pub struct Prepared {
    pub config: RunConfig,
    pub table: UniversalTable,
    pub measures: MeasureSet,
    pub estimator: Box<dyn Estimator>,
    pub prior: Option<TestLog>,
}

fn read_lookup(path: &Path) -> Result<LookupTable, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(vec![format!("cannot read {}: {e}", path.display())]))?;
    serde_json::from_str(&text).map_err(|e| CliError::Config(vec![format!("{}: {e}", path.display())]))
}

/// Turns a table of raw vectors into log entries normalized by `measures`.
fn prior_log(t: &LookupTable, measures: &MeasureSet, bits: usize) -> Result<TestLog, CliError> {
    let mut log = TestLog::new(measures.len());
    for row in &t.entries {
        if row.values.len() != t.measures.len() {
            return Err(CliError::Config(vec![format!("prior test {} has the wrong length", row.bitmap)]));
        }
        let raw: RawMeasures = t.measures.iter().cloned().zip(row.values.iter().copied()).collect();
        let (values, raw) = measures.normalize_all(&raw)?;
        let bitmap = StateBitmap::from_hex(&row.bitmap, bits)?;
        log.append(LogEntry { bitmap, values, raw })?;
    }
    Ok(log)
}

pub fn prepare(mut config: RunConfig) -> Result<Prepared, CliError> {
    let measures = config.validate()?;
    let relations = config
        .sources
        .iter()
        .map(|s| read_csv(&s.path, &s.name))
        .collect::<skyforge_core::Result<Vec<_>>>()?;
    let keys: Vec<JoinSpec> = config
        .join_keys
        .iter()
        .map(|k| JoinSpec {
            left: k.left.clone(),
            right: k.right.clone(),
            on: k.on.clone(),
        })
        .collect();
    let mut table = build_universal(&relations, &keys)?.with_literals(config.max_clusters)?;
    if config.compress {
        table = table.compress_rows()?;
    }
    if let Some(t) = &config.search.target {
        if table.relation().column_index(t).is_none() {
            return Err(CliError::Config(vec![format!("target `{t}` is not an attribute of the universal table")]));
        }
    }
    let bits = table.bit_count();
    let estimator: Box<dyn Estimator> = match &config.estimator {
        EstimatorConfig::Lookup { path, table: inline } => {
            let t = match (path, inline) {
                (Some(p), _) => read_lookup(p)?,
                (None, Some(t)) => t.clone(),
                (None, None) => unreachable!("validated"),
            };
            Box::new(LookupEstimator::from_table(&t, bits).map_err(|e| CliError::Config(vec![e.to_string()]))?)
        }
        EstimatorConfig::Ridge { lambda } => Box::new(RidgeEstimator::new(
            &table,
            &RidgeConfig {
                target: config.search.target.clone().expect("validated"),
                lambda: *lambda,
            },
        )?),
        EstimatorConfig::Subprocess { .. } => Box::new(SubprocessEstimator::spawn(config.subprocess().unwrap())?),
    };
    let prior = match &config.prior_tests {
        Some(p) => Some(prior_log(&read_lookup(p)?, &measures, bits)?),
        None => None,
    };
    Ok(Prepared {
        config,
        table,
        measures,
        estimator,
        prior,
    })
}

fn search(p: &Prepared) -> Result<(SearchOutcome, f64), CliError> {
    let started = Instant::now();
    let out = run(&p.table, &p.measures, &p.config.search, p.estimator.as_ref(), p.prior.clone())?;
    Ok((out, started.elapsed().as_secs_f64()))
}

fn write_json(path: &Path, v: &impl Serialize) -> Result<(), CliError> {
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    serde_json::to_writer_pretty(&mut f, v).map_err(std::io::Error::from)?;
    f.write_all(b"\n")?;
    f.flush()?;
    Ok(())
}

pub struct RunResult {
    pub manifest: Manifest,
    pub path: PathBuf,
}

/// Writes the grid's datasets as CSVs and returns the manifest describing them.
fn build_manifest(p: &Prepared, out: &SearchOutcome, wall: f64) -> Result<Manifest, CliError> {
    let u = &p.table;
    let dir = &p.config.output;
    std::fs::create_dir_all(dir.join("datasets"))?;
    let m = Materializer::new(u);
    let chosen = out.diversified.clone().unwrap_or_default();
    let names = p.measures.names();
    let mut datasets = Vec::new();
    let front = out.grid.front();
    for occ in front {
        let pos = out.grid.position_of(&occ.bitmap).expect("front members are occupants");
        let hex = occ.bitmap.to_hex();
        let rel_path = format!("datasets/{hex}.csv");
        let view = m.materialize(&occ.bitmap);
        let file = std::fs::File::create(dir.join(&rel_path))?;
        view.write_csv(u, std::io::BufWriter::new(file), true)?;
        let raw = &out.log.get(&occ.bitmap).expect("occupants are logged").raw;
        let measures: BTreeMap<String, MeasureValue> = names
            .iter()
            .enumerate()
            .map(|(i, n)| {
                (
                    n.clone(),
                    MeasureValue {
                        raw: raw[i],
                        normalized: occ.values[i],
                    },
                )
            })
            .collect();
        datasets.push(DatasetEntry {
            bitmap: hex,
            csv: rel_path,
            rows: view.expanded_rows(u),
            columns: view.column_names(u),
            measures,
            grid_position: pos.clone(),
            below_lower: out.grid.below_lower().contains(&occ.bitmap),
            diversified: chosen.contains(&occ.bitmap),
            provenance: provenance(u, out, &occ.bitmap),
        });
    }
    let s = &out.stats;
    Ok(Manifest {
        metadata: Metadata {
            config_hash: p.config.hash(),
            algorithm: p.config.search.algorithm.as_str().to_string(),
            epsilon: p.config.search.epsilon,
            decisive: names[p.measures.decisive()].clone(),
            bits: u.bit_count(),
            universal_rows: u.relation().row_count(),
            valuations: s.valuations,
            cache_hits: s.cache_hits,
            submitted: s.submitted.len(),
            iterations: s.iterations,
            termination: termination_name(s.termination).to_string(),
            meet: s.meet.as_ref().map(StateBitmap::to_hex),
            partial: out.is_partial(),
            failure: out.failure.as_ref().map(ToString::to_string),
        },
        literals: literal_entries(u),
        datasets,
        diversified: out.diversified.as_ref().map(|d| d.iter().map(StateBitmap::to_hex).collect()),
        pruned: s
            .pruned
            .iter()
            .map(|x| PrunedEntry {
                bitmap: x.bitmap.to_hex(),
                parent: x.parent.to_hex(),
                direction: x.direction,
                pair: (x.pair.0.to_hex(), x.pair.1.to_hex()),
            })
            .collect(),
        timing: Timing { wall_seconds: wall },
    })
}

/// Runs the configured search and writes `manifest.json` plus one CSV per
/// skyline dataset under the output directory.
pub fn run_command(p: &Prepared) -> Result<RunResult, CliError> {
    let (out, wall) = search(p)?;
    let manifest = build_manifest(p, &out, wall)?;
    let path = p.config.output.join("manifest.json");
    write_json(&path, &manifest)?;
    let shown = path.display().to_string();
    if let Some(e) = &out.failure {
        return Err(CliError::Estimator {
            manifest: shown,
            reason: e.to_string(),
        });
    }
    if manifest.datasets.is_empty() {
        return Err(CliError::EmptySkyline(shown));
    }
    Ok(RunResult { manifest, path })
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyReport {
    pub algorithm: String,
    pub epsilon: f64,
    pub termination: String,
    /// Cover of every valuated state; always required.
    pub report: EnumerationReport,
    /// Whether the run explored the whole space, so that the cover of all
    /// enumerated states is required too.
    pub full_cover_required: bool,
    pub full_cover_violations: Vec<Violation>,
    pub pruned_violations: Vec<Violation>,
    pub div_ratio: Option<f64>,
    pub div_violation: bool,
    pub grid_cells: usize,
    pub capacity_bound: String,
    pub passed: bool,
}

impl VerifyReport {
    pub fn violation_count(&self) -> usize {
        self.report.eps_cover_violations.len()
            + if self.full_cover_required { self.full_cover_violations.len() } else { 0 }
            + self.pruned_violations.len()
            + self.div_violation as usize
            + (self.grid_cells as u128 > self.capacity_bound.parse::<u128>().unwrap_or(u128::MAX)) as usize
    }
}

/// Runs the configured search and checks it against exhaustive enumeration.
/// `corrupt` empties the grid first so the checks have something to find.
pub fn verify_command(p: &Prepared, corrupt: bool) -> Result<VerifyReport, CliError> {
    let u = &p.table;
    let bits = u.bit_count();
    if bits > DEFAULT_MAX_BITS {
        return Err(Error::EnumerationCap {
            bits,
            cap: DEFAULT_MAX_BITS,
            states: 1u128 << bits.min(127),
        }
        .into());
    }
    let (mut out, _) = search(p)?;
    if let Some(e) = out.failure.take() {
        return Err(e.into());
    }
    if corrupt {
        let cells: Vec<_> = out.grid.cells().map(|(pos, _)| pos.clone()).collect();
        for pos in cells {
            out.grid.evict(&pos);
        }
    }
    let cfg = &p.config.search;
    let eps = cfg.epsilon;

    let seen: Vec<Occupant> = out
        .stats
        .submitted
        .iter()
        .map(|b| Occupant {
            bitmap: b.clone(),
            values: out.log.get(b).expect("submitted states are logged").values.clone(),
        })
        .collect();
    let mut report = check_eps_cover(&out.grid, &seen, eps);

    let mut full_log = out.log.clone();
    let all = enumerate_all(u, &p.measures, p.estimator.as_ref(), &mut full_log, DEFAULT_MAX_BITS)?;
    let full = check_eps_cover(&out.grid, &all.states, eps);
    report.total_states = all.total;
    report.degenerate = all.degenerate;
    report.exact_front = full.exact_front;
    let full_cover_required =
        cfg.algorithm == Algorithm::Apx && out.stats.termination == Termination::Exhausted && cfg.max_length >= bits;

    let mut pruned_violations = Vec::new();
    for x in &out.stats.pruned {
        let v = &full_log.get(&x.bitmap).expect("enumerated").values;
        if out.log.entries().iter().any(|e| naive_eps_dominates(&e.values, v, eps)) {
            report.pruned_validated += 1;
        } else {
            pruned_violations.push(Violation {
                bitmap: x.bitmap.to_hex(),
                reason: format!("pruned state {v:?} is not {eps}-dominated by any valuated state"),
            });
        }
    }

    let (mut div_ratio, mut div_violation) = (None, false);
    if let Some(chosen) = &out.diversified {
        let ground: Vec<Occupant> = out.grid.front().into_iter().cloned().collect();
        let picked: Vec<Occupant> = ground.iter().filter(|o| chosen.contains(&o.bitmap)).cloned().collect();
        if picked.len() == cfg.k && ground.len() <= MAX_DIV_GROUND {
            let r = check_div_bound(&picked, &ground, cfg.k, cfg.alpha, &out.log)?;
            div_violation = r < 0.25;
            div_ratio = Some(r);
        }
    }

    let mut v = VerifyReport {
        algorithm: cfg.algorithm.as_str().to_string(),
        epsilon: eps,
        termination: termination_name(out.stats.termination).to_string(),
        report,
        full_cover_required,
        full_cover_violations: full.eps_cover_violations,
        pruned_violations,
        div_ratio,
        div_violation,
        grid_cells: out.grid.len(),
        capacity_bound: out.grid.capacity_bound().to_string(),
        passed: false,
    };
    v.passed = v.violation_count() == 0;
    std::fs::create_dir_all(&p.config.output)?;
    write_json(&p.config.output.join("verify.json"), &v)?;
    Ok(v)
}
