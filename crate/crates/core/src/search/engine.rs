use std::collections::{HashSet, VecDeque};

use rayon::prelude::*;

use super::div::diversify_level;
use super::prune::{param_eps_dominates, PrunedRegion};
use super::{Algorithm, RunningGraph, SearchConfig};
use crate::bitmap::StateBitmap;
use crate::error::{Error, Result};
use crate::measures::{estimator::fresh_entry, CorrelationGraph, Estimator, LogEntry, MeasureSet, PerfVector, TestLog};
use crate::operators::{Materializer, SearchDirection, SearchState};
use crate::skyline::{Occupant, SkylineGrid};
use crate::tabular::UniversalTable;

/// Log sizes below this always trigger a correlation refresh; above it the
/// graph is rebuilt once the log has grown by a tenth.
const EAGER_REFRESH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Termination {
    /// Every queue drained (or every remaining state lies past the length cap).
    #[default]
    Exhausted,
    Budget,
    /// The two frontiers shared a state.
    Meet,
    /// The estimator failed; results are partial.
    Failed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PrunedState {
    pub bitmap: StateBitmap,
    pub parent: StateBitmap,
    pub direction: SearchDirection,
    pub pair: (StateBitmap, StateBitmap),
}

#[derive(Debug, Clone, Default)]
pub struct RunStats {
    /// Estimator invocations (log hits excluded).
    pub valuations: usize,
    pub cache_hits: usize,
    /// Every state handed to the grid, in submission order.
    pub submitted: Vec<StateBitmap>,
    pub pruned: Vec<PrunedState>,
    pub region: PrunedRegion,
    pub meet: Option<StateBitmap>,
    pub iterations: usize,
    pub termination: Termination,
}

#[derive(Debug)]
pub struct SearchOutcome {
    pub grid: SkylineGrid,
    pub graph: RunningGraph,
    pub log: TestLog,
    pub stats: RunStats,
    /// Final diversified selection from the grid (diversified search only).
    pub diversified: Option<Vec<StateBitmap>>,
    pub failure: Option<Error>,
}

impl SearchOutcome {
    pub fn is_partial(&self) -> bool {
        self.failure.is_some()
    }
}

enum Halt {
    Budget,
    Failed(Error),
}

/// Start state of the backward search: every literal of `target`, plus the
/// first literal of the first `min_features` other attributes that have one.
pub fn back_st(u: &UniversalTable, target: &str, min_features: usize) -> Result<StateBitmap> {
    let col = u
        .relation()
        .column_index(target)
        .ok_or_else(|| Error::Argument(format!("target `{target}` is not an attribute")))?;
    if u.bit_range(col).is_empty() {
        return Err(Error::Argument(format!("target `{target}` has no literals")));
    }
    let mut b = StateBitmap::empty(u.bit_count());
    for bit in u.bit_range(col) {
        b.set(bit);
    }
    let extra = (0..u.schema().len())
        .filter(|&c| c != col && !u.bit_range(c).is_empty())
        .take(min_features);
    for c in extra {
        b.set(u.bit_range(c).start);
    }
    Ok(b)
}

/// Runs the algorithm named in `cfg`. `prior` seeds the test log.
pub fn run(
    u: &UniversalTable,
    measures: &MeasureSet,
    cfg: &SearchConfig,
    est: &dyn Estimator,
    prior: Option<TestLog>,
) -> Result<SearchOutcome> {
    cfg.validate()?;
    let engine = Engine::new(u, measures, cfg, est, prior)?;
    Ok(match cfg.algorithm {
        Algorithm::Apx => engine.apx(),
        Algorithm::Bi => engine.bidirectional(Mode::Pruned)?,
        Algorithm::Nobi => engine.bidirectional(Mode::Plain)?,
        Algorithm::Div => engine.bidirectional(Mode::Diversified)?,
    })
}

fn with_algorithm(cfg: &SearchConfig, a: Algorithm) -> SearchConfig {
    SearchConfig {
        algorithm: a,
        ..cfg.clone()
    }
}

pub fn run_apx(u: &UniversalTable, measures: &MeasureSet, cfg: &SearchConfig, est: &dyn Estimator) -> Result<SearchOutcome> {
    run(u, measures, &with_algorithm(cfg, Algorithm::Apx), est, None)
}

pub fn run_bi(
    u: &UniversalTable,
    measures: &MeasureSet,
    cfg: &SearchConfig,
    est: &dyn Estimator,
    pruning: bool,
) -> Result<SearchOutcome> {
    let a = if pruning { Algorithm::Bi } else { Algorithm::Nobi };
    run(u, measures, &with_algorithm(cfg, a), est, None)
}

pub fn run_div(u: &UniversalTable, measures: &MeasureSet, cfg: &SearchConfig, est: &dyn Estimator) -> Result<SearchOutcome> {
    run(u, measures, &with_algorithm(cfg, Algorithm::Div), est, None)
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Mode {
    Plain,
    Pruned,
    Diversified,
}

struct Valuated {
    state: SearchState,
    values: Vec<f64>,
}

struct Engine<'a> {
    m: Materializer<'a>,
    est: &'a dyn Estimator,
    measures: &'a MeasureSet,
    cfg: &'a SearchConfig,
    log: TestLog,
    grid: SkylineGrid,
    graph: RunningGraph,
    stats: RunStats,
    corr: CorrelationGraph,
    pool: Option<rayon::ThreadPool>,
    visited: HashSet<StateBitmap>,
}

impl<'a> Engine<'a> {
    fn new(
        u: &'a UniversalTable,
        measures: &'a MeasureSet,
        cfg: &'a SearchConfig,
        est: &'a dyn Estimator,
        prior: Option<TestLog>,
    ) -> Result<Self> {
        let provided = est.measures();
        if let Some(s) = measures.specs().iter().find(|s| !provided.contains(&s.name)) {
            return Err(Error::Config(format!("estimator does not report measure `{}`", s.name)));
        }
        let log = prior.unwrap_or_else(|| TestLog::new(measures.len()));
        if log.measure_count() != measures.len() {
            return Err(Error::Config("prior test log covers a different measure set".into()));
        }
        let m = Materializer::new(u);
        if m.is_degenerate(&m.full()) {
            return Err(Error::Argument("the universal table yields an empty dataset".into()));
        }
        let pool = if cfg.workers > 1 {
            Some(
                rayon::ThreadPoolBuilder::new()
                    .num_threads(cfg.workers)
                    .build()
                    .map_err(|e| Error::Config(format!("worker pool: {e}")))?,
            )
        } else {
            None
        };
        Ok(Engine {
            m,
            est,
            measures,
            cfg,
            log,
            grid: SkylineGrid::new(cfg.epsilon, measures.clone())?,
            graph: RunningGraph::default(),
            stats: RunStats::default(),
            corr: CorrelationGraph::empty(measures, cfg.theta),
            pool,
            visited: HashSet::new(),
        })
    }

    /// Valuates a prefix of `bitmaps`, in order: it stops before the first
    /// log miss that would exceed the budget, or at the first failure.
    fn valuate_many(&mut self, bitmaps: &[StateBitmap]) -> (Vec<Vec<f64>>, Option<Halt>) {
        let remaining = self.cfg.budget.saturating_sub(self.stats.valuations);
        let mut misses = Vec::new();
        let mut take = bitmaps.len();
        let mut halt = None;
        for (i, b) in bitmaps.iter().enumerate() {
            if !self.log.contains(b) {
                if misses.len() == remaining {
                    take = i;
                    halt = Some(Halt::Budget);
                    break;
                }
                misses.push(i);
            }
        }

        let mut fresh: Vec<Option<Result<LogEntry>>> = match &self.pool {
            Some(pool) if misses.len() > 1 => {
                let (m, est, measures) = (&self.m, self.est, self.measures);
                pool.install(|| {
                    misses
                        .par_iter()
                        .map(|&i| Some(fresh_entry(m, est, measures, &bitmaps[i])))
                        .collect()
                })
            }
            _ => (0..misses.len()).map(|_| None).collect(),
        };

        let mut out = Vec::with_capacity(take);
        let mut next_miss = 0;
        for b in &bitmaps[..take] {
            if let Some(e) = self.log.get(b) {
                self.stats.cache_hits += 1;
                out.push(e.values.clone());
                continue;
            }
            let entry = fresh[next_miss]
                .take()
                .unwrap_or_else(|| fresh_entry(&self.m, self.est, self.measures, b));
            next_miss += 1;
            match entry {
                Ok(entry) => {
                    self.stats.valuations += 1;
                    out.push(entry.values.clone());
                    self.log.append(entry).expect("fresh bitmap");
                }
                Err(e) => return (out, Some(Halt::Failed(e))),
            }
        }
        (out, halt)
    }

    fn submit(&mut self, b: &StateBitmap, values: &[f64]) {
        self.grid.upareto(b, values);
        self.stats.submitted.push(b.clone());
        if let Some(n) = self.graph.node_mut(b) {
            n.perf = Some(PerfVector::valuated(values));
        }
    }

    fn finish(mut self, halt: Option<Halt>, termination: Termination) -> SearchOutcome {
        let mut failure = None;
        self.stats.termination = match halt {
            None => termination,
            Some(Halt::Budget) => Termination::Budget,
            Some(Halt::Failed(e)) => {
                failure = Some(e);
                Termination::Failed
            }
        };
        SearchOutcome {
            grid: self.grid,
            graph: self.graph,
            log: self.log,
            stats: self.stats,
            diversified: None,
            failure,
        }
    }

    /// Valuates and submits start states, which become graph roots.
    fn start(&mut self, roots: &[StateBitmap]) -> Option<Halt> {
        let mut uniq: Vec<StateBitmap> = Vec::new();
        for r in roots {
            if !uniq.contains(r) {
                uniq.push(r.clone());
            }
        }
        for r in &uniq {
            self.graph.add_root(SearchState::new(r.clone(), 0));
            self.visited.insert(r.clone());
        }
        let (vals, halt) = self.valuate_many(&uniq);
        for (b, v) in uniq.iter().zip(&vals) {
            self.submit(b, v);
        }
        halt
    }

    fn apx(mut self) -> SearchOutcome {
        let root = self.m.full();
        if let Some(h) = self.start(std::slice::from_ref(&root)) {
            return self.finish(Some(h), Termination::Exhausted);
        }
        let mut queue = VecDeque::from([SearchState::new(root, 0)]);
        while let Some(s) = queue.pop_front() {
            self.stats.iterations += 1;
            let (done, halt) = self.expand(&s, SearchDirection::Forward, None, false);
            queue.extend(done.into_iter().map(|v| v.state));
            if halt.is_some() {
                return self.finish(halt, Termination::Exhausted);
            }
        }
        self.finish(None, Termination::Exhausted)
    }

    /// Generates, filters, valuates and submits the children of `s`.
    /// `opposite` is the other frontier's pending set, used to detect a meet.
    fn expand(
        &mut self,
        s: &SearchState,
        dir: SearchDirection,
        opposite: Option<&HashSet<StateBitmap>>,
        pruning: bool,
    ) -> (Vec<Valuated>, Option<Halt>) {
        if s.level >= self.cfg.max_length {
            return (Vec::new(), None);
        }
        let mut cands = Vec::new();
        for (op, c) in self.m.op_gen(s, dir) {
            if opposite.is_some_and(|o| o.contains(&c.bitmap)) && self.stats.meet.is_none() {
                self.stats.meet = Some(c.bitmap.clone());
            }
            if !self.visited.contains(&c.bitmap) {
                cands.push((op, c));
            }
        }
        if pruning {
            self.refresh_correlation();
            let mut kept = Vec::with_capacity(cands.len());
            for (op, c) in cands {
                let pair = self
                    .stats
                    .region
                    .pruning_pair(&c.bitmap, self.cfg.epsilon, &self.corr, &self.log, self.measures)
                    .cloned();
                match pair {
                    Some(pair) => {
                        self.visited.insert(c.bitmap.clone());
                        self.stats.pruned.push(PrunedState {
                            bitmap: c.bitmap,
                            parent: s.bitmap.clone(),
                            direction: dir,
                            pair,
                        });
                    }
                    None => kept.push((op, c)),
                }
            }
            cands = kept;
        }
        let bitmaps: Vec<StateBitmap> = cands.iter().map(|(_, c)| c.bitmap.clone()).collect();
        let (vals, halt) = self.valuate_many(&bitmaps);
        let mut done = Vec::with_capacity(vals.len());
        for ((op, c), v) in cands.into_iter().zip(vals) {
            self.visited.insert(c.bitmap.clone());
            self.graph.add_edge(&s.bitmap, op, c.clone());
            self.submit(&c.bitmap, &v);
            done.push(Valuated {
                state: c,
                values: v,
            });
        }
        (done, halt)
    }

    fn refresh_correlation(&mut self) {
        let n = self.log.len();
        let built = self.corr.built_from();
        if n != built && (n < EAGER_REFRESH || n * 10 >= built * 11) {
            self.corr = CorrelationGraph::build(&self.log, self.measures, self.cfg.theta);
        }
    }

    fn bidirectional(mut self, mode: Mode) -> Result<SearchOutcome> {
        let target = self.cfg.target.as_deref().expect("validated");
        let front = self.m.full();
        let back = back_st(self.m.table(), target, self.est.min_feature_columns())?;
        if self.m.is_degenerate(&back) {
            return Err(Error::Argument(format!("backward start state {back} is degenerate")));
        }
        let pruning = mode != Mode::Plain;
        if let Some(h) = self.start(&[front.clone(), back.clone()]) {
            return Ok(self.conclude(Some(h), Termination::Exhausted, mode));
        }
        if front == back {
            self.stats.meet = Some(front.clone());
            return Ok(self.conclude(None, Termination::Meet, mode));
        }

        let mut queues = [VecDeque::from([SearchState::new(front.clone(), 0)]), VecDeque::from([SearchState::new(back.clone(), 0)])];
        let mut pending = [HashSet::from([front]), HashSet::from([back])];
        loop {
            if self.stats.meet.is_some() {
                return Ok(self.conclude(None, Termination::Meet, mode));
            }
            if queues.iter().all(VecDeque::is_empty) {
                return Ok(self.conclude(None, Termination::Exhausted, mode));
            }
            self.stats.iterations += 1;
            let mut new: [Vec<Valuated>; 2] = [Vec::new(), Vec::new()];
            let mut halt = None;
            for (side, dir) in [(0, SearchDirection::Forward), (1, SearchDirection::Backward)] {
                let Some(s) = queues[side].pop_front() else { continue };
                pending[side].remove(&s.bitmap);
                let (done, h) = self.expand(&s, dir, Some(&pending[1 - side]), pruning);
                if mode != Mode::Diversified {
                    for v in &done {
                        pending[side].insert(v.state.bitmap.clone());
                        queues[side].push_back(v.state.clone());
                    }
                }
                new[side] = done;
                if h.is_some() {
                    halt = h;
                    break;
                }
            }
            if pruning {
                self.record_pairs(&new[0], &new[1]);
            }
            if mode == Mode::Diversified {
                self.enqueue_diversified(new, &mut queues, &mut pending);
            }
            if halt.is_some() {
                return Ok(self.conclude(halt, Termination::Exhausted, mode));
            }
        }
    }

    /// Finishes a bidirectional run; the diversified variant also selects
    /// its final k-set from the grid occupants.
    fn conclude(self, halt: Option<Halt>, termination: Termination, mode: Mode) -> SearchOutcome {
        let (k, alpha) = (self.cfg.k, self.cfg.alpha);
        let mut out = self.finish(halt, termination);
        if mode == Mode::Diversified {
            let occupants: Vec<Occupant> = out.grid.front().into_iter().cloned().collect();
            out.diversified = Some(
                diversify_level(&occupants, k, alpha, &out.log)
                    .into_iter()
                    .map(|i| occupants[i].bitmap.clone())
                    .collect(),
            );
        }
        out
    }

    fn record_pairs(&mut self, fwd: &[Valuated], bwd: &[Valuated]) {
        for f in fwd {
            for b in bwd {
                if b.state.bitmap.is_subset_of(&f.state.bitmap)
                    && param_eps_dominates(
                        &PerfVector::valuated(&b.values),
                        &PerfVector::valuated(&f.values),
                        self.cfg.epsilon,
                    )
                {
                    self.stats
                        .region
                        .record(f.state.bitmap.clone(), b.state.bitmap.clone());
                }
            }
        }
    }

    fn enqueue_diversified(
        &mut self,
        new: [Vec<Valuated>; 2],
        queues: &mut [VecDeque<SearchState>; 2],
        pending: &mut [HashSet<StateBitmap>; 2],
    ) {
        let tagged: Vec<(usize, Valuated)> = new
            .into_iter()
            .enumerate()
            .flat_map(|(side, v)| v.into_iter().map(move |x| (side, x)))
            .collect();
        let level: Vec<Occupant> = tagged
            .iter()
            .map(|(_, v)| Occupant {
                bitmap: v.state.bitmap.clone(),
                values: v.values.clone(),
            })
            .collect();
        for i in diversify_level(&level, self.cfg.k, self.cfg.alpha, &self.log) {
            let (side, v) = &tagged[i];
            pending[*side].insert(v.state.bitmap.clone());
            queues[*side].push_back(v.state.clone());
        }
    }
}
